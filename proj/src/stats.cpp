#include "netrate/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>

namespace netrate {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double norm_quantile(double p) {
    static const boost::math::normal_distribution<double> dist;
    return boost::math::quantile(dist, p);
}

double two_sided_p(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

double chisq_cdf(double x, int k) {
    boost::math::chi_squared_distribution<double> dist(k);
    return boost::math::cdf(dist, x);
}

double chisq_quantile(double p, int k) {
    boost::math::chi_squared_distribution<double> dist(k);
    return boost::math::quantile(dist, p);
}

}  // namespace netrate
