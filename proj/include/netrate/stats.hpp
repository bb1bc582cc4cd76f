#pragma once

namespace netrate {

/// Standard normal CDF.
double norm_cdf(double x);

/// Standard normal quantile, p in (0, 1).
double norm_quantile(double p);

/// Two-sided normal p-value for a Wald statistic z.
double two_sided_p(double z);

/// Chi-square CDF with k degrees of freedom.
double chisq_cdf(double x, int k);

/// Chi-square quantile, p in (0, 1), k >= 1.
double chisq_quantile(double p, int k);

}  // namespace netrate
