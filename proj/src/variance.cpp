#include "netrate/variance.hpp"

#include "netrate/parallel.hpp"
#include "netrate/rng.hpp"
#include "netrate/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace netrate {

std::string to_string(VarianceMethod m) {
    switch (m) {
        case VarianceMethod::naive: return "naive";
        case VarianceMethod::jackknife1: return "jackknife1";
        case VarianceMethod::jackknife2: return "jackknife2";
    }
    return "naive";
}

VarianceMethod variance_method_from_string(const std::string& s) {
    if (s == "naive") return VarianceMethod::naive;
    if (s == "jk" || s == "jackknife1" || s == "jk1") return VarianceMethod::jackknife1;
    if (s == "jk2" || s == "jackknife2") return VarianceMethod::jackknife2;
    throw ConfigError("unknown variance method: " + s);
}

Mat sigma1_hat(const Dataset& ds, const Vec& beta_hat, bool* rank_deficient) {
    detail::Engine engine(ds, NodeDeletion::none());
    Mat s1 = engine.event_outer_products(beta_hat);
    if (rank_deficient) {
        Eigen::SelfAdjointEigenSolver<Mat> es(s1);
        double max_ev = es.eigenvalues().cwiseAbs().maxCoeff();
        *rank_deficient = max_ev <= 0.0 || es.eigenvalues().minCoeff() <= 1e-12 * max_ev;
    }
    return s1;
}

namespace {

struct ReplicateResult {
    bool ok = false;
    Mat outer;
};

/// Shared jackknife loop: refit under each deletion (warm start at
/// beta_hat), evaluate the full-sample score there, accumulate squared
/// brackets in deletion order.
Mat jackknife_accumulate(const Dataset& ds, const Vec& beta_hat,
                         const std::vector<NodeDeletion>& deletions,
                         const JackknifeOptions& opts, double scale_per_success,
                         int* replicate_fits, int* failed_replicates) {
    const int p = ds.dim();
    detail::Engine full(ds, NodeDeletion::none());

    FitOptions fit_opts;
    fit_opts.init = beta_hat;
    fit_opts.tol = opts.tol;
    fit_opts.max_iter = opts.max_iter;
    fit_opts.beta_bound = opts.beta_bound;

    const int count = static_cast<int>(deletions.size());
    std::vector<ReplicateResult> results(count);
    parallel_for(count, opts.threads, [&](int i) {
        try {
            FitResult refit = fit(ds, fit_opts, deletions[i]);
            if (!refit.converged) return;  // left not ok
            Vec bracket = full.eval(refit.beta_hat, true, false).score;
            results[i].outer = bracket * bracket.transpose();
            results[i].ok = true;
        } catch (const EstimationError&) {
            // replicate failure (separation, no events, overflow): skipped
        }
    });

    int failures = 0;
    Mat acc = Mat::Zero(p, p);
    for (const ReplicateResult& r : results) {
        if (r.ok)
            acc += r.outer;
        else
            ++failures;
    }
    if (replicate_fits) *replicate_fits = count;
    if (failed_replicates) *failed_replicates = failures;
    if (failures > opts.max_failure_fraction * count)
        throw EstimationError("jackknife: " + std::to_string(failures) + " of " +
                              std::to_string(count) + " replicate refits failed");
    const int successes = count - failures;
    if (successes == 0) throw EstimationError("jackknife: no replicate refit succeeded");
    // rescale so skipped replicates do not shrink the total
    acc *= static_cast<double>(count) / static_cast<double>(successes);
    acc *= scale_per_success;
    return 0.5 * (acc + acc.transpose()).eval();
}

}  // namespace

Mat sigma2_jackknife1(const Dataset& ds, const Vec& beta_hat, const JackknifeOptions& opts,
                      int* replicate_fits, int* failed_replicates) {
    const int n = ds.nodes().count();
    if (n < 3) throw ValidationError("odd-one-out jackknife needs at least 3 nodes");
    std::vector<NodeDeletion> deletions;
    deletions.reserve(n);
    for (int s = 0; s < n; ++s) deletions.push_back(NodeDeletion::one(s));
    return jackknife_accumulate(ds, beta_hat, deletions, opts, 0.5, replicate_fits,
                                failed_replicates);
}

Mat sigma2_jackknife2(const Dataset& ds, const Vec& beta_hat, int draws, std::uint64_t seed,
                      const JackknifeOptions& opts, int* replicate_fits,
                      int* failed_replicates) {
    const int n = ds.nodes().count();
    if (n < 4) throw ValidationError("odd-two-out jackknife needs at least 4 nodes");
    if (draws < 1) throw ValidationError("odd-two-out jackknife needs draws >= 1");

    SeedSequence seeds(seed);
    std::vector<NodeDeletion> deletions;
    deletions.reserve(draws);
    for (int d = 0; d < draws; ++d) {
        auto engine = make_engine(seeds.stream("jk2-draw", static_cast<std::uint64_t>(d)));
        std::uniform_int_distribution<int> first(0, n - 1);
        int s = first(engine);
        std::uniform_int_distribution<int> second(0, n - 2);
        int t = second(engine);
        if (t >= s) ++t;
        deletions.push_back(NodeDeletion::two(s, t));
    }
    // per-draw mean, halved for the doubled deletion, times the n/2 absolute
    // scale shared with the odd-one-out estimator
    const double scale = static_cast<double>(n) / (4.0 * static_cast<double>(draws));
    return jackknife_accumulate(ds, beta_hat, deletions, opts, scale, replicate_fits,
                                failed_replicates);
}

Mat sigma2_jackknife2_enumerated(const Dataset& ds, const Vec& beta_hat,
                                 const std::vector<std::pair<int, int>>& node_pairs,
                                 const JackknifeOptions& opts, int* replicate_fits,
                                 int* failed_replicates) {
    const int n = ds.nodes().count();
    if (n < 4) throw ValidationError("odd-two-out jackknife needs at least 4 nodes");
    if (node_pairs.empty()) throw ValidationError("odd-two-out jackknife needs node pairs");
    std::vector<NodeDeletion> deletions;
    deletions.reserve(node_pairs.size());
    for (auto [s, t] : node_pairs) {
        if (s == t || s < 0 || t < 0 || s >= n || t >= n)
            throw ValidationError("invalid node pair in odd-two-out enumeration");
        deletions.push_back(NodeDeletion::two(s, t));
    }
    const double scale =
        static_cast<double>(n) / (4.0 * static_cast<double>(node_pairs.size()));
    return jackknife_accumulate(ds, beta_hat, deletions, opts, scale, replicate_fits,
                                failed_replicates);
}

Mat sandwich(const Mat& sigma1, const Mat& sigma2) {
    const int p = static_cast<int>(sigma1.rows());
    Eigen::SelfAdjointEigenSolver<Mat> es(sigma1);
    const Vec& ev = es.eigenvalues();
    double max_ev = ev.cwiseAbs().maxCoeff();
    if (max_ev <= 0.0 || ev.minCoeff() <= max_ev * 1e-12) {
        std::ostringstream msg;
        msg << "sigma1 is singular or ill-conditioned; deficient direction(s):";
        for (int k = 0; k < p; ++k) {
            if (ev(k) <= max_ev * 1e-12) {
                msg << " [";
                for (int r = 0; r < p; ++r) msg << (r ? "," : "") << es.eigenvectors()(r, k);
                msg << "]";
            }
        }
        throw SingularMatrixError(msg.str());
    }
    Eigen::LDLT<Mat> ldlt(sigma1);
    Mat v = ldlt.solve(ldlt.solve(sigma2).transpose());
    return 0.5 * (v + v.transpose()).eval();
}

VarianceEstimates estimate_variance(const Dataset& ds, const Vec& beta_hat,
                                    VarianceMethod method, int jk2_draws,
                                    std::uint64_t seed, const JackknifeOptions& opts) {
    VarianceEstimates out;
    out.method = method;
    out.sigma1 = sigma1_hat(ds, beta_hat, &out.sigma1_rank_deficient);
    switch (method) {
        case VarianceMethod::naive:
            out.sigma2 = out.sigma1;  // efficient case: Sigma1 = Sigma2
            break;
        case VarianceMethod::jackknife1:
            out.sigma2 = sigma2_jackknife1(ds, beta_hat, opts, &out.replicate_fits,
                                           &out.failed_replicates);
            break;
        case VarianceMethod::jackknife2:
            out.sigma2 = sigma2_jackknife2(ds, beta_hat, jk2_draws, seed, opts,
                                           &out.replicate_fits, &out.failed_replicates);
            break;
    }
    out.sandwich = sandwich(out.sigma1, out.sigma2);
    return out;
}

InferenceReport inference(const FitResult& fit, const VarianceEstimates& var, double alpha,
                          const Vec& beta_null) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0, 1)");
    const int p = static_cast<int>(fit.beta_hat.size());

    InferenceReport report;
    report.alpha = alpha;
    report.beta_null = beta_null.size() == 0 ? Vec::Zero(p).eval() : beta_null;
    if (report.beta_null.size() != p) throw ConfigError("beta_null has wrong dimension");

    const double z_crit = norm_quantile(1.0 - alpha / 2.0);
    report.coefficients.resize(p);
    for (int r = 0; r < p; ++r) {
        double v = var.sandwich(r, r);
        if (!(v > 0.0))
            throw EstimationError("nonpositive variance for coefficient " + std::to_string(r));
        CoefficientInference& ci = report.coefficients[r];
        ci.estimate = fit.beta_hat(r);
        ci.std_error = std::sqrt(v);
        ci.wald_z = (ci.estimate - report.beta_null(r)) / ci.std_error;
        ci.p_value = two_sided_p(ci.wald_z);
        ci.ci_low = ci.estimate - z_crit * ci.std_error;
        ci.ci_high = ci.estimate + z_crit * ci.std_error;
    }

    Vec diff = fit.beta_hat - report.beta_null;
    Eigen::LDLT<Mat> ldlt(var.sandwich);
    if (ldlt.info() != Eigen::Success)
        throw SingularMatrixError("sandwich covariance is not invertible");
    report.chi_square = diff.dot(ldlt.solve(diff));
    report.dof = p;
    report.critical_value = chisq_quantile(1.0 - alpha, p);
    report.reject_null = report.chi_square > report.critical_value;
    return report;
}

}  // namespace netrate
