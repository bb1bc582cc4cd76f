#pragma once

#include "netrate/data.hpp"
#include "netrate/estimation.hpp"
#include "netrate/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace netrate {

enum class VarianceMethod { naive, jackknife1, jackknife2 };

std::string to_string(VarianceMethod m);
VarianceMethod variance_method_from_string(const std::string& s);

struct VarianceEstimates {
    Mat sigma1;
    Mat sigma2;
    Mat sandwich;
    VarianceMethod method = VarianceMethod::naive;
    int replicate_fits = 0;
    int failed_replicates = 0;
    bool sigma1_rank_deficient = false;
};

struct JackknifeOptions {
    double tol = 1e-8;
    int max_iter = 100;
    double beta_bound = 50.0;
    int threads = 1;
    double max_failure_fraction = 0.2;
};

/// Curvature estimate: sum over events of {Z_ij(T) - Zbar(beta_hat, T)}^{x2}.
/// Sets *rank_deficient when the result has numerical rank < p.
Mat sigma1_hat(const Dataset& ds, const Vec& beta_hat, bool* rank_deficient = nullptr);

/// Odd-one-out jackknife variability estimate:
///
///   Sigma2 = (1/2) sum_s [ U_n(beta^(-s)) ]^{x2}
///
/// where beta^(-s) refits the estimating equation with node s and all its
/// incident pairs removed (warm-started at beta_hat) and U_n is the
/// full-sample score. Each squared term is the displacement of the full
/// estimating equation under one node deletion; the 1/2 corrects for every
/// pair being incident to exactly two nodes. Failed refits are skipped and
/// the sum rescaled by n/(n - failures); more than max_failure_fraction
/// failures is an error.
Mat sigma2_jackknife1(const Dataset& ds, const Vec& beta_hat,
                      const JackknifeOptions& opts = {}, int* replicate_fits = nullptr,
                      int* failed_replicates = nullptr);

/// Odd-two-out jackknife: node pairs {s,t} drawn uniformly without
/// replacement within a draw, independently across draws under the seed.
///
///   Sigma2 = (n / (4 draws)) sum_d [ U_n(beta^(-{s,t})) ]^{x2}
///
/// A two-node deletion carries twice the per-node displacement, so relative
/// to odd-one-out the per-draw mean is halved; the absolute scale matches
/// sigma2_jackknife1.
Mat sigma2_jackknife2(const Dataset& ds, const Vec& beta_hat, int draws,
                      std::uint64_t seed, const JackknifeOptions& opts = {},
                      int* replicate_fits = nullptr, int* failed_replicates = nullptr);

/// Odd-two-out with an explicit list of node pairs instead of random draws
/// (e.g. the full enumeration on small networks). Same normalization with
/// draws = node_pairs.size().
Mat sigma2_jackknife2_enumerated(const Dataset& ds, const Vec& beta_hat,
                                 const std::vector<std::pair<int, int>>& node_pairs,
                                 const JackknifeOptions& opts = {},
                                 int* replicate_fits = nullptr,
                                 int* failed_replicates = nullptr);

/// Sigma1^{-1} Sigma2 Sigma1^{-1}, symmetrized. Throws SingularMatrixError
/// (naming the deficient directions) when sigma1 has condition number
/// above 1e12.
Mat sandwich(const Mat& sigma1, const Mat& sigma2);

/// Convenience: sigma1 + sigma2 (per method) + sandwich with accounting.
VarianceEstimates estimate_variance(const Dataset& ds, const Vec& beta_hat,
                                    VarianceMethod method, int jk2_draws,
                                    std::uint64_t seed,
                                    const JackknifeOptions& opts = {});

struct CoefficientInference {
    double estimate = 0.0;
    double std_error = 0.0;
    double wald_z = 0.0;
    double p_value = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct InferenceReport {
    std::vector<CoefficientInference> coefficients;
    double alpha = 0.05;
    // joint Wald test of beta = beta_null
    Vec beta_null;
    double chi_square = 0.0;
    int dof = 0;
    double critical_value = 0.0;
    bool reject_null = false;
};

/// Per-coefficient Wald inference plus the joint chi-square region. beta_null
/// defaults to zero when empty.
InferenceReport inference(const FitResult& fit, const VarianceEstimates& var,
                          double alpha, const Vec& beta_null = Vec());

}  // namespace netrate
