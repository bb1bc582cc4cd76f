#pragma once

#include "netrate/data.hpp"
#include "netrate/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace netrate {

enum class CovariateRegime { independent_senders, dependent_senders };

std::string to_string(CovariateRegime r);
CovariateRegime covariate_regime_from_string(const std::string& s);

/// Design of the synthetic-network generator: per-sender Gamma frailty,
/// sender-specific baselines (1 for the first half of nodes, 1.2 for the
/// rest), and three static covariates (thresholded compound-symmetric
/// Gaussian, Uniform(0,1), banded Gaussian with bandwidth 1).
struct SimulationConfig {
    int n = 150;
    double rho = 0.0;
    Vec beta0 = (Vec(3) << 0.5, -0.5, 0.5).finished();
    double frailty_shape = 16.0;
    double frailty_rate = 16.0;
    double horizon = 1.0;
    CovariateRegime regime = CovariateRegime::independent_senders;
    std::uint64_t seed = 0;
    double expected_events_cap = 1e7;

    void validate() const;
    /// Baseline rate of sender with zero-based index i.
    double baseline_rate(int i) const { return (i + 1) <= n / 2.0 ? 1.0 : 1.2; }
};

/// Everything the generator drew, for oracle tests: frailties and the
/// realized conditional event rate of every ordered pair.
struct SimTruth {
    Vec eta;
    std::vector<double> pair_rates;        // aligned with dataset pair order
    std::vector<std::pair<int, int>> pair_index;
};

/// Static covariates for all ordered pairs under the configured regime.
CovariateSet gen_covariates(const SimulationConfig& config);

/// Conditionally homogeneous Poisson events: count ~ Poisson(rate * T) per
/// pair, times iid Uniform(0, T] sorted.
EventLog gen_events(const SimulationConfig& config, const CovariateSet& covariates,
                    SimTruth* truth = nullptr);

/// gen_covariates + gen_events + node labels "1".."n" assembled into a Dataset.
Dataset simulate_dataset(const SimulationConfig& config, SimTruth* truth = nullptr);

/// Per-coefficient Monte Carlo summary.
struct McCoefficientSummary {
    double bias = 0.0;
    double se = 0.0;       // SD of the estimates across replications
    double see = 0.0;      // mean naive standard error
    double see_jk = 0.0;
    double see_jk2 = 0.0;
    double ecp = 0.0;      // empirical coverage of naive intervals
    double ecp_jk = 0.0;
    double ecp_jk2 = 0.0;
};

struct McSummary {
    std::vector<McCoefficientSummary> coefficients;
    int replications_requested = 0;
    int replications_used = 0;
    int failures = 0;
};

struct McOptions {
    int jk2_draws = 150;
    double alpha = 0.05;
    int threads = 1;
    double fit_tol = 1e-8;
    int fit_max_iter = 100;
    double max_failure_fraction = 0.1;
    /// Called after each finished replication with (done, total).
    std::function<void(int, int)> progress;
};

/// Thrown when more than max_failure_fraction of the replications failed;
/// carries the summary over the usable replications so callers can still
/// emit a partial result.
class McPartialFailure : public EstimationError {
public:
    McPartialFailure(const std::string& what, McSummary partial)
        : EstimationError(what), partial_(std::move(partial)) {}
    const McSummary& partial() const { return partial_; }

private:
    McSummary partial_;
};

/// Generate/fit/estimate-variance over `replications` independent datasets;
/// per-replication seeds derive deterministically from config.seed, so the
/// summary is independent of thread count.
McSummary mc_study(const SimulationConfig& config, int replications, const McOptions& opts);

/// Summary CSV, one row per coefficient.
std::string mc_summary_csv(const McSummary& summary);

}  // namespace netrate
