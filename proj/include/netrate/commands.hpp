#pragma once

#include "netrate/types.hpp"
#include "netrate/variance.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace netrate {

// Exit-code contract shared by the CLI and the command implementations:
// 0 success, 2 input error, 3 numerical failure, 4 partial MC failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNumericalError = 3;
inline constexpr int kExitPartialFailure = 4;

struct FitCommandOptions {
    std::string dataset_dir;
    std::string out_dir;
    double tol = 1e-8;
    int max_iter = 100;
    VarianceMethod variance = VarianceMethod::jackknife1;
    int jk2_draws = 150;
    double alpha = 0.05;
    std::vector<double> beta_null;  // empty -> zero vector
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Fit + variance + inference on a canonical dataset directory. Writes
/// fit.json, variance.json, inference.json, baseline.csv and manifest.json
/// into out_dir. Throws on input or numerical failure (fit.json is still
/// written when the solver ran but did not converge).
void cmd_fit(const FitCommandOptions& opts);

struct SimulateCommandOptions {
    std::string config_file;
    std::string out_dir;
};

/// Generates a synthetic dataset and writes the canonical serialization plus
/// truth.json (beta0, frailty draws, per-pair conditional rates) and
/// manifest.json.
void cmd_simulate(const SimulateCommandOptions& opts);

struct McStudyCommandOptions {
    std::string config_file;
    std::string out_csv;
    int replications = 250;
    int jk2_draws = 150;
    double alpha = 0.05;
    int threads = 1;
    bool progress = true;
};

/// Monte Carlo coverage study; writes the per-coefficient summary CSV (plus a
/// manifest next to it). On more than 10% replication failures the partial
/// CSV is still written and McPartialFailure propagates.
void cmd_mc_study(const McStudyCommandOptions& opts);

struct EnronCommandOptions {
    std::string messages_csv;
    std::string attributes_csv;
    std::vector<std::string> attributes = {"dept", "seniority", "gender"};
    int max_recipients = 5;
    std::string out_dir;
    double tol = 1e-8;
    int max_iter = 100;
    int jk2_draws = 150;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Full pipeline on an Enron-style corpus: preprocess, homophily covariates,
/// fit, naive + both jackknife variances. Writes the canonical dataset under
/// out_dir/dataset plus fit.json, report.json, report.csv, preprocess.json
/// and manifest.json.
void cmd_enron(const EnronCommandOptions& opts);

/// Maps an exception in flight to the exit-code contract and prints a
/// machine-readable error JSON to stderr. Used by the CLI dispatcher.
int run_command(const std::string& name, const std::function<void()>& body);

}  // namespace netrate
