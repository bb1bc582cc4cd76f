#pragma once

#include "netrate/estimation.hpp"
#include "netrate/simulation.hpp"
#include "netrate/variance.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>

namespace netrate {

nlohmann::json fit_report(const FitResult& fit);

nlohmann::json variance_report(const VarianceEstimates& var, const InferenceReport& inf,
                               std::uint64_t seed);

nlohmann::json inference_report(const InferenceReport& inf);

std::string baseline_csv(const BaselineCurve& curve);

/// One manifest per run: command, resolved configuration, input digests,
/// seed, tool version and wall-clock duration.
struct RunManifest {
    std::string command;
    nlohmann::json config;
    std::map<std::string, std::string> input_digests;  // path -> sha256
    std::uint64_t seed = 0;
    double duration_seconds = 0.0;

    nlohmann::json to_json() const;
};

extern const char* kToolVersion;

/// Writes text to path atomically enough for our purposes; throws on failure.
void write_file(const std::string& path, const std::string& contents);

nlohmann::json simulation_config_to_json(const SimulationConfig& config);
SimulationConfig simulation_config_from_json(const nlohmann::json& j);
SimulationConfig load_simulation_config(const std::string& path);

}  // namespace netrate
