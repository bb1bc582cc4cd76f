#include "netrate/reports.hpp"

#include "netrate/csv.hpp"

#include <fstream>
#include <sstream>

namespace netrate {

using nlohmann::json;

const char* kToolVersion = "0.1.0";

namespace {

json vec_to_json(const Vec& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json mat_to_json(const Mat& m) {
    json out = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(row);
    }
    return out;
}

}  // namespace

json fit_report(const FitResult& fit) {
    json j;
    j["beta_hat"] = vec_to_json(fit.beta_hat);
    j["score_norm"] = fit.score_norm;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["log_pl"] = fit.log_pl;
    return j;
}

json variance_report(const VarianceEstimates& var, const InferenceReport& inf,
                     std::uint64_t seed) {
    json j;
    j["method"] = to_string(var.method);
    j["sigma1"] = mat_to_json(var.sigma1);
    j["sigma2"] = mat_to_json(var.sigma2);
    j["sandwich"] = mat_to_json(var.sandwich);
    json se = json::array();
    json ci = json::array();
    for (const auto& c : inf.coefficients) {
        se.push_back(c.std_error);
        ci.push_back(json::array({c.ci_low, c.ci_high}));
    }
    j["se"] = se;
    j["ci"] = ci;
    j["alpha"] = inf.alpha;
    j["replicates"] = {{"total", var.replicate_fits}, {"failed", var.failed_replicates}};
    j["seed"] = seed;
    return j;
}

json inference_report(const InferenceReport& inf) {
    json j;
    j["alpha"] = inf.alpha;
    json coeffs = json::array();
    for (const auto& c : inf.coefficients) {
        json e;
        e["estimate"] = c.estimate;
        e["std_error"] = c.std_error;
        e["wald_z"] = c.wald_z;
        e["p_value"] = c.p_value;
        e["ci"] = json::array({c.ci_low, c.ci_high});
        coeffs.push_back(e);
    }
    j["coefficients"] = coeffs;
    j["joint"] = {{"chi_square", inf.chi_square},
                  {"dof", inf.dof},
                  {"critical_value", inf.critical_value},
                  {"reject_null", inf.reject_null},
                  {"beta_null", vec_to_json(inf.beta_null)}};
    return j;
}

std::string baseline_csv(const BaselineCurve& curve) {
    std::ostringstream os;
    os << "time,cum_baseline\n";
    for (std::size_t k = 0; k < curve.jump_times.size(); ++k)
        os << format_double(curve.jump_times[k]) << ','
           << format_double(curve.cumulative[k]) << '\n';
    return os.str();
}

json RunManifest::to_json() const {
    json j;
    j["command"] = command;
    j["config"] = config;
    j["inputs"] = input_digests;
    j["seed"] = seed;
    j["version"] = kToolVersion;
    j["duration_seconds"] = duration_seconds;
    return j;
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << contents;
    if (!out) throw ValidationError("failed writing file: " + path);
}

json simulation_config_to_json(const SimulationConfig& config) {
    json j;
    j["n"] = config.n;
    j["rho"] = config.rho;
    j["beta0"] = vec_to_json(config.beta0);
    j["frailty"] = {{"shape", config.frailty_shape}, {"rate", config.frailty_rate}};
    j["horizon"] = config.horizon;
    j["regime"] = to_string(config.regime);
    j["seed"] = config.seed;
    return j;
}

SimulationConfig simulation_config_from_json(const json& j) {
    SimulationConfig config;
    try {
        if (j.contains("n")) config.n = j.at("n").get<int>();
        if (j.contains("rho")) config.rho = j.at("rho").get<double>();
        if (j.contains("beta0")) {
            auto b = j.at("beta0").get<std::vector<double>>();
            config.beta0 = Eigen::Map<const Vec>(b.data(), static_cast<int>(b.size()));
        }
        if (j.contains("frailty")) {
            config.frailty_shape = j.at("frailty").at("shape").get<double>();
            config.frailty_rate = j.at("frailty").at("rate").get<double>();
        }
        if (j.contains("horizon")) config.horizon = j.at("horizon").get<double>();
        if (j.contains("regime"))
            config.regime = covariate_regime_from_string(j.at("regime").get<std::string>());
        if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("expected_events_cap"))
            config.expected_events_cap = j.at("expected_events_cap").get<double>();
    } catch (const json::exception& e) {
        throw ConfigError("simulation config: " + std::string(e.what()));
    }
    config.validate();
    return config;
}

SimulationConfig load_simulation_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + ": " + std::string(e.what()));
    }
    return simulation_config_from_json(j);
}

}  // namespace netrate
