#include "netrate/commands.hpp"

#include "netrate/csv.hpp"
#include "netrate/dataset_io.hpp"
#include "netrate/estimation.hpp"
#include "netrate/ingest.hpp"
#include "netrate/reports.hpp"
#include "netrate/rng.hpp"
#include "netrate/sha256.hpp"
#include "netrate/simulation.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace netrate {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void write_manifest(const fs::path& out_dir, RunManifest manifest) {
    write_file((out_dir / "manifest.json").string(), manifest.to_json().dump(2) + "\n");
}

std::map<std::string, std::string> digest_dataset_dir(const fs::path& dir) {
    std::map<std::string, std::string> digests;
    for (const char* f : {"events.csv", "nodes.csv", "covariates.csv", "meta.json"}) {
        fs::path p = dir / f;
        if (fs::exists(p)) digests[p.string()] = sha256_file(p.string());
    }
    return digests;
}

}  // namespace

void cmd_fit(const FitCommandOptions& opts) {
    Stopwatch watch;
    if (opts.out_dir.empty()) throw ConfigError("fit: output directory required");
    fs::create_directories(opts.out_dir);
    const fs::path out(opts.out_dir);

    Dataset ds = load_dataset(opts.dataset_dir);

    FitOptions fopts;
    fopts.tol = opts.tol;
    fopts.max_iter = opts.max_iter;
    FitResult fr = fit(ds, fopts);
    write_file((out / "fit.json").string(), fit_report(fr).dump(2) + "\n");
    if (!fr.converged)
        throw EstimationError("fit did not converge within " +
                              std::to_string(opts.max_iter) + " iterations");

    JackknifeOptions jk;
    jk.tol = opts.tol;
    jk.max_iter = opts.max_iter;
    jk.threads = opts.threads;
    std::uint64_t jk2_seed = SeedSequence(opts.seed).stream("jk2-draws");
    VarianceEstimates var =
        estimate_variance(ds, fr.beta_hat, opts.variance, opts.jk2_draws, jk2_seed, jk);

    Vec beta_null;
    if (!opts.beta_null.empty())
        beta_null = Eigen::Map<const Vec>(opts.beta_null.data(),
                                          static_cast<int>(opts.beta_null.size()));
    InferenceReport inf = inference(fr, var, opts.alpha, beta_null);

    write_file((out / "variance.json").string(),
               variance_report(var, inf, jk2_seed).dump(2) + "\n");
    write_file((out / "inference.json").string(), inference_report(inf).dump(2) + "\n");
    write_file((out / "baseline.csv").string(),
               baseline_csv(breslow_baseline(ds, fr.beta_hat)));

    RunManifest manifest;
    manifest.command = "fit";
    manifest.config = {{"dataset_dir", opts.dataset_dir},
                       {"tol", opts.tol},
                       {"max_iter", opts.max_iter},
                       {"variance", to_string(opts.variance)},
                       {"jk2_draws", opts.jk2_draws},
                       {"alpha", opts.alpha},
                       {"threads", opts.threads}};
    manifest.input_digests = digest_dataset_dir(opts.dataset_dir);
    manifest.seed = opts.seed;
    manifest.duration_seconds = watch.seconds();
    write_manifest(out, std::move(manifest));
}

void cmd_simulate(const SimulateCommandOptions& opts) {
    Stopwatch watch;
    if (opts.out_dir.empty()) throw ConfigError("simulate: output directory required");
    SimulationConfig config = load_simulation_config(opts.config_file);

    SimTruth truth;
    Dataset ds = simulate_dataset(config, &truth);

    fs::create_directories(opts.out_dir);
    const fs::path out(opts.out_dir);
    save_dataset(ds, opts.out_dir);

    json truth_json;
    truth_json["beta0"] = std::vector<double>(config.beta0.data(),
                                              config.beta0.data() + config.beta0.size());
    truth_json["eta"] =
        std::vector<double>(truth.eta.data(), truth.eta.data() + truth.eta.size());
    json rates = json::array();
    for (std::size_t a = 0; a < truth.pair_rates.size(); ++a) {
        rates.push_back({{"sender", std::to_string(truth.pair_index[a].first + 1)},
                         {"recipient", std::to_string(truth.pair_index[a].second + 1)},
                         {"rate", truth.pair_rates[a]}});
    }
    truth_json["pair_rates"] = rates;
    write_file((out / "truth.json").string(), truth_json.dump(2) + "\n");

    RunManifest manifest;
    manifest.command = "simulate";
    manifest.config = simulation_config_to_json(config);
    manifest.input_digests = {{opts.config_file, sha256_file(opts.config_file)}};
    manifest.seed = config.seed;
    manifest.duration_seconds = watch.seconds();
    write_manifest(out, std::move(manifest));
}

void cmd_mc_study(const McStudyCommandOptions& opts) {
    Stopwatch watch;
    if (opts.out_csv.empty()) throw ConfigError("mc-study: output CSV path required");
    SimulationConfig config = load_simulation_config(opts.config_file);

    McOptions mc;
    mc.jk2_draws = opts.jk2_draws;
    mc.alpha = opts.alpha;
    mc.threads = opts.threads;
    if (opts.progress)
        mc.progress = [](int done, int total) {
            std::cerr << "replication " << done << "/" << total << " done\n";
        };

    auto write_outputs = [&](const McSummary& summary) {
        write_file(opts.out_csv, mc_summary_csv(summary));
        RunManifest manifest;
        manifest.command = "mc-study";
        manifest.config = simulation_config_to_json(config);
        manifest.config["replications"] = opts.replications;
        manifest.config["jk2_draws"] = opts.jk2_draws;
        manifest.config["alpha"] = opts.alpha;
        manifest.config["threads"] = opts.threads;
        manifest.input_digests = {{opts.config_file, sha256_file(opts.config_file)}};
        manifest.seed = config.seed;
        manifest.duration_seconds = watch.seconds();
        fs::path csv_path(opts.out_csv);
        fs::path dir = csv_path.has_parent_path() ? csv_path.parent_path() : fs::path(".");
        write_file((dir / (csv_path.stem().string() + ".manifest.json")).string(),
                   manifest.to_json().dump(2) + "\n");
    };

    try {
        McSummary summary = mc_study(config, opts.replications, mc);
        write_outputs(summary);
    } catch (const McPartialFailure& e) {
        write_outputs(e.partial());  // partial CSV retained, failure column included
        throw;
    }
}

void cmd_enron(const EnronCommandOptions& opts) {
    Stopwatch watch;
    if (opts.out_dir.empty()) throw ConfigError("enron: output directory required");
    fs::create_directories(opts.out_dir);
    const fs::path out(opts.out_dir);

    EnronReport prep;
    EventLog raw_log = enron_preprocess_file(opts.messages_csv, opts.max_recipients, &prep);
    NodeAttributes attrs = read_node_attributes_file(opts.attributes_csv);
    CovariateSet covs = build_homophily_covariates(attrs, opts.attributes);

    // the attribute table defines the node universe; events outside it are
    // dropped with accounting
    NodeSet nodes(attrs.node_order);
    EventLog log;
    log.horizon = raw_log.horizon;
    std::size_t events_outside = 0;
    for (auto& [pair, times] : raw_log.events) {
        if (nodes.contains(pair.first) && nodes.contains(pair.second))
            log.events.emplace(pair, std::move(times));
        else
            events_outside += times.size();
    }
    Dataset ds = Dataset::build(std::move(nodes), log, covs);
    save_dataset(ds, (out / "dataset").string());

    {
        json prep_json;
        prep_json["messages_read"] = prep.messages_read;
        prep_json["messages_dropped"] = prep.messages_dropped;
        prep_json["messages_retained"] = prep.messages_retained;
        prep_json["drop_fraction"] = prep.drop_fraction();
        prep_json["events"] = prep.events;
        prep_json["events_outside_node_set"] = events_outside;
        prep_json["rows_rejected"] = prep.rejected.size();
        prep_json["ties_perturbed"] = prep.ties_perturbed;
        prep_json["boundary_nudged"] = prep.boundary_nudged;
        write_file((out / "preprocess.json").string(), prep_json.dump(2) + "\n");
    }

    FitOptions fopts;
    fopts.tol = opts.tol;
    fopts.max_iter = opts.max_iter;
    FitResult fr = fit(ds, fopts);
    write_file((out / "fit.json").string(), fit_report(fr).dump(2) + "\n");
    if (!fr.converged)
        throw EstimationError("fit did not converge within " +
                              std::to_string(opts.max_iter) + " iterations");

    JackknifeOptions jk;
    jk.tol = opts.tol;
    jk.max_iter = opts.max_iter;
    jk.threads = opts.threads;

    bool s1_deficient = false;
    Mat s1 = sigma1_hat(ds, fr.beta_hat, &s1_deficient);
    if (s1_deficient) throw SingularMatrixError("sigma1 is rank deficient");
    Mat v_naive = sandwich(s1, s1);
    int jk1_fits = 0, jk1_failed = 0, jk2_fits = 0, jk2_failed = 0;
    Mat s2_jk1 = sigma2_jackknife1(ds, fr.beta_hat, jk, &jk1_fits, &jk1_failed);
    Mat v_jk1 = sandwich(s1, s2_jk1);
    std::uint64_t jk2_seed = SeedSequence(opts.seed).stream("jk2-draws");
    Mat s2_jk2 = sigma2_jackknife2(ds, fr.beta_hat, opts.jk2_draws, jk2_seed, jk,
                                   &jk2_fits, &jk2_failed);
    Mat v_jk2 = sandwich(s1, s2_jk2);

    // per-coefficient report: the estimate and the three standard errors
    json rows = json::array();
    std::ostringstream csv;
    csv << "coefficient,estimate,see_jk,see_jk2,see\n";
    for (std::size_t r = 0; r < opts.attributes.size(); ++r) {
        double est = fr.beta_hat(static_cast<int>(r));
        double se_jk = std::sqrt(v_jk1(r, r));
        double se_jk2 = std::sqrt(v_jk2(r, r));
        double se_naive = std::sqrt(v_naive(r, r));
        rows.push_back({{"coefficient", opts.attributes[r]},
                        {"estimate", est},
                        {"see_jk", se_jk},
                        {"see_jk2", se_jk2},
                        {"see", se_naive}});
        csv << opts.attributes[r] << ',' << format_double(est) << ','
            << format_double(se_jk) << ',' << format_double(se_jk2) << ','
            << format_double(se_naive) << '\n';
    }
    json report;
    report["coefficients"] = rows;
    report["replicates"] = {{"jk1", {{"total", jk1_fits}, {"failed", jk1_failed}}},
                            {"jk2", {{"total", jk2_fits}, {"failed", jk2_failed}}}};
    report["alpha"] = opts.alpha;
    write_file((out / "report.json").string(), report.dump(2) + "\n");
    write_file((out / "report.csv").string(), csv.str());

    RunManifest manifest;
    manifest.command = "enron";
    manifest.config = {{"messages_csv", opts.messages_csv},
                       {"attributes_csv", opts.attributes_csv},
                       {"attributes", opts.attributes},
                       {"max_recipients", opts.max_recipients},
                       {"tol", opts.tol},
                       {"max_iter", opts.max_iter},
                       {"jk2_draws", opts.jk2_draws},
                       {"alpha", opts.alpha},
                       {"threads", opts.threads}};
    manifest.input_digests = {{opts.messages_csv, sha256_file(opts.messages_csv)},
                              {opts.attributes_csv, sha256_file(opts.attributes_csv)}};
    manifest.seed = opts.seed;
    manifest.duration_seconds = watch.seconds();
    write_manifest(out, std::move(manifest));
}

int run_command(const std::string& name, const std::function<void()>& body) {
    auto emit = [&](const std::string& type, const std::string& message, int code) {
        json err;
        err["error"] = {{"command", name}, {"type", type}, {"message", message}};
        std::cerr << err.dump() << "\n";
        return code;
    };
    try {
        body();
        return kExitOk;
    } catch (const McPartialFailure& e) {
        return emit("partial_failure", e.what(), kExitPartialFailure);
    } catch (const SeparationError& e) {
        return emit("separation", e.what(), kExitNumericalError);
    } catch (const SingularMatrixError& e) {
        return emit("singular_matrix", e.what(), kExitNumericalError);
    } catch (const EstimationError& e) {
        return emit("numerical", e.what(), kExitNumericalError);
    } catch (const ParseError& e) {
        return emit("parse", e.what(), kExitInputError);
    } catch (const ValidationError& e) {
        return emit("validation", e.what(), kExitInputError);
    } catch (const ConfigError& e) {
        return emit("config", e.what(), kExitInputError);
    } catch (const nlohmann::json::exception& e) {
        return emit("config", e.what(), kExitInputError);
    } catch (const std::exception& e) {
        return emit("internal", e.what(), kExitInputError);
    }
}

}  // namespace netrate
