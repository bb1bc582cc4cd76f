// netrate: proportional-rate models for directed pairwise event data.
//
// Subcommands: fit, simulate, mc-study, enron. All randomness flows from a
// single --seed through named substreams; outputs are byte-identical across
// runs and thread counts.

#include "netrate/commands.hpp"
#include "netrate/parallel.hpp"
#include "netrate/reports.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <string>

namespace {

int thread_default() {
    if (const char* env = std::getenv("NETRATE_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return netrate::default_thread_count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"proportional-rate models for directed pairwise event histories"};
    app.set_version_flag("--version", std::string(netrate::kToolVersion));
    app.require_subcommand(1);

    const int threads = thread_default();

    // fit
    netrate::FitCommandOptions fit_opts;
    fit_opts.threads = threads;
    std::string variance_name = "jk";
    auto* fit_cmd = app.add_subcommand("fit", "fit a canonical dataset directory");
    fit_cmd->add_option("dataset", fit_opts.dataset_dir, "canonical dataset directory")
        ->required();
    fit_cmd->add_option("--out", fit_opts.out_dir, "output directory")->required();
    fit_cmd->add_option("--tol", fit_opts.tol, "score-norm tolerance");
    fit_cmd->add_option("--max-iter", fit_opts.max_iter, "maximum Newton iterations");
    fit_cmd->add_option("--variance", variance_name, "naive | jk | jk2");
    fit_cmd->add_option("--jk2-draws", fit_opts.jk2_draws, "odd-two-out draws");
    fit_cmd->add_option("--alpha", fit_opts.alpha, "interval level (default 0.05)");
    fit_cmd->add_option("--null", fit_opts.beta_null, "null coefficients for the joint test");
    fit_cmd->add_option("--seed", fit_opts.seed, "master seed");
    fit_cmd->add_option("--threads", fit_opts.threads, "worker threads");

    // simulate
    netrate::SimulateCommandOptions sim_opts;
    auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic dataset");
    sim_cmd->add_option("--config", sim_opts.config_file, "simulation config JSON")
        ->required();
    sim_cmd->add_option("--out", sim_opts.out_dir, "output dataset directory")->required();

    // mc-study
    netrate::McStudyCommandOptions mc_opts;
    mc_opts.threads = threads;
    auto* mc_cmd = app.add_subcommand("mc-study", "Monte Carlo coverage study");
    mc_cmd->add_option("--config", mc_opts.config_file, "simulation config JSON")
        ->required();
    mc_cmd->add_option("--replications", mc_opts.replications, "number of replications")
        ->required();
    mc_cmd->add_option("--out", mc_opts.out_csv, "summary CSV path")->required();
    mc_cmd->add_option("--jk2-draws", mc_opts.jk2_draws, "odd-two-out draws");
    mc_cmd->add_option("--alpha", mc_opts.alpha, "interval level");
    mc_cmd->add_option("--threads", mc_opts.threads, "worker threads");
    mc_cmd->add_flag(
        "--quiet", [&](std::int64_t count) { mc_opts.progress = count <= 0; },
        "suppress per-replication progress");

    // enron
    netrate::EnronCommandOptions enron_opts;
    enron_opts.threads = threads;
    auto* enron_cmd =
        app.add_subcommand("enron", "full analysis of an Enron-style message table");
    enron_cmd->add_option("--messages", enron_opts.messages_csv, "message table CSV")
        ->required();
    enron_cmd->add_option("--attributes", enron_opts.attributes_csv, "node attribute CSV")
        ->required();
    enron_cmd->add_option("--attrs", enron_opts.attributes,
                          "attribute names (default dept seniority gender)");
    enron_cmd->add_option("--max-recipients", enron_opts.max_recipients,
                          "recipient cap (default 5)");
    enron_cmd->add_option("--out", enron_opts.out_dir, "output directory")->required();
    enron_cmd->add_option("--tol", enron_opts.tol, "score-norm tolerance");
    enron_cmd->add_option("--max-iter", enron_opts.max_iter, "maximum Newton iterations");
    enron_cmd->add_option("--jk2-draws", enron_opts.jk2_draws, "odd-two-out draws");
    enron_cmd->add_option("--alpha", enron_opts.alpha, "interval level");
    enron_cmd->add_option("--seed", enron_opts.seed, "master seed");
    enron_cmd->add_option("--threads", enron_opts.threads, "worker threads");

    CLI11_PARSE(app, argc, argv);

    if (fit_cmd->parsed()) {
        return netrate::run_command("fit", [&] {
            fit_opts.variance = netrate::variance_method_from_string(variance_name);
            netrate::cmd_fit(fit_opts);
        });
    }
    if (sim_cmd->parsed())
        return netrate::run_command("simulate", [&] { netrate::cmd_simulate(sim_opts); });
    if (mc_cmd->parsed())
        return netrate::run_command("mc-study", [&] { netrate::cmd_mc_study(mc_opts); });
    if (enron_cmd->parsed())
        return netrate::run_command("enron", [&] { netrate::cmd_enron(enron_opts); });
    return netrate::kExitInputError;
}
