#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "exptrack/harness.hpp"

// Experiment runner. Exit codes: 0 success, 1 configuration error,
// 2 acceptance assertion failure.

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;
    int replicates = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", args.seed, "seed base (overrides config)");
    cmd->add_option("--replicates", args.replicates, "replicate count (overrides config)");
}

exptrack::ExperimentConfig resolve(const CommonArgs& args) {
    exptrack::ExperimentConfig cfg = exptrack::load_config(args.config_path);
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    if (args.seed >= 0) cfg.seed_base = static_cast<std::uint64_t>(args.seed);
    if (args.replicates > 0) cfg.replicates = args.replicates;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"expert-tracking experiment harness"};
    app.require_subcommand(1);

    CommonArgs run_args, verify_args, lower_args;
    bool negative_control = false;

    CLI::App* run = app.add_subcommand("run", "replay a learner and write ledgers + summary");
    add_common(run, run_args);

    CLI::App* verify = app.add_subcommand("verify", "replay with per-step inequality checkers");
    add_common(verify, verify_args);
    verify->add_flag("--negative-control", negative_control,
                     "include a deliberately corrupted step that must fail");

    CLI::App* lower = app.add_subcommand("lowerbound",
                                         "measure the empirical adversarial regret floor");
    add_common(lower, lower_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return exptrack::cmd_run(resolve(run_args));
        if (verify->parsed()) return exptrack::cmd_verify(resolve(verify_args), negative_control);
        if (lower->parsed()) return exptrack::cmd_lowerbound(resolve(lower_args));
    } catch (const exptrack::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
