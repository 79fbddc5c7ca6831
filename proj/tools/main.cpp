#include <iostream>

#include <CLI11.hpp>

#include "experiment.hpp"

namespace {

struct CommonFlags {
    std::string config;
    rwdre::cli::Overrides overrides;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config, "experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", flags.overrides.seed, "master seed, replaces the config value");
    cmd->add_option("--replicas", flags.overrides.replicas, "number of replicas");
    cmd->add_option("--horizon", flags.overrides.horizon, "time horizon");
    cmd->add_option("--out", flags.overrides.out, "output directory");
    cmd->add_option("--threads", flags.overrides.threads, "worker threads");
}

}  // namespace

int main(int argc, char** argv) {
    using namespace rwdre::cli;

    CLI::App app{"Random walks in dynamic random environments: simulation and estimation"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::size_t replica = 0;
    std::string manifest;
    std::optional<std::string> replay_out;

    auto* simulate = app.add_subcommand("simulate", "simulate one replica and dump its path");
    add_common(simulate, flags);
    simulate->add_option("--replica", replica, "replica index");
    auto* estimate = app.add_subcommand("estimate", "estimate the speed");
    add_common(estimate, flags);
    auto* verify = app.add_subcommand("verify", "run the property suites");
    add_common(verify, flags);
    auto* mixing = app.add_subcommand("mixing", "cone discrepancy and cone-stay probabilities over depths");
    add_common(mixing, flags);
    auto* replay_cmd = app.add_subcommand("replay", "rerun from a manifest and compare summaries");
    replay_cmd->add_option("--manifest", manifest, "manifest.json of an earlier run")->required();
    replay_cmd->add_option("--out", replay_out, "output directory for the rerun");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigFailure;
    }

    try {
        if (replay_cmd->parsed()) return replay(manifest, replay_out);
        const std::string command = app.get_subcommands().front()->get_name();
        const ExperimentConfig config = load_config(flags.config, flags.overrides);
        RunOptions options;
        options.replica = replica;
        const RunResult result = run_experiment(command, config, options);
        std::cout << result.summary_text;
        return result.exit_code;
    } catch (const rwdre::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigFailure;
    } catch (const rwdre::WindowOverrun& e) {
        std::cerr << "window overrun: " << e.what() << '\n';
        return kOverrunFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kAcceptanceFailure;
    }
}
