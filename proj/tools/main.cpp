#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "ctxlqr/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Online learning-to-control experiments for contextual LQR"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool emit_trajectories = false;

    CLI::App* run = app.add_subcommand("run", "run one experiment config");
    run->add_option("config", config_path, "path to the JSON config")
        ->required()
        ->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    run->add_option("--output-dir", output_dir, "override the output directory");
    run->add_flag("--emit-trajectories", emit_trajectories,
                  "also write per-episode trajectories.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        ctxlqr::ExperimentConfig config = ctxlqr::load_config(config_path);
        if (seed_set) config.seed = seed;
        if (!output_dir.empty()) config.output_dir = output_dir;
        if (emit_trajectories) config.emit_trajectories = true;
        config = ctxlqr::resolve_config(config);

        const ctxlqr::ExperimentResult result = ctxlqr::run_experiment(config);
        ctxlqr::emit_outputs(result, config);

        const ctxlqr::MetricsRow& last = result.rows.back();
        std::cout << "episodes: " << config.episodes
                  << "  trajectory: " << to_string(config.benchmark.trajectory.kind)
                  << "  seed: " << config.seed << '\n'
                  << "final decoder error (Frobenius): "
                  << ctxlqr::decoder_error(
                         result.final_estimate,
                         ctxlqr::build_theta_star(
                             config.benchmark.velocity_decay))
                  << '\n'
                  << "cumulative regret: " << last.cumulative_regret << '\n'
                  << "policy-map mean control error: "
                  << result.policy_map_control_error << '\n'
                  << "outputs written to " << config.output_dir << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
