#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ctxlqr/benchmark.hpp"
#include "ctxlqr/learner.hpp"
#include "ctxlqr/sim.hpp"

namespace ctxlqr {

/// Declarative description of one experiment run. A value <= 0 for
/// decoder_norm_cap or < 0 for noise_scale means "derive from the
/// benchmark" (||theta_star||_F and sqrt(noise_sigma2) respectively);
/// resolve_config makes those concrete.
struct ExperimentConfig {
    BenchmarkConfig benchmark;
    Hyperparams hyperparams;
    int episodes = 100;  // K
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    bool emit_trajectories = false;
    int eval_every = 1;  // test-set evaluation interval

    void validate() const;
};

/// Fill in derived defaults (trajectory targets, auto hyperparams) and
/// validate. The returned config is fully concrete and serializes to an
/// equivalent config.
ExperimentConfig resolve_config(ExperimentConfig config);

/// One emitted metrics row. `episode` counts completed training episodes
/// at the time the reported decoder was formed: the row labeled k carries
/// the estimate after k episodes of data (so episode 0 is the zero
/// decoder) together with the regret of the episode played with it.
struct MetricsRow {
    int episode = 0;
    double frobenius_error = 0.0;
    std::optional<double> mean_control_error;
    double episode_regret = 0.0;
    double cumulative_regret = 0.0;
    double det_v = 0.0;
    double beta_used = 0.0;
};

struct ExperimentResult {
    std::vector<MetricsRow> rows;
    std::vector<EpisodeRecord> records;  // populated when emit_trajectories
    std::vector<double> train_masses;
    std::vector<double> test_masses;
    Decoder final_estimate;
    Decoder policy_map;  // optimist drawn uniformly from the history
    double policy_map_control_error = 0.0;
    double max_feature_sq = 0.0;  // empirical max ||z||^2 over the run
};

using EpisodeObserver =
    std::function<void(const LearnerState& state, const MetricsRow& row)>;

/// Run the full online loop for K episodes: sample a mass, build its
/// context, pick the optimistic candidate, roll the episode, fold every
/// transition into the learner and refit. The Gram-determinant bound is
/// asserted after each episode against the empirical feature-norm cap.
/// The observer, when set, sees the learner state after each episode.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const EpisodeObserver& observer = {});

/// Write metrics.csv, the resolved config echo config.json (including the
/// materialized train/test masses) and, when requested, trajectories.csv
/// into config.output_dir.
void emit_outputs(const ExperimentResult& result,
                  const ExperimentConfig& config);

/// Parse a config from its JSON text / file form. Unknown keys are
/// rejected; missing keys take the documented defaults.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Serialized form of a resolved config; parse_config_text inverts it.
std::string render_config(const ExperimentConfig& config,
                          const ExperimentResult* result = nullptr);

}  // namespace ctxlqr
