#include "ctxlqr/experiment.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ctxlqr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Shortest round-trip decimal form; locale-independent and byte-stable.
std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double logdet(const Matrix& V) {
    Eigen::LLT<Matrix> llt(V);
    if (llt.info() != Eigen::Success) {
        throw NumericalFailure("Gram matrix factorization failed");
    }
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// det(V) <= (1 + k(H-1) c^2 / q)^q with c^2 the empirical feature cap,
// checked in log space.
void check_det_bound(const Matrix& V, int completed_episodes, int horizon,
                     double max_feature_sq) {
    const double q = static_cast<double>(V.rows());
    const double ld = logdet(V);
    const double bound =
        q * std::log1p(static_cast<double>(completed_episodes) *
                       (horizon - 1) * max_feature_sq / q);
    if (ld > bound + 1e-9 * (1.0 + std::abs(bound))) {
        throw NumericalFailure(
            "Gram determinant bound violated after episode " +
            std::to_string(completed_episodes));
    }
}

void reject_unknown_keys(const json& j, const char* where,
                         std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) { known = true; break; }
        }
        if (!known) {
            throw ConfigError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

double number_or(const json& j, const char* key, double fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    return j.at(key).get<double>();
}

}  // namespace

void ExperimentConfig::validate() const {
    benchmark.validate();
    if (episodes < 1) throw ConfigError("need at least one episode");
    if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
    if (output_dir.empty()) throw ConfigError("output_dir must be set");

    const Hyperparams& hp = hyperparams;
    if (!(hp.riccati_norm_cap > 0.0)) {
        throw ConfigError("riccati_norm_cap must be positive");
    }
    if (!(hp.decoder_norm_cap > 0.0)) {
        throw ConfigError("decoder_norm_cap must be positive");
    }
    if (hp.noise_scale < 0.0) throw ConfigError("noise_scale must be >= 0");
    if (!(hp.feature_norm_cap > 0.0)) {
        throw ConfigError("feature_norm_cap must be positive");
    }
    if (!(hp.delta > 0.0 && hp.delta < 1.0)) {
        throw ConfigError("delta must lie in (0, 1)");
    }
    if (hp.n_candidates < 1) throw ConfigError("n_candidates must be >= 1");
}

ExperimentConfig resolve_config(ExperimentConfig config) {
    if (config.hyperparams.decoder_norm_cap <= 0.0) {
        config.hyperparams.decoder_norm_cap =
            build_theta_star(config.benchmark.velocity_decay).norm();
    }
    if (config.hyperparams.noise_scale < 0.0) {
        config.hyperparams.noise_scale =
            std::sqrt(config.benchmark.noise_sigma2);
    }
    config.validate();
    return config;
}

ExperimentResult run_experiment(const ExperimentConfig& raw_config,
                                const EpisodeObserver& observer) {
    const ExperimentConfig config = resolve_config(raw_config);
    const BenchmarkConfig& bench = config.benchmark;
    const Hyperparams& hp = config.hyperparams;
    const int K = config.episodes;
    const int H = bench.trajectory.horizon();

    const Decoder theta_star = build_theta_star(bench.velocity_decay);
    const TaskCosts costs =
        build_cost_matrices(bench.trajectory, bench.noise_sigma2);
    const Vector x_init = benchmark_initial_state(bench.trajectory);
    const NoiseModel noise = bench.noise_sigma2 > 0.0
                                 ? NoiseModel::gaussian(costs.noise_cov)
                                 : NoiseModel::zero(5);

    const Rng root(config.seed);

    ExperimentResult result;
    {
        // Train and test masses are materialized once, from their own stream.
        Rng mass_rng = root.split(0);
        result.train_masses.reserve(bench.n_train_masses);
        for (int i = 0; i < bench.n_train_masses; ++i) {
            result.train_masses.push_back(sample_mass(bench, mass_rng));
        }
        result.test_masses.reserve(bench.n_test_masses);
        for (int i = 0; i < bench.n_test_masses; ++i) {
            result.test_masses.push_back(sample_mass(bench, mass_rng));
        }
    }

    LearnerState state = init_learner(benchmark_dimensions());
    double cumulative_regret = 0.0;

    for (int k = 1; k <= K; ++k) {
        // Metrics snapshot of the decoder entering this episode.
        MetricsRow row;
        row.episode = k - 1;
        row.frobenius_error = decoder_error(state.theta_hat, theta_star);
        row.det_v = std::exp(logdet(state.V));
        row.beta_used = beta(state, hp, H);
        if ((k - 1) % config.eval_every == 0) {
            row.mean_control_error =
                mean_control_error(state.theta_hat, result.test_masses, bench);
        }

        const double mass =
            result.train_masses[(k - 1) % result.train_masses.size()];
        const Context ctx = context_for_mass(mass);
        Rng episode_rng = root.split(static_cast<std::uint64_t>(k));

        try {
            const Decoder optimist =
                select_optimistic(state, ctx, costs, x_init, hp, episode_rng);
            EpisodeRecord rec = run_episode(theta_star, optimist, ctx, costs,
                                            x_init, noise, episode_rng);

            for (int h = 0; h < H - 1; ++h) {
                result.max_feature_sq = std::max(
                    result.max_feature_sq, rec.features[h].squaredNorm());
                record_transition(state, rec.features[h], rec.states[h + 1]);
            }
            state.theta_hat = regress(state);
            state.episodes += 1;

            row.episode_regret = episode_regret(rec);
            cumulative_regret += row.episode_regret;
            row.cumulative_regret = cumulative_regret;

            check_det_bound(state.V, state.episodes, H, result.max_feature_sq);

            if (config.emit_trajectories) result.records.push_back(std::move(rec));
        } catch (const Error& e) {
            throw Error("episode " + std::to_string(k) + ": " + e.what());
        }

        if (observer) observer(state, row);
        result.rows.push_back(std::move(row));
    }

    result.final_estimate = state.theta_hat;
    Rng pick_rng = root.split(static_cast<std::uint64_t>(K) + 1);
    result.policy_map = output_policy_map(state, pick_rng);
    result.policy_map_control_error =
        mean_control_error(result.policy_map, result.test_masses, bench);
    return result;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    reject_unknown_keys(j, "config",
                        {"benchmark", "hyperparams", "episodes", "seed",
                         "output_dir", "emit_trajectories", "eval_every",
                         "train_masses", "test_masses"});

    ExperimentConfig config;
    try {
        if (j.contains("benchmark")) {
            const json& b = j.at("benchmark");
            reject_unknown_keys(b, "benchmark",
                                {"trajectory", "horizon", "velocity_decay",
                                 "mass_range", "n_train_masses",
                                 "n_test_masses", "noise_sigma2"});
            BenchmarkConfig& bench = config.benchmark;
            const std::string kind = b.value("trajectory", std::string("circle"));
            const int horizon = b.value("horizon", 20);
            bench.trajectory =
                make_trajectory(trajectory_kind_from_string(kind), horizon);
            bench.velocity_decay = b.value("velocity_decay", 1.0);
            if (b.contains("mass_range")) {
                const auto range = b.at("mass_range");
                if (!range.is_array() || range.size() != 2) {
                    throw ConfigError("mass_range must be [lo, hi]");
                }
                bench.mass_min = range.at(0).get<double>();
                bench.mass_max = range.at(1).get<double>();
            }
            bench.n_train_masses = b.value("n_train_masses", 100);
            bench.n_test_masses = b.value("n_test_masses", 100);
            bench.noise_sigma2 = b.value("noise_sigma2", 1e-4);
        } else {
            config.benchmark.trajectory =
                make_trajectory(TrajectoryKind::circle, 20);
        }

        Hyperparams& hp = config.hyperparams;
        hp.beta_override = 1e4;  // the experiments' default radius
        hp.decoder_norm_cap = -1.0;
        hp.noise_scale = -1.0;
        if (j.contains("hyperparams")) {
            const json& h = j.at("hyperparams");
            reject_unknown_keys(h, "hyperparams",
                                {"riccati_norm_cap", "decoder_norm_cap",
                                 "noise_scale", "feature_norm_cap", "delta",
                                 "n_candidates", "beta_override"});
            hp.riccati_norm_cap = number_or(h, "riccati_norm_cap", 1e3);
            hp.decoder_norm_cap = number_or(h, "decoder_norm_cap", -1.0);
            hp.noise_scale = number_or(h, "noise_scale", -1.0);
            hp.feature_norm_cap = number_or(h, "feature_norm_cap", 10.0);
            hp.delta = number_or(h, "delta", 0.1);
            hp.n_candidates = h.value("n_candidates", 100);
            if (h.contains("beta_override") && h.at("beta_override").is_null()) {
                hp.beta_override.reset();
            } else if (h.contains("beta_override")) {
                hp.beta_override = h.at("beta_override").get<double>();
            }
        }

        config.episodes = j.value("episodes", 100);
        config.seed = j.value("seed", std::uint64_t{0});
        config.output_dir = j.value("output_dir", std::string("out"));
        config.emit_trajectories = j.value("emit_trajectories", false);
        config.eval_every = j.value("eval_every", 1);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config value: ") + e.what());
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

std::string render_config(const ExperimentConfig& config,
                          const ExperimentResult* result) {
    const BenchmarkConfig& bench = config.benchmark;
    const Hyperparams& hp = config.hyperparams;

    json j;
    j["benchmark"] = {
        {"trajectory", to_string(bench.trajectory.kind)},
        {"horizon", bench.trajectory.horizon()},
        {"velocity_decay", bench.velocity_decay},
        {"mass_range", {bench.mass_min, bench.mass_max}},
        {"n_train_masses", bench.n_train_masses},
        {"n_test_masses", bench.n_test_masses},
        {"noise_sigma2", bench.noise_sigma2},
    };
    j["hyperparams"] = {
        {"riccati_norm_cap", hp.riccati_norm_cap},
        {"decoder_norm_cap", hp.decoder_norm_cap},
        {"noise_scale", hp.noise_scale},
        {"feature_norm_cap", hp.feature_norm_cap},
        {"delta", hp.delta},
        {"n_candidates", hp.n_candidates},
        {"beta_override",
         hp.beta_override ? json(*hp.beta_override) : json(nullptr)},
    };
    j["episodes"] = config.episodes;
    j["seed"] = config.seed;
    j["output_dir"] = config.output_dir;
    j["emit_trajectories"] = config.emit_trajectories;
    j["eval_every"] = config.eval_every;
    if (result) {
        j["train_masses"] = result->train_masses;
        j["test_masses"] = result->test_masses;
    }
    return j.dump(2) + "\n";
}

void emit_outputs(const ExperimentResult& result,
                  const ExperimentConfig& config) {
    if (result.rows.empty()) throw IoError("nothing to emit: no metrics rows");

    const fs::path dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + ec.message());

    {
        std::ofstream out(dir / "metrics.csv", std::ios::binary);
        if (!out) throw IoError("cannot open metrics.csv for writing");
        out << "episode,frobenius_error,mean_control_error,episode_regret,"
               "cumulative_regret,det_v,beta_used\n";
        for (const MetricsRow& row : result.rows) {
            out << row.episode << ',' << format_double(row.frobenius_error)
                << ','
                << (row.mean_control_error
                        ? format_double(*row.mean_control_error)
                        : std::string{})
                << ',' << format_double(row.episode_regret) << ','
                << format_double(row.cumulative_regret) << ','
                << format_double(row.det_v) << ','
                << format_double(row.beta_used) << '\n';
        }
        if (!out) throw IoError("failed while writing metrics.csv");
    }

    {
        std::ofstream out(dir / "config.json", std::ios::binary);
        if (!out) throw IoError("cannot open config.json for writing");
        out << render_config(config, &result);
        if (!out) throw IoError("failed while writing config.json");
    }

    if (config.emit_trajectories) {
        std::ofstream out(dir / "trajectories.csv", std::ios::binary);
        if (!out) throw IoError("cannot open trajectories.csv for writing");
        out << "episode,h,x1,x2,x3,x4,x5,u1,u2,target_x,target_y\n";
        const auto& targets = config.benchmark.trajectory.targets;
        for (std::size_t i = 0; i < result.records.size(); ++i) {
            const EpisodeRecord& rec = result.records[i];
            const int H = static_cast<int>(rec.states.size());
            for (int h = 1; h <= H; ++h) {
                out << result.rows[i].episode << ',' << h;
                for (int c = 0; c < 5; ++c) {
                    out << ',' << format_double(rec.states[h - 1][c]);
                }
                if (h < H) {
                    out << ',' << format_double(rec.actions[h - 1][0]) << ','
                        << format_double(rec.actions[h - 1][1]);
                } else {
                    out << ",,";
                }
                out << ',' << format_double(targets[h - 1][0]) << ','
                    << format_double(targets[h - 1][1]) << '\n';
            }
        }
        if (!out) throw IoError("failed while writing trajectories.csv");
    }
}

}  // namespace ctxlqr
