#include "ctxlqr/benchmark.hpp"

#include <cmath>
#include <numbers>

namespace ctxlqr {

TrajectoryKind trajectory_kind_from_string(const std::string& name) {
    if (name == "circle") return TrajectoryKind::circle;
    if (name == "parabola") return TrajectoryKind::parabola;
    if (name == "lemniscate") return TrajectoryKind::lemniscate;
    throw UnknownKind("unknown trajectory kind: " + name);
}

std::string to_string(TrajectoryKind kind) {
    switch (kind) {
        case TrajectoryKind::circle: return "circle";
        case TrajectoryKind::parabola: return "parabola";
        case TrajectoryKind::lemniscate: return "lemniscate";
    }
    throw UnknownKind("unknown trajectory kind");
}

void BenchmarkConfig::validate() const {
    if (!(velocity_decay > 0.0 && velocity_decay <= 1.0)) {
        throw ConfigError("velocity decay must lie in (0, 1]");
    }
    if (!(mass_min > 0.0) || mass_max < mass_min) {
        throw ConfigError("mass range must be positive and ordered");
    }
    if (n_train_masses < 1 || n_test_masses < 1) {
        throw ConfigError("need at least one train and one test mass");
    }
    if (trajectory.horizon() < 2) {
        throw ConfigError("trajectory must cover a horizon of at least 2");
    }
    if (noise_sigma2 < 0.0) throw ConfigError("noise variance must be >= 0");
}

Dimensions benchmark_dimensions() { return {.state = 5, .action = 2,
                                            .state_ctx = 5, .action_ctx = 2}; }

Decoder build_theta_star(double velocity_decay) {
    if (!(velocity_decay > 0.0 && velocity_decay <= 1.0)) {
        throw ConfigError("velocity decay must lie in (0, 1]");
    }
    const double k = velocity_decay;
    Decoder theta = Decoder::Zero(5, 7);
    theta(0, 0) = 1.0;                    // constant coordinate
    theta(1, 1) = 1.0; theta(1, 3) = 1.0; // z1' = z1 + v1
    theta(2, 2) = 1.0; theta(2, 4) = 1.0; // z2' = z2 + v2
    theta(3, 3) = k;   theta(3, 5) = 1.0; // v1' = k v1 + (u/m)_1
    theta(4, 4) = k;   theta(4, 6) = 1.0; // v2' = k v2 + (u/m)_2
    return theta;
}

TrajectorySpec make_trajectory(TrajectoryKind kind, int horizon) {
    if (horizon < 2) throw ConfigError("horizon must be at least 2");

    TrajectorySpec traj;
    traj.kind = kind;
    traj.targets.reserve(horizon);

    for (int h = 1; h <= horizon; ++h) {
        const double t = static_cast<double>(h) / horizon;
        const double angle = 2.0 * std::numbers::pi * t;
        Eigen::Vector2d z;
        switch (kind) {
            case TrajectoryKind::circle:
                z = {std::cos(angle), std::sin(angle)};
                break;
            case TrajectoryKind::parabola:
                z = {t, t * t};
                break;
            case TrajectoryKind::lemniscate: {
                const double s = std::sin(angle);
                const double c = std::cos(angle);
                const double denom = 1.0 + s * s;
                z = {c / denom, s * c / denom};
                break;
            }
            default:
                throw UnknownKind("unknown trajectory kind");
        }
        traj.targets.push_back(z);
    }
    return traj;
}

TaskCosts build_cost_matrices(const TrajectorySpec& traj, double noise_sigma2) {
    const int H = traj.horizon();
    if (H < 2) throw ConfigError("trajectory must cover a horizon of at least 2");

    TaskCosts costs;
    costs.Q.reserve(H);
    for (const Eigen::Vector2d& target : traj.targets) {
        // x'Qx = ||z - z*||^2 over x = [1; z; v]; velocity block is zero.
        Matrix q = Matrix::Zero(5, 5);
        q(0, 0) = target.squaredNorm();
        q.block<1, 2>(0, 1) = -target.transpose();
        q.block<2, 1>(1, 0) = -target;
        q.block<2, 2>(1, 1) = Matrix::Identity(2, 2);
        costs.Q.push_back(std::move(q));
    }
    costs.R.assign(H - 1, Matrix::Identity(2, 2));
    costs.noise_cov = noise_sigma2 * Matrix::Identity(5, 5);
    return costs;
}

Context context_for_mass(double mass) {
    if (!(mass > 0.0)) throw NonpositiveMass("mass must be positive");
    Context ctx;
    ctx.C = Matrix::Identity(5, 5);
    ctx.D = (1.0 / mass) * Matrix::Identity(2, 2);
    return ctx;
}

Vector benchmark_initial_state(const TrajectorySpec& traj) {
    if (traj.targets.empty()) throw ConfigError("trajectory has no targets");
    Vector x = Vector::Zero(5);
    x[0] = 1.0;
    x[1] = traj.targets.front()[0];
    x[2] = traj.targets.front()[1];
    return x;
}

double sample_mass(const BenchmarkConfig& bench, Rng& rng) {
    return rng.uniform(bench.mass_min, bench.mass_max);
}

double mean_control_error(const Decoder& theta,
                          std::span<const double> test_masses,
                          const BenchmarkConfig& bench) {
    if (theta.rows() != 5 || theta.cols() != 7) {
        throw DimensionMismatch("benchmark decoders are 5 x 7");
    }
    if (test_masses.empty()) throw ConfigError("no test masses supplied");

    const Decoder theta_star = build_theta_star(bench.velocity_decay);
    const TaskCosts costs =
        build_cost_matrices(bench.trajectory, bench.noise_sigma2);
    const Vector x_init = benchmark_initial_state(bench.trajectory);

    double total = 0.0;
    for (const double mass : test_masses) {
        const Context ctx = context_for_mass(mass);
        const Dynamics truth = assemble_dynamics(theta_star, ctx);
        const Dynamics model = assemble_dynamics(theta, ctx);

        const RiccatiSolution policy =
            riccati_backward(make_task(model.A, model.B, costs, x_init));
        const LqrTask true_task =
            make_task(truth.A, truth.B, costs, x_init);
        const double played = policy_value_at(
            evaluate_linear_policy(true_task, policy.K), 1, x_init);
        const double optimal =
            optimal_value(riccati_backward(true_task), 1, x_init);
        total += played - optimal;
    }
    return total / static_cast<double>(test_masses.size());
}

}  // namespace ctxlqr
