#pragma once

#include <span>
#include <string>
#include <vector>

#include "ctxlqr/decoder.hpp"
#include "ctxlqr/lqr.hpp"
#include "ctxlqr/rng.hpp"
#include "ctxlqr/types.hpp"

namespace ctxlqr {

// Point-mass path following. State x = [1; z; v] with position z and
// velocity v in the plane; a force u produces acceleration u/m. The true
// decoder encodes
//   z' = z + v
//   v' = k v + u / m
// with velocity decay k baked into theta_star and the mass observed
// through the context D = I/m.

enum class TrajectoryKind { circle, parabola, lemniscate };

TrajectoryKind trajectory_kind_from_string(const std::string& name);
std::string to_string(TrajectoryKind kind);

/// Target positions z*_h, one per stage.
struct TrajectorySpec {
    TrajectoryKind kind = TrajectoryKind::circle;
    std::vector<Eigen::Vector2d> targets;

    int horizon() const { return static_cast<int>(targets.size()); }
};

struct BenchmarkConfig {
    double velocity_decay = 1.0;  // k, in (0, 1]
    double mass_min = 0.1;
    double mass_max = 10.0;
    int n_train_masses = 100;
    int n_test_masses = 100;
    TrajectorySpec trajectory;
    double noise_sigma2 = 1e-4;

    void validate() const;
};

/// d = 5, d_u = 2, p = 5, p_u = 2.
Dimensions benchmark_dimensions();

/// The exact 5x7 decoder of the point-mass law with the given velocity
/// decay (rows: constant, position x2, velocity x2; columns: 5 state
/// features then 2 force features).
Decoder build_theta_star(double velocity_decay);

/// Sample the curve at t = h/H for h = 1..H:
///   circle     (cos 2*pi*t, sin 2*pi*t)
///   parabola   (t, t^2)
///   lemniscate (cos a / (1 + sin^2 a), sin a cos a / (1 + sin^2 a)),
///              a = 2*pi*t
TrajectorySpec make_trajectory(TrajectoryKind kind, int horizon);

/// Tracking costs: x'Q_h x = ||z - z*_h||^2 over x = [1; z; v] (velocity
/// never penalized), R_h = I_2; noise_cov = sigma2 * I_5.
TaskCosts build_cost_matrices(const TrajectorySpec& traj, double noise_sigma2);

/// C = I_5, D = I_2 / m.
Context context_for_mass(double mass);

/// Start on the first target, at rest: [1; z*_1; 0; 0].
Vector benchmark_initial_state(const TrajectorySpec& traj);

double sample_mass(const BenchmarkConfig& bench, Rng& rng);

/// Mean over the test masses of (expected cost of the theta-induced
/// policy under the true dynamics) minus (optimal cost), both in closed
/// form.
double mean_control_error(const Decoder& theta,
                          std::span<const double> test_masses,
                          const BenchmarkConfig& bench);

}  // namespace ctxlqr
