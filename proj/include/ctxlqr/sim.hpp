#pragma once

#include <vector>

#include "ctxlqr/decoder.hpp"
#include "ctxlqr/lqr.hpp"
#include "ctxlqr/rng.hpp"
#include "ctxlqr/types.hpp"

namespace ctxlqr {

enum class NoiseKind { zero, gaussian };

/// Process-noise model. The gaussian factory precomputes a PSD square
/// root of the covariance so sampling is a single matrix-vector product.
class NoiseModel {
public:
    static NoiseModel zero(int dim);
    static NoiseModel gaussian(Matrix cov);

    NoiseKind kind() const { return kind_; }
    const Matrix& cov() const { return cov_; }

    /// One noise draw; the zero vector for kind zero.
    Vector sample(Rng& rng) const;

private:
    NoiseModel() = default;

    NoiseKind kind_ = NoiseKind::zero;
    Matrix cov_;
    Matrix transform_;  // L with L L' = cov
};

/// One trajectory of an episode plus its closed-form cost summaries.
struct EpisodeRecord {
    std::vector<Vector> states;    // H entries
    std::vector<Vector> actions;   // H-1 entries
    std::vector<Vector> features;  // H-1 context-regularized observations
    double realized_cost = 0.0;
    double expected_policy_cost = 0.0;  // exact expectation of the played policy
    double optimal_cost = 0.0;          // J*_1 under the true dynamics
    Context context;
};

/// x_next = A x + B u + w.
Vector step(const Matrix& A, const Matrix& B, const Vector& x,
            const Vector& u, const NoiseModel& noise, Rng& rng);

/// Roll one episode: gains come from the Riccati recursion on the
/// policy decoder's dynamics, states evolve under the true decoder's
/// dynamics. Also fills the closed-form expected cost of the played
/// policy and the optimal cost, both under the true dynamics with
/// costs.noise_cov.
EpisodeRecord run_episode(const Decoder& theta_true,
                          const Decoder& theta_policy, const Context& ctx,
                          const TaskCosts& costs, const Vector& x_init,
                          const NoiseModel& noise, Rng& rng);

/// Expected excess cost of the played policy over the optimal one,
/// J^pi_1(x_1) - J*_1(x_1). Computed from the closed forms recorded in
/// the episode, so it does not depend on the realized noise.
double episode_regret(const EpisodeRecord& record);

}  // namespace ctxlqr
