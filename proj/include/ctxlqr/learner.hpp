#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ctxlqr/decoder.hpp"
#include "ctxlqr/lqr.hpp"
#include "ctxlqr/rng.hpp"
#include "ctxlqr/types.hpp"

namespace ctxlqr {

/// Regularity constants of the learning problem plus the knobs of the
/// practical algorithm.
struct Hyperparams {
    double riccati_norm_cap = 1e3;   // cap on ||P_h||_2 certifying candidates
    double decoder_norm_cap = 1.0;   // bound on ||theta_*||_F
    double noise_scale = 0.0;        // sub-Gaussian constant of the noise
    double feature_norm_cap = 10.0;  // bound on ||z||_2
    double delta = 0.1;              // failure probability
    int n_candidates = 100;          // ellipsoid samples per episode
    std::optional<double> beta_override;  // fixed radius instead of the bound
};

/// Accumulated regression state of the online learner.
struct LearnerState {
    Matrix V;          // feature Gram matrix, I + sum of z z'
    Matrix W;          // cross moment, sum of z x_next'
    Decoder theta_hat; // current ridge estimate
    int episodes = 0;  // completed episodes
    std::vector<Decoder> optimist_history;  // candidate played each episode
};

/// V = I, W = 0, theta_hat = 0, empty history.
LearnerState init_learner(const Dimensions& dims);

/// Rank-one update: V += z z', W += z x_next'.
void record_transition(LearnerState& state, const Vector& z,
                       const Vector& x_next);

/// Ridge regression: theta' = V^{-1} W, i.e. the minimizer of
/// sum ||theta z - x_next||^2 + ||theta||_F^2.
Decoder regress(const LearnerState& state);

/// Confidence-ellipsoid radius
///   (c_theta + c_w sqrt(2d(log d + q log(1 + kHc_x^2/q)/2 + log(1/delta))))^2
/// with q = p + p_u and k the completed-episode count, or the override
/// when one is set.
double beta(const LearnerState& state, const Hyperparams& hp, int horizon);

/// Membership in the confidence set: the trace ellipsoid
///   tr[(theta - theta_hat) V (theta - theta_hat)'] <= beta_val
/// plus the value-matrix cap ||P_h||_2 <= riccati_norm_cap for the task
/// assembled from theta on the supplied context. Numerical failure of the
/// recursion counts as "not in the set".
bool in_confidence_set(const Decoder& theta, const LearnerState& state,
                       double beta_val, const Hyperparams& hp,
                       const Context& ctx, const TaskCosts& costs);

/// Optimistic candidate selection. The pool is the current estimate,
/// any extra candidates, then n_candidates uniform samples from the trace
/// ellipsoid; the feasible candidate minimizing J*_1 on the supplied
/// context wins (first in pool order on ties). The winner is appended to
/// optimist_history. Throws NoFeasibleCandidate when even the estimate
/// violates the norm cap.
Decoder select_optimistic(LearnerState& state, const Context& ctx,
                          const TaskCosts& costs, const Vector& x_init,
                          const Hyperparams& hp, Rng& rng,
                          std::span<const Decoder> extra_candidates = {});

/// Final policy map: one of the played optimists, drawn uniformly.
Decoder output_policy_map(const LearnerState& state, Rng& rng);

}  // namespace ctxlqr
