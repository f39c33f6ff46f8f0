#include "ctxlqr/learner.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace ctxlqr {

namespace {

// tr[(theta - center) V (theta - center)']
double ellipsoid_sq_distance(const Decoder& theta, const Decoder& center,
                             const Matrix& V) {
    const Matrix diff = theta - center;
    return (diff * V).cwiseProduct(diff).sum();
}

// Symmetric inverse square root with a floor on the eigenvalues;
// V >= I makes the floor a pure round-off guard.
Matrix inverse_sqrt(const Matrix& V) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(V);
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("eigendecomposition of the Gram matrix failed");
    }
    Vector lam = es.eigenvalues().cwiseMax(1e-12);
    return es.eigenvectors() *
           lam.cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
}

// J*_1 for a candidate decoder on the given context, or nullopt when the
// recursion breaks the value-matrix cap (or numerically).
std::optional<double> capped_value(const Decoder& theta, const Context& ctx,
                                   const TaskCosts& costs, const Vector& x_init,
                                   double p_norm_cap) {
    const Dynamics dyn = assemble_dynamics(theta, ctx);
    const LqrTask task = make_task(dyn.A, dyn.B, costs, x_init);
    const auto sol = riccati_backward_capped(task, p_norm_cap);
    if (!sol) return std::nullopt;
    return optimal_value(*sol, 1, x_init);
}

}  // namespace

LearnerState init_learner(const Dimensions& dims) {
    if (!dims.valid()) throw DimensionMismatch("all dimensions must be >= 1");
    LearnerState state;
    state.V = Matrix::Identity(dims.features(), dims.features());
    state.W = Matrix::Zero(dims.features(), dims.state);
    state.theta_hat = Decoder::Zero(dims.state, dims.features());
    return state;
}

void record_transition(LearnerState& state, const Vector& z,
                       const Vector& x_next) {
    if (z.size() != state.V.rows()) {
        throw DimensionMismatch("feature length mismatch");
    }
    if (x_next.size() != state.W.cols()) {
        throw DimensionMismatch("next-state length mismatch");
    }
    state.V.noalias() += z * z.transpose();
    state.W.noalias() += z * x_next.transpose();
}

Decoder regress(const LearnerState& state) {
    Eigen::LLT<Matrix> llt(state.V);
    if (llt.info() != Eigen::Success) {
        throw NumericalFailure("Gram matrix factorization failed");
    }
    return llt.solve(state.W).transpose();
}

double beta(const LearnerState& state, const Hyperparams& hp, int horizon) {
    if (hp.beta_override) return *hp.beta_override;

    const double d = static_cast<double>(state.theta_hat.rows());
    const double q = static_cast<double>(state.V.rows());
    const double k = static_cast<double>(state.episodes);
    const double cx2 = hp.feature_norm_cap * hp.feature_norm_cap;

    const double inner = std::log(d) +
                         q * std::log1p(k * horizon * cx2 / q) / 2.0 +
                         std::log(1.0 / hp.delta);
    const double root = hp.decoder_norm_cap +
                        hp.noise_scale * std::sqrt(2.0 * d * inner);
    return root * root;
}

bool in_confidence_set(const Decoder& theta, const LearnerState& state,
                       double beta_val, const Hyperparams& hp,
                       const Context& ctx, const TaskCosts& costs) {
    if (theta.rows() != state.theta_hat.rows() ||
        theta.cols() != state.theta_hat.cols()) {
        throw DimensionMismatch("decoder shape mismatch");
    }
    if (ellipsoid_sq_distance(theta, state.theta_hat, state.V) > beta_val) {
        return false;
    }
    const Vector x0 = Vector::Zero(theta.rows());
    return capped_value(theta, ctx, costs, x0, hp.riccati_norm_cap).has_value();
}

Decoder select_optimistic(LearnerState& state, const Context& ctx,
                          const TaskCosts& costs, const Vector& x_init,
                          const Hyperparams& hp, Rng& rng,
                          std::span<const Decoder> extra_candidates) {
    if (hp.n_candidates < 1) {
        throw ConfigError("need at least one candidate sample");
    }

    const double beta_val = beta(state, hp, costs.horizon());
    const Matrix v_inv_sqrt = inverse_sqrt(state.V);
    const int d = static_cast<int>(state.theta_hat.rows());
    const int q = static_cast<int>(state.theta_hat.cols());

    const Decoder* best = nullptr;
    Decoder best_storage;
    double best_value = std::numeric_limits<double>::infinity();

    auto consider = [&](const Decoder& candidate) {
        const auto value =
            capped_value(candidate, ctx, costs, x_init, hp.riccati_norm_cap);
        if (value && *value < best_value) {
            best_value = *value;
            best_storage = candidate;
            best = &best_storage;
        }
    };

    // The estimate is always in the pool, so infeasibility of every
    // candidate means the cap fails even at the ellipsoid center.
    consider(state.theta_hat);
    for (const Decoder& extra : extra_candidates) {
        if (ellipsoid_sq_distance(extra, state.theta_hat, state.V) <=
            beta_val * (1.0 + 1e-12)) {
            consider(extra);
        }
    }

    for (int i = 0; i < hp.n_candidates; ++i) {
        // Uniform draw from the trace ellipsoid: whiten a Gaussian
        // direction, then scale to radius r sqrt(beta) with r = U^(1/(dq)).
        const Matrix g = rng.normal_matrix(d, q);
        const double u = 1.0 - rng.uniform();  // (0, 1]
        const double norm = g.norm();
        if (norm == 0.0) {
            consider(state.theta_hat);
            continue;
        }
        const double radius =
            std::pow(u, 1.0 / (static_cast<double>(d) * q)) *
            std::sqrt(beta_val);
        const Decoder candidate =
            state.theta_hat + (radius / norm) * g * v_inv_sqrt;
        consider(candidate);
    }

    if (!best) {
        throw NoFeasibleCandidate(
            "no candidate satisfied the value-matrix norm cap; "
            "the cap is likely set too small");
    }
    state.optimist_history.push_back(*best);
    return *best;
}

Decoder output_policy_map(const LearnerState& state, Rng& rng) {
    if (state.optimist_history.empty()) {
        throw EmptyHistory("no optimists have been played yet");
    }
    const auto n = state.optimist_history.size();
    auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
    if (idx >= n) idx = n - 1;
    return state.optimist_history[idx];
}

}  // namespace ctxlqr
