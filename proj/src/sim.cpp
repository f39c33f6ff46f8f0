#include "ctxlqr/sim.hpp"

#include <Eigen/Dense>

namespace ctxlqr {

NoiseModel NoiseModel::zero(int dim) {
    NoiseModel nm;
    nm.kind_ = NoiseKind::zero;
    nm.cov_ = Matrix::Zero(dim, dim);
    return nm;
}

NoiseModel NoiseModel::gaussian(Matrix cov) {
    if (cov.rows() != cov.cols()) {
        throw DimensionMismatch("covariance must be square");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("covariance eigendecomposition failed");
    }
    const double scale = 1.0 + es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.eigenvalues().minCoeff() < -1e-8 * scale) {
        throw NumericalFailure("covariance is not PSD");
    }

    NoiseModel nm;
    nm.kind_ = NoiseKind::gaussian;
    nm.transform_ = es.eigenvectors() *
                    es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    nm.cov_ = std::move(cov);
    return nm;
}

Vector NoiseModel::sample(Rng& rng) const {
    if (kind_ == NoiseKind::zero) return Vector::Zero(cov_.rows());
    return transform_ * rng.normal_vector(static_cast<int>(cov_.rows()));
}

Vector step(const Matrix& A, const Matrix& B, const Vector& x,
            const Vector& u, const NoiseModel& noise, Rng& rng) {
    if (A.cols() != x.size() || B.cols() != u.size() || A.rows() != B.rows()) {
        throw DimensionMismatch("dynamics shapes are inconsistent");
    }
    Vector next = A * x + B * u;
    if (noise.kind() != NoiseKind::zero) next += noise.sample(rng);
    return next;
}

EpisodeRecord run_episode(const Decoder& theta_true,
                          const Decoder& theta_policy, const Context& ctx,
                          const TaskCosts& costs, const Vector& x_init,
                          const NoiseModel& noise, Rng& rng) {
    const Dynamics truth = assemble_dynamics(theta_true, ctx);
    const Dynamics model = assemble_dynamics(theta_policy, ctx);
    const int H = costs.horizon();

    const RiccatiSolution policy =
        riccati_backward(make_task(model.A, model.B, costs, x_init));

    EpisodeRecord rec;
    rec.context = ctx;
    rec.states.reserve(H);
    rec.actions.reserve(H - 1);
    rec.features.reserve(H - 1);

    Vector x = x_init;
    for (int h = 1; h <= H - 1; ++h) {
        const Vector u = gain_action(policy, h, x);
        rec.realized_cost +=
            x.dot(costs.Q[h - 1] * x) + u.dot(costs.R[h - 1] * u);
        rec.states.push_back(x);
        rec.actions.push_back(u);
        rec.features.push_back(context_features(ctx, x, u));
        x = step(truth.A, truth.B, x, u, noise, rng);
    }
    rec.realized_cost += x.dot(costs.Q[H - 1] * x);
    rec.states.push_back(std::move(x));

    // Closed-form cost summaries under the true dynamics.
    const LqrTask true_task = make_task(truth.A, truth.B, costs, x_init);
    rec.expected_policy_cost =
        policy_value_at(evaluate_linear_policy(true_task, policy.K), 1, x_init);
    rec.optimal_cost = optimal_value(riccati_backward(true_task), 1, x_init);
    return rec;
}

double episode_regret(const EpisodeRecord& record) {
    return record.expected_policy_cost - record.optimal_cost;
}

}  // namespace ctxlqr
