#pragma once

// Independent oracles for the test suites. Everything here deliberately
// avoids the library's Riccati / policy-evaluation code paths: values are
// produced by brute force (grid search, direct rollouts, naive loops) so
// the implementation can be checked against them.

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "ctxlqr/lqr.hpp"
#include "ctxlqr/rng.hpp"
#include "ctxlqr/types.hpp"

namespace oracles {

// Exhaustive dynamic programming over a discretized scalar action set,
// zero noise. Cost of visiting the whole tree is grid^(H-stage), so keep
// horizons small. Fixed-size state keeps the inner loop allocation-free.
template <int D>
class GridDp {
public:
    GridDp(const ctxlqr::LqrTask& task, double lo, double hi, double step) {
        A_ = task.A;
        B_ = task.B.col(0);
        horizon_ = task.horizon();
        for (const auto& q : task.Q) Q_.push_back(q);
        for (const auto& r : task.R) R_.push_back(r(0, 0));
        const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
        grid_.reserve(count);
        for (int i = 0; i < count; ++i) grid_.push_back(lo + step * i);
    }

    double value(int stage, const Eigen::Matrix<double, D, 1>& x) const {
        const double state_cost = x.dot(Q_[stage - 1] * x);
        if (stage == horizon_) return state_cost;
        double best = std::numeric_limits<double>::infinity();
        for (const double u : grid_) {
            const Eigen::Matrix<double, D, 1> next = A_ * x + B_ * u;
            const double c = R_[stage - 1] * u * u + value(stage + 1, next);
            if (c < best) best = c;
        }
        return state_cost + best;
    }

private:
    Eigen::Matrix<double, D, D> A_;
    Eigen::Matrix<double, D, 1> B_;
    std::vector<Eigen::Matrix<double, D, D>> Q_;
    std::vector<double> R_;
    std::vector<double> grid_;
    int horizon_ = 0;
};

// J*_stage(x) by exhaustive grid DP; requires d_u == 1, d in {1, 2} and
// zero process noise.
inline double grid_dp_value(const ctxlqr::LqrTask& task, int stage,
                            const ctxlqr::Vector& x, double lo, double hi,
                            double step) {
    if (task.B.cols() != 1) throw std::logic_error("oracle needs d_u == 1");
    if (task.A.rows() == 1) {
        return GridDp<1>(task, lo, hi, step)
            .value(stage, Eigen::Matrix<double, 1, 1>(x[0]));
    }
    if (task.A.rows() == 2) {
        return GridDp<2>(task, lo, hi, step)
            .value(stage, Eigen::Vector2d(x[0], x[1]));
    }
    throw std::logic_error("oracle supports d in {1, 2} only");
}

// Deterministic (zero-noise) rollout of a fixed linear policy, summing
// stage costs directly.
inline double rollout_cost(const ctxlqr::LqrTask& task,
                           const std::vector<ctxlqr::Matrix>& gains) {
    const int H = task.horizon();
    ctxlqr::Vector x = task.x_init;
    double total = 0.0;
    for (int h = 1; h <= H - 1; ++h) {
        const ctxlqr::Vector u = gains[h - 1] * x;
        total += x.dot(task.Q[h - 1] * x) + u.dot(task.R[h - 1] * u);
        x = task.A * x + task.B * u;
    }
    return total + x.dot(task.Q[H - 1] * x);
}

// Rollout with all-zero actions (the uncontrolled system).
inline double uncontrolled_cost(const ctxlqr::LqrTask& task) {
    const int d_u = static_cast<int>(task.B.cols());
    const int d = static_cast<int>(task.A.rows());
    std::vector<ctxlqr::Matrix> zeros(task.horizon() - 1,
                                      ctxlqr::Matrix::Zero(d_u, d));
    return rollout_cost(task, zeros);
}

// Entry-by-entry matrix product.
inline ctxlqr::Matrix naive_matmul(const ctxlqr::Matrix& a,
                                   const ctxlqr::Matrix& b) {
    ctxlqr::Matrix out = ctxlqr::Matrix::Zero(a.rows(), b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.cols(); ++j)
            for (Eigen::Index k = 0; k < a.cols(); ++k)
                out(i, j) += a(i, k) * b(k, j);
    return out;
}

// Random symmetric PSD matrix with moderate scale.
inline ctxlqr::Matrix random_psd(ctxlqr::Rng& rng, int n, double ridge = 0.0) {
    ctxlqr::Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    ctxlqr::Matrix psd = m.transpose() * m / n;
    psd.diagonal().array() += ridge;
    return psd;
}

// Small random task with mild dynamics so optimal actions stay well
// inside the oracle grids.
inline ctxlqr::LqrTask random_small_task(ctxlqr::Rng& rng, int d, int d_u,
                                         int horizon, double noise_var = 0.0) {
    ctxlqr::LqrTask task;
    task.A = ctxlqr::Matrix(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) task.A(i, j) = rng.uniform(-0.7, 0.7);
    task.B = ctxlqr::Matrix(d, d_u);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d_u; ++j) task.B(i, j) = rng.uniform(-1.0, 1.0);
    for (int h = 0; h < horizon; ++h) task.Q.push_back(random_psd(rng, d));
    for (int h = 0; h < horizon - 1; ++h) {
        task.R.push_back(random_psd(rng, d_u, 0.5));
    }
    task.x_init = ctxlqr::Vector(d);
    for (int i = 0; i < d; ++i) task.x_init[i] = rng.uniform(-1.0, 1.0);
    task.noise_cov = noise_var * ctxlqr::Matrix::Identity(d, d);
    return task;
}

}  // namespace oracles
