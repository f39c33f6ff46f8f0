#pragma once

#include <optional>
#include <vector>

#include "ctxlqr/types.hpp"

namespace ctxlqr {

/// One finite-horizon LQR instance.
///
/// Stage costs run h = 1..H-1 with x'Q_h x + u'R_h u; stage H pays only the
/// terminal cost x'Q_H x. Stages are 1-based throughout to match the usual
/// dynamic-programming convention (vector index = stage - 1).
struct LqrTask {
    Matrix A;               // state transition, d x d
    Matrix B;               // control input map, d x d_u
    std::vector<Matrix> Q;  // H symmetric PSD stage costs; Q.back() terminal
    std::vector<Matrix> R;  // H-1 symmetric PD action costs
    Vector x_init;          // initial state
    Matrix noise_cov;       // process noise covariance, d x d PSD (zero allowed)

    int horizon() const { return static_cast<int>(Q.size()); }

    /// Shape consistency and cost-matrix definiteness checks.
    /// Throws DimensionMismatch / NumericalFailure.
    void validate() const;
};

/// Cost matrices shared by a family of tasks that differ only in dynamics.
struct TaskCosts {
    std::vector<Matrix> Q;  // H entries
    std::vector<Matrix> R;  // H-1 entries
    Matrix noise_cov;       // d x d

    int horizon() const { return static_cast<int>(Q.size()); }
};

LqrTask make_task(const Matrix& A, const Matrix& B, const TaskCosts& costs,
                  const Vector& x_init);

/// Output of the backward recursion: value matrices P_h, feedback gains K_h
/// and the additive noise offsets c_h with
///   J*_h(x) = x'P_h x + c_h,   u*_h = K_h x.
struct RiccatiSolution {
    std::vector<Matrix> P;         // H entries, P.back() == terminal cost
    std::vector<Matrix> K;         // H-1 entries, d_u x d
    std::vector<double> c_offset;  // H entries, c_offset.back() == 0

    int horizon() const { return static_cast<int>(P.size()); }
};

/// Backward Riccati recursion.
///
///   P_H = Q_H
///   K_h = -(R_h + B'P_{h+1}B)^{-1} B'P_{h+1}A
///   P_h = Q_h + A'P_{h+1}A - A'P_{h+1}B (R_h + B'P_{h+1}B)^{-1} B'P_{h+1}A
///   c_h = c_{h+1} + tr(noise_cov P_{h+1}),  c_H = 0
///
/// Each P_h is symmetrized and checked PSD. The linear solve uses a
/// Cholesky factorization of R_h + B'P_{h+1}B; failure of that
/// factorization raises NumericalFailure.
RiccatiSolution riccati_backward(const LqrTask& task);

/// Same recursion, but bails out (returns nullopt) as soon as some
/// ||P_h||_2 exceeds p_norm_cap or the recursion fails numerically.
/// Used to certify candidates against the value-matrix norm cap without
/// letting unstable closed loops overflow.
std::optional<RiccatiSolution> riccati_backward_capped(const LqrTask& task,
                                                       double p_norm_cap);

/// J*_stage(x) = x'P_stage x + c_stage, stage in [1, H].
double optimal_value(const RiccatiSolution& sol, int stage, const Vector& x);

/// Optimal action K_stage * x, stage in [1, H-1].
Vector gain_action(const RiccatiSolution& sol, int stage, const Vector& x);

/// |J*_h(x) - (x'Q_h x + min_{u in grid} [u'R_h u + E J*_{h+1}(Ax+Bu+w)])|
/// with the expectation evaluated in closed form as quadratic plus
/// tr(noise_cov P_{h+1}).
double bellman_residual(const LqrTask& task, const RiccatiSolution& sol,
                        int stage, const Vector& x,
                        const std::vector<Vector>& action_grid);

/// Axis-aligned product grid of actions covering [lo, hi] per coordinate
/// at the given step. Endpoints included.
std::vector<Vector> make_action_grid(const Vector& lo, const Vector& hi,
                                     double step);

/// Exact expected cost of a fixed linear policy u_h = K_h x under known
/// dynamics:
///   Ptil_H = Q_H
///   Ptil_h = Q_h + K_h'R_h K_h + (A + B K_h)' Ptil_{h+1} (A + B K_h)
///   ctil_h = ctil_{h+1} + tr(noise_cov Ptil_{h+1})
/// so that J^pi_h(x) = x'Ptil_h x + ctil_h.
struct PolicyValue {
    std::vector<Matrix> P;
    std::vector<double> c_offset;

    int horizon() const { return static_cast<int>(P.size()); }
};

PolicyValue evaluate_linear_policy(const LqrTask& task,
                                   const std::vector<Matrix>& gains);

double policy_value_at(const PolicyValue& pv, int stage, const Vector& x);

}  // namespace ctxlqr
