#include "ctxlqr/lqr.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace ctxlqr {

namespace {

void check_symmetric(const Matrix& m, const char* what) {
    const double tol = 1e-9 * (1.0 + m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol) {
        throw NumericalFailure(std::string(what) + " is not symmetric");
    }
}

// Symmetric eigenvalue range; input must already be (numerically) symmetric.
std::pair<double, double> eig_range(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw NumericalFailure("eigenvalue computation failed");
    }
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

// PSD within a scale-relative slack.
bool is_psd(const Matrix& m) {
    const auto [lo, hi] = eig_range(m);
    return lo >= -1e-8 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
}

struct BackwardOptions {
    // When set, abort as soon as ||P_h||_2 exceeds the cap.
    std::optional<double> p_norm_cap;
};

// Shared body of the plain and capped recursions. Returns nullopt only
// in capped mode (cap exceeded or numerics broke down); plain mode throws.
std::optional<RiccatiSolution> backward(const LqrTask& task,
                                        const BackwardOptions& opts) {
    const bool capped = opts.p_norm_cap.has_value();
    const int H = task.horizon();
    const int d = static_cast<int>(task.A.rows());

    RiccatiSolution sol;
    sol.P.resize(H);
    sol.K.resize(H - 1);
    sol.c_offset.assign(H, 0.0);

    sol.P[H - 1] = task.Q[H - 1];

    auto fail = [&](const char* msg) -> std::optional<RiccatiSolution> {
        if (capped) return std::nullopt;
        throw NumericalFailure(msg);
    };

    // Eigenvalues serve both the PSD assertion and the norm cap.
    {
        const auto [lo, hi] = eig_range(sol.P[H - 1]);
        if (lo < -1e-8 * (1.0 + std::abs(hi))) return fail("terminal cost not PSD");
        if (capped && hi > *opts.p_norm_cap) return std::nullopt;
    }

    for (int h = H - 1; h >= 1; --h) {
        const Matrix& Pn = sol.P[h];  // P_{h+1}

        const Matrix BtP = task.B.transpose() * Pn;            // d_u x d
        const Matrix M = task.R[h - 1] + BtP * task.B;         // R + B'PB
        const Matrix G = BtP * task.A;                         // B'PA

        if (!M.allFinite()) return fail("R + B'PB is not finite");
        Eigen::LLT<Matrix> llt(M);
        if (llt.info() != Eigen::Success) {
            return fail("factorization of R + B'PB failed");
        }

        sol.K[h - 1] = -llt.solve(G);

        Matrix P = task.Q[h - 1] + task.A.transpose() * Pn * task.A +
                   G.transpose() * sol.K[h - 1];
        P = 0.5 * (P + P.transpose());  // suppress drift

        if (!P.allFinite()) return fail("value matrix is not finite");
        const auto [lo, hi] = eig_range(P);
        if (lo < -1e-8 * (1.0 + std::max(std::abs(lo), std::abs(hi)))) {
            return fail("value matrix lost positive semidefiniteness");
        }
        if (capped && hi > *opts.p_norm_cap) return std::nullopt;

        sol.P[h - 1] = std::move(P);
        sol.c_offset[h - 1] =
            sol.c_offset[h] + (task.noise_cov * Pn).trace();
    }

    (void)d;
    return sol;
}

}  // namespace

void LqrTask::validate() const {
    const Eigen::Index d = A.rows();
    const Eigen::Index d_u = B.cols();
    if (A.cols() != d || B.rows() != d) {
        throw DimensionMismatch("A must be square and B row-conformant");
    }
    if (horizon() < 2) throw DimensionMismatch("horizon must be at least 2");
    if (static_cast<int>(R.size()) != horizon() - 1) {
        throw DimensionMismatch("need exactly H-1 action cost matrices");
    }
    if (x_init.size() != d) throw DimensionMismatch("x_init has wrong length");
    if (noise_cov.rows() != d || noise_cov.cols() != d) {
        throw DimensionMismatch("noise_cov must be d x d");
    }

    for (const Matrix& q : Q) {
        if (q.rows() != d || q.cols() != d) {
            throw DimensionMismatch("state cost has wrong shape");
        }
        check_symmetric(q, "state cost");
        if (!is_psd(q)) throw NumericalFailure("state cost is not PSD");
    }
    for (const Matrix& r : R) {
        if (r.rows() != d_u || r.cols() != d_u) {
            throw DimensionMismatch("action cost has wrong shape");
        }
        check_symmetric(r, "action cost");
        const auto [lo, hi] = eig_range(r);
        (void)hi;
        if (lo <= 0.0) throw NumericalFailure("action cost is not PD");
    }
    check_symmetric(noise_cov, "noise covariance");
    if (!is_psd(noise_cov)) throw NumericalFailure("noise covariance not PSD");
}

LqrTask make_task(const Matrix& A, const Matrix& B, const TaskCosts& costs,
                  const Vector& x_init) {
    LqrTask task;
    task.A = A;
    task.B = B;
    task.Q = costs.Q;
    task.R = costs.R;
    task.x_init = x_init;
    task.noise_cov = costs.noise_cov;
    return task;
}

RiccatiSolution riccati_backward(const LqrTask& task) {
    if (task.horizon() < 2) throw DimensionMismatch("horizon must be >= 2");
    const Eigen::Index d = task.A.rows();
    if (task.A.cols() != d || task.B.rows() != d) {
        throw DimensionMismatch("dynamics shapes are inconsistent");
    }
    if (static_cast<int>(task.R.size()) != task.horizon() - 1) {
        throw DimensionMismatch("need exactly H-1 action cost matrices");
    }
    auto sol = backward(task, {});
    return std::move(*sol);
}

std::optional<RiccatiSolution> riccati_backward_capped(const LqrTask& task,
                                                       double p_norm_cap) {
    BackwardOptions opts;
    opts.p_norm_cap = p_norm_cap;
    try {
        return backward(task, opts);
    } catch (const NumericalFailure&) {
        return std::nullopt;
    }
}

double optimal_value(const RiccatiSolution& sol, int stage, const Vector& x) {
    if (stage < 1 || stage > sol.horizon()) {
        throw StageOutOfRange("stage must lie in [1, H]");
    }
    const Matrix& P = sol.P[stage - 1];
    if (x.size() != P.rows()) throw DimensionMismatch("state length mismatch");
    return x.dot(P * x) + sol.c_offset[stage - 1];
}

Vector gain_action(const RiccatiSolution& sol, int stage, const Vector& x) {
    if (stage < 1 || stage > sol.horizon() - 1) {
        throw StageOutOfRange("stage must lie in [1, H-1]");
    }
    if (x.size() != sol.K[stage - 1].cols()) {
        throw DimensionMismatch("state length mismatch");
    }
    return sol.K[stage - 1] * x;
}

double bellman_residual(const LqrTask& task, const RiccatiSolution& sol,
                        int stage, const Vector& x,
                        const std::vector<Vector>& action_grid) {
    if (stage < 1 || stage > sol.horizon() - 1) {
        throw StageOutOfRange("stage must lie in [1, H-1]");
    }
    if (action_grid.empty()) {
        throw DimensionMismatch("action grid must be nonempty");
    }

    const Matrix& Pn = sol.P[stage];
    const double cn = sol.c_offset[stage];
    const double noise_term = (task.noise_cov * Pn).trace();
    const Matrix& R = task.R[stage - 1];

    const Vector Ax = task.A * x;
    double best = std::numeric_limits<double>::infinity();
    for (const Vector& u : action_grid) {
        const Vector mean_next = Ax + task.B * u;
        const double q = u.dot(R * u) + mean_next.dot(Pn * mean_next) +
                         noise_term + cn;
        if (q < best) best = q;
    }

    const double lhs = optimal_value(sol, stage, x);
    const double rhs = x.dot(task.Q[stage - 1] * x) + best;
    return std::abs(lhs - rhs);
}

std::vector<Vector> make_action_grid(const Vector& lo, const Vector& hi,
                                     double step) {
    if (lo.size() != hi.size() || lo.size() == 0) {
        throw DimensionMismatch("grid bounds must have equal nonzero length");
    }
    if (step <= 0.0) throw DimensionMismatch("grid step must be positive");

    const int dim = static_cast<int>(lo.size());
    std::vector<int> counts(dim);
    for (int i = 0; i < dim; ++i) {
        counts[i] = static_cast<int>(std::floor((hi[i] - lo[i]) / step + 1e-9)) + 1;
        if (counts[i] < 1) throw DimensionMismatch("empty grid axis");
    }

    std::vector<Vector> grid;
    std::vector<int> idx(dim, 0);
    while (true) {
        Vector u(dim);
        for (int i = 0; i < dim; ++i) u[i] = lo[i] + step * idx[i];
        grid.push_back(std::move(u));

        int axis = dim - 1;
        while (axis >= 0 && ++idx[axis] == counts[axis]) idx[axis--] = 0;
        if (axis < 0) break;
    }
    return grid;
}

PolicyValue evaluate_linear_policy(const LqrTask& task,
                                   const std::vector<Matrix>& gains) {
    const int H = task.horizon();
    if (static_cast<int>(gains.size()) != H - 1) {
        throw DimensionMismatch("need exactly H-1 gain matrices");
    }

    PolicyValue pv;
    pv.P.resize(H);
    pv.c_offset.assign(H, 0.0);
    pv.P[H - 1] = task.Q[H - 1];

    for (int h = H - 1; h >= 1; --h) {
        const Matrix& K = gains[h - 1];
        if (K.rows() != task.B.cols() || K.cols() != task.A.rows()) {
            throw DimensionMismatch("gain matrix has wrong shape");
        }
        const Matrix closed = task.A + task.B * K;
        Matrix P = task.Q[h - 1] + K.transpose() * task.R[h - 1] * K +
                   closed.transpose() * pv.P[h] * closed;
        P = 0.5 * (P + P.transpose());
        pv.P[h - 1] = std::move(P);
        pv.c_offset[h - 1] = pv.c_offset[h] + (task.noise_cov * pv.P[h]).trace();
    }
    return pv;
}

double policy_value_at(const PolicyValue& pv, int stage, const Vector& x) {
    if (stage < 1 || stage > pv.horizon()) {
        throw StageOutOfRange("stage must lie in [1, H]");
    }
    return x.dot(pv.P[stage - 1] * x) + pv.c_offset[stage - 1];
}

}  // namespace ctxlqr
