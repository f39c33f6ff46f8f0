#pragma once

#include "ctxlqr/types.hpp"

namespace ctxlqr {

/// Per-episode observable pair (C, D) encoding the environment.
struct Context {
    Matrix C;  // state context, p x d
    Matrix D;  // action context, p_u x d_u
};

/// A decoder is the d x (p + p_u) matrix mapping stacked context features
/// to next-state dynamics: [A, B] = theta * blockdiag(C, D).
using Decoder = Matrix;

struct Dynamics {
    Matrix A;
    Matrix B;
};

/// A = theta[:, :p] C,  B = theta[:, p:] D.
Dynamics assemble_dynamics(const Decoder& theta, const Context& ctx);

/// The context-regularized observation z = [Cx ; Du] used as the
/// regression feature; satisfies Ax + Bu = theta z exactly.
Vector context_features(const Context& ctx, const Vector& x, const Vector& u);

/// Frobenius distance between two decoders of equal shape.
double decoder_error(const Decoder& a, const Decoder& b);

}  // namespace ctxlqr
