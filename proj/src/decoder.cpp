#include "ctxlqr/decoder.hpp"

namespace ctxlqr {

Dynamics assemble_dynamics(const Decoder& theta, const Context& ctx) {
    const Eigen::Index p = ctx.C.rows();
    const Eigen::Index p_u = ctx.D.rows();
    const Eigen::Index d = theta.rows();

    if (theta.cols() != p + p_u) {
        throw DimensionMismatch("decoder columns must equal p + p_u");
    }
    if (ctx.C.cols() != d) {
        throw DimensionMismatch("state context must map the state dimension");
    }

    Dynamics dyn;
    dyn.A = theta.leftCols(p) * ctx.C;
    dyn.B = theta.rightCols(p_u) * ctx.D;
    return dyn;
}

Vector context_features(const Context& ctx, const Vector& x, const Vector& u) {
    if (ctx.C.cols() != x.size()) {
        throw DimensionMismatch("state context / state mismatch");
    }
    if (ctx.D.cols() != u.size()) {
        throw DimensionMismatch("action context / action mismatch");
    }
    Vector z(ctx.C.rows() + ctx.D.rows());
    z.head(ctx.C.rows()) = ctx.C * x;
    z.tail(ctx.D.rows()) = ctx.D * u;
    return z;
}

double decoder_error(const Decoder& a, const Decoder& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch("decoders must have equal shape");
    }
    return (a - b).norm();
}

}  // namespace ctxlqr
