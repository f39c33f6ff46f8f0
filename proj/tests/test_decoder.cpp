#include <doctest.h>

#include "ctxlqr/benchmark.hpp"
#include "ctxlqr/decoder.hpp"
#include "ctxlqr/rng.hpp"
#include "oracles.hpp"

using namespace ctxlqr;

namespace {

Context random_context(Rng& rng, int p, int d, int p_u, int d_u) {
    Context ctx;
    ctx.C = Matrix(p, d);
    ctx.D = Matrix(p_u, d_u);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < d; ++j) ctx.C(i, j) = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < p_u; ++i)
        for (int j = 0; j < d_u; ++j) ctx.D(i, j) = rng.uniform(-1.0, 1.0);
    return ctx;
}

}  // namespace

TEST_CASE("identity decoder blocks pass the context through") {
    const int d = 3;
    Decoder theta(d, d + 2);
    theta << Matrix::Identity(d, d), Matrix::Zero(d, 2);

    Context ctx;
    ctx.C = Matrix::Identity(d, d);
    ctx.D = Matrix::Ones(2, 2);

    const auto dyn = assemble_dynamics(theta, ctx);
    CHECK((dyn.A - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(dyn.B.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("point-mass decoder assembles the published dynamics") {
    const Decoder theta = build_theta_star(1.0);
    const Context ctx = context_for_mass(2.0);
    const auto dyn = assemble_dynamics(theta, ctx);

    Matrix expected_a(5, 5);
    expected_a << 1, 0, 0, 0, 0,
                  0, 1, 0, 1, 0,
                  0, 0, 1, 0, 1,
                  0, 0, 0, 1, 0,
                  0, 0, 0, 0, 1;
    Matrix expected_b(5, 2);
    expected_b << 0, 0,
                  0, 0,
                  0, 0,
                  0.5, 0,
                  0, 0.5;
    CHECK((dyn.A - expected_a).cwiseAbs().maxCoeff() == 0.0);
    CHECK((dyn.B - expected_b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assembly matches a naive matrix product") {
    Rng rng(101);
    const int d = 2, p = 3, d_u = 1, p_u = 2;
    Decoder theta(d, p + p_u);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < p + p_u; ++j) theta(i, j) = rng.uniform(-2.0, 2.0);
    // The oracle ignores any special-casing: fill C with state columns.
    Context ctx;
    ctx.C = Matrix(p, d);
    ctx.D = Matrix(p_u, d_u);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < d; ++j) ctx.C(i, j) = rng.uniform(-2.0, 2.0);
    for (int i = 0; i < p_u; ++i)
        for (int j = 0; j < d_u; ++j) ctx.D(i, j) = rng.uniform(-2.0, 2.0);

    const auto dyn = assemble_dynamics(theta, ctx);
    const Matrix a_ref = oracles::naive_matmul(theta.leftCols(p), ctx.C);
    const Matrix b_ref = oracles::naive_matmul(theta.rightCols(p_u), ctx.D);
    CHECK((dyn.A - a_ref).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((dyn.B - b_ref).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("context features stack Cx over Du") {
    SUBCASE("identity contexts recover the raw observation") {
        Context ctx;
        ctx.C = Matrix::Identity(3, 3);
        ctx.D = Matrix::Identity(2, 2);
        Vector x(3), u(2);
        x << 1.0, -2.0, 0.5;
        u << 3.0, 4.0;
        const Vector z = context_features(ctx, x, u);
        REQUIRE(z.size() == 5);
        CHECK(z.head(3) == x);
        CHECK(z.tail(2) == u);
    }

    SUBCASE("zero inputs give the zero feature") {
        Rng rng(5);
        const Context ctx = random_context(rng, 4, 3, 2, 2);
        const Vector z =
            context_features(ctx, Vector::Zero(3), Vector::Zero(2));
        CHECK(z.cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("benchmark context scales the force by the inverse mass") {
        const Context ctx = context_for_mass(4.0);
        Vector x(5), u(2);
        x << 1, 0, 0, 0, 0;
        u << 2, 0;
        const Vector z = context_features(ctx, x, u);
        Vector expected(7);
        expected << 1, 0, 0, 0, 0, 0.5, 0;
        CHECK((z - expected).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("decoder error is the Frobenius distance") {
    const Decoder theta = build_theta_star(0.7);
    CHECK(decoder_error(theta, theta) == 0.0);

    CHECK(decoder_error(Decoder::Zero(1, 4), Decoder::Ones(1, 4)) ==
          doctest::Approx(2.0).epsilon(1e-15));

    Rng rng(77);
    Decoder a(3, 5), b(3, 5);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 5; ++j) {
            a(i, j) = rng.uniform(-1.0, 1.0);
            b(i, j) = rng.uniform(-1.0, 1.0);
        }
    double sum_sq = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 5; ++j) {
            const double diff = a(i, j) - b(i, j);
            sum_sq += diff * diff;
        }
    CHECK(decoder_error(a, b) ==
          doctest::Approx(std::sqrt(sum_sq)).epsilon(1e-12));

    CHECK_THROWS_AS((void)decoder_error(a, Decoder::Zero(3, 4)),
                    DimensionMismatch);
}

TEST_CASE("dynamics applied to (x, u) equal the decoder applied to z") {
    Rng rng(909);
    for (int rep = 0; rep < 25; ++rep) {
        const int d = 1 + static_cast<int>(rng.uniform() * 3);
        const int d_u = 1 + static_cast<int>(rng.uniform() * 2);
        const int p = 1 + static_cast<int>(rng.uniform() * 3);
        const int p_u = 1 + static_cast<int>(rng.uniform() * 2);

        Decoder theta(d, p + p_u);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < p + p_u; ++j) {
                theta(i, j) = rng.uniform(-1.5, 1.5);
            }
        const Context ctx = random_context(rng, p, d, p_u, d_u);
        Vector x(d), u(d_u);
        for (int i = 0; i < d; ++i) x[i] = rng.uniform(-2.0, 2.0);
        for (int i = 0; i < d_u; ++i) u[i] = rng.uniform(-2.0, 2.0);

        const auto dyn = assemble_dynamics(theta, ctx);
        const Vector via_dynamics = dyn.A * x + dyn.B * u;
        const Vector via_features = theta * context_features(ctx, x, u);
        CHECK((via_dynamics - via_features).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("assembly is linear in the decoder") {
    Rng rng(311);
    const int d = 2, p = 3, p_u = 2;
    const Context ctx = random_context(rng, p, d, p_u, 1);

    Decoder t1(d, p + p_u), t2(d, p + p_u);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < p + p_u; ++j) {
            t1(i, j) = rng.uniform(-1.0, 1.0);
            t2(i, j) = rng.uniform(-1.0, 1.0);
        }
    const double alpha = 0.75, beta_coef = -1.25;

    const auto combined = assemble_dynamics(alpha * t1 + beta_coef * t2, ctx);
    const auto d1 = assemble_dynamics(t1, ctx);
    const auto d2 = assemble_dynamics(t2, ctx);
    CHECK((combined.A - (alpha * d1.A + beta_coef * d2.A)).cwiseAbs().maxCoeff()
          <= 1e-13);
    CHECK((combined.B - (alpha * d1.B + beta_coef * d2.B)).cwiseAbs().maxCoeff()
          <= 1e-13);
}
