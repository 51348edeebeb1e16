#include <doctest.h>

#include "support/test_support.hpp"

using namespace projsplit;
using namespace testsupport;

namespace {

// adjoint consistency <A x, y> = <x, A^T y> on random pairs
void check_adjoint(const LinearMap& map, SplitMix64& rng, int pairs = 100) {
    for (int t = 0; t < pairs; ++t) {
        Vec x = random_vec(rng, map.in_dim());
        Vec y = random_vec(rng, map.out_dim());
        Vec ax, aty;
        map.apply(x, ax);
        map.adjoint(y, aty);
        const double lhs = ref::dot(ax, y);
        const double rhs = ref::dot(x, aty);
        const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
        CHECK(std::abs(lhs - rhs) <= 1e-10 * scale);
    }
}

OperatorBlock soft_threshold_block(std::size_t d, double lambda) {
    OperatorBlock b;
    b.map = std::make_shared<IdentityMap>(d);
    b.capability = ProxExactCap{std::make_shared<SoftThresholdProx>(d, lambda)};
    return b;
}

OperatorBlock least_squares_prox_block(DenseMatrix q, Vec b, double sigma, int cg_max = 200) {
    OperatorBlock block;
    block.map = std::make_shared<IdentityMap>(q.cols);
    block.capability =
        ProxInexactCap{std::make_shared<LeastSquaresOperator>(std::move(q), std::move(b)), sigma,
                       CgConfig{cg_max}};
    return block;
}

// 1-D prox oracle: minimize rho*lambda*|t| + (t - a)^2/2 on a fine grid with
// a local refinement, independent of the closed form under test.
double scalar_prox_oracle(double a, double rho_lambda) {
    double best_t = 0.0, best_v = rho_lambda * 0.0 + 0.5 * a * a;
    double lo = -std::abs(a) - 1.0, hi = std::abs(a) + 1.0;
    for (int pass = 0; pass < 6; ++pass) {
        const double step = (hi - lo) / 2000.0;
        for (int i = 0; i <= 2000; ++i) {
            const double t = lo + step * i;
            const double v = rho_lambda * std::abs(t) + 0.5 * (t - a) * (t - a);
            if (v < best_v) {
                best_v = v;
                best_t = t;
            }
        }
        const double span = (hi - lo) / 100.0;
        lo = best_t - span;
        hi = best_t + span;
    }
    return best_t;
}

}  // namespace

TEST_CASE("linear map adjoint consistency") {
    SplitMix64 rng(21);
    check_adjoint(IdentityMap(7), rng);
    auto m = std::make_shared<DenseMatrix>(random_matrix(rng, 9, 5));
    check_adjoint(DenseMatrixMap(m), rng);
    check_adjoint(RowSubmatrixMap(m, 2, 7), rng);
    CHECK_THROWS_AS(RowSubmatrixMap(m, 5, 12), ConfigError);
}

TEST_CASE("row submatrix view equals gathered rows") {
    SplitMix64 rng(22);
    auto m = std::make_shared<DenseMatrix>(random_matrix(rng, 8, 6));
    RowSubmatrixMap view(m, 3, 8);
    Vec x = random_vec(rng, 6), got, want(5);
    view.apply(x, got);
    for (std::size_t i = 0; i < 5; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 6; ++j) s += (*m)(i + 3, j) * x[j];
        want[i] = s;
    }
    for (std::size_t i = 0; i < 5; ++i) CHECK(got[i] == doctest::Approx(want[i]));
}

TEST_CASE("forward_eval") {
    SUBCASE("scalar affine") {
        DenseMatrix two(1, 1);
        two(0, 0) = 2.0;
        OperatorBlock b;
        b.map = std::make_shared<IdentityMap>(1);
        b.capability = ForwardAffineCap{std::make_shared<DenseAffineOperator>(two, Vec{1.0})};
        CHECK(forward_eval(b, {0.0}) == Vec{1.0});
        CHECK(forward_eval(b, {3.0}) == Vec{7.0});
    }
    SUBCASE("least squares gradient") {
        DenseMatrix q(2, 2);
        q(0, 0) = 1.0;
        q(0, 1) = 2.0;
        q(1, 0) = 0.0;
        q(1, 1) = 1.0;
        OperatorBlock b;
        b.map = std::make_shared<IdentityMap>(2);
        b.capability = ForwardAffineCap{std::make_shared<LeastSquaresOperator>(q, Vec{1.0, 1.0})};
        Vec y = forward_eval(b, {1.0, 1.0});
        CHECK(y[0] == doctest::Approx(2.0));
        CHECK(y[1] == doctest::Approx(4.0));
    }
    SUBCASE("prox-only block is rejected") {
        CHECK_THROWS_AS(forward_eval(soft_threshold_block(1, 1.0), {1.0}), ConfigError);
    }
}

TEST_CASE("exact prox of the l1 subdifferential") {
    OperatorBlock b = soft_threshold_block(3, 1.0);
    Vec x, y;

    prox_exact(b, {2.0, -0.5, -3.0}, 1.0, x, y);
    CHECK(x == Vec{1.0, 0.0, -2.0});
    CHECK(y == Vec{1.0, -0.5, -1.0});

    prox_exact(b, {0.0, 0.0, 0.0}, 0.7, x, y);
    CHECK(x == Vec{0.0, 0.0, 0.0});
    CHECK(y == Vec{0.0, 0.0, 0.0});

    OperatorBlock scalar = soft_threshold_block(1, 1.0);
    prox_exact(scalar, {2.0}, 1.0, x, y);
    CHECK(x == Vec{1.0});
    CHECK(y == Vec{1.0});

    CHECK_THROWS_AS(prox_exact(b, {1.0, 1.0, 1.0}, 0.0, x, y), ConfigError);
    CHECK_THROWS_AS(prox_exact(soft_threshold_block(1, 1.0), {1.0}, -1.0, x, y), ConfigError);
}

TEST_CASE("soft-threshold prox against the grid oracle and sign conditions") {
    SplitMix64 rng(23);
    OperatorBlock b = soft_threshold_block(1, 1.0);
    auto& prox_op = *std::get<ProxExactCap>(b.capability).op;
    for (int t = 0; t < 30; ++t) {
        const double a = 4.0 * rng.normal();
        const double rho = 0.1 + 2.0 * rng.uniform01();
        Vec x, y;
        prox_op.prox({a}, rho, x, y);
        CHECK(x[0] == doctest::Approx(scalar_prox_oracle(a, rho)).epsilon(1e-3));

        // optimality: 0 in rho*lambda*d|x| + (x - a), coordinatewise signs
        const double resid = x[0] - a;
        if (x[0] > 0.0) {
            CHECK(resid + rho == doctest::Approx(0.0).epsilon(1e-12));
        } else if (x[0] < 0.0) {
            CHECK(resid - rho == doctest::Approx(0.0).epsilon(1e-12));
        } else {
            CHECK(std::abs(resid) <= rho * (1.0 + 1e-12));
        }
        // x + rho*y = a at binary-friendly stepsizes
        Vec x2, y2;
        prox_op.prox({a}, 0.5, x2, y2);
        CHECK(x2[0] + 0.5 * y2[0] == a);
    }
}

TEST_CASE("relative error criteria") {
    SUBCASE("zero error always passes") {
        CHECK(check_relative_error({1.0}, {0.3}, {2.0}, {0.1}, {0.0}, 1.0, 0.0));
    }
    SUBCASE("sigma = 0 forces nonnegativity") {
        // <gz - x, e> = -0.5 < 0
        CHECK_FALSE(check_relative_error({1.0}, {0.0}, {1.0}, {0.0}, {-0.5}, 1.0, 0.0));
    }
    SUBCASE("worked example") {
        // gz - x = 1, e = -0.5, y - w = 1, rho = 1, sigma = 0.9:
        // (26): -0.5 >= -0.9, (27): -0.5 <= 0.9
        CHECK(check_relative_error({1.0}, {0.0}, {1.0}, {0.0}, {-0.5}, 1.0, 0.9));
    }
    SUBCASE("second inequality can fail alone") {
        // <e, y - w> = 2 > rho*sigma*||y-w||^2 = 0.5
        CHECK_FALSE(check_relative_error({1.0}, {0.0}, {2.0}, {0.0}, {1.0}, 0.5, 0.25));
    }
}

TEST_CASE("inexact CG prox") {
    SUBCASE("exact warm start returns immediately") {
        DenseMatrix q(1, 1);
        q(0, 0) = 1.0;
        OperatorBlock b = least_squares_prox_block(q, {0.0}, 0.9);
        // solve (1 + 1)x = 2 exactly; warm start at the solution
        InexactProxResult r = prox_inexact_cg(b, {2.0}, 1.0, {2.0}, {0.0}, {1.0});
        CHECK(r.inner_iterations == 0);
        CHECK(r.x == Vec{1.0});
        CHECK(r.e == Vec{0.0});
    }
    SUBCASE("1-D system converges in one iteration from zero") {
        DenseMatrix q(1, 1);
        q(0, 0) = 1.0;
        OperatorBlock b = least_squares_prox_block(q, {0.0}, 0.9);
        InexactProxResult r = prox_inexact_cg(b, {2.0}, 1.0, {2.0}, {0.0}, {0.0});
        CHECK(r.inner_iterations == 1);
        CHECK(r.x[0] == doctest::Approx(1.0));
        CHECK(std::abs(r.e[0]) < 1e-14);
    }
    SUBCASE("budget exhaustion carries the best iterate") {
        SplitMix64 rng(24);
        DenseMatrix q = random_matrix(rng, 6, 6);
        OperatorBlock b = least_squares_prox_block(q, random_vec(rng, 6), 0.0, 1);
        Vec gz = random_vec(rng, 6), w = random_vec(rng, 6);
        Vec a = gz;
        for (std::size_t j = 0; j < 6; ++j) a[j] += 2.0 * w[j];
        CHECK_THROWS_AS(prox_inexact_cg(b, a, 2.0, gz, w, Vec(6, 0.0)), CgBudgetError);
    }
    SUBCASE("criteria hold at return and e is the bitwise defect") {
        SplitMix64 rng(25);
        for (int t = 0; t < 20; ++t) {
            DenseMatrix q = random_matrix(rng, 5, 8);
            OperatorBlock b = least_squares_prox_block(q, random_vec(rng, 5), 0.9);
            const double rho = 0.2 + rng.uniform01();
            Vec gz = random_vec(rng, 8), w = random_vec(rng, 8);
            Vec a = gz;
            for (std::size_t j = 0; j < 8; ++j) a[j] += rho * w[j];
            InexactProxResult r = prox_inexact_cg(b, a, rho, gz, w, Vec(8, 0.0));
            CHECK(check_relative_error(gz, r.x, r.y, w, r.e, rho, 0.9));
            for (std::size_t j = 0; j < 8; ++j) {
                CHECK(r.e[j] == r.x[j] + rho * r.y[j] - a[j]);
            }
            // y recomputed through the true operator
            const auto& ls = *std::get<ProxInexactCap>(b.capability).op;
            Vec want;
            ls.eval(r.x, want);
            CHECK(r.y == want);
        }
    }
}

TEST_CASE("least-squares operators are monotone") {
    SplitMix64 rng(26);
    for (int t = 0; t < 30; ++t) {
        LeastSquaresOperator op(random_matrix(rng, 4, 6), random_vec(rng, 4));
        Vec u = random_vec(rng, 6), v = random_vec(rng, 6), tu, tv;
        op.eval(u, tu);
        op.eval(v, tv);
        double inner = 0.0;
        for (std::size_t j = 0; j < 6; ++j) inner += (tu[j] - tv[j]) * (u[j] - v[j]);
        CHECK(inner >= -1e-10);
    }
}

TEST_CASE("cost metering counts Q-equivalent multiplies") {
    SplitMix64 rng(27);
    LeastSquaresOperator op(random_matrix(rng, 3, 4), random_vec(rng, 3), 0.25);
    CostMeter meter;
    Vec out;
    op.eval(random_vec(rng, 4), out, &meter);
    CHECK(meter.q_equivalents == doctest::Approx(0.5));  // one Q and one Q^T
    op.apply_linear(random_vec(rng, 4), out, &meter);
    CHECK(meter.q_equivalents == doctest::Approx(1.0));
}
