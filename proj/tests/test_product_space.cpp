#include <doctest.h>

#include "support/test_support.hpp"

using namespace projsplit;
using namespace testsupport;

namespace {

std::shared_ptr<const LinearMap> scalar_map(double factor) {
    auto m = std::make_shared<DenseMatrix>(1, 1);
    (*m)(0, 0) = factor;
    return std::make_shared<DenseMatrixMap>(m);
}

}  // namespace

TEST_CASE("derived dual") {
    SUBCASE("empty sum when n = 1") {
        PrimalDualPoint p{{1.0}, {}};
        CHECK(derived_dual(p, {}) == Vec{0.0});
    }
    SUBCASE("identity map flips the sign") {
        PrimalDualPoint p{{0.0}, {{3.0}}};
        CHECK(derived_dual(p, {std::make_shared<IdentityMap>(1)}) == Vec{-3.0});
    }
    SUBCASE("adjoints accumulate") {
        PrimalDualPoint p{{0.0}, {{1.0}, {2.0}}};
        CHECK(derived_dual(p, {std::make_shared<IdentityMap>(1), scalar_map(2.0)}) == Vec{-5.0});
    }
    SUBCASE("mismatched map count is an error") {
        PrimalDualPoint p{{0.0}, {{1.0}}};
        CHECK_THROWS_AS(derived_dual(p, {}), ConfigError);
    }
}

TEST_CASE("gamma norm") {
    CHECK(gamma_norm_sq({{0.0}, {}}, {1.0}) == 0.0);
    CHECK(gamma_norm_sq({{1.0}, {{1.0}}}, {2.0}) == doctest::Approx(3.0));
    CHECK(gamma_norm_sq({{0.3}, {{0.4}}}, {100.0}) == doctest::Approx(9.16));
}

TEST_CASE("gamma inner product") {
    PrimalDualPoint zero{{0.0}, {{0.0}}};
    CHECK(gamma_inner(zero, zero, {1.0}) == 0.0);
    CHECK(gamma_inner({{1.0}, {{0.0}}}, {{0.0}, {{5.0}}}, {1.0}) == 0.0);
    CHECK(gamma_inner({{2.0}, {{1.0}}}, {{1.0}, {{4.0}}}, {3.0}) == doctest::Approx(10.0));
    CHECK_THROWS_AS(gamma_inner({{1.0}, {}}, {{1.0, 2.0}, {}}, {1.0}), ConfigError);
}

TEST_CASE("metric properties on random points") {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        GammaMetric metric{0.1 + 10.0 * rng.uniform01()};
        PrimalDualPoint p{random_vec(rng, 4), {random_vec(rng, 3), random_vec(rng, 2)}};
        PrimalDualPoint q{random_vec(rng, 4), {random_vec(rng, 3), random_vec(rng, 2)}};

        const double pp = gamma_norm_sq(p, metric);
        CHECK(pp >= 0.0);
        CHECK(gamma_inner(p, p, metric) == doctest::Approx(pp).epsilon(1e-12));
        CHECK(gamma_inner(p, q, metric) == doctest::Approx(gamma_inner(q, p, metric)).epsilon(1e-12));

        // Cauchy-Schwarz
        const double lhs = gamma_inner(p, q, metric);
        CHECK(lhs * lhs <= pp * gamma_norm_sq(q, metric) * (1.0 + 1e-12) + 1e-300);
    }

    PrimalDualPoint zero{Vec(4, 0.0), {Vec(3, 0.0), Vec(2, 0.0)}};
    CHECK(gamma_norm_sq(zero, {5.0}) == 0.0);
}

TEST_CASE("derived dual is linear") {
    SplitMix64 rng(13);
    std::vector<std::shared_ptr<const LinearMap>> maps = {
        std::make_shared<DenseMatrixMap>(std::make_shared<DenseMatrix>(random_matrix(rng, 3, 4))),
        std::make_shared<IdentityMap>(4)};
    for (int trial = 0; trial < 20; ++trial) {
        PrimalDualPoint p{random_vec(rng, 4), {random_vec(rng, 3), random_vec(rng, 4)}};
        PrimalDualPoint q{random_vec(rng, 4), {random_vec(rng, 3), random_vec(rng, 4)}};
        const double a = rng.normal(), b = rng.normal();

        PrimalDualPoint combo{Vec(4, 0.0), {Vec(3, 0.0), Vec(4, 0.0)}};
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j < p.w[i].size(); ++j) {
                combo.w[i][j] = a * p.w[i][j] + b * q.w[i][j];
            }
        }
        Vec lhs = derived_dual(combo, maps);
        Vec dp = derived_dual(p, maps), dq = derived_dual(q, maps);
        for (std::size_t j = 0; j < lhs.size(); ++j) {
            CHECK(lhs[j] == doctest::Approx(a * dp[j] + b * dq[j]).epsilon(1e-10));
        }
    }
}
