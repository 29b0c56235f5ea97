#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>

#include "drg/bernoulli.hpp"

using namespace drg;

namespace {

ParamVector random_param(int n, Rng& rng) {
    ParamVector x(static_cast<std::size_t>(n));
    for (auto& v : x) v = rng.uniform();
    return x;
}

}  // namespace

TEST_CASE("parameter vector validation") {
    CHECK_NOTHROW(validate_param_vector(ParamVector(6, 0.5)));
    CHECK_THROWS_AS(validate_param_vector(ParamVector(5, 0.5)), ValidationError);
    CHECK_THROWS_AS(validate_param_vector(ParamVector(4, 0.5)), ValidationError);
    CHECK_THROWS_AS(validate_param_vector(ParamVector(6, 1.5)), ValidationError);
    CHECK_THROWS_AS(validate_param_vector(ParamVector(6, -0.1)), ValidationError);
    CHECK_THROWS_AS(validate_degradation(1.0), ValidationError);
    CHECK_NOTHROW(validate_degradation(1.5));
}

TEST_CASE("experiment vector set algebra") {
    int n = 8;
    Rng rng(41);
    for (int t = 0; t < 50; ++t) {
        std::uint32_t im = static_cast<std::uint32_t>(rng.below(1u << n));
        std::uint32_t jm = static_cast<std::uint32_t>(rng.below(1u << n));
        ExperimentVector i = from_mask(im, n);
        ExperimentVector j = from_mask(jm, n);
        CHECK(to_mask(i) == im);
        CHECK(weight(i) == std::popcount(im));
        CHECK(dot(i, j) == std::popcount(im & jm));
        CHECK(to_mask(complement(i)) == (~im & ((1u << n) - 1)));
        CHECK(to_mask(set_union(i, j)) == (im | jm));
        CHECK(to_mask(set_intersect(i, j)) == (im & jm));
        CHECK(to_mask(set_minus(i, j)) == (im & ~jm));
        CHECK(is_superset(i, j) == ((im & jm) == jm));
        CHECK(is_superset(set_union(i, j), i));
    }
}

TEST_CASE("chi is a probability mass over experiment vectors") {
    Rng rng(42);
    for (int n : {6, 8}) {
        ParamVector x = random_param(n, rng);
        KahanSum total;
        for (std::uint32_t m = 0; m < (1u << n); ++m)
            total.add(chi(from_mask(m, n), x));
        CHECK(std::abs(total.value() - 1.0) <= 1e-12);
    }
}

TEST_CASE("pi_upper satisfies the superset inversion formula") {
    int n = 8;
    Rng rng(43);
    ParamVector x = random_param(n, rng);
    for (std::uint32_t jm = 0; jm < (1u << n); jm += 7) {
        ExperimentVector j = from_mask(jm, n);
        KahanSum sup;
        for (std::uint32_t im = 0; im < (1u << n); ++im)
            if ((im & jm) == jm) sup.add(chi(from_mask(im, n), x));
        CHECK(std::abs(sup.value() - pi_upper(j, x)) <= 1e-12);
    }
}

TEST_CASE("psi_weight matches brute-force weight sums and normalizes") {
    int n = 8;
    Rng rng(44);
    ParamVector x = random_param(n, rng);

    std::vector<double> by_weight(static_cast<std::size_t>(n) + 1, 0.0);
    for (std::uint32_t m = 0; m < (1u << n); ++m) {
        ExperimentVector i = from_mask(m, n);
        by_weight[static_cast<std::size_t>(weight(i))] += chi(i, x);
    }
    KahanSum total;
    for (int l = 0; l <= n; ++l) {
        CHECK(std::abs(psi_weight(x, l) - by_weight[static_cast<std::size_t>(l)]) <= 1e-12);
        total.add(psi_weight(x, l));
    }
    CHECK(std::abs(total.value() - 1.0) <= 1e-12);
    CHECK_THROWS_AS(psi_weight(x, n + 1), ValidationError);
}

TEST_CASE("psi_weight of a constant vector is the binomial pmf") {
    int n = 10;
    double theta = 0.37;
    ParamVector x(static_cast<std::size_t>(n), theta);
    for (int l = 0; l <= n; ++l)
        CHECK(std::abs(psi_weight(x, l) - bernoulli_coeff(l, n, theta)) <= 1e-12);
}

TEST_CASE("bernoulli_coeff normalizes and handles endpoints") {
    for (double theta : {0.0, 0.3, 1.0}) {
        KahanSum total;
        for (int l = 0; l <= 7; ++l) total.add(bernoulli_coeff(l, 7, theta));
        CHECK(std::abs(total.value() - 1.0) <= 1e-12);
    }
    CHECK(bernoulli_coeff(0, 5, 0.0) == 1.0);
    CHECK(bernoulli_coeff(5, 5, 1.0) == 1.0);
    CHECK_THROWS_AS(bernoulli_coeff(3, 2, 0.5), ValidationError);
}

TEST_CASE("sample_trial matches the degraded Bernoulli marginals") {
    int n = 6;
    double k = 3.0;
    Rng rng(45);
    ParamVector x = random_param(n, rng);
    const int draws = 20000;
    std::vector<int> ones(static_cast<std::size_t>(n), 0);
    for (int t = 0; t < draws; ++t) {
        ExperimentVector i = sample_trial(x, k, rng);
        for (int s = 0; s < n; ++s) ones[static_cast<std::size_t>(s)] += i[static_cast<std::size_t>(s)];
    }
    for (int s = 0; s < n; ++s) {
        double p = x[static_cast<std::size_t>(s)] / k;
        double se = std::sqrt(p * (1.0 - p) / draws);
        double freq = static_cast<double>(ones[static_cast<std::size_t>(s)]) / draws;
        CHECK(std::abs(freq - p) <= 4.0 * se + 1e-9);
    }
}

TEST_CASE("legitimate estimators are masked scaled sums") {
    ParamVector x = {0.2, 0.4, 0.6, 0.8, 1.0, 0.0};
    ExperimentVector j = {1, 0, 1, 0, 1, 0};
    CHECK(v_a(x, j) == doctest::Approx((0.2 + 0.6 + 1.0) / 6.0).epsilon(1e-12));
    CHECK(v_b(j, x) == doctest::Approx(v_a(x, j)).epsilon(1e-12));
}

TEST_CASE("pair_moments closed forms") {
    Rng rng(46);
    int n = 6;
    double k = 2.5;
    ParamVector x = random_param(n, rng);
    ParamVector y = random_param(n, rng);
    PairMoments pm = pair_moments(x, y, k);

    SUBCASE("independence splits the squared difference") {
        // V_A and V_B are independent with equal means, so
        // E[(V_B - V_A)^2] = Var(V_A) + Var(V_B).
        CHECK(std::abs(pm.expected_sq_diff - (pm.var_a + pm.var_b)) <= 1e-12);
    }

    SUBCASE("universal 2/nk bound") {
        CHECK(pm.expected_sq_diff <= 2.0 / (n * k) + 1e-15);
    }

    SUBCASE("Monte Carlo agreement") {
        const long samples = 200000;
        double mean_a = 0.0, mean_sq = 0.0;
        double m2_a = 0.0, m2_sq = 0.0;
        for (long t = 0; t < samples; ++t) {
            ExperimentVector i = sample_trial(x, k, rng);
            ExperimentVector j = sample_trial(y, k, rng);
            double va = v_a(x, j);
            double diff = v_b(i, y) - va;
            double sq = diff * diff;
            double d1 = va - mean_a;
            mean_a += d1 / static_cast<double>(t + 1);
            m2_a += d1 * (va - mean_a);
            double d2 = sq - mean_sq;
            mean_sq += d2 / static_cast<double>(t + 1);
            m2_sq += d2 * (sq - mean_sq);
        }
        double se_a = std::sqrt(m2_a / static_cast<double>(samples - 1) / samples);
        double se_sq = std::sqrt(m2_sq / static_cast<double>(samples - 1) / samples);
        CHECK(std::abs(mean_a - pm.mean) <= 4.0 * se_a);
        CHECK(std::abs(mean_sq - pm.expected_sq_diff) <= 4.0 * se_sq);
    }
}
