#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "drg/distribution.hpp"

using namespace drg;

namespace {

LGridDistribution random_lgrid(int n, Rng& rng, bool random_sigma = true) {
    int h = n / 2;
    LGridDistribution d;
    d.n = n;
    d.L.resize(h + 1, h + 1);
    for (int r = 0; r <= h; ++r)
        for (int s = 0; s <= h; ++s) d.L(r, s) = rng.uniform() + 1e-6;
    d.L /= d.L.sum();
    d.sigma = random_sigma ? Permutation::random(n, rng)
                           : Permutation::identity(n);
    return d;
}

MixtureDistribution random_mixture(int n, Rng& rng) {
    MixtureDistribution m;
    double w = 0.25 + 0.5 * rng.uniform();
    m.components.push_back({w, random_lgrid(n, rng)});
    m.components.push_back({1.0 - w, random_lgrid(n, rng)});
    return m;
}

double exhaustive_crossing_extremum(const Eigen::MatrixXd& M, bool minimize) {
    int n = static_cast<int>(M.rows());
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = minimize ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity();
    do {
        double v = crossing_sum(M, Permutation(perm));
        best = minimize ? std::min(best, v) : std::max(best, v);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

TEST_CASE("distribution validation") {
    Rng rng(50);
    LGridDistribution d = random_lgrid(6, rng);
    CHECK_NOTHROW(d.validate());

    LGridDistribution bad = d;
    bad.L(0, 0) = -0.1;
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = d;
    bad.L(0, 0) += 0.5;
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    bad = d;
    bad.n = 8;
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    MixtureDistribution m;
    CHECK_THROWS_AS(m.validate(), ValidationError);
    m.components.push_back({0.5, d});
    CHECK_THROWS_AS(m.validate(), ValidationError);  // weights sum to 0.5
    m.components.push_back({0.5, d});
    CHECK_NOTHROW(m.validate());
}

TEST_CASE("moments agree with exhaustive support enumeration") {
    Rng rng(51);
    int n = 6;
    for (int trial = 0; trial < 5; ++trial) {
        MixtureDistribution mix = random_mixture(n, rng);
        QuadraticMatrix q = moments(mix);
        CHECK_NOTHROW(q.validate());

        Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
        double total = 0.0;
        for (const auto& [x, p] : support_points(mix)) {
            total += p;
            for (int u = 0; u < n; ++u) {
                mu(u) += p * x[static_cast<std::size_t>(u)];
                for (int v = 0; v < n; ++v)
                    M(u, v) += p * x[static_cast<std::size_t>(u)] * x[static_cast<std::size_t>(v)];
            }
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
        CHECK((q.mu - mu).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((q.M - M).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("mixture moments are affine in the weights") {
    Rng rng(52);
    int n = 8;
    MixtureDistribution mix = random_mixture(n, rng);
    QuadraticMatrix q = moments(mix);
    QuadraticMatrix q0 = moments(mix.components[0].dist);
    QuadraticMatrix q1 = moments(mix.components[1].dist);
    double w = mix.components[0].weight;
    CHECK((q.M - (w * q0.M + (1 - w) * q1.M)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((q.mu - (w * q0.mu + (1 - w) * q1.mu)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("block moments match the identity-sigma moment matrix") {
    Rng rng(53);
    int n = 8, h = 4;
    LGridDistribution d = random_lgrid(n, rng, /*random_sigma=*/false);
    BlockMoments b = block_moments(d);
    QuadraticMatrix q = moments(d);
    CHECK(std::abs(q.mu(0) - b.alpha) <= 1e-12);
    CHECK(std::abs(q.mu(h) - b.alpha_bar) <= 1e-12);
    CHECK(std::abs(q.M(0, 1) - b.beta) <= 1e-12);
    CHECK(std::abs(q.M(h, h + 1) - b.beta_bar) <= 1e-12);
    CHECK(std::abs(q.M(0, h) - b.gamma) <= 1e-12);
}

TEST_CASE("crossing_sum matches a direct double loop") {
    Rng rng(54);
    int n = 6;
    QuadraticMatrix q = moments(random_mixture(n, rng));
    Permutation sigma = Permutation::random(n, rng);
    double direct = 0.0;
    for (int u = 0; u < 3; ++u)
        for (int v = 3; v < 6; ++v) direct += q.M(sigma[u], sigma[v]);
    CHECK(std::abs(crossing_sum(q.M, sigma) - direct) <= 1e-12);
}

TEST_CASE("tidy reaches the exhaustive crossing extrema on S_6") {
    Rng rng(55);
    int n = 6;
    for (int trial = 0; trial < 10; ++trial) {
        QuadraticMatrix q = moments(random_mixture(n, rng));
        double lo = crossing_sum(q.M, tidy(q, TidyMode::Min));
        double hi = crossing_sum(q.M, tidy(q, TidyMode::Max));
        CHECK(std::abs(lo - exhaustive_crossing_extremum(q.M, true)) <= 1e-12);
        CHECK(std::abs(hi - exhaustive_crossing_extremum(q.M, false)) <= 1e-12);
    }
}

TEST_CASE("c_bounds order and exchangeable collapse") {
    Rng rng(56);
    QuadraticMatrix q = moments(random_mixture(8, rng));
    CBounds b = c_bounds(q);
    CHECK(b.c_minus <= b.c_plus + 1e-12);

    // Fully exchangeable coordinates: every permutation gives the same
    // crossing sum, so the two extrema coincide and membership fails.
    int n = 8, h = 4;
    LGridDistribution iid;
    iid.n = n;
    iid.L.resize(h + 1, h + 1);
    for (int r = 0; r <= h; ++r)
        for (int s = 0; s <= h; ++s) iid.L(r, s) = binomial(h, r) * binomial(h, s);
    iid.L /= iid.L.sum();
    iid.sigma = Permutation::identity(n);
    CBounds bi = c_bounds(moments(iid));
    CHECK(std::abs(bi.c_plus - bi.c_minus) <= 1e-12);
    CHECK_FALSE(zeta_membership(MixtureDistribution::single(iid), 1e-6));
}

TEST_CASE("spread is normalized and extremal for corner point masses") {
    Rng rng(57);
    LGridDistribution d = random_lgrid(10, rng);
    double s = spread(d);
    CHECK(s >= 0.0);
    CHECK(s <= 0.25 + 1e-15);

    LGridDistribution corner;
    corner.n = 10;
    corner.L = Eigen::MatrixXd::Zero(6, 6);
    corner.L(5, 0) = 1.0;
    corner.sigma = Permutation::identity(10);
    CHECK(std::abs(spread(corner) - 0.25) <= 1e-15);
}

TEST_CASE("tidied forms preserve the weight table and extremize crossings") {
    Rng rng(58);
    int n = 6;
    LGridDistribution d = random_lgrid(n, rng);
    QuadraticMatrix q = moments(d);
    double lo = exhaustive_crossing_extremum(q.M, true);
    double hi = exhaustive_crossing_extremum(q.M, false);

    LGridDistribution tmin = tidied_form(d, {TidyMode::Min, false}, rng);
    LGridDistribution tmax = tidied_form(d, {TidyMode::Max, true}, rng);
    CHECK((tmin.L - d.L).cwiseAbs().maxCoeff() == 0.0);

    // The crossing sum of the tidied distribution's own moments under the
    // identity split equals the corresponding extremum; the within-half
    // shuffle and the half swap leave it unchanged.
    Permutation id = Permutation::identity(n);
    CHECK(std::abs(crossing_sum(moments(tmin).M, id) - lo) <= 1e-12);
    CHECK(std::abs(crossing_sum(moments(tmax).M, id) - hi) <= 1e-12);
}

TEST_CASE("sampling matches the enumerated support masses") {
    Rng rng(59);
    int n = 6;
    MixtureDistribution mix = random_mixture(n, rng);

    std::map<std::uint32_t, double> expect;
    for (const auto& [x, p] : support_points(mix)) {
        std::uint32_t m = 0;
        for (int u = 0; u < n; ++u)
            if (x[static_cast<std::size_t>(u)] > 0.5) m |= 1u << u;
        expect[m] += p;
        CHECK(std::abs(prob_of(mix, x) - p) <= 1e-12);
    }

    const int draws = 40000;
    std::map<std::uint32_t, int> counts;
    for (int t = 0; t < draws; ++t) {
        ParamVector x = sample_param(mix, rng);
        std::uint32_t m = 0;
        for (int u = 0; u < n; ++u)
            if (x[static_cast<std::size_t>(u)] > 0.5) m |= 1u << u;
        counts[m] += 1;
    }
    for (const auto& [m, c] : counts) CHECK(expect.count(m) == 1);
    double tv = 0.0;
    for (const auto& [m, p] : expect)
        tv += std::abs(p - static_cast<double>(counts[m]) / draws);
    // Total variation of a 64-cell empirical histogram at 4e4 draws.
    CHECK(tv / 2.0 <= 0.03);
}

TEST_CASE("permuted composes sampling semantics") {
    Rng rng(60);
    int n = 8;
    LGridDistribution d = random_lgrid(n, rng);
    Permutation tau = Permutation::random(n, rng);
    QuadraticMatrix base = moments(d);
    QuadraticMatrix conj = moments(permuted(d, tau));
    for (int u = 0; u < n; ++u) {
        CHECK(std::abs(conj.mu(u) - base.mu(tau[u])) <= 1e-12);
        for (int v = 0; v < n; ++v)
            CHECK(std::abs(conj.M(u, v) - base.M(tau[u], tau[v])) <= 1e-12);
    }
}

TEST_CASE("observer stats are a normalized sufficient summary") {
    Rng rng(61);
    int n = 6;
    double k = 4.0;
    MixtureDistribution mix = random_mixture(n, rng);
    ObserverStats st = observer_stats(mix, k);
    Eigen::VectorXd mu = moments(mix).mu;

    KahanSum total;
    std::vector<KahanSum> col(static_cast<std::size_t>(n));
    for (std::uint32_t m = 0; m < (1u << n); ++m) {
        total.add(st.a[m]);
        for (int s = 0; s < n; ++s)
            col[static_cast<std::size_t>(s)].add(
                st.b[static_cast<std::size_t>(m) * static_cast<std::size_t>(n) + static_cast<std::size_t>(s)]);
    }
    CHECK(std::abs(total.value() - 1.0) <= 1e-12);
    // Conditioning on nothing recovers the first moments.
    for (int s = 0; s < n; ++s)
        CHECK(std::abs(col[static_cast<std::size_t>(s)].value() - mu(s)) <= 1e-12);
}
