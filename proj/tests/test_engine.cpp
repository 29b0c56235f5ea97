#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <string>

#include "drg/io.hpp"

using namespace drg;

namespace {

EngineConfig small_config(std::uint8_t tag = 0x01) {
    EngineConfig c;
    c.n = 8;
    c.k = 2.0;
    c.method = Method::Combined;
    c.target_multiple = 0.5;
    c.restart_budget = 4;
    c.seed = {tag, 0xaa, 0xbb, 0xcc, 0xdd, 0xee};
    return c;
}

}  // namespace

TEST_CASE("config validation names the required seed entropy") {
    EngineConfig c = small_config();
    CHECK_NOTHROW(c.validate());
    CHECK(c.required_seed_bits() == 32);  // n (1 + log2 n) at n = 8

    EngineConfig short_seed = c;
    short_seed.seed = {0x01, 0x02};
    try {
        short_seed.validate();
        FAIL("expected a seed-entropy validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("32") != std::string::npos);
    }

    EngineConfig odd = c;
    odd.n = 7;
    CHECK_THROWS_AS(odd.validate(), ValidationError);
    EngineConfig small_k = c;
    small_k.k = 1.0;
    CHECK_THROWS_AS(small_k.validate(), ValidationError);
}

TEST_CASE("init is deterministic and lands in zeta(alpha)") {
    EngineConfig c = small_config();
    EngineState a = init(c);
    EngineState b = init(c);
    CHECK(to_json(a.phi_current) == to_json(b.phi_current));
    CHECK(a.m == 0);
    CHECK(zeta_membership(a.phi_current, c.alpha));

    EngineConfig other = small_config(0x02);
    EngineState d = init(other);
    CHECK(to_json(a.phi_current) != to_json(d.phi_current));
}

TEST_CASE("fresh_zeta honors both rejection predicates and rarely collides") {
    EngineConfig c = small_config();
    Rng rng(0xf00d);
    std::set<std::uint64_t> seen;
    for (int t = 0; t < 1000; ++t) {
        LGridDistribution d = fresh_zeta(c, rng);
        CHECK(spread(d) >= c.theta_spread);
        CHECK(zeta_membership(MixtureDistribution::single(d), c.alpha));
        seen.insert(moment_fingerprint(moments(d)));
    }
    CHECK(seen.size() == 1000);
}

TEST_CASE("step is deterministic and clears its defeat targets") {
    EngineConfig c = small_config();
    EngineState a = init(c);
    EngineState b = init(c);
    for (int t = 0; t < 3; ++t) {
        StepRecord ra = step(a, c);
        StepRecord rb = step(b, c);
        CHECK(to_json(ra) == to_json(rb));
        CHECK(ra.reached_target);
        CHECK(ra.objective_fast > 0.0);
        CHECK(ra.objective_slow > 0.0);
        CHECK(ra.mix_weight >= 0.0);
        CHECK(ra.mix_weight <= 1.0);
        CHECK(ra.m == t + 1);
    }
    CHECK(to_json(a.phi_current) == to_json(b.phi_current));
    CHECK(a.avg_count == 4);
}

TEST_CASE("avg_moments is the exact running average") {
    EngineConfig c = small_config(0x03);
    EngineState st = init(c);
    Eigen::MatrixXd sum_m = moments(st.phi_current).M;
    Eigen::VectorXd sum_mu = moments(st.phi_current).mu;
    long count = 1;
    for (int t = 0; t < 10; ++t) {
        step(st, c);
        QuadraticMatrix q = moments(st.phi_current);
        sum_m += q.M;
        sum_mu += q.mu;
        ++count;
    }
    CHECK((st.avg_moments.M - sum_m / static_cast<double>(count))
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
    CHECK((st.avg_moments.mu - sum_mu / static_cast<double>(count))
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
}

TEST_CASE("single-track algorithm variants run and log one objective") {
    EngineConfig c = small_config(0x04);
    EngineState st = init(c);
    StepRecord r1 = run_algorithm1(st, c);
    CHECK(r1.objective_fast > 0.0);
    CHECK(r1.objective_slow == 0.0);
    CHECK(r1.mix_weight == 1.0);
    StepRecord r2 = run_algorithm2(st, c);
    CHECK(r2.objective_slow > 0.0);
    CHECK(r2.objective_fast == 0.0);
}

TEST_CASE("emit enforces maturity and states the remaining steps") {
    EngineConfig c = small_config(0x05);
    EngineState st = init(c);
    Rng rng(1);
    try {
        emit(st, c, rng);
        FAIL("expected a maturity error");
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        CHECK(msg.find("remaining") != std::string::npos);
        CHECK(msg.find(std::to_string(c.maturity_steps())) != std::string::npos);
    }
}

TEST_CASE("mature emissions are binary with the predicted mean level") {
    EngineConfig c = small_config(0x06);
    EngineState st = init(c);
    for (int t = 0; t < c.maturity_steps(); ++t) step(st, c);

    // The emission path re-randomizes the tidied permutation (within-half
    // shuffle plus a fair half swap), so every coordinate's long-run mean
    // is the coordinate-average of mu(Phi_m).
    double level = moments(st.phi_current).mu.mean();
    const int draws = 6000;
    Rng rng(2);
    std::vector<double> freq(static_cast<std::size_t>(c.n), 0.0);
    for (int t = 0; t < draws; ++t) {
        ParamVector x = emit(st, c, rng);
        REQUIRE(static_cast<int>(x.size()) == c.n);
        for (int u = 0; u < c.n; ++u) {
            double v = x[static_cast<std::size_t>(u)];
            REQUIRE((v == 0.0 || v == 1.0));
            freq[static_cast<std::size_t>(u)] += v;
        }
    }
    double se = std::sqrt(level * (1.0 - level) / draws);
    for (int u = 0; u < c.n; ++u)
        CHECK(std::abs(freq[static_cast<std::size_t>(u)] / draws - level) <=
              4.0 * se + 1e-9);
}

TEST_CASE("fingerprints quantize at 1e-9 and the detector finds lags") {
    Eigen::VectorXd mu(4);
    mu << 0.1, 0.2, 0.3, 0.4;
    QuadraticMatrix q;
    q.mu = mu;
    q.M = mu * mu.transpose();
    q.M.diagonal() = mu;
    std::uint64_t f = moment_fingerprint(q);
    QuadraticMatrix q2 = q;
    CHECK(moment_fingerprint(q2) == f);
    q2.M(0, 1) += 1e-7;
    CHECK(moment_fingerprint(q2) != f);

    std::deque<std::uint64_t> ring = {1, 2, 3, 4};
    CHECK_FALSE(detect_period(ring).has_value());
    ring = {7, 1, 2, 1, 2};
    auto p = detect_period(ring);
    REQUIRE(p.has_value());
    CHECK(*p == 2);
}

TEST_CASE("checkpoint round trip resumes identically") {
    EngineConfig c = small_config(0x07);
    EngineState st = init(c);
    for (int t = 0; t < 3; ++t) step(st, c);

    json snap = checkpoint_to_json(st, c);
    EngineState resumed = checkpoint_from_json(snap, c);
    StepRecord ra = step(st, c);
    StepRecord rb = step(resumed, c);
    CHECK(to_json(ra) == to_json(rb));
    CHECK(to_json(st.phi_current) == to_json(resumed.phi_current));

    EngineConfig other = c;
    other.target_multiple = 0.75;
    CHECK_THROWS_AS(checkpoint_from_json(snap, other), ValidationError);
}

TEST_CASE("protocol simulation reports coherent statistics") {
    EngineConfig c = small_config(0x08);
    c.maturity_factor = 0.3;  // keep the harness run short
    ProtocolReport rep = protocol_sim(c, 2000, AdversaryKind::Constant);
    CHECK(rep.rounds == 2000);
    CHECK(rep.pair_sq > 0.0);
    CHECK(rep.adv_sq > 0.0);
    CHECK(rep.pair_sq_err > 0.0);
    CHECK(rep.advantage_ratio ==
          doctest::Approx(rep.adv_sq / rep.pair_sq).epsilon(1e-12));
    // Estimating zero is never better than the legitimate partner.
    CHECK(rep.adv_sq >= rep.pair_sq - 3.0 * (rep.adv_sq_err + rep.pair_sq_err));

    CHECK_THROWS_AS(protocol_sim(c, 10, AdversaryKind::Constant),
                    ValidationError);
}

TEST_CASE("independently seeded engines stay uncorrelated") {
    EngineConfig ca = small_config(0x09);
    EngineConfig cb = small_config(0x0a);
    EngineState a = init(ca);
    EngineState b = init(cb);
    int steps = ca.maturity_steps();
    for (int t = 0; t < steps; ++t) {
        step(a, ca);
        step(b, cb);
    }
    Rng ra(11), rb(12);
    const int rounds = 4000;
    int u = 2;
    double mx = 0.0, my = 0.0, mxy = 0.0;
    for (int t = 0; t < rounds; ++t) {
        double x = emit(a, ca, ra)[static_cast<std::size_t>(u)];
        double y = emit(b, cb, rb)[static_cast<std::size_t>(u)];
        mx += x;
        my += y;
        mxy += x * y;
    }
    mx /= rounds;
    my /= rounds;
    mxy /= rounds;
    // Binary coordinates: se of the cross moment is at most 1/(2 sqrt N).
    double se = 0.5 / std::sqrt(static_cast<double>(rounds));
    CHECK(std::abs(mxy - mx * my) <= 4.0 * se);
}
