#include "drg/engine.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace drg {

int EngineConfig::maturity_steps() const {
    return static_cast<int>(
        std::ceil(maturity_factor * n * std::log(static_cast<double>(n))));
}

int EngineConfig::required_seed_bits() const {
    return static_cast<int>(
        std::ceil(n * (1.0 + std::log2(static_cast<double>(n)))));
}

void EngineConfig::validate() const {
    require(n >= 6 && n % 2 == 0, "config.n must be even and >= 6");
    require(k > 1.0, "config.k must be > 1");
    require(alpha > 0.0, "config.alpha must be > 0");
    require(theta_spread >= 0.0, "config.theta_spread must be >= 0");
    require(maturity_factor > 0.0, "config.maturity_factor must be > 0");
    require(target_multiple > 0.0, "config.target_multiple must be > 0");
    require(restart_budget >= 0, "config.restart_budget must be >= 0");
    if (!mix_mode.random)
        require(mix_mode.alpha_mix >= 0.0 && mix_mode.alpha_mix <= 1.0,
                "config.mix_mode.alpha_mix must lie in [0,1]");
    int bits = required_seed_bits();
    if (static_cast<int>(seed.size()) * 8 < bits) {
        std::ostringstream msg;
        msg << "config.seed too short: the seed must carry at least "
            << bits << " bits (n*(1+log2 n)), got " << seed.size() * 8;
        throw ValidationError(msg.str());
    }
}

// --- fresh picks ---------------------------------------------------------

namespace {

// Gamma(1/2) draw: half a squared standard normal (Box-Muller).
double gamma_half(Rng& rng) {
    double u = rng.uniform();
    double v = rng.uniform();
    // Guard the log endpoint.
    if (u <= 0.0) u = std::numeric_limits<double>::min();
    double z = std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
    return 0.5 * z * z;
}

LGridDistribution point_mass_dist(int n) {
    int h = n / 2;
    LGridDistribution d;
    d.n = n;
    d.L = Eigen::MatrixXd::Zero(h + 1, h + 1);
    d.L(h, 0) = 1.0;
    d.sigma = Permutation::identity(n);
    return d;
}

LGridDistribution uniform_dist(int n) {
    int h = n / 2;
    LGridDistribution d;
    d.n = n;
    d.L.resize(h + 1, h + 1);
    for (int r = 0; r <= h; ++r)
        for (int s = 0; s <= h; ++s) d.L(r, s) = binomial(h, r) * binomial(h, s);
    d.L /= d.L.sum();
    d.sigma = Permutation::identity(n);
    return d;
}

}  // namespace

LGridDistribution fresh_zeta(const EngineConfig& config, Rng& rng) {
    int h = config.n / 2;
    constexpr int kRejectionCap = 1000;
    for (int attempt = 0; attempt < kRejectionCap; ++attempt) {
        LGridDistribution d;
        d.n = config.n;
        d.L.resize(h + 1, h + 1);
        double total = 0.0;
        for (int r = 0; r <= h; ++r)
            for (int s = 0; s <= h; ++s) {
                double w = gamma_half(rng);
                d.L(r, s) = w;
                total += w;
            }
        d.L /= total;
        d.sigma = Permutation::identity(config.n);
        if (spread(d) < config.theta_spread) continue;
        if (!zeta_membership(MixtureDistribution::single(d), config.alpha))
            continue;
        return d;
    }
    throw RuntimeError(
        "fresh_zeta: rejection cap exceeded; recalibrate theta_spread/alpha");
}

// --- state ---------------------------------------------------------------

namespace {

EngineState init_with(const EngineConfig& config, Rng rng) {
    EngineState st;
    st.rng = rng;
    st.phi_current = MixtureDistribution::single(fresh_zeta(config, st.rng));
    st.avg_moments = moments(st.phi_current);
    st.avg_count = 1;
    st.m = 0;
    st.history_digest.push_back(moment_fingerprint(st.avg_moments));
    return st;
}

Strategy fit_strategy(bool bilinear, const QuadraticMatrix& M, double k) {
    if (bilinear) return bilinear_fit(M, k);
    return partition_fit(M, M, k);
}

struct DefeatResult {
    LGridDistribution candidate;
    double gap = 0.0;
    int repicks = 0;
};

// Pick fresh zeta members and search for a defeating permutation until
// the measured gap clears the target, bounded by 16 re-picks.
DefeatResult defeat(const Strategy& strategy, const EngineConfig& config,
                    Rng& rng, bool deterministic) {
    constexpr int kRepickCap = 16;
    double best_gap = -std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < kRepickCap; ++attempt) {
        LGridDistribution psi = deterministic ? point_mass_dist(config.n)
                                              : fresh_zeta(config, rng);
        MixtureDistribution single = MixtureDistribution::single(psi);
        double target =
            config.target_multiple * baselines(single, single, config.k).pair_gap;

        SearchOutcome out;
        double gap = 0.0;
        if (const auto* bl = std::get_if<BilinearStrategy>(&strategy)) {
            out = search_bilinear(bl->Omega, moments(psi), config.k,
                                  std::numeric_limits<double>::infinity(),
                                  SearchMode::Maximize, rng,
                                  deterministic ? 0 : config.restart_budget);
            QuadraticMatrix qc = moments(permuted(psi, out.sigma));
            gap = gap_bilinear_closed(bl->Omega, qc, config.k).value;
        } else if (const auto* pt = std::get_if<PartitionStrategy>(&strategy)) {
            out = search_partition(block_moments(psi), pt->sigma_a, config.k,
                                   target, rng);
            gap = out.objective;
        } else {
            throw RuntimeError("defeat: unsupported strategy family");
        }

        best_gap = std::max(best_gap, gap);
        if (gap >= target) {
            DefeatResult res;
            res.candidate = permuted(psi, out.sigma);
            res.gap = gap;
            res.repicks = attempt;
            return res;
        }
    }
    std::ostringstream msg;
    msg << "step: defeat search failed after re-pick budget; best gap "
        << best_gap << " (target_multiple " << config.target_multiple
        << " likely miscalibrated)";
    throw RuntimeError(msg.str());
}

StepRecord step_impl(EngineState& state, const EngineConfig& config,
                     const StepOptions& opts) {
    config.validate();
    bool fast_active = opts.track != StepOptions::Track::Slow;
    bool slow_active = opts.track != StepOptions::Track::Fast;

    // Strategy families per track: combined uses the cheap partition form
    // per step and the bilinear form against the long-run average.
    bool fast_bilinear = config.method == Method::Bilinear;
    bool slow_bilinear = config.method != Method::Partition;

    StepRecord rec;
    rec.m = state.m + 1;

    MixtureDistribution next;
    if (fast_active) {
        state.strategy_fast =
            fit_strategy(fast_bilinear, moments(state.phi_current), config.k);
        DefeatResult f = defeat(state.strategy_fast, config, state.rng,
                                opts.deterministic_picks);
        rec.objective_fast = f.gap;
        rec.repick_count += f.repicks;
        next.components.push_back({1.0, f.candidate});
    }
    if (slow_active) {
        state.strategy_slow =
            fit_strategy(slow_bilinear, state.avg_moments, config.k);
        DefeatResult s = defeat(state.strategy_slow, config, state.rng,
                                opts.deterministic_picks);
        rec.objective_slow = s.gap;
        rec.repick_count += s.repicks;
        next.components.push_back({1.0, s.candidate});
    }

    if (next.components.size() == 2) {
        double w = (config.mix_mode.random && !opts.deterministic_picks)
                       ? state.rng.uniform()
                       : config.mix_mode.alpha_mix;
        next.components[0].weight = w;
        next.components[1].weight = 1.0 - w;
        rec.mix_weight = w;
    } else {
        next.components[0].weight = 1.0;
        rec.mix_weight = 1.0;
    }
    if (opts.dsp1_mix) {
        for (auto& c : next.components) c.weight *= 0.5;
        next.components.push_back({0.5, uniform_dist(config.n)});
    }
    rec.reached_target = true;  // acceptance contract of defeat()

    state.phi_current = std::move(next);
    QuadraticMatrix qn = moments(state.phi_current);
    double c = static_cast<double>(state.avg_count);
    state.avg_moments.M = (c * state.avg_moments.M + qn.M) / (c + 1.0);
    state.avg_moments.mu = (c * state.avg_moments.mu + qn.mu) / (c + 1.0);
    state.avg_count += 1;
    state.m += 1;
    state.history_digest.push_back(moment_fingerprint(qn));
    while (state.history_digest.size() > kDigestCapacity)
        state.history_digest.pop_front();
    return rec;
}

}  // namespace

EngineState init(const EngineConfig& config) {
    config.validate();
    return init_with(config, Rng::from_bytes(config.seed).split("engine"));
}

StepRecord step(EngineState& state, const EngineConfig& config) {
    return step_impl(state, config, StepOptions{});
}

StepRecord run_algorithm1(EngineState& state, const EngineConfig& config,
                          const StepOptions& opts) {
    StepOptions o = opts;
    o.track = StepOptions::Track::Fast;
    return step_impl(state, config, o);
}

StepRecord run_algorithm2(EngineState& state, const EngineConfig& config,
                          const StepOptions& opts) {
    StepOptions o = opts;
    o.track = StepOptions::Track::Slow;
    return step_impl(state, config, o);
}

ParamVector emit(const EngineState& state, const EngineConfig& config,
                 Rng& rng) {
    int needed = config.maturity_steps();
    if (state.m < needed) {
        std::ostringstream msg;
        msg << "emit: engine not mature, " << (needed - state.m)
            << " steps remaining (maturity " << needed << ")";
        throw ValidationError(msg.str());
    }
    std::vector<double> weights;
    for (const auto& c : state.phi_current.components)
        weights.push_back(c.weight);
    const LGridDistribution& comp =
        state.phi_current.components[rng.discrete(weights)].dist;
    return sample_param(tidied_form_sample(comp, rng), rng);
}

std::uint64_t moment_fingerprint(const QuadraticMatrix& q) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](long long v) {
        for (int b = 0; b < 8; ++b) {
            h ^= static_cast<std::uint64_t>(v >> (8 * b)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    for (int u = 0; u < q.n(); ++u) {
        mix(std::llround(q.mu(u) * 1e9));
        for (int v = 0; v < q.n(); ++v) mix(std::llround(q.M(u, v) * 1e9));
    }
    return h;
}

std::optional<int> detect_period(const std::deque<std::uint64_t>& digest) {
    std::size_t sz = digest.size();
    int best = -1;
    for (std::size_t j = 1; j < sz; ++j)
        for (std::size_t i = j; i-- > 0;)
            if (digest[i] == digest[j]) {
                int lag = static_cast<int>(j - i);
                if (best < 0 || lag < best) best = lag;
                break;  // nearest earlier occurrence gives the smallest lag
            }
    if (best < 0) return std::nullopt;
    return best;
}

// --- protocol emulation --------------------------------------------------

ProtocolReport protocol_sim(const EngineConfig& config, long rounds,
                            AdversaryKind adversary) {
    config.validate();
    require(rounds >= 100, "protocol_sim: need at least 100 rounds");
    if (adversary == AdversaryKind::Oracle)
        require(config.n <= kOracleNMax,
                "protocol_sim: oracle adversary limited to n <= oracle_n_max");

    Rng base = Rng::from_bytes(config.seed);
    EngineState a = init_with(config, base.split("protocol-A"));
    EngineState b = init_with(config, base.split("protocol-B"));

    // Time-averaged mixtures (the public statistics the adversary may use).
    MixtureDistribution avg_a = a.phi_current;
    MixtureDistribution avg_b = b.phi_current;
    int steps = config.maturity_steps();
    for (int t = 0; t < steps; ++t) {
        step(a, config);
        step(b, config);
        for (const auto& c : a.phi_current.components)
            avg_a.components.push_back(c);
        for (const auto& c : b.phi_current.components)
            avg_b.components.push_back(c);
    }
    double norm_a = 0.0, norm_b = 0.0;
    for (const auto& c : avg_a.components) norm_a += c.weight;
    for (const auto& c : avg_b.components) norm_b += c.weight;
    for (auto& c : avg_a.components) c.weight /= norm_a;
    for (auto& c : avg_b.components) c.weight /= norm_b;

    Strategy omega;
    switch (adversary) {
        case AdversaryKind::Constant: {
            TabulatedStrategy t;
            t.n = config.n;
            t.k = config.k;
            t.fill_value = 0.0;
            omega = t;
            break;
        }
        case AdversaryKind::Oracle:
            omega = oracle_fit(avg_a, avg_b, config.k);
            break;
        case AdversaryKind::Bilinear: {
            // Symmetrized long-run average of both sides' moments.
            QuadraticMatrix bar;
            bar.M = 0.5 * (a.avg_moments.M + b.avg_moments.M);
            bar.mu = 0.5 * (a.avg_moments.mu + b.avg_moments.mu);
            omega = bilinear_fit(bar, config.k);
            break;
        }
        case AdversaryKind::Partition:
            omega = partition_fit(a.avg_moments, b.avg_moments, config.k);
            break;
    }

    Rng rng_a = base.split("emit-A");
    Rng rng_b = base.split("emit-B");
    Rng rng_tr = base.split("trials");

    double mean_p = 0.0, m2_p = 0.0, mean_e = 0.0, m2_e = 0.0;
    for (long t = 0; t < rounds; ++t) {
        ParamVector x = emit(a, config, rng_a);
        ParamVector y = emit(b, config, rng_b);
        ExperimentVector i = sample_trial(x, config.k, rng_tr);
        ExperimentVector j = sample_trial(y, config.k, rng_tr);
        double va = v_a(x, j);
        double vb = v_b(i, y);
        double z = strategy_eval(omega, i, j);
        double dp = (va - vb) * (va - vb);
        double de = (z - va) * (z - va);
        double d1 = dp - mean_p;
        mean_p += d1 / static_cast<double>(t + 1);
        m2_p += d1 * (dp - mean_p);
        double d2 = de - mean_e;
        mean_e += d2 / static_cast<double>(t + 1);
        m2_e += d2 * (de - mean_e);
    }

    ProtocolReport rep;
    rep.rounds = rounds;
    rep.pair_sq = mean_p;
    rep.adv_sq = mean_e;
    double denom = static_cast<double>(rounds) * (rounds - 1);
    rep.pair_sq_err = std::sqrt(m2_p / denom);
    rep.adv_sq_err = std::sqrt(m2_e / denom);
    rep.advantage_ratio = rep.pair_sq > 0.0 ? rep.adv_sq / rep.pair_sq : 0.0;
    return rep;
}

}  // namespace drg
