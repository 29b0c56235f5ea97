#pragma once

#include <deque>
#include <optional>

#include "drg/gap.hpp"
#include "drg/search.hpp"

namespace drg {

enum class Method { Bilinear, Partition, Combined };

struct MixMode {
    bool random = true;       // alpha_mix drawn uniformly each step
    double alpha_mix = 0.5;   // used when random == false
};

struct EngineConfig {
    int n = 8;
    double k = 2.0;
    double alpha = 4e-4;          // zeta membership threshold (sqrt applied)
    double theta_spread = 0.05;   // fresh-pick spread threshold
    double maturity_factor = 1.0; // steps required = ceil(factor * n * ln n)
    Method method = Method::Combined;
    MixMode mix_mode;
    std::vector<std::uint8_t> seed;
    double target_multiple = 10.0;  // defeat target, in pair_gap units
    int restart_budget = 8;

    int maturity_steps() const;
    // Bits required of the seed: n * (1 + log2 n).
    int required_seed_bits() const;
    void validate() const;
};

struct EngineState {
    long m = 0;
    MixtureDistribution phi_current;
    QuadraticMatrix avg_moments;   // running average over all Phi_s so far
    long avg_count = 0;            // number of distributions averaged (m + 1)
    Strategy strategy_fast;        // fitted to moments(Phi_m)
    Strategy strategy_slow;        // fitted to avg_moments
    Rng rng;
    std::deque<std::uint64_t> history_digest;  // moment fingerprints, cap 512
};

inline constexpr std::size_t kDigestCapacity = 512;

// One line of the step log.
struct StepRecord {
    long m = 0;
    double objective_fast = 0.0;  // measured gap of the fast track's defeat
    double objective_slow = 0.0;
    bool reached_target = false;
    int repick_count = 0;
    double mix_weight = 0.0;
};

// Variants of the recursion used by the period-analysis harness.
struct StepOptions {
    enum class Track { Fast, Slow, Both };
    Track track = Track::Both;
    // Deterministic picks: the fresh distribution is a fixed point mass
    // and all randomized tie-breaking (shuffles, restarts, mix weight)
    // is disabled; used to expose the short-period behavior.
    bool deterministic_picks = false;
    // Mix half-and-half with the uniform L-grid instead of mixing the
    // two tracks (period-analysis flag).
    bool dsp1_mix = false;
};

EngineState init(const EngineConfig& config);

// Random member of zeta(alpha) from the reduced picking set: rejection
// sample L tables until spread >= theta_spread and zeta membership holds.
LGridDistribution fresh_zeta(const EngineConfig& config, Rng& rng);

StepRecord step(EngineState& state, const EngineConfig& config);
StepRecord run_algorithm1(EngineState& state, const EngineConfig& config,
                          const StepOptions& opts = {StepOptions::Track::Fast, false, false});
StepRecord run_algorithm2(EngineState& state, const EngineConfig& config,
                          const StepOptions& opts = {StepOptions::Track::Slow, false, false});

ParamVector emit(const EngineState& state, const EngineConfig& config, Rng& rng);

// Quantized FNV fingerprint of a moment matrix (1e-9 resolution).
std::uint64_t moment_fingerprint(const QuadraticMatrix& q);

// Smallest lag p such that some fingerprint repeats p entries later.
std::optional<int> detect_period(const std::deque<std::uint64_t>& digest);

// --- protocol emulation --------------------------------------------------

enum class AdversaryKind { Oracle, Bilinear, Partition, Constant };

struct ProtocolReport {
    long rounds = 0;
    double pair_sq = 0.0;       // E[(V_A - V_B)^2]
    double pair_sq_err = 0.0;
    double adv_sq = 0.0;        // E[(omega - V_A)^2]
    double adv_sq_err = 0.0;
    double advantage_ratio = 0.0;  // adv_sq / pair_sq
};

// Two independent engines run to maturity; the eavesdropper is fitted to
// time-averaged published statistics only, then scored over fresh rounds.
ProtocolReport protocol_sim(const EngineConfig& config, long rounds,
                            AdversaryKind adversary);

}  // namespace drg
