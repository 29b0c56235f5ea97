#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "drg/common.hpp"

namespace drg {

// Counter-based splitmix64 stream.  The whole generator state is two
// 64-bit words (key, counter), which makes checkpoints trivial to
// serialize and lets us derive independent named substreams from one
// seed without sharing mutable state.
class Rng {
public:
    Rng() = default;
    explicit Rng(std::uint64_t key, std::uint64_t counter = 0)
        : key_(key), counter_(counter) {}

    // Derive a generator from arbitrary seed bytes.
    static Rng from_bytes(const std::vector<std::uint8_t>& bytes);

    // Independent substream labelled by name; deterministic in (state, name).
    Rng split(std::string_view label) const;

    std::uint64_t next();

    // Uniform double in [0,1).
    double uniform();

    // Uniform integer in [0, bound); bound > 0.
    std::uint64_t below(std::uint64_t bound);

    bool bernoulli(double p) { return uniform() < p; }

    // Index drawn from unnormalized non-negative weights.
    std::size_t discrete(const std::vector<double>& weights);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // m distinct values from {0..pool-1}, in random order.
    std::vector<int> choose(int pool, int m);

    std::string state_hex() const;
    static Rng from_state_hex(const std::string& hex);

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_ = 0x9e3779b97f4a7c15ULL;
    std::uint64_t counter_ = 0;
};

}  // namespace drg
