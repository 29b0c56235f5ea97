#include "drg/rng.hpp"

#include <charconv>

namespace drg {
namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

Rng Rng::from_bytes(const std::vector<std::uint8_t>& bytes) {
    std::uint64_t h = fnv1a(bytes.data(), bytes.size(), kFnvOffset);
    return Rng(mix64(h));
}

Rng Rng::split(std::string_view label) const {
    std::uint64_t h = fnv1a(label.data(), label.size(), kFnvOffset ^ key_);
    h = fnv1a(&counter_, sizeof counter_, h);
    return Rng(mix64(h));
}

std::uint64_t Rng::next() {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

double Rng::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) {
    require(bound > 0, "Rng::below: bound must be positive");
    // Rejection sampling over the largest multiple of bound.
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (;;) {
        std::uint64_t v = next();
        if (v < limit) return v % bound;
    }
}

std::size_t Rng::discrete(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) {
        require(w >= 0.0, "Rng::discrete: negative weight");
        total += w;
    }
    require(total > 0.0, "Rng::discrete: all weights zero");
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    return weights.size() - 1;
}

std::vector<int> Rng::choose(int pool, int m) {
    require(0 <= m && m <= pool, "Rng::choose: m out of range");
    std::vector<int> idx(static_cast<std::size_t>(pool));
    for (int i = 0; i < pool; ++i) idx[static_cast<std::size_t>(i)] = i;
    // Partial Fisher-Yates: only the first m positions are needed.
    for (int i = 0; i < m; ++i) {
        auto j = i + static_cast<int>(below(static_cast<std::uint64_t>(pool - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(m));
    return idx;
}

std::string Rng::state_hex() const {
    char buf[33];
    static const char* digits = "0123456789abcdef";
    for (int i = 0; i < 16; ++i) {
        buf[i] = digits[(key_ >> (60 - 4 * i)) & 0xf];
        buf[16 + i] = digits[(counter_ >> (60 - 4 * i)) & 0xf];
    }
    buf[32] = '\0';
    return std::string(buf);
}

Rng Rng::from_state_hex(const std::string& hex) {
    require(hex.size() == 32, "Rng::from_state_hex: expected 32 hex chars");
    auto parse = [](const char* s) {
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(s, s + 16, v, 16);
        require(ec == std::errc() && ptr == s + 16,
                "Rng::from_state_hex: invalid hex");
        return v;
    };
    return Rng(parse(hex.data()), parse(hex.data() + 16));
}

}  // namespace drg
