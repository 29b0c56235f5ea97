#pragma once

#include <vector>

#include "drg/common.hpp"
#include "drg/rng.hpp"

namespace drg {

// Permutation of {0..n-1} stored as an index map.  Applying sigma to a
// vector x yields y with y[u] = x[sigma[u]] (pushforward convention:
// conjugated moments satisfy M'(u,v) = M(sigma[u], sigma[v])).
class Permutation {
public:
    Permutation() = default;
    explicit Permutation(std::vector<int> map);

    static Permutation identity(int n);
    // Canonical half-swap: u -> u + n/2 (mod n).
    static Permutation half_swap(int n);
    static Permutation random(int n, Rng& rng);
    // Random permutation preserving both halves {0..n/2-1} and {n/2..n-1}.
    static Permutation random_within_halves(int n, Rng& rng);

    int n() const { return static_cast<int>(map_.size()); }
    int operator[](int u) const { return map_[static_cast<std::size_t>(u)]; }
    const std::vector<int>& map() const { return map_; }

    Permutation inverse() const;

    // apply(x)[u] = x[map[u]]
    template <typename T>
    std::vector<T> apply(const std::vector<T>& x) const {
        require(static_cast<int>(x.size()) == n(),
                "Permutation::apply: length mismatch");
        std::vector<T> out(x.size());
        for (int u = 0; u < n(); ++u)
            out[static_cast<std::size_t>(u)] = x[static_cast<std::size_t>(map_[static_cast<std::size_t>(u)])];
        return out;
    }

    // Number of non-fixed points.
    int support_size() const;

    bool operator==(const Permutation& other) const { return map_ == other.map_; }

private:
    std::vector<int> map_;
};

// Apply `first`, then `second`: compose(first, second).apply(x) ==
// second.apply(first.apply(x)); as maps, result[u] = first[second[u]].
Permutation compose(const Permutation& first, const Permutation& second);

}  // namespace drg
