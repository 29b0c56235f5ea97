#include "drg/permutation.hpp"

#include <numeric>

namespace drg {

Permutation::Permutation(std::vector<int> map) : map_(std::move(map)) {
    int n = static_cast<int>(map_.size());
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int v : map_) {
        require(0 <= v && v < n && !seen[static_cast<std::size_t>(v)],
                "Permutation: map is not a bijection on {0..n-1}");
        seen[static_cast<std::size_t>(v)] = 1;
    }
}

Permutation Permutation::identity(int n) {
    std::vector<int> m(static_cast<std::size_t>(n));
    std::iota(m.begin(), m.end(), 0);
    return Permutation(std::move(m));
}

Permutation Permutation::half_swap(int n) {
    require(n % 2 == 0, "Permutation::half_swap: n must be even");
    std::vector<int> m(static_cast<std::size_t>(n));
    int h = n / 2;
    for (int u = 0; u < n; ++u) m[static_cast<std::size_t>(u)] = (u + h) % n;
    return Permutation(std::move(m));
}

Permutation Permutation::random(int n, Rng& rng) {
    std::vector<int> m(static_cast<std::size_t>(n));
    std::iota(m.begin(), m.end(), 0);
    rng.shuffle(m);
    return Permutation(std::move(m));
}

Permutation Permutation::random_within_halves(int n, Rng& rng) {
    require(n % 2 == 0, "Permutation::random_within_halves: n must be even");
    int h = n / 2;
    std::vector<int> lo(static_cast<std::size_t>(h)), hi(static_cast<std::size_t>(h));
    std::iota(lo.begin(), lo.end(), 0);
    std::iota(hi.begin(), hi.end(), h);
    rng.shuffle(lo);
    rng.shuffle(hi);
    lo.insert(lo.end(), hi.begin(), hi.end());
    return Permutation(std::move(lo));
}

Permutation Permutation::inverse() const {
    std::vector<int> inv(map_.size());
    for (int u = 0; u < n(); ++u)
        inv[static_cast<std::size_t>(map_[static_cast<std::size_t>(u)])] = u;
    return Permutation(std::move(inv));
}

int Permutation::support_size() const {
    int c = 0;
    for (int u = 0; u < n(); ++u)
        if (map_[static_cast<std::size_t>(u)] != u) ++c;
    return c;
}

Permutation compose(const Permutation& first, const Permutation& second) {
    require(first.n() == second.n(), "compose: size mismatch");
    std::vector<int> m(static_cast<std::size_t>(first.n()));
    for (int u = 0; u < first.n(); ++u)
        m[static_cast<std::size_t>(u)] = first[second[u]];
    return Permutation(std::move(m));
}

}  // namespace drg
