#include "drg/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace drg {

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double v = 1.0;
    for (int t = 0; t < k; ++t)
        v = v * static_cast<double>(n - t) / static_cast<double>(t + 1);
    return v;
}

void LGridDistribution::validate() const {
    require(n >= 4 && n % 2 == 0, "LGridDistribution: n must be even and >= 4");
    int h = half();
    require(L.rows() == h + 1 && L.cols() == h + 1,
            "LGridDistribution: L must be (n/2+1) x (n/2+1)");
    require(sigma.n() == n, "LGridDistribution: sigma size mismatch");
    double total = 0.0;
    for (int r = 0; r <= h; ++r)
        for (int s = 0; s <= h; ++s) {
            require(L(r, s) >= 0.0, "LGridDistribution: negative weight");
            total += L(r, s);
        }
    require(std::abs(total - 1.0) <= 1e-12,
            "LGridDistribution: weights must sum to 1");
}

int MixtureDistribution::n() const {
    require(!components.empty(), "MixtureDistribution: no components");
    return components.front().dist.n;
}

void MixtureDistribution::validate() const {
    require(!components.empty(), "MixtureDistribution: no components");
    double total = 0.0;
    int nn = components.front().dist.n;
    for (const auto& c : components) {
        require(c.weight >= 0.0, "MixtureDistribution: negative weight");
        require(c.dist.n == nn, "MixtureDistribution: mixed dimensions");
        c.dist.validate();
        total += c.weight;
    }
    require(std::abs(total - 1.0) <= 1e-12,
            "MixtureDistribution: weights must sum to 1");
}

MixtureDistribution MixtureDistribution::single(LGridDistribution d) {
    MixtureDistribution m;
    m.components.push_back({1.0, std::move(d)});
    return m;
}

void QuadraticMatrix::validate() const {
    require(M.rows() == M.cols() && M.rows() == mu.size(),
            "QuadraticMatrix: dimension mismatch");
    for (int u = 0; u < n(); ++u) {
        require(std::abs(M(u, u) - mu(u)) <= 1e-9,
                "QuadraticMatrix: diagonal must equal mu (binary support)");
        for (int v = u + 1; v < n(); ++v)
            require(std::abs(M(u, v) - M(v, u)) <= 1e-9,
                    "QuadraticMatrix: matrix must be symmetric");
    }
}

void BlockMoments::validate() const {
    for (double v : {alpha, beta, gamma, alpha_bar, beta_bar})
        require(v >= -1e-12 && v <= 1.0 + 1e-12,
                "BlockMoments: values must lie in [0,1]");
}

// --- moments -------------------------------------------------------------

QuadraticMatrix moments(const LGridDistribution& dist) {
    dist.validate();
    int n = dist.n, h = dist.half();
    // Marginal half-weight statistics of the base (identity-sigma) vector.
    double er = 0, es = 0, err = 0, ess = 0, ers = 0;
    for (int r = 0; r <= h; ++r)
        for (int s = 0; s <= h; ++s) {
            double w = dist.L(r, s);
            if (w == 0.0) continue;
            er += w * r;
            es += w * s;
            err += w * r * (r - 1);
            ess += w * s * (s - 1);
            ers += w * r * s;
        }
    double mu_lo = er / h, mu_hi = es / h;
    double off_lo = h > 1 ? err / (static_cast<double>(h) * (h - 1)) : 0.0;
    double off_hi = h > 1 ? ess / (static_cast<double>(h) * (h - 1)) : 0.0;
    double cross = ers / (static_cast<double>(h) * h);

    QuadraticMatrix q;
    q.mu.resize(n);
    q.M.resize(n, n);
    const auto& sg = dist.sigma;
    auto base_mu = [&](int v) { return v < h ? mu_lo : mu_hi; };
    auto base_m = [&](int u, int v) {
        if (u == v) return base_mu(u);
        bool ulo = u < h, vlo = v < h;
        if (ulo && vlo) return off_lo;
        if (!ulo && !vlo) return off_hi;
        return cross;
    };
    for (int u = 0; u < n; ++u) {
        q.mu(u) = base_mu(sg[u]);
        for (int v = 0; v < n; ++v) q.M(u, v) = base_m(sg[u], sg[v]);
    }
    return q;
}

QuadraticMatrix moments(const MixtureDistribution& dist) {
    dist.validate();
    int n = dist.n();
    QuadraticMatrix q;
    q.mu = Eigen::VectorXd::Zero(n);
    q.M = Eigen::MatrixXd::Zero(n, n);
    for (const auto& c : dist.components) {
        QuadraticMatrix qc = moments(c.dist);
        q.mu += c.weight * qc.mu;
        q.M += c.weight * qc.M;
    }
    return q;
}

BlockMoments block_moments(const LGridDistribution& dist) {
    dist.validate();
    int h = dist.half();
    double er = 0, es = 0, err = 0, ess = 0, ers = 0;
    for (int r = 0; r <= h; ++r)
        for (int s = 0; s <= h; ++s) {
            double w = dist.L(r, s);
            er += w * r;
            es += w * s;
            err += w * r * (r - 1);
            ess += w * s * (s - 1);
            ers += w * r * s;
        }
    BlockMoments b;
    b.alpha = er / h;
    b.alpha_bar = es / h;
    b.beta = h > 1 ? err / (static_cast<double>(h) * (h - 1)) : 0.0;
    b.beta_bar = h > 1 ? ess / (static_cast<double>(h) * (h - 1)) : 0.0;
    b.gamma = ers / (static_cast<double>(h) * h);
    b.validate();
    return b;
}

// --- tidying -------------------------------------------------------------

double crossing_sum(const Eigen::MatrixXd& M, const Permutation& sigma) {
    int n = static_cast<int>(M.rows());
    require(sigma.n() == n, "crossing_sum: permutation size mismatch");
    int h = n / 2;
    KahanSum acc;
    for (int u = 0; u < h; ++u)
        for (int v = h; v < n; ++v) acc.add(M(sigma[u], sigma[v]));
    return acc.value();
}

namespace {

// Minimize the I0 x I0-bar crossing sum of Ms.  Score sort first, then
// best-improvement transposition descent: the sort alone is not always
// optimal, while descent from the sorted start reaches the exhaustive
// minimum on every random instance tried during development.
Permutation tidy_minimize(const Eigen::MatrixXd& Ms) {
    int n = static_cast<int>(Ms.rows());
    int h = n / 2;

    // U_s = sum_{u in I0} M(u,s) - sum_{u in I0-bar} M(u,s).
    auto score = [&](const std::vector<char>& in_j) {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
        for (int a = 0; a < n; ++a) {
            double sgn = in_j[static_cast<std::size_t>(a)] ? 1.0 : -1.0;
            u += sgn * Ms.row(a).transpose();
        }
        return u;
    };

    std::vector<char> in_j(static_cast<std::size_t>(n), 0);
    for (int a = 0; a < h; ++a) in_j[static_cast<std::size_t>(a)] = 1;
    Eigen::VectorXd u0 = score(in_j);

    // Descending stable sort on the initial scores; top half forms J.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return u0(a) > u0(b); });
    std::fill(in_j.begin(), in_j.end(), 0);
    for (int t = 0; t < h; ++t) in_j[static_cast<std::size_t>(order[static_cast<std::size_t>(t)])] = 1;

    Eigen::VectorXd u = score(in_j);
    double scale = Ms.cwiseAbs().maxCoeff() + 1.0;
    // Swap a (leaving J) with b (entering J); the crossing-sum change is
    // U_a - U_b - (M(a,a) + M(b,b) - 2 M(a,b)) with U taken w.r.t. the
    // current partition.
    for (int iter = 0; iter < n * n; ++iter) {
        double best = -1e-13 * scale;
        int best_a = -1, best_b = -1;
        for (int a = 0; a < n; ++a) {
            if (!in_j[static_cast<std::size_t>(a)]) continue;
            for (int b = 0; b < n; ++b) {
                if (in_j[static_cast<std::size_t>(b)]) continue;
                double delta = u(a) - u(b) - (Ms(a, a) + Ms(b, b) - 2.0 * Ms(a, b));
                if (delta < best) {
                    best = delta;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        if (best_a < 0) break;
        in_j[static_cast<std::size_t>(best_a)] = 0;
        in_j[static_cast<std::size_t>(best_b)] = 1;
        u += 2.0 * (Ms.row(best_b).transpose() - Ms.row(best_a).transpose());
    }

    // Deterministic layout: each half ordered by final score, descending.
    std::vector<int> inside, outside;
    for (int a = 0; a < n; ++a)
        (in_j[static_cast<std::size_t>(a)] ? inside : outside).push_back(a);
    auto by_score = [&](int a, int b) { return u(a) > u(b); };
    std::stable_sort(inside.begin(), inside.end(), by_score);
    std::stable_sort(outside.begin(), outside.end(), by_score);
    inside.insert(inside.end(), outside.begin(), outside.end());
    return Permutation(std::move(inside));
}

}  // namespace

Permutation tidy(const QuadraticMatrix& M, TidyMode mode) {
    require(M.n() > 4, "tidy: requires n > 4");
    M.validate();
    if (mode == TidyMode::Min) return tidy_minimize(M.M);
    return tidy_minimize(-M.M);
}

CBounds c_bounds(const QuadraticMatrix& M) {
    double n2 = static_cast<double>(M.n()) * M.n();
    CBounds b;
    b.c_minus = 4.0 / n2 * crossing_sum(M.M, tidy(M, TidyMode::Min));
    b.c_plus = 4.0 / n2 * crossing_sum(M.M, tidy(M, TidyMode::Max));
    require(b.c_minus <= b.c_plus + 1e-12, "c_bounds: extremal order violated");
    return b;
}

bool zeta_membership(const MixtureDistribution& dist, double alpha) {
    require(alpha >= 0.0, "zeta_membership: alpha must be non-negative");
    CBounds b = c_bounds(moments(dist));
    return b.c_plus - b.c_minus >= std::sqrt(alpha);
}

double spread(const LGridDistribution& dist) {
    dist.validate();
    int h = dist.half();
    double n2 = static_cast<double>(dist.n) * dist.n;
    KahanSum acc;
    for (int r = 0; r <= h; ++r)
        for (int s = 0; s <= h; ++s)
            acc.add((static_cast<double>(r - s) * (r - s) / n2) * dist.L(r, s));
    return acc.value();
}

// --- tidied forms --------------------------------------------------------

LGridDistribution tidied_form(const LGridDistribution& dist, TidyBranch branch,
                              Rng& rng) {
    QuadraticMatrix q = moments(dist);
    Permutation t = tidy(q, branch.mode);
    Permutation within = Permutation::random_within_halves(dist.n, rng);
    Permutation chain = compose(t, within);
    if (branch.half_swap) chain = compose(chain, Permutation::half_swap(dist.n));
    LGridDistribution out = dist;
    out.sigma = compose(dist.sigma, chain);
    return out;
}

LGridDistribution tidied_form_sample(const LGridDistribution& dist, Rng& rng) {
    auto pick = rng.below(4);
    TidyBranch branch;
    branch.mode = (pick & 2) ? TidyMode::Max : TidyMode::Min;
    branch.half_swap = (pick & 1) != 0;
    return tidied_form(dist, branch, rng);
}

// --- sampling and support ------------------------------------------------

ParamVector sample_param(const LGridDistribution& dist, Rng& rng) {
    dist.validate();
    int n = dist.n, h = dist.half();
    std::vector<double> weights;
    weights.reserve(static_cast<std::size_t>((h + 1) * (h + 1)));
    for (int r = 0; r <= h; ++r)
        for (int s = 0; s <= h; ++s) weights.push_back(dist.L(r, s));
    auto idx = rng.discrete(weights);
    int r = static_cast<int>(idx) / (h + 1);
    int s = static_cast<int>(idx) % (h + 1);
    ParamVector x0(static_cast<std::size_t>(n), 0.0);
    for (int p : rng.choose(h, r)) x0[static_cast<std::size_t>(p)] = 1.0;
    for (int p : rng.choose(h, s)) x0[static_cast<std::size_t>(h + p)] = 1.0;
    ParamVector out(static_cast<std::size_t>(n));
    for (int u = 0; u < n; ++u) out[static_cast<std::size_t>(u)] = x0[static_cast<std::size_t>(dist.sigma[u])];
    return out;
}

ParamVector sample_param(const MixtureDistribution& dist, Rng& rng) {
    dist.validate();
    std::vector<double> weights;
    weights.reserve(dist.components.size());
    for (const auto& c : dist.components) weights.push_back(c.weight);
    return sample_param(dist.components[rng.discrete(weights)].dist, rng);
}

double prob_of(const LGridDistribution& dist, const ParamVector& x) {
    dist.validate();
    int n = dist.n, h = dist.half();
    require(static_cast<int>(x.size()) == n, "prob_of: length mismatch");
    Permutation inv = dist.sigma.inverse();
    int r = 0, s = 0;
    for (int v = 0; v < n; ++v) {
        double b = x[static_cast<std::size_t>(inv[v])];
        require(b == 0.0 || b == 1.0, "prob_of: vector must be binary");
        if (b == 1.0) (v < h ? r : s) += 1;
    }
    return dist.L(r, s) / (binomial(h, r) * binomial(h, s));
}

double prob_of(const MixtureDistribution& dist, const ParamVector& x) {
    dist.validate();
    double p = 0.0;
    for (const auto& c : dist.components) p += c.weight * prob_of(c.dist, x);
    return p;
}

namespace {

// Append every mask with `ones` bits chosen among positions
// [base, base + pool) to out, starting from `prefix`.
void half_masks(int pool, int ones, int base, std::uint32_t prefix,
                std::vector<std::uint32_t>& out) {
    if (ones == 0) {
        out.push_back(prefix);
        return;
    }
    if (pool < ones) return;
    half_masks(pool - 1, ones, base + 1, prefix, out);
    half_masks(pool - 1, ones - 1, base + 1, prefix | (1u << base), out);
}

}  // namespace

std::vector<std::pair<ParamVector, double>> support_points(
    const MixtureDistribution& dist) {
    dist.validate();
    int n = dist.n(), h = n / 2;
    require(n <= 12, "support_points: exhaustive enumeration limited to n <= 12");
    std::unordered_map<std::uint32_t, double> mass;
    for (const auto& c : dist.components) {
        const auto& d = c.dist;
        for (int r = 0; r <= h; ++r)
            for (int s = 0; s <= h; ++s) {
                double w = c.weight * d.L(r, s);
                if (w == 0.0) continue;
                double per = w / (binomial(h, r) * binomial(h, s));
                std::vector<std::uint32_t> lo, hi;
                half_masks(h, r, 0, 0u, lo);
                half_masks(h, s, h, 0u, hi);
                for (auto ml : lo)
                    for (auto mh : hi) {
                        std::uint32_t base = ml | mh;
                        // y[u] = x0[sigma[u]]
                        std::uint32_t m = 0;
                        for (int u = 0; u < n; ++u)
                            if ((base >> d.sigma[u]) & 1u) m |= 1u << u;
                        mass[m] += per;
                    }
            }
    }
    std::vector<std::pair<ParamVector, double>> out;
    out.reserve(mass.size());
    for (const auto& [m, p] : mass) {
        ParamVector x(static_cast<std::size_t>(n));
        for (int u = 0; u < n; ++u) x[static_cast<std::size_t>(u)] = (m >> u) & 1u ? 1.0 : 0.0;
        out.emplace_back(std::move(x), p);
    }
    return out;
}

ObserverStats observer_stats(const MixtureDistribution& dist, double k) {
    validate_degradation(k);
    int n = dist.n();
    require(n <= 12, "observer_stats: exhaustive enumeration limited to n <= 12");
    auto points = support_points(dist);
    std::size_t count = std::size_t(1) << n;
    ObserverStats st;
    st.n = n;
    st.a.assign(count, 0.0);
    st.b.assign(count * static_cast<std::size_t>(n), 0.0);
    st.mu = moments(dist).mu;
    ParamVector scaled(static_cast<std::size_t>(n));
    for (const auto& [x, p] : points) {
        for (int s = 0; s < n; ++s)
            scaled[static_cast<std::size_t>(s)] = x[static_cast<std::size_t>(s)] / k;
        for (std::uint32_t mask = 0; mask < count; ++mask) {
            double c = p * chi(from_mask(mask, n), scaled);
            if (c == 0.0) continue;
            st.a[mask] += c;
            double* row = &st.b[static_cast<std::size_t>(mask) * static_cast<std::size_t>(n)];
            for (int s = 0; s < n; ++s)
                if (x[static_cast<std::size_t>(s)] != 0.0)
                    row[s] += c * x[static_cast<std::size_t>(s)];
        }
    }
    return st;
}

LGridDistribution permuted(const LGridDistribution& dist, const Permutation& tau) {
    require(tau.n() == dist.n, "permuted: permutation size mismatch");
    LGridDistribution out = dist;
    out.sigma = compose(dist.sigma, tau);
    return out;
}

}  // namespace drg
