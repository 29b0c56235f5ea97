#include "drg/search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace drg {

// --- bilinear exploration ------------------------------------------------

double bilinear_objective(const Eigen::MatrixXd& Omega,
                          const Eigen::MatrixXd& Mprime, double k,
                          const Permutation& sigma) {
    int n = static_cast<int>(Mprime.rows());
    require(Omega.rows() == n && Omega.cols() == n && Mprime.cols() == n,
            "bilinear_objective: dimension mismatch");
    require(sigma.n() == n, "bilinear_objective: permutation size mismatch");
    Eigen::MatrixXd W = Omega / k - Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd A(n, n);
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) A(u, v) = Mprime(sigma[u], sigma[v]);
    // F = <W, A W A> elementwise (equals the quadruple sum for symmetric A).
    return W.cwiseProduct(A * W * A).sum();
}

namespace {

// Hill-climbing state for F(A) = <W, A W A> under row/column swaps of A.
// A swap (a,b) perturbs A by Delta = -w g' - g w' + c w w' with
// w = e_a - e_b, g = A w, c = w' A w; every product needed for the O(1)
// delta formula is maintained by low-rank updates.
struct ClimbState {
    Eigen::MatrixXd W;
    Eigen::MatrixXd A;
    Eigen::MatrixXd WA, AW, AWA;  // W*A, A*W, A*W*A
    Eigen::MatrixXd S;            // W A W' + W' A W
    Eigen::MatrixXd AS, SA;      // A*S, S*A
    std::vector<int> tau;         // A(u,v) = Mprime(tau[u], tau[v])

    void refresh(const Eigen::MatrixXd& Mprime) {
        int n = static_cast<int>(W.rows());
        A.resize(n, n);
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v)
                A(u, v) = Mprime(tau[static_cast<std::size_t>(u)],
                                 tau[static_cast<std::size_t>(v)]);
        WA = W * A;
        AW = A * W;
        AWA = AW * A;
        S = WA * W.transpose() + W.transpose() * AW;
        AS = A * S;
        SA = S * A;
    }

    double objective() const { return W.cwiseProduct(AWA).sum(); }

    // Quadratic form (e_a - e_b)' P (e_a - e_b).
    static double q(const Eigen::MatrixXd& P, int a, int b) {
        return P(a, a) - P(a, b) - P(b, a) + P(b, b);
    }

    // Exact change of F when rows/columns a and b of A are swapped.
    double delta(int a, int b) const {
        double c = q(A, a, b);
        double linear = -q(AS, a, b) - q(SA, a, b) + c * q(S, a, b);
        double s_ww = q(W, a, b);
        double s_wg = q(WA, a, b);
        double s_gw = q(AW, a, b);
        double s_gg = q(AWA, a, b);
        double quad = 2.0 * s_wg * s_gw + 2.0 * s_gg * s_ww -
                      2.0 * c * s_ww * (s_wg + s_gw) + c * c * s_ww * s_ww;
        return linear + quad;
    }

    void apply(int a, int b) {
        int n = static_cast<int>(W.rows());
        Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
        w(a) = 1.0;
        w(b) = -1.0;
        Eigen::VectorXd g = A.col(a) - A.col(b);
        double c = q(A, a, b);

        // Delta = sum_t p_t q_t' over three outer products.
        std::array<Eigen::VectorXd, 3> p = {w, g, c * w};
        std::array<Eigen::VectorXd, 3> qv = {-g, -w, w};

        Eigen::MatrixXd WAold = WA, AWold = AW, Sold = S;

        // dS = W Delta W' + W' Delta W as six outer products r_m s_m'.
        std::array<Eigen::VectorXd, 6> r, s;
        for (int t = 0; t < 3; ++t) {
            r[static_cast<std::size_t>(t)] = W * p[static_cast<std::size_t>(t)];
            s[static_cast<std::size_t>(t)] = W * qv[static_cast<std::size_t>(t)];
            r[static_cast<std::size_t>(t + 3)] = W.transpose() * p[static_cast<std::size_t>(t)];
            s[static_cast<std::size_t>(t + 3)] = W.transpose() * qv[static_cast<std::size_t>(t)];
        }

        // AWA' = AWA + Delta(WA) + (AW)Delta + Delta W Delta.
        for (int t = 0; t < 3; ++t) {
            AWA.noalias() += p[static_cast<std::size_t>(t)] *
                             (WAold.transpose() * qv[static_cast<std::size_t>(t)]).transpose();
            AWA.noalias() += (AWold * p[static_cast<std::size_t>(t)]) *
                             qv[static_cast<std::size_t>(t)].transpose();
        }
        for (int t = 0; t < 3; ++t)
            for (int u = 0; u < 3; ++u) {
                double coef = qv[static_cast<std::size_t>(t)].dot(
                    r[static_cast<std::size_t>(u)]);  // q_t' W p_u
                if (coef != 0.0)
                    AWA.noalias() += coef * p[static_cast<std::size_t>(t)] *
                                     qv[static_cast<std::size_t>(u)].transpose();
            }

        // AS' = AS + A dS + Delta S + Delta dS   (with old S, old A+Delta mix
        // resolved as AS' = (A+Delta)(S+dS)).
        for (int m = 0; m < 6; ++m) {
            AS.noalias() += (A * r[static_cast<std::size_t>(m)]) *
                            s[static_cast<std::size_t>(m)].transpose();
            SA.noalias() += r[static_cast<std::size_t>(m)] *
                            (A.transpose() * s[static_cast<std::size_t>(m)]).transpose();
        }
        for (int t = 0; t < 3; ++t) {
            AS.noalias() += p[static_cast<std::size_t>(t)] *
                            (Sold.transpose() * qv[static_cast<std::size_t>(t)]).transpose();
            SA.noalias() += (Sold * p[static_cast<std::size_t>(t)]) *
                            qv[static_cast<std::size_t>(t)].transpose();
        }
        for (int t = 0; t < 3; ++t)
            for (int m = 0; m < 6; ++m) {
                double ct = qv[static_cast<std::size_t>(t)].dot(r[static_cast<std::size_t>(m)]);
                if (ct != 0.0)
                    AS.noalias() += ct * p[static_cast<std::size_t>(t)] *
                                    s[static_cast<std::size_t>(m)].transpose();
                double cm = s[static_cast<std::size_t>(m)].dot(p[static_cast<std::size_t>(t)]);
                if (cm != 0.0)
                    SA.noalias() += cm * r[static_cast<std::size_t>(m)] *
                                    qv[static_cast<std::size_t>(t)].transpose();
            }

        // First-order products and A itself.
        for (int t = 0; t < 3; ++t) {
            WA.noalias() += r[static_cast<std::size_t>(t)] *
                            qv[static_cast<std::size_t>(t)].transpose();
            AW.noalias() += p[static_cast<std::size_t>(t)] *
                            s[static_cast<std::size_t>(t + 3)].transpose();
            A.noalias() += p[static_cast<std::size_t>(t)] *
                           qv[static_cast<std::size_t>(t)].transpose();
        }
        for (int m = 0; m < 6; ++m)
            S.noalias() += r[static_cast<std::size_t>(m)] *
                           s[static_cast<std::size_t>(m)].transpose();

        std::swap(tau[static_cast<std::size_t>(a)], tau[static_cast<std::size_t>(b)]);
    }
};

}  // namespace

SearchOutcome search_bilinear(const Eigen::MatrixXd& Omega,
                              const QuadraticMatrix& Mprime, double k,
                              double target, SearchMode mode, Rng& rng,
                              int restarts) {
    validate_degradation(k);
    Mprime.validate();
    int n = Mprime.n();
    require(Omega.rows() == n && Omega.cols() == n,
            "search_bilinear: dimension mismatch");
    require(restarts >= 0, "search_bilinear: restarts must be >= 0");

    double sign = (mode == SearchMode::Maximize) ? 1.0 : -1.0;
    ClimbState st;
    st.W = Omega / k - Eigen::MatrixXd::Identity(n, n);
    double scale = st.W.cwiseAbs().maxCoeff() * Mprime.M.cwiseAbs().maxCoeff();
    double tol = 1e-12 * (scale * scale * n * n + 1.0);

    SearchOutcome best;
    best.objective = -std::numeric_limits<double>::infinity();
    long total_steps = 0;

    for (int start = 0; start <= restarts; ++start) {
        st.tau.resize(static_cast<std::size_t>(n));
        std::iota(st.tau.begin(), st.tau.end(), 0);
        if (start > 0) rng.shuffle(st.tau);
        st.refresh(Mprime.M);

        for (;;) {
            double best_delta = tol;
            int ba = -1, bb = -1;
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b) {
                    double d = sign * st.delta(a, b);
                    if (d > best_delta) {
                        best_delta = d;
                        ba = a;
                        bb = b;
                    }
                }
            if (ba < 0) break;
            st.apply(ba, bb);
            ++total_steps;
        }

        double obj = st.objective();
        if (sign * obj > sign * best.objective ||
            best.objective == -std::numeric_limits<double>::infinity()) {
            best.objective = obj;
            best.sigma = Permutation(st.tau);
        }
        if (sign * best.objective >= sign * target) break;
    }

    best.steps = total_steps;
    best.reached_target = sign * best.objective >= sign * target;
    return best;
}

// --- partition method ----------------------------------------------------

namespace {

// Symmetric matrices that are constant on the blocks of a 4-group
// partition up to a per-group diagonal shift: X(u,v) = c[g(u)][g(v)] +
// d[g(u)] [u == v].  Closed under multiplication given the group sizes,
// which makes the exact gap formula O(1) in n.
struct Grouped {
    double c[4][4] = {};
    double d[4] = {};
};

Grouped mul(const Grouped& x, const Grouped& y, const double (&size)[4]) {
    Grouped out;
    for (int g = 0; g < 4; ++g) {
        for (int h = 0; h < 4; ++h) {
            double v = 0.0;
            for (int m = 0; m < 4; ++m) v += size[m] * x.c[g][m] * y.c[m][h];
            v += x.d[g] * y.c[g][h] + x.c[g][h] * y.d[h];
            out.c[g][h] = v;
        }
        out.d[g] = x.d[g] * y.d[g];
    }
    return out;
}

double trace(const Grouped& x, const double (&size)[4]) {
    double v = 0.0;
    for (int g = 0; g < 4; ++g) v += size[g] * (x.c[g][g] + x.d[g]);
    return v;
}

double inner(const Grouped& x, const Grouped& y, const double (&size)[4]) {
    double v = 0.0;
    for (int g = 0; g < 4; ++g)
        for (int h = 0; h < 4; ++h) v += size[g] * size[h] * x.c[g][h] * y.c[g][h];
    for (int g = 0; g < 4; ++g)
        v += size[g] * ((x.c[g][g] + x.d[g]) * (y.c[g][g] + y.d[g]) -
                        x.c[g][g] * y.c[g][g]);
    return v;
}

}  // namespace

double partition_gap_overlap(const BlockMoments& blocks, int n, double k,
                             int t) {
    validate_degradation(k);
    blocks.validate();
    int h = n / 2;
    require(n >= 4 && n % 2 == 0, "partition_gap_overlap: n must be even >= 4");
    require(0 <= t && t <= h, "partition_gap_overlap: overlap out of range");

    // Groups: 0 = K ∩ J, 1 = K \ J, 2 = J \ K, 3 = neither; J is the
    // candidate's heavy set, K the strategy's alignment set.
    double size[4] = {static_cast<double>(t), static_cast<double>(h - t),
                      static_cast<double>(h - t), static_cast<double>(t)};
    bool in_j[4] = {true, false, true, false};
    bool in_k[4] = {true, true, false, false};

    Grouped M;
    for (int g = 0; g < 4; ++g) {
        for (int gg = 0; gg < 4; ++gg) {
            if (in_j[g] && in_j[gg]) M.c[g][gg] = blocks.beta;
            else if (!in_j[g] && !in_j[gg]) M.c[g][gg] = blocks.beta_bar;
            else M.c[g][gg] = blocks.gamma;
        }
        M.d[g] = in_j[g] ? blocks.alpha - blocks.beta
                         : blocks.alpha_bar - blocks.beta_bar;
    }

    // Mhat = diag(mu) + (M - diag M)/k.
    Grouped Mhat;
    for (int g = 0; g < 4; ++g) {
        for (int gg = 0; gg < 4; ++gg) Mhat.c[g][gg] = M.c[g][gg] / k;
        Mhat.d[g] = (in_j[g] ? blocks.alpha : blocks.alpha_bar) -
                    M.c[g][g] / k;
    }

    double qcoef = 2.0 / (static_cast<double>(n) * n);
    Grouped Om;
    for (int g = 0; g < 4; ++g)
        for (int gg = 0; gg < 4; ++gg)
            Om.c[g][gg] = (in_k[g] == in_k[gg]) ? qcoef : 0.0;

    Grouped OmMhat = mul(Om, Mhat, size);
    Grouped M2 = mul(M, M, size);
    double nk = static_cast<double>(n) * k;
    return trace(mul(OmMhat, OmMhat, size), size) -
           2.0 / (n * k * k) * inner(Om, M2, size) +
           inner(M, M, size) / (nk * nk);
}

SearchOutcome search_partition(const BlockMoments& blocks,
                               const Permutation& sigma_m, double k,
                               double target, Rng& rng) {
    int n = sigma_m.n();
    int h = n / 2;

    int best_t = 0;
    double best_g = -std::numeric_limits<double>::infinity();
    for (int t = 0; t <= h; ++t) {
        double g = partition_gap_overlap(blocks, n, k, t);
        if (g > best_g) {
            best_g = g;
            best_t = t;
        }
    }

    // K = coordinates the strategy maps into I0.
    std::vector<int> in_k, out_k;
    for (int p = 0; p < n; ++p)
        (sigma_m[p] < h ? in_k : out_k).push_back(p);
    require(static_cast<int>(in_k.size()) == h,
            "search_partition: sigma_m does not split the halves");

    // Canonical J: best_t coordinates from K plus h - best_t from its
    // complement; tau sends J to I0.
    std::vector<char> in_j(static_cast<std::size_t>(n), 0);
    for (int idx = 0; idx < best_t; ++idx) in_j[static_cast<std::size_t>(in_k[static_cast<std::size_t>(idx)])] = 1;
    for (int idx = 0; idx < h - best_t; ++idx) in_j[static_cast<std::size_t>(out_k[static_cast<std::size_t>(idx)])] = 1;
    std::vector<int> tau(static_cast<std::size_t>(n));
    int lo = 0, hi = h;
    for (int u = 0; u < n; ++u)
        tau[static_cast<std::size_t>(u)] = in_j[static_cast<std::size_t>(u)] ? lo++ : hi++;

    Permutation within = Permutation::random_within_halves(n, rng);
    SearchOutcome out;
    out.sigma = compose(within, Permutation(std::move(tau)));
    out.objective = best_g;
    out.reached_target = best_g >= target;
    out.steps = h + 1;
    return out;
}

}  // namespace drg
