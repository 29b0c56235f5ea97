#include "drg/gap.hpp"

#include <cmath>

namespace drg {

namespace {

GapEstimate exhaustive_impl(const StrategyFn& omega, const ObserverStats& sa,
                            const ObserverStats& sb, const QuadraticMatrix& qa,
                            const QuadraticMatrix& qb, double k) {
    int n = sa.n;
    std::size_t count = std::size_t(1) << n;
    std::vector<ExperimentVector> vecs(count);
    for (std::uint32_t m = 0; m < count; ++m) vecs[m] = from_mask(m, n);

    double nk = static_cast<double>(n) * k;
    KahanSum acc;
    for (std::uint32_t im = 0; im < count; ++im) {
        if (sa.a[im] == 0.0) continue;
        const double* brow = &sa.b[static_cast<std::size_t>(im) * static_cast<std::size_t>(n)];
        for (std::uint32_t jm = 0; jm < count; ++jm) {
            if (sb.a[jm] == 0.0) continue;
            const double* crow = &sb.b[static_cast<std::size_t>(jm) * static_cast<std::size_t>(n)];
            double w = omega(vecs[im], vecs[jm]);
            double cross = 0.0;
            for (int s = 0; s < n; ++s) cross += brow[s] * crow[s];
            acc.add(w * w * sa.a[im] * sb.a[jm] - 2.0 / nk * w * cross);
        }
    }
    // E[(x.y)^2] = <M_A, M_B> by independence of the two sides.
    double target_sq = qa.M.cwiseProduct(qb.M).sum();

    GapEstimate g;
    g.method = GapEstimate::Method::Exhaustive;
    g.value = acc.value() + target_sq / (nk * nk);
    return g;
}

}  // namespace

GapEstimate gap_exhaustive_fn(const StrategyFn& omega,
                              const MixtureDistribution& distA,
                              const MixtureDistribution& distB, double k) {
    int n = distA.n();
    require(distB.n() == n, "gap_exhaustive: dimension mismatch");
    require(n <= kOracleNMax, "gap_exhaustive: n exceeds oracle_n_max");
    return exhaustive_impl(omega, observer_stats(distA, k),
                           observer_stats(distB, k), moments(distA),
                           moments(distB), k);
}

GapEstimate gap_exhaustive(const Strategy& omega,
                           const MixtureDistribution& distA,
                           const MixtureDistribution& distB, double k) {
    return gap_exhaustive_fn(
        [&](const ExperimentVector& i, const ExperimentVector& j) {
            return strategy_eval(omega, i, j);
        },
        distA, distB, k);
}

GapEstimate gap_bilinear_closed(const Eigen::MatrixXd& Omega,
                                const QuadraticMatrix& MA,
                                const QuadraticMatrix& MB, double k) {
    validate_degradation(k);
    int n = MA.n();
    require(MB.n() == n && Omega.rows() == n && Omega.cols() == n,
            "gap_bilinear_closed: dimension mismatch");

    auto mhat = [&](const QuadraticMatrix& q) {
        Eigen::MatrixXd m = q.M / k;
        for (int u = 0; u < n; ++u) m(u, u) = q.mu(u);
        return m;
    };
    Eigen::MatrixXd ha = mhat(MA);
    Eigen::MatrixXd hb = mhat(MB);

    double nk = static_cast<double>(n) * k;
    GapEstimate g;
    g.method = GapEstimate::Method::ClosedForm;
    g.value = (Omega.transpose() * ha * Omega * hb).trace() -
              2.0 / (n * k * k) * Omega.cwiseProduct(MA.M * MB.M).sum() +
              MA.M.cwiseProduct(MB.M).sum() / (nk * nk);
    return g;
}

GapEstimate gap_bilinear_closed(const Eigen::MatrixXd& Omega,
                                const QuadraticMatrix& M, double k) {
    return gap_bilinear_closed(Omega, M, M, k);
}

GapEstimate gap_monte_carlo(const Strategy& omega,
                            const MixtureDistribution& distA,
                            const MixtureDistribution& distB, double k,
                            long samples, Rng& rng) {
    require(samples >= 100, "gap_monte_carlo: need at least 100 samples");
    validate_degradation(k);
    int n = distA.n();
    require(distB.n() == n, "gap_monte_carlo: dimension mismatch");
    double nk = static_cast<double>(n) * k;

    // Welford running mean/variance.
    double mean = 0.0, m2 = 0.0;
    for (long t = 0; t < samples; ++t) {
        ParamVector x = sample_param(distA, rng);
        ParamVector y = sample_param(distB, rng);
        ExperimentVector i = sample_trial(x, k, rng);
        ExperimentVector j = sample_trial(y, k, rng);
        double dot_xy = 0.0;
        for (int s = 0; s < n; ++s) dot_xy += x[static_cast<std::size_t>(s)] * y[static_cast<std::size_t>(s)];
        double err = strategy_eval(omega, i, j) - dot_xy / nk;
        double sq = err * err;
        double delta = sq - mean;
        mean += delta / static_cast<double>(t + 1);
        m2 += delta * (sq - mean);
    }

    GapEstimate g;
    g.method = GapEstimate::Method::MonteCarlo;
    g.value = mean;
    g.samples = samples;
    double var = samples > 1 ? m2 / static_cast<double>(samples - 1) : 0.0;
    g.std_error = std::sqrt(var / static_cast<double>(samples));
    return g;
}

Baselines baselines(const MixtureDistribution& distA,
                    const MixtureDistribution& distB, double k) {
    validate_degradation(k);
    int n = distA.n();
    require(distB.n() == n, "baselines: dimension mismatch");
    Eigen::VectorXd mua = moments(distA).mu;
    Eigen::VectorXd mub = moments(distB).mu;
    double dotmu = mua.dot(mub);
    double n2k = static_cast<double>(n) * n * k;
    Baselines b;
    // Binary support: x^2 = x, so both closed forms reduce to mu dot mu.
    b.var_va = dotmu * (1.0 - 1.0 / k) / n2k;
    b.pair_gap = dotmu * (2.0 - 2.0 / k) / n2k;
    return b;
}

}  // namespace drg
