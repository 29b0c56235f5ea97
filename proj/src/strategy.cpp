#include "drg/strategy.hpp"

#include <algorithm>
#include <cmath>

namespace drg {

namespace {

double clamp_strategy(double v, double k) {
    return std::clamp(v, 0.0, 1.0 / k);
}

}  // namespace

double TabulatedStrategy::value(const ExperimentVector& i,
                                const ExperimentVector& j) const {
    require(static_cast<int>(i.size()) == n && static_cast<int>(j.size()) == n,
            "TabulatedStrategy: dimension mismatch");
    auto it = table.find(key(to_mask(i), to_mask(j)));
    return it == table.end() ? fill_value : it->second;
}

double bilinear_eval_raw(const BilinearStrategy& s, const ExperimentVector& i,
                         const ExperimentVector& j) {
    require(static_cast<int>(i.size()) == s.n && static_cast<int>(j.size()) == s.n,
            "bilinear_eval: dimension mismatch");
    double acc = 0.0;
    for (int u = 0; u < s.n; ++u) {
        if (!i[static_cast<std::size_t>(u)]) continue;
        double row = 0.0;
        for (int v = 0; v < s.n; ++v)
            if (j[static_cast<std::size_t>(v)]) row += s.Omega(u, v);
        acc += row;
    }
    return s.k * acc;
}

double bilinear_eval(const BilinearStrategy& s, const ExperimentVector& i,
                     const ExperimentVector& j) {
    return clamp_strategy(bilinear_eval_raw(s, i, j), s.k);
}

double partition_eval(const PartitionStrategy& s, const ExperimentVector& i,
                      const ExperimentVector& j) {
    require(static_cast<int>(i.size()) == s.n && static_cast<int>(j.size()) == s.n,
            "partition_eval: dimension mismatch");
    int h = s.n / 2;
    int ca = 0, cb = 0, wi = 0, wj = 0;
    for (int p = 0; p < s.n; ++p) {
        if (i[static_cast<std::size_t>(p)]) {
            ++wi;
            if (s.sigma_a[p] < h) ++ca;
        }
        if (j[static_cast<std::size_t>(p)]) {
            ++wj;
            if (s.sigma_b[p] < h) ++cb;
        }
    }
    double n2 = static_cast<double>(s.n) * s.n;
    double raw = 2.0 * s.k / n2 *
                 (static_cast<double>(ca) * cb +
                  static_cast<double>(wi - ca) * (wj - cb));
    return clamp_strategy(raw, s.k);
}

double strategy_eval(const Strategy& s, const ExperimentVector& i,
                     const ExperimentVector& j) {
    return std::visit(
        [&](const auto& strat) -> double {
            using T = std::decay_t<decltype(strat)>;
            if constexpr (std::is_same_v<T, TabulatedStrategy>)
                return strat.value(i, j);
            else if constexpr (std::is_same_v<T, BilinearStrategy>)
                return bilinear_eval(strat, i, j);
            else
                return partition_eval(strat, i, j);
        },
        s);
}

double strategy_k(const Strategy& s) {
    return std::visit([](const auto& strat) { return strat.k; }, s);
}

// --- oracle fitting ------------------------------------------------------

TabulatedStrategy oracle_fit(const MixtureDistribution& distA,
                             const MixtureDistribution& distB, double k) {
    validate_degradation(k);
    int n = distA.n();
    require(distB.n() == n, "oracle_fit: dimension mismatch");
    require(n <= kOracleNMax, "oracle_fit: n exceeds oracle_n_max");
    ObserverStats sa = observer_stats(distA, k);
    ObserverStats sb = observer_stats(distB, k);

    TabulatedStrategy strat;
    strat.n = n;
    strat.k = k;
    strat.fill_value = clamp_strategy(sa.mu.dot(sb.mu) / (n * k), k);

    std::size_t count = std::size_t(1) << n;
    double nk = static_cast<double>(n) * k;
    for (std::uint32_t im = 0; im < count; ++im) {
        if (sa.a[im] == 0.0) continue;
        const double* brow = &sa.b[static_cast<std::size_t>(im) * static_cast<std::size_t>(n)];
        for (std::uint32_t jm = 0; jm < count; ++jm) {
            if (sb.a[jm] == 0.0) continue;
            const double* crow = &sb.b[static_cast<std::size_t>(jm) * static_cast<std::size_t>(n)];
            double num = 0.0;
            for (int s = 0; s < n; ++s) num += brow[s] * crow[s];
            double value = num / (nk * sa.a[im] * sb.a[jm]);
            strat.table.emplace(TabulatedStrategy::key(im, jm),
                                clamp_strategy(value, k));
        }
    }
    return strat;
}

// --- bilinear fitting ----------------------------------------------------

Eigen::MatrixXd neumann_inverse(const Eigen::MatrixXd& Mtilde, double tol) {
    int n = static_cast<int>(Mtilde.rows());
    require(Mtilde.cols() == n && n > 0, "neumann_inverse: matrix must be square");
    require((Mtilde - Mtilde.transpose()).cwiseAbs().maxCoeff() <= 1e-9,
            "neumann_inverse: matrix must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(Mtilde);
    require(llt.info() == Eigen::Success,
            "neumann_inverse: matrix must be positive definite");

    // Max row sum bounds the spectral radius, so lambda * lambda_max <= 1
    // and I - lambda * Mtilde is a contraction on the SPD spectrum.
    double rho_ub = Mtilde.cwiseAbs().rowwise().sum().maxCoeff();
    double lambda = 1.0 / rho_ub;
    Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd step = eye - lambda * Mtilde;
    Eigen::MatrixXd x = lambda * eye;

    int cap = 64 * static_cast<int>(std::ceil(std::log2(std::max(n, 2))));
    double residual = std::numeric_limits<double>::infinity();
    for (int q = 0; q < cap; ++q) {
        Eigen::MatrixXd prod = x * Mtilde;
        residual = (prod - eye).cwiseAbs().rowwise().sum().maxCoeff();
        if (residual <= tol) return x;
        x = lambda * eye + x * step;
    }
    // One final residual check after the last update.
    residual = (x * Mtilde - eye).cwiseAbs().rowwise().sum().maxCoeff();
    if (residual <= tol) return x;
    throw NumericalError("neumann_inverse: iteration cap exceeded", residual);
}

BilinearStrategy bilinear_fit(const QuadraticMatrix& M, double k) {
    validate_degradation(k);
    M.validate();
    int n = M.n();

    // Coordinates with mu_u = 0 never fire; drop them before inversion.
    std::vector<int> keep;
    for (int u = 0; u < n; ++u)
        if (M.mu(u) > 0.0) keep.push_back(u);
    int m = static_cast<int>(keep.size());
    require(m > 0, "bilinear_fit: all first moments vanish");

    Eigen::MatrixXd Mred(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            Mred(a, b) = M.M(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(b)]);
    // Mhat = diag(mu) + off-diagonal part of M divided by k: the exact
    // second-moment kernel of the published bits i.
    Eigen::MatrixXd Mhat = Mred / k;
    for (int a = 0; a < m; ++a) Mhat(a, a) = Mred(a, a);

    Eigen::MatrixXd Minv = neumann_inverse(Mhat, 1e-9);
    Eigen::MatrixXd core = Minv * (Mred * Mred) * Minv / (n * k * k);

    BilinearStrategy s;
    s.n = n;
    s.k = k;
    s.Omega = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            s.Omega(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(b)]) = core(a, b);
    return s;
}

PartitionStrategy partition_fit(const QuadraticMatrix& MA,
                                const QuadraticMatrix& MB, double k) {
    validate_degradation(k);
    PartitionStrategy s;
    s.n = MA.n();
    require(MB.n() == s.n, "partition_fit: dimension mismatch");
    s.k = k;
    s.sigma_a = tidy(MA, TidyMode::Min);
    s.sigma_b = tidy(MB, TidyMode::Min);
    return s;
}

}  // namespace drg
