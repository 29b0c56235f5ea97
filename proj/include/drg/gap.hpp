#pragma once

#include <functional>

#include "drg/strategy.hpp"

namespace drg {

// Mean squared evaluation gap <omega, Phi> = E[(omega(i,j) - x.y/(nk))^2].
struct GapEstimate {
    enum class Method { Exhaustive, ClosedForm, MonteCarlo };

    double value = 0.0;
    Method method = Method::Exhaustive;
    double std_error = 0.0;  // 0 for exact methods
    long samples = 0;
};

using StrategyFn =
    std::function<double(const ExperimentVector&, const ExperimentVector&)>;

// Exact gap by exhaustive summation over the binary supports and all
// 2^n x 2^n public pairs; n <= kOracleNMax.
GapEstimate gap_exhaustive(const Strategy& omega,
                           const MixtureDistribution& distA,
                           const MixtureDistribution& distB, double k);

// Same sum for an arbitrary estimator function (used for unclamped
// variants and cross-checks).
GapEstimate gap_exhaustive_fn(const StrategyFn& omega,
                              const MixtureDistribution& distA,
                              const MixtureDistribution& distB, double k);

// Closed-form gap of the unclamped bilinear estimator k i' Omega j:
//   tr(Omega' Mhat_A Omega Mhat_B) - (2/(n k^2)) <Omega, M_A M_B>
//   + <M_A, M_B> / (n k)^2,  Mhat = diag(mu) + (M - diag M)/k.
GapEstimate gap_bilinear_closed(const Eigen::MatrixXd& Omega,
                                const QuadraticMatrix& MA,
                                const QuadraticMatrix& MB, double k);
GapEstimate gap_bilinear_closed(const Eigen::MatrixXd& Omega,
                                const QuadraticMatrix& M, double k);

// Monte Carlo estimate with standard error; deterministic given rng.
GapEstimate gap_monte_carlo(const Strategy& omega,
                            const MixtureDistribution& distA,
                            const MixtureDistribution& distB, double k,
                            long samples, Rng& rng);

// Reference scales: the distribution-averaged Var(V_A) and the
// legitimate-pair mismatch E[(V_A - V_B)^2] (always <= 2/(nk)).
struct Baselines {
    double var_va = 0.0;
    double pair_gap = 0.0;
};
Baselines baselines(const MixtureDistribution& distA,
                    const MixtureDistribution& distB, double k);

}  // namespace drg
