#pragma once

#include <Eigen/Dense>
#include <unordered_map>
#include <variant>

#include "drg/distribution.hpp"

namespace drg {

// Exhaustive table strategies are capped to keep 2^(2n) tables tractable.
inline constexpr int kOracleNMax = 10;

// Exact tabulated strategy: value per public pair (i, j), indexed by the
// bit masks of the two experiment vectors.  Pairs absent from the table
// take fill_value (the unconditional mean for fitted oracles).
struct TabulatedStrategy {
    int n = 0;
    double k = 0.0;
    double fill_value = 0.0;
    std::unordered_map<std::uint64_t, double> table;

    static std::uint64_t key(std::uint32_t i_mask, std::uint32_t j_mask) {
        return (static_cast<std::uint64_t>(i_mask) << 32) | j_mask;
    }
    double value(const ExperimentVector& i, const ExperimentVector& j) const;
};

// Bilinear strategy V_Omega(i, j) = clamp(k * i' Omega j, 0, 1/k).
struct BilinearStrategy {
    int n = 0;
    double k = 0.0;
    Eigen::MatrixXd Omega;
};

// Partition strategy: value from the half-overlap counts of i and j
// against the two alignment permutations.
struct PartitionStrategy {
    int n = 0;
    double k = 0.0;
    Permutation sigma_a;
    Permutation sigma_b;
};

using Strategy = std::variant<TabulatedStrategy, BilinearStrategy, PartitionStrategy>;

// --- evaluation ----------------------------------------------------------

double bilinear_eval(const BilinearStrategy& s, const ExperimentVector& i,
                     const ExperimentVector& j);
// Unclamped k * i' Omega j, the quantity the closed-form gap describes.
double bilinear_eval_raw(const BilinearStrategy& s, const ExperimentVector& i,
                         const ExperimentVector& j);
double partition_eval(const PartitionStrategy& s, const ExperimentVector& i,
                      const ExperimentVector& j);
double strategy_eval(const Strategy& s, const ExperimentVector& i,
                     const ExperimentVector& j);
double strategy_k(const Strategy& s);

// --- fitting -------------------------------------------------------------

// Exact Bayesian oracle: table[i,j] = E[x.y/(nk) | i, j] by exhaustive
// support enumeration; unreachable (i, j) fall back to the unconditional
// mean.  Requires n <= kOracleNMax.
TabulatedStrategy oracle_fit(const MixtureDistribution& distA,
                             const MixtureDistribution& distB, double k);

// Closed-form minimizer of the unclamped bilinear gap:
// Omega* = (1/(n k^2)) Mhat^{-1} M^2 Mhat^{-1} with
// Mhat = diag(mu) + (M - diag(M))/k.  Coordinates with mu_u = 0 are
// dropped before inversion and reinstated as zero rows/columns.
BilinearStrategy bilinear_fit(const QuadraticMatrix& M, double k);

// Iterative inverse X_{q+1} = lambda I + X_q (I - lambda Mtilde) with
// lambda = 1 / (max row sum); converges for SPD Mtilde.  Throws
// NumericalError with the achieved residual if the iteration cap
// (64 * ceil(log2 n)) is exceeded before ||X Mtilde - I||_inf <= tol.
Eigen::MatrixXd neumann_inverse(const Eigen::MatrixXd& Mtilde, double tol);

// Partition strategy aligned to the tidy permutations of the two sides'
// quadratic matrices.
PartitionStrategy partition_fit(const QuadraticMatrix& MA,
                                const QuadraticMatrix& MB, double k);

}  // namespace drg
