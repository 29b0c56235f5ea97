#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "drg/bernoulli.hpp"
#include "drg/permutation.hpp"

namespace drg {

// Hidden distribution over binary parameter vectors, represented by a
// (n/2+1)^2 weight table over half-weights (r, s) plus a permutation.
// Sampling: draw (r, s) with probability L(r, s), place r ones uniformly
// in the first half and s in the second half of a base vector x0, then
// output y with y[u] = x0[sigma[u]].
struct LGridDistribution {
    int n = 0;
    Eigen::MatrixXd L;  // (n/2+1) x (n/2+1), non-negative, sums to 1
    Permutation sigma;

    int half() const { return n / 2; }
    void validate() const;
};

// Convex mixture of L-grid components.
struct MixtureComponent {
    double weight = 0.0;
    LGridDistribution dist;
};

struct MixtureDistribution {
    std::vector<MixtureComponent> components;

    int n() const;
    void validate() const;
    static MixtureDistribution single(LGridDistribution d);
};

// First and second moments: M(u,v) = E[x_u x_v], mu_u = E[x_u].  For
// binary support the diagonal of M equals mu.
struct QuadraticMatrix {
    Eigen::MatrixXd M;
    Eigen::VectorXd mu;

    int n() const { return static_cast<int>(mu.size()); }
    void validate() const;
};

// Block-exchangeable second moments of a tidied L-grid distribution:
// within-half means alpha (first half) / alpha_bar (second), within-half
// off-diagonal second moments beta / beta_bar, and the cross term gamma.
struct BlockMoments {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double alpha_bar = 0.0;
    double beta_bar = 0.0;

    void validate() const;
};

// --- moments -------------------------------------------------------------

QuadraticMatrix moments(const LGridDistribution& dist);
QuadraticMatrix moments(const MixtureDistribution& dist);
BlockMoments block_moments(const LGridDistribution& dist);

// --- tidying -------------------------------------------------------------

enum class TidyMode { Min, Max };

// Crossing sum sum_{u in I0, v in I0-bar} M(sigma(u), sigma(v)).
double crossing_sum(const Eigen::MatrixXd& M, const Permutation& sigma);

// Permutation driving the I0 x I0-bar crossing sum of M to its extremum:
// sort the column scores U_s, then apply best-improvement transposition
// descent until no single swap across the partition improves the sum.
Permutation tidy(const QuadraticMatrix& M, TidyMode mode = TidyMode::Min);

struct CBounds {
    double c_minus = 0.0;
    double c_plus = 0.0;
};

// Normalized extremal crossing sums, (4/n^2) * crossing at the tidy
// minimizer / maximizer.
CBounds c_bounds(const QuadraticMatrix& M);

// True iff c_plus - c_minus >= sqrt(alpha), evaluated on the mixture's
// aggregate quadratic matrix.
bool zeta_membership(const MixtureDistribution& dist, double alpha);

// sum_{r,s} ((r-s)^2 / n^2) L(r,s), in [0, 1/4].
double spread(const LGridDistribution& dist);

// --- tidied forms --------------------------------------------------------

struct TidyBranch {
    TidyMode mode = TidyMode::Min;
    bool half_swap = false;
};

// Deterministic core of tidied_form_sample: recompose dist with the
// requested extremal tidying permutation, a random within-half shuffle,
// and optionally the canonical half-swap.
LGridDistribution tidied_form(const LGridDistribution& dist, TidyBranch branch,
                              Rng& rng);

// Uniform choice among the four branches {min, max} x {identity, swap}.
LGridDistribution tidied_form_sample(const LGridDistribution& dist, Rng& rng);

// --- sampling and support ------------------------------------------------

ParamVector sample_param(const LGridDistribution& dist, Rng& rng);
ParamVector sample_param(const MixtureDistribution& dist, Rng& rng);

// Probability mass of a binary vector under the distribution (the (r,s)
// cell weight split uniformly over its C(n/2,r)*C(n/2,s) vectors).
double prob_of(const LGridDistribution& dist, const ParamVector& x);
double prob_of(const MixtureDistribution& dist, const ParamVector& x);

// All support points with nonzero mass; exhaustive, intended for n <= 12.
std::vector<std::pair<ParamVector, double>> support_points(
    const MixtureDistribution& dist);

// Dist with sampling semantics "sample dist, then apply tau".
LGridDistribution permuted(const LGridDistribution& dist, const Permutation& tau);

// Exhaustive statistics of the published degraded vector i, indexed by
// its bit mask:
//   a[i]   = P(i) = sum_x chi_i(x/k) P(x)
//   b[i*n + s] = sum_x x_s chi_i(x/k) P(x)
// The building block of the oracle fit and the exact gap evaluation.
struct ObserverStats {
    int n = 0;
    std::vector<double> a;
    std::vector<double> b;
    Eigen::VectorXd mu;
};
ObserverStats observer_stats(const MixtureDistribution& dist, double k);

double binomial(int n, int k);

}  // namespace drg
