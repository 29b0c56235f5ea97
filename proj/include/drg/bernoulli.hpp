#pragma once

#include <vector>

#include "drg/common.hpp"
#include "drg/rng.hpp"

namespace drg {

// Parameter vector x in [0,1]^n (probability units, pre-degradation).
using ParamVector = std::vector<double>;
// Experiment vector i in {0,1}^n, the published draw of a degraded trial.
using ExperimentVector = std::vector<std::uint8_t>;

// Validates the global parameter-vector invariants (entries in [0,1],
// n even and >= 6).  Low-level arithmetic below accepts any even n so
// that tiny worked examples stay checkable; distributions and the
// engine enforce this.
void validate_param_vector(const ParamVector& x);
void validate_degradation(double k);

// --- experiment-vector set algebra -------------------------------------

int weight(const ExperimentVector& i);                       // |i|
int dot(const ExperimentVector& i, const ExperimentVector& j);
ExperimentVector complement(const ExperimentVector& i);      // ī
ExperimentVector set_union(const ExperimentVector& i, const ExperimentVector& j);
ExperimentVector set_intersect(const ExperimentVector& i, const ExperimentVector& j);
ExperimentVector set_minus(const ExperimentVector& i, const ExperimentVector& j);
bool is_superset(const ExperimentVector& i, const ExperimentVector& j);  // i ⊃ j (inclusive)

// Enumeration helpers for exhaustive small-n sums.
ExperimentVector from_mask(std::uint32_t mask, int n);
std::uint32_t to_mask(const ExperimentVector& i);

// --- degraded-trial arithmetic ------------------------------------------

// chi_i(x) = prod_s (i_s x_s + (1-i_s)(1-x_s)): probability of drawing i
// from independent Bernoulli(x_s) trials.  Sums to 1 over all i.
double chi(const ExperimentVector& i, const ParamVector& x);

// pi_upper_j(x) = prod_s (j_s x_s + (1-j_s)); satisfies the inversion
// formula pi_upper_j(x) = sum over i ⊇ j of chi_i(x).
double pi_upper(const ExperimentVector& j, const ParamVector& x);

// psi_l(x) = sum over |j| = l of chi_j(x), computed by an O(n^2)
// weight-generating-polynomial recurrence.
double psi_weight(const ParamVector& x, int l);

// Binomial pmf term C(r,l) theta^l (1-theta)^(r-l).
double bernoulli_coeff(int l, int r, double theta);

// One degraded trial: bit s ~ Bernoulli(x_s / k), independent across s.
ExperimentVector sample_trial(const ParamVector& x, double k, Rng& rng);

// Legitimate-partner estimators.
double v_a(const ParamVector& x, const ExperimentVector& j);
double v_b(const ExperimentVector& i, const ParamVector& y);

// Closed-form moments of (V_A, V_B) conditional on (x, y).
struct PairMoments {
    double mean;              // E[V_A] = E[V_B] = x.y/(nk)
    double var_a;             // Var(V_A)
    double var_b;             // Var(V_B)
    double expected_sq_diff;  // E[(V_B - V_A)^2], always <= 2/(nk)
};
PairMoments pair_moments(const ParamVector& x, const ParamVector& y, double k);

}  // namespace drg
