#pragma once

#include <Eigen/Dense>

#include "drg/distribution.hpp"
#include "drg/rng.hpp"

namespace drg {

struct SearchOutcome {
    // Permutation to compose onto the candidate distribution: the
    // conjugated moments M'(sigma[u], sigma[v]) realize `objective`.
    Permutation sigma;
    double objective = 0.0;
    bool reached_target = false;
    long steps = 0;
};

// Exploration objective for the bilinear method: with W = Omega/k - I and
// A(u,v) = M'(sigma[u], sigma[v]),
//   F(sigma) = sum_{r,s,u,v} W(r,s) W(u,v) A(r,u) A(s,v) = tr(W A W' A).
// Direct O(n^4)-free evaluation used as the reference oracle in tests.
double bilinear_objective(const Eigen::MatrixXd& Omega,
                          const Eigen::MatrixXd& Mprime, double k,
                          const Permutation& sigma);

enum class SearchMode { Maximize, Minimize };

// Best-improvement transposition hill-climbing on F(sigma).  Contraction
// products are maintained incrementally (rank-3 updates per accepted
// swap), giving O(1) per candidate delta and O(n^2) per accepted step.
// Up to `restarts` extra random starts are tried when the target is not
// reached; the best outcome over all starts is returned.
SearchOutcome search_bilinear(const Eigen::MatrixXd& Omega,
                              const QuadraticMatrix& Mprime, double k,
                              double target, SearchMode mode, Rng& rng,
                              int restarts = 8);

// Closed-form gap of the partition strategy (alignment set K from
// sigma_m) against a tidied candidate whose heavy set J overlaps K in t
// coordinates.  Exact under the block-exchangeable moment structure;
// O(1) in n.
double partition_gap_overlap(const BlockMoments& blocks, int n, double k,
                             int t);

// Scan g(t) over t in {0..n/2}, return a permutation realizing the best
// overlap (canonical segment composed with a random within-half shuffle).
SearchOutcome search_partition(const BlockMoments& blocks,
                               const Permutation& sigma_m, double k,
                               double target, Rng& rng);

}  // namespace drg
