#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "drg/engine.hpp"

namespace drg {

// One verification check with its printed outcome.
struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

enum class VerifyLevel { Fast, Full };

struct VerifyOptions {
    VerifyLevel level = VerifyLevel::Full;
    // Falsifiability fixture: perturb the constant-5 bound of the
    // fitted-bilinear check down to 0.5 so that verify must fail.
    bool tamper = false;
};

// Runs the verification suite, printing one "[PASS]/[FAIL] name: detail"
// line per check to `out`.  Returns all results; overall success is the
// conjunction of the pass flags.
std::vector<CheckResult> run_acceptance(const VerifyOptions& opts,
                                        std::ostream& out);

// --- benchmarking (shared by the bench command and the slope check) ------

struct BenchRow {
    int n = 0;
    std::string method;
    double fit_ms = 0.0;
    double search_ms = 0.0;
    double total_ms = 0.0;
};

// Times strategy fit + defeating-permutation search at each size.
std::vector<BenchRow> run_bench(const std::vector<int>& sizes, Method method,
                                Rng& rng);

// Least-squares slope of ln(total_ms) against ln(n).
double loglog_slope(const std::vector<BenchRow>& rows);

}  // namespace drg
