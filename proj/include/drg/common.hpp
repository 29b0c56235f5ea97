#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace drg {

// Error hierarchy: validation errors are caller mistakes (bad arguments,
// broken invariants); runtime errors are numerical/search failures that
// can occur on valid input.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct RuntimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure carrying the residual that was achieved.
struct NumericalError : RuntimeError {
    double residual;
    NumericalError(const std::string& what, double res)
        : RuntimeError(what), residual(res) {}
};

// Compensated (Kahan) accumulator: keeps exhaustive probability sums
// honest at the 1e-12 tolerances used throughout the test suite.
class KahanSum {
public:
    void add(double v) {
        double y = v - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

}  // namespace drg
