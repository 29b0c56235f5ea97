#include "drg/bernoulli.hpp"

#include <cmath>

namespace drg {

void validate_param_vector(const ParamVector& x) {
    int n = static_cast<int>(x.size());
    require(n >= 6 && n % 2 == 0, "ParamVector: n must be even and >= 6");
    for (double v : x)
        require(v >= 0.0 && v <= 1.0, "ParamVector: entries must lie in [0,1]");
}

void validate_degradation(double k) {
    require(k > 1.0, "DegradationFactor: k must be > 1");
}

namespace {
void require_same_length(std::size_t a, std::size_t b) {
    require(a == b, "length mismatch between experiment and parameter vectors");
}
}  // namespace

int weight(const ExperimentVector& i) {
    int w = 0;
    for (auto b : i) w += b;
    return w;
}

int dot(const ExperimentVector& i, const ExperimentVector& j) {
    require_same_length(i.size(), j.size());
    int w = 0;
    for (std::size_t s = 0; s < i.size(); ++s) w += i[s] & j[s];
    return w;
}

ExperimentVector complement(const ExperimentVector& i) {
    ExperimentVector out(i.size());
    for (std::size_t s = 0; s < i.size(); ++s) out[s] = i[s] ? 0 : 1;
    return out;
}

ExperimentVector set_union(const ExperimentVector& i, const ExperimentVector& j) {
    require_same_length(i.size(), j.size());
    ExperimentVector out(i.size());
    for (std::size_t s = 0; s < i.size(); ++s) out[s] = i[s] | j[s];
    return out;
}

ExperimentVector set_intersect(const ExperimentVector& i, const ExperimentVector& j) {
    require_same_length(i.size(), j.size());
    ExperimentVector out(i.size());
    for (std::size_t s = 0; s < i.size(); ++s) out[s] = i[s] & j[s];
    return out;
}

ExperimentVector set_minus(const ExperimentVector& i, const ExperimentVector& j) {
    require_same_length(i.size(), j.size());
    ExperimentVector out(i.size());
    for (std::size_t s = 0; s < i.size(); ++s) out[s] = i[s] & static_cast<std::uint8_t>(j[s] ? 0 : 1);
    return out;
}

bool is_superset(const ExperimentVector& i, const ExperimentVector& j) {
    require_same_length(i.size(), j.size());
    for (std::size_t s = 0; s < i.size(); ++s)
        if (j[s] && !i[s]) return false;
    return true;
}

ExperimentVector from_mask(std::uint32_t mask, int n) {
    ExperimentVector out(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) out[static_cast<std::size_t>(s)] = (mask >> s) & 1u;
    return out;
}

std::uint32_t to_mask(const ExperimentVector& i) {
    std::uint32_t m = 0;
    for (std::size_t s = 0; s < i.size(); ++s)
        if (i[s]) m |= 1u << s;
    return m;
}

double chi(const ExperimentVector& i, const ParamVector& x) {
    require_same_length(i.size(), x.size());
    double p = 1.0;
    for (std::size_t s = 0; s < x.size(); ++s)
        p *= i[s] ? x[s] : 1.0 - x[s];
    return p;
}

double pi_upper(const ExperimentVector& j, const ParamVector& x) {
    require_same_length(j.size(), x.size());
    double p = 1.0;
    for (std::size_t s = 0; s < x.size(); ++s)
        if (j[s]) p *= x[s];
    return p;
}

double psi_weight(const ParamVector& x, int l) {
    int n = static_cast<int>(x.size());
    require(0 <= l && l <= n, "psi_weight: l out of range");
    // Coefficients of prod_s ((1-x_s) + x_s t); coeff of t^l is psi_l.
    std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
    c[0] = 1.0;
    for (int s = 0; s < n; ++s) {
        double xs = x[static_cast<std::size_t>(s)];
        for (int d = s + 1; d >= 1; --d)
            c[static_cast<std::size_t>(d)] = c[static_cast<std::size_t>(d)] * (1.0 - xs) +
                                             c[static_cast<std::size_t>(d) - 1] * xs;
        c[0] *= 1.0 - xs;
    }
    return c[static_cast<std::size_t>(l)];
}

double bernoulli_coeff(int l, int r, double theta) {
    require(0 <= l && l <= r, "bernoulli_coeff: need 0 <= l <= r");
    require(theta >= 0.0 && theta <= 1.0, "bernoulli_coeff: theta must lie in [0,1]");
    double binom = 1.0;
    for (int t = 0; t < l; ++t)
        binom = binom * static_cast<double>(r - t) / static_cast<double>(t + 1);
    // 0^0 = 1 convention for the degenerate endpoints.
    double a = (l == 0) ? 1.0 : std::pow(theta, l);
    double b = (r == l) ? 1.0 : std::pow(1.0 - theta, r - l);
    return binom * a * b;
}

ExperimentVector sample_trial(const ParamVector& x, double k, Rng& rng) {
    validate_degradation(k);
    ExperimentVector i(x.size());
    for (std::size_t s = 0; s < x.size(); ++s)
        i[s] = rng.bernoulli(x[s] / k) ? 1 : 0;
    return i;
}

double v_a(const ParamVector& x, const ExperimentVector& j) {
    require_same_length(j.size(), x.size());
    KahanSum acc;
    for (std::size_t s = 0; s < x.size(); ++s)
        if (j[s]) acc.add(x[s]);
    return acc.value() / static_cast<double>(x.size());
}

double v_b(const ExperimentVector& i, const ParamVector& y) {
    return v_a(y, i);
}

PairMoments pair_moments(const ParamVector& x, const ParamVector& y, double k) {
    require_same_length(x.size(), y.size());
    validate_degradation(k);
    double n = static_cast<double>(x.size());
    KahanSum sxy, sa, sb, sd;
    for (std::size_t r = 0; r < x.size(); ++r) {
        double xr = x[r], yr = y[r];
        sxy.add(xr * yr);
        sa.add(xr * xr * yr * (1.0 - yr / k));
        sb.add(yr * yr * xr * (1.0 - xr / k));
        sd.add(xr * yr * (xr + yr - 2.0 * xr * yr / k));
    }
    double scale = 1.0 / (n * n * k);
    PairMoments pm;
    pm.mean = sxy.value() / (n * k);
    pm.var_a = scale * sa.value();
    pm.var_b = scale * sb.value();
    pm.expected_sq_diff = scale * sd.value();
    return pm;
}

}  // namespace drg
