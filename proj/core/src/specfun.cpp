#include "ergotrack/specfun.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ergotrack::specfun {

namespace {

constexpr double kSeriesSwitch = 50.0;

bool is_nonpositive_integer(double b) {
    return b <= 0.0 && b == std::floor(b);
}

void check_params(const KummerParams& p) {
    if (is_nonpositive_integer(p.b_param)) {
        throw std::domain_error("kummer_1f1: b = " + std::to_string(p.b_param) +
                                " is a non-positive integer");
    }
    if (p.z < 0.0 || !std::isfinite(p.z)) {
        throw std::domain_error("kummer_1f1: z must be finite and >= 0");
    }
}

double series_1f1(double a, double b, double z) {
    double term = 1.0;
    double sum = 1.0;
    int small_streak = 0;
    for (int k = 0; k < 10000; ++k) {
        term *= (a + k) / (b + k) * z / (k + 1);
        sum += term;
        if (std::abs(term) < 1e-16 * std::abs(sum)) {
            if (++small_streak >= 3) break;
        } else {
            small_streak = 0;
        }
        if (!std::isfinite(sum)) {
            throw std::overflow_error("kummer_1f1: series overflow");
        }
    }
    return sum;
}

// Leading terms of the z -> +inf expansion,
//   1F1(a,b,z) ~ Gamma(b)/Gamma(a) e^z z^{a-b} sum_n (b-a)_n (1-a)_n / (n! z^n).
// Valid here for a > 0 (the algebraic z^{-a} branch is exponentially smaller).
double asymptotic_1f1(double a, double b, double z) {
    double log_pref = std::lgamma(b) - std::lgamma(a) + z + (a - b) * std::log(z);
    if (log_pref > 709.0) {
        throw std::overflow_error("kummer_1f1: result exceeds double range");
    }
    double term = 1.0, sum = 1.0, prev = 1.0;
    for (int n = 0; n < 30; ++n) {
        term *= (b - a + n) * (1.0 - a + n) / ((n + 1) * z);
        if (std::abs(term) > std::abs(prev)) break;  // divergent tail
        sum += term;
        prev = term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return std::exp(log_pref) * sum;
}

}  // namespace

double kummer_1f1(const KummerParams& p) {
    check_params(p);
    if (p.z == 0.0) return 1.0;
    if (p.z > kSeriesSwitch && p.a_param > 0.0) {
        return asymptotic_1f1(p.a_param, p.b_param, p.z);
    }
    return series_1f1(p.a_param, p.b_param, p.z);
}

double kummer_1f1_dz(const KummerParams& p) {
    check_params(p);
    return p.a_param / p.b_param *
           kummer_1f1({p.a_param + 1.0, p.b_param + 1.0, p.z});
}

double kummer_1f1_da(const KummerParams& p) {
    check_params(p);
    const double a = p.a_param, b = p.b_param, z = p.z;
    double term = 1.0;      // (a)_k/(b)_k z^k/k!
    double harmonic = 0.0;  // sum_{q<k} 1/(q+a)
    double sum = 0.0;       // k = 0 contributes 0
    for (int k = 0; k < 10000; ++k) {
        harmonic += 1.0 / (a + k);
        term *= (a + k) / (b + k) * z / (k + 1);
        double contrib = term * harmonic;
        sum += contrib;
        if (std::abs(contrib) < 1e-17 * (std::abs(sum) + 1.0) && k > 4) break;
    }
    return sum;
}

double weber_even(double x, double theta) {
    double z = 0.5 * x * x;
    return std::exp(-0.25 * x * x) * kummer_1f1({0.5 * theta + 0.25, 0.5, z});
}

}  // namespace ergotrack::specfun
