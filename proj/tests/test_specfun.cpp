#include "ergotrack/specfun.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"

using ergotrack::specfun::KummerParams;
using ergotrack::specfun::kummer_1f1;
using ergotrack::specfun::kummer_1f1_da;
using ergotrack::specfun::kummer_1f1_dz;
using ergotrack::specfun::weber_even;

namespace {

// Direct series summation, independent of the library implementation.
double series_1f1(double a, double b, double z, int max_terms = 2000) {
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < max_terms; ++k) {
        term *= (a + k) * z / ((b + k) * (k + 1.0));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

// Integral representation for b > a > 0, with t = s^2 to soften the t^{a-1}
// endpoint, evaluated by 96-point Gauss-Legendre.
double quad_1f1(double a, double b, double z) {
    static const int n = 96;
    static std::vector<double> nodes, weights;
    if (nodes.empty()) {
        for (int i = 0; i < n; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int j = 2; j <= n; ++j) {
                    double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                double dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (x * p1 - p0) / (x * x - 1.0);
            nodes.push_back(x);
            weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
        }
    }
    double integral = 0.0;
    for (int i = 0; i < n; ++i) {
        double s = 0.5 * (nodes[i] + 1.0);  // map [-1,1] -> [0,1]
        double w = 0.5 * weights[i];
        integral += w * 2.0 * std::exp(z * s * s) *
                    std::pow(s, 2.0 * a - 1.0) *
                    std::pow(1.0 - s * s, b - a - 1.0);
    }
    double lg = std::lgamma(b) - std::lgamma(a) - std::lgamma(b - a);
    return std::exp(lg) * integral;
}

}  // namespace

TEST_CASE("kummer value at z = 0 is 1") {
    CHECK(kummer_1f1({0.3, 0.5, 0.0}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(kummer_1f1({-0.7, 1.5, 0.0}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("kummer reduces to exp when a equals b") {
    for (double z : {0.1, 1.0, 7.5, 30.0}) {
        CHECK(kummer_1f1({1.0, 1.0, z}) ==
              doctest::Approx(std::exp(z)).epsilon(1e-12));
    }
}

TEST_CASE("kummer recurrence residual below 1e-9 relative") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ua(-1.0, 1.0), uz(0.0, 30.0);
    for (int trial = 0; trial < 200; ++trial) {
        double a = ua(rng);
        double b = trial % 2 == 0 ? 0.5 : 1.5;
        double z = uz(rng);
        double f0 = kummer_1f1({a, b, z});
        double f1 = kummer_1f1({a + 1.0, b + 1.0, z});
        double f2 = kummer_1f1({a + 2.0, b + 2.0, z});
        double res = (a + 1.0) * z * f2 + (b + 1.0) * (b - z) * f1 -
                     b * (b + 1.0) * f0;
        CHECK(std::abs(res) <= 1e-9 * std::max(1.0, std::abs(f0)));
    }
}

TEST_CASE("kummer matches the integral representation for b > a > 0") {
    // pairs chosen so (1 - s^2)^{b-a-1} stays smooth at the endpoint and
    // Gauss-Legendre converges to full precision
    for (auto [a, b] : {std::pair{0.5, 1.5}, {1.0, 3.0}, {1.5, 3.5}}) {
        for (double z : {0.5, 3.0, 10.0}) {
            double lib = kummer_1f1({a, b, z});
            double ref = quad_1f1(a, b, z);
            CHECK(std::abs(lib - ref) <= 1e-9 * std::abs(ref));
        }
    }
}

TEST_CASE("kummer large-z values match direct series to 1e-6 relative") {
    for (double z : {60.0, 80.0}) {
        for (double a : {0.07, 0.2}) {
            double lib = kummer_1f1({a, 0.5, z});
            double ref = series_1f1(a, 0.5, z);
            CHECK(std::abs(lib - ref) <= 1e-6 * std::abs(ref));
        }
    }
}

TEST_CASE("kummer z-derivative matches central differences") {
    for (double z : {0.5, 4.0, 20.0}) {
        double d = kummer_1f1_dz({0.3, 0.5, z});
        double eps = 1e-6 * std::max(1.0, z);
        double fd = (kummer_1f1({0.3, 0.5, z + eps}) -
                     kummer_1f1({0.3, 0.5, z - eps})) /
                    (2.0 * eps);
        CHECK(d == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("kummer a-derivative matches central differences") {
    for (double z : {0.5, 4.0, 20.0}) {
        double d = kummer_1f1_da({0.3, 0.5, z});
        double eps = 1e-7;
        double fd = (kummer_1f1({0.3 + eps, 0.5, z}) -
                     kummer_1f1({0.3 - eps, 0.5, z})) /
                    (2.0 * eps);
        CHECK(d == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("kummer rejects non-positive-integer b poles and negative z") {
    CHECK_THROWS_AS((void)kummer_1f1({0.5, 0.0, 1.0}), std::domain_error);
    CHECK_THROWS_AS((void)kummer_1f1({0.5, -2.0, 1.0}), std::domain_error);
    CHECK_THROWS_AS((void)kummer_1f1({0.5, 0.5, -1.0}), std::domain_error);
}

TEST_CASE("weber even solution at x = 0 is 1") {
    for (double theta : {-0.4, -0.25, 0.1, 1.0}) {
        CHECK(weber_even(0.0, theta) == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("weber even symmetry") {
    for (double x : {0.5, 1.3, 2.0}) {
        CHECK(weber_even(-x, -0.25) ==
              doctest::Approx(weber_even(x, -0.25)).epsilon(1e-14));
    }
}

TEST_CASE("weber ODE residual below 1e-8 with 4th-order differences") {
    const double d = 1e-3;
    for (double theta : {-0.25, -0.1, 0.3}) {
        for (double x : {0.4, 1.0, 1.8}) {
            double wm2 = weber_even(x - 2.0 * d, theta);
            double wm1 = weber_even(x - d, theta);
            double w0 = weber_even(x, theta);
            double wp1 = weber_even(x + d, theta);
            double wp2 = weber_even(x + 2.0 * d, theta);
            double wpp = (-wm2 + 16.0 * wm1 - 30.0 * w0 + 16.0 * wp1 - wp2) /
                         (12.0 * d * d);
            double res = wpp - (x * x / 4.0 + theta) * w0;
            CHECK(std::abs(res) < 1e-8);
        }
    }
}
