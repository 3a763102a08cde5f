#include "ergotrack/localsolve.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"

using namespace ergotrack;
using namespace ergotrack::localsolve;

namespace {

// Residuals of the four impulse system equations for a returned solution,
// with P(x) = theta2 x^2 + theta1 x^4.
std::vector<double> impulse_system_residuals(const LocalSolution& s) {
    const ModelParams& p = s.params;
    double t1 = *s.theta1, t2 = *s.theta2;
    double xs = *s.U, xt = *s.x_tilde;
    auto P = [&](double x) { return t2 * x * x + t1 * x * x * x * x; };
    auto Pp = [&](double x) { return 2.0 * t2 * x + 4.0 * t1 * x * x * x; };
    return {6.0 * p.a * t1 + p.r,
            P(xs) - P(xt) - p.k - p.h * (xs - xt),
            Pp(xs) - p.h,
            Pp(xt) - p.h};
}

// One-sided 5-point first derivative on a uniform grid, 4th order.
double deriv5_forward(const std::vector<double>& v, size_t i0, double dx) {
    return (-25.0 * v[i0] + 48.0 * v[i0 + 1] - 36.0 * v[i0 + 2] +
            16.0 * v[i0 + 3] - 3.0 * v[i0 + 4]) /
           (12.0 * dx);
}

double deriv5_backward(const std::vector<double>& v, size_t iN, double dx) {
    return (25.0 * v[iN] - 48.0 * v[iN - 1] + 36.0 * v[iN - 2] -
            16.0 * v[iN - 3] + 3.0 * v[iN - 4]) /
           (12.0 * dx);
}

}  // namespace

TEST_CASE("regular closed form") {
    auto s = solve_regular({1, 1, 1, 0, 0});
    CHECK(s.cost == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(s.density.sigma2 == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(s.feedback(0.7) == doctest::Approx(-0.7).epsilon(1e-13));

    auto s2 = solve_regular({2, 3, 12, 0, 0});
    CHECK(s2.cost == doctest::Approx(12.0).epsilon(1e-13));
    CHECK(s2.density.sigma2 == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(s2.feedback(1.0) == doctest::Approx(-0.5).epsilon(1e-13));

    // stationary-cost identity r sigma^2 + l theta^2 sigma^2 = I
    for (const auto& sol : {s, s2}) {
        double theta = std::sqrt(sol.params.r / sol.params.l);
        double v = sol.density.sigma2;
        CHECK(sol.params.r * v + sol.params.l * theta * theta * v ==
              doctest::Approx(sol.cost).epsilon(1e-12));
    }
}

TEST_CASE("singular closed form and atoms") {
    auto s = solve_singular({1, 1, 0, 0, 4.0 / 3.0});
    CHECK(*s.U == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(s.cost == doctest::Approx(1.0).epsilon(1e-13));
    REQUIRE(s.boundary_measure.size() == 2);
    for (const auto& atom : s.boundary_measure) {
        CHECK(atom.mass == doctest::Approx(0.25).epsilon(1e-13));
        CHECK(std::abs(atom.location) == doctest::Approx(1.0).epsilon(1e-13));
        // pushes point inward
        CHECK(atom.jump * atom.location < 0.0);
    }

    auto s2 = solve_singular({1, 1, 0, 0, 1});
    CHECK(*s2.U ==
          doctest::Approx(std::cbrt(0.75)).epsilon(1e-11));
    CHECK(s2.cost ==
          doctest::Approx(std::pow(0.75, 2.0 / 3.0)).epsilon(1e-11));

    // degree-1 homogeneity in the weights
    auto base = solve_singular({1, 1, 0, 0, 1});
    auto scaled = solve_singular({1, 7, 0, 0, 7});
    CHECK(scaled.cost == doctest::Approx(7.0 * base.cost).epsilon(1e-12));
}

TEST_CASE("impulse system at h = 0") {
    auto s = solve_impulse({1, 1, 0, 1, 0});
    double t2_ref = std::sqrt(2.0 / 3.0);
    CHECK(*s.theta2 == doctest::Approx(t2_ref).epsilon(1e-9));
    CHECK(*s.x_tilde == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(*s.U == doctest::Approx(std::sqrt(3.0 * t2_ref)).epsilon(1e-9));
    CHECK(s.cost == doctest::Approx(t2_ref).epsilon(1e-9));
    for (double r : impulse_system_residuals(s)) CHECK(std::abs(r) < 1e-10);
}

TEST_CASE("impulse system with proportional cost") {
    auto s = solve_impulse({1, 2, 0, 0.5, 0.3});
    CHECK(*s.x_tilde > 0.0);
    CHECK(*s.x_tilde < *s.U);
    for (double r : impulse_system_residuals(s)) CHECK(std::abs(r) < 1e-9);
    CHECK(s.density.integral() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("impulse trapezoid density and atoms") {
    auto s = solve_impulse({1, 1, 0, 1, 0});
    double xs = *s.U, xt = *s.x_tilde;
    CHECK(s.density(0.0) ==
          doctest::Approx(1.0 / (xs + xt)).epsilon(1e-12));
    CHECK(s.density(xs * 1.01) == 0.0);
    double mass_ref = 0.5 * s.params.a / (xs * xs - xt * xt);
    REQUIRE(s.boundary_measure.size() == 2);
    for (const auto& atom : s.boundary_measure) {
        CHECK(atom.mass == doctest::Approx(mass_ref).epsilon(1e-10));
        CHECK(std::abs(atom.jump) ==
              doctest::Approx(xs - xt).epsilon(1e-10));
    }
}

TEST_CASE("g function limits and monotonicity") {
    CHECK(g_function(0.0, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g_function(200.0, 0.5) == doctest::Approx(4.0).epsilon(0.01));
    CHECK(g_function(1.0, 0.3) < g_function(2.0, 0.3));
    // derivative consistency
    double eps = 1e-6;
    double fd = (g_function(1.5 + eps, 0.3) - g_function(1.5 - eps, 0.3)) /
                (2.0 * eps);
    CHECK(g_function_dz(1.5, 0.3) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("find_iota frozen references") {
    ModelParams ci{1, 1, 1, 1, 0};
    auto r = find_iota(ci, ControlClass::CombinedImpulse);
    CHECK(r.iota == doctest::Approx(0.710722100538).epsilon(1e-9));
    CHECK(r.U == doctest::Approx(1.581473763403).epsilon(1e-9));
    CHECK(r.xi_star == doctest::Approx(r.U).epsilon(1e-9));  // h = 0 jumps to 0

    ModelParams cs{1, 1, 1, 0, 0.5};
    auto rs = find_iota(cs, ControlClass::CombinedSingular);
    CHECK(rs.iota == doctest::Approx(0.490659740185).epsilon(1e-9));
    CHECK(rs.U == doctest::Approx(0.743747094236).epsilon(1e-9));
    CHECK(rs.xi_star == 0.0);

    ModelParams ci2{1, 2, 0.5, 0.3, 0.1};
    auto r2 = find_iota(ci2, ControlClass::CombinedImpulse);
    CHECK(r2.iota == doctest::Approx(0.653550959543).epsilon(1e-9));
    CHECK(r2.U == doctest::Approx(1.021552058471).epsilon(1e-9));
    CHECK(r2.xi_star == doctest::Approx(0.944781711430).epsilon(1e-9));
}

TEST_CASE("find_iota conditions and monotone dependence on k") {
    ModelParams p{1, 1, 1, 1, 0};
    auto r = find_iota(p, ControlClass::CombinedImpulse);
    CHECK(r.iota > 0.0);
    CHECK(r.iota < 1.0);
    CHECK(std::abs(h_function(r.U, r.iota, p) - p.h) < 1e-8);
    CHECK(std::abs(h_function(r.U - r.xi_star, r.iota, p) - p.h) < 1e-8);

    ModelParams p2{1, 1, 1, 2, 0};
    auto r2 = find_iota(p2, ControlClass::CombinedImpulse);
    CHECK(r2.iota == doctest::Approx(0.877973343027).epsilon(1e-9));
    CHECK(r2.iota > r.iota);

    ModelParams cs{1, 1, 1, 0, 0.5};
    auto rs = find_iota(cs, ControlClass::CombinedSingular);
    CHECK(std::abs(h_function(rs.U, rs.iota, cs) - cs.h) < 1e-9);
    CHECK(std::abs(h_function_dx(rs.U, rs.iota, cs)) < 1e-7);
}

TEST_CASE("combined value function shape") {
    auto s = solve_combined_impulse({1, 1, 1, 1, 0});
    CHECK(s.cost == doctest::Approx(*s.iota).epsilon(1e-12));  // a sqrt(rl)=1
    CHECK(s.cost < 1.0);
    CHECK(value_function_eval(s, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
    double U = *s.U;
    for (double f : {0.3, 0.8, 1.5}) {
        CHECK(value_function_eval(s, f * U) ==
              doctest::Approx(value_function_eval(s, -f * U)).epsilon(1e-12));
    }
    // C1 continuity across U
    double d = 1e-6;
    double left = (value_function_eval(s, U) - value_function_eval(s, U - d)) / d;
    double right =
        (value_function_eval(s, U + d) - value_function_eval(s, U)) / d;
    CHECK(std::abs(left - right) < 1e-4);  // finite-difference floor
    CHECK(std::abs(h_function(U, *s.iota, s.params) - s.params.h) < 1e-8);
}

TEST_CASE("hjb residuals for the combined classes") {
    for (auto [p, cls] :
         {std::pair{ModelParams{1, 1, 1, 1, 0}, ControlClass::CombinedImpulse},
          {ModelParams{1, 1, 1, 0, 0.5}, ControlClass::CombinedSingular}}) {
        auto s = solve(p, cls);
        double U = *s.U;
        std::vector<double> xs;
        for (int i = 1; i < 100; ++i) xs.push_back(-U + 2.0 * U * i / 100.0);
        auto res = hjb_residual(s, xs);
        REQUIRE(res.size() == xs.size() + 2);
        for (double r : res) CHECK(std::abs(r) < 1e-8);
    }
}

TEST_CASE("pure-regular quartic identity degenerates to zero") {
    // w(x) = sqrt(rl) x^2 satisfies a/2 w'' - (w')^2/(4l) + r x^2 = sqrt(a^2 rl)
    double a = 1, r = 1, l = 1;
    for (double x : {0.0, 1.0, 2.0}) {
        double wpp = 2.0 * std::sqrt(r * l);
        double wp = 2.0 * std::sqrt(r * l) * x;
        double lhs = 0.5 * a * wpp - wp * wp / (4.0 * l) + r * x * x;
        CHECK(lhs == doctest::Approx(std::sqrt(a * a * r * l)).epsilon(1e-14));
    }
}

TEST_CASE("combined stationary densities") {
    auto ci = solve_combined_impulse({1, 1, 1, 1, 0});
    CHECK(ci.density.integral() == doctest::Approx(1.0).epsilon(1e-10));
    double U = *ci.U;
    CHECK(ci.density(U) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ci.density(-U) == doctest::Approx(0.0).epsilon(1e-12));
    for (double x : {0.2, 0.6, 1.2}) {
        CHECK(ci.density(x) == doctest::Approx(ci.density(-x)).epsilon(1e-10));
    }
    REQUIRE(ci.boundary_measure.size() == 2);
    CHECK(ci.boundary_measure[0].mass ==
          doctest::Approx(0.128581569536).epsilon(1e-6));

    auto cs = solve_combined_singular({1, 1, 1, 0, 0.5});
    CHECK(cs.density.integral() == doctest::Approx(1.0).epsilon(1e-10));
    REQUIRE(cs.boundary_measure.size() == 2);
    CHECK(cs.boundary_measure[0].mass ==
          doctest::Approx(0.289287).epsilon(1e-4));
}

TEST_CASE("combined singular Robin boundary residual") {
    auto s = solve_combined_singular({1, 1, 1, 0, 0.5});
    const auto& g = s.density.grid;
    const auto& v = s.density.values;
    REQUIRE(g.size() >= 5);
    double dx = g[1] - g[0];
    double a = s.params.a;
    double lo = 0.5 * a * deriv5_forward(v, 0, dx) -
                s.feedback(g.front()) * v.front();
    double hi = 0.5 * a * deriv5_backward(v, v.size() - 1, dx) -
                s.feedback(g.back()) * v.back();
    CHECK(std::abs(lo) < 1e-8);
    CHECK(std::abs(hi) < 1e-8);
}

TEST_CASE("jump condition of the combined impulse value function") {
    auto s = solve_combined_impulse({1, 1, 1, 1, 0});
    double U = *s.U, xi = *s.xi_star;
    double res = value_function_eval(s, U - xi) + s.params.k +
                 s.params.h * xi - value_function_eval(s, U);
    CHECK(std::abs(res) < 1e-8);
}

TEST_CASE("large proportional cost approaches the unconstrained regular value") {
    // cost is increasing in h and capped by the pure-regular value 1; by
    // h = 6 the reflection barrier is already irrelevant
    double prev = 0.0;
    for (double h : {1.0, 2.0, 4.0, 6.0}) {
        auto s = solve_combined_singular({1, 1, 1, 0, h});
        CHECK(s.cost > prev);
        CHECK(s.cost < 1.0 + 1e-12);
        prev = s.cost;
    }
    CHECK(prev == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(solve_regular({1, 1, 0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(solve_singular({1, 1, 0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(solve_impulse({1, 1, 0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(solve_combined_impulse({1, 1, 1, 0, 0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(solve_regular({-1, 1, 1, 0, 0}), std::invalid_argument);
}

TEST_CASE("class names round-trip") {
    for (auto c : {ControlClass::Regular, ControlClass::Singular,
                   ControlClass::Impulse, ControlClass::CombinedImpulse,
                   ControlClass::CombinedSingular}) {
        auto back = control_class_from_string(to_string(c));
        REQUIRE(back.has_value());
        CHECK(*back == c);
    }
    CHECK(!control_class_from_string("nonsense").has_value());
}

TEST_CASE("homogeneity and threshold invariance across random draws") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        double a = u(rng), r = u(rng), l = u(rng), k = u(rng), h = u(rng);
        double lam = 1.0 + u(rng);
        {
            auto base = solve_regular({a, r, l, 0, 0});
            auto sc = solve_regular({a, lam * r, lam * l, 0, 0});
            CHECK(sc.cost == doctest::Approx(lam * base.cost).epsilon(1e-9));
            CHECK(sc.density.sigma2 ==
                  doctest::Approx(base.density.sigma2).epsilon(1e-9));
        }
        {
            auto base = solve_impulse({a, r, 0, k, h});
            auto sc = solve_impulse({a, lam * r, 0, lam * k, lam * h});
            CHECK(sc.cost == doctest::Approx(lam * base.cost).epsilon(1e-8));
            CHECK(*sc.U == doctest::Approx(*base.U).epsilon(1e-7));
        }
    }
}
