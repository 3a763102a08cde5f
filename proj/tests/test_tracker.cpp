#include "ergotrack/tracker.hpp"

#include <cmath>
#include <stdexcept>

#include "doctest.h"

using namespace ergotrack;
using tracker::CoefficientPath;
using tracker::CostExponents;
using tracker::TrackingProblem;
using tracker::TrackStrategy;

TEST_CASE("coefficient path kinds evaluate as documented") {
    auto c = CoefficientPath::constant(2.5);
    CHECK(c(0.0) == 2.5);
    CHECK(c(7.0) == 2.5);

    auto lin = CoefficientPath::linear(1.0, 3.0, 2.0);
    CHECK(lin(0.0) == doctest::Approx(1.0));
    CHECK(lin(1.0) == doctest::Approx(2.0));
    CHECK(lin(2.0) == doctest::Approx(3.0));

    auto sine = CoefficientPath::sinusoid(2.0, 0.5, 1.0);
    CHECK(sine(0.0) == doctest::Approx(2.0));
    CHECK(sine(0.25) == doctest::Approx(2.5));
    CHECK(sine(0.5) == doctest::Approx(2.0).epsilon(1e-12));

    CoefficientPath tab;
    tab.kind = CoefficientPath::Kind::Table;
    tab.times = {0.0, 1.0, 3.0};
    tab.values = {1.0, 2.0, 0.0};
    CHECK(tab(0.5) == doctest::Approx(1.5));
    CHECK(tab(2.0) == doctest::Approx(1.0));
    CHECK(tab(5.0) == doctest::Approx(0.0));  // clamped past the last node
}

TEST_CASE("beta exponent algebra") {
    CostExponents e;
    e.zeta_D = 2.0;
    e.zeta_Q = 2.0;
    e.beta_Q = 2.0;
    e.beta_F = 2.0;
    e.beta_P = 1.5;
    // 2/(2+2), 2/(2+2), 1.5/(2+1) all agree at 0.5
    CHECK(tracker::beta_from_exponents(e, ControlClass::CombinedImpulse) ==
          doctest::Approx(0.5).epsilon(1e-12));

    CostExponents imp;
    imp.zeta_D = 2.0;
    imp.beta_F = 4.0;
    CHECK(tracker::beta_from_exponents(imp, ControlClass::Impulse) ==
          doctest::Approx(1.0).epsilon(1e-12));

    CostExponents reg;
    reg.beta_Q = 2.0;
    CHECK(tracker::beta_from_exponents(reg, ControlClass::Regular) ==
          doctest::Approx(0.5).epsilon(1e-12));

    CostExponents bad;
    bad.beta_Q = 2.0;
    bad.beta_F = 1.0;  // 2/4 vs 1/2... pick a genuinely inconsistent pair
    bad.beta_P = 0.3;
    CHECK_THROWS_AS((void)tracker::beta_from_exponents(
                        bad, ControlClass::CombinedImpulse),
                    std::invalid_argument);

    CostExponents missing;
    CHECK_THROWS_AS(
        (void)tracker::beta_from_exponents(missing, ControlClass::Impulse),
        std::invalid_argument);
}

TEST_CASE("lower bound integral of constant coefficients") {
    TrackingProblem tp;
    tp.T = 2.0;
    tp.cls = ControlClass::Regular;
    tp.exponents.beta_Q = 2.0;
    // frozen value is sqrt(a^2 r l) = 1 at every t
    CHECK(tracker::lower_bound_integral(tp, 65) ==
          doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("lower bound integral of a linear diffusion ramp") {
    TrackingProblem tp;
    tp.T = 1.0;
    tp.cls = ControlClass::Regular;
    tp.exponents.beta_Q = 2.0;
    tp.a_path = CoefficientPath::linear(1.0, 4.0, 1.0);
    // integrand is a(t) = 1 + 3t, integral 1 + 3/2
    CHECK(tracker::lower_bound_integral(tp, 129) ==
          doctest::Approx(2.5).epsilon(1e-10));
}

TEST_CASE("lower bound integral converges under refinement") {
    TrackingProblem tp;
    tp.T = 1.0;
    tp.cls = ControlClass::Regular;
    tp.exponents.beta_Q = 2.0;
    tp.r_path = CoefficientPath::sinusoid(1.0, 0.5, 1.0);
    double coarse = tracker::lower_bound_integral(tp, 17);
    double fine = tracker::lower_bound_integral(tp, 257);
    CHECK(coarse == doctest::Approx(fine).epsilon(1e-6));
    // sqrt(r) dips below 1 more than it rises, so the integral sits under T
    CHECK(fine < 1.0);
    CHECK(fine > 0.9);
}

TEST_CASE("tracking cost approaches the bound as epsilon shrinks") {
    TrackingProblem tp;
    tp.T = 20.0;
    tp.cls = ControlClass::Regular;
    tp.exponents.beta_Q = 2.0;
    simkit::PathConfig c;
    c.dt = 1e-3;
    c.n_paths = 16;
    auto res = tracker::simulate_tracking(tp, 0.05, c,
                                          TrackStrategy::RescaledOptimal);
    CHECK(res.beta == doctest::Approx(0.5));
    CHECK(res.mean_normalized ==
          doctest::Approx(tracker::lower_bound_integral(tp, 65)).epsilon(0.1));
    CHECK(res.stderr_normalized > 0.0);
    CHECK(int(res.per_trial_normalized.size()) == 16);
}

TEST_CASE("distorted tracking costs more than rescaled optimal") {
    TrackingProblem tp;
    tp.T = 20.0;
    tp.cls = ControlClass::Regular;
    tp.exponents.beta_Q = 2.0;
    simkit::PathConfig c;
    c.dt = 1e-3;
    c.n_paths = 16;
    auto opt = tracker::simulate_tracking(tp, 0.05, c,
                                          TrackStrategy::RescaledOptimal);
    auto dis = tracker::simulate_tracking(
        tp, 0.05, c, TrackStrategy::RescaledDistorted, 2.0);
    double se = std::hypot(opt.stderr_normalized, dis.stderr_normalized);
    CHECK(dis.mean_normalized > opt.mean_normalized + 2.0 * se);
}

TEST_CASE("verify_lower_bound reports full fractions for honest strategies") {
    TrackingProblem tp;
    tp.T = 20.0;
    tp.cls = ControlClass::Regular;
    tp.exponents.beta_Q = 2.0;
    simkit::PathConfig c;
    c.dt = 1e-3;
    c.n_paths = 24;
    auto rep = tracker::verify_lower_bound(
        tp, {0.05}, 0.05, c,
        {TrackStrategy::RescaledOptimal, TrackStrategy::NullStrategy}, 2.0);
    CHECK(rep.bound ==
          doctest::Approx(tracker::lower_bound_integral(tp, 65)).epsilon(1e-9));
    REQUIRE(rep.entries.size() == 2);
    for (const auto& e : rep.entries) {
        CHECK(e.n_trials == 24);
        // short horizon keeps per-trial noise sizable; the acceptance run
        // checks the sharp fraction at a long horizon
        CHECK(e.fraction >= 0.6);
        // the uncontrolled process blows past the bound entirely
        if (e.strategy == TrackStrategy::NullStrategy) {
            CHECK(e.fraction == doctest::Approx(1.0));
            CHECK(e.mean_normalized > rep.bound);
        }
    }
}

TEST_CASE("tracking problem freezes coefficients pointwise") {
    TrackingProblem tp;
    tp.a_path = CoefficientPath::linear(1.0, 2.0, 1.0);
    tp.r_path = CoefficientPath::constant(3.0);
    ModelParams p = tp.at(0.5);
    CHECK(p.a == doctest::Approx(1.5));
    CHECK(p.r == doctest::Approx(3.0));
    CHECK(p.l == doctest::Approx(1.0));
}
