#ifndef ERGOTRACK_TRACKER_HPP
#define ERGOTRACK_TRACKER_HPP

#include <optional>
#include <string>
#include <vector>

#include "ergotrack/localsolve.hpp"
#include "ergotrack/simkit.hpp"

// Global tracking problem: epsilon-scaled costs over time-varying
// coefficients, the beta exponent algebra, the lower-bound integral of
// frozen-coefficient values, and its Monte Carlo verification.

namespace ergotrack::tracker {

struct CostExponents {
    double zeta_D = 2.0;
    double zeta_Q = 2.0;
    double zeta_F = 0.0;  // fixed by the framework
    double zeta_P = 1.0;  // fixed by the framework
    std::optional<double> beta_Q, beta_F, beta_P;
};

struct CoefficientPath {
    enum class Kind { Constant, Linear, Sinusoid, Table };
    Kind kind = Kind::Constant;
    double v0 = 1.0, v1 = 1.0;  // Constant uses v0; Linear v0 -> v1 over t_span
    double t_span = 1.0;
    double mean = 1.0, amp = 0.0, period = 1.0;  // Sinusoid
    std::vector<double> times, values;        // Table, piecewise linear

    double operator()(double t) const;
    static CoefficientPath constant(double v);
    static CoefficientPath linear(double v0, double v1, double t_span = 1.0);
    static CoefficientPath sinusoid(double mean, double amp, double period);
};

struct TrackingProblem {
    double T = 1.0;
    CoefficientPath a_path = CoefficientPath::constant(1.0);
    CoefficientPath b_path = CoefficientPath::constant(0.0);
    CoefficientPath r_path = CoefficientPath::constant(1.0);
    CoefficientPath l_path = CoefficientPath::constant(1.0);
    CoefficientPath k_path = CoefficientPath::constant(0.0);
    CoefficientPath h_path = CoefficientPath::constant(0.0);
    CostExponents exponents;
    ControlClass cls = ControlClass::Regular;
    int n_checkpoints = 33;  // policy-freezing grid

    ModelParams at(double t) const;
};

// Common beta of eq "order beta" with alpha = 2; throws std::invalid_argument
// if the applicable ratios disagree beyond 1e-12 relative or the class's
// required beta components are missing.
double beta_from_exponents(const CostExponents& e, ControlClass c);

// Composite Simpson of t -> frozen-coefficient optimal cost I_t over [0, T].
double lower_bound_integral(const TrackingProblem& tp, int n_times);

enum class TrackStrategy { RescaledOptimal, RescaledDistorted, NullStrategy };
const char* to_string(TrackStrategy s);

struct TrackResult {
    double mean_J = 0.0;
    double mean_normalized = 0.0;   // J / eps^{beta zeta_D}
    double stderr_normalized = 0.0;
    std::vector<double> per_trial_normalized;
    double beta = 0.0;
};

// One batch of trials at fixed epsilon; c.n_paths counts trials, c.dt is the
// base step dt0 (effective step eps^{2 beta} dt0).
TrackResult simulate_tracking(const TrackingProblem& tp, double eps,
                              const simkit::PathConfig& c, TrackStrategy s,
                              double lambda = 1.0);

struct VerifyEntry {
    double eps;
    TrackStrategy strategy;
    double fraction;  // trials with normalized >= bound (1 - delta_frac)
    double mean_normalized;
    double stderr_normalized;
    int n_trials;
};

struct VerifyReport {
    double bound = 0.0;
    double delta_frac = 0.0;
    std::vector<VerifyEntry> entries;
};

VerifyReport verify_lower_bound(const TrackingProblem& tp,
                                const std::vector<double>& eps_list,
                                double delta_frac, const simkit::PathConfig& c,
                                const std::vector<TrackStrategy>& strategies,
                                double lambda = 2.0);

}  // namespace ergotrack::tracker

#endif
