#include "ergotrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ergotrack::tracker {

double CoefficientPath::operator()(double t) const {
    switch (kind) {
        case Kind::Constant: return v0;
        case Kind::Linear: {
            double s = std::clamp(t / t_span, 0.0, 1.0);
            return v0 + (v1 - v0) * s;
        }
        case Kind::Sinusoid:
            return mean + amp * std::sin(2.0 * M_PI * t / period);
        case Kind::Table: {
            if (times.empty()) return 0.0;
            if (t <= times.front()) return values.front();
            if (t >= times.back()) return values.back();
            auto it = std::upper_bound(times.begin(), times.end(), t);
            size_t i = size_t(it - times.begin()) - 1;
            double w = (t - times[i]) / (times[i + 1] - times[i]);
            return (1.0 - w) * values[i] + w * values[i + 1];
        }
    }
    return 0.0;
}

CoefficientPath CoefficientPath::constant(double v) {
    CoefficientPath p;
    p.kind = Kind::Constant;
    p.v0 = v;
    return p;
}

CoefficientPath CoefficientPath::linear(double v0, double v1, double t_span) {
    CoefficientPath p;
    p.kind = Kind::Linear;
    p.v0 = v0;
    p.v1 = v1;
    p.t_span = t_span;
    return p;
}

CoefficientPath CoefficientPath::sinusoid(double mean, double amp,
                                          double period) {
    CoefficientPath p;
    p.kind = Kind::Sinusoid;
    p.mean = mean;
    p.amp = amp;
    p.period = period;
    return p;
}

ModelParams TrackingProblem::at(double t) const {
    return {a_path(t), r_path(t), l_path(t), k_path(t), h_path(t)};
}

const char* to_string(TrackStrategy s) {
    switch (s) {
        case TrackStrategy::RescaledOptimal: return "rescaled_optimal";
        case TrackStrategy::RescaledDistorted: return "rescaled_distorted";
        case TrackStrategy::NullStrategy: return "null";
    }
    return "?";
}

double beta_from_exponents(const CostExponents& e, ControlClass c) {
    struct Ratio {
        const char* name;
        double value;
    };
    std::vector<Ratio> ratios;
    if (e.beta_Q) ratios.push_back({"beta_Q", *e.beta_Q / (e.zeta_D + e.zeta_Q)});
    if (e.beta_F) {
        ratios.push_back({"beta_F", *e.beta_F / (e.zeta_D + 2.0 - e.zeta_F)});
    }
    if (e.beta_P) {
        ratios.push_back({"beta_P", *e.beta_P / (e.zeta_D + 2.0 - e.zeta_P)});
    }
    auto need = [&](bool present, const char* what) {
        if (!present) {
            throw std::invalid_argument(
                std::string("beta_from_exponents: class requires ") + what);
        }
    };
    switch (c) {
        case ControlClass::Regular: need(bool(e.beta_Q), "beta_Q"); break;
        case ControlClass::Singular: need(bool(e.beta_P), "beta_P"); break;
        case ControlClass::Impulse: need(bool(e.beta_F), "beta_F"); break;
        case ControlClass::CombinedImpulse:
            need(bool(e.beta_Q), "beta_Q");
            need(bool(e.beta_F), "beta_F");
            break;
        case ControlClass::CombinedSingular:
            need(bool(e.beta_Q), "beta_Q");
            need(bool(e.beta_P), "beta_P");
            break;
    }
    double beta = ratios.front().value;
    std::string mismatch;
    for (const Ratio& r : ratios) {
        if (std::abs(r.value - beta) > 1e-12 * std::max(1.0, std::abs(beta))) {
            mismatch += std::string(" ") + r.name + "=" +
                        std::to_string(r.value);
        }
    }
    if (!mismatch.empty()) {
        throw std::invalid_argument(
            "beta_from_exponents: inconsistent ratios (common " +
            std::to_string(beta) + "):" + mismatch);
    }
    if (!(beta > 0.0)) {
        throw std::invalid_argument("beta_from_exponents: beta must be > 0");
    }
    return beta;
}

double lower_bound_integral(const TrackingProblem& tp, int n_times) {
    if (n_times < 3) {
        throw std::invalid_argument("lower_bound_integral: n_times >= 3");
    }
    int n = n_times | 1;
    double dt = tp.T / double(n - 1);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double t = double(i) * dt;
        double cost;
        try {
            cost = localsolve::solve(tp.at(t), tp.cls).cost;
        } catch (const std::exception& e) {
            throw SolveError("lower_bound_integral: t = " + std::to_string(t) +
                             ": " + e.what());
        }
        s += (i == 0 || i == n - 1 ? 1.0 : (i % 2 ? 4.0 : 2.0)) * cost;
    }
    return s * dt / 3.0;
}

namespace {

bool paths_constant(const TrackingProblem& tp) {
    for (const CoefficientPath* cp :
         {&tp.a_path, &tp.b_path, &tp.r_path, &tp.l_path, &tp.k_path,
          &tp.h_path}) {
        if (cp->kind != CoefficientPath::Kind::Constant) return false;
    }
    return true;
}

}  // namespace

TrackResult simulate_tracking(const TrackingProblem& tp, double eps,
                              const simkit::PathConfig& c, TrackStrategy strat,
                              double lambda) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw std::invalid_argument("simulate_tracking: eps in (0, 1)");
    }
    const CostExponents& e = tp.exponents;
    const double beta = beta_from_exponents(e, tp.cls);
    const double eb = std::pow(eps, beta);
    const double e2b = eb * eb;
    const double wQ = e.beta_Q ? std::pow(eps, *e.beta_Q) : 0.0;
    const double wF = e.beta_F ? std::pow(eps, *e.beta_F) : 0.0;
    const double wP = e.beta_P ? std::pow(eps, *e.beta_P) : 0.0;
    const double normalizer = std::pow(eps, beta * e.zeta_D);

    // Policies frozen on the checkpoint grid.
    const int ncp = std::max(2, tp.n_checkpoints);
    const bool constant = paths_constant(tp);
    std::vector<simkit::StrategySpec> policy(ncp);
    if (strat != TrackStrategy::NullStrategy) {
        for (int i = 0; i < ncp; ++i) {
            if (constant && i > 0) {
                policy[i] = policy[0];
                continue;
            }
            double t = tp.T * double(i) / double(ncp - 1);
            simkit::StrategySpec s =
                simkit::optimal_strategy(localsolve::solve(tp.at(t), tp.cls));
            policy[i] = strat == TrackStrategy::RescaledDistorted
                            ? simkit::distort_strategy(s, lambda)
                            : s;
        }
    }
    using K = simkit::StrategySpec::Kind;

    const double dt = e2b * c.dt;
    const long long steps = std::llround(tp.T / dt);
    TrackResult res;
    res.beta = beta;
    double sumJ = 0.0, sumN = 0.0;
    for (int trial = 0; trial < c.n_paths; ++trial) {
        simkit::GaussRng rng(c.seed + std::uint64_t(trial));
        double X = 0.0, J = 0.0;
        for (long long n = 0; n < steps; ++n) {
            double t = double(n) * dt;
            int idx = std::min(ncp - 1, int(t * double(ncp - 1) / tp.T));
            const simkit::StrategySpec& pol = policy[idx];
            double a = tp.a_path(t), b = tp.b_path(t);
            double r = tp.r_path(t), l = tp.l_path(t);
            double k = tp.k_path(t), h = tp.h_path(t);
            double u = 0.0;
            if (strat != TrackStrategy::NullStrategy) {
                u = simkit::feedback_at(pol, X / eb) / eb;
            }
            J += (r * X * X + wQ * l * u * u) * dt;
            X += (b + u) * dt + std::sqrt(a * dt) * rng.gauss();
            if (strat == TrackStrategy::NullStrategy) {
                X = std::clamp(X, -1.0, 1.0);  // free state truncation
                continue;
            }
            switch (pol.kind) {
                case K::ReflectAt:
                case K::CombinedSingular: {
                    double Ue = eb * pol.U;
                    if (X > Ue) {
                        J += wP * h * (X - Ue);
                        X = Ue;
                    } else if (X < -Ue) {
                        J += wP * h * (-Ue - X);
                        X = -Ue;
                    }
                    break;
                }
                case K::ImpulseAt:
                case K::CombinedImpulse: {
                    double trig = eb * (pol.kind == K::ImpulseAt ? pol.trigger
                                                                 : pol.U);
                    double targ =
                        eb * (pol.kind == K::ImpulseAt
                                  ? pol.target
                                  : std::max(0.0, pol.U - pol.xi_star));
                    if (std::abs(X) >= trig) {
                        double x_post = X > 0.0 ? targ : -targ;
                        J += wF * k + wP * h * std::abs(x_post - X);
                        X = x_post;
                    }
                    break;
                }
                default: break;
            }
        }
        sumJ += J;
        double norm = J / normalizer;
        sumN += norm;
        res.per_trial_normalized.push_back(norm);
    }
    res.mean_J = sumJ / double(c.n_paths);
    res.mean_normalized = sumN / double(c.n_paths);
    if (c.n_paths > 1) {
        double ss = 0.0;
        for (double v : res.per_trial_normalized) {
            ss += (v - res.mean_normalized) * (v - res.mean_normalized);
        }
        res.stderr_normalized = std::sqrt(ss / double(c.n_paths - 1) /
                                          double(c.n_paths));
    }
    return res;
}

VerifyReport verify_lower_bound(const TrackingProblem& tp,
                                const std::vector<double>& eps_list,
                                double delta_frac, const simkit::PathConfig& c,
                                const std::vector<TrackStrategy>& strategies,
                                double lambda) {
    if (!(delta_frac > 0.0 && delta_frac < 0.5)) {
        throw std::invalid_argument("verify_lower_bound: delta_frac in (0,.5)");
    }
    VerifyReport rep;
    rep.delta_frac = delta_frac;
    rep.bound = lower_bound_integral(tp, 101);
    double floor_val = rep.bound * (1.0 - delta_frac);
    for (double eps : eps_list) {
        for (TrackStrategy s : strategies) {
            TrackResult r = simulate_tracking(tp, eps, c, s, lambda);
            int pass = 0;
            for (double v : r.per_trial_normalized) {
                if (v >= floor_val) ++pass;
            }
            rep.entries.push_back({eps, s,
                                   double(pass) /
                                       double(r.per_trial_normalized.size()),
                                   r.mean_normalized, r.stderr_normalized,
                                   int(r.per_trial_normalized.size())});
        }
    }
    return rep;
}

}  // namespace ergotrack::tracker
