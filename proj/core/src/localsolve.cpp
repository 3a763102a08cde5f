#include "ergotrack/localsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ergotrack/specfun.hpp"

namespace ergotrack {

const char* to_string(ControlClass c) {
    switch (c) {
        case ControlClass::Regular: return "regular";
        case ControlClass::Singular: return "singular";
        case ControlClass::Impulse: return "impulse";
        case ControlClass::CombinedImpulse: return "combined_impulse";
        case ControlClass::CombinedSingular: return "combined_singular";
    }
    return "?";
}

std::optional<ControlClass> control_class_from_string(const std::string& s) {
    for (ControlClass c : {ControlClass::Regular, ControlClass::Singular,
                           ControlClass::Impulse, ControlClass::CombinedImpulse,
                           ControlClass::CombinedSingular}) {
        if (s == to_string(c)) return c;
    }
    return std::nullopt;
}

void validate_params(const ModelParams& p, ControlClass c) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("ModelParams: ") + what);
    };
    require(std::isfinite(p.a) && p.a > 0.0, "a must be > 0");
    require(std::isfinite(p.r) && p.r > 0.0, "r must be > 0");
    require(std::isfinite(p.l) && p.l >= 0.0, "l must be >= 0");
    require(std::isfinite(p.k) && p.k >= 0.0, "k must be >= 0");
    require(std::isfinite(p.h) && p.h >= 0.0, "h must be >= 0");
    switch (c) {
        case ControlClass::Regular:
            require(p.l > 0.0, "regular class requires l > 0");
            break;
        case ControlClass::Singular:
            require(p.h > 0.0, "singular class requires h > 0");
            break;
        case ControlClass::Impulse:
            require(p.k > 0.0, "impulse class requires k > 0");
            break;
        case ControlClass::CombinedImpulse:
            require(p.l > 0.0, "combined impulse class requires l > 0");
            require(p.k > 0.0, "combined impulse class requires k > 0");
            break;
        case ControlClass::CombinedSingular:
            require(p.l > 0.0, "combined singular class requires l > 0");
            require(p.h > 0.0, "combined singular class requires h > 0");
            break;
    }
}

double DensityProfile::operator()(double x) const {
    switch (kind) {
        case Kind::Gaussian: {
            return std::exp(-0.5 * x * x / sigma2) /
                   std::sqrt(2.0 * M_PI * sigma2);
        }
        case Kind::Uniform:
            return (x >= lo && x <= hi) ? 1.0 / (hi - lo) : 0.0;
        case Kind::Trapezoid: {
            double ax = std::abs(x);
            if (ax >= x_star) return 0.0;
            double plateau = 1.0 / (x_star + x_tilde);
            if (ax <= x_tilde) return plateau;
            return plateau * (x_star - ax) / (x_star - x_tilde);
        }
        case Kind::Tabulated: {
            if (x < lo || x > hi || grid.size() < 2) return 0.0;
            double dx = (hi - lo) / double(grid.size() - 1);
            double s = (x - lo) / dx;
            auto i = std::min(grid.size() - 2, size_t(s));
            double w = s - double(i);
            return (1.0 - w) * values[i] + w * values[i + 1];
        }
    }
    return 0.0;
}

double DensityProfile::integral() const {
    if (kind != Kind::Tabulated) return 1.0;
    size_t n = values.size();
    if (n < 3 || n % 2 == 0) return 0.0;
    double dx = (hi - lo) / double(n - 1);
    double s = values.front() + values.back();
    for (size_t i = 1; i + 1 < n; ++i) s += (i % 2 ? 4.0 : 2.0) * values[i];
    return s * dx / 3.0;
}

namespace localsolve {
namespace {

// Bracketed bisection; f(lo) and f(hi) must have opposite signs.
template <typename F>
double bisect(F&& f, double lo, double hi, const char* what) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw SolveError(std::string("bisect: no sign change for ") + what +
                         " on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "], f = (" + std::to_string(flo) +
                         ", " + std::to_string(fhi) + ")");
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (fhi > 0.0)) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
        }
        if (hi - lo < 1e-12 * (1.0 + std::abs(hi)) && it > 40) break;
    }
    return 0.5 * (lo + hi);
}

template <typename F>
double simpson(F&& f, double lo, double hi, int n_nodes) {
    int n = n_nodes | 1;  // odd node count
    double dx = (hi - lo) / double(n - 1);
    double s = f(lo) + f(hi);
    for (int i = 1; i + 1 < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * dx);
    return s * dx / 3.0;
}

double alpha2_of(const ModelParams& p) {
    return 0.5 * p.a * std::sqrt(p.l / p.r);
}

// Scale-free value function: w(x) = sqrt(rl) x^2 - 2 a l ln 1F1(b, 1/2, z),
// z = x^2 / (2 alpha^2), b = (1 - iota)/4.
double w_inside(double x, double iota, const ModelParams& p) {
    double z = x * x / (2.0 * alpha2_of(p));
    double f = specfun::kummer_1f1({0.25 * (1.0 - iota), 0.5, z});
    return std::sqrt(p.r * p.l) * x * x - 2.0 * p.a * p.l * std::log(f);
}

// exp(E(x)) with E = -w/(a l); equals the squared even Weber solution at
// theta = -iota/2, which avoids the log/exp round trip.
double exp_E(double x, double iota, const ModelParams& p) {
    double w = specfun::weber_even(x / std::sqrt(alpha2_of(p)), -0.5 * iota);
    return w * w;
}

struct HMax {
    double x_bar;   // first zero of h
    double x_max;   // argmax of h on [0, x_bar]
    double h_max;
};

HMax h_profile(double iota, const ModelParams& p) {
    double xb = h_first_zero(iota, p);
    double xm = bisect(
        [&](double x) { return h_function_dx(x, iota, p); }, 1e-14 * xb, xb,
        "h'(x) = 0");
    return {xb, xm, h_function(xm, iota, p)};
}

struct Crossings {
    double x_lo, x_hi;
};

// Solutions of h(x; iota) = hcost on either side of the max. Requires
// h_max > hcost; for hcost = 0 the crossings are 0 and x_bar.
Crossings h_crossings(const HMax& m, double iota, double hcost,
                      const ModelParams& p) {
    if (hcost == 0.0) return {0.0, m.x_bar};
    auto f = [&](double x) { return h_function(x, iota, p) - hcost; };
    double xlo = bisect(f, 1e-14 * m.x_max, m.x_max, "h = hcost (left)");
    double xhi = bisect(f, m.x_max, m.x_bar, "h = hcost (right)");
    return {xlo, xhi};
}

// K(iota) = int_{x_lo}^{x_hi} h - hcost (x_hi - x_lo); strictly increasing
// in iota, the outer bisection target for the k > 0 branch.
double K_of(double iota, double hcost, const ModelParams& p) {
    HMax m = h_profile(iota, p);
    if (m.h_max <= hcost) return -p.k - 1.0;
    Crossings c = h_crossings(m, iota, hcost, p);
    double val = simpson([&](double x) { return h_function(x, iota, p); },
                         c.x_lo, c.x_hi, 2001);
    return val - hcost * (c.x_hi - c.x_lo);
}

DensityProfile tabulate_density(double U, size_t n,
                                const std::function<double(double)>& q) {
    DensityProfile d;
    d.kind = DensityProfile::Kind::Tabulated;
    d.lo = -U;
    d.hi = U;
    d.grid.resize(n);
    d.values.resize(n);
    double dx = 2.0 * U / double(n - 1);
    size_t half = n / 2;
    for (size_t i = 0; i < n; ++i) {
        d.grid[i] = -U + double(i) * dx;
        if (i < half) continue;
        d.values[i] = std::max(0.0, q(d.grid[i]));
    }
    for (size_t i = 0; i < half; ++i) d.values[i] = d.values[n - 1 - i];
    double z = d.integral();
    for (auto& v : d.values) v /= z;
    return d;
}

std::function<double(double)> make_feedback(double iota, double U,
                                            const ModelParams& p) {
    return [iota, U, p](double x) {
        double ax = std::min(std::abs(x), U);
        double u = -h_function(ax, iota, p) / (2.0 * p.l);
        return x >= 0.0 ? u : -u;
    };
}

}  // namespace

double g_function(double z, double iota) {
    double b = 0.25 * (1.0 - iota);
    return specfun::kummer_1f1({b + 1.0, 1.5, z}) /
           specfun::kummer_1f1({b, 0.5, z});
}

double g_function_dz(double z, double iota) {
    double b = 0.25 * (1.0 - iota);
    double num = specfun::kummer_1f1({b + 1.0, 1.5, z});
    double den = specfun::kummer_1f1({b, 0.5, z});
    double dnum = specfun::kummer_1f1_dz({b + 1.0, 1.5, z});
    double dden = specfun::kummer_1f1_dz({b, 0.5, z});
    return (dnum * den - num * dden) / (den * den);
}

double h_function(double x, double iota, const ModelParams& p) {
    double z = x * x / (2.0 * alpha2_of(p));
    return 2.0 * std::sqrt(p.r * p.l) *
           (1.0 - (1.0 - iota) * g_function(z, iota)) * x;
}

double h_function_dx(double x, double iota, const ModelParams& p) {
    double z = x * x / (2.0 * alpha2_of(p));
    double g = g_function(z, iota);
    double gp = g_function_dz(z, iota);
    return 2.0 * std::sqrt(p.r * p.l) *
           (1.0 - (1.0 - iota) * (g + 2.0 * z * gp));
}

double h_first_zero(double iota, const ModelParams& p) {
    double target = 1.0 / (1.0 - iota);
    double zhi = 1.0;
    int guard = 0;
    while (g_function(zhi, iota) < target) {
        zhi *= 2.0;
        if (++guard > 200) {
            throw SolveError("h_first_zero: no bracket for g(z) = 1/(1-iota)");
        }
    }
    double zb = bisect([&](double z) { return g_function(z, iota) - target; },
                       zhi * 1e-12, zhi, "g(z) = 1/(1-iota)");
    return std::sqrt(2.0 * alpha2_of(p) * zb);
}

IotaResult find_iota(const ModelParams& p, ControlClass c) {
    if (c != ControlClass::CombinedImpulse &&
        c != ControlClass::CombinedSingular) {
        throw std::invalid_argument("find_iota: combined classes only");
    }
    validate_params(p, c);
    const double hcost = p.h;

    if (c == ControlClass::CombinedSingular || p.k == 0.0) {
        // k = 0 branch: iota with max h = hcost, attained where h' = 0.
        double iota = bisect(
            [&](double i) { return h_profile(i, p).h_max - hcost; }, 1e-9,
            1.0 - 1e-9, "max h(.; iota) = h");
        HMax m = h_profile(iota, p);
        return {iota, m.x_max, 0.0};
    }

    // k > 0: smallest iota whose h-profile reaches hcost, then bisect K.
    double iota_floor = 1e-9;
    if (hcost > 0.0) {
        if (h_profile(1.0 - 1e-9, p).h_max <= hcost) {
            throw SolveError("find_iota: h too large, max h < h at iota -> 1");
        }
        if (h_profile(iota_floor, p).h_max < hcost) {
            iota_floor = bisect(
                [&](double i) { return h_profile(i, p).h_max - hcost; }, 1e-9,
                1.0 - 1e-9, "max h(.; iota) = h (floor)");
        }
    }
    double lo = iota_floor + 1e-6, hi = 1.0 - 1e-6;
    if (K_of(lo, hcost, p) >= p.k) lo = iota_floor + 1e-12;
    if (K_of(hi, hcost, p) < p.k) {
        throw SolveError("find_iota: K(1-1e-6) < k, cannot bracket iota");
    }
    double iota = bisect([&](double i) { return K_of(i, hcost, p) - p.k; }, lo,
                         hi, "K(iota) = k");
    HMax m = h_profile(iota, p);
    Crossings cr = h_crossings(m, iota, hcost, p);
    return {iota, cr.x_hi, cr.x_hi - cr.x_lo};
}

LocalSolution solve_regular(const ModelParams& p) {
    validate_params(p, ControlClass::Regular);
    LocalSolution s;
    s.cls = ControlClass::Regular;
    s.params = p;
    s.cost = p.a * std::sqrt(p.r * p.l);
    double theta = std::sqrt(p.r / p.l);
    s.feedback = [theta](double x) { return -theta * x; };
    s.density.kind = DensityProfile::Kind::Gaussian;
    s.density.sigma2 = 0.5 * p.a / theta;
    s.density.lo = -std::numeric_limits<double>::infinity();
    s.density.hi = std::numeric_limits<double>::infinity();
    return s;
}

LocalSolution solve_singular(const ModelParams& p) {
    validate_params(p, ControlClass::Singular);
    LocalSolution s;
    s.cls = ControlClass::Singular;
    s.params = p;
    double U = std::cbrt(0.75 * p.a * p.h / p.r);
    s.cost = std::pow(0.75 * p.a * std::sqrt(p.r) * p.h, 2.0 / 3.0);
    s.U = U;
    s.density.kind = DensityProfile::Kind::Uniform;
    s.density.lo = -U;
    s.density.hi = U;
    double mass = 0.25 * p.a / U;
    s.boundary_measure = {{-U, +1.0, mass}, {U, -1.0, mass}};
    return s;
}

LocalSolution solve_impulse(const ModelParams& p) {
    validate_params(p, ControlClass::Impulse);
    LocalSolution s;
    s.cls = ControlClass::Impulse;
    s.params = p;
    const double theta1 = -p.r / (6.0 * p.a);
    auto Pval = [&](double x, double t2) {
        return theta1 * x * x * x * x + t2 * x * x;
    };
    auto Pder = [&](double x, double t2) {
        return 4.0 * theta1 * x * x * x + 2.0 * t2 * x;
    };

    double theta2, x_tilde, x_star;
    if (p.h == 0.0) {
        // P'(x~*) = 0 forces x~* = 0; the system collapses to
        // P(x*) = k with P'(x*) = 0, giving theta2 = sqrt(2 r k / (3 a)).
        theta2 = std::sqrt(2.0 * p.r * p.k / (3.0 * p.a));
        x_tilde = 0.0;
        x_star = std::sqrt(3.0 * p.a * theta2 / p.r);
    } else {
        // P' has max (4/3) theta2^{3/2} sqrt(a/r) at x = sqrt(a theta2 / r);
        // theta2 must exceed the value where that max equals h.
        double t2_min =
            std::pow(0.75 * p.h * std::sqrt(p.r / p.a), 2.0 / 3.0);
        auto roots = [&](double t2, double& xt, double& xs) {
            double xm = std::sqrt(p.a * t2 / p.r);
            double xz = std::sqrt(3.0 * p.a * t2 / p.r);  // zero of P'
            auto f = [&](double x) { return Pder(x, t2) - p.h; };
            xt = bisect(f, 1e-14 * xm, xm, "P'(x~*) = h");
            xs = bisect(f, xm, xz, "P'(x*) = h");
        };
        auto gap = [&](double t2) {
            double xt, xs;
            roots(t2, xt, xs);
            return Pval(xs, t2) - Pval(xt, t2) - p.h * (xs - xt) - p.k;
        };
        double lo = t2_min * (1.0 + 1e-9);
        double hi = std::max(2.0 * t2_min, 1.0);
        int guard = 0;
        while (gap(hi) < 0.0) {
            hi *= 2.0;
            if (++guard > 200) {
                throw SolveError("solve_impulse: cannot bracket theta2");
            }
        }
        theta2 = bisect(gap, lo, hi, "P(x*) - P(x~*) = k + h (x* - x~*)");
        roots(theta2, x_tilde, x_star);
    }

    s.cost = p.a * theta2;
    s.theta1 = theta1;
    s.theta2 = theta2;
    s.x_tilde = x_tilde;
    s.U = x_star;
    s.xi_star = x_star - x_tilde;
    s.density.kind = DensityProfile::Kind::Trapezoid;
    s.density.lo = -x_star;
    s.density.hi = x_star;
    s.density.x_tilde = x_tilde;
    s.density.x_star = x_star;
    double mass = 0.5 * p.a / (x_star * x_star - x_tilde * x_tilde);
    double jump = x_star - x_tilde;
    s.boundary_measure = {{-x_star, +jump, mass}, {x_star, -jump, mass}};
    return s;
}

DensityProfile stationary_density(const ModelParams& p, double iota, double U,
                                  double xi_star, ControlClass c) {
    if (c == ControlClass::CombinedSingular) {
        // 1/2 a p' - u* p = 0 throughout: p proportional to exp(E).
        auto q = [&](double x) { return exp_E(x, iota, p); };
        return tabulate_density(U, 2001, q);
    }
    if (c != ControlClass::CombinedImpulse) {
        throw std::invalid_argument(
            "stationary_density: combined classes only");
    }
    // Piecewise first-order reduction of 1/2 a p'' - (u* p)' = 0 with
    // p(+-U) = 0 and flux matching at +-(U - xi*):
    //   inner |x| <= U - xi*:  p = A exp(E)
    //   outer:                 p = (2/a) exp(E(x)) int_x^U exp(-E)
    // Cumulative tail integrals of exp(-E) on a refined half grid (each
    // output interval split in 4) via Simpson pairs and half panels.
    const double x_tilde = U - xi_star;
    const size_t n = 2001, half = n / 2;           // output nodes on [0, U]
    const size_t nf = 4 * half;                    // fine intervals on [0, U]
    const double hf = U / double(nf);
    std::vector<double> em(nf + 1), tail(nf + 1, 0.0);
    for (size_t i = 0; i <= nf; ++i) {
        em[i] = 1.0 / exp_E(double(i) * hf, iota, p);
    }
    for (size_t i = nf - 2;; i -= 2) {
        tail[i] = tail[i + 2] + hf / 3.0 * (em[i] + 4.0 * em[i + 1] + em[i + 2]);
        if (i == 0) break;
    }
    for (size_t i = 1; i < nf; i += 2) {
        tail[i] = tail[i + 1] +
                  hf / 12.0 * (5.0 * em[i] + 8.0 * em[i + 1] - em[i + 2]);
    }
    double A = (2.0 / p.a) *
               simpson([&](double y) { return 1.0 / exp_E(y, iota, p); },
                       x_tilde, U, 2001);
    auto q = [&](double x) {
        if (x <= x_tilde) return A * exp_E(x, iota, p);
        size_t i = std::min(nf, size_t(std::round(x / hf)));
        return (2.0 / p.a) * exp_E(x, iota, p) * tail[i];
    };
    return tabulate_density(U, n, q);
}

LocalSolution solve_combined_impulse(const ModelParams& p) {
    validate_params(p, ControlClass::CombinedImpulse);
    LocalSolution s;
    s.cls = ControlClass::CombinedImpulse;
    s.params = p;
    IotaResult ir = find_iota(p, ControlClass::CombinedImpulse);
    s.iota = ir.iota;
    s.U = ir.U;
    s.xi_star = ir.xi_star;
    s.x_tilde = ir.U - ir.xi_star;
    s.cost = ir.iota * p.a * std::sqrt(p.r * p.l);
    s.feedback = make_feedback(ir.iota, ir.U, p);
    s.density = stationary_density(p, ir.iota, ir.U, ir.xi_star,
                                   ControlClass::CombinedImpulse);
    // Before normalization the density construction has q(0) = A with
    // q'(+-U) = -+2/a, so both boundary masses are 1/Z with Z the raw
    // normalizer; recover Z from the normalized center value.
    double A = (2.0 / p.a) *
               simpson([&](double y) { return 1.0 / exp_E(y, ir.iota, p); },
                       ir.U - ir.xi_star, ir.U, 2001);
    double mass = s.density(0.0) / A;
    s.boundary_measure = {{-ir.U, +ir.xi_star, mass}, {ir.U, -ir.xi_star, mass}};
    return s;
}

LocalSolution solve_combined_singular(const ModelParams& p) {
    validate_params(p, ControlClass::CombinedSingular);
    LocalSolution s;
    s.cls = ControlClass::CombinedSingular;
    s.params = p;
    IotaResult ir = find_iota(p, ControlClass::CombinedSingular);
    s.iota = ir.iota;
    s.U = ir.U;
    s.xi_star = 0.0;
    s.cost = ir.iota * p.a * std::sqrt(p.r * p.l);
    s.feedback = make_feedback(ir.iota, ir.U, p);
    s.density = stationary_density(p, ir.iota, ir.U, 0.0,
                                   ControlClass::CombinedSingular);
    double pU = s.density.values.back();
    s.boundary_measure = {{-ir.U, +1.0, 0.5 * p.a * pU},
                          {ir.U, -1.0, 0.5 * p.a * pU}};
    return s;
}

LocalSolution solve(const ModelParams& p, ControlClass c) {
    switch (c) {
        case ControlClass::Regular: return solve_regular(p);
        case ControlClass::Singular: return solve_singular(p);
        case ControlClass::Impulse: return solve_impulse(p);
        case ControlClass::CombinedImpulse: return solve_combined_impulse(p);
        case ControlClass::CombinedSingular: return solve_combined_singular(p);
    }
    throw std::invalid_argument("solve: unknown class");
}

double value_function_eval(const LocalSolution& sol, double x) {
    if (sol.cls != ControlClass::CombinedImpulse &&
        sol.cls != ControlClass::CombinedSingular) {
        throw std::invalid_argument(
            "value_function_eval: combined classes only");
    }
    double U = *sol.U, ax = std::abs(x);
    if (ax <= U) return w_inside(ax, *sol.iota, sol.params);
    return w_inside(U, *sol.iota, sol.params) + sol.params.h * (ax - U);
}

std::vector<double> hjb_residual(const LocalSolution& sol,
                                 std::span<const double> xs) {
    if (sol.cls != ControlClass::CombinedImpulse &&
        sol.cls != ControlClass::CombinedSingular) {
        throw std::invalid_argument("hjb_residual: combined classes only");
    }
    const ModelParams& p = sol.params;
    double iota = *sol.iota, U = *sol.U, xi = sol.xi_star.value_or(0.0);
    double I = sol.cost;
    std::vector<double> res;
    res.reserve(xs.size() + 2);
    for (double x : xs) {
        double ax = std::abs(x);
        double wp = h_function(ax, iota, p);
        double wpp = h_function_dx(ax, iota, p);
        res.push_back(0.5 * p.a * wpp - wp * wp / (4.0 * p.l) + p.r * x * x -
                      I);
    }
    double kfix = sol.cls == ControlClass::CombinedImpulse ? p.k : 0.0;
    for (double side : {U, -U}) {
        double interior = side > 0.0 ? side - xi : side + xi;
        res.push_back(value_function_eval(sol, interior) + kfix + p.h * xi -
                      value_function_eval(sol, side));
    }
    return res;
}

}  // namespace localsolve
}  // namespace ergotrack
