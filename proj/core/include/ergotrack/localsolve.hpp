#ifndef ERGOTRACK_LOCALSOLVE_HPP
#define ERGOTRACK_LOCALSOLVE_HPP

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Closed-form and semi-closed-form solvers for the five one-dimensional
// time-average Brownian control problems (regular, singular, impulse and the
// two combined classes).

namespace ergotrack {

enum class ControlClass {
    Regular,
    Singular,
    Impulse,
    CombinedImpulse,
    CombinedSingular,
};

const char* to_string(ControlClass c);
std::optional<ControlClass> control_class_from_string(const std::string& s);

// Frozen local coefficients of one time-average problem.
//   a: diffusion coefficient, r: deviation weight, l: regular-control weight,
//   k: fixed jump cost, h: proportional cost.
struct ModelParams {
    double a = 1.0;
    double r = 1.0;
    double l = 0.0;
    double k = 0.0;
    double h = 0.0;
};

// Throws std::invalid_argument if params are outside the class's domain.
void validate_params(const ModelParams& p, ControlClass c);

// Root-bracketing / iteration failures.
struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DensityProfile {
    enum class Kind { Gaussian, Uniform, Trapezoid, Tabulated };
    Kind kind = Kind::Gaussian;
    double lo = 0.0, hi = 0.0;  // support
    double sigma2 = 0.0;                 // Gaussian
    double x_tilde = 0.0, x_star = 0.0;  // Trapezoid plateau / ramp ends
    std::vector<double> grid, values;    // Tabulated (uniform grid)

    double operator()(double x) const;
    // Closed-form 1 for the analytic kinds, Simpson for Tabulated.
    double integral() const;
};

// One atom of the boundary (intervention) measure rho*. `jump` is the signed
// displacement for impulse atoms and the direction (+-1) for singular atoms.
struct BoundaryAtom {
    double location;
    double jump;
    double mass;
};

struct LocalSolution {
    ControlClass cls = ControlClass::Regular;
    ModelParams params;
    double cost = 0.0;
    std::optional<double> iota;      // combined classes, cost = iota*a*sqrt(r*l)
    std::optional<double> U;         // boundary threshold
    std::optional<double> xi_star;   // jump size (positive)
    std::optional<double> x_tilde;   // post-jump point, pure impulse
    std::optional<double> theta1, theta2;  // quartic coefficients, pure impulse
    std::function<double(double)> feedback;  // u*(x); empty if no regular control
    DensityProfile density;
    std::vector<BoundaryAtom> boundary_measure;
};

namespace localsolve {

LocalSolution solve_regular(const ModelParams& p);
LocalSolution solve_singular(const ModelParams& p);
LocalSolution solve_impulse(const ModelParams& p);
LocalSolution solve_combined_impulse(const ModelParams& p);
LocalSolution solve_combined_singular(const ModelParams& p);
LocalSolution solve(const ModelParams& p, ControlClass c);

// g(z; iota) = 1F1((1-iota)/4 + 1, 3/2, z) / 1F1((1-iota)/4, 1/2, z)
double g_function(double z, double iota);
double g_function_dz(double z, double iota);

// h(x; iota) = 2 sqrt(r l) (1 - (1-iota) g(x^2/(2 alpha^2); iota)) x,
// with alpha^2 = a sqrt(l/r) / 2. This is w'(x) on [0, U].
double h_function(double x, double iota, const ModelParams& p);
double h_function_dx(double x, double iota, const ModelParams& p);

// First positive zero of h(.; iota).
double h_first_zero(double iota, const ModelParams& p);

struct IotaResult {
    double iota;
    double U;
    double xi_star;  // 0 for the k = 0 (combined singular) branch
};

// Combined-class free-boundary data. For k > 0 solves
//   int_{U-xi*}^{U} h = k + h_cost xi*,  h(U) = h(U-xi*) = h_cost;
// for k = 0 finds iota with max h = h_cost attained at U (h'(U) = 0).
IotaResult find_iota(const ModelParams& p, ControlClass c);

// Value function w of the combined classes (even; linear slope h outside U).
double value_function_eval(const LocalSolution& sol, double x);

// Residuals of a/2 w'' - (w')^2/(4l) + r x^2 - I at each x, followed by the
// two boundary jump-condition residuals.
std::vector<double> hjb_residual(const LocalSolution& sol,
                                 std::span<const double> xs);

// Stationary density of the optimally controlled process for the combined
// classes, tabulated on 2001 uniform nodes over [-U, U].
DensityProfile stationary_density(const ModelParams& p, double iota, double U,
                                  double xi_star, ControlClass c);

}  // namespace localsolve
}  // namespace ergotrack

#endif
