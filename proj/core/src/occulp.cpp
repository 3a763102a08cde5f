#include "ergotrack/occulp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>

namespace ergotrack::occulp {

namespace {

bool has_regular(ControlClass c) {
    return c == ControlClass::Regular || c == ControlClass::CombinedImpulse ||
           c == ControlClass::CombinedSingular;
}
bool has_impulse(ControlClass c) {
    return c == ControlClass::Impulse || c == ControlClass::CombinedImpulse;
}
bool has_singular(ControlClass c) {
    return c == ControlClass::Singular || c == ControlClass::CombinedSingular;
}

void check_grid(const GridSpec& g, ControlClass c) {
    if (!(g.x_lo < 0.0 && 0.0 < g.x_hi) || g.nx < 11) {
        throw std::invalid_argument("GridSpec: need x_lo < 0 < x_hi, nx >= 11");
    }
    for (int m : g.xi_steps) {
        if (m == 0 || std::abs(m) >= g.nx) {
            throw std::invalid_argument(
                "GridSpec: xi step must be a nonzero node offset inside box");
        }
    }
    for (int gam : g.gamma_values) {
        if (gam != 1 && gam != -1) {
            throw std::invalid_argument("GridSpec: gamma must be +-1");
        }
    }
    if (has_regular(c) && g.nu > 1 && !(g.u_lo < g.u_hi)) {
        throw std::invalid_argument("GridSpec: need u_lo < u_hi when nu > 1");
    }
}

// Transition rates of the discrete generator at node i under control u:
// central differencing while it keeps rates nonnegative (|u| <= a/dx),
// upwind beyond; outward transitions at the box edge are folded back
// (cancelled) so total mass is conserved.
struct Rates {
    double up, dn;
};

Rates node_rates(double a, double u, double dx, int i, int nx) {
    double d2 = 0.5 * a / (dx * dx);
    double up, dn;
    if (std::abs(u) <= a / dx) {
        up = d2 + 0.5 * u / dx;
        dn = d2 - 0.5 * u / dx;
    } else {
        up = d2 + std::max(u, 0.0) / dx;
        dn = d2 + std::max(-u, 0.0) / dx;
    }
    if (i + 1 >= nx) up = 0.0;
    if (i - 1 < 0) dn = 0.0;
    return {up, dn};
}

void add_entry(simplex::SparseCol& col, int node, int nx, double val) {
    if (node >= 1 && node <= nx - 2) col.entries.push_back({node - 1, val});
}

}  // namespace

GridSpec default_grid(const ModelParams& p, ControlClass c, int nx) {
    GridSpec g;
    g.nx = nx;
    double u_ref;
    switch (c) {
        case ControlClass::Regular: {
            double theta = std::sqrt(p.r / p.l);
            u_ref = 3.0 * std::sqrt(0.5 * p.a / theta);
            break;
        }
        case ControlClass::Singular:
            u_ref = *localsolve::solve_singular(p).U;
            break;
        case ControlClass::Impulse:
            u_ref = *localsolve::solve_impulse(p).U;
            break;
        case ControlClass::CombinedImpulse:
        case ControlClass::CombinedSingular:
            u_ref = localsolve::find_iota(p, c).U;
            break;
        default:
            u_ref = 1.0;
    }
    g.x_hi = 3.0 * u_ref;
    g.x_lo = -g.x_hi;
    if (has_regular(c)) {
        g.u_hi = 0.75 * std::sqrt(p.r / p.l) * g.x_hi;
        g.u_lo = -g.u_hi;
        g.nu = 41;
    }
    if (has_impulse(c)) {
        std::set<int> steps;
        int mmax = (nx - 1) / 2;
        for (int q = 0; q < 60; ++q) {
            int m = int(std::lround(1.0 + q * (mmax - 1.0) / 59.0));
            if (m >= 1) steps.insert(m);
        }
        for (int m : std::set<int>(steps)) steps.insert(-m);
        g.xi_steps.assign(steps.begin(), steps.end());
    }
    if (has_singular(c)) g.gamma_values = {-1, +1};
    return g;
}

DiscreteLP build_lp(const ModelParams& p, ControlClass c, const GridSpec& g) {
    validate_params(p, c);
    check_grid(g, c);
    DiscreteLP lp;
    lp.grid = g;
    lp.cls = c;
    const int nx = g.nx;
    const int nu = has_regular(c) ? g.nu : 1;
    const double dx = g.dx();
    lp.n_rows = (nx - 2) + 1;
    const int norm_row = nx - 2;

    for (int i = 0; i < nx; ++i) {
        double x = g.x_at(i);
        for (int j = 0; j < nu; ++j) {
            double u = has_regular(c) ? g.u_at(j) : 0.0;
            simplex::SparseCol col;
            Rates rt = node_rates(p.a, u, dx, i, nx);
            add_entry(col, i + 1, nx, rt.up);
            add_entry(col, i - 1, nx, rt.dn);
            add_entry(col, i, nx, -(rt.up + rt.dn));
            col.entries.push_back({norm_row, 1.0});
            lp.cols.push_back(std::move(col));
            lp.vars.push_back({VarKey::Kind::Mu, i, j});
            lp.objective.push_back(p.r * x * x +
                                   (has_regular(c) ? p.l * u * u : 0.0));
        }
    }
    lp.n_mu = lp.cols.size();

    if (has_impulse(c)) {
        for (int i = 0; i < nx; ++i) {
            for (int m : g.xi_steps) {
                int dest = i + m;
                if (dest < 0 || dest >= nx) continue;
                simplex::SparseCol col;
                add_entry(col, dest, nx, 1.0);
                add_entry(col, i, nx, -1.0);
                if (col.entries.empty()) continue;
                lp.cols.push_back(std::move(col));
                lp.vars.push_back({VarKey::Kind::Impulse, i, m});
                lp.objective.push_back(p.k + p.h * std::abs(m) * dx);
            }
        }
    }
    if (has_singular(c)) {
        for (int i = 0; i < nx; ++i) {
            for (int gam : g.gamma_values) {
                int dest = i + gam;
                if (dest < 0 || dest >= nx) continue;
                simplex::SparseCol col;
                add_entry(col, dest, nx, 1.0 / dx);
                add_entry(col, i, nx, -1.0 / dx);
                if (col.entries.empty()) continue;
                lp.cols.push_back(std::move(col));
                lp.vars.push_back({VarKey::Kind::Singular, i, gam});
                lp.objective.push_back(p.h);
            }
        }
    }
    return lp;
}

LPSolution solve_lp(const DiscreteLP& lp, int max_iter) {
    std::vector<double> rhs(lp.n_rows, 0.0);
    rhs[lp.n_rows - 1] = 1.0;
    simplex::Result r =
        simplex::solve(lp.n_rows, lp.cols, lp.objective, rhs, max_iter);
    LPSolution out;
    out.iterations = r.iterations;
    switch (r.status) {
        case simplex::Status::Optimal: out.status = LPStatus::Optimal; break;
        case simplex::Status::Infeasible:
            out.status = LPStatus::Infeasible;
            break;
        case simplex::Status::Unbounded:
            out.status = LPStatus::Unbounded;
            break;
        case simplex::Status::IterationLimit:
            out.status = LPStatus::IterationLimit;
            break;
    }
    if (r.status != simplex::Status::Optimal) return out;
    out.objective_value = r.objective;
    out.mu.assign(r.x.begin(), r.x.begin() + long(lp.n_mu));
    out.rho.assign(r.x.begin() + long(lp.n_mu), r.x.end());
    for (auto* v : {&out.mu, &out.rho}) {
        for (double& z : *v) {
            if (z < 0.0) z = 0.0;  // clamp -1e-12 scale round-off
        }
    }
    return out;
}

double constraint_residual(std::span<const double> mu,
                           std::span<const double> rho, const ModelParams& p,
                           ControlClass c, const GridSpec& g,
                           std::span<const double> f_values) {
    DiscreteLP lp = build_lp(p, c, g);
    if (mu.size() != lp.n_mu || rho.size() != lp.cols.size() - lp.n_mu ||
        f_values.size() != size_t(g.nx)) {
        throw std::invalid_argument(
            "constraint_residual: size mismatch with build_lp layout");
    }
    const int norm_row = g.nx - 2;
    double acc = 0.0;
    for (size_t idx = 0; idx < lp.cols.size(); ++idx) {
        double z = idx < lp.n_mu ? mu[idx] : rho[idx - lp.n_mu];
        if (z == 0.0) continue;
        double s = 0.0;
        for (auto [row, val] : lp.cols[idx].entries) {
            if (row == norm_row) continue;
            s += val * f_values[row + 1];
        }
        acc += z * s;
    }
    return acc;
}

void export_triplets(const DiscreteLP& lp, std::ostream& os) {
    for (size_t j = 0; j < lp.cols.size(); ++j) {
        for (auto [row, val] : lp.cols[j].entries) {
            os << row << ' ' << j << ' ' << val << '\n';
        }
    }
    for (size_t j = 0; j < lp.objective.size(); ++j) {
        os << -1 << ' ' << j << ' ' << lp.objective[j] << '\n';
    }
}

}  // namespace ergotrack::occulp
