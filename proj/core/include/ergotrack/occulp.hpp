#ifndef ERGOTRACK_OCCULP_HPP
#define ERGOTRACK_OCCULP_HPP

#include <iosfwd>
#include <span>
#include <vector>

#include "ergotrack/localsolve.hpp"
#include "ergotrack/simplex.hpp"

// Independent numerical oracle: Markov-chain-approximation discretization of
// the occupation-measure linear program, solved by the in-tree simplex.

namespace ergotrack::occulp {

struct GridSpec {
    double x_lo = -4.0, x_hi = 4.0;  // truncation box, x_lo < 0 < x_hi
    int nx = 161;                    // state nodes (>= 11, odd keeps 0 on grid)
    double u_lo = 0.0, u_hi = 0.0;   // control grid, regular classes
    int nu = 1;
    std::vector<int> xi_steps;       // jump candidates in units of dx, nonzero
    std::vector<int> gamma_values;   // subset of {-1, +1}

    double dx() const { return (x_hi - x_lo) / double(nx - 1); }
    double x_at(int i) const { return x_lo + i * dx(); }
    double u_at(int j) const {
        return nu > 1 ? u_lo + j * (u_hi - u_lo) / double(nu - 1) : 0.0;
    }
};

// Symmetric box sized from the closed-form threshold (3 sigma for the
// regular class), with class-appropriate control/jump grids.
GridSpec default_grid(const ModelParams& p, ControlClass c, int nx);

struct VarKey {
    enum class Kind { Mu, Impulse, Singular } kind;
    int node;   // state index i
    int j;      // control index (Mu), signed step in dx units (Impulse),
                // direction +-1 (Singular)
};

struct DiscreteLP {
    GridSpec grid;
    ControlClass cls;
    std::vector<double> objective;
    std::vector<VarKey> vars;
    std::size_t n_mu = 0;  // mu columns come first
    // rows 0..nx-3 = interior-node test functions, row nx-2 = normalization
    int n_rows = 0;
    std::vector<simplex::SparseCol> cols;
};

DiscreteLP build_lp(const ModelParams& p, ControlClass c, const GridSpec& g);

enum class LPStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LPSolution {
    LPStatus status = LPStatus::IterationLimit;
    double objective_value = 0.0;
    std::vector<double> mu;
    std::vector<double> rho;
    int iterations = 0;
};

LPSolution solve_lp(const DiscreteLP& lp, int max_iter = 200000);

// Discretized generator constraint sum_mu Af mu + sum_rho Bf rho for a test
// function given by its node values; mu/rho must follow build_lp's layout.
double constraint_residual(std::span<const double> mu,
                           std::span<const double> rho, const ModelParams& p,
                           ControlClass c, const GridSpec& g,
                           std::span<const double> f_values);

// Plain-text sparse triplets (row col value), objective appended as rows
// with row index -1.
void export_triplets(const DiscreteLP& lp, std::ostream& os);

}  // namespace ergotrack::occulp

#endif
