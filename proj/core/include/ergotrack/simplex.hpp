#ifndef ERGOTRACK_SIMPLEX_HPP
#define ERGOTRACK_SIMPLEX_HPP

#include <utility>
#include <vector>

// Dense two-phase revised simplex for small equality-form LPs:
//   min c'x  s.t.  Ax = b, x >= 0,
// with A given column-wise in sparse triplet form. Deterministic: Dantzig
// pricing with a permanent switch to Bland's rule once degeneracy stalls
// progress. Sized for a few hundred rows and up to ~1e5 columns.

namespace ergotrack::simplex {

struct SparseCol {
    std::vector<std::pair<int, double>> entries;  // (row, value)
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Result {
    Status status = Status::IterationLimit;
    double objective = 0.0;
    std::vector<double> x;
    int iterations = 0;
};

Result solve(int n_rows, const std::vector<SparseCol>& cols,
             const std::vector<double>& cost, const std::vector<double>& rhs,
             int max_iter = 200000);

}  // namespace ergotrack::simplex

#endif
