#include "ergotrack/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace ergotrack::simplex {
namespace {

constexpr double kPriceTol = 1e-9;
constexpr double kPivotTol = 1e-11;
constexpr int kRefreshEvery = 50;

class Tableau {
  public:
    Tableau(int m, const std::vector<SparseCol>& cols,
            const std::vector<double>& rhs)
        : m_(m), n_(int(cols.size())), cols_(cols), sign_(m, 1.0) {
        xb_.resize(m_);
        basis_.resize(m_);
        in_basis_.assign(n_, false);
        binv_.assign(size_t(m_) * m_, 0.0);
        b_.resize(m_);
        for (int i = 0; i < m_; ++i) {
            if (rhs[i] < 0.0) sign_[i] = -1.0;
            b_[i] = std::abs(rhs[i]);
            xb_[i] = b_[i];
            basis_[i] = n_ + i;  // artificial
            binv_[size_t(i) * m_ + i] = 1.0;
        }
    }

    int m() const { return m_; }
    int n() const { return n_; }
    const std::vector<int>& basis() const { return basis_; }
    double xb(int i) const { return xb_[i]; }

    double col_cost_dot(const std::vector<double>& y, int j) const {
        double s = 0.0;
        for (auto [row, val] : cols_[j].entries) {
            s += y[row] * sign_[row] * val;
        }
        return s;
    }

    // w = B^{-1} a_j
    void ftran(int j, std::vector<double>& w) const {
        std::fill(w.begin(), w.end(), 0.0);
        for (auto [row, val] : cols_[j].entries) {
            double v = sign_[row] * val;
            for (int i = 0; i < m_; ++i) w[i] += binv_[size_t(i) * m_ + row] * v;
        }
    }

    // y with y_i = sum_k cb_k binv[k][i]
    void btran(const std::vector<double>& cb, std::vector<double>& y) const {
        std::fill(y.begin(), y.end(), 0.0);
        for (int k = 0; k < m_; ++k) {
            if (cb[k] == 0.0) continue;
            const double* row = &binv_[size_t(k) * m_];
            for (int i = 0; i < m_; ++i) y[i] += cb[k] * row[i];
        }
    }

    // Row r of B^{-1} a_j, used when scanning for drive-out pivots.
    double ftran_row(int r, int j) const {
        double s = 0.0;
        const double* row = &binv_[size_t(r) * m_];
        for (auto [rr, val] : cols_[j].entries) s += row[rr] * sign_[rr] * val;
        return s;
    }

    bool is_basic(int j) const { return j < n_ && in_basis_[j]; }

    // Drops a near-zero residual before a degenerate forced pivot so that
    // dividing it by a small pivot element cannot seed an infeasibility.
    void zero_xb(int r) { xb_[r] = 0.0; }

    void pivot(int r, int j, const std::vector<double>& w) {
        double piv = w[r];
        double* rrow = &binv_[size_t(r) * m_];
        for (int t = 0; t < m_; ++t) rrow[t] /= piv;
        xb_[r] /= piv;
        for (int i = 0; i < m_; ++i) {
            if (i == r || w[i] == 0.0) continue;
            double f = w[i];
            double* irow = &binv_[size_t(i) * m_];
            for (int t = 0; t < m_; ++t) irow[t] -= f * rrow[t];
            xb_[i] -= f * xb_[r];
            if (xb_[i] < 0.0 && xb_[i] > -1e-10) xb_[i] = 0.0;
        }
        if (basis_[r] < n_) in_basis_[basis_[r]] = false;
        basis_[r] = j;
        if (j < n_) in_basis_[j] = true;
    }

    // Rebuild B^{-1} from scratch by Gauss-Jordan with partial pivoting;
    // keeps the incremental inverse when the refactorization looks singular.
    void refresh() {
        std::vector<double> B(size_t(m_) * m_, 0.0);
        for (int c = 0; c < m_; ++c) {
            int j = basis_[c];
            if (j >= n_) {
                B[size_t(j - n_) * m_ + c] = 1.0;
            } else {
                for (auto [row, val] : cols_[j].entries) {
                    B[size_t(row) * m_ + c] = sign_[row] * val;
                }
            }
        }
        std::vector<double> inv(size_t(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i) inv[size_t(i) * m_ + i] = 1.0;
        for (int c = 0; c < m_; ++c) {
            int p = c;
            for (int i = c + 1; i < m_; ++i) {
                if (std::abs(B[size_t(i) * m_ + c]) >
                    std::abs(B[size_t(p) * m_ + c]))
                    p = i;
            }
            if (std::abs(B[size_t(p) * m_ + c]) < 1e-12) return;
            if (p != c) {
                for (int t = 0; t < m_; ++t) {
                    std::swap(B[size_t(p) * m_ + t], B[size_t(c) * m_ + t]);
                    std::swap(inv[size_t(p) * m_ + t],
                              inv[size_t(c) * m_ + t]);
                }
            }
            double piv = B[size_t(c) * m_ + c];
            for (int t = 0; t < m_; ++t) {
                B[size_t(c) * m_ + t] /= piv;
                inv[size_t(c) * m_ + t] /= piv;
            }
            for (int i = 0; i < m_; ++i) {
                if (i == c) continue;
                double f = B[size_t(i) * m_ + c];
                if (f == 0.0) continue;
                for (int t = 0; t < m_; ++t) {
                    B[size_t(i) * m_ + t] -= f * B[size_t(c) * m_ + t];
                    inv[size_t(i) * m_ + t] -= f * inv[size_t(c) * m_ + t];
                }
            }
        }
        binv_ = std::move(inv);
        for (int i = 0; i < m_; ++i) {
            double s = 0.0;
            const double* row = &binv_[size_t(i) * m_];
            for (int k = 0; k < m_; ++k) s += row[k] * b_[k];
            xb_[i] = s < 0.0 && s > -1e-10 ? 0.0 : s;
        }
    }

  private:
    int m_, n_;
    const std::vector<SparseCol>& cols_;
    std::vector<double> sign_;
    std::vector<double> b_;
    std::vector<double> binv_;  // row-major m x m
    std::vector<double> xb_;
    std::vector<int> basis_;
    std::vector<bool> in_basis_;
};

}  // namespace

namespace {

Result solve_impl(int n_rows, const std::vector<SparseCol>& cols,
                  const std::vector<double>& cost,
                  const std::vector<double>& rhs, int max_iter,
                  bool bland_always) {
    const int m = n_rows, n = int(cols.size());
    Tableau tab(m, cols, rhs);
    Result res;
    std::vector<double> y(m), w(m), cb(m);
    std::vector<char> blocked(n, 0);
    int since_refresh = 0;
    bool bland = false;
    int stall = 0;
    double last_obj = 0.0;

    auto basic_cost = [&](const std::vector<double>& c_art,
                          const std::vector<double>& c_orig) {
        for (int i = 0; i < m; ++i) {
            int j = tab.basis()[i];
            cb[i] = j >= n ? c_art[j - n] : c_orig[j];
        }
    };
    auto objective = [&]() {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += cb[i] * tab.xb(i);
        return s;
    };

    std::vector<double> art_cost(m, 1.0), zero_cost(n, 0.0);
    std::vector<double> art_zero(m, 0.0);

    // phase 1 minimizes artificial mass, phase 2 the real objective;
    // artificial columns are never allowed to enter.
    for (int phase = 1; phase <= 2; ++phase) {
        const std::vector<double>& c_orig = phase == 1 ? zero_cost : cost;
        const std::vector<double>& c_art = phase == 1 ? art_cost : art_zero;
        bland = bland_always;
        std::fill(blocked.begin(), blocked.end(), 0);
        stall = 0;
        const int stall_limit = 10 * m + 1000;
        bool verified = false;  // optimality confirmed on a fresh inverse
        basic_cost(c_art, c_orig);
        last_obj = objective();
        for (;;) {
            if (res.iterations >= max_iter) {
                res.status = Status::IterationLimit;
                return res;
            }
            if (since_refresh >= kRefreshEvery) {
                tab.refresh();
                since_refresh = 0;
            }
            basic_cost(c_art, c_orig);
            tab.btran(cb, y);
            int enter = -1;
            double best = -kPriceTol;
            for (int j = 0; j < n; ++j) {
                if (tab.is_basic(j) || blocked[j]) continue;
                double d = c_orig[j] - tab.col_cost_dot(y, j);
                if (d < best) {
                    best = d;
                    enter = j;
                    if (bland) break;
                }
                if (bland && enter >= 0) break;
            }
            if (enter < 0) {
                // confirm on a freshly refactorized inverse before accepting
                if (!verified) {
                    tab.refresh();
                    since_refresh = 0;
                    verified = true;
                    continue;
                }
                break;  // phase optimal
            }
            verified = false;
            tab.ftran(enter, w);
            // Two-pass ratio test: find the minimal ratio, then among rows
            // within a tie band pick the largest pivot element. Choosing big
            // pivots keeps the incremental inverse from decaying on the long
            // degenerate runs these transport LPs produce.
            double min_ratio = -1.0;
            for (int i = 0; i < m; ++i) {
                if (w[i] <= kPivotTol) continue;
                double ratio = std::max(tab.xb(i), 0.0) / w[i];
                if (min_ratio < 0.0 || ratio < min_ratio) min_ratio = ratio;
            }
            int leave = -1;
            bool forced = false;
            if (min_ratio >= 0.0) {
                double band = min_ratio + 1e-9 * (1.0 + min_ratio);
                for (int i = 0; i < m; ++i) {
                    if (w[i] <= kPivotTol) continue;
                    if (std::max(tab.xb(i), 0.0) / w[i] > band) continue;
                    if (leave < 0 || w[i] > w[leave]) leave = i;
                }
            }
            for (int i = 0; i < m; ++i) {
                bool art = tab.basis()[i] >= n;
                if (art && w[i] < -1e-7 && tab.xb(i) <= 1e-10 &&
                    (leave < 0 || min_ratio > 1e-12)) {
                    // a zero-level artificial would turn positive; force it out
                    if (!forced || w[i] < w[leave]) {
                        leave = i;
                        forced = true;
                    }
                }
            }
            if (leave < 0) {
                // a zero-level artificial with a negative entry blocks this
                // column at step zero; the pivot element is too small to use,
                // so park the column instead of corrupting the basis
                bool art_block = false;
                for (int i = 0; i < m; ++i) {
                    if (tab.basis()[i] >= n && w[i] < -kPivotTol) {
                        art_block = true;
                        break;
                    }
                }
                if (art_block) {
                    blocked[enter] = 1;
                    continue;
                }
                // no pivot row can mean a stale inverse mispricing an
                // already-dependent column; confirm on a fresh factorization
                if (since_refresh > 0) {
                    tab.refresh();
                    since_refresh = 0;
                    continue;
                }
                res.status = Status::Unbounded;
                return res;
            }
            if (forced) tab.zero_xb(leave);
            tab.pivot(leave, enter, w);
            std::fill(blocked.begin(), blocked.end(), 0);
            ++res.iterations;
            ++since_refresh;
            basic_cost(c_art, c_orig);
            double obj = objective();
            if (obj < last_obj - 1e-12) {
                stall = 0;
                bland = false;
            } else if (++stall > stall_limit) {
                bland = true;
            }
            last_obj = obj;
        }

        if (phase == 1) {
            double infeas = 0.0;
            for (int i = 0; i < m; ++i) {
                if (tab.basis()[i] >= n) infeas += tab.xb(i);
            }
            if (infeas > 1e-7) {
                res.status = Status::Infeasible;
                return res;
            }
            // pivot remaining zero-level artificials out where possible
            for (int i = 0; i < m; ++i) {
                if (tab.basis()[i] < n) continue;
                for (int j = 0; j < n; ++j) {
                    if (tab.is_basic(j)) continue;
                    double piv = tab.ftran_row(i, j);
                    if (std::abs(piv) > 1e-7) {
                        tab.ftran(j, w);
                        tab.pivot(i, j, w);
                        ++since_refresh;
                        break;
                    }
                }
                // all-zero row: redundant constraint, artificial stays at 0
            }
        }
    }

    res.status = Status::Optimal;
    res.x.assign(n, 0.0);
    for (int i = 0; i < m; ++i) {
        int j = tab.basis()[i];
        if (j < n) res.x[j] = std::max(0.0, tab.xb(i));
    }
    res.objective = 0.0;
    for (int j = 0; j < n; ++j) res.objective += cost[j] * res.x[j];
    return res;
}

// Largest violation of Ax = b, x >= 0 for a candidate solution.
double primal_residual(int m, const std::vector<SparseCol>& cols,
                       const std::vector<double>& rhs,
                       const std::vector<double>& x) {
    std::vector<double> ax(m, 0.0);
    double worst = 0.0;
    for (size_t j = 0; j < cols.size(); ++j) {
        if (x[j] == 0.0) continue;
        worst = std::max(worst, -x[j]);
        for (auto [row, val] : cols[j].entries) ax[row] += x[j] * val;
    }
    for (int i = 0; i < m; ++i) worst = std::max(worst, std::abs(ax[i] - rhs[i]));
    return worst;
}

}  // namespace

Result solve(int n_rows, const std::vector<SparseCol>& cols,
             const std::vector<double>& cost, const std::vector<double>& rhs,
             int max_iter) {
    double scale = 1.0;
    for (double b : rhs) scale = std::max(scale, std::abs(b));
    for (const auto& col : cols) {
        for (auto [row, val] : col.entries) {
            scale = std::max(scale, std::abs(val));
        }
    }
    Result res = solve_impl(n_rows, cols, cost, rhs, max_iter, false);
    if (res.status != Status::Optimal) return res;
    if (primal_residual(n_rows, cols, rhs, res.x) <= 1e-5 * scale) return res;
    // Dantzig pricing drifted off the feasible set; redo the whole solve
    // with Bland's rule, which is slower but does not revisit bases.
    Result retry = solve_impl(n_rows, cols, cost, rhs, max_iter, true);
    retry.iterations += res.iterations;
    if (retry.status == Status::Optimal &&
        primal_residual(n_rows, cols, rhs, retry.x) > 1e-5 * scale) {
        retry.status = Status::IterationLimit;
    }
    return retry;
}

}  // namespace ergotrack::simplex
