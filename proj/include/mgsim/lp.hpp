#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mgsim/errors.hpp"

namespace mgsim {

inline constexpr double kLpInf = std::numeric_limits<double>::infinity();

enum class Relation { le, eq, ge };

inline const char* to_string(Relation r) {
    switch (r) {
        case Relation::le: return "<=";
        case Relation::eq: return "=";
        case Relation::ge: return ">=";
    }
    return "?";
}

struct LinearConstraint {
    std::vector<double> coeffs;
    Relation rel = Relation::le;
    double rhs = 0.0;
};

struct VarBound {
    double lower = 0.0;
    double upper = kLpInf;
};

/// min objective . x  subject to the constraints and per-variable bounds.
struct LinearProgram {
    std::vector<double> objective;
    std::vector<LinearConstraint> constraints;
    std::vector<VarBound> bounds;  // one per variable

    std::size_t num_vars() const { return objective.size(); }
};

enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
    }
    return "?";
}

struct LPSolution {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> x;
    double objective_value = std::numeric_limits<double>::quiet_NaN();
};

inline void validate(const LinearProgram& lp) {
    const std::size_t n = lp.num_vars();
    if (n == 0) throw ShapeError("linear program has no variables");
    if (lp.bounds.size() != n) throw ShapeError("bounds size differs from objective size");
    for (const auto& c : lp.constraints) {
        if (c.coeffs.size() != n) throw ShapeError("constraint length differs from objective size");
    }
    for (const auto& b : lp.bounds) {
        if (b.lower > b.upper) throw ShapeError("variable lower bound above upper bound");
        if (std::isnan(b.lower) || std::isnan(b.upper)) throw ShapeError("NaN bound");
    }
}

/// Largest signed violation of x over all constraints and bounds, clamped at
/// zero so feasible points report 0.
inline double feasibility_check(const LinearProgram& lp, const std::vector<double>& x) {
    validate(lp);
    if (x.size() != lp.num_vars()) throw ShapeError("point length differs from variable count");
    double worst = 0.0;
    for (const auto& c : lp.constraints) {
        double v = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) v += c.coeffs[j] * x[j];
        switch (c.rel) {
            case Relation::le: worst = std::max(worst, v - c.rhs); break;
            case Relation::ge: worst = std::max(worst, c.rhs - v); break;
            case Relation::eq: worst = std::max(worst, std::fabs(v - c.rhs)); break;
        }
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (lp.bounds[j].lower > -kLpInf) worst = std::max(worst, lp.bounds[j].lower - x[j]);
        if (lp.bounds[j].upper < kLpInf) worst = std::max(worst, x[j] - lp.bounds[j].upper);
    }
    return worst;
}

/// Plain-text dump (objective row, constraint rows, bounds) for reproducing
/// solver issues offline.
inline std::string dump_lp(const LinearProgram& lp) {
    std::ostringstream os;
    os.precision(17);
    os << "minimize";
    for (double c : lp.objective) os << ' ' << c;
    os << '\n';
    for (const auto& c : lp.constraints) {
        os << "row";
        for (double a : c.coeffs) os << ' ' << a;
        os << ' ' << to_string(c.rel) << ' ' << c.rhs << '\n';
    }
    os << "bounds\n";
    for (const auto& b : lp.bounds) os << b.lower << ' ' << b.upper << '\n';
    return os.str();
}

namespace detail {

/// Two-phase primal simplex with explicit variable bounds, kept dense: the
/// dispatch LPs solved here are small-to-medium and dense methods keep the
/// pivot rule simple and deterministic. Dantzig pricing with a Bland fallback
/// once a degeneracy counter trips.
class SimplexSolver {
    enum State : signed char { kAtLower, kAtUpper, kFreeNb, kBasic, kFixed };

    static constexpr double kPivotTol = 1e-9;
    static constexpr double kDualTol = 1e-9;
    static constexpr int kDegenerateLimit = 40;

public:
    explicit SimplexSolver(const LinearProgram& lp) : n_struct_(static_cast<int>(lp.num_vars())) {
        m_ = static_cast<int>(lp.constraints.size());

        // Column layout: structural, then one slack per inequality row, then
        // one artificial per row.
        n_slack_ = 0;
        for (const auto& c : lp.constraints) {
            if (c.rel != Relation::eq) ++n_slack_;
        }
        n_vars_ = n_struct_ + n_slack_ + m_;
        lo_.assign(n_vars_, 0.0);
        hi_.assign(n_vars_, kLpInf);
        cost_.assign(n_vars_, 0.0);
        col_index_.assign(n_vars_ + 1, 0);

        for (int j = 0; j < n_struct_; ++j) {
            lo_[j] = lp.bounds[j].lower;
            hi_[j] = lp.bounds[j].upper;
            cost_[j] = lp.objective[j];
        }

        // Sparse columns of the constraint matrix.
        std::vector<int> count(n_vars_, 0);
        for (int i = 0; i < m_; ++i) {
            const auto& row = lp.constraints[i].coeffs;
            for (int j = 0; j < n_struct_; ++j) {
                if (row[j] != 0.0) ++count[j];
            }
        }
        int slack = n_struct_;
        for (int i = 0; i < m_; ++i) {
            if (lp.constraints[i].rel != Relation::eq) ++count[slack++];
        }
        for (int a = 0; a < m_; ++a) ++count[n_struct_ + n_slack_ + a];

        std::size_t nnz = 0;
        for (int j = 0; j < n_vars_; ++j) {
            col_index_[j] = static_cast<int>(nnz);
            nnz += static_cast<std::size_t>(count[j]);
        }
        col_index_[n_vars_] = static_cast<int>(nnz);
        col_row_.resize(nnz);
        col_val_.resize(nnz);
        std::vector<int> fill(col_index_.begin(), col_index_.end() - 1);
        for (int i = 0; i < m_; ++i) {
            const auto& row = lp.constraints[i].coeffs;
            for (int j = 0; j < n_struct_; ++j) {
                if (row[j] != 0.0) {
                    col_row_[fill[j]] = i;
                    col_val_[fill[j]] = row[j];
                    ++fill[j];
                }
            }
        }
        slack = n_struct_;
        for (int i = 0; i < m_; ++i) {
            const auto rel = lp.constraints[i].rel;
            if (rel == Relation::eq) continue;
            col_row_[fill[slack]] = i;
            col_val_[fill[slack]] = 1.0;
            ++fill[slack];
            if (rel == Relation::le) {
                lo_[slack] = 0.0;
                hi_[slack] = kLpInf;
            } else {  // ge: slack runs negative
                lo_[slack] = -kLpInf;
                hi_[slack] = 0.0;
            }
            ++slack;
        }

        rhs_.resize(m_);
        for (int i = 0; i < m_; ++i) rhs_[i] = lp.constraints[i].rhs;
    }

    LPSolution solve() {
        LPSolution sol;
        state_.assign(n_vars_, kAtLower);
        xval_.assign(n_vars_, 0.0);

        // Nonbasic start: every non-artificial at its finite bound nearest
        // zero, free variables at zero, fixed variables pinned.
        for (int j = 0; j < n_struct_ + n_slack_; ++j) {
            if (lo_[j] == hi_[j]) {
                state_[j] = kFixed;
                xval_[j] = lo_[j];
            } else if (lo_[j] > -kLpInf &&
                       (hi_[j] >= kLpInf || std::fabs(lo_[j]) <= std::fabs(hi_[j]))) {
                state_[j] = kAtLower;
                xval_[j] = lo_[j];
            } else if (hi_[j] < kLpInf) {
                state_[j] = kAtUpper;
                xval_[j] = hi_[j];
            } else {
                state_[j] = kFreeNb;
                xval_[j] = 0.0;
            }
        }

        // Residuals decide the artificial signs; artificials form the basis.
        std::vector<double> resid = rhs_;
        for (int j = 0; j < n_struct_ + n_slack_; ++j) {
            if (xval_[j] != 0.0) {
                for (int k = col_index_[j]; k < col_index_[j + 1]; ++k) {
                    resid[col_row_[k]] -= col_val_[k] * xval_[j];
                }
            }
        }
        basis_.resize(m_);
        beta_.resize(m_);
        art_sign_.resize(m_);
        for (int i = 0; i < m_; ++i) {
            const int a = n_struct_ + n_slack_ + i;
            art_sign_[i] = resid[i] >= 0.0 ? 1.0 : -1.0;
            col_val_[col_index_[a]] = art_sign_[i];
            col_row_[col_index_[a]] = i;
            lo_[a] = 0.0;
            hi_[a] = kLpInf;
            basis_[i] = a;
            state_[a] = kBasic;
            beta_[i] = std::fabs(resid[i]);
        }

        if (m_ == 0) return solve_unconstrained();

        // Tableau over active nonbasic columns, column-major.
        const int cap = n_struct_ + n_slack_;
        tab_.assign(static_cast<std::size_t>(cap) * m_, 0.0);
        slot_var_.clear();
        var_slot_.assign(n_vars_, -1);
        for (int j = 0; j < n_struct_ + n_slack_; ++j) {
            if (state_[j] == kFixed) continue;
            const int s = static_cast<int>(slot_var_.size());
            slot_var_.push_back(j);
            var_slot_[j] = s;
            double* col = tab_.data() + static_cast<std::size_t>(s) * m_;
            for (int k = col_index_[j]; k < col_index_[j + 1]; ++k) {
                col[col_row_[k]] = col_val_[k] * art_sign_[col_row_[k]];
            }
        }
        n_active_ = static_cast<int>(slot_var_.size());

        double bscale = 1.0;
        for (int i = 0; i < m_; ++i) bscale = std::max(bscale, std::fabs(rhs_[i]));

        // Phase 1: minimize the sum of artificials.
        phase1_ = true;
        dcost_.assign(static_cast<std::size_t>(cap), 0.0);
        for (int s = 0; s < n_active_; ++s) {
            const double* col = tab_.data() + static_cast<std::size_t>(s) * m_;
            double sum = 0.0;
            for (int i = 0; i < m_; ++i) sum += col[i];
            dcost_[s] = -sum;
        }
        if (!iterate()) throw Error("simplex iteration limit exceeded (phase 1)");

        double infeas = 0.0;
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] >= n_struct_ + n_slack_) infeas += beta_[i];
        }
        if (infeas > 1e-7 * bscale) {
            sol.status = LpStatus::infeasible;
            return sol;
        }

        // Pivot zero-valued artificials out where possible; rows that cannot
        // pivot are redundant and keep a pinned artificial.
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < n_struct_ + n_slack_) continue;
            int best = -1;
            double best_mag = kPivotTol;
            for (int s = 0; s < n_active_; ++s) {
                const double v = std::fabs(tab_[static_cast<std::size_t>(s) * m_ + i]);
                if (v > best_mag) {
                    best_mag = v;
                    best = s;
                }
            }
            if (best >= 0) {
                pivot(i, best, 0.0, +1, true);
            } else {
                lo_[basis_[i]] = hi_[basis_[i]] = 0.0;
            }
        }
        // Any artificial still nonbasic is pinned for phase 2. They never got
        // tableau slots, so nothing to remove.
        for (int a = n_struct_ + n_slack_; a < n_vars_; ++a) {
            if (state_[a] != kBasic) {
                state_[a] = kFixed;
                xval_[a] = 0.0;
            }
        }

        // Phase 2: true costs.
        phase1_ = false;
        for (int s = 0; s < n_active_; ++s) {
            const int j = slot_var_[s];
            const double* col = tab_.data() + static_cast<std::size_t>(s) * m_;
            double sum = cost_[j];
            for (int i = 0; i < m_; ++i) {
                if (cost_[basis_[i]] != 0.0) sum -= cost_[basis_[i]] * col[i];
            }
            dcost_[s] = sum;
        }
        if (!iterate()) throw Error("simplex iteration limit exceeded (phase 2)");

        if (unbounded_) {
            sol.status = LpStatus::unbounded;
            sol.objective_value = -kLpInf;
            return sol;
        }

        sol.status = LpStatus::optimal;
        sol.x.assign(n_struct_, 0.0);
        for (int j = 0; j < n_struct_; ++j) sol.x[j] = xval_[j];
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < n_struct_) sol.x[basis_[i]] = beta_[i];
        }
        double obj = 0.0;
        for (int j = 0; j < n_struct_; ++j) obj += cost_[j] * sol.x[j];
        sol.objective_value = obj;
        return sol;
    }

private:
    LPSolution solve_unconstrained() {
        LPSolution sol;
        sol.x.assign(n_struct_, 0.0);
        double obj = 0.0;
        for (int j = 0; j < n_struct_; ++j) {
            double v;
            if (cost_[j] > 0.0) {
                if (lo_[j] <= -kLpInf) {
                    sol.status = LpStatus::unbounded;
                    sol.objective_value = -kLpInf;
                    return sol;
                }
                v = lo_[j];
            } else if (cost_[j] < 0.0) {
                if (hi_[j] >= kLpInf) {
                    sol.status = LpStatus::unbounded;
                    sol.objective_value = -kLpInf;
                    return sol;
                }
                v = hi_[j];
            } else {
                v = lo_[j] > -kLpInf ? lo_[j] : (hi_[j] < kLpInf ? hi_[j] : 0.0);
            }
            sol.x[j] = v;
            obj += cost_[j] * v;
        }
        sol.status = LpStatus::optimal;
        sol.objective_value = obj;
        return sol;
    }

    // One simplex phase. Returns false if the iteration cap was hit.
    bool iterate() {
        unbounded_ = false;
        const long max_iters = 200L * (m_ + n_active_) + 20000L;
        int degenerate_run = 0;
        bool bland = false;

        for (long iter = 0; iter < max_iters; ++iter) {
            // Pricing.
            int slot = -1;
            int dir = +1;
            if (!bland) {
                double best = kDualTol;
                int best_var = std::numeric_limits<int>::max();
                for (int s = 0; s < n_active_; ++s) {
                    const auto st = state_[slot_var_[s]];
                    const double d = dcost_[s];
                    double score = 0.0;
                    if ((st == kAtLower || st == kFreeNb) && d < -kDualTol) {
                        score = -d;
                    } else if ((st == kAtUpper || st == kFreeNb) && d > kDualTol) {
                        score = d;
                    }
                    if (score > best ||
                        (score == best && slot >= 0 && slot_var_[s] < best_var)) {
                        best = score;
                        slot = s;
                        best_var = slot_var_[s];
                        dir = d < 0.0 ? +1 : -1;
                    }
                }
            } else {
                int best_var = std::numeric_limits<int>::max();
                for (int s = 0; s < n_active_; ++s) {
                    const auto st = state_[slot_var_[s]];
                    const double d = dcost_[s];
                    int cand_dir = 0;
                    if ((st == kAtLower || st == kFreeNb) && d < -kDualTol) {
                        cand_dir = +1;
                    } else if ((st == kAtUpper || st == kFreeNb) && d > kDualTol) {
                        cand_dir = -1;
                    }
                    if (cand_dir != 0 && slot_var_[s] < best_var) {
                        best_var = slot_var_[s];
                        slot = s;
                        dir = cand_dir;
                    }
                }
            }
            if (slot < 0) return true;  // optimal for this phase

            const int q = slot_var_[slot];
            const double* col = tab_.data() + static_cast<std::size_t>(slot) * m_;

            // Ratio test: how far can x_q move in direction dir?
            double t_limit = kLpInf;
            if (lo_[q] > -kLpInf && hi_[q] < kLpInf) t_limit = hi_[q] - lo_[q];
            double t_best = t_limit;
            int row = -1;
            for (int i = 0; i < m_; ++i) {
                const double rate = -dir * col[i];
                if (std::fabs(rate) <= kPivotTol) continue;
                const int vb = basis_[i];
                double t;
                if (rate > 0.0) {
                    if (hi_[vb] >= kLpInf) continue;
                    t = (hi_[vb] - beta_[i]) / rate;
                } else {
                    if (lo_[vb] <= -kLpInf) continue;
                    t = (lo_[vb] - beta_[i]) / rate;
                }
                if (t < 0.0) t = 0.0;
                const double near = t_best < kLpInf ? 1e-12 * (1.0 + t_best) : 0.0;
                if (t < t_best - near) {
                    t_best = t;
                    row = i;
                } else if (row >= 0 && t <= t_best + near) {
                    // Stability tie-break: bigger pivot, then lower var index.
                    const double cur = std::fabs(col[row]);
                    const double alt = std::fabs(col[i]);
                    if (alt > cur * (1.0 + 1e-9) ||
                        (alt >= cur * (1.0 - 1e-9) && vb < basis_[row])) {
                        row = i;
                    }
                }
            }

            if (t_best >= kLpInf) {
                if (phase1_) throw Error("phase-1 subproblem unbounded");
                unbounded_ = true;
                return true;
            }

            if (row < 0) {
                // Entering variable runs to its opposite bound: bound flip.
                const double t = t_best;
                for (int i = 0; i < m_; ++i) beta_[i] -= dir * t * col[i];
                if (state_[q] == kAtLower) {
                    state_[q] = kAtUpper;
                    xval_[q] = hi_[q];
                } else {
                    state_[q] = kAtLower;
                    xval_[q] = lo_[q];
                }
                continue;
            }

            if (t_best <= 1e-10) {
                if (++degenerate_run >= kDegenerateLimit) bland = true;
            } else {
                degenerate_run = 0;
                if (bland) bland = false;
            }

            pivot(row, slot, t_best, dir, false);
        }
        return false;
    }

    /// Pivot: entering var at `slot` moves t in direction dir, blocked by
    /// basic row `row`. When fix_leaving is set (phase-1 cleanup) the leaving
    /// variable is pinned and its slot discarded.
    void pivot(int row, int slot, double t, int dir, bool fix_leaving) {
        const int q = slot_var_[slot];
        const int p = basis_[row];
        double* colq = tab_.data() + static_cast<std::size_t>(slot) * m_;
        const double pv = colq[row];

        // Move the basic values.
        if (t != 0.0) {
            for (int i = 0; i < m_; ++i) beta_[i] -= dir * t * colq[i];
        }
        const double enter_value = xval_[q] + dir * t;

        // Where does the leaving variable land?
        const bool leaves_to_upper = (-dir * pv) > 0.0;
        const bool is_artificial = p >= n_struct_ + n_slack_;

        // Gauss-Jordan column update: for every other active column j with
        // pivot-row entry s, col_j -= s/pv * col_q, and the pivot-row entry
        // becomes s/pv. Column q itself turns into the leaving variable's
        // tableau column (the eta column).
        const double inv = 1.0 / pv;
        entering_copy_.assign(colq, colq + m_);
        const double dq = dcost_[slot];
        for (int s = 0; s < n_active_; ++s) {
            if (s == slot) continue;
            double* col = tab_.data() + static_cast<std::size_t>(s) * m_;
            const double factor = col[row] * inv;
            if (factor != 0.0) {
                const double* e = entering_copy_.data();
                for (int i = 0; i < m_; ++i) col[i] -= factor * e[i];
                col[row] = factor;
                dcost_[s] -= dq * factor;
            }
        }
        for (int i = 0; i < m_; ++i) colq[i] = -entering_copy_[i] * inv;
        colq[row] = inv;
        dcost_[slot] = -dq * inv;

        basis_[row] = q;
        state_[q] = kBasic;
        beta_[row] = enter_value;

        slot_var_[slot] = p;
        var_slot_[p] = slot;
        var_slot_[q] = -1;
        if (fix_leaving || (phase1_ && is_artificial)) {
            state_[p] = kFixed;
            xval_[p] = 0.0;
            lo_[p] = hi_[p] = 0.0;
            drop_slot(slot);
        } else {
            if (lo_[p] == hi_[p]) {
                state_[p] = kFixed;
                xval_[p] = lo_[p];
                drop_slot(slot);
            } else if (leaves_to_upper && hi_[p] < kLpInf) {
                state_[p] = kAtUpper;
                xval_[p] = hi_[p];
            } else if (!leaves_to_upper && lo_[p] > -kLpInf) {
                state_[p] = kAtLower;
                xval_[p] = lo_[p];
            } else {
                // Numerical corner: snap to whichever bound exists.
                if (lo_[p] > -kLpInf) {
                    state_[p] = kAtLower;
                    xval_[p] = lo_[p];
                } else if (hi_[p] < kLpInf) {
                    state_[p] = kAtUpper;
                    xval_[p] = hi_[p];
                } else {
                    state_[p] = kFreeNb;
                    xval_[p] = 0.0;
                }
            }
        }
    }

    void drop_slot(int slot) {
        const int last = n_active_ - 1;
        const int v = slot_var_[slot];
        if (slot != last) {
            double* dst = tab_.data() + static_cast<std::size_t>(slot) * m_;
            const double* src = tab_.data() + static_cast<std::size_t>(last) * m_;
            std::copy(src, src + m_, dst);
            slot_var_[slot] = slot_var_[last];
            var_slot_[slot_var_[slot]] = slot;
            dcost_[slot] = dcost_[last];
        }
        var_slot_[v] = -1;
        slot_var_.pop_back();
        --n_active_;
    }

    int m_ = 0;
    int n_struct_ = 0;
    int n_slack_ = 0;
    int n_vars_ = 0;

    std::vector<double> lo_, hi_, cost_, rhs_;
    std::vector<int> col_index_, col_row_;
    std::vector<double> col_val_;
    std::vector<double> art_sign_;

    std::vector<signed char> state_;
    std::vector<double> xval_;
    std::vector<int> basis_;
    std::vector<double> beta_;
    std::vector<double> tab_;
    std::vector<int> slot_var_, var_slot_;
    std::vector<double> dcost_;
    std::vector<double> entering_copy_;
    int n_active_ = 0;
    bool phase1_ = true;
    bool unbounded_ = false;
};

}  // namespace detail

/// Solves the program with a deterministic pivot rule. Optimal solutions are
/// feasible within 1e-7 (scaled) and optimal within the same tolerance.
inline LPSolution solve(const LinearProgram& lp) {
    validate(lp);
    detail::SimplexSolver solver(lp);
    return solver.solve();
}

}  // namespace mgsim
