#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <utility>
#include <vector>

namespace traits::detail {

// Dense two-phase primal simplex for small LPs:
//   minimize c.x  s.t.  A x {<=,>=,==} b,  x >= 0
// Dantzig pricing with a Bland fallback against cycling. Problem sizes here
// stay in the hundreds of rows/columns, so a tableau implementation is fine.
class LinearProgram {
public:
    explicit LinearProgram(int num_vars) : n_(num_vars), c_(num_vars, 0.0) {}

    void set_objective(int var, double coeff) { c_[var] = coeff; }

    void add_objective(int var, double coeff) { c_[var] += coeff; }

    // terms: sparse (var, coeff) list; sense: '<', '>' or '='.
    // basic_hint names a variable with coefficient +1 that appears in no
    // other row; it seeds the starting basis so the row needs no artificial.
    void add_constraint(std::vector<std::pair<int, double>> terms, char sense, double rhs,
                        int basic_hint = -1) {
        rows_.push_back({std::move(terms), sense, rhs, basic_hint});
    }

    enum class Status { Optimal, Infeasible, Unbounded };

    struct Result {
        Status status = Status::Infeasible;
        double objective = 0.0;
        std::vector<double> x;
    };

    Result solve() const {
        const int m = static_cast<int>(rows_.size());
        // column layout: [structural | slack/surplus | artificial]
        int num_slack = 0;
        for (const auto& r : rows_) num_slack += (r.sense != '=');
        std::vector<int> artificial_of(m, -1);

        // rows that start infeasible under the slack basis need an
        // artificial, unless a basic hint covers them
        int num_art = 0;
        for (const auto& r : rows_) {
            const double b = r.rhs;
            const bool needs =
                r.sense == '=' || (r.sense == '>' && b > 0.0) || (r.sense == '<' && b < 0.0);
            if (needs && !(r.basic_hint >= 0 && b >= 0.0)) ++num_art;
        }
        const int total = n_ + num_slack + num_art;
        std::vector<std::vector<double>> t(m + 1, std::vector<double>(total + 1, 0.0));
        std::vector<int> basis(m, -1);

        int slack_at = n_, art_at = n_ + num_slack;
        for (int i = 0; i < m; ++i) {
            const auto& r = rows_[i];
            double sign = 1.0;
            // normalize rhs >= 0
            char sense = r.sense;
            double b = r.rhs;
            if (b < 0.0) {
                sign = -1.0;
                b = -b;
                if (sense == '<') sense = '>';
                else if (sense == '>') sense = '<';
            }
            for (auto [v, coef] : r.terms) t[i][v] += sign * coef;
            t[i][total] = b;
            if (r.sense != '=') {
                const double s = (sense == '<') ? 1.0 : -1.0;
                t[i][slack_at] = s;
                if (s > 0.0) basis[i] = slack_at;
                ++slack_at;
            }
            if (basis[i] < 0 && r.basic_hint >= 0 && sign > 0.0 &&
                std::abs(t[i][r.basic_hint] - 1.0) < 1e-12)
                basis[i] = r.basic_hint;
            if (basis[i] < 0) {
                t[i][art_at] = 1.0;
                basis[i] = art_at;
                artificial_of[i] = art_at;
                ++art_at;
            }
        }

        // phase 1: minimize sum of artificials
        if (num_art > 0) {
            auto& obj = t[m];
            std::fill(obj.begin(), obj.end(), 0.0);
            for (int col = n_ + num_slack; col < total; ++col) obj[col] = 1.0;
            for (int i = 0; i < m; ++i)
                if (artificial_of[i] >= 0)
                    for (int jcol = 0; jcol <= total; ++jcol) obj[jcol] -= t[i][jcol];
            if (!run_simplex(t, basis, total)) return {Status::Unbounded, 0.0, {}};
            if (t[m][total] < -1e-7) return {Status::Infeasible, 0.0, {}};
            // pivot remaining artificials out of the basis where possible
            for (int i = 0; i < m; ++i) {
                if (basis[i] < n_ + num_slack) continue;
                int enter = -1;
                for (int jcol = 0; jcol < n_ + num_slack; ++jcol)
                    if (std::abs(t[i][jcol]) > 1e-9) {
                        enter = jcol;
                        break;
                    }
                if (enter >= 0)
                    pivot(t, basis, i, enter, total);
                else
                    t[i][total] = 0.0;  // degenerate row, keep artificial at zero
            }
        }

        // phase 2: artificials are barred from entering via the column limit
        auto& obj = t[m];
        std::fill(obj.begin(), obj.end(), 0.0);
        for (int v = 0; v < n_; ++v) obj[v] = c_[v];
        // express objective in terms of the current basis
        for (int i = 0; i < m; ++i) {
            if (basis[i] < 0 || std::abs(obj[basis[i]]) < 1e-15) continue;
            const double f = obj[basis[i]];
            for (int jcol = 0; jcol <= total; ++jcol) obj[jcol] -= f * t[i][jcol];
        }
        const int art_base = n_ + num_slack;
        if (!run_simplex(t, basis, total, art_base)) return {Status::Unbounded, 0.0, {}};

        Result res;
        res.status = Status::Optimal;
        res.x.assign(n_, 0.0);
        for (int i = 0; i < m; ++i)
            if (basis[i] >= 0 && basis[i] < n_) res.x[basis[i]] = t[i][total];
        res.objective = 0.0;
        for (int v = 0; v < n_; ++v) res.objective += c_[v] * res.x[v];
        return res;
    }

private:
    struct Row {
        std::vector<std::pair<int, double>> terms;
        char sense;
        double rhs;
        int basic_hint = -1;
    };

    static void pivot(std::vector<std::vector<double>>& t, std::vector<int>& basis, int prow, int pcol,
                      int total) {
        const int m = static_cast<int>(basis.size());
        const double pv = t[prow][pcol];
        for (int jcol = 0; jcol <= total; ++jcol) t[prow][jcol] /= pv;
        for (int row = 0; row <= m; ++row) {
            if (row == prow) continue;
            const double f = t[row][pcol];
            if (std::abs(f) < 1e-13) continue;
            for (int jcol = 0; jcol <= total; ++jcol) t[row][jcol] -= f * t[prow][jcol];
        }
        basis[prow] = pcol;
    }

    // Minimizes the objective row in place. `col_limit` excludes columns at or
    // beyond it from entering (used to bar artificials in phase 2).
    static bool run_simplex(std::vector<std::vector<double>>& t, std::vector<int>& basis, int total,
                            int col_limit = -1) {
        const int m = static_cast<int>(basis.size());
        const int limit = col_limit < 0 ? total : col_limit;
        const long max_iters = 200L * (m + total + 10);
        long stall = 0;
        for (long it = 0; it < max_iters; ++it) {
            // pricing: Dantzig, then Bland once degeneracy drags on
            int enter = -1;
            const bool bland = stall > 2L * (m + 5);
            double best = -1e-9;
            for (int jcol = 0; jcol < limit; ++jcol) {
                const double rc = t[m][jcol];
                if (rc < -1e-9) {
                    if (bland) {
                        enter = jcol;
                        break;
                    }
                    if (rc < best) {
                        best = rc;
                        enter = jcol;
                    }
                }
            }
            if (enter < 0) return true;  // optimal
            int leave = -1;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i) {
                if (t[i][enter] > 1e-9) {
                    const double ratio = t[i][total] / t[i][enter];
                    if (ratio < best_ratio - 1e-12 ||
                        (ratio < best_ratio + 1e-12 && (leave < 0 || basis[i] < basis[leave]))) {
                        best_ratio = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0) return false;  // unbounded
            stall = best_ratio < 1e-10 ? stall + 1 : 0;
            pivot(t, basis, leave, enter, total);
        }
        return true;  // iteration cap: return the current (feasible) point
    }

    int n_;
    std::vector<double> c_;
    std::vector<Row> rows_;
};

}  // namespace traits::detail
