#include "esom/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace esom {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kFeasTol = 1e-9;

// Standard-form problem: min c.x s.t. Tx = b (b >= 0 after row flips), x >= 0.
// Columns: structural | slack/surplus | artificial. Dense row-major tableau.
struct Tableau {
    std::size_t m = 0, n = 0;      // rows, total columns (excluding rhs)
    std::size_t n_struct = 0;      // structural columns
    std::size_t art_begin = 0;     // first artificial column
    std::vector<double> a;         // m x n
    std::vector<double> rhs;       // m
    std::vector<double> cost;      // n, phase-2 costs
    std::vector<int> basis;        // m, column basic in each row

    double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

void pivot(Tableau& t, std::size_t row, std::size_t col, std::vector<double>& red,
           double& obj, std::vector<double>& red2, double& obj2, bool dual_phase) {
    double piv = t.at(row, col);
    double inv = 1.0 / piv;
    for (std::size_t j = 0; j < t.n; ++j) t.at(row, j) *= inv;
    t.rhs[row] *= inv;
    t.at(row, col) = 1.0;
    for (std::size_t i = 0; i < t.m; ++i) {
        if (i == row) continue;
        double f = t.at(i, col);
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < t.n; ++j) t.at(i, j) -= f * t.at(row, j);
        t.at(i, col) = 0.0;
        t.rhs[i] -= f * t.rhs[row];
        if (t.rhs[i] < 0.0 && t.rhs[i] > -kFeasTol) t.rhs[i] = 0.0;
    }
    double f = red[col];
    if (f != 0.0) {
        for (std::size_t j = 0; j < t.n; ++j) red[j] -= f * t.at(row, j);
        red[col] = 0.0;
        obj -= f * t.rhs[row];
    }
    if (dual_phase) {
        double g = red2[col];
        if (g != 0.0) {
            for (std::size_t j = 0; j < t.n; ++j) red2[j] -= g * t.at(row, j);
            red2[col] = 0.0;
            obj2 -= g * t.rhs[row];
        }
    }
    t.basis[row] = static_cast<int>(col);
}

// Runs simplex iterations on the given reduced-cost row. Artificials are
// barred from entering once `bar_artificials` is set.
LpStatus iterate(Tableau& t, std::vector<double>& red, double& obj, std::vector<double>& red2,
                 double& obj2, bool track_second, bool bar_artificials, std::size_t max_iter,
                 std::size_t& iters) {
    std::size_t since_improve = 0;
    double last_obj = obj;
    bool bland = false;
    while (iters < max_iter) {
        std::size_t limit = bar_artificials ? t.art_begin : t.n;
        int enter = -1;
        if (!bland) {
            double best = -kCostTol;
            for (std::size_t j = 0; j < limit; ++j)
                if (red[j] < best) {
                    best = red[j];
                    enter = static_cast<int>(j);
                }
        } else {
            for (std::size_t j = 0; j < limit; ++j)
                if (red[j] < -kCostTol) {
                    enter = static_cast<int>(j);
                    break;
                }
        }
        if (enter < 0) return LpStatus::Optimal;

        int leave = -1;
        double best_ratio = 0.0;
        for (std::size_t i = 0; i < t.m; ++i) {
            double aij = t.at(i, static_cast<std::size_t>(enter));
            if (aij > kPivotTol) {
                double ratio = t.rhs[i] / aij;
                if (leave < 0 || ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && t.basis[i] < t.basis[leave])) {
                    leave = static_cast<int>(i);
                    best_ratio = ratio;
                }
            }
        }
        if (leave < 0) return LpStatus::Unbounded;

        pivot(t, static_cast<std::size_t>(leave), static_cast<std::size_t>(enter), red, obj, red2,
              obj2, track_second);
        ++iters;

        if (obj < last_obj - 1e-12) {
            last_obj = obj;
            since_improve = 0;
        } else if (++since_improve > 2 * (t.m + t.n)) {
            bland = true;  // degeneracy streak: switch to Bland's rule for finiteness
        }
    }
    return LpStatus::IterationLimit;
}

}  // namespace

LpResult solve_simplex(const LinearProgram& lp, std::size_t max_iterations) {
    const std::size_t nv = lp.variables.size();

    // Map each instance variable to nonnegative standard-form columns:
    // finite lower -> shift; free -> split into positive and negative parts.
    struct VarMap {
        int col_pos = -1;
        int col_neg = -1;  // only for free variables
        double shift = 0.0;
    };
    std::vector<VarMap> vmap(nv);
    std::size_t n_struct = 0;
    for (std::size_t j = 0; j < nv; ++j) {
        const auto& v = lp.variables[j];
        if (v.lower > v.upper)
            return LpResult{LpStatus::Infeasible, {}, {}, 0.0, 0.0, 0};
        if (std::isfinite(v.lower)) {
            vmap[j].col_pos = static_cast<int>(n_struct++);
            vmap[j].shift = v.lower;
        } else if (std::isfinite(v.upper)) {
            // mirror: x = upper - x', x' >= 0
            vmap[j].col_neg = static_cast<int>(n_struct++);
            vmap[j].shift = v.upper;
        } else {
            vmap[j].col_pos = static_cast<int>(n_struct++);
            vmap[j].col_neg = static_cast<int>(n_struct++);
        }
    }

    // Rows: instance constraints, then finite upper bounds of shifted vars.
    struct Row {
        std::vector<LinTerm> terms;  // in standard-form columns
        Sense sense;
        double rhs;
    };
    std::vector<Row> rows;
    rows.reserve(lp.constraints.size());
    double shift_cost = lp.objective_offset;

    auto expand = [&](const std::vector<LinTerm>& terms, double rhs0, Sense sense) {
        Row r;
        r.sense = sense;
        double rhs = rhs0;
        for (const auto& term : terms) {
            const auto& mp = vmap[static_cast<std::size_t>(term.var)];
            rhs -= term.coef * mp.shift;
            if (mp.col_pos >= 0 && mp.col_neg >= 0) {  // free split
                r.terms.push_back({mp.col_pos, term.coef});
                r.terms.push_back({mp.col_neg, -term.coef});
            } else if (mp.col_pos >= 0) {
                r.terms.push_back({mp.col_pos, term.coef});
            } else {
                r.terms.push_back({mp.col_neg, -term.coef});
            }
        }
        r.rhs = rhs;
        return r;
    };

    for (const auto& c : lp.constraints) rows.push_back(expand(c.terms, c.rhs, c.sense));
    for (std::size_t j = 0; j < nv; ++j) {
        const auto& v = lp.variables[j];
        if (std::isfinite(v.lower) && std::isfinite(v.upper)) {
            if (v.upper - v.lower < kFeasTol) {
                rows.push_back(Row{{{vmap[j].col_pos, 1.0}}, Sense::Equal, 0.0});
            } else {
                rows.push_back(Row{{{vmap[j].col_pos, 1.0}}, Sense::LessEqual, v.upper - v.lower});
            }
        }
    }

    const std::size_t m = rows.size();

    // Equilibrate before pivoting: raw capacity-expansion data spans ~8
    // orders of magnitude and long pivot sequences drift badly without it.
    std::vector<double> row_scale(m, 1.0), col_scale(n_struct, 1.0);
    for (std::size_t i = 0; i < m; ++i) {
        double lo = kInf, hi = 0.0;
        for (const auto& term : rows[i].terms) {
            double a = std::abs(term.coef);
            if (a > 0.0) {
                lo = std::min(lo, a);
                hi = std::max(hi, a);
            }
        }
        if (hi == 0.0) continue;
        double s = std::sqrt(lo * hi);
        if (!(s > 0.0) || !std::isfinite(s)) continue;
        for (auto& term : rows[i].terms) term.coef /= s;
        rows[i].rhs /= s;
        row_scale[i] = s;
    }
    {
        std::vector<double> chi(n_struct, 0.0), clo(n_struct, kInf);
        for (const auto& r : rows)
            for (const auto& term : r.terms) {
                double a = std::abs(term.coef);
                if (a > 0.0) {
                    auto j = static_cast<std::size_t>(term.var);
                    chi[j] = std::max(chi[j], a);
                    clo[j] = std::min(clo[j], a);
                }
            }
        for (std::size_t j = 0; j < n_struct; ++j) {
            if (chi[j] == 0.0) continue;
            double s = std::sqrt(clo[j] * chi[j]);
            if (s > 0.0 && std::isfinite(s)) col_scale[j] = s;
        }
        for (auto& r : rows)
            for (auto& term : r.terms) term.coef /= col_scale[static_cast<std::size_t>(term.var)];
    }
    // Even out rhs magnitudes so horizon-total rows do not dominate.
    {
        std::vector<double> mags;
        for (std::size_t i = 0; i < m; ++i)
            if (rows[i].rhs != 0.0) mags.push_back(std::abs(rows[i].rhs));
        if (!mags.empty()) {
            std::nth_element(mags.begin(), mags.begin() + static_cast<long>(mags.size() / 2),
                             mags.end());
            double ref = std::max(1.0, mags[mags.size() / 2]);
            for (std::size_t i = 0; i < m; ++i) {
                double s = std::abs(rows[i].rhs) / ref;
                if (s > 1.0) {
                    for (auto& term : rows[i].terms) term.coef /= s;
                    rows[i].rhs /= s;
                    row_scale[i] *= s;
                }
            }
        }
    }

    // Count slack and artificial columns after normalizing rhs >= 0.
    std::size_t n_slack = 0, n_art = 0;
    std::vector<int> row_flip(m, 1);
    for (std::size_t i = 0; i < m; ++i) {
        if (rows[i].rhs < 0.0) {
            row_flip[i] = -1;
            rows[i].rhs = -rows[i].rhs;
            for (auto& t : rows[i].terms) t.coef = -t.coef;
            if (rows[i].sense == Sense::LessEqual)
                rows[i].sense = Sense::GreaterEqual;
            else if (rows[i].sense == Sense::GreaterEqual)
                rows[i].sense = Sense::LessEqual;
        }
        if (rows[i].sense != Sense::Equal) ++n_slack;
        if (rows[i].sense != Sense::LessEqual) ++n_art;
    }

    Tableau t;
    t.m = m;
    t.n_struct = n_struct;
    t.n = n_struct + n_slack + n_art;
    t.art_begin = n_struct + n_slack;
    t.a.assign(t.m * t.n, 0.0);
    t.rhs.resize(m);
    t.cost.assign(t.n, 0.0);
    t.basis.assign(m, -1);

    for (std::size_t j = 0; j < nv; ++j) {
        const auto& v = lp.variables[j];
        const auto& mp = vmap[j];
        if (mp.col_pos >= 0 && mp.col_neg >= 0) {
            t.cost[static_cast<std::size_t>(mp.col_pos)] = v.cost / col_scale[static_cast<std::size_t>(mp.col_pos)];
            t.cost[static_cast<std::size_t>(mp.col_neg)] = -v.cost / col_scale[static_cast<std::size_t>(mp.col_neg)];
        } else if (mp.col_pos >= 0) {
            t.cost[static_cast<std::size_t>(mp.col_pos)] = v.cost / col_scale[static_cast<std::size_t>(mp.col_pos)];
            shift_cost += v.cost * mp.shift;
        } else {
            t.cost[static_cast<std::size_t>(mp.col_neg)] = -v.cost / col_scale[static_cast<std::size_t>(mp.col_neg)];
            shift_cost += v.cost * mp.shift;
        }
    }
    double cost_scale = 1.0;
    for (std::size_t j = 0; j < n_struct; ++j) cost_scale = std::max(cost_scale, std::abs(t.cost[j]));
    for (std::size_t j = 0; j < n_struct; ++j) t.cost[j] /= cost_scale;

    std::size_t slack_at = n_struct, art_at = t.art_begin;
    std::vector<int> slack_of_row(m, -1), art_of_row(m, -1);
    std::vector<double> phase1(t.n, 0.0);
    double p1_obj = 0.0;

    for (std::size_t i = 0; i < m; ++i) {
        for (const auto& term : rows[i].terms)
            t.at(i, static_cast<std::size_t>(term.var)) += term.coef;
        t.rhs[i] = rows[i].rhs;
        if (rows[i].sense == Sense::LessEqual) {
            slack_of_row[i] = static_cast<int>(slack_at);
            t.at(i, slack_at) = 1.0;
            t.basis[i] = static_cast<int>(slack_at);
            ++slack_at;
        } else if (rows[i].sense == Sense::GreaterEqual) {
            slack_of_row[i] = static_cast<int>(slack_at);
            t.at(i, slack_at) = -1.0;
            ++slack_at;
            art_of_row[i] = static_cast<int>(art_at);
            t.at(i, art_at) = 1.0;
            t.basis[i] = static_cast<int>(art_at);
            ++art_at;
        } else {
            art_of_row[i] = static_cast<int>(art_at);
            t.at(i, art_at) = 1.0;
            t.basis[i] = static_cast<int>(art_at);
            ++art_at;
        }
    }

    // Phase-1 reduced costs: minimize sum of artificials.
    for (std::size_t i = 0; i < m; ++i) {
        if (art_of_row[i] < 0) continue;
        for (std::size_t j = 0; j < t.n; ++j) phase1[j] -= t.at(i, j);
        p1_obj -= t.rhs[i];
        phase1[static_cast<std::size_t>(art_of_row[i])] += 1.0;
    }
    // Phase-2 reduced costs relative to the initial basis (costs all zero there).
    std::vector<double> red2(t.cost);
    double p2_obj = 0.0;

    LpResult result;
    std::size_t iters = 0;

    bool need_phase1 = art_at > t.art_begin;
    if (need_phase1) {
        LpStatus st = iterate(t, phase1, p1_obj, red2, p2_obj, true, false, max_iterations, iters);
        if (st == LpStatus::IterationLimit) {
            result.status = st;
            result.iterations = iters;
            return result;
        }
        if (-p1_obj > 1e-7 * (1.0 + std::abs(p1_obj))) {  // leftover infeasibility
            result.status = LpStatus::Infeasible;
            result.iterations = iters;
            return result;
        }
        // Pivot remaining artificials out of the basis where a nonzero row
        // element exists; rows that stay artificial-basic are redundant (rhs 0).
        for (std::size_t i = 0; i < m; ++i) {
            if (t.basis[i] < static_cast<int>(t.art_begin)) continue;
            int col = -1;
            for (std::size_t j = 0; j < t.art_begin; ++j)
                if (std::abs(t.at(i, j)) > 1e-7) {
                    col = static_cast<int>(j);
                    break;
                }
            if (col >= 0)
                pivot(t, i, static_cast<std::size_t>(col), phase1, p1_obj, red2, p2_obj, true);
        }
    }

    LpStatus st = iterate(t, red2, p2_obj, phase1, p1_obj, false, true, max_iterations, iters);
    result.status = st;
    result.iterations = iters;
    if (st != LpStatus::Optimal) return result;

    // Basis repair: long pivot sequences accumulate drift in the tableau, so
    // the final basic values come from refactorizing the basis against the
    // pristine standard-form data. Nonbasic columns sit at zero.
    std::vector<double> xs(t.n, 0.0);
    {
        std::vector<double> bmat(m * m, 0.0);
        std::vector<double> brhs(m);
        auto scatter_col = [&](int col, std::size_t into) {
            for (std::size_t i = 0; i < m; ++i) {
                if (slack_of_row[i] == col) bmat[i * m + into] = rows[i].sense == Sense::LessEqual ? 1.0 : -1.0;
                else if (art_of_row[i] == col) bmat[i * m + into] = 1.0;
            }
            if (col < static_cast<int>(n_struct))
                for (std::size_t i = 0; i < m; ++i)
                    for (const auto& term : rows[i].terms)
                        if (term.var == col) bmat[i * m + into] += term.coef;
        };
        for (std::size_t i = 0; i < m; ++i) {
            scatter_col(t.basis[i], i);
            brhs[i] = rows[i].rhs;
        }
        // Dense LU with partial pivoting.
        std::vector<int> perm(m);
        bool singular = false;
        for (std::size_t col = 0; col < m && !singular; ++col) {
            std::size_t piv = col;
            for (std::size_t r2 = col + 1; r2 < m; ++r2)
                if (std::abs(bmat[r2 * m + col]) > std::abs(bmat[piv * m + col])) piv = r2;
            if (std::abs(bmat[piv * m + col]) < 1e-12) {
                singular = true;
                break;
            }
            if (piv != col) {
                for (std::size_t k = 0; k < m; ++k) std::swap(bmat[piv * m + k], bmat[col * m + k]);
                std::swap(brhs[piv], brhs[col]);
            }
            for (std::size_t r2 = col + 1; r2 < m; ++r2) {
                double f = bmat[r2 * m + col] / bmat[col * m + col];
                if (f == 0.0) continue;
                for (std::size_t k = col; k < m; ++k) bmat[r2 * m + k] -= f * bmat[col * m + k];
                brhs[r2] -= f * brhs[col];
            }
            perm[col] = static_cast<int>(col);
        }
        (void)perm;
        if (!singular) {
            std::vector<double> xb(m);
            for (std::size_t ip = m; ip-- > 0;) {
                double s = brhs[ip];
                for (std::size_t k = ip + 1; k < m; ++k) s -= bmat[ip * m + k] * xb[k];
                xb[ip] = s / bmat[ip * m + ip];
            }
            for (std::size_t i = 0; i < m; ++i)
                if (t.basis[i] >= 0) xs[static_cast<std::size_t>(t.basis[i])] = xb[i];
        } else {
            for (std::size_t i = 0; i < m; ++i)
                if (t.basis[i] >= 0) xs[static_cast<std::size_t>(t.basis[i])] = t.rhs[i];
        }
    }
    for (std::size_t j = 0; j < n_struct; ++j) xs[j] /= col_scale[j];
    result.x.resize(nv);
    for (std::size_t j = 0; j < nv; ++j) {
        const auto& mp = vmap[j];
        if (mp.col_pos >= 0 && mp.col_neg >= 0)
            result.x[j] = xs[static_cast<std::size_t>(mp.col_pos)] - xs[static_cast<std::size_t>(mp.col_neg)];
        else if (mp.col_pos >= 0)
            result.x[j] = xs[static_cast<std::size_t>(mp.col_pos)] + mp.shift;
        else
            result.x[j] = mp.shift - xs[static_cast<std::size_t>(mp.col_neg)];
    }
    result.objective = lp.objective_value(result.x);

    // Duals: with zero-cost logical columns, the final reduced cost of a row's
    // slack (or artificial, for equalities) is -y_i (+y_i for surplus).
    result.duals.assign(lp.constraints.size(), 0.0);
    double dual_obj = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double y;
        if (rows[i].sense == Sense::LessEqual)
            y = -red2[static_cast<std::size_t>(slack_of_row[i])];
        else if (rows[i].sense == Sense::GreaterEqual)
            y = red2[static_cast<std::size_t>(slack_of_row[i])];
        else
            y = -red2[static_cast<std::size_t>(art_of_row[i])];
        dual_obj += y * rows[i].rhs;
        if (i < lp.constraints.size())
            result.duals[i] = y * row_flip[i] * cost_scale / row_scale[i];
    }
    result.dual_objective = dual_obj * cost_scale + shift_cost;
    return result;
}

}  // namespace esom
