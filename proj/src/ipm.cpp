#include "esom/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

namespace esom {

namespace {

constexpr double kFixedTol = 1e-12;

// Standard form: min c.x  s.t.  A x = b,  0 <= x,  x_j <= u_j for boxed j.
// Columns = shifted structurals then slacks; fixed variables folded into b.
struct StdForm {
    std::size_t m = 0, n = 0;
    // CSR
    std::vector<int> row_ptr, col_idx;
    std::vector<double> val;
    // CSC
    std::vector<int> col_ptr, row_idx;
    std::vector<double> cval;

    std::vector<double> b, c, u;  // u = +inf when unboxed
    double offset = 0.0;

    std::vector<int> col_of_var;     // instance var -> column (-1 if fixed)
    std::vector<double> shift;       // x_orig = x_std + shift
    std::vector<double> fixed_value; // for fixed vars
    std::vector<int> row_of_con;     // instance constraint -> row (-1 if dropped)
    std::vector<int> slack_sign;     // per row: 0 none, +1 slack, -1 surplus
    std::vector<int> slack_col;      // per row: column of its slack, -1 if none

    bool infeasible_on_build = false;
};

bool build_std_form(const LinearProgram& lp, StdForm& sf) {
    const std::size_t nv = lp.variables.size();
    sf.col_of_var.assign(nv, -1);
    sf.shift.assign(nv, 0.0);
    sf.fixed_value.assign(nv, 0.0);
    sf.offset = lp.objective_offset;

    std::size_t n = 0;
    for (std::size_t j = 0; j < nv; ++j) {
        const auto& v = lp.variables[j];
        if (!std::isfinite(v.lower)) return false;  // free vars go to the simplex path
        if (v.lower > v.upper) {
            sf.infeasible_on_build = true;
            return true;
        }
        if (v.upper - v.lower <= kFixedTol) {
            sf.fixed_value[j] = v.lower;
            sf.offset += v.cost * v.lower;
        } else {
            sf.col_of_var[j] = static_cast<int>(n++);
            sf.shift[j] = v.lower;
        }
    }

    const std::size_t mc = lp.constraints.size();
    sf.row_of_con.assign(mc, -1);

    struct BuildRow {
        std::vector<LinTerm> terms;
        double rhs;
        int slack_sign;
    };
    std::vector<BuildRow> rows;
    rows.reserve(mc);
    for (std::size_t i = 0; i < mc; ++i) {
        const auto& con = lp.constraints[i];
        BuildRow r;
        r.rhs = con.rhs;
        for (const auto& t : con.terms) {
            auto j = static_cast<std::size_t>(t.var);
            if (sf.col_of_var[j] < 0) {
                r.rhs -= t.coef * sf.fixed_value[j];
            } else {
                r.rhs -= t.coef * sf.shift[j];
                r.terms.push_back({sf.col_of_var[j], t.coef});
            }
        }
        if (r.terms.empty()) {
            bool ok = (con.sense == Sense::LessEqual && r.rhs >= -1e-9) ||
                      (con.sense == Sense::GreaterEqual && r.rhs <= 1e-9) ||
                      (con.sense == Sense::Equal && std::abs(r.rhs) <= 1e-9);
            if (!ok) {
                sf.infeasible_on_build = true;
                return true;
            }
            continue;
        }
        r.slack_sign = con.sense == Sense::LessEqual ? 1 : (con.sense == Sense::GreaterEqual ? -1 : 0);
        sf.row_of_con[i] = static_cast<int>(rows.size());
        rows.push_back(std::move(r));
    }

    const std::size_t m = rows.size();
    sf.m = m;
    sf.slack_sign.resize(m);
    sf.slack_col.assign(m, -1);
    std::size_t n_slack = 0;
    for (const auto& r : rows) n_slack += r.slack_sign != 0;
    sf.n = n + n_slack;

    sf.b.resize(m);
    sf.c.assign(sf.n, 0.0);
    sf.u.assign(sf.n, kInf);
    for (std::size_t j = 0; j < nv; ++j) {
        int col = sf.col_of_var[j];
        if (col < 0) continue;
        const auto& v = lp.variables[j];
        sf.c[static_cast<std::size_t>(col)] = v.cost;
        sf.offset += v.cost * v.lower;
        if (std::isfinite(v.upper)) sf.u[static_cast<std::size_t>(col)] = v.upper - v.lower;
    }

    sf.row_ptr.assign(m + 1, 0);
    std::size_t slack_at = n;
    for (std::size_t i = 0; i < m; ++i) {
        sf.row_ptr[i + 1] = sf.row_ptr[i] + static_cast<int>(rows[i].terms.size()) +
                            (rows[i].slack_sign != 0 ? 1 : 0);
    }
    sf.col_idx.resize(static_cast<std::size_t>(sf.row_ptr[m]));
    sf.val.resize(sf.col_idx.size());
    for (std::size_t i = 0; i < m; ++i) {
        sf.b[i] = rows[i].rhs;
        sf.slack_sign[i] = rows[i].slack_sign;
        int at = sf.row_ptr[i];
        for (const auto& t : rows[i].terms) {
            sf.col_idx[static_cast<std::size_t>(at)] = t.var;
            sf.val[static_cast<std::size_t>(at)] = t.coef;
            ++at;
        }
        if (rows[i].slack_sign != 0) {
            sf.slack_col[i] = static_cast<int>(slack_at);
            sf.col_idx[static_cast<std::size_t>(at)] = static_cast<int>(slack_at);
            sf.val[static_cast<std::size_t>(at)] = static_cast<double>(rows[i].slack_sign);
            ++slack_at;
        }
    }

    // CSC from CSR.
    sf.col_ptr.assign(sf.n + 1, 0);
    for (int cj : sf.col_idx) ++sf.col_ptr[static_cast<std::size_t>(cj) + 1];
    for (std::size_t j = 0; j < sf.n; ++j) sf.col_ptr[j + 1] += sf.col_ptr[j];
    sf.row_idx.resize(sf.col_idx.size());
    sf.cval.resize(sf.col_idx.size());
    std::vector<int> fill(sf.col_ptr.begin(), sf.col_ptr.end() - 1);
    for (std::size_t i = 0; i < m; ++i)
        for (int k = sf.row_ptr[i]; k < sf.row_ptr[i + 1]; ++k) {
            int j = sf.col_idx[static_cast<std::size_t>(k)];
            int slot = fill[static_cast<std::size_t>(j)]++;
            sf.row_idx[static_cast<std::size_t>(slot)] = static_cast<int>(i);
            sf.cval[static_cast<std::size_t>(slot)] = sf.val[static_cast<std::size_t>(k)];
        }
    return true;
}

struct Structure {
    std::vector<char> row_border;  // per std row
    std::vector<char> col_border;  // per std column
    std::vector<int> band_pos;     // std row -> position among banded rows (-1 for border)
    std::vector<int> banded_rows;  // positions -> std row
    std::vector<int> border_rows, border_cols;
    std::size_t bandwidth = 0;
};

bool analyze_structure(const StdForm& sf, const IpmOptions& opts, Structure& st) {
    const std::size_t m = sf.m, n = sf.n;
    st.row_border.assign(m, 0);
    st.col_border.assign(n, 0);

    for (std::size_t i = 0; i < m; ++i) {
        std::size_t width = static_cast<std::size_t>(sf.row_ptr[i + 1] - sf.row_ptr[i]);
        if (width > opts.row_width_limit) {
            st.row_border[i] = 1;
            st.border_rows.push_back(static_cast<int>(i));
        }
    }

    st.band_pos.assign(m, -1);
    for (std::size_t i = 0; i < m; ++i)
        if (!st.row_border[i]) {
            st.band_pos[i] = static_cast<int>(st.banded_rows.size());
            st.banded_rows.push_back(static_cast<int>(i));
        }

    std::size_t bw = 0;
    for (std::size_t j = 0; j < n; ++j) {
        int lo = -1, hi = -1;
        for (int k = sf.col_ptr[j]; k < sf.col_ptr[j + 1]; ++k) {
            int p = st.band_pos[static_cast<std::size_t>(sf.row_idx[static_cast<std::size_t>(k)])];
            if (p < 0) continue;
            if (lo < 0 || p < lo) lo = p;
            if (p > hi) hi = p;
        }
        std::size_t span = lo < 0 ? 0 : static_cast<std::size_t>(hi - lo);
        if (span > opts.band_limit) {
            st.col_border[j] = 1;
            st.border_cols.push_back(static_cast<int>(j));
        } else {
            bw = std::max(bw, span);
        }
    }
    st.bandwidth = bw;
    return st.border_cols.size() + st.border_rows.size() <= opts.max_border;
}

// Symmetric band matrix, lower storage: entry(i,j) with 0 <= i-j <= bw
// lives at stor[(i-j)*nb + j].
struct BandMatrix {
    std::size_t nb = 0, bw = 0;
    std::vector<double> stor;

    void reset(std::size_t nb_, std::size_t bw_) {
        nb = nb_;
        bw = bw_;
        stor.assign((bw + 1) * nb, 0.0);
    }
    double& at(std::size_t i, std::size_t j) { return stor[(i - j) * nb + j]; }

    bool cholesky() {
        for (std::size_t j = 0; j < nb; ++j) {
            std::size_t k0 = j > bw ? j - bw : 0;
            double d = stor[j];
            for (std::size_t t = k0; t < j; ++t) {
                double l = stor[(j - t) * nb + t];
                d -= l * l;
            }
            if (!(d > 0.0)) return false;
            d = std::sqrt(d);
            stor[j] = d;
            std::size_t iend = std::min(nb - 1, j + bw);
            for (std::size_t i = j + 1; i <= iend; ++i) {
                double s = stor[(i - j) * nb + j];
                std::size_t t0 = i > bw ? i - bw : 0;
                if (t0 < k0) t0 = k0;
                for (std::size_t t = t0; t < j; ++t)
                    s -= stor[(i - t) * nb + t] * stor[(j - t) * nb + t];
                stor[(i - j) * nb + j] = s / d;
            }
        }
        return true;
    }

    // Solves L L^T x = r in place.
    void solve(std::vector<double>& r) const {
        for (std::size_t j = 0; j < nb; ++j) {
            r[j] /= stor[j];
            double rj = r[j];
            std::size_t iend = std::min(nb - 1, j + bw);
            for (std::size_t i = j + 1; i <= iend; ++i) r[i] -= stor[(i - j) * nb + j] * rj;
        }
        for (std::size_t jp = nb; jp-- > 0;) {
            double s = r[jp];
            std::size_t iend = std::min(nb - 1, jp + bw);
            for (std::size_t i = jp + 1; i <= iend; ++i) s -= stor[(i - jp) * nb + jp] * r[i];
            r[jp] = s / stor[jp];
        }
    }
};

// Dense SPD helper for the border blocks.
struct DenseSpd {
    std::size_t n = 0;
    std::vector<double> a;  // row-major lower triangle used

    void reset(std::size_t n_) {
        n = n_;
        a.assign(n * n, 0.0);
    }
    double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }

    bool cholesky() {
        for (std::size_t j = 0; j < n; ++j) {
            double d = a[j * n + j];
            for (std::size_t t = 0; t < j; ++t) d -= a[j * n + t] * a[j * n + t];
            if (!(d > 0.0)) return false;
            d = std::sqrt(d);
            a[j * n + j] = d;
            for (std::size_t i = j + 1; i < n; ++i) {
                double s = a[i * n + j];
                for (std::size_t t = 0; t < j; ++t) s -= a[i * n + t] * a[j * n + t];
                a[i * n + j] = s / d;
            }
        }
        return true;
    }

    void solve(std::vector<double>& r) const {
        for (std::size_t i = 0; i < n; ++i) {
            double s = r[i];
            for (std::size_t t = 0; t < i; ++t) s -= a[i * n + t] * r[t];
            r[i] = s / a[i * n + i];
        }
        for (std::size_t ip = n; ip-- > 0;) {
            double s = r[ip];
            for (std::size_t i = ip + 1; i < n; ++i) s -= a[i * n + ip] * r[i];
            r[ip] = s / a[ip * n + ip];
        }
    }
};

// One factorization of M = A Theta A^T in banded + border form.
struct NormalSolver {
    const StdForm& sf;
    const Structure& st;
    std::size_t nb, nf, ng;
    BandMatrix band;
    std::vector<double> vcols;   // nb x nf: border columns restricted to banded rows
    std::vector<double> w1;      // nb x nf: band^{-1} vcols
    DenseSpd sft;                // nf x nf Woodbury core
    std::vector<double> cmat;    // nb x ng: M between banded and border rows
    std::vector<double> w2;      // nb x ng: Mbb^{-1} cmat
    DenseSpd schur;              // ng x ng
    std::vector<double> scratch;

    NormalSolver(const StdForm& s, const Structure& t) : sf(s), st(t) {
        nb = st.banded_rows.size();
        nf = st.border_cols.size();
        ng = st.border_rows.size();
    }

    bool factor(const std::vector<double>& theta, double reg) {
        band.reset(nb, st.bandwidth);
        // Banded columns: scatter theta_j * a_j a_j^T over banded rows.
        for (std::size_t j = 0; j < sf.n; ++j) {
            if (st.col_border[j]) continue;
            double th = theta[j];
            int k0 = sf.col_ptr[j], k1 = sf.col_ptr[j + 1];
            for (int ka = k0; ka < k1; ++ka) {
                int pa = st.band_pos[static_cast<std::size_t>(sf.row_idx[static_cast<std::size_t>(ka)])];
                if (pa < 0) continue;
                double va = th * sf.cval[static_cast<std::size_t>(ka)];
                for (int kb = k0; kb < k1; ++kb) {
                    int pb = st.band_pos[static_cast<std::size_t>(sf.row_idx[static_cast<std::size_t>(kb)])];
                    if (pb < 0 || pb < pa) continue;
                    band.at(static_cast<std::size_t>(pb), static_cast<std::size_t>(pa)) +=
                        va * sf.cval[static_cast<std::size_t>(kb)];
                }
            }
        }
        for (std::size_t i = 0; i < nb; ++i)
            band.stor[i] += reg * band.stor[i] + 1e-2 * reg;
        if (!band.cholesky()) return false;

        // Woodbury block for border columns.
        vcols.assign(nb * nf, 0.0);
        for (std::size_t f = 0; f < nf; ++f) {
            auto j = static_cast<std::size_t>(st.border_cols[f]);
            for (int k = sf.col_ptr[j]; k < sf.col_ptr[j + 1]; ++k) {
                int p = st.band_pos[static_cast<std::size_t>(sf.row_idx[static_cast<std::size_t>(k)])];
                if (p >= 0)
                    vcols[static_cast<std::size_t>(p) * nf + f] = sf.cval[static_cast<std::size_t>(k)];
            }
        }
        w1.assign(nb * nf, 0.0);
        scratch.resize(nb);
        for (std::size_t f = 0; f < nf; ++f) {
            for (std::size_t i = 0; i < nb; ++i) scratch[i] = vcols[i * nf + f];
            band.solve(scratch);
            for (std::size_t i = 0; i < nb; ++i) w1[i * nf + f] = scratch[i];
        }
        sft.reset(nf);
        for (std::size_t f = 0; f < nf; ++f) {
            auto j = static_cast<std::size_t>(st.border_cols[f]);
            sft.at(f, f) += 1.0 / std::max(theta[j], 1e-300);
            for (std::size_t g = 0; g <= f; ++g) {
                double s = 0.0;
                for (std::size_t i = 0; i < nb; ++i) s += vcols[i * nf + g] * w1[i * nf + f];
                sft.at(f, g) += s;
            }
        }
        if (nf > 0 && !sft.cholesky()) return false;

        // Border rows: C = A_b Theta A_g^T, E = A_g Theta A_g^T.
        cmat.assign(nb * ng, 0.0);
        schur.reset(ng);
        std::vector<double> grow(ng);
        for (std::size_t j = 0; j < sf.n; ++j) {
            bool touches_border = false;
            for (int k = sf.col_ptr[j]; k < sf.col_ptr[j + 1] && !touches_border; ++k)
                touches_border = st.row_border[static_cast<std::size_t>(sf.row_idx[static_cast<std::size_t>(k)])];
            if (!touches_border) continue;
            std::fill(grow.begin(), grow.end(), 0.0);
            double th = theta[j];
            for (int k = sf.col_ptr[j]; k < sf.col_ptr[j + 1]; ++k) {
                auto r = static_cast<std::size_t>(sf.row_idx[static_cast<std::size_t>(k)]);
                if (!st.row_border[r]) continue;
                for (std::size_t g = 0; g < ng; ++g)
                    if (st.border_rows[g] == static_cast<int>(r))
                        grow[g] += sf.cval[static_cast<std::size_t>(k)];
            }
            for (int k = sf.col_ptr[j]; k < sf.col_ptr[j + 1]; ++k) {
                auto r = static_cast<std::size_t>(sf.row_idx[static_cast<std::size_t>(k)]);
                if (st.row_border[r]) continue;
                double v = th * sf.cval[static_cast<std::size_t>(k)];
                int p = st.band_pos[r];
                for (std::size_t g = 0; g < ng; ++g)
                    cmat[static_cast<std::size_t>(p) * ng + g] += v * grow[g];
            }
            for (std::size_t g = 0; g < ng; ++g)
                for (std::size_t h = 0; h <= g; ++h) schur.at(g, h) += th * grow[g] * grow[h];
        }
        if (ng > 0) {
            double emax = 0.0;
            for (std::size_t g = 0; g < ng; ++g) emax = std::max(emax, schur.at(g, g));
            for (std::size_t g = 0; g < ng; ++g)
                schur.at(g, g) += reg * schur.at(g, g) + 1e-2 * reg * std::max(1.0, emax);
            // S = E - C^T Mbb^{-1} C
            w2.assign(nb * ng, 0.0);
            for (std::size_t g = 0; g < ng; ++g) {
                for (std::size_t i = 0; i < nb; ++i) scratch[i] = cmat[i * ng + g];
                solve_bb(scratch);
                for (std::size_t i = 0; i < nb; ++i) w2[i * ng + g] = scratch[i];
            }
            for (std::size_t g = 0; g < ng; ++g)
                for (std::size_t h = 0; h <= g; ++h) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < nb; ++i) s += cmat[i * ng + h] * w2[i * ng + g];
                    schur.at(g, h) -= s;
                }
            if (!schur.cholesky()) return false;
        }
        return true;
    }

    // In-place solve of M_bb x = r (banded rows block, with Woodbury).
    void solve_bb(std::vector<double>& r) const {
        band.solve(r);
        if (nf == 0) return;
        std::vector<double> vt(nf, 0.0);
        for (std::size_t i = 0; i < nb; ++i) {
            double ri = r[i];
            for (std::size_t f = 0; f < nf; ++f) vt[f] += vcols[i * nf + f] * ri;
        }
        sft.solve(vt);
        for (std::size_t i = 0; i < nb; ++i) {
            double s = 0.0;
            for (std::size_t f = 0; f < nf; ++f) s += w1[i * nf + f] * vt[f];
            r[i] -= s;
        }
    }

    // Full solve, rhs given per std row. Overwrites rhs with Delta y.
    void solve(std::vector<double>& rhs) const {
        std::vector<double> rb(nb), rg(ng);
        for (std::size_t p = 0; p < nb; ++p) rb[p] = rhs[static_cast<std::size_t>(st.banded_rows[p])];
        for (std::size_t g = 0; g < ng; ++g) rg[g] = rhs[static_cast<std::size_t>(st.border_rows[g])];

        std::vector<double> t(rb);
        solve_bb(t);
        std::vector<double> yg(ng, 0.0);
        if (ng > 0) {
            for (std::size_t g = 0; g < ng; ++g) {
                double s = rg[g];
                for (std::size_t i = 0; i < nb; ++i) s -= cmat[i * ng + g] * t[i];
                yg[g] = s;
            }
            schur.solve(yg);
            for (std::size_t i = 0; i < nb; ++i) {
                double s = rb[i];
                for (std::size_t g = 0; g < ng; ++g) s -= cmat[i * ng + g] * yg[g];
                rb[i] = s;
            }
            solve_bb(rb);
        } else {
            rb = t;
        }
        for (std::size_t p = 0; p < nb; ++p) rhs[static_cast<std::size_t>(st.banded_rows[p])] = rb[p];
        for (std::size_t g = 0; g < ng; ++g) rhs[static_cast<std::size_t>(st.border_rows[g])] = yg[g];
    }
};

void mat_vec(const StdForm& sf, const std::vector<double>& x, std::vector<double>& ax) {
    ax.assign(sf.m, 0.0);
    for (std::size_t i = 0; i < sf.m; ++i) {
        double s = 0.0;
        for (int k = sf.row_ptr[i]; k < sf.row_ptr[i + 1]; ++k)
            s += sf.val[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(sf.col_idx[static_cast<std::size_t>(k)])];
        ax[i] = s;
    }
}

void mat_tvec(const StdForm& sf, const std::vector<double>& y, std::vector<double>& aty) {
    aty.assign(sf.n, 0.0);
    for (std::size_t i = 0; i < sf.m; ++i) {
        double yi = y[i];
        if (yi == 0.0) continue;
        for (int k = sf.row_ptr[i]; k < sf.row_ptr[i + 1]; ++k)
            aty[static_cast<std::size_t>(sf.col_idx[static_cast<std::size_t>(k)])] +=
                sf.val[static_cast<std::size_t>(k)] * yi;
    }
}

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Geometric-mean equilibration: repeatedly scale rows and columns toward
// unit magnitude. Returns row/col scale factors applied to A in place.
void equilibrate(StdForm& sf, std::vector<double>& rs, std::vector<double>& cs) {
    rs.assign(sf.m, 1.0);
    cs.assign(sf.n, 1.0);
    for (std::size_t i = 0; i < sf.m; ++i) {
        double lo = kInf, hi = 0.0;
        for (int k = sf.row_ptr[i]; k < sf.row_ptr[i + 1]; ++k) {
            double a = std::abs(sf.val[static_cast<std::size_t>(k)]);
            if (a > 0.0) {
                lo = std::min(lo, a);
                hi = std::max(hi, a);
            }
        }
        if (hi == 0.0) continue;
        double s = std::sqrt(lo * hi);
        if (s <= 0.0 || !std::isfinite(s)) continue;
        for (int k = sf.row_ptr[i]; k < sf.row_ptr[i + 1]; ++k)
            sf.val[static_cast<std::size_t>(k)] /= s;
        rs[i] = s;
    }
    std::vector<double> chi(sf.n, 0.0), clo(sf.n, kInf);
    for (std::size_t i = 0; i < sf.m; ++i)
        for (int k = sf.row_ptr[i]; k < sf.row_ptr[i + 1]; ++k) {
            auto j = static_cast<std::size_t>(sf.col_idx[static_cast<std::size_t>(k)]);
            double a = std::abs(sf.val[static_cast<std::size_t>(k)]);
            if (a > 0.0) {
                chi[j] = std::max(chi[j], a);
                clo[j] = std::min(clo[j], a);
            }
        }
    for (std::size_t j = 0; j < sf.n; ++j) {
        if (chi[j] == 0.0) continue;
        double s = std::sqrt(clo[j] * chi[j]);
        if (s > 0.0 && std::isfinite(s)) cs[j] = s;
    }
    for (std::size_t i = 0; i < sf.m; ++i)
        for (int k = sf.row_ptr[i]; k < sf.row_ptr[i + 1]; ++k)
            sf.val[static_cast<std::size_t>(k)] /=
                cs[static_cast<std::size_t>(sf.col_idx[static_cast<std::size_t>(k)])];

    // Second row pass evens out rhs magnitudes: a single horizon-total row
    // (rhs = summed demand) must not set the residual scale of every hourly
    // row.
    {
        std::vector<double> mags;
        for (std::size_t i = 0; i < sf.m; ++i) {
            double v = std::abs(sf.b[i]) / rs[i];
            if (v > 0.0) mags.push_back(v);
        }
        double ref = 1.0;
        if (!mags.empty()) {
            std::nth_element(mags.begin(), mags.begin() + static_cast<long>(mags.size() / 2),
                             mags.end());
            ref = std::max(1.0, mags[mags.size() / 2]);
        }
        for (std::size_t i = 0; i < sf.m; ++i) {
            double s = std::abs(sf.b[i]) / rs[i] / (10.0 * ref);
            if (s > 1.0) {
                for (int k = sf.row_ptr[i]; k < sf.row_ptr[i + 1]; ++k)
                    sf.val[static_cast<std::size_t>(k)] /= s;
                rs[i] *= s;
            }
        }
    }
    // Rebuild CSC values after scaling.
    std::vector<int> fill(sf.col_ptr.begin(), sf.col_ptr.end() - 1);
    for (std::size_t i = 0; i < sf.m; ++i)
        for (int k = sf.row_ptr[i]; k < sf.row_ptr[i + 1]; ++k) {
            auto j = static_cast<std::size_t>(sf.col_idx[static_cast<std::size_t>(k)]);
            int slot = fill[j]++;
            sf.row_idx[static_cast<std::size_t>(slot)] = static_cast<int>(i);
            sf.cval[static_cast<std::size_t>(slot)] = sf.val[static_cast<std::size_t>(k)];
        }
    // Transform problem data: A' = Dr^{-1} A Dc^{-1}; x' = Dc x; b' = Dr^{-1} b;
    // c' = Dc^{-1} c; u' = Dc u.
    for (std::size_t i = 0; i < sf.m; ++i) sf.b[i] /= rs[i];
    for (std::size_t j = 0; j < sf.n; ++j) {
        sf.c[j] /= cs[j];
        if (std::isfinite(sf.u[j])) sf.u[j] *= cs[j];
    }
}

}  // namespace

bool ipm_structure_ok(const LinearProgram& lp, const IpmOptions& opts, IpmDiagnostics* diag) {
    StdForm sf;
    if (!build_std_form(lp, sf)) return false;
    if (sf.infeasible_on_build) return true;  // trivially handled
    Structure st;
    bool ok = analyze_structure(sf, opts, st);
    if (ok && st.bandwidth > opts.band_limit) ok = false;
    if (diag) {
        diag->banded_rows = st.banded_rows.size();
        diag->border_rows = st.border_rows.size();
        diag->border_cols = st.border_cols.size();
        diag->bandwidth = st.bandwidth;
    }
    return ok;
}

LpResult solve_ipm(const LinearProgram& lp, const IpmOptions& opts) {
    LpResult out;
    StdForm sf;
    if (!build_std_form(lp, sf))
        throw SolveError("instance has free variables; structured path unavailable");
    if (sf.infeasible_on_build) {
        out.status = LpStatus::Infeasible;
        return out;
    }

    const std::size_t nv = lp.variables.size();
    if (sf.n == 0 || sf.m == 0) {
        // Everything fixed or no coupling rows: minimize each column on its own bound.
        out.x.assign(nv, 0.0);
        for (std::size_t j = 0; j < nv; ++j) {
            if (sf.col_of_var[j] < 0) {
                out.x[j] = sf.fixed_value[j];
            } else {
                const auto& v = lp.variables[j];
                if (v.cost >= 0.0)
                    out.x[j] = v.lower;
                else if (std::isfinite(v.upper))
                    out.x[j] = v.upper;
                else {
                    out.status = LpStatus::Unbounded;
                    return out;
                }
            }
        }
        out.objective = lp.objective_value(out.x);
        out.duals.assign(lp.constraints.size(), 0.0);
        out.dual_objective = out.objective;
        out.status = LpStatus::Optimal;
        return out;
    }

    std::vector<double> row_scale, col_scale;
    equilibrate(sf, row_scale, col_scale);

    // Global scaling keeps the complementarity products O(1): huge investment
    // costs against MWh-scale rhs otherwise wreck the normal equations'
    // conditioning near convergence.
    double b_scale = 1.0, c_scale = 1.0;
    for (double v : sf.b) b_scale = std::max(b_scale, std::abs(v));
    for (double v : sf.c) c_scale = std::max(c_scale, std::abs(v));
    for (auto& v : sf.b) v /= b_scale;
    for (auto& v : sf.c) v /= c_scale;
    for (auto& v : sf.u)
        if (std::isfinite(v)) v /= b_scale;

    Structure st;
    if (!analyze_structure(sf, opts, st) || st.bandwidth > opts.band_limit)
        throw SolveError("instance lacks banded structure; structured path unavailable");

    const std::size_t m = sf.m, n = sf.n;
    std::vector<char> boxed(n, 0);
    for (std::size_t j = 0; j < n; ++j) boxed[j] = std::isfinite(sf.u[j]);

    NormalSolver ns(sf, st);

    // Mehrotra's least-squares starting point, with a box-aware clamp for
    // bounded columns.
    std::vector<double> x(n, 1.0), z(n, 1.0), q(n, 0.0), w(n, 0.0), y(m, 0.0);
    {
        std::vector<double> theta(n, 1.0);
        double reg = 1e-10;
        while (!ns.factor(theta, reg)) {
            reg *= 100.0;
            if (reg > 1e-2) throw SolveError("normal equations factorization failed at start");
        }
        std::vector<double> rhs(sf.b);
        ns.solve(rhs);  // rhs = (AA^T)^{-1} b
        mat_tvec(sf, rhs, x);
        std::vector<double> ac(m);
        mat_vec(sf, sf.c, ac);
        ns.solve(ac);
        y = ac;
        std::vector<double> aty(n);
        mat_tvec(sf, y, aty);
        for (std::size_t j = 0; j < n; ++j) z[j] = sf.c[j] - aty[j];

        double dx = 0.0, dz = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            dx = std::max(dx, -1.5 * x[j]);
            dz = std::max(dz, -1.5 * z[j]);
        }
        double dot = 0.0, sx = 0.0, sz = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            dot += (x[j] + dx) * (z[j] + dz);
            sx += x[j] + dx;
            sz += z[j] + dz;
        }
        double dhx = dx + 0.5 * dot / std::max(sz, 1e-12);
        double dhz = dz + 0.5 * dot / std::max(sx, 1e-12);
        // Padding proportional to the problem scale keeps the start centered
        // enough for residual reduction to outpace complementarity decay.
        dhx = std::max(dhx, 0.01 * (1.0 + inf_norm(sf.b)));
        dhz = std::max(dhz, 0.01 * (1.0 + inf_norm(sf.c)));
        if (std::getenv("ESOM_IPM_OLD_START")) {
            dhx = 0.1 * (1.0 + inf_norm(sf.b));
            dhz = 0.1 * (1.0 + inf_norm(sf.c));
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (boxed[j]) {
                double lopad = std::min(0.25 * sf.u[j], dhx);
                x[j] = std::clamp(x[j], lopad, sf.u[j] - lopad);
                w[j] = sf.u[j] - x[j];
                q[j] = std::max(dhz, -z[j] + dhz);
                z[j] = std::max(dhz, z[j] + dhz);
            } else {
                x[j] = std::max(x[j] + dhx, dhx);
                w[j] = 0.0;
                q[j] = 0.0;
                z[j] = std::max(z[j] + dhz, dhz);
            }
        }
    }

    std::size_t n_comp = n;
    for (std::size_t j = 0; j < n; ++j) n_comp += boxed[j];

    std::vector<double> rp(m), rd(n), ru(n), theta(n), rhat(n), rhs(m);
    std::vector<double> dx(n), dy(m), dz(n), dw(n), dq(n);
    std::vector<double> dx_aff(n), dz_aff(n), dw_aff(n), dq_aff(n);
    std::vector<double> ax(m), aty(n);

    double reg = 1e-10;
    const double bnorm = 1.0 + inf_norm(sf.b);
    const double cnorm = 1.0 + inf_norm(sf.c);

    auto compute_mu = [&]() {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            s += x[j] * z[j];
            if (boxed[j]) s += w[j] * q[j];
        }
        return s / static_cast<double>(n_comp);
    };

    // Late iterations can destabilize once complementarity products hit FP
    // noise; keep the best iterate seen and fall back to it.
    struct Snapshot {
        std::vector<double> x, y, z, q, w;
        double merit = kInf, pinf = kInf, dinf = kInf, gap = kInf;
    } best;
    int restarts = 0;
    int center_steps = 0;

    for (std::size_t iter = 0; iter < opts.max_iterations; ++iter) {
        mat_vec(sf, x, ax);
        for (std::size_t i = 0; i < m; ++i) rp[i] = sf.b[i] - ax[i];
        mat_tvec(sf, y, aty);
        for (std::size_t j = 0; j < n; ++j) {
            rd[j] = sf.c[j] - aty[j] - z[j] + (boxed[j] ? q[j] : 0.0);
            ru[j] = boxed[j] ? sf.u[j] - x[j] - w[j] : 0.0;
        }
        double mu = compute_mu();
        double pinf = inf_norm(rp) / bnorm;
        double dinf = inf_norm(rd) / cnorm;
        double pobj = 0.0;
        for (std::size_t j = 0; j < n; ++j) pobj += sf.c[j] * x[j];
        double dobj = 0.0;
        for (std::size_t i = 0; i < m; ++i) dobj += sf.b[i] * y[i];
        for (std::size_t j = 0; j < n; ++j)
            if (boxed[j]) dobj -= sf.u[j] * q[j];
        double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));

        if (std::getenv("ESOM_IPM_TRACE")) {
            std::size_t argmax = 0;
            for (std::size_t i = 0; i < m; ++i)
                if (std::abs(rp[i]) > std::abs(rp[argmax])) argmax = i;
            std::fprintf(stderr,
                         "it=%zu mu=%.3e pinf=%.3e dinf=%.3e gap=%.3e pobj=%.6e dobj=%.6e worst_row=%zu\n",
                         iter, mu, pinf, dinf, gap, pobj, dobj, argmax);
        }

        double merit = std::max({pinf, dinf, gap});
        if (merit < best.merit) {
            best.merit = merit;
            best.pinf = pinf;
            best.dinf = dinf;
            best.gap = gap;
            best.x = x;
            best.y = y;
            best.z = z;
            best.q = q;
            best.w = w;
        }

        if (pinf <= opts.tol && dinf <= opts.tol && gap <= opts.tol) {
            out.status = LpStatus::Optimal;
            out.iterations = iter;
            break;
        }
        bool frozen = mu < 1e-14 && iter > 8;
        bool diverged = merit > 100.0 * best.merit + 1e-9 && iter > 8;
        bool stalled = iter > 30 && best.merit < 2e-5 && merit > 0.5 * best.merit;
        bool exhausted = iter + 1 == opts.max_iterations;
        // A derailed iterate gets pulled back to the best point with a few
        // strongly centered steps before giving up.
        if (diverged && restarts < 3 && !exhausted) {
            if (std::getenv("ESOM_IPM_TRACE"))
                std::fprintf(stderr, "   restart(diverged) merit=%.3e best=%.3e\n", merit, best.merit);
            x = best.x;
            y = best.y;
            z = best.z;
            q = best.q;
            w = best.w;
            ++restarts;
            center_steps = 3;
            continue;
        }
        if (frozen || diverged || stalled || exhausted) {
            x = best.x;
            y = best.y;
            z = best.z;
            q = best.q;
            w = best.w;
            // Degenerate endgames stall with a near-feasible, near-optimal
            // iterate; that is an accepted optimum at engineering precision
            // (the final polish below restores Ax = b to solver tolerance).
            if (best.pinf <= 1e-6 && best.dinf <= 1e-6 && best.gap <= 2e-5)
                out.status = LpStatus::Optimal;
            else if (frozen && best.pinf > 1e-6)
                out.status = LpStatus::Infeasible;
            else
                out.status = LpStatus::IterationLimit;
            out.iterations = iter;
            break;
        }
        double xnorm = inf_norm(x);
        if (xnorm > 1e13) {
            out.status = LpStatus::Unbounded;
            out.iterations = iter;
            break;
        }

        for (std::size_t j = 0; j < n; ++j) {
            double t = z[j] / x[j];
            if (boxed[j]) t += q[j] / w[j];
            theta[j] = std::clamp(1.0 / t, 1.0 / opts.theta_clamp, opts.theta_clamp);
            // Border (dense) columns are often near-collinear; capping their
            // barrier weight keeps the Woodbury core solvable in doubles. The
            // residual corrections absorb the resulting Newton distortion.
            if (st.col_border[j]) theta[j] = std::min(theta[j], 1e4);
            // Variables parked at a bound may be frozen: the ratio test
            // ignores them, and a real step here would silently wreck Ax = b
            // when the post-step floor pulls them back.
            if (opts.freeze_parked && (x[j] <= 1e-11 || (boxed[j] && w[j] <= 1e-11)))
                theta[j] = 1e-12;
        }
        reg = 1e-12;
        bool ok = ns.factor(theta, reg);
        while (!ok && reg < 1e-2) {
            reg *= 1000.0;
            ok = ns.factor(theta, reg);
        }
        if (!ok) {
            out.status = LpStatus::IterationLimit;
            out.iterations = iter;
            break;
        }

        // Matrix-free A Theta A^T product, used to polish the factored solve.
        auto normal_apply = [&](const std::vector<double>& v, std::vector<double>& result) {
            mat_tvec(sf, v, aty);
            for (std::size_t j = 0; j < n; ++j) aty[j] *= theta[j];
            mat_vec(sf, aty, result);
        };
        std::vector<double> resid(m), corr(m), mv(m);
        // Iterative refinement; returns the achieved relative residual so the
        // caller can tell when the factorization has gone numerically bad.
        auto refined_solve = [&](std::vector<double>& target) {
            std::vector<double> rhs0 = target;
            double scale = 1.0 + inf_norm(rhs0);
            ns.solve(target);
            double worst = 0.0;
            for (int pass = 0; pass < 4; ++pass) {
                normal_apply(target, mv);
                worst = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    resid[i] = rhs0[i] - mv[i];
                    worst = std::max(worst, std::abs(resid[i]));
                }
                if (worst < 1e-12 * scale) break;
                corr = resid;
                ns.solve(corr);
                for (std::size_t i = 0; i < m; ++i) target[i] += corr[i];
            }
            return worst / scale;
        };

        auto solve_step = [&](const std::vector<double>& txz, const std::vector<double>& twq) -> double {
            for (std::size_t j = 0; j < n; ++j) {
                double r = rd[j] - txz[j] / x[j];
                if (boxed[j]) r += twq[j] / w[j] - q[j] / w[j] * ru[j];
                rhat[j] = r;
            }
            for (std::size_t i = 0; i < m; ++i) rhs[i] = rp[i];
            // rhs += A Theta rhat
            for (std::size_t i = 0; i < m; ++i) {
                double s = 0.0;
                for (int k = sf.row_ptr[i]; k < sf.row_ptr[i + 1]; ++k) {
                    auto j = static_cast<std::size_t>(sf.col_idx[static_cast<std::size_t>(k)]);
                    s += sf.val[static_cast<std::size_t>(k)] * theta[j] * rhat[j];
                }
                rhs[i] += s;
            }
            refined_solve(rhs);
            dy = rhs;
            mat_tvec(sf, dy, dx);  // dx = Theta (A^T dy - rhat)
            for (std::size_t j = 0; j < n; ++j) dx[j] = theta[j] * (dx[j] - rhat[j]);

            // Huge clamped Theta entries amplify rounding noise in dx, which
            // would wreck A dx = rp: polish the primal direction directly.
            double direction_resid = 0.0;
            for (int pass = 0; pass < 4; ++pass) {
                mat_vec(sf, dx, mv);
                direction_resid = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    resid[i] = rp[i] - mv[i];
                    direction_resid = std::max(direction_resid, std::abs(resid[i]));
                }
                if (direction_resid < 1e-11 * bnorm) break;
                refined_solve(resid);
                for (std::size_t i = 0; i < m; ++i) dy[i] += resid[i];
                mat_tvec(sf, resid, aty);
                for (std::size_t j = 0; j < n; ++j) dx[j] += theta[j] * aty[j];
            }

            // dz comes from the dual equation, not the eliminated
            // complementarity row: with Theta clamped the two disagree, and
            // only this choice keeps dual feasibility contracting exactly.
            mat_tvec(sf, dy, aty);
            const bool comp_dz = std::getenv("ESOM_IPM_COMP_DZ") != nullptr;
            for (std::size_t j = 0; j < n; ++j) {
                if (boxed[j]) {
                    dw[j] = ru[j] - dx[j];
                    dq[j] = (twq[j] - q[j] * dw[j]) / w[j];
                    dz[j] = comp_dz ? (txz[j] - z[j] * dx[j]) / x[j] : rd[j] - aty[j] + dq[j];
                } else {
                    dw[j] = 0.0;
                    dq[j] = 0.0;
                    dz[j] = comp_dz ? (txz[j] - z[j] * dx[j]) / x[j] : rd[j] - aty[j];
                }
            }
            return direction_resid;
        };

        // Variables that collapsed to the boundary no longer block steps;
        // they are floored at a harmless positive value after each update
        // instead. Flooring from kTiny perturbs Ax = b by at most kTiny per
        // column, far below the residual targets.
        constexpr double kTiny = 1e-11;
        auto step_lengths = [&](double& ap, double& ad) {
            ap = 1.0;
            ad = 1.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (dx[j] < 0.0 && x[j] > kTiny) ap = std::min(ap, -x[j] / dx[j]);
                if (boxed[j] && dw[j] < 0.0 && w[j] > kTiny) ap = std::min(ap, -w[j] / dw[j]);
                if (dz[j] < 0.0 && z[j] > kTiny) ad = std::min(ad, -z[j] / dz[j]);
                if (boxed[j] && dq[j] < 0.0 && q[j] > kTiny) ad = std::min(ad, -q[j] / dq[j]);
            }
        };

        // Affine-scaling predictor.
        std::vector<double> txz(n), twq(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            txz[j] = -x[j] * z[j];
            if (boxed[j]) twq[j] = -w[j] * q[j];
        }
        double dir_resid = solve_step(txz, twq);
        double ap, ad;
        step_lengths(ap, ad);
        double mu_aff = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            mu_aff += (x[j] + ap * dx[j]) * (z[j] + ad * dz[j]);
            if (boxed[j]) mu_aff += (w[j] + ap * dw[j]) * (q[j] + ad * dq[j]);
        }
        mu_aff /= static_cast<double>(n_comp);
        double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);
        if (center_steps > 0) {
            sigma = std::max(sigma, 0.8);
            --center_steps;
        }

        dx_aff = dx;
        dz_aff = dz;
        dw_aff = dw;
        dq_aff = dq;

        // Corrector. Second-order terms are capped near mu: on variables
        // pinned at the boundary they otherwise explode and detonate the
        // whole direction.
        const double cap = 10.0 * mu;
        for (std::size_t j = 0; j < n; ++j) {
            if (x[j] <= 1e-11) {
                txz[j] = 0.0;
            } else {
                double dd = std::clamp(dx_aff[j] * dz_aff[j], -cap, cap);
                txz[j] = sigma * mu - x[j] * z[j] - dd;
            }
            if (boxed[j]) {
                if (w[j] <= 1e-11) {
                    twq[j] = 0.0;
                } else {
                    double dd = std::clamp(dw_aff[j] * dq_aff[j], -cap, cap);
                    twq[j] = sigma * mu - w[j] * q[j] - dd;
                }
            }
        }
        dir_resid = std::max(dir_resid, solve_step(txz, twq));
        double rp_norm = inf_norm(rp);
        if (std::getenv("ESOM_IPM_TRACE")) {
            std::size_t jx = 0, jz = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (std::abs(dx[j]) > std::abs(dx[jx])) jx = j;
                if (std::abs(dz[j]) > std::abs(dz[jz])) jz = j;
            }
            std::fprintf(stderr,
                         "   |dx|max=%.2e at col %zu (x=%.2e z=%.2e th=%.2e) |dz|max=%.2e at col %zu "
                         "(x=%.2e z=%.2e) dir_resid=%.2e\n",
                         std::abs(dx[jx]), jx, x[jx], z[jx], theta[jx], std::abs(dz[jz]), jz, x[jz],
                         z[jz], dir_resid);
        }
        if (!std::getenv("ESOM_IPM_NO_GUARD") &&
            (dir_resid > std::max(1e3 * rp_norm, 1e-4 * bnorm) ||
             inf_norm(dx) > 1e10 * (1.0 + inf_norm(x)))) {
            // The Newton system could not be solved to working precision:
            // stepping would corrupt the iterate. Pull back and recenter.
            if (std::getenv("ESOM_IPM_TRACE"))
                std::fprintf(stderr, "   restart(direction) dir_resid=%.3e rp=%.3e\n", dir_resid, rp_norm);
            if (restarts < 3) {
                x = best.x;
                y = best.y;
                z = best.z;
                q = best.q;
                w = best.w;
                ++restarts;
                center_steps = 3;
                continue;
            }
            out.status = (best.pinf <= 1e-6 && best.dinf <= 1e-6 && best.gap <= 2e-5)
                             ? LpStatus::Optimal
                             : LpStatus::IterationLimit;
            x = best.x;
            y = best.y;
            z = best.z;
            q = best.q;
            w = best.w;
            out.iterations = iter;
            break;
        }
        step_lengths(ap, ad);
        double eta = mu > 1e-6 ? 0.99 : 0.9995;
        ap = std::min(1.0, eta * ap);
        ad = std::min(1.0, eta * ad);

        if (std::getenv("ESOM_IPM_TRACE")) std::fprintf(stderr, "   ap=%.3e ad=%.3e sigma=%.3e\n", ap, ad, sigma);

        for (std::size_t j = 0; j < n; ++j) {
            x[j] = std::max(x[j] + ap * dx[j], 1e-13);
            z[j] = std::max(z[j] + ad * dz[j], 1e-13);
            if (boxed[j]) {
                w[j] = std::max(w[j] + ap * dw[j], 1e-13);
                q[j] = std::max(q[j] + ad * dq[j], 1e-13);
            }
        }
        for (std::size_t i = 0; i < m; ++i) y[i] += ad * dy[i];
    }

    if (out.status != LpStatus::Optimal) return out;

    // Final primal polish: weighted min-norm correction toward Ax = b.
    // Weighting by the barrier's Theta steers corrections into interior
    // variables, so the box clip afterwards barely disturbs the residual.
    {
        for (std::size_t j = 0; j < n; ++j) {
            double t = z[j] / std::max(x[j], 1e-13);
            if (boxed[j]) t += q[j] / std::max(w[j], 1e-13);
            theta[j] = std::clamp(1.0 / t, 1e-8, 1e8);
        }
        if (ns.factor(theta, 1e-12)) {
            for (int pass = 0; pass < 4; ++pass) {
                mat_vec(sf, x, ax);
                double worst = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    ax[i] = sf.b[i] - ax[i];
                    worst = std::max(worst, std::abs(ax[i]));
                }
                if (worst < 1e-12 * bnorm) break;
                ns.solve(ax);
                mat_tvec(sf, ax, aty);
                for (std::size_t j = 0; j < n; ++j) {
                    x[j] += theta[j] * aty[j];
                    x[j] = std::max(x[j], 0.0);
                    if (boxed[j]) x[j] = std::min(x[j], sf.u[j]);
                }
            }
        }
    }

    // Unscale and map back to instance space.
    out.x.assign(nv, 0.0);
    for (std::size_t j = 0; j < nv; ++j) {
        int col = sf.col_of_var[j];
        if (col < 0) {
            out.x[j] = sf.fixed_value[j];
        } else {
            auto cj = static_cast<std::size_t>(col);
            out.x[j] = x[cj] * b_scale / col_scale[cj] + sf.shift[j];
        }
    }
    out.objective = lp.objective_value(out.x);
    out.duals.assign(lp.constraints.size(), 0.0);
    double dobj = 0.0;
    for (std::size_t i = 0; i < m; ++i) dobj += sf.b[i] * y[i];
    for (std::size_t j = 0; j < n; ++j)
        if (boxed[j]) dobj -= sf.u[j] * q[j];
    out.dual_objective = dobj * b_scale * c_scale + sf.offset;
    for (std::size_t ci = 0; ci < lp.constraints.size(); ++ci) {
        int r = sf.row_of_con[ci];
        if (r >= 0)
            out.duals[ci] =
                y[static_cast<std::size_t>(r)] * c_scale / row_scale[static_cast<std::size_t>(r)];
    }
    return out;
}

}  // namespace esom
