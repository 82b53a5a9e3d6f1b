#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "esom/ipm.hpp"
#include "esom/rng.hpp"
#include "esom/simplex.hpp"
#include "esom/solver.hpp"

using namespace esom;

namespace {

SolveOutcome lp(const LinearProgram& prog, SolveMethod method = SolveMethod::Auto) {
    SolveRequest req;
    req.instance = &prog;
    req.method = method;
    return solve_lp(req);
}

SolveOutcome milp(const LinearProgram& prog) {
    SolveRequest req;
    req.instance = &prog;
    return solve_milp(req);
}

// Brute-force LP oracle: enumerate candidate active sets (rows + bounds),
// solve the square system, keep the best feasible point. Shares nothing with
// the simplex or interior-point implementations.
struct DenseLp {
    std::size_t n = 0;
    std::vector<double> c;
    std::vector<std::vector<double>> rows;  // a.x <= b
    std::vector<double> rhs;
    std::vector<double> lo, hi;
};

bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& x) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-11) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
            b[r] -= f * b[col];
        }
    }
    x.resize(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return true;
}

double vertex_enumeration_optimum(const DenseLp& p) {
    const std::size_t n = p.n;
    // Constraint pool: rows, then lower bounds, then upper bounds.
    std::vector<std::vector<double>> pool_a;
    std::vector<double> pool_b;
    for (std::size_t r = 0; r < p.rows.size(); ++r) {
        pool_a.push_back(p.rows[r]);
        pool_b.push_back(p.rhs[r]);
    }
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> row(n, 0.0);
        row[j] = 1.0;
        pool_a.push_back(row);
        pool_b.push_back(p.lo[j]);
        pool_a.push_back(row);
        pool_b.push_back(p.hi[j]);
    }
    const std::size_t m = pool_a.size();
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> pick(n);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
        if (depth == n) {
            std::vector<std::vector<double>> a(n);
            std::vector<double> b(n);
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = pool_a[pick[i]];
                b[i] = pool_b[pick[i]];
            }
            std::vector<double> x;
            if (!solve_square(a, b, x)) return;
            for (std::size_t j = 0; j < n; ++j)
                if (x[j] < p.lo[j] - 1e-7 || x[j] > p.hi[j] + 1e-7) return;
            for (std::size_t r = 0; r < p.rows.size(); ++r) {
                double lhs = 0.0;
                for (std::size_t j = 0; j < n; ++j) lhs += p.rows[r][j] * x[j];
                if (lhs > p.rhs[r] + 1e-7 * std::max(1.0, std::abs(p.rhs[r]))) return;
            }
            double obj = 0.0;
            for (std::size_t j = 0; j < n; ++j) obj += p.c[j] * x[j];
            best = std::min(best, obj);
            return;
        }
        for (std::size_t i = start; i + (n - depth) <= m; ++i) {
            pick[depth] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
    return best;
}

LinearProgram to_instance(const DenseLp& p) {
    LinearProgram prog;
    for (std::size_t j = 0; j < p.n; ++j)
        prog.add_variable("x" + std::to_string(j), p.lo[j], p.hi[j], p.c[j]);
    for (std::size_t r = 0; r < p.rows.size(); ++r) {
        std::vector<LinTerm> terms;
        for (std::size_t j = 0; j < p.n; ++j)
            if (p.rows[r][j] != 0.0) terms.push_back({static_cast<int>(j), p.rows[r][j]});
        prog.add_constraint("r" + std::to_string(r), std::move(terms), Sense::LessEqual, p.rhs[r]);
    }
    return prog;
}

// Feasible and bounded by construction: box bounds plus rows satisfied at an
// interior anchor point.
DenseLp random_dense_lp(Rng& rng, std::size_t n, std::size_t m) {
    DenseLp p;
    p.n = n;
    p.c.resize(n);
    p.lo.assign(n, 0.0);
    p.hi.assign(n, 0.0);
    std::vector<double> anchor(n);
    for (std::size_t j = 0; j < n; ++j) {
        p.lo[j] = -2.0 + 2.0 * rng.uniform01();
        p.hi[j] = p.lo[j] + 1.0 + 4.0 * rng.uniform01();
        p.c[j] = -3.0 + 6.0 * rng.uniform01();
        anchor[j] = p.lo[j] + (p.hi[j] - p.lo[j]) * rng.uniform01();
    }
    for (std::size_t r = 0; r < m; ++r) {
        std::vector<double> row(n);
        double lhs = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = -2.0 + 4.0 * rng.uniform01();
            lhs += row[j] * anchor[j];
        }
        p.rows.push_back(row);
        p.rhs.push_back(lhs + 0.1 + 2.0 * rng.uniform01());
    }
    return p;
}

}  // namespace

TEST_CASE("one-variable bound LP") {
    LinearProgram prog;
    prog.add_variable("x", 3.0, kInf, 1.0);
    auto out = lp(prog);
    REQUIRE(out.status == SolveStatus::Optimal);
    CHECK(out.objective == doctest::Approx(3.0));
    CHECK(out.primal[0] == doctest::Approx(3.0));
}

TEST_CASE("two-variable facet LP") {
    // min -x-y s.t. x+y <= 1, x,y >= 0: optimum -1 anywhere on the facet.
    LinearProgram prog;
    int x = prog.add_variable("x", 0.0, kInf, -1.0);
    int y = prog.add_variable("y", 0.0, kInf, -1.0);
    prog.add_constraint("cap", {{x, 1.0}, {y, 1.0}}, Sense::LessEqual, 1.0);
    auto out = lp(prog);
    REQUIRE(out.status == SolveStatus::Optimal);
    CHECK(out.objective == doctest::Approx(-1.0));
    CHECK(out.primal[x] + out.primal[y] == doctest::Approx(1.0));
}

TEST_CASE("infeasible and unbounded LPs are reported as statuses") {
    LinearProgram bad;
    int x = bad.add_variable("x", 0.0, kInf, 1.0);
    bad.add_constraint("lo", {{x, 1.0}}, Sense::GreaterEqual, 2.0);
    bad.add_constraint("hi", {{x, 1.0}}, Sense::LessEqual, 1.0);
    CHECK(lp(bad).status == SolveStatus::Infeasible);

    LinearProgram unb;
    unb.add_variable("x", 0.0, kInf, -1.0);
    CHECK(lp(unb).status == SolveStatus::Unbounded);
}

TEST_CASE("random dense LPs match the vertex-enumeration oracle") {
    Rng rng(101);
    for (int trial = 0; trial < 30; ++trial) {
        std::size_t n = 2 + rng.below(5);  // up to 6 vars keeps enumeration cheap
        std::size_t m = 2 + rng.below(9);
        DenseLp p = random_dense_lp(rng, n, m);
        double oracle = vertex_enumeration_optimum(p);
        LinearProgram prog = to_instance(p);
        auto out = lp(prog, SolveMethod::Simplex);
        REQUIRE(out.status == SolveStatus::Optimal);
        CHECK(out.objective == doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("weak duality holds on random LPs") {
    Rng rng(59);
    for (int trial = 0; trial < 20; ++trial) {
        DenseLp p = random_dense_lp(rng, 2 + rng.below(5), 2 + rng.below(8));
        LinearProgram prog = to_instance(p);
        auto out = lp(prog, SolveMethod::Simplex);
        REQUIRE(out.status == SolveStatus::Optimal);
        CHECK(out.dual_objective <= out.objective + 1e-6 * (1.0 + std::abs(out.objective)));
        CHECK(out.dual_objective == doctest::Approx(out.objective).epsilon(1e-6));
    }
}

TEST_CASE("interior-point path agrees with the simplex on banded chain LPs") {
    // Storage-like chain: level[t+1] = level[t] + in[t] - out[t], capacities,
    // plus one global budget row and one shared capacity column -> the
    // banded-plus-border pattern the structured solver targets.
    Rng rng(7);
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t T = 40 + rng.below(60);
        LinearProgram prog;
        int cap = prog.add_variable("cap", 0.0, kInf, 3.0 + rng.uniform01());
        std::vector<int> level(T), inject(T), draw(T);
        for (std::size_t t = 0; t < T; ++t) {
            inject[t] = prog.add_variable("in_" + std::to_string(t), 0.0, kInf,
                                          0.5 + rng.uniform01());
            draw[t] = prog.add_variable("out_" + std::to_string(t), 0.0, kInf, 0.0);
            level[t] = prog.add_variable("lvl_" + std::to_string(t), 0.0, kInf, 0.0);
        }
        double total_demand = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            std::size_t prev = t == 0 ? T - 1 : t - 1;
            prog.add_constraint("bal_" + std::to_string(t),
                                {{level[t], 1.0}, {level[prev], -1.0}, {inject[t], -0.9}, {draw[t], 1.0}},
                                Sense::Equal, 0.0);
            double demand = 0.5 + rng.uniform01();
            total_demand += demand;
            prog.add_constraint("dem_" + std::to_string(t), {{draw[t], 1.0}}, Sense::GreaterEqual,
                                demand);
            prog.add_constraint("cap_" + std::to_string(t), {{level[t], 1.0}, {cap, -1.0}},
                                Sense::LessEqual, 0.0);
        }
        std::vector<LinTerm> budget;
        for (std::size_t t = 0; t < T; ++t) budget.push_back({inject[t], 1.0});
        prog.add_constraint("budget", std::move(budget), Sense::LessEqual, 4.0 * total_demand);

        auto via_simplex = lp(prog, SolveMethod::Simplex);
        auto via_ipm = lp(prog, SolveMethod::Ipm);
        REQUIRE(via_simplex.status == SolveStatus::Optimal);
        REQUIRE(via_ipm.status == SolveStatus::Optimal);
        CHECK(via_ipm.objective ==
              doctest::Approx(via_simplex.objective).epsilon(1e-6));
    }
}

TEST_CASE("milp ceiling") {
    LinearProgram prog;
    prog.add_variable("x", 0.0, kInf, 1.0, true);
    prog.constraints.push_back({"lo", {{0, 1.0}}, Sense::GreaterEqual, 2.5});
    auto out = milp(prog);
    REQUIRE(out.status == SolveStatus::Optimal);
    CHECK(out.primal[0] == doctest::Approx(3.0));
    CHECK(out.objective == doctest::Approx(3.0));
}

TEST_CASE("knapsack with 6 binary items matches exhaustive enumeration") {
    // max value s.t. weight budget -> min of negated value.
    const double value[6] = {3.1, 2.2, 5.7, 1.1, 4.4, 2.9};
    const double weight[6] = {2.0, 1.5, 3.8, 0.9, 2.7, 1.8};
    const double budget = 6.0;
    LinearProgram prog;
    std::vector<LinTerm> wrow;
    for (int i = 0; i < 6; ++i) {
        prog.add_variable("item" + std::to_string(i), 0.0, 1.0, -value[i], true);
        wrow.push_back({i, weight[i]});
    }
    prog.add_constraint("budget", std::move(wrow), Sense::LessEqual, budget);

    double best = 0.0;
    for (unsigned mask = 0; mask < 64; ++mask) {
        double v = 0.0, w = 0.0;
        for (int i = 0; i < 6; ++i)
            if (mask & (1u << i)) {
                v += value[i];
                w += weight[i];
            }
        if (w <= budget) best = std::max(best, v);
    }

    auto out = milp(prog);
    REQUIRE(out.status == SolveStatus::Optimal);
    CHECK(-out.objective == doctest::Approx(best));
}

TEST_CASE("random binary MILPs match exhaustive enumeration") {
    Rng rng(313);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 4 + rng.below(9);  // up to 12 binaries
        std::size_t m = 2 + rng.below(4);
        std::vector<double> c(n);
        for (auto& v : c) v = -5.0 + 10.0 * rng.uniform01();
        std::vector<std::vector<double>> rows(m, std::vector<double>(n));
        std::vector<double> rhs(m);
        for (std::size_t r = 0; r < m; ++r) {
            double pos = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                rows[r][j] = -2.0 + 4.0 * rng.uniform01();
                pos += std::max(0.0, rows[r][j]);
            }
            rhs[r] = pos * (0.2 + 0.6 * rng.uniform01());  // all-zeros stays feasible
        }

        double best = std::numeric_limits<double>::infinity();
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            bool ok = true;
            for (std::size_t r = 0; r < m && ok; ++r) {
                double lhs = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    if (mask & (1u << j)) lhs += rows[r][j];
                ok = lhs <= rhs[r] + 1e-12;
            }
            if (!ok) continue;
            double obj = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (mask & (1u << j)) obj += c[j];
            best = std::min(best, obj);
        }

        LinearProgram prog;
        for (std::size_t j = 0; j < n; ++j)
            prog.add_variable("b" + std::to_string(j), 0.0, 1.0, c[j], true);
        for (std::size_t r = 0; r < m; ++r) {
            std::vector<LinTerm> terms;
            for (std::size_t j = 0; j < n; ++j) terms.push_back({static_cast<int>(j), rows[r][j]});
            prog.add_constraint("r" + std::to_string(r), std::move(terms), Sense::LessEqual, rhs[r]);
        }
        auto out = milp(prog);
        REQUIRE(out.status == SolveStatus::Optimal);
        CHECK(out.objective == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("relaxation-integral MILP branches zero nodes") {
    // Transportation-like totally unimodular system with integer rhs.
    LinearProgram prog;
    int a = prog.add_variable("a", 0.0, kInf, 1.0, true);
    int b = prog.add_variable("b", 0.0, kInf, 2.0, true);
    prog.add_constraint("demand", {{a, 1.0}, {b, 1.0}}, Sense::GreaterEqual, 5.0);
    auto out = milp(prog);
    REQUIRE(out.status == SolveStatus::Optimal);
    CHECK(out.objective == doctest::Approx(5.0));
    CHECK(out.stats.bb_nodes == 1);  // root only, no branching
}

TEST_CASE("MILP incumbent never beats the relaxation bound") {
    Rng rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        std::size_t n = 5 + rng.below(6);
        LinearProgram prog;
        std::vector<LinTerm> row;
        for (std::size_t j = 0; j < n; ++j) {
            prog.add_variable("b" + std::to_string(j), 0.0, 1.0, -rng.uniform01(), true);
            row.push_back({static_cast<int>(j), 0.3 + rng.uniform01()});
        }
        prog.add_constraint("cap", std::move(row), Sense::LessEqual, 1.5);

        LinearProgram relaxed = prog;
        for (auto& v : relaxed.variables) v.is_integer = false;
        auto bound = lp(relaxed, SolveMethod::Simplex);
        auto out = milp(prog);
        REQUIRE(out.status == SolveStatus::Optimal);
        CHECK(out.objective >= bound.objective - 1e-9);
    }
}

TEST_CASE("solve_lp refuses integer instances unless relaxed") {
    LinearProgram prog;
    prog.add_variable("n", 0.0, 5.0, 1.0, true);
    SolveRequest req;
    req.instance = &prog;
    CHECK_THROWS_AS(solve_lp(req), ConfigError);
    req.relax_integrality = true;
    CHECK(solve_lp(req).status == SolveStatus::Optimal);
}
