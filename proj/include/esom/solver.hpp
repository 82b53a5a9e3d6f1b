#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "esom/instance.hpp"
#include "esom/ipm.hpp"
#include "esom/simplex.hpp"

namespace esom {

enum class SolveMethod { Auto, Simplex, Ipm };

struct Tolerances {
    double feasibility = 1e-7;
    double optimality = 1e-7;
    double integrality = 1e-6;
    double mip_gap = 1e-4;
};

struct Limits {
    std::size_t max_simplex_iterations = 2000000;
    std::size_t max_bb_nodes = 50000;
    double wall_clock_s = 0.0;  // 0 = unlimited (wall limits break determinism; off by default)
};

struct SolveRequest {
    const LinearProgram* instance = nullptr;
    Tolerances tolerances;
    Limits limits;
    SolveMethod method = SolveMethod::Auto;
    bool relax_integrality = false;
};

enum class SolveStatus { Optimal, FeasibleWithinGap, Infeasible, Unbounded, LimitReached };

std::string to_string(SolveStatus s);

struct SolveStats {
    std::size_t simplex_iterations = 0;
    std::size_t bb_nodes = 0;
    double wall_seconds = 0.0;
};

struct SolveOutcome {
    SolveStatus status = SolveStatus::LimitReached;
    std::vector<double> primal;  // present iff status is Optimal or FeasibleWithinGap
    std::vector<double> duals;   // LP only
    double objective = 0.0;
    double best_bound = 0.0;  // MILP
    double gap = 0.0;         // MILP: honest relative gap of the incumbent
    double dual_objective = 0.0;
    SolveStats stats;

    bool has_solution() const {
        return status == SolveStatus::Optimal || status == SolveStatus::FeasibleWithinGap;
    }
};

// LP entry point. Picks the dense reference simplex for small instances and
// the structured interior-point path for large time-staged ones; every
// optimal point is re-checked constraint by constraint through code shared
// with neither engine.
SolveOutcome solve_lp(const SolveRequest& request);

// Branch-and-bound MILP driver: best-bound node selection after an initial
// dive, most-fractional branching, rounding heuristic for early incumbents.
SolveOutcome solve_milp(const SolveRequest& request);

// Constraint-by-constraint feasibility audit, independent of both engines.
// Returns the worst scaled violation.
double max_violation(const LinearProgram& lp, const std::vector<double>& x);

}  // namespace esom
