#pragma once

#include <cstddef>
#include <vector>

#include "esom/instance.hpp"

namespace esom {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
    LpStatus status = LpStatus::IterationLimit;
    std::vector<double> x;      // primal point in the instance's variable space
    std::vector<double> duals;  // one multiplier per instance constraint
    double objective = 0.0;
    double dual_objective = 0.0;  // of the standardized problem; <= objective at optimum
    std::size_t iterations = 0;
};

// Dense two-phase tableau simplex. Reference implementation: suitable for
// desk-scale instances (hundreds of rows); everything beyond that should go
// through the structured path in ipm.hpp. Deterministic: Dantzig pricing
// with lowest-index ties, Bland's rule after a degeneracy streak.
LpResult solve_simplex(const LinearProgram& lp, std::size_t max_iterations = 200000);

}  // namespace esom
