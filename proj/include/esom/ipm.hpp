#pragma once

#include <cstddef>

#include "esom/instance.hpp"
#include "esom/simplex.hpp"

namespace esom {

// Structured primal-dual interior-point solver for time-staged LPs.
//
// The normal-equations matrix of an hour-ordered dispatch model is banded up
// to a handful of wide columns (shared capacity variables, cyclic storage
// links) and wide rows (horizon-level policy constraints). Those are pulled
// out as a low-rank border (Woodbury + Schur complement) and the rest is
// factored with a band Cholesky, giving near-linear cost per iteration.
struct IpmOptions {
    double tol = 1e-9;               // relative primal/dual/gap target
    std::size_t max_iterations = 120;
    std::size_t band_limit = 220;    // widest banded column span accepted
    std::size_t max_border = 96;     // border columns + rows accepted
    std::size_t row_width_limit = 28;  // rows wider than this become border rows
    // Numerical guards (see ipm.cpp); exposed for experimentation.
    double theta_clamp = 1e6;        // barrier weights kept in [1/clamp, clamp]
    bool freeze_parked = false;      // zero out directions of bound-parked columns
};

struct IpmDiagnostics {
    std::size_t banded_rows = 0;
    std::size_t border_rows = 0;
    std::size_t border_cols = 0;
    std::size_t bandwidth = 0;
};

// True when the instance fits the banded-plus-border pattern (after slack
// augmentation) and has no free variables.
bool ipm_structure_ok(const LinearProgram& lp, const IpmOptions& opts = {},
                      IpmDiagnostics* diag = nullptr);

// Statuses reuse LpStatus. Infeasible/Unbounded are heuristic suspicions
// here; callers confirm via a phase-1 instance (see solver.cpp).
LpResult solve_ipm(const LinearProgram& lp, const IpmOptions& opts = {});

}  // namespace esom
