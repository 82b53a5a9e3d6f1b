#include "esom/solver.hpp"

#include "esom/lp_format.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <optional>
#include <queue>

namespace esom {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_s(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

SolveMethod pick_method(const LinearProgram& lp, SolveMethod requested) {
    if (requested != SolveMethod::Auto) return requested;
    if (lp.constraints.size() <= 240) return SolveMethod::Simplex;
    if (ipm_structure_ok(lp)) return SolveMethod::Ipm;
    if (lp.constraints.size() <= 4000) return SolveMethod::Simplex;
    throw SolveError("instance with " + std::to_string(lp.constraints.size()) +
                     " rows is too large for the dense reference simplex and lacks the banded "
                     "structure required by the interior-point path");
}

// Phase-1 style feasibility certificate: minimize total elastic violation.
// Used to confirm the interior-point solver's infeasibility suspicions.
bool confirmed_infeasible(const LinearProgram& lp, SolveMethod method) {
    LinearProgram aux = lp;
    for (auto& v : aux.variables) v.cost = 0.0;
    aux.objective_offset = 0.0;
    std::size_t next = 0;
    for (std::size_t i = 0; i < aux.constraints.size(); ++i) {
        auto& con = aux.constraints[i];
        if (con.sense != Sense::LessEqual) {
            int p = aux.add_variable("art_pos_" + std::to_string(next), 0.0, kInf, 1.0);
            con.terms.push_back({p, 1.0});
        }
        if (con.sense != Sense::GreaterEqual) {
            int q = aux.add_variable("art_neg_" + std::to_string(next), 0.0, kInf, 1.0);
            con.terms.push_back({q, -1.0});
        }
        ++next;
    }
    for (auto& v : aux.variables) v.is_integer = false;
    LpResult r = method == SolveMethod::Ipm ? solve_ipm(aux) : solve_simplex(aux);
    if (r.status != LpStatus::Optimal) return true;  // aux is always feasible; treat failure as infeasible
    return r.objective > 1e-6 * (1.0 + std::abs(r.objective));
}

SolveOutcome run_lp(const LinearProgram& lp, const SolveRequest& request) {
    auto t0 = Clock::now();
    SolveMethod method = pick_method(lp, request.method);

    double audit_scale = 1.0;
    for (const auto& c : lp.constraints) audit_scale = std::max(audit_scale, std::abs(c.rhs));
    const double audit_tol = request.tolerances.feasibility * (1.0 + audit_scale);

    LpResult r;
    if (method == SolveMethod::Simplex) {
        r = solve_simplex(lp, request.limits.max_simplex_iterations);
    } else {
        IpmOptions opts;
        opts.tol = std::min(1e-9, request.tolerances.optimality * 1e-2);
        r = solve_ipm(lp, opts);
        if (r.status == LpStatus::Infeasible && !confirmed_infeasible(lp, method))
            r.status = LpStatus::IterationLimit;
        // An accepted endgame iterate that fails the audit is not an optimum:
        // discard it and let the fallback below have a go.
        if (r.status == LpStatus::Optimal && max_violation(lp, r.x) > audit_tol)
            r.status = LpStatus::IterationLimit;
        // Rare interior-point stalls on degenerate instances fall back to the
        // dense reference when that is still affordable.
        if (r.status == LpStatus::IterationLimit && lp.constraints.size() <= 2200)
            r = solve_simplex(lp, request.limits.max_simplex_iterations);
    }

    SolveOutcome out;
    out.stats.simplex_iterations = r.iterations;
    out.stats.wall_seconds = elapsed_s(t0);
    switch (r.status) {
        case LpStatus::Optimal: {
            double viol = max_violation(lp, r.x);
            if (viol > audit_tol) {
                if (const char* dump = std::getenv("ESOM_DUMP_AUDIT_FAIL")) {
                    write_lp_file(lp, dump);
                    for (std::size_t j = 0; j < lp.variables.size(); ++j) {
                        const auto& v = lp.variables[j];
                        double lo = std::isfinite(v.lower) ? v.lower - r.x[j] : 0.0;
                        double hi = std::isfinite(v.upper) ? r.x[j] - v.upper : 0.0;
                        if (std::max(lo, hi) > 0.1 * viol)
                            std::fprintf(stderr, "  bound viol %s: x=%.9g in [%g, %g]\n",
                                         v.name.c_str(), r.x[j], v.lower, v.upper);
                    }
                    for (const auto& c : lp.constraints) {
                        double lhs = 0.0;
                        for (const auto& t : c.terms) lhs += t.coef * r.x[static_cast<std::size_t>(t.var)];
                        double rv = c.sense == Sense::LessEqual
                                        ? lhs - c.rhs
                                        : (c.sense == Sense::GreaterEqual ? c.rhs - lhs
                                                                          : std::abs(lhs - c.rhs));
                        if (rv > 0.1 * viol)
                            std::fprintf(stderr, "  row viol %s: lhs=%.9g rhs=%.9g\n",
                                         c.name.c_str(), lhs, c.rhs);
                    }
                }
                throw InternalConsistencyError(
                    "solver returned 'optimal' but the independent feasibility audit found a "
                    "violation of " +
                    std::to_string(viol) + " (" + std::to_string(lp.constraints.size()) + " rows)");
            }
            out.status = SolveStatus::Optimal;
            out.primal = std::move(r.x);
            out.duals = std::move(r.duals);
            out.objective = r.objective;
            out.dual_objective = r.dual_objective;
            // The dual objective is a certified lower bound; the primal value
            // may sit above the optimum by the engine's accepted gap.
            out.best_bound = std::min(r.objective, r.dual_objective);
            break;
        }
        case LpStatus::Infeasible:
            out.status = SolveStatus::Infeasible;
            break;
        case LpStatus::Unbounded:
            out.status = SolveStatus::Unbounded;
            break;
        case LpStatus::IterationLimit:
            out.status = SolveStatus::LimitReached;
            break;
    }
    return out;
}

}  // namespace

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::FeasibleWithinGap: return "feasible-within-gap";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::LimitReached: return "limit-reached";
    }
    return "unknown";
}

double max_violation(const LinearProgram& lp, const std::vector<double>& x) {
    double worst = 0.0;
    for (std::size_t j = 0; j < lp.variables.size(); ++j) {
        const auto& v = lp.variables[j];
        if (std::isfinite(v.lower)) worst = std::max(worst, v.lower - x[j]);
        if (std::isfinite(v.upper)) worst = std::max(worst, x[j] - v.upper);
    }
    for (const auto& c : lp.constraints) {
        double lhs = 0.0;
        for (const auto& t : c.terms) lhs += t.coef * x[static_cast<std::size_t>(t.var)];
        switch (c.sense) {
            case Sense::LessEqual: worst = std::max(worst, lhs - c.rhs); break;
            case Sense::GreaterEqual: worst = std::max(worst, c.rhs - lhs); break;
            case Sense::Equal: worst = std::max(worst, std::abs(lhs - c.rhs)); break;
        }
    }
    return worst;
}

SolveOutcome solve_lp(const SolveRequest& request) {
    if (request.instance == nullptr) throw ConfigError("solve_lp: no instance");
    const LinearProgram& lp = *request.instance;
    if (!request.relax_integrality && lp.num_integer() > 0)
        throw ConfigError("solve_lp called on an instance with " + std::to_string(lp.num_integer()) +
                          " integer variables; use solve_milp or opt into relaxation");
    if (lp.num_integer() == 0) return run_lp(lp, request);
    LinearProgram relaxed = lp;
    for (auto& v : relaxed.variables) v.is_integer = false;
    return run_lp(relaxed, request);
}

namespace {

struct BbNode {
    double bound = 0.0;
    int depth = 0;
    // Bound tightenings along the path from the root.
    std::vector<std::pair<int, std::pair<double, double>>> changes;
};

struct NodeOrder {
    bool operator()(const BbNode& a, const BbNode& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
        return a.depth < b.depth;
    }
};

void apply_changes(LinearProgram& lp, const BbNode& node) {
    for (const auto& [var, lu] : node.changes) {
        auto& v = lp.variables[static_cast<std::size_t>(var)];
        v.lower = std::max(v.lower, lu.first);
        v.upper = std::min(v.upper, lu.second);
    }
}

void reset_bounds(LinearProgram& lp, const LinearProgram& orig, const BbNode& node) {
    for (const auto& [var, lu] : node.changes) {
        (void)lu;
        lp.variables[static_cast<std::size_t>(var)].lower = orig.variables[static_cast<std::size_t>(var)].lower;
        lp.variables[static_cast<std::size_t>(var)].upper = orig.variables[static_cast<std::size_t>(var)].upper;
    }
}

}  // namespace

SolveOutcome solve_milp(const SolveRequest& request) {
    if (request.instance == nullptr) throw ConfigError("solve_milp: no instance");
    const LinearProgram& orig = *request.instance;
    auto t0 = Clock::now();

    std::vector<int> int_vars;
    for (std::size_t j = 0; j < orig.variables.size(); ++j)
        if (orig.variables[j].is_integer) int_vars.push_back(static_cast<int>(j));

    SolveRequest lp_req = request;
    lp_req.relax_integrality = true;

    LinearProgram work = orig;
    for (auto& v : work.variables) v.is_integer = false;

    auto node_solve = [&](const BbNode& node) {
        apply_changes(work, node);
        lp_req.instance = &work;
        SolveOutcome r = run_lp(work, lp_req);
        reset_bounds(work, orig, node);
        return r;
    };

    const double int_tol = request.tolerances.integrality;
    auto most_fractional = [&](const std::vector<double>& x) {
        int pick = -1;
        double best = int_tol;
        for (int j : int_vars) {
            double v = x[static_cast<std::size_t>(j)];
            double frac = std::abs(v - std::round(v));
            if (frac > best + 1e-15) {
                best = frac;
                pick = j;
            }
        }
        return pick;
    };

    SolveOutcome out;
    out.status = SolveStatus::LimitReached;

    BbNode root;
    SolveOutcome root_lp = node_solve(root);
    out.stats.bb_nodes = 1;
    if (root_lp.status == SolveStatus::Infeasible || root_lp.status == SolveStatus::Unbounded) {
        out.status = root_lp.status;
        out.stats.wall_seconds = elapsed_s(t0);
        return out;
    }
    if (root_lp.status == SolveStatus::LimitReached) {
        out.stats.wall_seconds = elapsed_s(t0);
        return out;
    }

    double best_obj = kInf;
    std::vector<double> best_x;
    double root_bound = root_lp.best_bound;

    auto try_incumbent = [&](const std::vector<double>& x, double obj) {
        if (obj < best_obj - 1e-12) {
            best_obj = obj;
            best_x = x;
            // Round flagged variables exactly; the polish pass below refits the rest.
            for (int j : int_vars)
                best_x[static_cast<std::size_t>(j)] = std::round(best_x[static_cast<std::size_t>(j)]);
        }
    };

    // LP-and-fix: iteratively pin converged and most-fractional integers at
    // rounded values and refit. Rounding everything at once almost always
    // violates coupling equalities (commitment flow), so the fixes go in
    // batches with a fresh LP between them.
    auto lp_and_fix = [&](const BbNode& from, const SolveOutcome& start) {
        BbNode cur = from;
        SolveOutcome relax = start;
        const std::size_t batch = std::max<std::size_t>(5, int_vars.size() / 8);
        for (std::size_t pass = 0; pass < 40; ++pass) {
            std::vector<std::pair<double, int>> fractional;
            for (int j : int_vars) {
                double v = relax.primal[static_cast<std::size_t>(j)];
                double frac = std::abs(v - std::round(v));
                if (frac > int_tol)
                    fractional.push_back({-frac, j});
                else
                    cur.changes.push_back({j, {std::round(v), std::round(v)}});
            }
            if (fractional.empty()) {
                try_incumbent(relax.primal, relax.objective);
                return true;
            }
            std::sort(fractional.begin(), fractional.end());
            for (std::size_t i = 0; i < std::min(batch, fractional.size()); ++i) {
                int j = fractional[i].second;
                double v = std::round(relax.primal[static_cast<std::size_t>(j)]);
                const auto& vb = orig.variables[static_cast<std::size_t>(j)];
                v = std::clamp(v, vb.lower, vb.upper);
                cur.changes.push_back({j, {v, v}});
            }
            relax = node_solve(cur);
            if (std::getenv("ESOM_BB_TRACE"))
                std::fprintf(stderr, "lp_and_fix pass=%zu fixed=%zu status=%d obj=%.6e\n", pass,
                             cur.changes.size(), (int)relax.status, relax.objective);
            ++out.stats.bb_nodes;
            if (relax.status != SolveStatus::Optimal) return false;
            if (relax.best_bound >= best_obj - 1e-12) return false;  // cannot improve
        }
        return false;
    };

    int pick = most_fractional(root_lp.primal);
    if (pick < 0) {
        // Relaxation already integral: zero branched nodes.
        try_incumbent(root_lp.primal, root_lp.objective);
        out.status = SolveStatus::Optimal;
        out.primal = std::move(best_x);
        out.objective = best_obj;
        out.best_bound = root_bound;
        out.gap = 0.0;
        out.stats.wall_seconds = elapsed_s(t0);
        return out;
    }

    lp_and_fix(root, root_lp);

    std::priority_queue<BbNode, std::vector<BbNode>, NodeOrder> open;
    // Depth-first plunge target: without one, best-bound search wanders
    // breadth-first and may never reach an integral leaf.
    std::optional<BbNode> dive;

    auto make_children = [&](const BbNode& node, const SolveOutcome& lp_out, int var) {
        double v = lp_out.primal[static_cast<std::size_t>(var)];
        BbNode down = node, up = node;
        down.bound = lp_out.best_bound;
        up.bound = lp_out.best_bound;
        ++down.depth;
        ++up.depth;
        down.changes.push_back({var, {-kInf, std::floor(v)}});
        up.changes.push_back({var, {std::ceil(v), kInf}});
        return std::pair<BbNode, BbNode>(std::move(down), std::move(up));
    };
    {
        auto [down, up] = make_children(root, root_lp, pick);
        double v = root_lp.primal[static_cast<std::size_t>(pick)];
        bool go_up = v - std::floor(v) >= 0.5;
        dive = go_up ? up : down;       // plunge toward the nearest integer
        open.push(go_up ? down : up);
    }

    const std::size_t node_limit = std::max<std::size_t>(request.limits.max_bb_nodes, 2);
    const double wall_limit = request.limits.wall_clock_s;
    bool limit_hit = false;
    double proven_bound = root_bound;
    std::size_t since_incumbent = 0;

    while (dive.has_value() || !open.empty()) {
        if (out.stats.bb_nodes >= node_limit ||
            (wall_limit > 0.0 && elapsed_s(t0) > wall_limit)) {
            limit_hit = true;
            if (!open.empty()) proven_bound = std::max(root_bound, open.top().bound);
            break;
        }
        BbNode node;
        if (dive.has_value()) {
            node = std::move(*dive);
            dive.reset();
            // Plunge nodes do not advance the global bound.
        } else {
            node = open.top();
            open.pop();
            double lower = std::max(node.bound, root_bound);
            proven_bound = lower;  // best-bound order: the global proven lower bound
            if (best_obj < kInf) {
                double gap = (best_obj - lower) / std::max(1.0, std::abs(best_obj));
                if (gap <= request.tolerances.mip_gap) break;
            }
        }
        SolveOutcome lp_out = node_solve(node);
        ++out.stats.bb_nodes;
        ++since_incumbent;
        if (lp_out.status == SolveStatus::Infeasible) continue;
        if (lp_out.status != SolveStatus::Optimal) {
            limit_hit = true;  // a node LP failed; remaining tree unexplored
            continue;
        }
        if (lp_out.best_bound >= best_obj - 1e-12) continue;

        int branch_var = most_fractional(lp_out.primal);
        if (branch_var < 0) {
            try_incumbent(lp_out.primal, lp_out.objective);
            since_incumbent = 0;
            continue;
        }
        if (since_incumbent >= 40) {
            lp_and_fix(node, lp_out);  // periodic incumbent refresh
            since_incumbent = 0;
        }

        auto [down, up] = make_children(node, lp_out, branch_var);
        double v = lp_out.primal[static_cast<std::size_t>(branch_var)];
        bool go_up = v - std::floor(v) >= 0.5;
        if (best_obj == kInf) {  // plunge until some incumbent exists
            dive = go_up ? std::move(up) : std::move(down);
            open.push(go_up ? std::move(down) : std::move(up));
        } else {
            open.push(std::move(down));
            open.push(std::move(up));
        }
    }
    if (dive.has_value()) limit_hit = true;  // plunge interrupted by break above
    if (open.empty() && !limit_hit && best_obj < kInf) proven_bound = best_obj;

    // The optimum is never worse than the incumbent itself.
    double final_bound = std::min(proven_bound, best_obj);

    if (best_obj < kInf) {
        // Margin covers the interior-point engine's accepted endgame gap.
        if (best_obj < root_bound - 1e-4 * std::max(1.0, std::abs(root_bound)))
            throw InternalConsistencyError("MILP incumbent beat the root relaxation bound");
        // Polish: refit continuous variables with integers pinned to the incumbent.
        BbNode fixed;
        for (int j : int_vars)
            fixed.changes.push_back({j, {best_x[static_cast<std::size_t>(j)], best_x[static_cast<std::size_t>(j)]}});
        SolveOutcome polish = node_solve(fixed);
        ++out.stats.bb_nodes;
        if (polish.status == SolveStatus::Optimal && polish.objective <= best_obj + 1e-9) {
            best_x = polish.primal;
            for (int j : int_vars)
                best_x[static_cast<std::size_t>(j)] = std::round(best_x[static_cast<std::size_t>(j)]);
            best_obj = std::min(best_obj, polish.objective);
        }
        out.primal = std::move(best_x);
        out.objective = best_obj;
        out.best_bound = final_bound;
        out.gap = std::max(0.0, (best_obj - final_bound) / std::max(1.0, std::abs(best_obj)));
        if (out.gap <= request.tolerances.mip_gap && !limit_hit)
            out.status = out.gap <= 1e-9 ? SolveStatus::Optimal : SolveStatus::FeasibleWithinGap;
        else
            out.status = SolveStatus::FeasibleWithinGap;  // honest gap carried alongside
    } else {
        out.status = limit_hit ? SolveStatus::LimitReached : SolveStatus::Infeasible;
    }
    out.stats.wall_seconds = elapsed_s(t0);
    return out;
}

}  // namespace esom
