#pragma once

#include <map>
#include <string>
#include <vector>

#include "esom/catalog.hpp"
#include "esom/clustering.hpp"
#include "esom/instance.hpp"
#include "esom/solver.hpp"
#include "esom/timeseries.hpp"

namespace esom {

enum class Variant { Linear, Integer };

Variant variant_from_string(const std::string& s);
std::string to_string(Variant v);

// Compilers for the capacity-expansion model: hourly energy balance with
// curtailment, storage state of charge with symmetric leg efficiency,
// aggregated-fleet unit commitment with min up/down times, and a renewable
// portfolio standard over the scope's (weighted) hours.
//
// Variables and constraints are emitted hour-major with shared capacities up
// front, which is what gives the instance the banded-plus-border shape the
// structured solver expects.
EsomInstance build_full(const HorizonData& data, const TechCatalog& catalog, const Policy& policy,
                        Variant variant);

EsomInstance build_slice(const HorizonData& data, const TimeSlice& slice, const TechCatalog& catalog,
                         const Policy& policy, Variant variant);

EsomInstance build_reduced(const HorizonData& data, const std::vector<TimeSlice>& slices,
                           const AggregationResult& aggregation, const TechCatalog& catalog,
                           const Policy& policy, Variant variant);

struct CostBreakdown {
    double c_deg = 0.0, c_op = 0.0, c_updn = 0.0;  // variable cost split
    double c_var = 0.0, c_fix = 0.0;
    double total = 0.0;
};

struct PlanSolution {
    SolveStatus status = SolveStatus::LimitReached;
    std::map<std::string, double> capacities;  // y_IRE_<id> (MW), y_ENE/y_POW_<id>, y_THE_<id> (fleet MW)
    std::map<std::string, std::vector<double>> dispatch;    // x_THE_/x_DIS_/x_CHA_/E_<id> per scope hour
    std::map<std::string, std::vector<double>> commitment;  // n_/nUP_/nDN_<id>
    std::vector<double> curtailment;
    double objective = 0.0;
    CostBreakdown costs;
    double mip_gap = 0.0;
    SolveStats stats;
    double solve_seconds = 0.0;
};

// Reads the primal point back into plan form and recomputes every cost
// component from catalog prices; a mismatch with the solver's objective
// beyond 1e-6 relative raises InternalConsistencyError. Non-solution solver
// statuses raise SolveError instead of fabricating a plan.
PlanSolution extract_costs(const EsomInstance& instance, const SolveOutcome& outcome,
                           const TechCatalog& catalog);

// Capacity vector in a fixed order (IRE..., storage ENE/POW..., thermal fleet
// MW in the integer variant); the adaptive feature vector of a slice solve.
std::vector<double> capacity_vector(const PlanSolution& plan, const TechCatalog& catalog,
                                    Variant variant);
std::vector<std::string> capacity_names(const TechCatalog& catalog, Variant variant);

}  // namespace esom
