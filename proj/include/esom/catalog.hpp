#pragma once

#include <string>
#include <vector>

#include "esom/errors.hpp"

namespace esom {

// Costs are stored in $/MW and $/MWh of installed capacity; JSON configs
// give CAPEX in $/kW / $/kWh and are converted at ingestion.
struct IreTech {
    std::string id;
    double c_inv = 0.0;  // $/MW
};

struct StorageTech {
    std::string id;
    double c_inv_ene = 0.0;  // $/MWh of energy capacity
    double c_inv_pow = 0.0;  // $/MW of power capacity
    double c_deg = 0.0;      // $/MWh throughput (charge + discharge)
    double eta = 1.0;        // per-leg efficiency, in (0,1]
};

struct ThermalTech {
    std::string id;
    double c_inv = 0.0;      // $/MW
    double c_op = 0.0;       // $/MWh generated
    double c_updn = 0.0;     // $/start-up or shut-down event
    double xi_min = 0.0;     // min output fraction of online rating
    double xi_max = 1.0;
    int tau_up = 0;          // min up time, hours
    int tau_dn = 0;          // min down time, hours
    int n_total = 0;         // fleet ceiling, units
    double unit_size = 0.0;  // MW rating per unit
    bool expandable = false; // fleet size a decision variable (else fixed at n_total)
};

struct TechCatalog {
    std::vector<IreTech> ire_techs;
    std::vector<StorageTech> storage_techs;
    std::vector<ThermalTech> thermal_techs;

    void validate() const;
};

struct Policy {
    double rps = 0.0;              // renewable portfolio fraction R in [0,1]
    bool rps_in_slices = true;     // apply the RPS constraint inside slice subproblems

    void validate() const;
};

// JSON config: {"ire": [...], "storage": [...], "thermal": [...], "policy": {...}}
// CAPEX fields are $/kW ($/kWh for storage energy), matching published tables.
TechCatalog load_catalog(const std::string& path);
Policy load_policy(const std::string& path);  // from the same file; absent -> defaults
void save_catalog(const TechCatalog& catalog, const Policy& policy, const std::string& path);

}  // namespace esom
