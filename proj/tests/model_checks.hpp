#pragma once

// Shared helpers for model-correctness checks: random toy systems and the
// physics audits applied to solved plans. Used by the unit tests and the
// acceptance suite.

#include <cmath>
#include <string>
#include <vector>

#include "esom/model.hpp"
#include "esom/rng.hpp"
#include "esom/timeseries.hpp"

namespace esom::testing {

inline TechCatalog toy_catalog(Rng& rng, bool with_thermal) {
    TechCatalog cat;
    cat.ire_techs.push_back({"solar", 8e5 + 4e5 * rng.uniform01()});
    cat.ire_techs.push_back({"wind", 1.2e6 + 6e5 * rng.uniform01()});
    StorageTech batt;
    batt.id = "battery";
    batt.c_inv_ene = 1.5e5 + 1e5 * rng.uniform01();
    batt.c_inv_pow = 5e4 + 4e4 * rng.uniform01();
    batt.c_deg = 20.0 + 60.0 * rng.uniform01();
    batt.eta = 0.85 + 0.14 * rng.uniform01();
    cat.storage_techs.push_back(batt);
    if (with_thermal) {
        ThermalTech gas;
        gas.id = "gas";
        gas.c_inv = 8e5 + 4e5 * rng.uniform01();
        gas.c_op = 20.0 + 30.0 * rng.uniform01();
        gas.c_updn = 200.0 + 600.0 * rng.uniform01();
        gas.xi_min = 0.2 + 0.2 * rng.uniform01();
        gas.xi_max = 1.0;
        gas.tau_up = 2 + static_cast<int>(rng.below(5));
        gas.tau_dn = 2 + static_cast<int>(rng.below(5));
        gas.n_total = 3 + static_cast<int>(rng.below(3));
        gas.unit_size = 150.0 + 200.0 * rng.uniform01();
        gas.expandable = rng.uniform01() < 0.5;
        cat.thermal_techs.push_back(gas);
    }
    return cat;
}

inline HorizonData toy_data(Rng& rng, std::size_t hours) {
    SynthConfig sc;
    sc.weeks = (hours + 167) / 168;
    if (sc.weeks == 0) sc.weeks = 1;
    sc.base_load = 600.0 + 800.0 * rng.uniform01();
    sc.noise = 0.1 + 0.3 * rng.uniform01();
    HorizonData d = synthesize(sc, rng.raw());
    d.hours = hours;
    d.load.resize(hours);
    for (auto& [id, s] : d.profiles) s.resize(hours);
    // A floor on wind keeps every hour servable, so random feasibility is
    // guaranteed by construction (capacity can always be bought).
    for (auto& v : d.profiles.at("wind")) v = std::max(v, 0.05);
    return d;
}

struct PlanAudit {
    double worst_balance = 0.0;       // scaled residual per spec
    double worst_soc = 0.0;           // absolute SOC recursion residual
    bool soc_bounds_ok = true;
    bool commitment_integral = true;  // n, nUP, nDN integral and flow exact
    bool flow_ok = true;
    bool min_up_down_ok = true;
    bool rps_ok = true;
    std::string detail;

    bool ok() const {
        return worst_balance <= 1e-6 && worst_soc <= 1e-5 && soc_bounds_ok &&
               commitment_integral && flow_ok && min_up_down_ok && rps_ok;
    }
};

// Re-derives every physical relation from the plan series and the raw data
// the instance was built from; independent of the instance's constraint rows.
inline PlanAudit audit_plan(const PlanSolution& plan, const TechCatalog& catalog,
                            const std::vector<SliceView>& segments,
                            const std::vector<std::size_t>& weights, double rps) {
    PlanAudit audit;
    std::size_t total_hours = 0;
    for (const auto& seg : segments) total_hours += seg.load.size();

    std::size_t g = 0;
    double thermal_energy = 0.0, demand_energy = 0.0;
    for (std::size_t si = 0; si < segments.size(); ++si) {
        const auto& seg = segments[si];
        double w = static_cast<double>(weights.empty() ? 1 : weights[si]);
        std::size_t hours = seg.load.size();
        for (std::size_t t = 0; t < hours; ++t, ++g) {
            double supply = 0.0;
            for (const auto& ire : catalog.ire_techs)
                supply += plan.capacities.at("y_IRE_" + ire.id) * seg.profiles.at(ire.id)[t];
            supply -= plan.curtailment[g];
            for (const auto& j : catalog.thermal_techs) {
                double x = plan.dispatch.at("x_THE_" + j.id)[g];
                supply += x;
                thermal_energy += w * x;
            }
            for (const auto& s : catalog.storage_techs)
                supply += plan.dispatch.at("x_DIS_" + s.id)[g] - plan.dispatch.at("x_CHA_" + s.id)[g];
            double L = seg.load[t];
            demand_energy += w * L;
            double resid = std::abs(supply - L) / std::max(1.0, L);
            audit.worst_balance = std::max(audit.worst_balance, resid);

            for (const auto& s : catalog.storage_techs) {
                const auto& E = plan.dispatch.at("E_" + s.id);
                std::size_t seg_start = g - t;
                double eprev = E[t == 0 ? seg_start + hours - 1 : g - 1];
                double dis = plan.dispatch.at("x_DIS_" + s.id)[g];
                double cha = plan.dispatch.at("x_CHA_" + s.id)[g];
                double resid_soc = (hours == 1)
                                       ? std::abs(s.eta * cha - dis / s.eta)
                                       : std::abs(E[g] - eprev - s.eta * cha + dis / s.eta);
                audit.worst_soc = std::max(audit.worst_soc, resid_soc);
                if (E[g] < -1e-6 || E[g] > plan.capacities.at("y_ENE_" + s.id) + 1e-5)
                    audit.soc_bounds_ok = false;
            }

            for (const auto& j : catalog.thermal_techs) {
                double n = plan.commitment.at("n_" + j.id)[g];
                double nup = plan.commitment.at("nUP_" + j.id)[g];
                double ndn = plan.commitment.at("nDN_" + j.id)[g];
                auto integral = [](double v) { return std::abs(v - std::round(v)) < 1e-9; };
                if (!integral(n) || !integral(nup) || !integral(ndn))
                    audit.commitment_integral = false;
                if (t > 0) {
                    double nprev = plan.commitment.at("n_" + j.id)[g - 1];
                    if (std::abs((n - nprev) - (nup - ndn)) > 1e-9) audit.flow_ok = false;
                }
                std::size_t seg_start = g - t;
                double up_sum = 0.0, dn_sum = 0.0;
                for (std::size_t tau = std::max(seg_start, g >= static_cast<std::size_t>(j.tau_up)
                                                               ? g - static_cast<std::size_t>(j.tau_up)
                                                               : seg_start);
                     tau <= g; ++tau)
                    up_sum += plan.commitment.at("nUP_" + j.id)[tau];
                for (std::size_t tau = std::max(seg_start, g >= static_cast<std::size_t>(j.tau_dn)
                                                               ? g - static_cast<std::size_t>(j.tau_dn)
                                                               : seg_start);
                     tau <= g; ++tau)
                    dn_sum += plan.commitment.at("nDN_" + j.id)[tau];
                double fleet_units = plan.capacities.at("y_THE_" + j.id) / j.unit_size;
                if (n + 1e-6 < up_sum) audit.min_up_down_ok = false;
                if (fleet_units - n + 1e-6 < dn_sum) audit.min_up_down_ok = false;
            }
        }
    }
    if (!catalog.thermal_techs.empty() && demand_energy > 0.0) {
        if (thermal_energy / demand_energy > 1.0 - rps + 1e-9) audit.rps_ok = false;
    }
    (void)total_hours;
    return audit;
}

inline std::vector<SliceView> full_segments(const HorizonData& data) {
    return {slice_view(data, TimeSlice{0, 0, data.hours})};
}

}  // namespace esom::testing
