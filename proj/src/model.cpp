#include "esom/model.hpp"

#include <algorithm>
#include <cmath>

namespace esom {

Variant variant_from_string(const std::string& s) {
    if (s == "linear") return Variant::Linear;
    if (s == "integer") return Variant::Integer;
    throw ConfigError("unknown variant '" + s + "' (expected linear|integer)");
}

std::string to_string(Variant v) { return v == Variant::Linear ? "linear" : "integer"; }

namespace {

struct Segment {
    SliceView view;
    double weight = 1.0;
};

void check_variant(const TechCatalog& catalog, Variant variant) {
    if (variant == Variant::Linear && !catalog.thermal_techs.empty())
        throw ConfigError("linear variant requires a catalog without thermal techs (got " +
                          std::to_string(catalog.thermal_techs.size()) + ")");
    if (variant == Variant::Integer && catalog.thermal_techs.empty())
        throw ConfigError("integer variant requires at least one thermal tech");
}

void check_resources(const HorizonData& data, const TechCatalog& catalog) {
    if (catalog.ire_techs.empty())
        throw ConfigError("catalog has no intermittent renewable techs");
    for (const auto& t : catalog.ire_techs)
        if (!data.profiles.count(t.id))
            throw ConfigError("data has no profile for IRE tech '" + t.id + "'");
}

EsomInstance build(const std::vector<Segment>& segments, const TechCatalog& catalog,
                   const Policy& policy, Variant variant, double fix_scale, bool with_rps) {
    catalog.validate();
    policy.validate();
    check_variant(catalog, variant);

    EsomInstance inst;
    inst.scope_weights.clear();
    std::size_t total_hours = 0;
    for (const auto& seg : segments) total_hours += seg.view.load.size();
    if (total_hours == 0) throw ConfigError("cannot build a model over an empty horizon");

    // Shared capacity variables.
    for (const auto& t : catalog.ire_techs)
        inst.add_variable("y_IRE_" + t.id, 0.0, kInf, fix_scale * t.c_inv);
    for (const auto& s : catalog.storage_techs) {
        inst.add_variable("y_ENE_" + s.id, 0.0, kInf, fix_scale * s.c_inv_ene);
        inst.add_variable("y_POW_" + s.id, 0.0, kInf, fix_scale * s.c_inv_pow);
    }
    for (const auto& j : catalog.thermal_techs) {
        // Fleet size in units; rating per unit is the catalog's unit_size.
        double n = static_cast<double>(j.n_total);
        inst.add_variable("y_THE_" + j.id, j.expandable ? 0.0 : n, n,
                          fix_scale * j.c_inv * j.unit_size, variant == Variant::Integer);
    }

    // Hour-major dispatch variables. Global hour index g runs across segments.
    std::size_t g = 0;
    for (const auto& seg : segments) {
        std::size_t hours = seg.view.load.size();
        for (std::size_t t = 0; t < hours; ++t, ++g) {
            std::string suffix = "_" + std::to_string(g);
            for (const auto& j : catalog.thermal_techs) {
                double w = seg.weight;
                inst.add_variable("x_THE_" + j.id + suffix, 0.0, kInf, w * j.c_op);
                double n = static_cast<double>(j.n_total);
                bool integral = variant == Variant::Integer;
                inst.add_variable("n_" + j.id + suffix, 0.0, n, 0.0, integral);
                inst.add_variable("nUP_" + j.id + suffix, 0.0, n, w * j.c_updn, integral);
                inst.add_variable("nDN_" + j.id + suffix, 0.0, n, w * j.c_updn, integral);
            }
            for (const auto& s : catalog.storage_techs) {
                double w = seg.weight;
                inst.add_variable("x_DIS_" + s.id + suffix, 0.0, kInf, w * s.c_deg);
                inst.add_variable("x_CHA_" + s.id + suffix, 0.0, kInf, w * s.c_deg);
                inst.add_variable("E_" + s.id + suffix, 0.0, kInf, 0.0);
            }
            inst.add_variable("w" + suffix, 0.0, kInf, 0.0);
        }
    }

    // Hour-major constraints.
    g = 0;
    for (const auto& seg : segments) {
        std::size_t hours = seg.view.load.size();
        std::size_t seg_start = g;
        for (std::size_t t = 0; t < hours; ++t, ++g) {
            std::string suffix = "_" + std::to_string(g);

            std::vector<LinTerm> balance;
            for (const auto& ire : catalog.ire_techs) {
                double a = seg.view.profiles.at(ire.id)[t];
                balance.push_back({inst.var("y_IRE_" + ire.id), a});
            }
            balance.push_back({inst.var("w" + suffix), -1.0});
            for (const auto& j : catalog.thermal_techs)
                balance.push_back({inst.var("x_THE_" + j.id + suffix), 1.0});
            for (const auto& s : catalog.storage_techs) {
                balance.push_back({inst.var("x_DIS_" + s.id + suffix), 1.0});
                balance.push_back({inst.var("x_CHA_" + s.id + suffix), -1.0});
            }
            inst.add_constraint("balance" + suffix, std::move(balance), Sense::Equal,
                                seg.view.load[t]);

            for (const auto& j : catalog.thermal_techs) {
                int x = inst.var("x_THE_" + j.id + suffix);
                int n = inst.var("n_" + j.id + suffix);
                int nup = inst.var("nUP_" + j.id + suffix);
                int ndn = inst.var("nDN_" + j.id + suffix);
                int fleet = inst.var("y_THE_" + j.id);

                inst.add_constraint("minout_" + j.id + suffix,
                                    {{x, 1.0}, {n, -j.xi_min * j.unit_size}}, Sense::GreaterEqual,
                                    0.0);
                inst.add_constraint("maxout_" + j.id + suffix,
                                    {{x, 1.0}, {n, -j.xi_max * j.unit_size}}, Sense::LessEqual, 0.0);
                if (t > 0) {
                    int nprev = inst.var("n_" + j.id + "_" + std::to_string(g - 1));
                    inst.add_constraint("flow_" + j.id + suffix,
                                        {{n, 1.0}, {nprev, -1.0}, {nup, -1.0}, {ndn, 1.0}},
                                        Sense::Equal, 0.0);
                }
                inst.add_constraint("ncap_" + j.id + suffix, {{n, 1.0}, {fleet, -1.0}},
                                    Sense::LessEqual, 0.0);

                // Min up/down sums, truncated at the segment start (no history).
                std::vector<LinTerm> up{{n, 1.0}};
                std::size_t from_up = g >= static_cast<std::size_t>(j.tau_up) + seg_start
                                          ? g - static_cast<std::size_t>(j.tau_up)
                                          : seg_start;
                for (std::size_t tau = from_up; tau <= g; ++tau)
                    up.push_back({inst.var("nUP_" + j.id + "_" + std::to_string(tau)), -1.0});
                inst.add_constraint("minup_" + j.id + suffix, std::move(up), Sense::GreaterEqual,
                                    0.0);

                std::vector<LinTerm> dn{{fleet, 1.0}, {n, -1.0}};
                std::size_t from_dn = g >= static_cast<std::size_t>(j.tau_dn) + seg_start
                                          ? g - static_cast<std::size_t>(j.tau_dn)
                                          : seg_start;
                for (std::size_t tau = from_dn; tau <= g; ++tau)
                    dn.push_back({inst.var("nDN_" + j.id + "_" + std::to_string(tau)), -1.0});
                inst.add_constraint("mindn_" + j.id + suffix, std::move(dn), Sense::GreaterEqual,
                                    0.0);
            }

            for (const auto& s : catalog.storage_techs) {
                int dis = inst.var("x_DIS_" + s.id + suffix);
                int cha = inst.var("x_CHA_" + s.id + suffix);
                int e = inst.var("E_" + s.id + suffix);
                // Cyclic within the segment: hour 0 links back to the last hour.
                std::size_t prev = t == 0 ? seg_start + hours - 1 : g - 1;
                int eprev = inst.var("E_" + s.id + "_" + std::to_string(prev));
                if (hours == 1) {
                    inst.add_constraint("soc_" + s.id + suffix,
                                        {{cha, -s.eta}, {dis, 1.0 / s.eta}}, Sense::Equal, 0.0);
                } else {
                    inst.add_constraint("soc_" + s.id + suffix,
                                        {{e, 1.0}, {eprev, -1.0}, {cha, -s.eta}, {dis, 1.0 / s.eta}},
                                        Sense::Equal, 0.0);
                }
                inst.add_constraint("ecap_" + s.id + suffix,
                                    {{e, 1.0}, {inst.var("y_ENE_" + s.id), -1.0}}, Sense::LessEqual,
                                    0.0);
                inst.add_constraint("dcap_" + s.id + suffix,
                                    {{dis, 1.0}, {inst.var("y_POW_" + s.id), -1.0}},
                                    Sense::LessEqual, 0.0);
                inst.add_constraint("ccap_" + s.id + suffix,
                                    {{cha, 1.0}, {inst.var("y_POW_" + s.id), -1.0}},
                                    Sense::LessEqual, 0.0);
            }
        }
    }

    // Renewable portfolio standard over the (weighted) scope.
    if (!catalog.thermal_techs.empty() && with_rps) {
        std::vector<LinTerm> rps;
        double demand = 0.0;
        g = 0;
        for (const auto& seg : segments) {
            std::size_t hours = seg.view.load.size();
            for (std::size_t t = 0; t < hours; ++t, ++g) {
                for (const auto& j : catalog.thermal_techs)
                    rps.push_back({inst.var("x_THE_" + j.id + "_" + std::to_string(g)), seg.weight});
                demand += seg.weight * seg.view.load[t];
            }
        }
        inst.add_constraint("rps", std::move(rps), Sense::LessEqual, (1.0 - policy.rps) * demand);
    }

    inst.scope_segment_hours.clear();
    for (const auto& seg : segments) inst.scope_segment_hours.push_back(seg.view.load.size());
    inst.scope_fix_scale = fix_scale;
    return inst;
}

}  // namespace

EsomInstance build_full(const HorizonData& data, const TechCatalog& catalog, const Policy& policy,
                        Variant variant) {
    check_resources(data, catalog);
    if (data.hours == 0) throw ConfigError("empty horizon");
    Segment seg;
    seg.view = slice_view(data, TimeSlice{0, 0, data.hours});
    seg.weight = 1.0;
    EsomInstance inst = build({seg}, catalog, policy, variant, 1.0, true);
    inst.name = "esom_full";
    inst.scope = InstanceScope::Full;
    inst.scope_weights = {1};
    return inst;
}

EsomInstance build_slice(const HorizonData& data, const TimeSlice& slice, const TechCatalog& catalog,
                         const Policy& policy, Variant variant) {
    check_resources(data, catalog);
    if (slice.offset + slice.length > data.hours)
        throw ConfigError("slice exceeds horizon");
    Segment seg;
    seg.view = slice_view(data, slice);
    seg.weight = 1.0;
    double fix_scale = static_cast<double>(slice.length) / static_cast<double>(data.hours);
    EsomInstance inst = build({seg}, catalog, policy, variant, fix_scale, policy.rps_in_slices);
    inst.name = "esom_slice_" + std::to_string(slice.index);
    inst.scope = InstanceScope::Slice;
    inst.scope_slice_index = slice.index;
    inst.scope_weights = {1};
    return inst;
}

EsomInstance build_reduced(const HorizonData& data, const std::vector<TimeSlice>& slices,
                           const AggregationResult& aggregation, const TechCatalog& catalog,
                           const Policy& policy, Variant variant) {
    check_resources(data, catalog);
    aggregation.check(slices.size());

    std::vector<Segment> segments;
    segments.reserve(aggregation.weights.size());
    for (std::size_t c = 0; c < aggregation.weights.size(); ++c) {
        Segment seg;
        if (aggregation.centroid_mode) {
            seg.view = aggregation.centroid_profiles.at(c);
        } else {
            int rep = aggregation.representatives.at(c);
            seg.view = slice_view(data, slices.at(static_cast<std::size_t>(rep)));
        }
        seg.weight = static_cast<double>(aggregation.weights[c]);
        segments.push_back(std::move(seg));
    }
    EsomInstance inst = build(segments, catalog, policy, variant, 1.0, true);
    inst.name = "esom_reduced";
    inst.scope = InstanceScope::Reduced;
    inst.scope_weights = aggregation.weights;
    return inst;
}

PlanSolution extract_costs(const EsomInstance& instance, const SolveOutcome& outcome,
                           const TechCatalog& catalog) {
    if (!outcome.has_solution())
        throw SolveError("cannot extract a plan from a solve with status '" +
                         to_string(outcome.status) + "'");
    const auto& x = outcome.primal;

    PlanSolution plan;
    plan.status = outcome.status;
    plan.objective = outcome.objective;
    plan.mip_gap = outcome.gap;
    plan.stats = outcome.stats;
    plan.solve_seconds = outcome.stats.wall_seconds;

    auto value = [&](const std::string& name) {
        return x[static_cast<std::size_t>(instance.var(name))];
    };

    std::size_t total_hours = 0;
    for (std::size_t h : instance.scope_segment_hours) total_hours += h;
    std::vector<double> hour_weight(total_hours, 1.0);
    {
        std::size_t g = 0;
        for (std::size_t seg = 0; seg < instance.scope_segment_hours.size(); ++seg) {
            double w = instance.scope_weights.empty()
                           ? 1.0
                           : static_cast<double>(instance.scope_weights[seg]);
            for (std::size_t t = 0; t < instance.scope_segment_hours[seg]; ++t, ++g)
                hour_weight[g] = w;
        }
    }

    CostBreakdown costs;
    for (const auto& ire : catalog.ire_techs) {
        double y = value("y_IRE_" + ire.id);
        plan.capacities["y_IRE_" + ire.id] = y;
        costs.c_fix += instance.scope_fix_scale * ire.c_inv * y;
    }
    for (const auto& s : catalog.storage_techs) {
        double ye = value("y_ENE_" + s.id), yp = value("y_POW_" + s.id);
        plan.capacities["y_ENE_" + s.id] = ye;
        plan.capacities["y_POW_" + s.id] = yp;
        costs.c_fix += instance.scope_fix_scale * (s.c_inv_ene * ye + s.c_inv_pow * yp);
    }
    for (const auto& j : catalog.thermal_techs) {
        double units = value("y_THE_" + j.id);
        plan.capacities["y_THE_" + j.id] = units * j.unit_size;  // fleet MW
        costs.c_fix += instance.scope_fix_scale * j.c_inv * j.unit_size * units;
    }

    plan.curtailment.resize(total_hours);
    for (std::size_t g = 0; g < total_hours; ++g)
        plan.curtailment[g] = value("w_" + std::to_string(g));

    for (const auto& j : catalog.thermal_techs) {
        auto& xthe = plan.dispatch["x_THE_" + j.id];
        auto& n = plan.commitment["n_" + j.id];
        auto& nup = plan.commitment["nUP_" + j.id];
        auto& ndn = plan.commitment["nDN_" + j.id];
        xthe.resize(total_hours);
        n.resize(total_hours);
        nup.resize(total_hours);
        ndn.resize(total_hours);
        for (std::size_t g = 0; g < total_hours; ++g) {
            std::string suffix = "_" + std::to_string(g);
            xthe[g] = value("x_THE_" + j.id + suffix);
            n[g] = value("n_" + j.id + suffix);
            nup[g] = value("nUP_" + j.id + suffix);
            ndn[g] = value("nDN_" + j.id + suffix);
            costs.c_op += hour_weight[g] * j.c_op * xthe[g];
            costs.c_updn += hour_weight[g] * j.c_updn * (nup[g] + ndn[g]);
        }
    }
    for (const auto& s : catalog.storage_techs) {
        auto& dis = plan.dispatch["x_DIS_" + s.id];
        auto& cha = plan.dispatch["x_CHA_" + s.id];
        auto& soc = plan.dispatch["E_" + s.id];
        dis.resize(total_hours);
        cha.resize(total_hours);
        soc.resize(total_hours);
        for (std::size_t g = 0; g < total_hours; ++g) {
            std::string suffix = "_" + std::to_string(g);
            dis[g] = value("x_DIS_" + s.id + suffix);
            cha[g] = value("x_CHA_" + s.id + suffix);
            soc[g] = value("E_" + s.id + suffix);
            costs.c_deg += hour_weight[g] * s.c_deg * (dis[g] + cha[g]);
        }
    }

    costs.c_var = costs.c_deg + costs.c_op + costs.c_updn;
    costs.total = costs.c_var + costs.c_fix;
    plan.costs = costs;

    double rel = std::abs(costs.total - outcome.objective) /
                 std::max({1.0, std::abs(costs.total), std::abs(outcome.objective)});
    if (rel > 1e-6)
        throw InternalConsistencyError(
            "cost breakdown recomputed from the primal point (" + std::to_string(costs.total) +
            ") disagrees with the solver objective (" + std::to_string(outcome.objective) + ")");
    return plan;
}

std::vector<std::string> capacity_names(const TechCatalog& catalog, Variant variant) {
    std::vector<std::string> names;
    for (const auto& t : catalog.ire_techs) names.push_back("y_IRE_" + t.id);
    for (const auto& s : catalog.storage_techs) {
        names.push_back("y_ENE_" + s.id);
        names.push_back("y_POW_" + s.id);
    }
    if (variant == Variant::Integer)
        for (const auto& j : catalog.thermal_techs) names.push_back("y_THE_" + j.id);
    return names;
}

std::vector<double> capacity_vector(const PlanSolution& plan, const TechCatalog& catalog,
                                    Variant variant) {
    std::vector<double> out;
    for (const auto& name : capacity_names(catalog, variant)) out.push_back(plan.capacities.at(name));
    return out;
}

}  // namespace esom
