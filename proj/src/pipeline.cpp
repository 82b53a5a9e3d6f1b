#include "esom/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "esom/hashing.hpp"
#include "esom/parallel.hpp"

namespace esom {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double elapsed_s(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

json plan_to_json(const PlanSolution& plan) {
    json j;
    j["status"] = to_string(plan.status);
    j["objective"] = plan.objective;
    j["mip_gap"] = plan.mip_gap;
    j["solve_seconds"] = plan.solve_seconds;
    j["capacities"] = plan.capacities;
    j["dispatch"] = plan.dispatch;
    j["commitment"] = plan.commitment;
    j["curtailment"] = plan.curtailment;
    j["costs"] = {{"c_deg", plan.costs.c_deg},   {"c_op", plan.costs.c_op},
                  {"c_updn", plan.costs.c_updn}, {"c_var", plan.costs.c_var},
                  {"c_fix", plan.costs.c_fix},   {"total", plan.costs.total}};
    j["stats"] = {{"simplex_iterations", plan.stats.simplex_iterations},
                  {"bb_nodes", plan.stats.bb_nodes}};
    return j;
}

PlanSolution plan_from_json(const json& j) {
    PlanSolution plan;
    std::string st = j.at("status").get<std::string>();
    if (st == "optimal") plan.status = SolveStatus::Optimal;
    else if (st == "feasible-within-gap") plan.status = SolveStatus::FeasibleWithinGap;
    else if (st == "infeasible") plan.status = SolveStatus::Infeasible;
    else if (st == "unbounded") plan.status = SolveStatus::Unbounded;
    else plan.status = SolveStatus::LimitReached;
    plan.objective = j.at("objective").get<double>();
    plan.mip_gap = j.value("mip_gap", 0.0);
    plan.solve_seconds = j.value("solve_seconds", 0.0);
    plan.capacities = j.at("capacities").get<std::map<std::string, double>>();
    plan.dispatch = j.at("dispatch").get<std::map<std::string, std::vector<double>>>();
    plan.commitment = j.at("commitment").get<std::map<std::string, std::vector<double>>>();
    plan.curtailment = j.at("curtailment").get<std::vector<double>>();
    const auto& c = j.at("costs");
    plan.costs = {c.at("c_deg"), c.at("c_op"), c.at("c_updn"), c.at("c_var"), c.at("c_fix"),
                  c.at("total")};
    plan.stats.simplex_iterations = j.at("stats").value("simplex_iterations", 0ull);
    plan.stats.bb_nodes = j.at("stats").value("bb_nodes", 0ull);
    return plan;
}

std::string catalog_fingerprint(const TechCatalog& catalog) {
    json j;
    for (const auto& t : catalog.ire_techs) j["ire"].push_back({{"id", t.id}, {"c", t.c_inv}});
    for (const auto& s : catalog.storage_techs)
        j["sto"].push_back(
            {{"id", s.id}, {"e", s.c_inv_ene}, {"p", s.c_inv_pow}, {"d", s.c_deg}, {"eta", s.eta}});
    for (const auto& t : catalog.thermal_techs)
        j["the"].push_back({{"id", t.id},
                            {"c", t.c_inv},
                            {"op", t.c_op},
                            {"ud", t.c_updn},
                            {"xmin", t.xi_min},
                            {"xmax", t.xi_max},
                            {"tu", t.tau_up},
                            {"td", t.tau_dn},
                            {"n", t.n_total},
                            {"u", t.unit_size},
                            {"exp", t.expandable}});
    return j.dump();
}

SolveOutcome solve_instance(const EsomInstance& inst, const PipelineConfig& config) {
    SolveRequest req;
    req.instance = &inst;
    req.tolerances = config.tolerances;
    req.limits = config.limits;
    return inst.num_integer() > 0 ? solve_milp(req) : solve_lp(req);
}

}  // namespace

std::string benchmark_cache_key(const HorizonData& data, const TechCatalog& catalog,
                                const Policy& policy, const PipelineConfig& config) {
    Sha256 h;
    h.update("benchmark-v1|");
    h.update(std::to_string(data.hours) + "|");
    h.update_doubles(data.load);
    for (const auto& [id, series] : data.profiles) {
        h.update(id + "|");
        h.update_doubles(series);
    }
    h.update(catalog_fingerprint(catalog));
    h.update_double(policy.rps);
    h.update(to_string(config.variant));
    h.update("|nodes=" + std::to_string(config.limits.max_bb_nodes) +
             "|gap=" + std::to_string(config.tolerances.mip_gap));
    return h.hex_digest();
}

PlanSolution run_benchmark(const HorizonData& data, const TechCatalog& catalog,
                           const Policy& policy, const PipelineConfig& config) {
    std::string key = benchmark_cache_key(data, catalog, policy, config);
    fs::path cache_file;
    if (!config.cache_dir.empty()) {
        fs::create_directories(config.cache_dir);
        cache_file = fs::path(config.cache_dir) / ("benchmark_" + key + ".json");
        if (fs::exists(cache_file) && !config.audit_cache) {
            std::ifstream in(cache_file);
            json j;
            in >> j;
            return plan_from_json(j);
        }
    }

    EsomInstance inst = build_full(data, catalog, policy, config.variant);
    auto t0 = Clock::now();
    SolveOutcome outcome = solve_instance(inst, config);
    double seconds = elapsed_s(t0);
    if (!outcome.has_solution())
        throw SolveError("benchmark solve ended with status '" + to_string(outcome.status) + "'");
    PlanSolution plan = extract_costs(inst, outcome, catalog);
    plan.solve_seconds = seconds;

    if (!cache_file.empty()) {
        if (config.audit_cache && fs::exists(cache_file)) {
            std::ifstream in(cache_file);
            json j;
            in >> j;
            PlanSolution cached = plan_from_json(j);
            if (std::abs(cached.objective - plan.objective) >
                1e-9 * std::max(1.0, std::abs(plan.objective)))
                throw InternalConsistencyError("cache audit: cached benchmark objective " +
                                               std::to_string(cached.objective) +
                                               " != recomputed " + std::to_string(plan.objective));
        }
        std::ofstream out(cache_file);
        out << plan_to_json(plan).dump(1) << '\n';
    }
    return plan;
}

FeatureMatrix extract_features(const HorizonData& data, const std::vector<TimeSlice>& slices,
                               const TechCatalog& catalog, const Policy& policy,
                               const PipelineConfig& config) {
    if (slices.empty()) throw ConfigError("extract_features: no slices");
    auto names = capacity_names(catalog, config.variant);

    FeatureMatrix fm;
    fm.mode = FeatureMode::Adaptive;
    fm.rows = slices.size();
    fm.dim = names.size();
    fm.dim_names = names;
    fm.data.assign(fm.rows * fm.dim, 0.0);

    std::vector<std::string> slice_errors(slices.size());
    parallel_for(slices.size(), config.jobs, [&](std::size_t s) {
        Policy slice_policy = policy;
        slice_policy.rps_in_slices = config.rps_in_slices;
        EsomInstance inst = build_slice(data, slices[s], catalog, slice_policy, config.variant);
        SolveOutcome outcome = solve_instance(inst, config);
        if (!outcome.has_solution() && config.slice_rps_fallback && config.rps_in_slices) {
            slice_policy.rps_in_slices = false;
            inst = build_slice(data, slices[s], catalog, slice_policy, config.variant);
            outcome = solve_instance(inst, config);
        }
        if (!outcome.has_solution()) {
            slice_errors[s] = "slice " + std::to_string(slices[s].index) +
                              " subproblem ended with status '" + to_string(outcome.status) + "'";
            return;
        }
        PlanSolution plan = extract_costs(inst, outcome, catalog);
        auto vec = capacity_vector(plan, catalog, config.variant);
        for (std::size_t d = 0; d < fm.dim; ++d) fm.at(s, d) = vec[d];
    });
    for (const auto& e : slice_errors)
        if (!e.empty()) throw SolveError(e);
    return fm;
}

FeatureMatrix traditional_features(const HorizonData& data, const std::vector<TimeSlice>& slices,
                                   const TechCatalog& catalog) {
    if (slices.empty()) throw ConfigError("traditional_features: no slices");
    const std::size_t len = slices.front().length;
    FeatureMatrix fm;
    fm.mode = FeatureMode::Traditional;
    fm.rows = slices.size();
    fm.dim = (1 + catalog.ire_techs.size()) * len;
    fm.data.assign(fm.rows * fm.dim, 0.0);
    fm.dim_names.reserve(fm.dim);
    for (std::size_t t = 0; t < len; ++t) fm.dim_names.push_back("load_" + std::to_string(t));
    for (const auto& ire : catalog.ire_techs)
        for (std::size_t t = 0; t < len; ++t)
            fm.dim_names.push_back(ire.id + "_" + std::to_string(t));

    for (std::size_t s = 0; s < slices.size(); ++s) {
        SliceView v = slice_view(data, slices[s]);
        std::size_t d = 0;
        for (std::size_t t = 0; t < len; ++t) fm.at(s, d++) = v.load[t];
        for (const auto& ire : catalog.ire_techs) {
            const auto& series = v.profiles.at(ire.id);
            for (std::size_t t = 0; t < len; ++t) fm.at(s, d++) = series[t];
        }
    }
    return fm;
}

AggregationResult cluster_features(const FeatureMatrix& raw, const ClusterConfig& cluster,
                                   const HorizonData& data, const std::vector<TimeSlice>& slices) {
    FeatureMatrix prepared = cluster.standardize_features ? standardize(raw) : raw;
    AggregationResult clusters;
    if (cluster.method == "kmeans") {
        clusters = kmeans(prepared, cluster.k, cluster.seed, cluster.kmeans_restarts);
    } else if (cluster.method == "agglomerative") {
        clusters = agglomerative(prepared, cluster.k, cluster.linkage);
    } else {
        throw ConfigError("unknown clustering method '" + cluster.method + "'");
    }
    clusters = select_representatives(std::move(clusters), prepared, data, slices,
                                      cluster.centroid_mode);
    clusters.meta.seed = cluster.seed;
    clusters.meta.standardized = cluster.standardize_features;
    return clusters;
}

MapeResult mape(const std::vector<std::string>& names, const std::vector<double>& benchmark,
                const std::vector<double>& estimate) {
    if (names.size() != benchmark.size() || benchmark.size() != estimate.size())
        throw ConfigError("mape: length mismatch");
    MapeResult res;
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < benchmark.size(); ++i) {
        if (std::abs(benchmark[i]) <= 1e-12) {
            res.excluded.push_back(names[i]);
            continue;
        }
        double c = std::abs(estimate[i] - benchmark[i]) / std::abs(benchmark[i]);
        res.components[names[i]] = c;
        sum += c;
        ++n;
    }
    if (n == 0)
        throw ValidationError("mape: benchmark capacities are all zero, metric undefined");
    res.aggregate = sum / static_cast<double>(n);
    return res;
}

namespace {

EvaluationReport run_mode(const std::string& mode, const HorizonData& data,
                          const TechCatalog& catalog, const Policy& policy,
                          const PipelineConfig& config, const ClusterConfig& cluster) {
    EvaluationReport rep;
    rep.mode = mode;
    rep.variant = to_string(config.variant);
    rep.rps = policy.rps;
    rep.k = cluster.k;
    rep.method = cluster.method;
    rep.linkage = cluster.method == "agglomerative" ? to_string(cluster.linkage) : "";
    rep.centroid_mode = cluster.centroid_mode;
    rep.seed = cluster.seed;

    PlanSolution benchmark = run_benchmark(data, catalog, policy, config);
    rep.benchmark_solve_seconds = benchmark.solve_seconds;
    rep.benchmark_objective = benchmark.objective;
    rep.benchmark_status = to_string(benchmark.status);
    rep.benchmark_capacities = benchmark.capacities;

    auto slices = slice(data, config.slice_hours).slices;
    rep.slice_count = slices.size();

    auto t0 = Clock::now();
    FeatureMatrix raw = mode == "adaptive"
                            ? extract_features(data, slices, catalog, policy, config)
                            : traditional_features(data, slices, catalog);
    rep.extraction_seconds = elapsed_s(t0);

    t0 = Clock::now();
    AggregationResult agg = cluster_features(raw, cluster, data, slices);
    rep.clustering_seconds = elapsed_s(t0);
    rep.weights = agg.weights;
    rep.representatives = agg.representatives;

    EsomInstance reduced = build_reduced(data, slices, agg, catalog, policy, config.variant);
    t0 = Clock::now();
    SolveOutcome outcome = solve_instance(reduced, config);
    rep.reduced_solve_seconds = elapsed_s(t0);
    if (!outcome.has_solution())
        throw SolveError("reduced model solve ended with status '" + to_string(outcome.status) +
                         "'");
    PlanSolution plan = extract_costs(reduced, outcome, catalog);
    rep.reduced_objective = plan.objective;
    rep.reduced_status = to_string(plan.status);
    rep.reduced_capacities = plan.capacities;

    auto names = capacity_names(catalog, config.variant);
    auto bench_vec = capacity_vector(benchmark, catalog, config.variant);
    auto red_vec = capacity_vector(plan, catalog, config.variant);
    MapeResult m = mape(names, bench_vec, red_vec);
    rep.mape_components = m.components;
    rep.mape_excluded = m.excluded;
    rep.mape_aggregate = m.aggregate;
    return rep;
}

}  // namespace

EvaluationReport run_adaptive(const HorizonData& data, const TechCatalog& catalog,
                              const Policy& policy, const PipelineConfig& config,
                              const ClusterConfig& cluster) {
    return run_mode("adaptive", data, catalog, policy, config, cluster);
}

EvaluationReport run_traditional(const HorizonData& data, const TechCatalog& catalog,
                                 const Policy& policy, const PipelineConfig& config,
                                 const ClusterConfig& cluster) {
    return run_mode("traditional", data, catalog, policy, config, cluster);
}

AggregationOnly run_aggregation(const HorizonData& data, const TechCatalog& catalog,
                                const Policy& policy, const PipelineConfig& config,
                                const ClusterConfig& cluster, const std::string& mode) {
    AggregationOnly out;
    auto slices = slice(data, config.slice_hours).slices;
    auto t0 = Clock::now();
    out.features = mode == "adaptive" ? extract_features(data, slices, catalog, policy, config)
                                      : traditional_features(data, slices, catalog);
    out.extraction_seconds = elapsed_s(t0);
    t0 = Clock::now();
    out.aggregation = cluster_features(out.features, cluster, data, slices);
    out.clustering_seconds = elapsed_s(t0);
    return out;
}

std::string report_json(const EvaluationReport& r) {
    json j;
    j["mode"] = r.mode;
    j["variant"] = r.variant;
    j["rps"] = r.rps;
    j["k"] = r.k;
    j["method"] = r.method;
    j["linkage"] = r.linkage;
    j["centroid_mode"] = r.centroid_mode;
    j["seed"] = r.seed;
    j["slice_count"] = r.slice_count;
    j["benchmark_capacities"] = r.benchmark_capacities;
    j["reduced_capacities"] = r.reduced_capacities;
    j["mape_components"] = r.mape_components;
    j["mape_excluded"] = r.mape_excluded;
    j["mape_aggregate"] = r.mape_aggregate;
    j["benchmark_objective"] = r.benchmark_objective;
    j["reduced_objective"] = r.reduced_objective;
    j["benchmark_status"] = r.benchmark_status;
    j["reduced_status"] = r.reduced_status;
    j["weights"] = r.weights;
    j["representatives"] = r.representatives;
    return j.dump(1) + "\n";
}

std::string report_timings_json(const EvaluationReport& r) {
    json j;
    j["benchmark_solve_seconds"] = r.benchmark_solve_seconds;
    j["extraction_seconds"] = r.extraction_seconds;
    j["clustering_seconds"] = r.clustering_seconds;
    j["reduced_solve_seconds"] = r.reduced_solve_seconds;
    j["speedup_reduced_vs_benchmark"] =
        r.reduced_solve_seconds > 0.0 ? r.benchmark_solve_seconds / r.reduced_solve_seconds : 0.0;
    return j.dump(1) + "\n";
}

namespace {

std::string cell_identifier(const std::string& mode, Variant variant, double rps, std::size_t k,
                            const std::string& method, Linkage linkage, bool centroid,
                            const std::map<std::string, double>& mults) {
    std::string s = mode + "|" + to_string(variant) + "|R=" + std::to_string(rps) +
                    "|k=" + std::to_string(k) + "|" + method + "|" + to_string(linkage) +
                    "|centroid=" + (centroid ? "1" : "0");
    for (const auto& [id, m] : mults) s += "|" + id + "x" + std::to_string(m);
    return s;
}

void write_long_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out(path);
    out << "cell,mode,variant,rps,k,method,linkage,centroid,metric,value\n";
    auto emit = [&](const SweepCell& c, const std::string& metric, double value) {
        out << '"' << c.cell_id << "\"," << c.report.mode << ',' << c.report.variant << ','
            << c.report.rps << ',' << c.report.k << ',' << c.report.method << ','
            << c.report.linkage << ',' << (c.report.centroid_mode ? 1 : 0) << ',' << metric << ','
            << value << '\n';
    };
    for (const auto& c : result.cells) {
        if (c.failed) {
            out << '"' << c.cell_id << "\",,,,,,,," << "failed,1\n";
            continue;
        }
        emit(c, "mape_aggregate", c.report.mape_aggregate);
        for (const auto& [name, v] : c.report.mape_components) emit(c, "mape_" + name, v);
        emit(c, "benchmark_objective", c.report.benchmark_objective);
        emit(c, "reduced_objective", c.report.reduced_objective);
        emit(c, "speedup", c.report.reduced_solve_seconds > 0.0
                               ? c.report.benchmark_solve_seconds / c.report.reduced_solve_seconds
                               : 0.0);
    }
}

void write_weights_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out(path);
    out << "cell,slice,weight\n";
    for (const auto& c : result.cells) {
        if (c.failed) continue;
        // Expand cluster weights onto representative slice indices (Fig.-4 view):
        // slices that are not representatives carry weight 0.
        std::vector<std::size_t> per_slice(c.report.slice_count, 0);
        for (std::size_t cl = 0; cl < c.report.weights.size(); ++cl) {
            int rep = cl < c.report.representatives.size() ? c.report.representatives[cl] : -1;
            if (rep >= 0) per_slice[static_cast<std::size_t>(rep)] = c.report.weights[cl];
        }
        for (std::size_t s = 0; s < per_slice.size(); ++s)
            out << '"' << c.cell_id << "\"," << s << ',' << per_slice[s] << '\n';
    }
}

}  // namespace

SweepResult sweep(const SweepGrid& grid, const HorizonData& data, const TechCatalog& catalog,
                  const Policy& base_policy, const PipelineConfig& config,
                  const ClusterConfig& base_cluster, const std::string& out_dir) {
    if (grid.rps_values.empty() || grid.k_values.empty() || grid.methods.empty() ||
        grid.linkages.empty() || grid.centroid_modes.empty() || grid.modes.empty())
        throw ConfigError("sweep: empty grid dimension");

    fs::create_directories(out_dir);
    fs::path cells_dir = fs::path(out_dir) / "cells";
    fs::create_directories(cells_dir);

    // Cartesian product over CAPEX multiplier lists.
    std::vector<std::map<std::string, double>> mult_combos{{}};
    for (const auto& [id, values] : grid.ire_capex_mults) {
        if (values.empty()) throw ConfigError("sweep: empty multiplier list for '" + id + "'");
        std::vector<std::map<std::string, double>> next;
        for (const auto& combo : mult_combos)
            for (double v : values) {
                auto c = combo;
                c[id] = v;
                next.push_back(std::move(c));
            }
        mult_combos = std::move(next);
    }

    SweepResult result;
    for (const auto& mults : mult_combos) {
        for (const auto& [id, m] : mults) {
            bool known = false;
            for (const auto& t : catalog.ire_techs) known |= t.id == id;
            if (!known) throw ConfigError("sweep: CAPEX multiplier for unknown IRE tech '" + id + "'");
        }
        for (Variant variant : grid.variants) {
        TechCatalog cat = catalog;
        for (auto& t : cat.ire_techs) {
            auto it = mults.find(t.id);
            if (it != mults.end()) t.c_inv *= it->second;
        }
        if (variant == Variant::Linear) cat.thermal_techs.clear();
        PipelineConfig cfg = config;
        cfg.variant = variant;
        for (double rps : grid.rps_values)
            for (const auto& mode : grid.modes)
                for (std::size_t k : grid.k_values)
                    for (const auto& method : grid.methods)
                        for (Linkage linkage : grid.linkages)
                            for (bool centroid : grid.centroid_modes) {
                                SweepCell cell;
                                cell.cell_id = cell_identifier(mode, variant, rps, k, method,
                                                               linkage, centroid, mults);
                                fs::path cell_file =
                                    cells_dir / ("cell_" + sha256_hex(cell.cell_id) + ".json");
                                if (fs::exists(cell_file)) {
                                    std::ifstream in(cell_file);
                                    json j;
                                    in >> j;
                                    cell.failed = j.value("failed", false);
                                    cell.error = j.value("error", "");
                                    if (!cell.failed) {
                                        EvaluationReport r;
                                        const auto& jr = j.at("report");
                                        r.mode = jr.at("mode");
                                        r.variant = jr.at("variant");
                                        r.rps = jr.at("rps");
                                        r.k = jr.at("k");
                                        r.method = jr.at("method");
                                        r.linkage = jr.at("linkage");
                                        r.centroid_mode = jr.at("centroid_mode");
                                        r.seed = jr.at("seed");
                                        r.slice_count = jr.at("slice_count");
                                        r.benchmark_capacities =
                                            jr.at("benchmark_capacities")
                                                .get<std::map<std::string, double>>();
                                        r.reduced_capacities =
                                            jr.at("reduced_capacities")
                                                .get<std::map<std::string, double>>();
                                        r.mape_components =
                                            jr.at("mape_components")
                                                .get<std::map<std::string, double>>();
                                        r.mape_excluded =
                                            jr.at("mape_excluded").get<std::vector<std::string>>();
                                        r.mape_aggregate = jr.at("mape_aggregate");
                                        r.benchmark_objective = jr.at("benchmark_objective");
                                        r.reduced_objective = jr.at("reduced_objective");
                                        r.benchmark_status = jr.at("benchmark_status");
                                        r.reduced_status = jr.at("reduced_status");
                                        r.weights =
                                            jr.at("weights").get<std::vector<std::size_t>>();
                                        r.representatives =
                                            jr.at("representatives").get<std::vector<int>>();
                                        auto& jt = j.at("timings");
                                        r.benchmark_solve_seconds = jt.at("benchmark_solve_seconds");
                                        r.extraction_seconds = jt.at("extraction_seconds");
                                        r.clustering_seconds = jt.at("clustering_seconds");
                                        r.reduced_solve_seconds = jt.at("reduced_solve_seconds");
                                        cell.report = std::move(r);
                                    }
                                    result.failures += cell.failed;
                                    result.cells.push_back(std::move(cell));
                                    continue;
                                }

                                Policy policy = base_policy;
                                policy.rps = rps;
                                ClusterConfig cc = base_cluster;
                                cc.k = k;
                                cc.method = method;
                                cc.linkage = linkage;
                                cc.centroid_mode = centroid;
                                try {
                                    cell.report = run_mode(mode, data, cat, policy, cfg, cc);
                                } catch (const std::exception& e) {
                                    cell.failed = true;
                                    cell.error = e.what();
                                    ++result.failures;
                                }

                                json j;
                                j["cell"] = cell.cell_id;
                                j["failed"] = cell.failed;
                                j["error"] = cell.error;
                                if (!cell.failed) {
                                    j["report"] = json::parse(report_json(cell.report));
                                    j["timings"] = json::parse(report_timings_json(cell.report));
                                }
                                std::ofstream out(cell_file);
                                out << j.dump(1) << '\n';
                                result.cells.push_back(std::move(cell));
                            }
        }
    }

    write_long_csv(result, (fs::path(out_dir) / "report.csv").string());
    {
        json all = json::array();
        for (const auto& c : result.cells) {
            json j;
            j["cell"] = c.cell_id;
            j["failed"] = c.failed;
            if (c.failed) j["error"] = c.error;
            else j["report"] = json::parse(report_json(c.report));
            all.push_back(std::move(j));
        }
        std::ofstream out(fs::path(out_dir) / "reports.json");
        out << all.dump(1) << '\n';
    }
    write_weights_csv(result, (fs::path(out_dir) / "weights.csv").string());
    return result;
}

}  // namespace esom
