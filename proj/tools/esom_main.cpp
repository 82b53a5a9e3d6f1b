// esom: model-adaptive time aggregation experiments for capacity expansion
// planning. Subcommands: synth, benchmark, aggregate, sweep.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "esom/hashing.hpp"
#include "esom/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace esom;

namespace {

constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kInfeasible = 3,
    kSolverLimit = 4,
    kPartialFailure = 5,
};

struct CommonOpts {
    std::string config_path;
    std::string data_path;
    std::string catalog_path;
    std::string variant = "linear";
    double rps = 0.0;
    std::size_t slice_hours = 168;
    std::string method = "agglomerative";
    std::string linkage = "single";
    std::size_t k = 30;
    bool centroid = false;
    bool standardize = true;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string out_dir = "out";
    std::string cache_dir;
    std::size_t max_nodes = 50000;
    double mip_gap = 1e-4;

    // Synth parameters (also accepted by `synth`).
    double synth_years = 1.0;
    std::size_t synth_weeks = 0;
    double synth_base_load = 1000.0;
    double synth_noise = 0.25;
};

// Config file first, then explicit flags on top (flags win).
void apply_config_file(CommonOpts& o, const CLI::App& cmd) {
    if (o.config_path.empty()) return;
    std::ifstream in(o.config_path);
    if (!in) throw IoError("cannot open config '" + o.config_path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + o.config_path + "': " + e.what());
    }
    auto overridden = [&](const std::string& flag) {
        auto* opt = cmd.get_option_no_throw(flag);
        return opt != nullptr && opt->count() > 0;
    };
    if (j.contains("data") && !overridden("--data")) o.data_path = j["data"];
    if (j.contains("catalog") && !overridden("--catalog")) o.catalog_path = j["catalog"];
    if (j.contains("variant") && !overridden("--variant")) o.variant = j["variant"];
    if (j.contains("rps") && !overridden("--rps")) o.rps = j["rps"];
    if (j.contains("slice_hours") && !overridden("--slice-hours")) o.slice_hours = j["slice_hours"];
    if (j.contains("jobs") && !overridden("--jobs")) o.jobs = j["jobs"];
    if (j.contains("out") && !overridden("--out")) o.out_dir = j["out"];
    if (j.contains("cache_dir") && !overridden("--cache-dir")) o.cache_dir = j["cache_dir"];
    if (j.contains("cluster")) {
        const auto& c = j["cluster"];
        if (c.contains("method") && !overridden("--method")) o.method = c["method"];
        if (c.contains("linkage") && !overridden("--linkage")) o.linkage = c["linkage"];
        if (c.contains("k") && !overridden("--k")) o.k = c["k"];
        if (c.contains("centroid") && !overridden("--centroid")) o.centroid = c["centroid"];
        if (c.contains("standardize") && !overridden("--standardize")) o.standardize = c["standardize"];
        if (c.contains("seed") && !overridden("--seed")) o.seed = c["seed"];
    }
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        if (s.contains("max_bb_nodes")) o.max_nodes = s["max_bb_nodes"];
        if (s.contains("mip_gap")) o.mip_gap = s["mip_gap"];
    }
    if (j.contains("synth")) {
        const auto& s = j["synth"];
        if (s.contains("years")) o.synth_years = s["years"];
        if (s.contains("weeks")) o.synth_weeks = s["weeks"];
        if (s.contains("base_load")) o.synth_base_load = s["base_load"];
        if (s.contains("noise")) o.synth_noise = s["noise"];
        if (s.contains("seed") && !overridden("--seed")) o.seed = s["seed"];
    }
}

void add_common_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "JSON run config; explicit flags override it");
    cmd->add_option("--data", o.data_path, "input CSV (timestamp,load,<resource>...)");
    cmd->add_option("--catalog", o.catalog_path, "technology catalog JSON");
    cmd->add_option("--variant", o.variant, "model variant: linear|integer")
        ->check(CLI::IsMember({"linear", "integer"}));
    cmd->add_option("--rps", o.rps, "renewable portfolio fraction R in [0,1]");
    cmd->add_option("--slice-hours", o.slice_hours, "hours per time slice (default 168)");
    cmd->add_option("--method", o.method, "clustering method: kmeans|agglomerative")
        ->check(CLI::IsMember({"kmeans", "agglomerative"}));
    cmd->add_option("--linkage", o.linkage, "agglomerative linkage: single|average|complete|ward")
        ->check(CLI::IsMember({"single", "average", "complete", "ward"}));
    cmd->add_option("--k", o.k, "number of representative slices");
    cmd->add_flag("--centroid,!--medoid", o.centroid, "centroid representatives (default medoid)");
    cmd->add_flag("--standardize,!--no-standardize", o.standardize,
                  "standardize features before clustering (default on)");
    cmd->add_option("--seed", o.seed, "seed for synthesis and clustering restarts");
    cmd->add_option("--jobs", o.jobs, "worker threads for per-slice solves");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--cache-dir", o.cache_dir, "benchmark cache directory (default <out>/cache)");
    cmd->add_option("--max-nodes", o.max_nodes, "branch-and-bound node limit");
    cmd->add_option("--mip-gap", o.mip_gap, "relative MILP gap target");
}

HorizonData load_data(const CommonOpts& o) {
    if (!o.data_path.empty()) return load_csv(o.data_path);
    SynthConfig sc;
    sc.years = o.synth_years;
    sc.weeks = o.synth_weeks;
    sc.base_load = o.synth_base_load;
    sc.noise = o.synth_noise;
    return synthesize(sc, o.seed);
}

TechCatalog load_cat(const CommonOpts& o) {
    if (o.catalog_path.empty()) throw ConfigError("no catalog given (--catalog or config file)");
    return load_catalog(o.catalog_path);
}

PipelineConfig pipeline_config(const CommonOpts& o) {
    PipelineConfig cfg;
    cfg.variant = variant_from_string(o.variant);
    cfg.slice_hours = o.slice_hours;
    cfg.jobs = o.jobs;
    cfg.cache_dir = o.cache_dir.empty() ? (fs::path(o.out_dir) / "cache").string() : o.cache_dir;
    cfg.limits.max_bb_nodes = o.max_nodes;
    cfg.tolerances.mip_gap = o.mip_gap;
    return cfg;
}

ClusterConfig cluster_config(const CommonOpts& o) {
    ClusterConfig cc;
    cc.method = o.method;
    cc.linkage = linkage_from_string(o.linkage);
    cc.k = o.k;
    cc.centroid_mode = o.centroid;
    cc.standardize_features = o.standardize;
    cc.seed = o.seed;
    return cc;
}

void write_manifest(const CommonOpts& o, const std::string& command,
                    const std::vector<std::string>& outputs) {
    json j;
    j["tool"] = "esom";
    j["version"] = kVersion;
    j["command"] = command;
    j["seed"] = o.seed;
    json inputs = json::object();
    if (!o.data_path.empty())
        inputs["data"] = {{"path", o.data_path}, {"sha256", sha256_file(o.data_path)}};
    if (!o.catalog_path.empty())
        inputs["catalog"] = {{"path", o.catalog_path}, {"sha256", sha256_file(o.catalog_path)}};
    j["inputs"] = inputs;
    json outs = json::object();
    for (const auto& f : outputs) {
        fs::path p = fs::path(o.out_dir) / f;
        if (fs::exists(p)) outs[f] = {{"sha256", sha256_file(p.string())}};
    }
    j["outputs"] = outs;
    std::ofstream out(fs::path(o.out_dir) / "manifest.json");
    out << j.dump(1) << '\n';
}

json aggregation_json(const AggregationResult& agg) {
    json j;
    j["assignments"] = agg.assignments;
    j["weights"] = agg.weights;
    j["centroid_mode"] = agg.centroid_mode;
    j["representatives"] = agg.representatives;
    if (agg.centroid_mode) {
        json profiles = json::array();
        for (const auto& v : agg.centroid_profiles) {
            json p;
            p["load"] = v.load;
            for (const auto& [id, series] : v.profiles) p["profiles"][id] = series;
            profiles.push_back(std::move(p));
        }
        j["centroid_profiles"] = std::move(profiles);
    }
    j["meta"] = {{"algorithm", agg.meta.algorithm}, {"linkage", agg.meta.linkage},
                 {"k", agg.meta.k},                 {"centroid_mode", agg.meta.centroid_mode},
                 {"seed", agg.meta.seed},           {"standardized", agg.meta.standardized}};
    return j;
}

int cmd_synth(CommonOpts& o, const CLI::App& cmd) {
    apply_config_file(o, cmd);
    SynthConfig sc;
    sc.years = o.synth_years;
    sc.weeks = o.synth_weeks;
    sc.base_load = o.synth_base_load;
    sc.noise = o.synth_noise;
    HorizonData data = synthesize(sc, o.seed);
    fs::create_directories(o.out_dir);
    write_csv(data, (fs::path(o.out_dir) / "data.csv").string());
    std::cout << "wrote " << (fs::path(o.out_dir) / "data.csv").string() << " (" << data.hours
              << " hours)\n";
    write_manifest(o, "synth", {"data.csv"});
    return kOk;
}

int cmd_benchmark(CommonOpts& o, const CLI::App& cmd) {
    apply_config_file(o, cmd);
    HorizonData data = load_data(o);
    TechCatalog catalog = load_cat(o);
    Policy policy;
    policy.rps = o.rps;
    PipelineConfig cfg = pipeline_config(o);
    fs::create_directories(o.out_dir);

    std::string key = benchmark_cache_key(data, catalog, policy, cfg);
    bool hit = fs::exists(fs::path(cfg.cache_dir) / ("benchmark_" + key + ".json"));
    if (hit) std::cout << "benchmark cache hit (" << key.substr(0, 12) << ")\n";

    PlanSolution plan = run_benchmark(data, catalog, policy, cfg);
    json j;
    j["status"] = to_string(plan.status);
    j["objective"] = plan.objective;
    j["capacities"] = plan.capacities;
    j["costs"] = {{"c_deg", plan.costs.c_deg},   {"c_op", plan.costs.c_op},
                  {"c_updn", plan.costs.c_updn}, {"c_var", plan.costs.c_var},
                  {"c_fix", plan.costs.c_fix},   {"total", plan.costs.total}};
    j["mip_gap"] = plan.mip_gap;
    std::ofstream out(fs::path(o.out_dir) / "solution.json");
    out << j.dump(1) << '\n';
    std::cout << "benchmark objective " << plan.objective << " (" << to_string(plan.status)
              << ", " << plan.solve_seconds << " s)\n";
    write_manifest(o, "benchmark", {"solution.json"});
    return kOk;
}

int cmd_aggregate(CommonOpts& o, const CLI::App& cmd, const std::string& mode, bool no_eval) {
    apply_config_file(o, cmd);
    HorizonData data = load_data(o);
    TechCatalog catalog = load_cat(o);
    Policy policy;
    policy.rps = o.rps;
    PipelineConfig cfg = pipeline_config(o);
    ClusterConfig cc = cluster_config(o);
    fs::create_directories(o.out_dir);

    std::vector<std::string> outputs{"aggregation.json"};
    if (no_eval) {
        AggregationOnly agg = run_aggregation(data, catalog, policy, cfg, cc, mode);
        std::ofstream out(fs::path(o.out_dir) / "aggregation.json");
        out << aggregation_json(agg.aggregation).dump(1) << '\n';
        std::cout << mode << " aggregation: k=" << agg.aggregation.weights.size() << " over "
                  << agg.aggregation.assignments.size() << " slices\n";
    } else {
        EvaluationReport rep = mode == "adaptive" ? run_adaptive(data, catalog, policy, cfg, cc)
                                                  : run_traditional(data, catalog, policy, cfg, cc);
        std::ofstream rout(fs::path(o.out_dir) / "report.json");
        rout << report_json(rep);
        std::ofstream tout(fs::path(o.out_dir) / "timings.json");
        tout << report_timings_json(rep);
        json j;
        j["weights"] = rep.weights;
        j["representatives"] = rep.representatives;
        j["meta"] = {{"algorithm", rep.method}, {"linkage", rep.linkage}, {"k", rep.k},
                     {"centroid_mode", rep.centroid_mode}, {"seed", rep.seed}};
        std::ofstream aout(fs::path(o.out_dir) / "aggregation.json");
        aout << j.dump(1) << '\n';
        outputs.push_back("report.json");
        std::cout << mode << " MAPE " << rep.mape_aggregate << " over k=" << rep.k << " ("
                  << rep.slice_count << " slices)\n";
    }
    write_manifest(o, "aggregate --mode " + mode, outputs);
    return kOk;
}

int cmd_sweep(CommonOpts& o, const CLI::App& cmd, const std::string& grid_path) {
    apply_config_file(o, cmd);
    HorizonData data = load_data(o);
    TechCatalog catalog = load_cat(o);
    Policy policy;
    policy.rps = o.rps;
    PipelineConfig cfg = pipeline_config(o);
    ClusterConfig cc = cluster_config(o);

    SweepGrid grid;
    {
        std::string path = grid_path;
        if (path.empty()) throw ConfigError("sweep needs --grid <file.json>");
        std::ifstream in(path);
        if (!in) throw IoError("cannot open grid '" + path + "'");
        json g;
        try {
            in >> g;
        } catch (const json::exception& e) {
            throw ConfigError("grid '" + path + "': " + e.what());
        }
        if (g.contains("rps")) grid.rps_values = g["rps"].get<std::vector<double>>();
        if (g.contains("k")) grid.k_values = g["k"].get<std::vector<std::size_t>>();
        if (g.contains("methods")) grid.methods = g["methods"].get<std::vector<std::string>>();
        if (g.contains("linkages")) {
            grid.linkages.clear();
            for (const auto& l : g["linkages"]) grid.linkages.push_back(linkage_from_string(l));
        }
        if (g.contains("centroid_modes"))
            grid.centroid_modes = g["centroid_modes"].get<std::vector<bool>>();
        if (g.contains("modes")) grid.modes = g["modes"].get<std::vector<std::string>>();
        if (g.contains("variants")) {
            grid.variants.clear();
            for (const auto& v : g["variants"]) grid.variants.push_back(variant_from_string(v));
        }
        if (g.contains("ire_capex_mults"))
            grid.ire_capex_mults =
                g["ire_capex_mults"].get<std::map<std::string, std::vector<double>>>();
    }

    SweepResult result = sweep(grid, data, catalog, policy, cfg, cc, o.out_dir);
    std::cout << "sweep: " << result.cells.size() << " cells, " << result.failures
              << " failures\n";
    write_manifest(o, "sweep", {"report.csv", "reports.json", "weights.csv"});
    return result.failures == 0 ? kOk : kPartialFailure;
}

int map_exception(const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    std::string msg = e.what();
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const IoError*>(&e)) return kConfigError;
    if (msg.find("infeasible") != std::string::npos || msg.find("unbounded") != std::string::npos)
        return kInfeasible;
    if (dynamic_cast<const SolveError*>(&e)) return kSolverLimit;
    return kConfigError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"model-adaptive time aggregation for capacity expansion planning"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    CommonOpts o;
    std::string mode = "adaptive";
    bool no_eval = false;
    std::string grid_path;

    auto* synth = app.add_subcommand("synth", "generate a synthetic hourly dataset");
    add_common_flags(synth, o);
    synth->add_option("--years", o.synth_years, "horizon length in years (8760 h each)");
    synth->add_option("--weeks", o.synth_weeks, "horizon length in whole weeks (overrides --years)");
    synth->add_option("--base-load", o.synth_base_load, "mean demand in MWh");
    synth->add_option("--noise", o.synth_noise, "weather noise level (0 = deterministic)");

    auto* bench = app.add_subcommand("benchmark", "solve the full-horizon model");
    add_common_flags(bench, o);

    auto* agg = app.add_subcommand("aggregate", "select weighted representative slices");
    add_common_flags(agg, o);
    agg->add_option("--mode", mode, "feature mode: adaptive|traditional")
        ->check(CLI::IsMember({"adaptive", "traditional"}));
    agg->add_flag("--no-eval", no_eval, "skip the benchmark comparison");

    auto* sw = app.add_subcommand("sweep", "run a scenario grid");
    add_common_flags(sw, o);
    sw->add_option("--grid", grid_path, "grid JSON ({rps, k, methods, linkages, ...})");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    try {
        if (synth->parsed()) return cmd_synth(o, *synth);
        if (bench->parsed()) return cmd_benchmark(o, *bench);
        if (agg->parsed()) return cmd_aggregate(o, *agg, mode, no_eval);
        if (sw->parsed()) return cmd_sweep(o, *sw, grid_path);
    } catch (const std::exception& e) {
        return map_exception(e);
    }
    return kConfigError;
}
