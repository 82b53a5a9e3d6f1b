#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "esom/clustering.hpp"
#include "esom/model.hpp"

namespace esom {

struct ClusterConfig {
    std::string method = "agglomerative";  // kmeans | agglomerative
    Linkage linkage = Linkage::Single;
    std::size_t k = 30;
    bool centroid_mode = false;
    bool standardize_features = true;
    std::size_t kmeans_restarts = 10;
    std::uint64_t seed = 0;
};

struct PipelineConfig {
    Variant variant = Variant::Linear;
    std::size_t slice_hours = 168;
    Tolerances tolerances;
    Limits limits;
    int jobs = 1;
    bool rps_in_slices = true;
    bool slice_rps_fallback = false;  // on slice infeasibility, retry that slice without RPS
    std::string cache_dir;            // content-addressed solve cache; empty disables
    bool audit_cache = false;         // recompute cache hits and compare
};

// Everything needed to reproduce and judge one aggregation experiment.
// Wall-clock runtimes live next to the results but are excluded from the
// deterministic serialization (see report_json).
struct EvaluationReport {
    std::string mode;  // adaptive | traditional
    std::string variant;
    double rps = 0.0;
    std::size_t k = 0;
    std::string method, linkage;
    bool centroid_mode = false;
    std::uint64_t seed = 0;
    std::size_t slice_count = 0;

    std::map<std::string, double> benchmark_capacities, reduced_capacities;
    std::map<std::string, double> mape_components;
    std::vector<std::string> mape_excluded;
    double mape_aggregate = 0.0;
    double benchmark_objective = 0.0, reduced_objective = 0.0;
    std::string benchmark_status, reduced_status;
    std::vector<std::size_t> weights;
    std::vector<int> representatives;  // -1 entries in centroid mode

    double benchmark_solve_seconds = 0.0;
    double extraction_seconds = 0.0;
    double clustering_seconds = 0.0;
    double reduced_solve_seconds = 0.0;
};

std::string report_json(const EvaluationReport& r);        // deterministic, no wall times
std::string report_timings_json(const EvaluationReport& r);

struct MapeResult {
    std::map<std::string, double> components;
    std::vector<std::string> excluded;  // zero-benchmark entries, dropped with a warning
    double aggregate = 0.0;
};

MapeResult mape(const std::vector<std::string>& names, const std::vector<double>& benchmark,
                const std::vector<double>& estimate);

// Full-horizon solve, cached on disk by a content hash of everything that
// determines the answer. Stored solve time rides along for speedup reports.
PlanSolution run_benchmark(const HorizonData& data, const TechCatalog& catalog,
                           const Policy& policy, const PipelineConfig& config);

std::string benchmark_cache_key(const HorizonData& data, const TechCatalog& catalog,
                                const Policy& policy, const PipelineConfig& config);

// Adaptive features: one slice subproblem per row, solved concurrently.
FeatureMatrix extract_features(const HorizonData& data, const std::vector<TimeSlice>& slices,
                               const TechCatalog& catalog, const Policy& policy,
                               const PipelineConfig& config);

// Traditional features: flattened raw load + profiles per slice.
FeatureMatrix traditional_features(const HorizonData& data, const std::vector<TimeSlice>& slices,
                                   const TechCatalog& catalog);

AggregationResult cluster_features(const FeatureMatrix& raw, const ClusterConfig& cluster,
                                   const HorizonData& data, const std::vector<TimeSlice>& slices);

// Steps 1-4 plus evaluation against the cached benchmark.
EvaluationReport run_adaptive(const HorizonData& data, const TechCatalog& catalog,
                              const Policy& policy, const PipelineConfig& config,
                              const ClusterConfig& cluster);

EvaluationReport run_traditional(const HorizonData& data, const TechCatalog& catalog,
                                 const Policy& policy, const PipelineConfig& config,
                                 const ClusterConfig& cluster);

// Aggregation without evaluation (no benchmark solve); used by --no-eval runs.
struct AggregationOnly {
    AggregationResult aggregation;
    FeatureMatrix features;
    double extraction_seconds = 0.0;
    double clustering_seconds = 0.0;
};
AggregationOnly run_aggregation(const HorizonData& data, const TechCatalog& catalog,
                                const Policy& policy, const PipelineConfig& config,
                                const ClusterConfig& cluster, const std::string& mode);

struct SweepGrid {
    std::vector<double> rps_values{0.0};
    std::vector<std::size_t> k_values{30};
    std::vector<std::string> methods{"agglomerative"};
    std::vector<Linkage> linkages{Linkage::Single};
    std::vector<bool> centroid_modes{false};
    std::vector<std::string> modes{"adaptive", "traditional"};
    // Linear cells run on the catalog with thermal techs removed.
    std::vector<Variant> variants{Variant::Linear};
    // Per-IRE-tech CAPEX multiplier lists; the grid is their Cartesian product.
    std::map<std::string, std::vector<double>> ire_capex_mults;
};

struct SweepCell {
    EvaluationReport report;
    bool failed = false;
    std::string error;
    std::string cell_id;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    std::size_t failures = 0;
};

// Cartesian execution with shared caches. Completed cells found under
// out_dir are not recomputed (resume); per-cell failures are recorded and
// the sweep continues. Writes report.csv (long form), reports.json, and
// weights.csv under out_dir.
SweepResult sweep(const SweepGrid& grid, const HorizonData& data, const TechCatalog& catalog,
                  const Policy& base_policy, const PipelineConfig& config,
                  const ClusterConfig& base_cluster, const std::string& out_dir);

}  // namespace esom
