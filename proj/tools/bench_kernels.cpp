// Compares the serial reference kernels against their OpenMP versions:
// pairwise feature distances and per-slice subproblem solves.

#include <chrono>
#include <cmath>
#include <cstdio>

#include "esom/clustering.hpp"
#include "esom/parallel.hpp"
#include "esom/pipeline.hpp"
#include "esom/rng.hpp"

using namespace esom;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

TechCatalog bench_catalog() {
    TechCatalog cat;
    cat.ire_techs = {{"solar", 1.0e6}, {"wind", 1.5e6}};
    cat.storage_techs = {{"battery", 2.0e5, 7.0e4, 50.0, 0.95}};
    return cat;
}

}  // namespace

int main() {
    const int jobs = hardware_jobs();
    std::printf("kernel benchmark, %d thread(s) available\n\n", jobs);

    {
        FeatureMatrix f;
        f.rows = 1600;
        f.dim = 24;
        f.data.resize(f.rows * f.dim);
        Rng rng(7);
        for (auto& v : f.data) v = rng.gaussian();

        auto t0 = Clock::now();
        auto serial = pairwise_sq_distances_serial(f);
        double ts = seconds_since(t0);
        t0 = Clock::now();
        auto parallel = pairwise_sq_distances(f, jobs);
        double tp = seconds_since(t0);
        bool same = serial == parallel;
        std::printf("pairwise distances (%zux%zu): serial %.3fs  omp %.3fs  speedup %.2fx  %s\n",
                    f.rows, f.dim, ts, tp, ts / tp, same ? "bitwise-equal" : "MISMATCH");
    }

    {
        SynthConfig sc;
        sc.weeks = 12;
        HorizonData data = synthesize(sc, 42);
        TechCatalog cat = bench_catalog();
        Policy policy;
        PipelineConfig cfg;
        cfg.variant = Variant::Linear;
        auto slices = slice(data, cfg.slice_hours).slices;

        cfg.jobs = 1;
        auto t0 = Clock::now();
        FeatureMatrix serial = extract_features(data, slices, cat, policy, cfg);
        double ts = seconds_since(t0);

        cfg.jobs = jobs;
        t0 = Clock::now();
        FeatureMatrix parallel = extract_features(data, slices, cat, policy, cfg);
        double tp = seconds_since(t0);
        bool same = serial.data == parallel.data;
        std::printf("slice feature solves (%zu weeks): serial %.3fs  omp %.3fs  speedup %.2fx  %s\n",
                    slices.size(), ts, tp, ts / tp, same ? "bitwise-equal" : "MISMATCH");
        return same ? 0 : 1;
    }
}
