#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esom/timeseries.hpp"

namespace esom {

enum class FeatureMode { Adaptive, Traditional };
enum class Linkage { Single, Average, Complete, Ward };

Linkage linkage_from_string(const std::string& s);
std::string to_string(Linkage l);

// One feature vector per slice, row-major. After standardize() each
// dimension has zero mean and unit spread; the stored mean/stddev invert the
// transform exactly (constant dimensions are zeroed and flagged).
struct FeatureMatrix {
    std::size_t rows = 0, dim = 0;
    std::vector<double> data;
    FeatureMode mode = FeatureMode::Adaptive;
    std::vector<std::string> dim_names;
    bool standardized = false;
    std::vector<double> mean, stddev;   // per dimension, identity until standardized
    std::vector<char> constant_dims;

    double at(std::size_t r, std::size_t d) const { return data[r * dim + d]; }
    double& at(std::size_t r, std::size_t d) { return data[r * dim + d]; }
    std::vector<double> invert_row(std::size_t r) const;
};

FeatureMatrix standardize(const FeatureMatrix& raw);

struct AggregationResult {
    std::vector<int> assignments;          // slice -> cluster id (0..k-1)
    std::vector<std::size_t> weights;      // member count per cluster
    std::vector<int> representatives;      // medoid slice index per cluster (-1 in centroid mode)
    std::vector<SliceView> centroid_profiles;  // per cluster, centroid mode only
    bool centroid_mode = false;

    struct Meta {
        std::string algorithm;  // kmeans | agglomerative
        std::string linkage;    // agglomerative only
        std::size_t k = 0;
        bool centroid_mode = false;
        std::uint64_t seed = 0;
        bool standardized = true;
    } meta;

    void check(std::size_t slice_count) const;  // partition + weight-sum invariants
};

// Lloyd's algorithm from k-means++ seeding, best of `restarts` seeded runs by
// within-cluster sum of squares. Deterministic for a fixed seed; empty
// clusters are reseeded from the farthest point.
AggregationResult kmeans(const FeatureMatrix& features, std::size_t k, std::uint64_t seed,
                         std::size_t restarts = 10);

struct Merge {
    int a = 0, b = 0;      // cluster labels being merged (label = smallest member index)
    double distance = 0.0;
};

// Bottom-up merging under Lance-Williams updates; ties broken by the
// lexicographically smallest label pair.
std::vector<Merge> agglomerative_dendrogram(const FeatureMatrix& features, Linkage linkage);
AggregationResult agglomerative(const FeatureMatrix& features, std::size_t k, Linkage linkage);

// Fills weights and representatives for existing assignments. Medoid mode
// picks the member nearest its cluster's feature-space centroid (ties ->
// lowest slice index); centroid mode averages members' raw series.
AggregationResult select_representatives(AggregationResult clusters, const FeatureMatrix& features,
                                         const HorizonData& data,
                                         const std::vector<TimeSlice>& slices, bool centroid_mode);

struct ElbowPoint {
    std::size_t k = 0;
    double dispersion = 0.0;  // within-cluster sum of squares
};

// Dispersion is non-increasing in k by construction: agglomerative cuts are
// nested, and the k-means scan seeds each k from the previous solution plus
// the farthest point.
std::vector<ElbowPoint> elbow_scan(const FeatureMatrix& features, const std::vector<std::size_t>& ks,
                                   const std::string& method, Linkage linkage, std::uint64_t seed);

double wcss(const FeatureMatrix& features, const std::vector<int>& assignments, std::size_t k);

// Pairwise squared Euclidean distances, row-major n x n. The _omp variant
// distributes rows across threads; entries are computed identically, so the
// two agree bitwise (the serial one is kept as the test reference).
std::vector<double> pairwise_sq_distances_serial(const FeatureMatrix& features);
std::vector<double> pairwise_sq_distances(const FeatureMatrix& features, int jobs);

}  // namespace esom
