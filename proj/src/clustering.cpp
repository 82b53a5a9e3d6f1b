#include "esom/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "esom/errors.hpp"
#include "esom/rng.hpp"

namespace esom {

Linkage linkage_from_string(const std::string& s) {
    if (s == "single") return Linkage::Single;
    if (s == "average") return Linkage::Average;
    if (s == "complete") return Linkage::Complete;
    if (s == "ward") return Linkage::Ward;
    throw ConfigError("unknown linkage '" + s + "' (expected single|average|complete|ward)");
}

std::string to_string(Linkage l) {
    switch (l) {
        case Linkage::Single: return "single";
        case Linkage::Average: return "average";
        case Linkage::Complete: return "complete";
        case Linkage::Ward: return "ward";
    }
    return "?";
}

std::vector<double> FeatureMatrix::invert_row(std::size_t r) const {
    std::vector<double> out(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        double v = at(r, d);
        if (standardized) v = v * stddev[d] + mean[d];
        out[d] = v;
    }
    return out;
}

FeatureMatrix standardize(const FeatureMatrix& raw) {
    if (raw.rows < 2) throw ConfigError("standardize needs at least 2 rows");
    FeatureMatrix out = raw;
    out.mean.assign(raw.dim, 0.0);
    out.stddev.assign(raw.dim, 1.0);
    out.constant_dims.assign(raw.dim, 0);
    const double n = static_cast<double>(raw.rows);
    for (std::size_t d = 0; d < raw.dim; ++d) {
        double m = 0.0;
        for (std::size_t r = 0; r < raw.rows; ++r) m += raw.at(r, d);
        m /= n;
        double ss = 0.0;
        for (std::size_t r = 0; r < raw.rows; ++r) {
            double dv = raw.at(r, d) - m;
            ss += dv * dv;
        }
        double sd = std::sqrt(ss / n);
        out.mean[d] = m;
        if (sd < 1e-12) {
            // Constant dimension: carried as zeros so it cannot sway distances.
            out.constant_dims[d] = 1;
            out.stddev[d] = 1.0;
            for (std::size_t r = 0; r < raw.rows; ++r) out.at(r, d) = 0.0;
        } else {
            out.stddev[d] = sd;
            for (std::size_t r = 0; r < raw.rows; ++r) out.at(r, d) = (raw.at(r, d) - m) / sd;
        }
    }
    out.standardized = true;
    return out;
}

void AggregationResult::check(std::size_t slice_count) const {
    if (assignments.size() != slice_count)
        throw InternalConsistencyError("aggregation covers " + std::to_string(assignments.size()) +
                                       " slices, expected " + std::to_string(slice_count));
    std::size_t k = weights.size();
    std::vector<std::size_t> counts(k, 0);
    for (int a : assignments) {
        if (a < 0 || static_cast<std::size_t>(a) >= k)
            throw InternalConsistencyError("assignment outside [0,k)");
        ++counts[static_cast<std::size_t>(a)];
    }
    std::size_t total = 0;
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] != weights[c])
            throw InternalConsistencyError("cluster " + std::to_string(c) + " weight " +
                                           std::to_string(weights[c]) + " != member count " +
                                           std::to_string(counts[c]));
        if (counts[c] == 0) throw InternalConsistencyError("empty cluster " + std::to_string(c));
        total += counts[c];
    }
    if (total != slice_count) throw InternalConsistencyError("weights do not sum to slice count");
    // Medoid membership only applies once representatives were selected.
    if (!centroid_mode && !representatives.empty())
        for (std::size_t c = 0; c < k; ++c) {
            int rep = representatives.at(c);
            if (rep < 0 || assignments[static_cast<std::size_t>(rep)] != static_cast<int>(c))
                throw InternalConsistencyError("medoid of cluster " + std::to_string(c) +
                                               " is not one of its members");
        }
}

namespace {

double sq_dist(const FeatureMatrix& f, std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t d = 0; d < f.dim; ++d) {
        double dv = f.at(a, d) - f.at(b, d);
        s += dv * dv;
    }
    return s;
}

double sq_dist_to(const FeatureMatrix& f, std::size_t r, const std::vector<double>& center) {
    double s = 0.0;
    for (std::size_t d = 0; d < f.dim; ++d) {
        double dv = f.at(r, d) - center[d];
        s += dv * dv;
    }
    return s;
}

std::vector<std::vector<double>> centroids_of(const FeatureMatrix& f,
                                              const std::vector<int>& assign, std::size_t k) {
    std::vector<std::vector<double>> c(k, std::vector<double>(f.dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t r = 0; r < f.rows; ++r) {
        auto a = static_cast<std::size_t>(assign[r]);
        ++counts[a];
        for (std::size_t d = 0; d < f.dim; ++d) c[a][d] += f.at(r, d);
    }
    for (std::size_t j = 0; j < k; ++j)
        if (counts[j] > 0)
            for (std::size_t d = 0; d < f.dim; ++d) c[j][d] /= static_cast<double>(counts[j]);
    return c;
}

struct LloydResult {
    std::vector<int> assign;
    double wcss = 0.0;
};

// Assignment ties go to the lowest cluster index; empty clusters are reseeded
// from the globally farthest point.
LloydResult lloyd(const FeatureMatrix& f, std::vector<std::vector<double>> centers,
                  std::size_t max_iter = 300) {
    const std::size_t n = f.rows, k = centers.size();
    LloydResult res;
    res.assign.assign(n, 0);
    double prev_obj = std::numeric_limits<double>::infinity();
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        double obj = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            int best = 0;
            double bd = sq_dist_to(f, r, centers[0]);
            for (std::size_t j = 1; j < k; ++j) {
                double d = sq_dist_to(f, r, centers[j]);
                if (d < bd - 1e-15) {
                    bd = d;
                    best = static_cast<int>(j);
                }
            }
            obj += bd;
            if (res.assign[r] != best) {
                res.assign[r] = best;
                changed = true;
            }
        }
        // Repair empty clusters from the farthest point.
        std::vector<std::size_t> counts(k, 0);
        for (int a : res.assign) ++counts[static_cast<std::size_t>(a)];
        bool repaired = false;
        for (std::size_t j = 0; j < k; ++j) {
            if (counts[j] > 0) continue;
            std::size_t far = 0;
            double fd = -1.0;
            for (std::size_t r = 0; r < n; ++r) {
                if (counts[static_cast<std::size_t>(res.assign[r])] <= 1) continue;
                double d = sq_dist_to(f, r, centers[static_cast<std::size_t>(res.assign[r])]);
                if (d > fd + 1e-15) {
                    fd = d;
                    far = r;
                }
            }
            --counts[static_cast<std::size_t>(res.assign[far])];
            res.assign[far] = static_cast<int>(j);
            counts[j] = 1;
            centers[j].assign(f.data.begin() + static_cast<long>(far * f.dim),
                              f.data.begin() + static_cast<long>((far + 1) * f.dim));
            repaired = true;
        }
        if (repaired) {
            prev_obj = std::numeric_limits<double>::infinity();
            continue;
        }
        if (obj > prev_obj * (1.0 + 1e-9) + 1e-12)
            throw InternalConsistencyError("k-means objective increased across an iteration");
        prev_obj = obj;
        centers = centroids_of(f, res.assign, k);
        if (!changed) break;
    }
    res.wcss = 0.0;
    auto final_centers = centroids_of(f, res.assign, k);
    for (std::size_t r = 0; r < n; ++r)
        res.wcss += sq_dist_to(f, r, final_centers[static_cast<std::size_t>(res.assign[r])]);
    return res;
}

std::vector<std::vector<double>> kmeanspp_seed(const FeatureMatrix& f, std::size_t k, Rng& rng) {
    const std::size_t n = f.rows;
    std::vector<std::vector<double>> centers;
    std::size_t first = rng.below(n);
    centers.emplace_back(f.data.begin() + static_cast<long>(first * f.dim),
                         f.data.begin() + static_cast<long>((first + 1) * f.dim));
    std::vector<double> d2(n);
    while (centers.size() < k) {
        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double best = sq_dist_to(f, r, centers[0]);
            for (std::size_t j = 1; j < centers.size(); ++j)
                best = std::min(best, sq_dist_to(f, r, centers[j]));
            d2[r] = best;
            total += best;
        }
        std::size_t pick;
        if (total <= 0.0) {
            pick = rng.below(n);
        } else {
            double u = rng.uniform01() * total, acc = 0.0;
            pick = n - 1;
            for (std::size_t r = 0; r < n; ++r) {
                acc += d2[r];
                if (u <= acc) {
                    pick = r;
                    break;
                }
            }
        }
        centers.emplace_back(f.data.begin() + static_cast<long>(pick * f.dim),
                             f.data.begin() + static_cast<long>((pick + 1) * f.dim));
    }
    return centers;
}

// Canonical labels: clusters numbered by their smallest member.
std::vector<int> canonical_labels(const std::vector<int>& assign, std::size_t k) {
    std::vector<int> first(k, -1);
    std::vector<std::pair<int, int>> order;  // (first member, cluster)
    for (std::size_t r = 0; r < assign.size(); ++r) {
        int a = assign[r];
        if (first[static_cast<std::size_t>(a)] < 0) {
            first[static_cast<std::size_t>(a)] = static_cast<int>(r);
            order.push_back({static_cast<int>(r), a});
        }
    }
    std::sort(order.begin(), order.end());
    std::vector<int> relabel(k, -1);
    for (std::size_t i = 0; i < order.size(); ++i)
        relabel[static_cast<std::size_t>(order[i].second)] = static_cast<int>(i);
    std::vector<int> out(assign.size());
    for (std::size_t r = 0; r < assign.size(); ++r)
        out[r] = relabel[static_cast<std::size_t>(assign[r])];
    return out;
}

AggregationResult result_from_assignments(std::vector<int> assign, std::size_t k) {
    AggregationResult res;
    res.assignments = canonical_labels(assign, k);
    res.weights.assign(k, 0);
    for (int a : res.assignments) ++res.weights[static_cast<std::size_t>(a)];
    res.representatives.clear();  // filled by select_representatives
    return res;
}

}  // namespace

double wcss(const FeatureMatrix& f, const std::vector<int>& assign, std::size_t k) {
    auto centers = centroids_of(f, assign, k);
    double s = 0.0;
    for (std::size_t r = 0; r < f.rows; ++r)
        s += sq_dist_to(f, r, centers[static_cast<std::size_t>(assign[r])]);
    return s;
}

AggregationResult kmeans(const FeatureMatrix& f, std::size_t k, std::uint64_t seed,
                         std::size_t restarts) {
    if (k < 1 || k > f.rows)
        throw ConfigError("kmeans: k=" + std::to_string(k) + " outside [1," +
                          std::to_string(f.rows) + "]");
    LloydResult best;
    best.wcss = std::numeric_limits<double>::infinity();
    for (std::size_t attempt = 0; attempt < std::max<std::size_t>(restarts, 1); ++attempt) {
        Rng rng(seed + attempt);
        auto centers = kmeanspp_seed(f, k, rng);
        LloydResult r = lloyd(f, std::move(centers));
        if (r.wcss < best.wcss - 1e-15) best = std::move(r);
    }
    AggregationResult res = result_from_assignments(best.assign, k);
    res.meta.algorithm = "kmeans";
    res.meta.k = k;
    res.meta.seed = seed;
    return res;
}

std::vector<Merge> agglomerative_dendrogram(const FeatureMatrix& f, Linkage linkage) {
    const std::size_t n = f.rows;
    if (n == 0) throw ConfigError("agglomerative: empty feature matrix");

    // Dissimilarity matrix; Ward works on its variance-increase measure,
    // which for singletons is half the squared Euclidean distance.
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double d2 = sq_dist(f, i, j);
            double d = linkage == Linkage::Ward ? 0.5 * d2 : std::sqrt(d2);
            dist[i * n + j] = dist[j * n + i] = d;
        }

    std::vector<char> active(n, 1);
    std::vector<std::size_t> size(n, 1);
    std::vector<int> label(n);  // smallest member index of the cluster rooted here
    std::iota(label.begin(), label.end(), 0);

    std::vector<Merge> merges;
    merges.reserve(n - 1);
    for (std::size_t step = 0; step + 1 < n; ++step) {
        // Closest active pair; ties by smallest (label_a, label_b).
        std::size_t bi = 0, bj = 0;
        double bd = std::numeric_limits<double>::infinity();
        int bla = 0, blb = 0;
        bool found = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                double d = dist[i * n + j];
                int la = std::min(label[i], label[j]), lb = std::max(label[i], label[j]);
                bool better = d < bd - 1e-15;
                bool tie = std::abs(d - bd) <= 1e-15 && (la < bla || (la == bla && lb < blb));
                if (!found || better || tie) {
                    bd = d;
                    bi = i;
                    bj = j;
                    bla = la;
                    blb = lb;
                    found = true;
                }
            }
        }

        merges.push_back({std::min(label[bi], label[bj]), std::max(label[bi], label[bj]), bd});

        // Lance-Williams update into slot bi.
        double na = static_cast<double>(size[bi]), nb = static_cast<double>(size[bj]);
        for (std::size_t h = 0; h < n; ++h) {
            if (!active[h] || h == bi || h == bj) continue;
            double dah = dist[bi * n + h], dbh = dist[bj * n + h], dab = dist[bi * n + bj];
            double nh = static_cast<double>(size[h]);
            double d = 0.0;
            switch (linkage) {
                case Linkage::Single: d = std::min(dah, dbh); break;
                case Linkage::Complete: d = std::max(dah, dbh); break;
                case Linkage::Average: d = (na * dah + nb * dbh) / (na + nb); break;
                case Linkage::Ward:
                    d = ((na + nh) * dah + (nb + nh) * dbh - nh * dab) / (na + nb + nh);
                    break;
            }
            dist[bi * n + h] = dist[h * n + bi] = d;
        }
        size[bi] += size[bj];
        label[bi] = std::min(label[bi], label[bj]);
        active[bj] = 0;
    }
    return merges;
}

AggregationResult agglomerative(const FeatureMatrix& f, std::size_t k, Linkage linkage) {
    const std::size_t n = f.rows;
    if (k < 1 || k > n)
        throw ConfigError("agglomerative: k=" + std::to_string(k) + " outside [1," +
                          std::to_string(n) + "]");
    auto merges = agglomerative_dendrogram(f, linkage);

    // Union-find replay of the first n-k merges.
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int v) {
        while (parent[static_cast<std::size_t>(v)] != v) {
            parent[static_cast<std::size_t>(v)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
            v = parent[static_cast<std::size_t>(v)];
        }
        return v;
    };
    for (std::size_t s = 0; s + k < n; ++s) {
        int ra = find(merges[s].a), rb = find(merges[s].b);
        parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
    }
    std::vector<int> root_of(n);
    std::vector<int> roots;
    for (std::size_t r = 0; r < n; ++r) {
        root_of[r] = find(static_cast<int>(r));
        if (static_cast<std::size_t>(root_of[r]) == r) roots.push_back(root_of[r]);
    }
    std::vector<int> assign(n);
    for (std::size_t r = 0; r < n; ++r) {
        auto it = std::lower_bound(roots.begin(), roots.end(), root_of[r]);
        assign[r] = static_cast<int>(std::distance(roots.begin(), it));
    }

    AggregationResult res = result_from_assignments(assign, k);
    res.meta.algorithm = "agglomerative";
    res.meta.linkage = to_string(linkage);
    res.meta.k = k;
    return res;
}

AggregationResult select_representatives(AggregationResult clusters, const FeatureMatrix& f,
                                         const HorizonData& data,
                                         const std::vector<TimeSlice>& slices, bool centroid_mode) {
    const std::size_t k = clusters.weights.size();
    if (k == 0) throw ConfigError("select_representatives: no clusters");
    clusters.centroid_mode = centroid_mode;
    clusters.meta.centroid_mode = centroid_mode;

    auto centers = centroids_of(f, clusters.assignments, k);

    if (!centroid_mode) {
        clusters.representatives.assign(k, -1);
        std::vector<double> best(k, std::numeric_limits<double>::infinity());
        for (std::size_t r = 0; r < f.rows; ++r) {
            auto c = static_cast<std::size_t>(clusters.assignments[r]);
            double d = sq_dist_to(f, r, centers[c]);
            if (d < best[c] - 1e-15) {  // strict improvement: ties keep the lowest index
                best[c] = d;
                clusters.representatives[static_cast<std::size_t>(c)] = static_cast<int>(r);
            }
        }
        clusters.centroid_profiles.clear();
    } else {
        clusters.representatives.assign(k, -1);
        clusters.centroid_profiles.assign(k, SliceView{});
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t r = 0; r < f.rows; ++r) {
            auto c = static_cast<std::size_t>(clusters.assignments[r]);
            SliceView v = slice_view(data, slices.at(r));
            auto& acc = clusters.centroid_profiles[c];
            if (counts[c] == 0) {
                acc = std::move(v);
            } else {
                for (std::size_t t = 0; t < acc.load.size(); ++t) acc.load[t] += v.load[t];
                for (auto& [id, series] : acc.profiles) {
                    const auto& add = v.profiles.at(id);
                    for (std::size_t t = 0; t < series.size(); ++t) series[t] += add[t];
                }
            }
            ++counts[c];
        }
        for (std::size_t c = 0; c < k; ++c) {
            double inv = 1.0 / static_cast<double>(counts[c]);
            auto& acc = clusters.centroid_profiles[c];
            for (auto& v : acc.load) v *= inv;
            for (auto& [id, series] : acc.profiles)
                for (auto& v : series) v *= inv;
        }
    }
    clusters.check(f.rows);
    return clusters;
}

std::vector<ElbowPoint> elbow_scan(const FeatureMatrix& f, const std::vector<std::size_t>& ks,
                                   const std::string& method, Linkage linkage, std::uint64_t seed) {
    if (ks.empty()) throw ConfigError("elbow_scan: empty k list");
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] < 1 || ks[i] > f.rows) throw ConfigError("elbow_scan: k outside [1, rows]");
        if (i > 0 && ks[i] <= ks[i - 1]) throw ConfigError("elbow_scan: k values must be increasing");
    }
    std::vector<ElbowPoint> out;

    if (method == "agglomerative") {
        for (std::size_t k : ks) {
            auto res = agglomerative(f, k, linkage);
            out.push_back({k, wcss(f, res.assignments, k)});
        }
    } else if (method == "kmeans") {
        // Incremental scan: each k is seeded with the previous centers plus the
        // farthest point, so dispersion cannot rise between scanned k values.
        std::vector<int> prev_assign;
        double prev_wcss = std::numeric_limits<double>::infinity();
        std::size_t prev_k = 0;
        for (std::size_t k : ks) {
            auto res = kmeans(f, k, seed);
            double best = wcss(f, res.assignments, k);
            std::vector<int> best_assign = res.assignments;
            if (!prev_assign.empty()) {
                auto centers = centroids_of(f, prev_assign, prev_k);
                while (centers.size() < k) {
                    std::size_t far = 0;
                    double fd = -1.0;
                    auto cur = centers;
                    for (std::size_t r = 0; r < f.rows; ++r) {
                        double bd = std::numeric_limits<double>::infinity();
                        for (const auto& c : cur) bd = std::min(bd, sq_dist_to(f, r, c));
                        if (bd > fd + 1e-15) {
                            fd = bd;
                            far = r;
                        }
                    }
                    centers.emplace_back(f.data.begin() + static_cast<long>(far * f.dim),
                                         f.data.begin() + static_cast<long>((far + 1) * f.dim));
                }
                LloydResult warm = lloyd(f, std::move(centers));
                if (warm.wcss < best) {
                    best = warm.wcss;
                    best_assign = warm.assign;
                }
            }
            if (best > prev_wcss + 1e-9 * (1.0 + prev_wcss))
                throw InternalConsistencyError("elbow dispersion increased with k");
            out.push_back({k, best});
            prev_assign = best_assign;
            prev_wcss = best;
            prev_k = k;
        }
    } else {
        throw ConfigError("elbow_scan: unknown method '" + method + "'");
    }
    return out;
}

std::vector<double> pairwise_sq_distances_serial(const FeatureMatrix& f) {
    const std::size_t n = f.rows;
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i * n + j] = sq_dist(f, i, j);
    return d;
}

std::vector<double> pairwise_sq_distances(const FeatureMatrix& f, int jobs) {
    const std::size_t n = f.rows;
    std::vector<double> d(n * n, 0.0);
#ifdef _OPENMP
    if (jobs > 1) {
#pragma omp parallel for num_threads(jobs) schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            for (std::size_t j = 0; j < n; ++j)
                d[static_cast<std::size_t>(i) * n + j] = sq_dist(f, static_cast<std::size_t>(i), j);
        return d;
    }
#else
    (void)jobs;
#endif
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i * n + j] = sq_dist(f, i, j);
    return d;
}

}  // namespace esom
