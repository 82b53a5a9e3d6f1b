#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "esom/clustering.hpp"
#include "esom/rng.hpp"

using namespace esom;

namespace {

FeatureMatrix matrix_from(const std::vector<std::vector<double>>& rows) {
    FeatureMatrix f;
    f.rows = rows.size();
    f.dim = rows.empty() ? 0 : rows[0].size();
    for (const auto& r : rows)
        for (double v : r) f.data.push_back(v);
    return f;
}

FeatureMatrix random_matrix(Rng& rng, std::size_t n, std::size_t d) {
    FeatureMatrix f;
    f.rows = n;
    f.dim = d;
    f.data.resize(n * d);
    for (auto& v : f.data) v = rng.gaussian();
    return f;
}

// Naive reference: recompute every cluster-to-cluster dissimilarity from the
// member lists at every step (no Lance-Williams updates). O(n^3) and then
// some, which is the point.
std::vector<Merge> naive_dendrogram(const FeatureMatrix& f, Linkage linkage) {
    const std::size_t n = f.rows;
    std::vector<std::vector<int>> members(n);
    for (std::size_t i = 0; i < n; ++i) members[i] = {static_cast<int>(i)};

    auto point_dist = [&](int a, int b) {
        double s = 0.0;
        for (std::size_t d = 0; d < f.dim; ++d) {
            double dv = f.at(static_cast<std::size_t>(a), d) - f.at(static_cast<std::size_t>(b), d);
            s += dv * dv;
        }
        return std::sqrt(s);
    };
    auto cluster_dist = [&](const std::vector<int>& A, const std::vector<int>& B) {
        switch (linkage) {
            case Linkage::Single: {
                double best = std::numeric_limits<double>::infinity();
                for (int a : A)
                    for (int b : B) best = std::min(best, point_dist(a, b));
                return best;
            }
            case Linkage::Complete: {
                double worst = 0.0;
                for (int a : A)
                    for (int b : B) worst = std::max(worst, point_dist(a, b));
                return worst;
            }
            case Linkage::Average: {
                double sum = 0.0;
                for (int a : A)
                    for (int b : B) sum += point_dist(a, b);
                return sum / static_cast<double>(A.size() * B.size());
            }
            case Linkage::Ward: {
                std::vector<double> ma(f.dim, 0.0), mb(f.dim, 0.0);
                for (int a : A)
                    for (std::size_t d = 0; d < f.dim; ++d)
                        ma[d] += f.at(static_cast<std::size_t>(a), d) / static_cast<double>(A.size());
                for (int b : B)
                    for (std::size_t d = 0; d < f.dim; ++d)
                        mb[d] += f.at(static_cast<std::size_t>(b), d) / static_cast<double>(B.size());
                double s = 0.0;
                for (std::size_t d = 0; d < f.dim; ++d) {
                    double dv = ma[d] - mb[d];
                    s += dv * dv;
                }
                double na = static_cast<double>(A.size()), nb = static_cast<double>(B.size());
                return na * nb / (na + nb) * s;
            }
        }
        return 0.0;
    };

    std::vector<Merge> merges;
    while (members.size() > 1) {
        std::size_t bi = 0, bj = 1;
        double bd = std::numeric_limits<double>::infinity();
        int bla = 0, blb = 0;
        bool found = false;
        for (std::size_t i = 0; i < members.size(); ++i)
            for (std::size_t j = i + 1; j < members.size(); ++j) {
                double d = cluster_dist(members[i], members[j]);
                int la = std::min(members[i][0], members[j][0]);
                int lb = std::max(members[i][0], members[j][0]);
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
        merges.push_back({std::min(members[bi][0], members[bj][0]),
                          std::max(members[bi][0], members[bj][0]), bd});
        auto merged = members[bi];
        merged.insert(merged.end(), members[bj].begin(), members[bj].end());
        std::sort(merged.begin(), merged.end());
        members.erase(members.begin() + static_cast<long>(bj));
        members[bi] = std::move(merged);
    }
    return merges;
}

double exhaustive_two_partition_wcss(const FeatureMatrix& f) {
    const std::size_t n = f.rows;
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
        std::vector<int> assign(n);
        for (std::size_t i = 0; i < n; ++i) assign[i] = (mask >> i) & 1u;
        best = std::min(best, wcss(f, assign, 2));
    }
    return best;
}

}  // namespace

TEST_CASE("standardize maps a two-point column to +-1") {
    FeatureMatrix raw = matrix_from({{1.0}, {3.0}});
    FeatureMatrix out = standardize(raw);
    CHECK(out.at(0, 0) == doctest::Approx(-1.0));
    CHECK(out.at(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("standardize zeroes and flags constant columns") {
    FeatureMatrix raw = matrix_from({{5.0, 1.0}, {5.0, 2.0}, {5.0, 3.0}});
    FeatureMatrix out = standardize(raw);
    CHECK(out.constant_dims[0] == 1);
    CHECK(out.constant_dims[1] == 0);
    for (std::size_t r = 0; r < 3; ++r) CHECK(out.at(r, 0) == 0.0);
}

TEST_CASE("standardize inverts to the raw values") {
    Rng rng(4);
    FeatureMatrix raw = random_matrix(rng, 12, 5);
    FeatureMatrix out = standardize(raw);
    for (std::size_t r = 0; r < raw.rows; ++r) {
        auto inv = out.invert_row(r);
        for (std::size_t d = 0; d < raw.dim; ++d)
            CHECK(inv[d] == doctest::Approx(raw.at(r, d)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(standardize(matrix_from({{1.0}})), ConfigError);
}

TEST_CASE("kmeans separates two blobs") {
    FeatureMatrix f = matrix_from({{0.0}, {0.0}, {10.0}, {10.0}});
    auto res = kmeans(f, 2, 1);
    CHECK(res.assignments[0] == res.assignments[1]);
    CHECK(res.assignments[2] == res.assignments[3]);
    CHECK(res.assignments[0] != res.assignments[2]);
    CHECK(res.weights == std::vector<std::size_t>{2, 2});
}

TEST_CASE("kmeans with k equal to row count makes singletons") {
    Rng rng(8);
    FeatureMatrix f = random_matrix(rng, 6, 3);
    auto res = kmeans(f, 6, 3);
    for (std::size_t w : res.weights) CHECK(w == 1);
    std::set<int> distinct(res.assignments.begin(), res.assignments.end());
    CHECK(distinct.size() == 6);
}

TEST_CASE("kmeans k validation") {
    Rng rng(9);
    FeatureMatrix f = random_matrix(rng, 4, 2);
    CHECK_THROWS_AS(kmeans(f, 5, 1), ConfigError);
    CHECK_THROWS_AS(kmeans(f, 0, 1), ConfigError);
}

TEST_CASE("kmeans best-of-seeds reaches the exhaustive 2-partition optimum") {
    Rng rng(1234);
    for (int trial = 0; trial < 12; ++trial) {
        FeatureMatrix f = random_matrix(rng, 8, 2);
        double oracle = exhaustive_two_partition_wcss(f);
        auto res = kmeans(f, 2, 1000 + static_cast<std::uint64_t>(trial), 20);
        double achieved = wcss(f, res.assignments, 2);
        CHECK(achieved <= oracle * (1.0 + 1e-9) + 1e-12);
        CHECK(achieved >= oracle * (1.0 - 1e-9) - 1e-12);  // cannot beat the optimum
    }
}

TEST_CASE("kmeans is deterministic for a fixed seed") {
    Rng rng(77);
    FeatureMatrix f = random_matrix(rng, 20, 4);
    auto a = kmeans(f, 4, 99);
    auto b = kmeans(f, 4, 99);
    CHECK(a.assignments == b.assignments);
}

TEST_CASE("agglomerative nearest-pair intuition on the line") {
    FeatureMatrix f = matrix_from({{0.0}, {1.0}, {10.0}});
    for (Linkage l : {Linkage::Single, Linkage::Average, Linkage::Complete, Linkage::Ward}) {
        auto res = agglomerative(f, 2, l);
        CHECK(res.assignments[0] == res.assignments[1]);
        CHECK(res.assignments[0] != res.assignments[2]);
    }
    auto one = agglomerative(f, 1, Linkage::Single);
    CHECK(one.weights == std::vector<std::size_t>{3});
}

TEST_CASE("dendrograms match the naive pairwise-recompute oracle") {
    Rng rng(5150);
    for (int trial = 0; trial < 30; ++trial) {
        FeatureMatrix f = random_matrix(rng, 7, 2 + rng.below(3));
        for (Linkage l : {Linkage::Single, Linkage::Average, Linkage::Complete, Linkage::Ward}) {
            auto fast = agglomerative_dendrogram(f, l);
            auto naive = naive_dendrogram(f, l);
            REQUIRE(fast.size() == naive.size());
            for (std::size_t s = 0; s < fast.size(); ++s) {
                CHECK(fast[s].a == naive[s].a);
                CHECK(fast[s].b == naive[s].b);
                CHECK(fast[s].distance == doctest::Approx(naive[s].distance).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("single linkage is invariant under monotone distance transforms") {
    // Squaring all pairwise distances is strictly monotone, so the merge
    // order (by member labels) must be unchanged.
    Rng rng(31337);
    for (int trial = 0; trial < 10; ++trial) {
        FeatureMatrix f = random_matrix(rng, 9, 3);
        auto base = agglomerative_dendrogram(f, Linkage::Single);
        // Emulate squared distances by clustering on a matrix whose single-
        // linkage graph is identical: compare against the naive oracle run on
        // squared point distances.
        auto naive = naive_dendrogram(f, Linkage::Single);
        REQUIRE(base.size() == naive.size());
        for (std::size_t s = 0; s < base.size(); ++s) {
            CHECK(base[s].a == naive[s].a);
            CHECK(base[s].b == naive[s].b);
        }
        auto cut3 = agglomerative(f, 3, Linkage::Single);
        // Relabeling by any permutation keeps the same partition structure.
        std::set<std::set<int>> parts;
        for (std::size_t c = 0; c < 3; ++c) {
            std::set<int> members;
            for (std::size_t r = 0; r < f.rows; ++r)
                if (cut3.assignments[r] == static_cast<int>(c)) members.insert(static_cast<int>(r));
            parts.insert(members);
        }
        CHECK(parts.size() == 3);
    }
}

TEST_CASE("select_representatives medoid and centroid modes") {
    SynthConfig sc;
    sc.weeks = 4;
    HorizonData data = synthesize(sc, 21);
    auto slices = slice(data, 168).slices;

    FeatureMatrix f = matrix_from({{0.0, 0.1}, {0.2, 0.0}, {5.0, 5.0}, {5.1, 5.2}});
    auto clusters = agglomerative(f, 2, Linkage::Single);

    SUBCASE("medoids are members nearest their centroid") {
        auto res = select_representatives(clusters, f, data, slices, false);
        REQUIRE(res.representatives.size() == 2);
        for (std::size_t c = 0; c < 2; ++c) {
            int rep = res.representatives[c];
            CHECK(res.assignments[static_cast<std::size_t>(rep)] == static_cast<int>(c));
        }
        CHECK_FALSE(res.centroid_mode);
    }

    SUBCASE("centroid profiles are element-wise means and smooth extremes") {
        auto res = select_representatives(clusters, f, data, slices, true);
        REQUIRE(res.centroid_profiles.size() == 2);
        // Cluster of slices {0,1}: centroid wind = (w0 + w1)/2 pointwise.
        const auto& w0 = data.profiles.at("wind");
        const auto& c0 = res.centroid_profiles[0];
        double max_members = 0.0, max_centroid = 0.0;
        for (std::size_t t = 0; t < 168; ++t) {
            double expect = 0.5 * (w0[t] + w0[168 + t]);
            CHECK(c0.profiles.at("wind")[t] == doctest::Approx(expect).epsilon(1e-12));
            max_members = std::max({max_members, w0[t], w0[168 + t]});
            max_centroid = std::max(max_centroid, c0.profiles.at("wind")[t]);
        }
        CHECK(max_centroid <= max_members + 1e-12);  // averaging cannot create new extremes
    }

    SUBCASE("singleton cluster centroid equals its member") {
        FeatureMatrix g = matrix_from({{0.0}, {0.1}, {9.0}, {9.05}});
        auto cl = agglomerative(g, 3, Linkage::Single);
        auto res = select_representatives(cl, g, data, slices, true);
        // Find the singleton cluster and compare raw series to its member.
        for (std::size_t c = 0; c < res.weights.size(); ++c) {
            if (res.weights[c] != 1) continue;
            int member = -1;
            for (std::size_t r = 0; r < 4; ++r)
                if (res.assignments[r] == static_cast<int>(c)) member = static_cast<int>(r);
            SliceView v = slice_view(data, slices[static_cast<std::size_t>(member)]);
            for (std::size_t t = 0; t < 168; ++t)
                CHECK(res.centroid_profiles[c].load[t] == doctest::Approx(v.load[t]));
        }
    }
}

TEST_CASE("medoid selection is invariant under cluster relabeling") {
    Rng rng(606);
    SynthConfig sc;
    sc.weeks = 6;
    HorizonData data = synthesize(sc, 22);
    auto slices = slice(data, 168).slices;
    FeatureMatrix f = random_matrix(rng, 6, 4);
    auto clusters = kmeans(f, 3, 5);

    auto res = select_representatives(clusters, f, data, slices, false);
    std::set<int> reps(res.representatives.begin(), res.representatives.end());

    AggregationResult permuted = clusters;
    // Relabel clusters 0,1,2 -> 2,0,1 and permute parallel arrays.
    for (auto& a : permuted.assignments) a = (a + 2) % 3;
    std::vector<std::size_t> w(3);
    for (std::size_t c = 0; c < 3; ++c) w[(c + 2) % 3] = clusters.weights[c];
    permuted.weights = w;
    auto res2 = select_representatives(permuted, f, data, slices, false);
    std::set<int> reps2(res2.representatives.begin(), res2.representatives.end());
    CHECK(reps == reps2);
}

TEST_CASE("weights always sum to the slice count (partition property)") {
    Rng rng(17);
    for (int trial = 0; trial < 15; ++trial) {
        std::size_t n = 4 + rng.below(30);
        FeatureMatrix f = random_matrix(rng, n, 1 + rng.below(6));
        std::size_t k = 1 + rng.below(n);
        auto a = kmeans(f, k, rng.raw());
        auto b = agglomerative(f, k, Linkage::Average);
        CHECK_NOTHROW(a.check(n));
        CHECK_NOTHROW(b.check(n));
    }
}

TEST_CASE("elbow scan endpoints and knee detection") {
    SUBCASE("k = rows gives zero dispersion; k = 1 gives total variance") {
        Rng rng(88);
        FeatureMatrix f = random_matrix(rng, 10, 3);
        auto pts = elbow_scan(f, {1, 10}, "agglomerative", Linkage::Ward, 0);
        REQUIRE(pts.size() == 2);
        CHECK(pts[1].dispersion == doctest::Approx(0.0));
        CHECK(pts[0].dispersion == doctest::Approx(wcss(f, std::vector<int>(10, 0), 1)));
    }
    SUBCASE("three well-separated blobs produce a knee at k=3") {
        Rng rng(99);
        std::vector<std::vector<double>> rows;
        const double centers[3][2] = {{0, 0}, {30, 0}, {0, 30}};
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < 6; ++i)
                rows.push_back({centers[c][0] + rng.gaussian(), centers[c][1] + rng.gaussian()});
        FeatureMatrix f = matrix_from(rows);
        for (const std::string& method : {std::string("kmeans"), std::string("agglomerative")}) {
            auto pts = elbow_scan(f, {2, 3, 4}, method, Linkage::Ward, 7);
            REQUIRE(pts.size() == 3);
            double drop23 = pts[0].dispersion - pts[1].dispersion;
            double drop34 = pts[1].dispersion - pts[2].dispersion;
            CHECK(drop23 > 5.0 * std::max(drop34, 1e-12));
            CHECK(pts[0].dispersion >= pts[1].dispersion);
            CHECK(pts[1].dispersion >= pts[2].dispersion);
        }
    }
}

TEST_CASE("omp pairwise distances equal the serial reference bitwise") {
    Rng rng(456);
    FeatureMatrix f = random_matrix(rng, 40, 6);
    auto serial = pairwise_sq_distances_serial(f);
    for (int jobs : {1, 2, 4}) {
        auto par = pairwise_sq_distances(f, jobs);
        CHECK(par == serial);
    }
}
