#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "dtspp/cluster.hpp"
#include "dtspp/rng.hpp"

using namespace dtspp;

namespace {

Eigen::MatrixXd three_blobs(int per_blob, double separation, double spread, std::uint64_t seed,
                            std::vector<int>* truth = nullptr) {
    std::mt19937_64 eng(seed);
    Eigen::MatrixXd points(3 * per_blob, 3);
    const double centers[3][3] = {
        {0.0, 0.0, 0.0}, {separation, 0.0, 0.0}, {0.0, separation, 0.0}};
    for (int b = 0; b < 3; ++b) {
        for (int i = 0; i < per_blob; ++i) {
            const int row = b * per_blob + i;
            for (int d = 0; d < 3; ++d)
                points(row, d) = centers[b][d] + spread * gaussian(eng);
            if (truth) truth->push_back(b);
        }
    }
    return points;
}

bool perfect_agreement(const std::vector<int>& a, const std::vector<int>& b, int k) {
    // Exact agreement up to label permutation: each label of `a` must map to
    // exactly one label of `b` and vice versa.
    std::map<int, int> forward, backward;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto [fit, fnew] = forward.try_emplace(a[i], b[i]);
        if (!fnew && fit->second != b[i]) return false;
        auto [bit, bnew] = backward.try_emplace(b[i], a[i]);
        if (!bnew && bit->second != a[i]) return false;
    }
    return static_cast<int>(forward.size()) == k;
}

// Prim's MST over euclidean distances; edge weights sorted ascending.
std::vector<double> mst_edges(const Eigen::MatrixXd& points) {
    const Eigen::Index n = points.rows();
    std::vector<char> in_tree(static_cast<std::size_t>(n), 0);
    std::vector<double> best(static_cast<std::size_t>(n),
                             std::numeric_limits<double>::infinity());
    std::vector<double> edges;
    in_tree[0] = 1;
    for (Eigen::Index j = 1; j < n; ++j)
        best[static_cast<std::size_t>(j)] = (points.row(0) - points.row(j)).norm();
    for (Eigen::Index step = 1; step < n; ++step) {
        double min_d = std::numeric_limits<double>::infinity();
        Eigen::Index pick = -1;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!in_tree[static_cast<std::size_t>(j)] && best[static_cast<std::size_t>(j)] < min_d) {
                min_d = best[static_cast<std::size_t>(j)];
                pick = j;
            }
        }
        edges.push_back(min_d);
        in_tree[static_cast<std::size_t>(pick)] = 1;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (in_tree[static_cast<std::size_t>(j)]) continue;
            best[static_cast<std::size_t>(j)] = std::min(
                best[static_cast<std::size_t>(j)], (points.row(pick) - points.row(j)).norm());
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

}  // namespace

TEST_CASE("kmeans with k = n puts every point in its own cluster") {
    std::mt19937_64 eng(1);
    Eigen::MatrixXd points(6, 2);
    for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index d = 0; d < 2; ++d) points(i, d) = gaussian(eng);
    const ClusterAssignment a = kmeans(points, 6, 7);
    CHECK(a.inertia == doctest::Approx(0.0).epsilon(1e-14));
    std::set<int> labels(a.labels.begin(), a.labels.end());
    CHECK(labels.size() == 6);
}

TEST_CASE("kmeans with k = 1 returns the mean and total squared deviation") {
    std::mt19937_64 eng(2);
    Eigen::MatrixXd points(40, 3);
    for (Eigen::Index i = 0; i < 40; ++i)
        for (Eigen::Index d = 0; d < 3; ++d) points(i, d) = gaussian(eng) * 2.0 + 1.0;
    const ClusterAssignment a = kmeans(points, 1, 3);
    const Eigen::RowVectorXd mean = points.colwise().mean();
    CHECK((a.centroids.row(0) - mean).norm() == doctest::Approx(0.0).epsilon(1e-12));
    double expect = 0.0;
    for (Eigen::Index i = 0; i < 40; ++i) expect += (points.row(i) - mean).squaredNorm();
    CHECK(a.inertia == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("kmeans recovers planted well-separated blobs exactly") {
    std::vector<int> truth;
    const Eigen::MatrixXd points = three_blobs(40, 10.0, 1.0, 42, &truth);
    const ClusterAssignment a = kmeans(points, 3, 42);
    CHECK(perfect_agreement(truth, a.labels, 3));
}

TEST_CASE("kmeans separates two blobs at 10x their spread, k = 2") {
    std::mt19937_64 eng(4242);
    Eigen::MatrixXd points(60, 2);
    std::vector<int> truth(60);
    for (int i = 0; i < 60; ++i) {
        const int b = i < 30 ? 0 : 1;
        points(i, 0) = (b ? 10.0 : 0.0) + gaussian(eng);
        points(i, 1) = gaussian(eng);
        truth[static_cast<std::size_t>(i)] = b;
    }
    const ClusterAssignment a = kmeans(points, 2, 17);
    CHECK(perfect_agreement(truth, a.labels, 2));
}

TEST_CASE("kmeans inertia history is non-increasing on many fixtures") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        std::mt19937_64 eng(seed + 100);
        Eigen::MatrixXd points(60, 4);
        for (Eigen::Index i = 0; i < 60; ++i)
            for (Eigen::Index d = 0; d < 4; ++d) points(i, d) = gaussian(eng) * 3.0;
        const ClusterAssignment a = kmeans(points, 5, seed, {.n_init = 1});
        REQUIRE(!a.inertia_history.empty());
        for (std::size_t t = 1; t < a.inertia_history.size(); ++t)
            CHECK(a.inertia_history[t] <= a.inertia_history[t - 1] + 1e-9);
    }
}

TEST_CASE("kmeans is deterministic for a fixed seed and validates inputs") {
    const Eigen::MatrixXd points = three_blobs(10, 6.0, 1.0, 5);
    const ClusterAssignment a = kmeans(points, 3, 11);
    const ClusterAssignment b = kmeans(points, 3, 11);
    CHECK(a.labels == b.labels);
    CHECK(a.inertia == b.inertia);
    CHECK(a.seed == 11);

    CHECK_THROWS_AS(kmeans(points, 31, 1), numeric_error);
    Eigen::MatrixXd bad = points;
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(kmeans(bad, 2, 1), numeric_error);
}

TEST_CASE("kmeans partition is invariant under translation and rotation") {
    std::vector<int> truth;
    const Eigen::MatrixXd points = three_blobs(30, 12.0, 1.0, 77, &truth);
    const ClusterAssignment base = kmeans(points, 3, 9);

    Eigen::MatrixXd shifted = points;
    shifted.rowwise() += Eigen::RowVector3d(100.0, -40.0, 7.0);
    const ClusterAssignment moved = kmeans(shifted, 3, 9);
    CHECK(moved.inertia == doctest::Approx(base.inertia).epsilon(1e-10));
    CHECK(perfect_agreement(base.labels, moved.labels, 3));

    // Orthogonal rotation built from a QR factorization.
    std::mt19937_64 eng(123);
    Eigen::MatrixXd g(3, 3);
    for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) g(i, j) = gaussian(eng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    const ClusterAssignment rotated = kmeans(points * q, 3, 9);
    CHECK(rotated.inertia == doctest::Approx(base.inertia).epsilon(1e-10));
    CHECK(perfect_agreement(base.labels, rotated.labels, 3));
}

TEST_CASE("label permutation does not change inertia") {
    const Eigen::MatrixXd points = three_blobs(15, 10.0, 1.0, 31);
    const ClusterAssignment a = kmeans(points, 3, 4);
    // Recompute inertia with permuted labels but matching centroid rows.
    const int perm[3] = {2, 0, 1};
    Eigen::MatrixXd centroids(3, 3);
    for (int c = 0; c < 3; ++c) centroids.row(perm[c]) = a.centroids.row(c);
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        inertia += (points.row(i) - centroids.row(perm[a.labels[static_cast<std::size_t>(i)]]))
                       .squaredNorm();
    CHECK(inertia == doctest::Approx(a.inertia).epsilon(1e-12));
}

TEST_CASE("plain random initialization is available") {
    const Eigen::MatrixXd points = three_blobs(20, 10.0, 1.0, 8);
    const ClusterAssignment a = kmeans(points, 3, 2, {.n_init = 10, .plus_plus = false});
    CHECK(a.labels.size() == 60);
    CHECK(a.inertia > 0.0);
}

TEST_CASE("hierarchical: two points merge at their distance") {
    Eigen::MatrixXd points(2, 1);
    points << 0.0, 3.0;
    const Dendrogram d = hierarchical(points, Metric::euclidean, Linkage::single);
    REQUIRE(d.merges.size() == 1);
    CHECK(d.merges[0].distance == doctest::Approx(3.0));
    CHECK(d.merges[0].size == 2);
}

TEST_CASE("hierarchical: collinear points, single link merges nearest first") {
    Eigen::MatrixXd points(3, 1);
    points << 0.0, 1.0, 10.0;
    const Dendrogram d = hierarchical(points, Metric::euclidean, Linkage::single);
    REQUIRE(d.merges.size() == 2);
    CHECK(d.merges[0].a == 0);
    CHECK(d.merges[0].b == 1);
    CHECK(d.merges[0].distance == doctest::Approx(1.0));
    CHECK(d.merges[1].distance == doctest::Approx(9.0));
}

TEST_CASE("single-linkage merge distances equal sorted MST edges") {
    std::mt19937_64 eng(50);
    Eigen::MatrixXd points(15, 3);
    for (Eigen::Index i = 0; i < 15; ++i)
        for (Eigen::Index d = 0; d < 3; ++d) points(i, d) = gaussian(eng) * 4.0;

    const Dendrogram dendro = hierarchical(points, Metric::euclidean, Linkage::single);
    const std::vector<double> mst = mst_edges(points);
    REQUIRE(dendro.merges.size() == mst.size());
    for (std::size_t t = 0; t < mst.size(); ++t)
        CHECK(dendro.merges[t].distance == doctest::Approx(mst[t]).epsilon(1e-12));
}

TEST_CASE("merge distances are non-decreasing for all monotone linkages") {
    std::mt19937_64 eng(60);
    Eigen::MatrixXd points(25, 3);
    for (Eigen::Index i = 0; i < 25; ++i)
        for (Eigen::Index d = 0; d < 3; ++d) points(i, d) = gaussian(eng);
    for (const Linkage linkage :
         {Linkage::single, Linkage::complete, Linkage::average, Linkage::ward}) {
        const Dendrogram d = hierarchical(points, Metric::euclidean, linkage);
        for (std::size_t t = 1; t < d.merges.size(); ++t)
            CHECK(d.merges[t].distance >= d.merges[t - 1].distance - 1e-10);
    }
}

TEST_CASE("ward requires euclidean; other metric/linkage pairs work") {
    Eigen::MatrixXd points(4, 2);
    points << 2, 1, 1, 0.5, 0.1, 1, 5, 5;
    CHECK_THROWS_AS(hierarchical(points, Metric::manhattan, Linkage::ward), numeric_error);
    CHECK(hierarchical(points, Metric::manhattan, Linkage::complete).merges.size() == 3);
    CHECK(hierarchical(points, Metric::cosine, Linkage::average).merges.size() == 3);

    Eigen::MatrixXd with_zero(2, 2);
    with_zero << 0, 0, 1, 1;
    CHECK_THROWS_AS(hierarchical(with_zero, Metric::cosine, Linkage::single), numeric_error);
}

TEST_CASE("cut_dendrogram: k = 1, k = n, and planted blobs") {
    std::vector<int> truth;
    const Eigen::MatrixXd points = three_blobs(8, 10.0, 1.0, 90, &truth);
    const Dendrogram d = hierarchical(points, Metric::euclidean, Linkage::complete);

    const auto all_one = cut_dendrogram(d, 1);
    CHECK(std::set<int>(all_one.begin(), all_one.end()).size() == 1);

    const auto singletons = cut_dendrogram(d, 24);
    CHECK(std::set<int>(singletons.begin(), singletons.end()).size() == 24);
    // Labels in order of cluster-representative (= leaf) index.
    for (int i = 0; i < 24; ++i) CHECK(singletons[static_cast<std::size_t>(i)] == i);

    const auto three = cut_dendrogram(d, 3);
    CHECK(perfect_agreement(truth, three, 3));

    CHECK_THROWS_AS(cut_dendrogram(d, 0), numeric_error);
    CHECK_THROWS_AS(cut_dendrogram(d, 25), numeric_error);
}

TEST_CASE("newick export nests every leaf") {
    Eigen::MatrixXd points(3, 1);
    points << 0.0, 1.0, 10.0;
    const Dendrogram d = hierarchical(points, Metric::euclidean, Linkage::single);
    const std::string nwk = to_newick(d);
    CHECK(nwk == "(2,(0,1):1):9;");
}
