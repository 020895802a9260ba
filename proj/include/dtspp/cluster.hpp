#ifndef DTSPP_CLUSTER_HPP
#define DTSPP_CLUSTER_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "dtspp/common.hpp"

namespace dtspp {

struct ClusterAssignment {
    std::vector<int> labels;           // per point, 0..k-1
    Eigen::MatrixXd centroids;         // k x dims
    double inertia = 0.0;              // sum of squared distances to assigned centroid
    int iterations_run = 0;
    std::uint64_t seed = 0;
    std::vector<double> inertia_history;  // per-iteration cost of the winning restart
};

struct KMeansOptions {
    int max_iter = 300;
    int n_init = 10;
    /// k-means++ seeding by default; plain random distinct picks when false.
    bool plus_plus = true;
};

/// Lloyd's algorithm, best of n_init restarts by inertia, deterministic for
/// a given seed. Points are rows. Empty clusters are reseeded with the point
/// farthest from its assigned centroid.
ClusterAssignment kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                         KMeansOptions options = {});

enum class Metric { euclidean, manhattan, cosine };
enum class Linkage { single, complete, average, ward };

Metric metric_from_name(const std::string& name);
Linkage linkage_from_name(const std::string& name);
std::string to_string(Metric m);
std::string to_string(Linkage l);

/// Agglomerative merge tree. Cluster ids follow the usual convention:
/// leaves are 0..n-1, the cluster formed at step t is n+t.
struct Dendrogram {
    struct Merge {
        int a = 0;
        int b = 0;
        double distance = 0.0;
        int size = 0;  // leaves in the merged cluster
    };
    std::vector<Merge> merges;  // n-1 rows
    Linkage linkage = Linkage::single;
    Metric metric = Metric::euclidean;
    int n_leaves = 0;
};

/// Standard agglomerative clustering via the Lance-Williams recurrences.
/// Ties break on the lexicographically smallest cluster-id pair. Ward
/// requires the euclidean metric.
Dendrogram hierarchical(const Eigen::MatrixXd& points, Metric metric, Linkage linkage);

/// Flat labeling from the dendrogram with the last k-1 merges undone.
/// Labels are assigned in order of each cluster's smallest leaf index.
std::vector<int> cut_dendrogram(const Dendrogram& dendrogram, int k);

/// Newick-style rendering with merge distances as branch annotations.
std::string to_newick(const Dendrogram& dendrogram);

}  // namespace dtspp

#endif
