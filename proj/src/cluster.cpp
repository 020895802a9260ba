#include "dtspp/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "dtspp/rng.hpp"

namespace dtspp {

namespace {

double sq_dist(const Eigen::MatrixXd& points, Eigen::Index i, const Eigen::RowVectorXd& c) {
    return (points.row(i) - c).squaredNorm();
}

std::vector<int> kmeanspp_init(const Eigen::MatrixXd& points, int k, std::mt19937_64& eng) {
    const Eigen::Index n = points.rows();
    std::vector<int> centers;
    centers.reserve(static_cast<std::size_t>(k));

    std::vector<double> min_d2(static_cast<std::size_t>(n),
                               std::numeric_limits<double>::infinity());
    centers.push_back(static_cast<int>(bounded_uint(eng, static_cast<std::uint64_t>(n))));

    while (static_cast<int>(centers.size()) < k) {
        const Eigen::RowVectorXd last = points.row(centers.back());
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d2 = sq_dist(points, i, last);
            auto& slot = min_d2[static_cast<std::size_t>(i)];
            if (d2 < slot) slot = d2;
            total += slot;
        }
        if (total <= 0.0) break;  // only duplicates of chosen centers remain
        const double target = uniform_open(eng) * total;
        double running = 0.0;
        int chosen = static_cast<int>(n) - 1;
        for (Eigen::Index i = 0; i < n; ++i) {
            running += min_d2[static_cast<std::size_t>(i)];
            if (running >= target) {
                chosen = static_cast<int>(i);
                break;
            }
        }
        centers.push_back(chosen);
        min_d2[static_cast<std::size_t>(chosen)] = 0.0;
    }
    return centers;
}

std::vector<int> random_distinct_init(const Eigen::MatrixXd& points, int k,
                                      std::mt19937_64& eng) {
    const Eigen::Index n = points.rows();
    std::vector<int> pool(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = static_cast<int>(i);
    for (int t = 0; t < k; ++t) {
        const auto j = t + bounded_uint(eng, static_cast<std::uint64_t>(n - t));
        std::swap(pool[static_cast<std::size_t>(t)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(k));
    return pool;
}

// Back-fill when seeding stalled on duplicate points: take the lowest
// indices not already chosen.
void fill_missing_centers(std::vector<int>& centers, int k, Eigen::Index n) {
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    for (int c : centers) used[static_cast<std::size_t>(c)] = 1;
    for (Eigen::Index i = 0; i < n && static_cast<int>(centers.size()) < k; ++i) {
        if (!used[static_cast<std::size_t>(i)]) centers.push_back(static_cast<int>(i));
    }
}

ClusterAssignment lloyd_once(const Eigen::MatrixXd& points, int k, std::uint64_t restart_seed,
                             const KMeansOptions& options) {
    const Eigen::Index n = points.rows();
    std::mt19937_64 eng(restart_seed);

    std::vector<int> center_idx = options.plus_plus ? kmeanspp_init(points, k, eng)
                                                    : random_distinct_init(points, k, eng);
    fill_missing_centers(center_idx, k, n);

    ClusterAssignment result;
    result.centroids.resize(k, points.cols());
    for (int c = 0; c < k; ++c) result.centroids.row(c) = points.row(center_idx[static_cast<std::size_t>(c)]);

    result.labels.assign(static_cast<std::size_t>(n), -1);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);

    for (int iter = 0; iter < options.max_iter; ++iter) {
        // Assign to the nearest centroid; ties take the lowest index.
        bool changed = false;
        std::fill(counts.begin(), counts.end(), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d2 = sq_dist(points, i, result.centroids.row(0));
            for (int c = 1; c < k; ++c) {
                const double d2 = sq_dist(points, i, result.centroids.row(c));
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = c;
                }
            }
            if (result.labels[static_cast<std::size_t>(i)] != best) {
                result.labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
            ++counts[static_cast<std::size_t>(best)];
        }

        // Reseed empties with the point farthest from its assigned centroid.
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            double worst = -1.0;
            Eigen::Index worst_i = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const int owner = result.labels[static_cast<std::size_t>(i)];
                if (counts[static_cast<std::size_t>(owner)] <= 1) continue;  // do not empty another cluster
                const double d2 = sq_dist(points, i, result.centroids.row(owner));
                if (d2 > worst) {
                    worst = d2;
                    worst_i = i;
                }
            }
            --counts[static_cast<std::size_t>(result.labels[static_cast<std::size_t>(worst_i)])];
            result.labels[static_cast<std::size_t>(worst_i)] = c;
            ++counts[static_cast<std::size_t>(c)];
            result.centroids.row(c) = points.row(worst_i);
            changed = true;
        }

        double cost = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            cost += sq_dist(points, i, result.centroids.row(result.labels[static_cast<std::size_t>(i)]));
        result.inertia_history.push_back(cost);
        result.inertia = cost;
        result.iterations_run = iter + 1;

        if (!changed) break;

        // Update step: centroids move to the mean of their members.
        result.centroids.setZero();
        for (Eigen::Index i = 0; i < n; ++i)
            result.centroids.row(result.labels[static_cast<std::size_t>(i)]) += points.row(i);
        for (int c = 0; c < k; ++c)
            result.centroids.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    }
    return result;
}

double pair_distance(const Eigen::MatrixXd& points, Eigen::Index i, Eigen::Index j,
                     Metric metric) {
    switch (metric) {
        case Metric::euclidean:
            return (points.row(i) - points.row(j)).norm();
        case Metric::manhattan:
            return (points.row(i) - points.row(j)).cwiseAbs().sum();
        case Metric::cosine: {
            const double ni = points.row(i).norm();
            const double nj = points.row(j).norm();
            if (ni == 0.0 || nj == 0.0)
                throw numeric_error("cosine distance undefined for a zero vector");
            return 1.0 - points.row(i).dot(points.row(j)) / (ni * nj);
        }
    }
    throw numeric_error("unknown metric");
}

}  // namespace

ClusterAssignment kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                         KMeansOptions options) {
    const Eigen::Index n = points.rows();
    if (n == 0) throw data_error("kmeans: no points");
    if (k < 1) throw numeric_error("kmeans: k must be >= 1");
    if (k > n)
        throw numeric_error("kmeans: k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));
    if (!points.allFinite()) throw numeric_error("kmeans: points contain non-finite values");
    if (options.n_init < 1) throw numeric_error("kmeans: n_init must be >= 1");

    ClusterAssignment best;
    bool have_best = false;
    for (int r = 0; r < options.n_init; ++r) {
        ClusterAssignment cand =
            lloyd_once(points, k, derive_seed(seed, static_cast<std::uint64_t>(r)), options);
        if (!have_best || cand.inertia < best.inertia) {
            best = std::move(cand);
            have_best = true;
        }
    }
    best.seed = seed;
    return best;
}

Metric metric_from_name(const std::string& name) {
    if (name == "euclidean") return Metric::euclidean;
    if (name == "manhattan") return Metric::manhattan;
    if (name == "cosine") return Metric::cosine;
    throw data_error("unknown metric '" + name + "'");
}

Linkage linkage_from_name(const std::string& name) {
    if (name == "single") return Linkage::single;
    if (name == "complete") return Linkage::complete;
    if (name == "average") return Linkage::average;
    if (name == "ward") return Linkage::ward;
    throw data_error("unknown linkage '" + name + "'");
}

std::string to_string(Metric m) {
    switch (m) {
        case Metric::euclidean: return "euclidean";
        case Metric::manhattan: return "manhattan";
        case Metric::cosine: return "cosine";
    }
    return "?";
}

std::string to_string(Linkage l) {
    switch (l) {
        case Linkage::single: return "single";
        case Linkage::complete: return "complete";
        case Linkage::average: return "average";
        case Linkage::ward: return "ward";
    }
    return "?";
}

Dendrogram hierarchical(const Eigen::MatrixXd& points, Metric metric, Linkage linkage) {
    const Eigen::Index n = points.rows();
    if (n < 2) throw data_error("hierarchical: need at least 2 points");
    if (linkage == Linkage::ward && metric != Metric::euclidean)
        throw numeric_error("ward linkage requires the euclidean metric");
    if (!points.allFinite()) throw numeric_error("hierarchical: points contain non-finite values");

    Eigen::MatrixXd dist(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dist(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            dist(i, j) = dist(j, i) = pair_distance(points, i, j, metric);
        }
    }

    std::vector<int> active;  // slot indices still in play
    std::vector<int> cluster_id(static_cast<std::size_t>(n));
    std::vector<int> cluster_size(static_cast<std::size_t>(n), 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        active.push_back(static_cast<int>(i));
        cluster_id[static_cast<std::size_t>(i)] = static_cast<int>(i);
    }

    Dendrogram out;
    out.linkage = linkage;
    out.metric = metric;
    out.n_leaves = static_cast<int>(n);
    out.merges.reserve(static_cast<std::size_t>(n - 1));

    for (int step = 0; step < static_cast<int>(n) - 1; ++step) {
        // Find the closest active pair; ties resolve to the smallest id pair.
        double best_d = std::numeric_limits<double>::infinity();
        std::size_t best_ai = 0, best_aj = 1;
        for (std::size_t ai = 0; ai < active.size(); ++ai) {
            for (std::size_t aj = ai + 1; aj < active.size(); ++aj) {
                const int si = active[ai];
                const int sj = active[aj];
                const double d = dist(si, sj);
                if (d < best_d) {
                    best_d = d;
                    best_ai = ai;
                    best_aj = aj;
                } else if (d == best_d) {
                    int ci = std::min(cluster_id[static_cast<std::size_t>(si)],
                                      cluster_id[static_cast<std::size_t>(sj)]);
                    int cj = std::max(cluster_id[static_cast<std::size_t>(si)],
                                      cluster_id[static_cast<std::size_t>(sj)]);
                    const int bi = active[best_ai];
                    const int bj = active[best_aj];
                    int bci = std::min(cluster_id[static_cast<std::size_t>(bi)],
                                       cluster_id[static_cast<std::size_t>(bj)]);
                    int bcj = std::max(cluster_id[static_cast<std::size_t>(bi)],
                                       cluster_id[static_cast<std::size_t>(bj)]);
                    if (ci < bci || (ci == bci && cj < bcj)) {
                        best_ai = ai;
                        best_aj = aj;
                    }
                }
            }
        }

        const int si = active[best_ai];
        const int sj = active[best_aj];
        const int ni = cluster_size[static_cast<std::size_t>(si)];
        const int nj = cluster_size[static_cast<std::size_t>(sj)];
        const int id_i = cluster_id[static_cast<std::size_t>(si)];
        const int id_j = cluster_id[static_cast<std::size_t>(sj)];

        out.merges.push_back({std::min(id_i, id_j), std::max(id_i, id_j), best_d, ni + nj});

        // Lance-Williams update into slot si; slot sj retires.
        for (const int sk : active) {
            if (sk == si || sk == sj) continue;
            const double dki = dist(sk, si);
            const double dkj = dist(sk, sj);
            double merged;
            switch (linkage) {
                case Linkage::single: merged = std::min(dki, dkj); break;
                case Linkage::complete: merged = std::max(dki, dkj); break;
                case Linkage::average:
                    merged = (ni * dki + nj * dkj) / static_cast<double>(ni + nj);
                    break;
                case Linkage::ward: {
                    const double nk = cluster_size[static_cast<std::size_t>(sk)];
                    const double total = ni + nj + nk;
                    merged = std::sqrt(((ni + nk) * dki * dki + (nj + nk) * dkj * dkj -
                                        nk * best_d * best_d) /
                                       total);
                    break;
                }
                default: throw numeric_error("unknown linkage");
            }
            dist(sk, si) = dist(si, sk) = merged;
        }

        cluster_size[static_cast<std::size_t>(si)] = ni + nj;
        cluster_id[static_cast<std::size_t>(si)] = static_cast<int>(n) + step;
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_aj));
    }
    return out;
}

std::vector<int> cut_dendrogram(const Dendrogram& dendrogram, int k) {
    const int n = dendrogram.n_leaves;
    if (k < 1 || k > n)
        throw numeric_error("cut_dendrogram: k=" + std::to_string(k) + " out of range [1, " +
                            std::to_string(n) + "]");

    // Apply all but the last k-1 merges with a union-find over cluster ids.
    std::vector<int> parent(static_cast<std::size_t>(n + n - 1));
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };

    const int merges_applied = n - k;
    for (int t = 0; t < merges_applied; ++t) {
        const auto& m = dendrogram.merges[static_cast<std::size_t>(t)];
        const int target = n + t;
        parent[static_cast<std::size_t>(find(m.a))] = target;
        parent[static_cast<std::size_t>(find(m.b))] = target;
    }

    // Representative = smallest leaf index per cluster; labels in that order.
    std::vector<int> root_of_leaf(static_cast<std::size_t>(n));
    std::map<int, int> rep;  // root -> smallest leaf
    for (int leaf = 0; leaf < n; ++leaf) {
        const int root = find(leaf);
        root_of_leaf[static_cast<std::size_t>(leaf)] = root;
        if (!rep.count(root)) rep[root] = leaf;
    }
    std::vector<std::pair<int, int>> reps(rep.size());  // (smallest leaf, root)
    std::size_t idx = 0;
    for (const auto& [root, leaf] : rep) reps[idx++] = {leaf, root};
    std::sort(reps.begin(), reps.end());

    std::map<int, int> label_of_root;
    for (std::size_t l = 0; l < reps.size(); ++l) label_of_root[reps[l].second] = static_cast<int>(l);

    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int leaf = 0; leaf < n; ++leaf)
        labels[static_cast<std::size_t>(leaf)] = label_of_root[root_of_leaf[static_cast<std::size_t>(leaf)]];
    return labels;
}

std::string to_newick(const Dendrogram& dendrogram) {
    const int n = dendrogram.n_leaves;
    std::vector<std::string> repr(static_cast<std::size_t>(n + n - 1));
    for (int i = 0; i < n; ++i) repr[static_cast<std::size_t>(i)] = std::to_string(i);
    for (std::size_t t = 0; t < dendrogram.merges.size(); ++t) {
        const auto& m = dendrogram.merges[t];
        std::ostringstream node;
        node << '(' << repr[static_cast<std::size_t>(m.a)] << ','
             << repr[static_cast<std::size_t>(m.b)] << "):" << m.distance;
        repr[static_cast<std::size_t>(n) + t] = node.str();
    }
    return repr.back() + ";";
}

}  // namespace dtspp
