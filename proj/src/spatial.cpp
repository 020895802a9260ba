#include "dtspp/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "dtspp/csv.hpp"
#include "dtspp/rng.hpp"
#include "dtspp/stats.hpp"

namespace dtspp {

namespace {

struct SnapKey {
    std::int64_t x;
    std::int64_t y;
    bool operator==(const SnapKey&) const = default;
};

struct SnapKeyHash {
    std::size_t operator()(const SnapKey& k) const {
        std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9e3779b97f4a7c15ULL;
        h ^= static_cast<std::uint64_t>(k.y) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

SnapKey snap_vertex(const Vertex& v, double snap) {
    return {static_cast<std::int64_t>(std::llround(v[0] / snap)),
            static_cast<std::int64_t>(std::llround(v[1] / snap))};
}

void validate_ring(const Ring& ring, const std::string& region) {
    if (ring.size() < 4)
        throw data_error("region " + region + ": ring has " + std::to_string(ring.size()) +
                         " vertices, need at least 4 (closed)");
    if (ring.front() != ring.back())
        throw data_error("region " + region + ": ring is not closed");
}

std::vector<double> deviations(std::span<const double> values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    std::vector<double> z(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) z[i] = values[i] - mean;
    return z;
}

double cross_product_sum(const std::vector<double>& z, const SpatialWeights& w) {
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        double lag = 0.0;
        for (std::size_t t = 0; t < w.neighbors[i].size(); ++t)
            lag += w.weights[i][t] * z[static_cast<std::size_t>(w.neighbors[i][t])];
        total += z[i] * lag;
    }
    return total;
}

double statistic_from_deviations(const std::vector<double>& z, const SpatialWeights& w,
                                 double s0) {
    double z_sq = 0.0;
    for (double v : z) z_sq += v * v;
    if (z_sq == 0.0) throw numeric_error("constant field: Moran's I undefined");
    return (static_cast<double>(z.size()) / s0) * cross_product_sum(z, w) / z_sq;
}

}  // namespace

std::vector<std::string> SpatialWeights::islands() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (neighbors[i].empty()) out.push_back(ids[i]);
    }
    return out;
}

double SpatialWeights::total_weight() const {
    double s0 = 0.0;
    for (const auto& row : weights) {
        for (double v : row) s0 += v;
    }
    return s0;
}

SpatialWeights queen_weights(std::span<const RegionGeometry> geometries, QueenOptions options) {
    if (!(options.snap > 0.0)) throw numeric_error("snap grid must be positive");

    SpatialWeights w;
    w.ids.reserve(geometries.size());
    std::set<std::string> seen;
    for (const auto& g : geometries) {
        if (!seen.insert(g.region_id).second)
            throw data_error("duplicate region id in geometry: " + g.region_id);
        w.ids.push_back(g.region_id);
    }

    std::unordered_map<SnapKey, std::vector<int>, SnapKeyHash> buckets;
    for (std::size_t gi = 0; gi < geometries.size(); ++gi) {
        const auto& g = geometries[gi];
        std::set<std::pair<std::int64_t, std::int64_t>> mine;
        auto add_ring = [&](const Ring& ring) {
            validate_ring(ring, g.region_id);
            for (const auto& v : ring) {
                const SnapKey key = snap_vertex(v, options.snap);
                if (mine.insert({key.x, key.y}).second)
                    buckets[key].push_back(static_cast<int>(gi));
            }
        };
        for (const auto& poly : g.polygons) {
            add_ring(poly.outer);
            for (const auto& hole : poly.holes) add_ring(hole);
        }
    }

    std::vector<std::set<int>> adj(geometries.size());
    for (const auto& [key, members] : buckets) {
        for (std::size_t a = 0; a < members.size(); ++a) {
            for (std::size_t b = a + 1; b < members.size(); ++b) {
                adj[static_cast<std::size_t>(members[a])].insert(members[b]);
                adj[static_cast<std::size_t>(members[b])].insert(members[a]);
            }
        }
    }

    w.neighbors.resize(geometries.size());
    w.weights.resize(geometries.size());
    for (std::size_t i = 0; i < adj.size(); ++i) {
        w.neighbors[i].assign(adj[i].begin(), adj[i].end());
        w.weights[i].assign(w.neighbors[i].size(), 1.0);
    }
    w.standardization = WeightsMode::binary;
    return w;
}

SpatialWeights standardize(const SpatialWeights& w, WeightsMode mode) {
    SpatialWeights out = w;
    out.standardization = mode;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (mode == WeightsMode::binary) {
            out.weights[i].assign(out.neighbors[i].size(), 1.0);
        } else {
            double row_sum = 0.0;
            for (double v : out.weights[i]) row_sum += v;
            if (row_sum > 0.0) {
                for (auto& v : out.weights[i]) v /= row_sum;
            }
        }
    }
    return out;
}

SpatialWeights subset(const SpatialWeights& w, std::span<const std::string> keep_ids) {
    std::set<std::string> keep(keep_ids.begin(), keep_ids.end());
    std::vector<int> new_index(w.size(), -1);
    SpatialWeights out;
    out.standardization = w.standardization;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (keep.count(w.ids[i])) {
            new_index[i] = static_cast<int>(out.ids.size());
            out.ids.push_back(w.ids[i]);
        }
    }
    out.neighbors.resize(out.ids.size());
    out.weights.resize(out.ids.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (new_index[i] < 0) continue;
        const auto ni = static_cast<std::size_t>(new_index[i]);
        for (std::size_t t = 0; t < w.neighbors[i].size(); ++t) {
            const int j = new_index[static_cast<std::size_t>(w.neighbors[i][t])];
            if (j < 0) continue;
            out.neighbors[ni].push_back(j);
            out.weights[ni].push_back(w.weights[i][t]);
        }
    }
    // Dropping edges invalidates row standardization; restore it.
    if (out.standardization == WeightsMode::row) out = standardize(out, WeightsMode::row);
    return out;
}

IslandDropResult drop_islands(const SpatialWeights& w, std::span<const double> values) {
    if (values.size() != w.size())
        throw data_error("drop_islands: values length " + std::to_string(values.size()) +
                         " does not match " + std::to_string(w.size()) + " regions");

    IslandDropResult result;
    result.weights = w;
    std::map<std::string, double> value_of;
    for (std::size_t i = 0; i < w.size(); ++i) value_of[w.ids[i]] = values[i];

    while (true) {
        const auto islands = result.weights.islands();
        if (islands.empty()) break;
        for (const auto& id : islands) result.removed.push_back(id);
        if (islands.size() == result.weights.size())
            throw data_error("drop_islands: all regions are islands");
        std::vector<std::string> keep;
        std::set<std::string> island_set(islands.begin(), islands.end());
        for (const auto& id : result.weights.ids) {
            if (!island_set.count(id)) keep.push_back(id);
        }
        result.weights = subset(result.weights, keep);
    }

    result.values.reserve(result.weights.size());
    for (const auto& id : result.weights.ids) result.values.push_back(value_of.at(id));
    return result;
}

MoranInference inference_from_name(const std::string& name) {
    if (name == "normality") return MoranInference::normality;
    if (name == "randomization") return MoranInference::randomization;
    if (name == "permutation") return MoranInference::permutation;
    throw data_error("unknown inference mode '" + name + "'");
}

std::string to_string(MoranInference inference) {
    switch (inference) {
        case MoranInference::normality: return "normality";
        case MoranInference::randomization: return "randomization";
        case MoranInference::permutation: return "permutation";
    }
    return "?";
}

double moran_statistic(std::span<const double> values, const SpatialWeights& w) {
    if (values.size() != w.size())
        throw data_error("moran: values length does not match weights");
    if (values.size() < 2) throw numeric_error("moran: need at least 2 regions");
    const double s0 = w.total_weight();
    if (s0 <= 0.0) throw numeric_error("moran: weights have no edges");
    return statistic_from_deviations(deviations(values), w, s0);
}

MoranResult global_moran(std::span<const double> values, const SpatialWeights& w,
                         MoranInference inference, int permutations, std::uint64_t seed) {
    const std::size_t n = values.size();
    if (n != w.size()) throw data_error("moran: values length does not match weights");
    if (n < 3) throw numeric_error("moran inference requires n >= 3");
    const double s0 = w.total_weight();
    if (s0 <= 0.0) throw numeric_error("moran: weights have no edges");

    const std::vector<double> z = deviations(values);
    MoranResult res;
    res.inference = inference;
    res.I = statistic_from_deviations(z, w, s0);
    res.expected_I = -1.0 / static_cast<double>(n - 1);

    if (inference == MoranInference::permutation) {
        if (permutations < 1) throw numeric_error("permutations must be >= 1");
        res.permutations = permutations;
        std::vector<double> shuffled = z;
        std::mt19937_64 eng(derive_seed(seed, 0x676d6f72616eULL));
        double sum = 0.0, sum_sq = 0.0;
        long count_high = 0, count_low = 0;
        for (int r = 0; r < permutations; ++r) {
            for (std::size_t t = n - 1; t > 0; --t) {
                const auto j = bounded_uint(eng, static_cast<std::uint64_t>(t + 1));
                std::swap(shuffled[t], shuffled[static_cast<std::size_t>(j)]);
            }
            const double sim = statistic_from_deviations(shuffled, w, s0);
            sum += sim;
            sum_sq += sim * sim;
            if (sim >= res.I) ++count_high;
            if (sim <= res.I) ++count_low;
        }
        // The exact permutation-null mean of I is -1/(n-1); the sampled
        // spread estimates the null variance.
        const double mean = sum / permutations;
        res.variance = std::max(sum_sq / permutations - mean * mean, 0.0);
        res.z_score = res.variance > 0.0
                          ? (res.I - res.expected_I) / std::sqrt(res.variance)
                          : std::numeric_limits<double>::quiet_NaN();
        const double tail = static_cast<double>(std::min(count_high, count_low) + 1) /
                            static_cast<double>(permutations + 1);
        res.p_value = std::min(1.0, 2.0 * tail);
        return res;
    }

    // Analytic variances (Cliff & Ord): S1, S2 over the full weight set.
    const double nd = static_cast<double>(n);
    std::vector<double> row_sum(n, 0.0), col_sum(n, 0.0);
    double s1 = 0.0;
    // Symmetric-structure graph: w_ij and w_ji are stored on both rows.
    std::vector<std::unordered_map<int, double>> lookup(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < w.neighbors[i].size(); ++t)
            lookup[i][w.neighbors[i][t]] = w.weights[i][t];
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < w.neighbors[i].size(); ++t) {
            const int j = w.neighbors[i][t];
            const double wij = w.weights[i][t];
            row_sum[i] += wij;
            col_sum[static_cast<std::size_t>(j)] += wij;
            const auto it = lookup[static_cast<std::size_t>(j)].find(static_cast<int>(i));
            const double wji = it == lookup[static_cast<std::size_t>(j)].end() ? 0.0 : it->second;
            s1 += 0.5 * (wij + wji) * (wij + wji);
        }
    }
    double s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s2 += (row_sum[i] + col_sum[i]) * (row_sum[i] + col_sum[i]);

    const double e_i = res.expected_I;
    double variance;
    if (inference == MoranInference::normality) {
        variance = (nd * nd * s1 - nd * s2 + 3.0 * s0 * s0) / (s0 * s0 * (nd * nd - 1.0)) -
                   e_i * e_i;
    } else {
        double z_sq = 0.0, z_fourth = 0.0;
        for (double v : z) {
            z_sq += v * v;
            z_fourth += v * v * v * v;
        }
        const double b2 = nd * z_fourth / (z_sq * z_sq);
        const double num = nd * ((nd * nd - 3.0 * nd + 3.0) * s1 - nd * s2 + 3.0 * s0 * s0) -
                           b2 * ((nd * nd - nd) * s1 - 2.0 * nd * s2 + 6.0 * s0 * s0);
        variance = num / ((nd - 1.0) * (nd - 2.0) * (nd - 3.0) * s0 * s0) - e_i * e_i;
    }
    if (!(variance > 0.0))
        throw numeric_error("moran: null variance is not positive (degenerate weights)");
    res.variance = variance;
    res.z_score = (res.I - e_i) / std::sqrt(variance);
    res.p_value = 2.0 * (1.0 - normal_cdf(std::abs(res.z_score)));
    return res;
}

std::string to_string(Quadrant q) {
    switch (q) {
        case Quadrant::HH: return "HH";
        case Quadrant::LL: return "LL";
        case Quadrant::LH: return "LH";
        case Quadrant::HL: return "HL";
    }
    return "?";
}

LisaResult local_moran(std::span<const double> values, const SpatialWeights& w, int permutations,
                       std::uint64_t seed, double alpha) {
    const std::size_t n = values.size();
    if (n != w.size()) throw data_error("lisa: values length does not match weights");
    if (n < 3) throw numeric_error("lisa requires n >= 3");
    if (permutations < 1) throw numeric_error("permutations must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw numeric_error("alpha must be in (0,1)");

    const std::vector<double> z = deviations(values);
    double z_sq = 0.0;
    for (double v : z) z_sq += v * v;
    if (z_sq == 0.0) throw numeric_error("constant field: local Moran's I undefined");
    const double m2 = z_sq / static_cast<double>(n);

    LisaResult res;
    res.alpha = alpha;
    res.permutations = permutations;
    res.seed = seed;
    res.local_i.resize(n);
    res.pseudo_p.resize(n);
    res.quadrant.resize(n);
    res.significant.assign(n, 0);
    res.boundary.assign(n, 0);

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t degree = w.neighbors[i].size();
        double lag = 0.0;
        for (std::size_t t = 0; t < degree; ++t)
            lag += w.weights[i][t] * z[static_cast<std::size_t>(w.neighbors[i][t])];
        const double observed = z[i] / m2 * lag;
        res.local_i[i] = observed;

        // Quadrant from the signs of (z_i, lag). A zero lag counts as the
        // low side; z_i == 0 is a boundary case, classified but never
        // significant.
        if (z[i] > 0.0) {
            res.quadrant[i] = lag > 0.0 ? Quadrant::HH : Quadrant::HL;
        } else if (z[i] < 0.0) {
            res.quadrant[i] = lag > 0.0 ? Quadrant::LH : Quadrant::LL;
        } else {
            res.quadrant[i] = lag > 0.0 ? Quadrant::LH : Quadrant::LL;
            res.boundary[i] = 1;
        }

        if (degree == 0) {
            res.pseudo_p[i] = 1.0;
            continue;
        }

        // Conditional permutation: hold z_i fixed, draw `degree` of the
        // remaining values into i's neighbor slots.
        std::vector<double> others;
        others.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) others.push_back(z[j]);
        }
        std::mt19937_64 eng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        long count_extreme = 0;
        const double obs_abs = std::abs(observed);
        std::vector<std::pair<std::size_t, std::size_t>> swaps(degree);
        for (int r = 0; r < permutations; ++r) {
            for (std::size_t t = 0; t < degree; ++t) {
                const std::size_t j =
                    t + static_cast<std::size_t>(
                            bounded_uint(eng, static_cast<std::uint64_t>(others.size() - t)));
                std::swap(others[t], others[j]);
                swaps[t] = {t, j};
            }
            double sim_lag = 0.0;
            for (std::size_t t = 0; t < degree; ++t) sim_lag += w.weights[i][t] * others[t];
            const double sim = z[i] / m2 * sim_lag;
            if (std::abs(sim) >= obs_abs) ++count_extreme;
            for (std::size_t t = degree; t-- > 0;) std::swap(others[swaps[t].first], others[swaps[t].second]);
        }
        res.pseudo_p[i] = static_cast<double>(count_extreme + 1) /
                          static_cast<double>(permutations + 1);
        if (!res.boundary[i] && res.pseudo_p[i] <= alpha) res.significant[i] = 1;
    }
    return res;
}

void write_adjacency(std::ostream& out, const SpatialWeights& w) {
    out << w.size() << '\n';
    for (std::size_t i = 0; i < w.size(); ++i) {
        out << w.ids[i] << ' ' << w.neighbors[i].size() << '\n';
        for (std::size_t t = 0; t < w.neighbors[i].size(); ++t) {
            if (t) out << ' ';
            out << w.ids[static_cast<std::size_t>(w.neighbors[i][t])];
        }
        out << '\n';
    }
}

SpatialWeights read_adjacency(std::istream& in) {
    std::string line;
    if (!read_line(in, line)) throw data_error("adjacency file is empty");
    const long n = parse_long(line, "region count");
    if (n < 0) throw data_error("negative region count in adjacency file");

    SpatialWeights w;
    std::vector<std::vector<std::string>> neighbor_names(static_cast<std::size_t>(n));
    std::map<std::string, int> index_of;
    for (long i = 0; i < n; ++i) {
        if (!read_line(in, line)) throw data_error("adjacency file truncated (header line)");
        std::istringstream head(line);
        std::string id;
        long degree = 0;
        if (!(head >> id >> degree)) throw data_error("bad adjacency header line: '" + line + "'");
        if (!read_line(in, line)) throw data_error("adjacency file truncated (neighbor line)");
        std::istringstream body(line);
        std::vector<std::string> names;
        std::string tok;
        while (body >> tok) names.push_back(tok);
        if (static_cast<long>(names.size()) != degree)
            throw data_error("region " + id + ": declared degree " + std::to_string(degree) +
                             " but listed " + std::to_string(names.size()) + " neighbors");
        if (index_of.count(id)) throw data_error("duplicate region id in adjacency file: " + id);
        index_of[id] = static_cast<int>(i);
        w.ids.push_back(id);
        neighbor_names[static_cast<std::size_t>(i)] = std::move(names);
    }

    w.neighbors.resize(static_cast<std::size_t>(n));
    w.weights.resize(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
        for (const auto& name : neighbor_names[i]) {
            const auto it = index_of.find(name);
            if (it == index_of.end())
                throw data_error("region " + w.ids[i] + " lists unknown neighbor " + name);
            w.neighbors[i].push_back(it->second);
        }
        std::sort(w.neighbors[i].begin(), w.neighbors[i].end());
        w.weights[i].assign(w.neighbors[i].size(), 1.0);
    }
    w.standardization = WeightsMode::binary;
    return w;
}

}  // namespace dtspp
