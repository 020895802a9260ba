#ifndef DTSPP_SPATIAL_HPP
#define DTSPP_SPATIAL_HPP

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dtspp/common.hpp"

namespace dtspp {

using Vertex = std::array<double, 2>;  // lon, lat
using Ring = std::vector<Vertex>;      // closed: first == last, >= 4 vertices

struct Polygon {
    Ring outer;
    std::vector<Ring> holes;
};

struct RegionGeometry {
    std::string region_id;
    std::vector<Polygon> polygons;
};

enum class WeightsMode { binary, row };

/// Sparse symmetric-structure neighbor graph. neighbors[i] is sorted;
/// weights[i][t] pairs with neighbors[i][t].
struct SpatialWeights {
    std::vector<std::string> ids;
    std::vector<std::vector<int>> neighbors;
    std::vector<std::vector<double>> weights;
    WeightsMode standardization = WeightsMode::binary;

    std::size_t size() const { return ids.size(); }
    std::vector<std::string> islands() const;
    double total_weight() const;  // S0
};

struct QueenOptions {
    /// Vertices are snapped to this grid (degrees) before comparison.
    double snap = 1e-7;
};

/// Queen contiguity: regions are neighbors iff any of their ring vertices
/// coincide after snapping. Weights are binary 1; islands are kept and
/// reported via islands().
SpatialWeights queen_weights(std::span<const RegionGeometry> geometries,
                             QueenOptions options = {});

/// binary: every edge weight 1. row: each row divided by its sum
/// (islands untouched).
SpatialWeights standardize(const SpatialWeights& w, WeightsMode mode);

/// Keep only the listed regions (order follows the input weights).
SpatialWeights subset(const SpatialWeights& w, std::span<const std::string> keep_ids);

struct IslandDropResult {
    SpatialWeights weights;
    std::vector<double> values;
    std::vector<std::string> removed;
};

/// Remove zero-neighbor regions and their value entries, re-checking until
/// no islands remain.
IslandDropResult drop_islands(const SpatialWeights& w, std::span<const double> values);

enum class MoranInference { normality, randomization, permutation };

MoranInference inference_from_name(const std::string& name);
std::string to_string(MoranInference inference);

struct MoranResult {
    double I = 0.0;
    double expected_I = 0.0;  // -1/(n-1)
    double variance = 0.0;
    double z_score = 0.0;
    double p_value = 0.0;  // two-sided
    MoranInference inference = MoranInference::randomization;
    int permutations = 0;  // 0 when analytic
};

/// The bare Moran statistic, defined for n >= 2 (no inference attached).
double moran_statistic(std::span<const double> values, const SpatialWeights& w);

/// Global Moran's I with significance under the chosen null. Requires
/// n >= 3 and a non-constant field.
MoranResult global_moran(std::span<const double> values, const SpatialWeights& w,
                         MoranInference inference = MoranInference::randomization,
                         int permutations = 999, std::uint64_t seed = 0);

enum class Quadrant { HH, LL, LH, HL };

std::string to_string(Quadrant q);

/// Anselin's local Moran's I with conditional-permutation pseudo p-values.
struct LisaResult {
    std::vector<double> local_i;
    std::vector<double> pseudo_p;  // in (0, 1]
    std::vector<Quadrant> quadrant;
    std::vector<char> significant;
    std::vector<char> boundary;  // z_i == 0: quadrant by lag sign, never significant
    double alpha = 0.05;
    int permutations = 999;
    std::uint64_t seed = 0;
};

LisaResult local_moran(std::span<const double> values, const SpatialWeights& w,
                       int permutations = 999, std::uint64_t seed = 0, double alpha = 0.05);

/// Plain-text adjacency interchange: first line n, then per region a line
/// "id degree" followed by a line of neighbor ids (blank when degree 0).
void write_adjacency(std::ostream& out, const SpatialWeights& w);
SpatialWeights read_adjacency(std::istream& in);

}  // namespace dtspp

#endif
