#ifndef DTSPP_ARTIFACTS_HPP
#define DTSPP_ARTIFACTS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dtspp/cluster.hpp"
#include "dtspp/correlate.hpp"
#include "dtspp/decompose.hpp"
#include "dtspp/mobility.hpp"
#include "dtspp/spatial.hpp"

namespace dtspp {

// Delta panel: one row per region, delta_0001..delta_NNNN columns.
void write_delta_csv(std::ostream& out, std::span<const DeltaSeries> deltas);
std::vector<DeltaSeries> read_delta_csv(std::istream& in);

// Smoothed series: region_id, year, start_day, then values.
void write_tspp_csv(std::ostream& out, std::span<const TsppSeries> series);
std::vector<TsppSeries> read_tspp_csv(std::istream& in);

void write_components_csv(std::ostream& out, const Decomposition& dec,
                          std::span<const int> day_index);

// Raw and min-max-normalized loadings side by side.
void write_loadings_csv(std::ostream& out, std::span<const std::string> region_index,
                        const Eigen::MatrixXd& raw, const Eigen::MatrixXd& normalized);
struct LoadingsTable {
    std::vector<std::string> region_ids;
    Eigen::MatrixXd raw;
    Eigen::MatrixXd normalized;
};
LoadingsTable read_loadings_csv(std::istream& in);

void write_r_squared_csv(std::ostream& out, const std::map<std::string, double>& r2);

void write_colors_csv(std::ostream& out, std::span<const std::string> region_index,
                      const Eigen::MatrixXd& normalized);

void write_variance_curve_csv(std::ostream& out,
                              std::span<const std::pair<int, double>> curve);

void write_clusters_csv(std::ostream& out, std::span<const std::string> region_index,
                        std::span<const int> labels);

void write_centroids_csv(std::ostream& out, const Eigen::MatrixXd& centroids);

void write_lisa_csv(std::ostream& out, std::span<const std::string> ids, const LisaResult& lisa);

std::string moran_to_json(const std::map<std::string, MoranResult>& results);

void write_correlations_csv(std::ostream& out, std::span<const CorrelationResult> results,
                            int n_components);

// FNV-1a 64-bit over file bytes; stable fingerprint for run manifests.
std::uint64_t fnv1a64_file(const std::string& path);

/// Run manifest: command, parameters, seed, input/output hashes, version.
/// Deterministic content for identical runs (no timestamps).
struct Manifest {
    std::string command;
    std::map<std::string, std::string> parameters;
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
};
void write_manifest(const std::string& path, const Manifest& manifest);

}  // namespace dtspp

#endif
