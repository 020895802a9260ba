#ifndef DTSPP_DECOMPOSE_HPP
#define DTSPP_DECOMPOSE_HPP

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dtspp/common.hpp"
#include "dtspp/mobility.hpp"

namespace dtspp {

/// Day-by-region matrix of year-over-year TSPP differences. Rows are days
/// (359 under the default window), columns are regions in sorted-id order.
struct DeltaMatrix {
    Eigen::MatrixXd values;               // m x n
    std::vector<int> day_index;           // length m, day-of-year labels
    std::vector<std::string> region_index;  // length n

    Eigen::Index days() const { return values.rows(); }
    Eigen::Index regions() const { return values.cols(); }
};

/// Truncated factors of the (column-centered) delta matrix.
/// components = U_K * Sigma_K carries physical units (minutes per day);
/// loadings rows are the unitless right-factor rows of V_K, one per region.
/// Each component is oriented so its loading column sums to a non-negative
/// value, making outputs deterministic across runs and platforms.
struct Decomposition {
    Eigen::MatrixXd components;             // m x K
    Eigen::VectorXd singular_values;        // K, non-increasing
    Eigen::MatrixXd loadings;               // n x K
    Eigen::VectorXd explained_variance_ratio;  // K, fractions of total
    double total_explained = 0.0;
    int K = 0;
    bool centered = true;
    Eigen::VectorXd column_means;           // n, zero when centered == false
};

struct SvdOptions {
    /// Mean-center each region's series across days before factoring.
    bool center = true;
};

/// Column j holds region_index[j]'s delta series; regions sorted by id.
/// Duplicate region ids are an error.
DeltaMatrix assemble_matrix(std::span<const DeltaSeries> deltas);

/// Rank-K truncated SVD of the (optionally centered) matrix.
Decomposition truncated_svd(const DeltaMatrix& matrix, int K, SvdOptions options = {});

/// Cumulative explained-variance fractions for K = 1..K_max.
std::vector<std::pair<int, double>> explained_variance_curve(const DeltaMatrix& matrix, int K_max,
                                                             SvdOptions options = {});

struct OutlierResult {
    DeltaMatrix filtered;
    std::vector<std::string> removed;
};

/// Single-pass outlier screen: fit a K=3 decomposition, standardize each
/// loading column, and drop every region whose standardized loading reaches
/// `threshold` in absolute value on any component. The caller refits on the
/// filtered matrix.
OutlierResult remove_outliers(const DeltaMatrix& matrix, double threshold = 4.0);

/// Per-region coefficient of determination of the rank-K reconstruction
/// against the region's own series. Negative means the region's mean is the
/// better predictor; a zero-variance series is flagged as NaN.
std::map<std::string, double> region_r_squared(const DeltaMatrix& matrix,
                                               const Decomposition& decomposition);

/// Min-max normalization of each loading column to [0,1]. A constant column
/// maps to 0.5 everywhere (warned).
Eigen::MatrixXd normalize_loadings(const Decomposition& decomposition,
                                   Warnings* warnings = nullptr);

/// Map a length-3 normalized loading vector to an RGB byte triple,
/// half-up rounding. Inputs must lie in [0,1].
std::array<std::uint8_t, 3> rgb_encode(const std::array<double, 3>& normalized);

std::string rgb_to_hex(const std::array<std::uint8_t, 3>& rgb);

}  // namespace dtspp

#endif
