#include "dtspp/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace dtspp {

namespace {

Eigen::MatrixXd centered_values(const DeltaMatrix& matrix, bool center,
                                Eigen::VectorXd& column_means) {
    column_means = Eigen::VectorXd::Zero(matrix.regions());
    if (!center) return matrix.values;
    column_means = matrix.values.colwise().mean();
    return matrix.values.rowwise() - column_means.transpose();
}

void check_finite(const DeltaMatrix& matrix) {
    if (!matrix.values.allFinite())
        throw numeric_error("delta matrix contains non-finite entries");
}

/// Orientation rule: flip each component so its loading column sums to a
/// non-negative value; on a zero sum, make the first nonzero loading positive.
void orient_components(Eigen::MatrixXd& components, Eigen::MatrixXd& loadings) {
    for (Eigen::Index k = 0; k < loadings.cols(); ++k) {
        double sum = loadings.col(k).sum();
        double pivot = sum;
        if (pivot == 0.0) {
            for (Eigen::Index i = 0; i < loadings.rows(); ++i) {
                if (loadings(i, k) != 0.0) {
                    pivot = loadings(i, k);
                    break;
                }
            }
        }
        if (pivot < 0.0) {
            loadings.col(k) = -loadings.col(k);
            components.col(k) = -components.col(k);
        }
    }
}

}  // namespace

DeltaMatrix assemble_matrix(std::span<const DeltaSeries> deltas) {
    if (deltas.empty()) throw data_error("assemble_matrix: no delta series");
    const std::size_t m = deltas.front().values.size();

    std::vector<std::size_t> order(deltas.size());
    for (std::size_t i = 0; i < deltas.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return deltas[a].region_id < deltas[b].region_id;
    });
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (deltas[order[i - 1]].region_id == deltas[order[i]].region_id)
            throw data_error("assemble_matrix: duplicate region id " + deltas[order[i]].region_id);
    }

    DeltaMatrix out;
    out.values.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(deltas.size()));
    out.region_index.reserve(deltas.size());
    for (std::size_t j = 0; j < order.size(); ++j) {
        const auto& d = deltas[order[j]];
        if (d.values.size() != m)
            throw data_error("assemble_matrix: region " + d.region_id + " has length " +
                             std::to_string(d.values.size()) + ", expected " + std::to_string(m));
        for (std::size_t i = 0; i < m; ++i)
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d.values[i];
        out.region_index.push_back(d.region_id);
    }
    out.day_index.resize(m);
    for (std::size_t i = 0; i < m; ++i) out.day_index[i] = static_cast<int>(i) + 4;
    return out;
}

Decomposition truncated_svd(const DeltaMatrix& matrix, int K, SvdOptions options) {
    check_finite(matrix);
    const Eigen::Index m = matrix.days();
    const Eigen::Index n = matrix.regions();
    const Eigen::Index max_rank = std::min(m, n);
    if (K < 1 || K > max_rank)
        throw numeric_error("K=" + std::to_string(K) + " out of range [1, " +
                            std::to_string(max_rank) + "]");

    Decomposition dec;
    dec.K = K;
    dec.centered = options.center;
    const Eigen::MatrixXd centered = centered_values(matrix, options.center, dec.column_means);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& all_sv = svd.singularValues();

    const double total_sq = all_sv.squaredNorm();
    if (total_sq <= 0.0)
        throw numeric_error("matrix has zero variance after centering; nothing to explain");

    dec.singular_values = all_sv.head(K);
    dec.components = svd.matrixU().leftCols(K) * dec.singular_values.asDiagonal();
    dec.loadings = svd.matrixV().leftCols(K);
    orient_components(dec.components, dec.loadings);

    dec.explained_variance_ratio.resize(K);
    for (int k = 0; k < K; ++k)
        dec.explained_variance_ratio(k) = all_sv(k) * all_sv(k) / total_sq;
    dec.total_explained = dec.explained_variance_ratio.sum();
    return dec;
}

std::vector<std::pair<int, double>> explained_variance_curve(const DeltaMatrix& matrix, int K_max,
                                                             SvdOptions options) {
    check_finite(matrix);
    const Eigen::Index max_rank = std::min(matrix.days(), matrix.regions());
    if (K_max < 1 || K_max > max_rank)
        throw numeric_error("K_max=" + std::to_string(K_max) + " out of range [1, " +
                            std::to_string(max_rank) + "]");

    Eigen::VectorXd means;
    const Eigen::MatrixXd centered = centered_values(matrix, options.center, means);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double total_sq = sv.squaredNorm();
    if (total_sq <= 0.0)
        throw numeric_error("matrix has zero variance after centering; nothing to explain");

    std::vector<std::pair<int, double>> curve;
    curve.reserve(static_cast<std::size_t>(K_max));
    double cumulative = 0.0;
    for (int k = 0; k < K_max; ++k) {
        cumulative += sv(k) * sv(k) / total_sq;
        curve.emplace_back(k + 1, cumulative);
    }
    return curve;
}

OutlierResult remove_outliers(const DeltaMatrix& matrix, double threshold) {
    if (!(threshold > 0.0)) throw numeric_error("outlier threshold must be positive");
    const int K = static_cast<int>(std::min<Eigen::Index>(3, std::min(matrix.days(), matrix.regions())));
    const Decomposition dec = truncated_svd(matrix, K);

    const Eigen::Index n = matrix.regions();
    Eigen::MatrixXd z = dec.loadings;
    for (Eigen::Index k = 0; k < z.cols(); ++k) {
        const double mean = z.col(k).mean();
        const double var = (z.col(k).array() - mean).square().sum() / static_cast<double>(n);
        const double sd = std::sqrt(var);
        if (sd == 0.0) {
            z.col(k).setZero();  // zero-variance column: all z-scores zero
        } else {
            z.col(k) = (z.col(k).array() - mean) / sd;
        }
    }

    std::vector<bool> keep(static_cast<std::size_t>(n), true);
    OutlierResult result;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (std::isinf(threshold)) break;
        for (Eigen::Index k = 0; k < z.cols(); ++k) {
            if (std::abs(z(j, k)) >= threshold) {
                keep[static_cast<std::size_t>(j)] = false;
                result.removed.push_back(matrix.region_index[static_cast<std::size_t>(j)]);
                break;
            }
        }
    }

    const std::size_t kept = static_cast<std::size_t>(n) - result.removed.size();
    if (kept == 0) throw numeric_error("outlier removal would empty the matrix");

    result.filtered.values.resize(matrix.days(), static_cast<Eigen::Index>(kept));
    result.filtered.day_index = matrix.day_index;
    result.filtered.region_index.reserve(kept);
    Eigen::Index col = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (!keep[static_cast<std::size_t>(j)]) continue;
        result.filtered.values.col(col++) = matrix.values.col(j);
        result.filtered.region_index.push_back(matrix.region_index[static_cast<std::size_t>(j)]);
    }
    return result;
}

std::map<std::string, double> region_r_squared(const DeltaMatrix& matrix,
                                               const Decomposition& decomposition) {
    if (decomposition.loadings.rows() != matrix.regions())
        throw data_error("region_r_squared: decomposition does not match matrix shape");

    // Rank-K reconstruction in the original (uncentered) frame.
    const Eigen::MatrixXd recon = decomposition.components * decomposition.loadings.transpose();

    std::map<std::string, double> out;
    for (Eigen::Index j = 0; j < matrix.regions(); ++j) {
        const Eigen::VectorXd y = matrix.values.col(j);
        const double mean = y.mean();
        const Eigen::VectorXd y_hat =
            recon.col(j).array() + (decomposition.centered ? decomposition.column_means(j) : 0.0);
        const double ss_tot = (y.array() - mean).square().sum();
        const double ss_res = (y - y_hat).squaredNorm();
        double r2;
        if (ss_tot == 0.0) {
            r2 = std::numeric_limits<double>::quiet_NaN();  // flagged: zero-variance series
        } else {
            r2 = 1.0 - ss_res / ss_tot;
        }
        out.emplace(matrix.region_index[static_cast<std::size_t>(j)], r2);
    }
    return out;
}

Eigen::MatrixXd normalize_loadings(const Decomposition& decomposition, Warnings* warnings) {
    const Eigen::Index n = decomposition.loadings.rows();
    if (n < 2) throw numeric_error("normalize_loadings needs at least 2 regions");
    Eigen::MatrixXd out(n, decomposition.loadings.cols());
    for (Eigen::Index k = 0; k < decomposition.loadings.cols(); ++k) {
        const double lo = decomposition.loadings.col(k).minCoeff();
        const double hi = decomposition.loadings.col(k).maxCoeff();
        if (hi == lo) {
            warn(warnings, "normalize_loadings: component " + std::to_string(k + 1) +
                               " is constant across regions; mapped to 0.5");
            out.col(k).setConstant(0.5);
        } else {
            out.col(k) = (decomposition.loadings.col(k).array() - lo) / (hi - lo);
        }
    }
    return out;
}

std::array<std::uint8_t, 3> rgb_encode(const std::array<double, 3>& normalized) {
    std::array<std::uint8_t, 3> rgb{};
    for (std::size_t c = 0; c < 3; ++c) {
        const double v = normalized[c];
        if (!(v >= 0.0 && v <= 1.0))
            throw numeric_error("rgb_encode input " + std::to_string(v) + " outside [0,1]");
        rgb[c] = static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
    }
    return rgb;
}

std::string rgb_to_hex(const std::array<std::uint8_t, 3>& rgb) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02X%02X%02X", rgb[0], rgb[1], rgb[2]);
    return buf;
}

}  // namespace dtspp
