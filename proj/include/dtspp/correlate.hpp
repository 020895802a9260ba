#ifndef DTSPP_CORRELATE_HPP
#define DTSPP_CORRELATE_HPP

#include <Eigen/Dense>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "dtspp/common.hpp"

namespace dtspp {

struct PearsonResult {
    double r = 0.0;
    double p_value = 0.0;  // two-sided, t distribution with n-2 df
    int n_used = 0;
};

/// Pearson correlation with pairwise deletion: a pair is dropped when either
/// entry is NaN. Requires >= 3 usable pairs and non-constant inputs.
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

/// Per-region named covariates; NaN marks a missing cell.
struct CovariateTable {
    std::vector<std::string> region_ids;
    std::vector<std::string> names;
    Eigen::MatrixXd values;  // rows align with region_ids, cols with names
};

/// CSV keyed by region_id in the first column; remaining columns are
/// covariates, empty or NA cells are missing.
CovariateTable read_covariates(std::istream& in);

struct CorrelationResult {
    std::string covariate;
    int component = 0;  // 1-based
    double r = 0.0;
    double p_value = 0.0;
    int n_used = 0;
};

/// Correlate every loading column against every covariate, aligning rows by
/// region id with pairwise deletion. Results are grouped by component and
/// sorted by |r| descending within each. Covariates with fewer than 3 usable
/// pairs (or constant values) are skipped with a warning.
std::vector<CorrelationResult> correlate_all(const Eigen::MatrixXd& loadings,
                                             std::span<const std::string> region_index,
                                             const CovariateTable& covariates,
                                             Warnings* warnings = nullptr);

}  // namespace dtspp

#endif
