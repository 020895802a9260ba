#ifndef DTSPP_MOBILITY_HPP
#define DTSPP_MOBILITY_HPP

#include <span>
#include <string>
#include <vector>

#include "dtspp/ingest.hpp"

namespace dtspp {

/// 7-day centered rolling mean of a daily series. With the default radius
/// of 3, a 365-day year yields 359 values; values[k] covers calendar days
/// k+1..k+7 and is centered on day-of-year k+4.
struct TsppSeries {
    std::string region_id;
    int year = 0;
    std::vector<double> values;
    int start_day_of_year = 4;
};

/// Elementwise year-over-year difference of two TSPP series
/// (target minus reference) for one region.
struct DeltaSeries {
    std::string region_id;
    std::vector<double> values;
};

/// Rolling mean with window 2*radius+1. The series must be fully repaired
/// (no masked days); otherwise the offending gap is reported by region and
/// day span.
TsppSeries tspp(const RegionSeries& series, int radius = 3);

/// target[i] - reference[i]; both series must belong to the same region and
/// have equal length.
DeltaSeries delta_tspp(const TsppSeries& target, const TsppSeries& reference);

/// Unweighted elementwise mean across regions. Errors on an empty set.
DeltaSeries aggregate_delta(std::span<const DeltaSeries> deltas,
                            const std::string& label = "aggregate");

}  // namespace dtspp

#endif
