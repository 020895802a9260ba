#ifndef DTSPP_INGEST_HPP
#define DTSPP_INGEST_HPP

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dtspp/common.hpp"
#include "dtspp/dates.hpp"

namespace dtspp {

/// One raw observation: daily non-home dwell minutes for one subregion
/// (census-block-group-like unit). region_id is the county-like code the
/// subregion rolls up to.
struct DailyRecord {
    Date date;
    std::string subregion_id;
    std::string region_id;
    double value = 0.0;  // minutes, >= 0
};

/// Column mapping and validation rules for a delimited panel file.
struct PanelSchema {
    char delimiter = ',';
    std::string date_column = "date";
    std::string subregion_column = "subregion";
    std::string value_column = "value";
    std::string date_format = "%Y-%m-%d";
    /// Region id defaults to the leading prefix of the subregion id
    /// (FIPS convention: county = first 5 characters of a CBG code).
    std::size_t region_prefix = 5;
    /// When set, take the region id from this column instead of the prefix.
    std::string region_column;
    /// Accepted years; rows outside are skipped (counted, not errors).
    /// Empty means accept all years.
    std::vector<int> study_years;
};

struct RowError {
    std::size_t line_no = 0;
    std::string message;
};

struct ParseReport {
    std::size_t rows_parsed = 0;
    std::size_t rows_skipped_year = 0;
    std::vector<RowError> row_errors;
};

/// One region-year of daily values. `values[i]` is day-of-year i+1; slots
/// where no subregion reported are masked and carry NaN, never zero.
struct RegionSeries {
    std::string region_id;
    int year = 0;
    std::vector<double> values;
    std::vector<char> present;  // per-day flag, 1 = observed

    std::size_t days() const { return values.size(); }
};

struct CoverageStats {
    std::size_t record_count = 0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double stddev = 0.0;  // population
};

struct CoverageReport {
    std::map<std::string, CoverageStats> per_region;
    std::map<std::string, std::string> dropped;  // region -> reason
    std::size_t regions_seen() const { return per_region.size(); }
    std::size_t regions_kept() const { return per_region.size() - dropped.size(); }
    void mark_dropped(const std::string& region, const std::string& reason) {
        dropped[region] = reason;
    }
};

/// Parse a delimited panel with a header row. Well-formed rows become
/// records; malformed rows are collected in the report with their line
/// numbers. Throws data_error when a mapped column is missing.
std::vector<DailyRecord> parse_panel(std::istream& source, const PanelSchema& schema,
                                     ParseReport& report);

/// Per-(region, year, day) arithmetic mean over the subregions reporting
/// that day. Days with no reporting subregion stay masked.
std::map<std::string, std::map<int, RegionSeries>> aggregate_to_region(
    std::span<const DailyRecord> records);

/// Remove Feb 29 from a leap-year series so day-of-year indices align with
/// a 365-day year. Non-leap input is returned unchanged with a warning.
RegionSeries normalize_leap_year(const RegionSeries& series, Warnings* warnings = nullptr);

/// Fill masked gaps of at most `max_gap` consecutive days by linear
/// interpolation between the flanking present values (nearest-value
/// extension at the series boundary). Returns a drop reason when a gap is
/// too long to repair, leaving the series untouched.
std::optional<std::string> repair_gaps(RegionSeries& series, int max_gap = 3);

/// Descriptive statistics of the contributing daily observations per region.
CoverageReport coverage_report(std::span<const DailyRecord> records);

/// Series bundle persistence: a CSV matrix (region_id, year, then one value
/// per day with NA for masked) plus an index CSV (region_id, year, byte
/// offset of the row in the matrix file).
void write_series_bundle(std::span<const RegionSeries> series, std::ostream& matrix,
                         std::ostream& index);
std::vector<RegionSeries> read_series_bundle(std::istream& matrix);

}  // namespace dtspp

#endif
