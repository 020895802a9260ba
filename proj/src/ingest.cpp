#include "dtspp/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include "dtspp/csv.hpp"

namespace dtspp {

namespace {

constexpr double kMasked = std::numeric_limits<double>::quiet_NaN();

// Feb 29 is day-of-year 60 in a leap year.
constexpr int kLeapDayOfYear = 60;

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw data_error("panel header has no column '" + name + "'");
}

}  // namespace

std::vector<DailyRecord> parse_panel(std::istream& source, const PanelSchema& schema,
                                     ParseReport& report) {
    std::string line;
    if (!read_line(source, line)) throw data_error("panel is empty (no header row)");

    const auto header = split_fields(line, schema.delimiter);
    const std::size_t date_col = find_column(header, schema.date_column);
    const std::size_t sub_col = find_column(header, schema.subregion_column);
    const std::size_t val_col = find_column(header, schema.value_column);
    const std::size_t region_col =
        schema.region_column.empty() ? std::size_t(-1) : find_column(header, schema.region_column);

    std::vector<DailyRecord> records;
    std::size_t line_no = 1;
    while (read_line(source, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_fields(line, schema.delimiter);
        if (fields.size() != header.size()) {
            report.row_errors.push_back({line_no, "expected " + std::to_string(header.size()) +
                                                      " fields, got " + std::to_string(fields.size())});
            continue;
        }

        DailyRecord rec;
        try {
            rec.date = parse_date(fields[date_col], schema.date_format);
        } catch (const data_error& e) {
            report.row_errors.push_back({line_no, e.what()});
            continue;
        }

        rec.subregion_id = fields[sub_col];
        if (region_col != std::size_t(-1)) {
            rec.region_id = fields[region_col];
        } else {
            rec.region_id = rec.subregion_id.substr(0, schema.region_prefix);
        }
        if (rec.region_id.empty()) {
            report.row_errors.push_back({line_no, "empty region id"});
            continue;
        }

        const auto value = parse_double(fields[val_col]);
        if (!value) {
            report.row_errors.push_back({line_no, "unparseable value '" + fields[val_col] + "'"});
            continue;
        }
        if (*value < 0.0) {
            report.row_errors.push_back({line_no, "negative value " + fields[val_col]});
            continue;
        }
        rec.value = *value;

        if (!schema.study_years.empty() &&
            std::find(schema.study_years.begin(), schema.study_years.end(), rec.date.year) ==
                schema.study_years.end()) {
            ++report.rows_skipped_year;
            continue;
        }

        ++report.rows_parsed;
        records.push_back(std::move(rec));
    }
    return records;
}

std::map<std::string, std::map<int, RegionSeries>> aggregate_to_region(
    std::span<const DailyRecord> records) {
    // Accumulate in an order independent of input row order, so results are
    // bitwise-stable under permutation and sharded merges.
    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = records[a];
        const auto& rb = records[b];
        return std::tie(ra.region_id, ra.date, ra.subregion_id, ra.value) <
               std::tie(rb.region_id, rb.date, rb.subregion_id, rb.value);
    });

    struct Slot {
        double sum = 0.0;
        std::size_t count = 0;
    };
    std::map<std::string, std::map<int, std::map<int, Slot>>> acc;
    for (const std::size_t i : order) {
        const auto& rec = records[i];
        auto& slot = acc[rec.region_id][rec.date.year][day_of_year(rec.date)];
        slot.sum += rec.value;
        slot.count += 1;
    }

    std::map<std::string, std::map<int, RegionSeries>> out;
    for (const auto& [region, years] : acc) {
        for (const auto& [year, days] : years) {
            RegionSeries series;
            series.region_id = region;
            series.year = year;
            const std::size_t n_days = is_leap_year(year) ? 366 : 365;
            series.values.assign(n_days, kMasked);
            series.present.assign(n_days, 0);
            for (const auto& [doy, slot] : days) {
                series.values[static_cast<std::size_t>(doy - 1)] =
                    slot.sum / static_cast<double>(slot.count);
                series.present[static_cast<std::size_t>(doy - 1)] = 1;
            }
            out[region].emplace(year, std::move(series));
        }
    }
    return out;
}

RegionSeries normalize_leap_year(const RegionSeries& series, Warnings* warnings) {
    if (!is_leap_year(series.year) || series.days() != 366) {
        if (!is_leap_year(series.year)) {
            warn(warnings, "normalize_leap_year: " + series.region_id + "/" +
                               std::to_string(series.year) + " is not a leap year; no-op");
        }
        return series;
    }
    RegionSeries out;
    out.region_id = series.region_id;
    out.year = series.year;
    out.values.reserve(365);
    out.present.reserve(365);
    for (std::size_t i = 0; i < 366; ++i) {
        if (i == kLeapDayOfYear - 1) continue;
        out.values.push_back(series.values[i]);
        out.present.push_back(series.present[i]);
    }
    return out;
}

std::optional<std::string> repair_gaps(RegionSeries& series, int max_gap) {
    const std::size_t n = series.days();
    std::vector<double> repaired = series.values;

    std::size_t i = 0;
    while (i < n) {
        if (series.present[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && !series.present[j]) ++j;
        const std::size_t gap_len = j - i;
        if (gap_len == n) return "no observed days";
        if (gap_len > static_cast<std::size_t>(max_gap)) {
            std::ostringstream msg;
            msg << "gap of " << gap_len << " days at days " << (i + 1) << "-" << j
                << " exceeds limit " << max_gap;
            return msg.str();
        }
        if (i == 0) {
            // Leading gap: extend the first observed value backwards.
            for (std::size_t k = i; k < j; ++k) repaired[k] = series.values[j];
        } else if (j == n) {
            // Trailing gap: extend the last observed value forwards.
            for (std::size_t k = i; k < j; ++k) repaired[k] = series.values[i - 1];
        } else {
            const double left = series.values[i - 1];
            const double right = series.values[j];
            const double span = static_cast<double>(j - (i - 1));
            for (std::size_t k = i; k < j; ++k) {
                const double frac = static_cast<double>(k - (i - 1)) / span;
                repaired[k] = left + (right - left) * frac;
            }
        }
        i = j;
    }

    series.values = std::move(repaired);
    std::fill(series.present.begin(), series.present.end(), 1);
    return std::nullopt;
}

CoverageReport coverage_report(std::span<const DailyRecord> records) {
    struct Acc {
        std::size_t count = 0;
        double sum = 0.0;
        double sum_sq = 0.0;
        double min = std::numeric_limits<double>::infinity();
        double max = -std::numeric_limits<double>::infinity();
    };
    std::map<std::string, Acc> acc;
    for (const auto& rec : records) {
        auto& a = acc[rec.region_id];
        a.count += 1;
        a.sum += rec.value;
        a.sum_sq += rec.value * rec.value;
        a.min = std::min(a.min, rec.value);
        a.max = std::max(a.max, rec.value);
    }

    CoverageReport report;
    for (const auto& [region, a] : acc) {
        CoverageStats stats;
        stats.record_count = a.count;
        stats.mean = a.sum / static_cast<double>(a.count);
        stats.min = a.min;
        stats.max = a.max;
        const double var = a.sum_sq / static_cast<double>(a.count) - stats.mean * stats.mean;
        stats.stddev = std::sqrt(std::max(var, 0.0));
        report.per_region.emplace(region, stats);
    }
    return report;
}

void write_series_bundle(std::span<const RegionSeries> series, std::ostream& matrix,
                         std::ostream& index) {
    std::ostringstream header;
    header << "region_id,year";
    const std::size_t n_days = series.empty() ? 365 : series.front().days();
    for (std::size_t d = 1; d <= n_days; ++d) header << ",d" << d;
    header << '\n';
    const std::string header_str = header.str();
    matrix << header_str;
    index << "region_id,year,offset\n";

    std::size_t offset = header_str.size();
    for (const auto& s : series) {
        std::ostringstream row;
        row << s.region_id << ',' << s.year;
        for (std::size_t d = 0; d < s.days(); ++d) {
            row << ',' << (s.present[d] ? format_double(s.values[d]) : "NA");
        }
        row << '\n';
        const std::string row_str = row.str();
        matrix << row_str;
        index << s.region_id << ',' << s.year << ',' << offset << '\n';
        offset += row_str.size();
    }
}

std::vector<RegionSeries> read_series_bundle(std::istream& matrix) {
    std::string line;
    if (!read_line(matrix, line)) throw data_error("series bundle is empty");
    std::vector<RegionSeries> out;
    std::size_t line_no = 1;
    while (read_line(matrix, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() < 3)
            throw data_error("series bundle line " + std::to_string(line_no) + " too short");
        RegionSeries s;
        s.region_id = fields[0];
        s.year = static_cast<int>(parse_long(fields[1], "year"));
        s.values.reserve(fields.size() - 2);
        s.present.reserve(fields.size() - 2);
        for (std::size_t i = 2; i < fields.size(); ++i) {
            const auto v = parse_double(fields[i]);
            s.values.push_back(v ? *v : kMasked);
            s.present.push_back(v ? 1 : 0);
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace dtspp
