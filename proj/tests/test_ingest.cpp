#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include "dtspp/csv.hpp"
#include "dtspp/ingest.hpp"
#include "dtspp/rng.hpp"

using namespace dtspp;

namespace {

std::vector<DailyRecord> parse_string(const std::string& text, const PanelSchema& schema,
                                      ParseReport& report) {
    std::istringstream in(text);
    return parse_panel(in, schema, report);
}

RegionSeries make_series(const std::string& region, int year, std::vector<double> values) {
    RegionSeries s;
    s.region_id = region;
    s.year = year;
    s.present.assign(values.size(), 1);
    s.values = std::move(values);
    return s;
}

}  // namespace

TEST_CASE("parse_panel maps fields and derives the region prefix") {
    ParseReport report;
    const auto records =
        parse_string("date,subregion,value\n2020-03-15,510594801011,73.0\n", {}, report);
    REQUIRE(records.size() == 1);
    CHECK(records[0].date == Date{2020, 3, 15});
    CHECK(records[0].subregion_id == "510594801011");
    CHECK(records[0].region_id == "51059");
    CHECK(records[0].value == 73.0);
    CHECK(report.rows_parsed == 1);
    CHECK(report.row_errors.empty());
}

TEST_CASE("parse_panel on an empty file with a valid header yields nothing") {
    ParseReport report;
    const auto records = parse_string("date,subregion,value\n", {}, report);
    CHECK(records.empty());
    CHECK(report.rows_parsed == 0);
}

TEST_CASE("parse_panel counts malformed rows with line numbers") {
    std::string text = "date,subregion,value\n";
    for (int d = 1; d <= 4; ++d)
        text += "2020-01-0" + std::to_string(d) + ",510590001001,50\n";
    text += "2020-13-40,510590001001,50\n";  // line 6: bad date
    for (int d = 5; d <= 8; ++d)
        text += "2020-01-0" + std::to_string(d) + ",510590001001,50\n";
    text += "not-a-date,510590001001,50\n";  // line 11: bad date

    ParseReport report;
    const auto records = parse_string(text, {}, report);
    CHECK(records.size() == 8);
    REQUIRE(report.row_errors.size() == 2);
    CHECK(report.row_errors[0].line_no == 6);
    CHECK(report.row_errors[1].line_no == 11);
}

TEST_CASE("parse_panel rejects a missing mapped column") {
    ParseReport report;
    std::istringstream in("date,cbg,value\n2020-01-01,510590001001,50\n");
    CHECK_THROWS_AS(parse_panel(in, {}, report), data_error);
}

TEST_CASE("parse_panel flags negative values as row errors") {
    ParseReport report;
    const auto records =
        parse_string("date,subregion,value\n2020-01-01,510590001001,-5\n", {}, report);
    CHECK(records.empty());
    REQUIRE(report.row_errors.size() == 1);
    CHECK(report.row_errors[0].line_no == 2);
}

TEST_CASE("parse_panel respects study years and custom date formats") {
    PanelSchema schema;
    schema.study_years = {2020};
    schema.date_format = "%m/%d/%Y";
    ParseReport report;
    const auto records = parse_string(
        "date,subregion,value\n03/15/2020,510590001001,70\n03/15/2018,510590001001,70\n", schema,
        report);
    CHECK(records.size() == 1);
    CHECK(report.rows_skipped_year == 1);
}

TEST_CASE("aggregate_to_region means subregions per day") {
    std::vector<DailyRecord> records = {
        {Date{2020, 1, 5}, "510590001001", "51059", 60.0},
        {Date{2020, 1, 5}, "510590002001", "51059", 80.0},
    };
    const auto out = aggregate_to_region(records);
    const RegionSeries& s = out.at("51059").at(2020);
    CHECK(s.days() == 366);  // leap year
    CHECK(s.values[4] == 70.0);
    CHECK(s.present[4] == 1);
    CHECK(s.present[5] == 0);
    CHECK(std::isnan(s.values[5]));
}

TEST_CASE("aggregate_to_region passes a single subregion through") {
    std::vector<DailyRecord> records = {{Date{2019, 2, 1}, "510590001001", "51059", 42.5}};
    const auto out = aggregate_to_region(records);
    CHECK(out.at("51059").at(2019).values[31] == 42.5);
}

TEST_CASE("aggregate matches a brute-force recomputation and ignores row order") {
    // 3 subregions x 5 days with randomized values and some absences.
    std::mt19937_64 eng(42);
    std::vector<DailyRecord> records;
    double expect[5];
    for (int d = 0; d < 5; ++d) {
        double sum = 0;
        int count = 0;
        for (int s = 0; s < 3; ++s) {
            if ((d + s) % 4 == 0) continue;  // deterministic absence pattern
            const double v = 10.0 + static_cast<double>(bounded_uint(eng, 1000)) / 10.0;
            records.push_back({Date{2019, 3, d + 1}, "10001000100" + std::to_string(s), "10001", v});
            sum += v;
            ++count;
        }
        expect[d] = count ? sum / count : std::nan("");
    }

    auto shuffled = records;
    std::reverse(shuffled.begin(), shuffled.end());

    const auto a = aggregate_to_region(records);
    const auto b = aggregate_to_region(shuffled);
    const int base_doy = day_of_year(Date{2019, 3, 1});
    for (int d = 0; d < 5; ++d) {
        const double got = a.at("10001").at(2019).values[static_cast<std::size_t>(base_doy - 1 + d)];
        const double got_b =
            b.at("10001").at(2019).values[static_cast<std::size_t>(base_doy - 1 + d)];
        if (std::isnan(expect[d])) {
            CHECK(std::isnan(got));
        } else {
            CHECK(got == doctest::Approx(expect[d]).epsilon(1e-12));
            CHECK(got == got_b);  // permutation invariance, bitwise
        }
    }
}

TEST_CASE("normalize_leap_year removes Feb 29 and shifts later days") {
    std::vector<double> values(366);
    for (std::size_t i = 0; i < 366; ++i) values[i] = static_cast<double>(i);
    RegionSeries s = make_series("51059", 2020, values);

    const RegionSeries out = normalize_leap_year(s);
    REQUIRE(out.days() == 365);
    CHECK(out.values[58] == 58.0);   // Feb 28 untouched
    CHECK(out.values[59] == 60.0);   // old index 60 (Mar 1) now at 59
    CHECK(out.values[364] == 365.0);
    // Every non-Feb-29 value preserved bitwise.
    for (std::size_t i = 0; i < 59; ++i) CHECK(out.values[i] == s.values[i]);
    for (std::size_t i = 59; i < 365; ++i) CHECK(out.values[i] == s.values[i + 1]);
}

TEST_CASE("normalize_leap_year is a warned no-op on a non-leap year") {
    RegionSeries s = make_series("51059", 2019, std::vector<double>(365, 7.0));
    Warnings warnings;
    const RegionSeries out = normalize_leap_year(s, &warnings);
    CHECK(out.days() == 365);
    CHECK(warnings.size() == 1);
}

TEST_CASE("normalize_leap_year keeps a constant series constant") {
    RegionSeries s = make_series("51059", 2020, std::vector<double>(366, 3.25));
    const RegionSeries out = normalize_leap_year(s);
    REQUIRE(out.days() == 365);
    for (double v : out.values) CHECK(v == 3.25);
}

TEST_CASE("repair_gaps interpolates short gaps and drops long ones") {
    RegionSeries s = make_series("51059", 2019, std::vector<double>(365, 10.0));
    s.values[100] = std::nan("");
    s.values[101] = std::nan("");
    s.values[102] = std::nan("");
    s.present[100] = s.present[101] = s.present[102] = 0;
    s.values[99] = 10.0;
    s.values[103] = 18.0;

    REQUIRE(!repair_gaps(s, 3).has_value());
    CHECK(s.values[100] == doctest::Approx(12.0));
    CHECK(s.values[101] == doctest::Approx(14.0));
    CHECK(s.values[102] == doctest::Approx(16.0));
    CHECK(s.present[101] == 1);

    RegionSeries bad = make_series("51060", 2019, std::vector<double>(365, 10.0));
    for (int i = 50; i < 54; ++i) {
        bad.values[static_cast<std::size_t>(i)] = std::nan("");
        bad.present[static_cast<std::size_t>(i)] = 0;
    }
    const auto reason = repair_gaps(bad, 3);
    REQUIRE(reason.has_value());
    CHECK(reason->find("gap of 4 days") != std::string::npos);
}

TEST_CASE("repair_gaps extends boundary gaps from the nearest value") {
    RegionSeries s = make_series("51059", 2019, std::vector<double>(365, 5.0));
    s.values[0] = std::nan("");
    s.present[0] = 0;
    s.values[364] = std::nan("");
    s.present[364] = 0;
    REQUIRE(!repair_gaps(s, 3).has_value());
    CHECK(s.values[0] == 5.0);
    CHECK(s.values[364] == 5.0);
}

TEST_CASE("present mask and masked days always partition the year") {
    std::vector<DailyRecord> records = {{Date{2019, 6, 1}, "100010001001", "10001", 5.0}};
    const auto out = aggregate_to_region(records);
    const auto& s = out.at("10001").at(2019);
    std::size_t present = 0, masked = 0;
    for (char p : s.present) (p ? present : masked)++;
    CHECK(present + masked == 365);
    CHECK(present == 1);
}

TEST_CASE("coverage_report computes population statistics") {
    std::vector<DailyRecord> records = {
        {Date{2019, 1, 1}, "100010001001", "10001", 8.0},
        {Date{2019, 1, 2}, "100010001001", "10001", 12.0},
    };
    const CoverageReport report = coverage_report(records);
    const auto& stats = report.per_region.at("10001");
    CHECK(stats.record_count == 2);
    CHECK(stats.mean == doctest::Approx(10.0));
    CHECK(stats.stddev == doctest::Approx(2.0));
    CHECK(stats.min == 8.0);
    CHECK(stats.max == 12.0);
}

TEST_CASE("coverage_report on no records is empty") {
    const CoverageReport report = coverage_report({});
    CHECK(report.per_region.empty());
    CHECK(report.regions_seen() == 0);
}

TEST_CASE("coverage_report matches a brute-force oracle on 20 regions") {
    std::mt19937_64 eng(7);
    std::vector<DailyRecord> records;
    std::map<std::string, std::vector<double>> values_of;
    for (int r = 0; r < 20; ++r) {
        char id[16];
        std::snprintf(id, sizeof id, "%05d", r + 1);
        const int count = 1 + static_cast<int>(bounded_uint(eng, 30));
        for (int i = 0; i < count; ++i) {
            const double v = static_cast<double>(bounded_uint(eng, 5000)) / 25.0;
            records.push_back({Date{2019, 1, 1 + i % 28}, std::string(id) + "0001001", id, v});
            values_of[id].push_back(v);
        }
    }
    const CoverageReport report = coverage_report(records);
    REQUIRE(report.regions_seen() == 20);
    for (const auto& [id, values] : values_of) {
        double sum = 0;
        for (double v : values) sum += v;
        const double mean = sum / static_cast<double>(values.size());
        double sq = 0;
        for (double v : values) sq += (v - mean) * (v - mean);
        const auto& stats = report.per_region.at(id);
        CHECK(stats.mean == doctest::Approx(mean).epsilon(1e-12));
        CHECK(stats.stddev ==
              doctest::Approx(std::sqrt(sq / static_cast<double>(values.size()))).epsilon(1e-9));
        CHECK(stats.record_count == values.size());
    }
}

TEST_CASE("dropped plus kept covers every region seen") {
    std::vector<DailyRecord> records = {
        {Date{2019, 1, 1}, "100010001001", "10001", 5.0},
        {Date{2019, 1, 1}, "100020001001", "10002", 6.0},
    };
    CoverageReport report = coverage_report(records);
    report.mark_dropped("10002", "gap too long");
    CHECK(report.regions_seen() == 2);
    CHECK(report.regions_kept() == 1);
    CHECK(report.dropped.size() + report.regions_kept() == report.regions_seen());
}

TEST_CASE("parse then aggregate with one subregion per region is the identity") {
    std::string text = "date,subregion,value\n";
    std::vector<double> values;
    std::mt19937_64 eng(11);
    for (int d = 1; d <= 10; ++d) {
        const double v = static_cast<double>(bounded_uint(eng, 10000)) / 100.0;
        values.push_back(v);
        char line[64];
        std::snprintf(line, sizeof line, "2019-01-%02d,100010001001,%.2f\n", d, v);
        text += line;
    }
    ParseReport report;
    const auto records = parse_string(text, {}, report);
    const auto out = aggregate_to_region(records);
    const auto& s = out.at("10001").at(2019);
    for (int d = 0; d < 10; ++d)
        CHECK(s.values[static_cast<std::size_t>(d)] ==
              doctest::Approx(values[static_cast<std::size_t>(d)]).epsilon(1e-12));
}

TEST_CASE("series bundle round-trips and the index holds byte offsets") {
    std::vector<RegionSeries> series;
    RegionSeries a = make_series("00001", 2019, {1.5, 2.5, 3.5});
    RegionSeries b = make_series("00002", 2019, {4.0, std::nan(""), 6.0});
    b.present[1] = 0;
    series.push_back(a);
    series.push_back(b);

    std::ostringstream matrix, index;
    write_series_bundle(series, matrix, index);

    std::istringstream matrix_in(matrix.str());
    const auto back = read_series_bundle(matrix_in);
    REQUIRE(back.size() == 2);
    CHECK(back[0].values == a.values);
    CHECK(back[1].present[1] == 0);
    CHECK(std::isnan(back[1].values[1]));

    // The recorded offset points at the start of each region's row.
    std::istringstream index_in(index.str());
    std::string line;
    std::getline(index_in, line);  // header
    std::getline(index_in, line);
    const auto fields = split_fields(line);
    const std::size_t offset = static_cast<std::size_t>(std::stoul(fields[2]));
    CHECK(matrix.str().compare(offset, 5, "00001") == 0);
}
