#ifndef DTSPP_DATES_HPP
#define DTSPP_DATES_HPP

#include <string>
#include <string_view>

namespace dtspp {

struct Date {
    int year = 0;
    int month = 0;  // 1..12
    int day = 0;    // 1..31

    auto operator<=>(const Date&) const = default;
};

bool is_leap_year(int year);

/// Days in the given month of the given year.
int days_in_month(int year, int month);

/// 1-based ordinal day within the year (Jan 1 = 1).
int day_of_year(const Date& d);

/// Parse `text` against a strptime-style pattern supporting %Y, %m, %d
/// and literal separators. Throws data_error on mismatch or an invalid
/// calendar date.
Date parse_date(std::string_view text, std::string_view format = "%Y-%m-%d");

/// ISO-8601 rendering (YYYY-MM-DD).
std::string format_date(const Date& d);

}  // namespace dtspp

#endif
