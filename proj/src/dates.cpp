#include "dtspp/dates.hpp"

#include <array>
#include <cstdio>

#include "dtspp/common.hpp"

namespace dtspp {

namespace {

constexpr std::array<int, 12> kMonthDays = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

bool take_digits(std::string_view& s, int count_min, int count_max, int& out) {
    int value = 0;
    int taken = 0;
    while (taken < count_max && !s.empty() && s.front() >= '0' && s.front() <= '9') {
        value = value * 10 + (s.front() - '0');
        s.remove_prefix(1);
        ++taken;
    }
    if (taken < count_min) return false;
    out = value;
    return true;
}

}  // namespace

bool is_leap_year(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    if (month < 1 || month > 12) throw data_error("month out of range: " + std::to_string(month));
    if (month == 2 && is_leap_year(year)) return 29;
    return kMonthDays[static_cast<std::size_t>(month - 1)];
}

int day_of_year(const Date& d) {
    int doy = d.day;
    for (int m = 1; m < d.month; ++m) doy += days_in_month(d.year, m);
    return doy;
}

Date parse_date(std::string_view text, std::string_view format) {
    Date out;
    std::string_view s = text;
    std::string_view f = format;
    bool have_y = false, have_m = false, have_d = false;
    while (!f.empty()) {
        if (f.front() == '%' && f.size() >= 2) {
            const char code = f[1];
            f.remove_prefix(2);
            bool ok = false;
            switch (code) {
                case 'Y': ok = take_digits(s, 4, 4, out.year); have_y = ok; break;
                case 'm': ok = take_digits(s, 1, 2, out.month); have_m = ok; break;
                case 'd': ok = take_digits(s, 1, 2, out.day); have_d = ok; break;
                case '%':
                    ok = !s.empty() && s.front() == '%';
                    if (ok) s.remove_prefix(1);
                    break;
                default:
                    throw data_error(std::string("unsupported date format directive %") + code);
            }
            if (!ok) throw data_error("date '" + std::string(text) + "' does not match format '" + std::string(format) + "'");
        } else {
            if (s.empty() || s.front() != f.front())
                throw data_error("date '" + std::string(text) + "' does not match format '" + std::string(format) + "'");
            s.remove_prefix(1);
            f.remove_prefix(1);
        }
    }
    if (!s.empty() || !have_y || !have_m || !have_d)
        throw data_error("date '" + std::string(text) + "' does not match format '" + std::string(format) + "'");
    if (out.month < 1 || out.month > 12 || out.day < 1 || out.day > days_in_month(out.year, out.month))
        throw data_error("invalid calendar date '" + std::string(text) + "'");
    return out;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

}  // namespace dtspp
