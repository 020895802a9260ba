#ifndef DTSPP_CSV_HPP
#define DTSPP_CSV_HPP

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace dtspp {

/// Split one delimited line into fields. No quoting support: the panel,
/// covariate and artifact formats are all plain numeric/identifier CSV.
std::vector<std::string> split_fields(std::string_view line, char delimiter = ',');

/// Read one line, tolerating CRLF endings. Returns false at EOF.
bool read_line(std::istream& in, std::string& line);

/// Shortest round-trip decimal rendering of a double ("NA" for NaN).
std::string format_double(double v);

/// Fixed scientific rendering with 2 decimals, e.g. "1.84e-09".
std::string format_scientific(double v);

/// Parse a double; returns nullopt for empty, "NA", "nan" or garbage.
std::optional<double> parse_double(std::string_view field);

/// Parse a non-negative integer; throws data_error on failure.
long parse_long(std::string_view field, const std::string& what);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter = ',');

}  // namespace dtspp

#endif
