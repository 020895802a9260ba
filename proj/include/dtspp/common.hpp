#ifndef DTSPP_COMMON_HPP
#define DTSPP_COMMON_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace dtspp {

/// Malformed or inconsistent input data (bad files, schema violations,
/// mismatched identifiers). Maps to CLI exit code 2.
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerically impossible request (constant field, K out of range,
/// non-finite values). Maps to CLI exit code 3.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Sink for non-fatal diagnostics. Callers that pass nullptr opt out.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string msg) {
    if (sink) sink->push_back(std::move(msg));
}

}  // namespace dtspp

#endif
