#include "dtspp/mobility.hpp"

#include <cmath>
#include <sstream>

namespace dtspp {

TsppSeries tspp(const RegionSeries& series, int radius) {
    if (radius < 0) throw numeric_error("window radius must be non-negative");
    const std::size_t n = series.days();
    const std::size_t window = static_cast<std::size_t>(2 * radius + 1);
    if (n < window)
        throw data_error("region " + series.region_id + ": series of " + std::to_string(n) +
                         " days is shorter than the " + std::to_string(window) + "-day window");

    for (std::size_t i = 0; i < n; ++i) {
        if (series.present[i] && std::isfinite(series.values[i])) continue;
        std::size_t j = i;
        while (j < n && !(series.present[j] && std::isfinite(series.values[j]))) ++j;
        std::ostringstream msg;
        msg << "region " << series.region_id << ": unrepaired gap at days " << (i + 1) << "-" << j;
        throw data_error(msg.str());
    }

    TsppSeries out;
    out.region_id = series.region_id;
    out.year = series.year;
    out.start_day_of_year = radius + 1;
    out.values.reserve(n - window + 1);
    const double inv = 1.0 / static_cast<double>(window);
    for (std::size_t k = 0; k + window <= n; ++k) {
        // Anchored form: exact for constant windows and exactly shift-equivariant.
        double dev = 0.0;
        for (std::size_t j = 1; j < window; ++j) dev += series.values[k + j] - series.values[k];
        out.values.push_back(series.values[k] + dev * inv);
    }
    return out;
}

DeltaSeries delta_tspp(const TsppSeries& target, const TsppSeries& reference) {
    if (target.region_id != reference.region_id)
        throw data_error("delta_tspp: region mismatch (" + target.region_id + " vs " +
                         reference.region_id + ")");
    if (target.values.size() != reference.values.size())
        throw data_error("delta_tspp: length mismatch (" + std::to_string(target.values.size()) +
                         " vs " + std::to_string(reference.values.size()) + ") for region " +
                         target.region_id);

    DeltaSeries out;
    out.region_id = target.region_id;
    out.values.reserve(target.values.size());
    for (std::size_t i = 0; i < target.values.size(); ++i) {
        out.values.push_back(target.values[i] - reference.values[i]);
    }
    return out;
}

DeltaSeries aggregate_delta(std::span<const DeltaSeries> deltas, const std::string& label) {
    if (deltas.empty()) throw data_error("aggregate_delta: empty region selection");
    const std::size_t m = deltas.front().values.size();
    for (const auto& d : deltas) {
        if (d.values.size() != m)
            throw data_error("aggregate_delta: region " + d.region_id + " has length " +
                             std::to_string(d.values.size()) + ", expected " + std::to_string(m));
    }

    DeltaSeries out;
    out.region_id = label;
    out.values.assign(m, 0.0);
    for (const auto& d : deltas) {
        for (std::size_t i = 0; i < m; ++i) out.values[i] += d.values[i];
    }
    const double inv = 1.0 / static_cast<double>(deltas.size());
    for (auto& v : out.values) v *= inv;
    return out;
}

}  // namespace dtspp
