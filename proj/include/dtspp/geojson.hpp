#ifndef DTSPP_GEOJSON_HPP
#define DTSPP_GEOJSON_HPP

#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dtspp/spatial.hpp"

namespace dtspp {

/// Parse a GeoJSON FeatureCollection of Polygon / MultiPolygon features.
/// `id_property` names the feature property carrying the region id.
std::vector<RegionGeometry> read_geojson(std::istream& in,
                                         const std::string& id_property = "GEOID");

void write_geojson(std::ostream& out, std::span<const RegionGeometry> geometries,
                   const std::string& id_property = "GEOID");

/// Properties to merge into a feature, keyed by region id. Values are
/// pre-rendered JSON scalars (numbers as shortest-round-trip strings).
struct PropertyJoin {
    std::string name;
    std::map<std::string, double> numeric;   // region -> value (NaN -> null)
    std::map<std::string, std::string> text;  // region -> string value
};

/// Copy the input FeatureCollection, attaching the joined properties to each
/// feature whose id matches. Features without a match are passed through.
void join_properties(std::istream& in, std::ostream& out, const std::string& id_property,
                     std::span<const PropertyJoin> joins);

}  // namespace dtspp

#endif
