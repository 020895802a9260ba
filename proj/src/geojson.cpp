#include "dtspp/geojson.hpp"

#include <cmath>

#include <json.hpp>

#include "dtspp/csv.hpp"

namespace dtspp {

namespace {

using nlohmann::json;

Ring parse_ring(const json& coords) {
    Ring ring;
    ring.reserve(coords.size());
    for (const auto& pt : coords) {
        if (!pt.is_array() || pt.size() < 2) throw data_error("geojson: malformed coordinate");
        ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
    }
    return ring;
}

Polygon parse_polygon(const json& rings) {
    if (rings.empty()) throw data_error("geojson: polygon with no rings");
    Polygon poly;
    poly.outer = parse_ring(rings[0]);
    for (std::size_t r = 1; r < rings.size(); ++r) poly.holes.push_back(parse_ring(rings[r]));
    return poly;
}

std::string id_from_properties(const json& props, const std::string& id_property) {
    const auto it = props.find(id_property);
    if (it == props.end())
        throw data_error("geojson: feature lacks id property '" + id_property + "'");
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    throw data_error("geojson: id property '" + id_property + "' is neither string nor integer");
}

json ring_to_json(const Ring& ring) {
    json arr = json::array();
    for (const auto& v : ring) arr.push_back({v[0], v[1]});
    return arr;
}

}  // namespace

std::vector<RegionGeometry> read_geojson(std::istream& in, const std::string& id_property) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw data_error(std::string("geojson: ") + e.what());
    }
    if (doc.value("type", "") != "FeatureCollection")
        throw data_error("geojson: expected a FeatureCollection");

    std::vector<RegionGeometry> out;
    for (const auto& feature : doc.at("features")) {
        RegionGeometry region;
        region.region_id = id_from_properties(feature.at("properties"), id_property);
        const auto& geom = feature.at("geometry");
        const std::string type = geom.value("type", "");
        const auto& coords = geom.at("coordinates");
        if (type == "Polygon") {
            region.polygons.push_back(parse_polygon(coords));
        } else if (type == "MultiPolygon") {
            for (const auto& rings : coords) region.polygons.push_back(parse_polygon(rings));
        } else {
            throw data_error("geojson: unsupported geometry type '" + type + "' for region " +
                             region.region_id);
        }
        out.push_back(std::move(region));
    }
    return out;
}

void write_geojson(std::ostream& out, std::span<const RegionGeometry> geometries,
                   const std::string& id_property) {
    json features = json::array();
    for (const auto& g : geometries) {
        json polys = json::array();
        for (const auto& poly : g.polygons) {
            json rings = json::array();
            rings.push_back(ring_to_json(poly.outer));
            for (const auto& hole : poly.holes) rings.push_back(ring_to_json(hole));
            polys.push_back(rings);
        }
        json geometry;
        if (polys.size() == 1) {
            geometry = {{"type", "Polygon"}, {"coordinates", polys[0]}};
        } else {
            geometry = {{"type", "MultiPolygon"}, {"coordinates", polys}};
        }
        features.push_back({{"type", "Feature"},
                            {"properties", {{id_property, g.region_id}}},
                            {"geometry", geometry}});
    }
    const json doc = {{"type", "FeatureCollection"}, {"features", features}};
    out << doc.dump() << '\n';
}

void join_properties(std::istream& in, std::ostream& out, const std::string& id_property,
                     std::span<const PropertyJoin> joins) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw data_error(std::string("geojson: ") + e.what());
    }
    if (doc.value("type", "") != "FeatureCollection")
        throw data_error("geojson: expected a FeatureCollection");

    for (auto& feature : doc.at("features")) {
        auto& props = feature.at("properties");
        const std::string id = id_from_properties(props, id_property);
        for (const auto& join : joins) {
            if (const auto it = join.numeric.find(id); it != join.numeric.end()) {
                if (std::isnan(it->second)) {
                    props[join.name] = nullptr;
                } else {
                    props[join.name] = it->second;
                }
            }
            if (const auto it = join.text.find(id); it != join.text.end()) {
                props[join.name] = it->second;
            }
        }
    }
    out << doc.dump() << '\n';
}

}  // namespace dtspp
