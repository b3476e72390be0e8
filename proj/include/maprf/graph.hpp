#pragma once

// In-memory road-network model: nodes and attributed polyline edges, GeoJSON
// FeatureCollection ingestion/serialisation, and bounding-box edge extraction
// by arc-length midpoint.
//
// Feature properties are kept as JSON values so that fusion never changes the
// type or content of anything it does not add; serialising a parsed graph
// reproduces ids, attributes and coordinates exactly.

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "maprf/errors.hpp"
#include "maprf/geo.hpp"

namespace maprf {

using json = nlohmann::json;

struct GraphNode {
    std::string id;     // canonical key
    json id_raw;        // original JSON value, re-emitted on output
    GeoPoint pos;

    friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct Edge {
    std::string id;
    std::string u;
    std::string v;
    json id_raw;
    json u_raw;
    json v_raw;
    std::vector<GeoPoint> geometry;  // >= 2 points; endpoints match u and v positions
    json attrs = json::object();     // every property other than id/u/v

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct RoadGraph {
    std::vector<GraphNode> nodes;  // file order
    std::vector<Edge> edges;       // file order
    std::unordered_map<std::string, std::size_t> node_index;
    std::unordered_map<std::string, std::size_t> edge_index;

    friend bool operator==(const RoadGraph& a, const RoadGraph& b) {
        return a.nodes == b.nodes && a.edges == b.edges;
    }
};

namespace detail {

// Node/edge ids may be JSON strings or numbers; the canonical key is the
// string itself or the number's JSON text.
inline std::string id_key(const json& v, const char* what) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.dump();
    throw ParseError(std::string(what) + " must be a string or number, got " + v.dump());
}

inline GeoPoint coord_from_json(const json& c) {
    if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number()) {
        throw ParseError("coordinate must be a [lon, lat] array");
    }
    return GeoPoint{c[1].get<double>(), c[0].get<double>()};  // GeoJSON order is lon, lat
}

inline std::size_t line_of_byte(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') ++line;
    }
    return line;
}

}  // namespace detail

// Parses a FeatureCollection: Point features with property `id` become nodes,
// LineString features with properties `id`, `u`, `v` become edges and their
// remaining properties become edge attributes.
inline RoadGraph parse_geojson(std::istream& in) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(detail::line_of_byte(text, e.byte), e.what());
    }
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
        !doc.contains("features") || !doc["features"].is_array()) {
        throw ParseError("input is not a GeoJSON FeatureCollection");
    }

    RoadGraph g;
    // Nodes first so that edges may reference nodes declared later in the file.
    for (const json& f : doc["features"]) {
        if (!f.is_object() || f.value("type", "") != "Feature" || !f.contains("geometry")) {
            throw ParseError("feature is not a GeoJSON Feature with geometry");
        }
        const json& geom = f["geometry"];
        const std::string gtype = geom.value("type", "");
        if (gtype != "Point") continue;
        const json props = f.value("properties", json::object());
        if (!props.contains("id")) throw ParseError("Point feature is missing property 'id'");
        GraphNode n;
        n.id_raw = props["id"];
        n.id = detail::id_key(n.id_raw, "node id");
        n.pos = detail::coord_from_json(geom.at("coordinates"));
        if (g.node_index.count(n.id)) throw ParseError("duplicate node id '" + n.id + "'");
        g.node_index[n.id] = g.nodes.size();
        g.nodes.push_back(std::move(n));
    }
    for (const json& f : doc["features"]) {
        const json& geom = f["geometry"];
        const std::string gtype = geom.value("type", "");
        if (gtype == "Point") continue;
        if (gtype != "LineString") throw ParseError("unsupported geometry type '" + gtype + "'");
        const json props = f.value("properties", json::object());
        for (const char* req : {"id", "u", "v"}) {
            if (!props.contains(req)) {
                throw ParseError(std::string("LineString feature is missing property '") + req + "'");
            }
        }
        Edge e;
        e.id_raw = props["id"];
        e.u_raw = props["u"];
        e.v_raw = props["v"];
        e.id = detail::id_key(e.id_raw, "edge id");
        e.u = detail::id_key(e.u_raw, "edge endpoint u");
        e.v = detail::id_key(e.v_raw, "edge endpoint v");
        for (auto it = props.begin(); it != props.end(); ++it) {
            if (it.key() == "id" || it.key() == "u" || it.key() == "v") continue;
            e.attrs[it.key()] = it.value();
        }
        const json& coords = geom.at("coordinates");
        if (!coords.is_array() || coords.size() < 2) {
            throw ParseError("edge '" + e.id + "' geometry needs at least 2 points");
        }
        for (const json& c : coords) e.geometry.push_back(detail::coord_from_json(c));
        const auto u_it = g.node_index.find(e.u);
        const auto v_it = g.node_index.find(e.v);
        if (u_it == g.node_index.end()) {
            throw ParseError("edge '" + e.id + "' has dangling reference to node '" + e.u + "'");
        }
        if (v_it == g.node_index.end()) {
            throw ParseError("edge '" + e.id + "' has dangling reference to node '" + e.v + "'");
        }
        if (!(e.geometry.front() == g.nodes[u_it->second].pos)) {
            throw ParseError("edge '" + e.id + "' geometry does not start at node '" + e.u + "'");
        }
        if (!(e.geometry.back() == g.nodes[v_it->second].pos)) {
            throw ParseError("edge '" + e.id + "' geometry does not end at node '" + e.v + "'");
        }
        if (g.edge_index.count(e.id)) throw ParseError("duplicate edge id '" + e.id + "'");
        g.edge_index[e.id] = g.edges.size();
        g.edges.push_back(std::move(e));
    }
    return g;
}

inline json graph_to_geojson(const RoadGraph& g) {
    json features = json::array();
    for (const GraphNode& n : g.nodes) {
        features.push_back(json{{"type", "Feature"},
                                {"geometry", {{"type", "Point"}, {"coordinates", {n.pos.lon, n.pos.lat}}}},
                                {"properties", {{"id", n.id_raw}}}});
    }
    for (const Edge& e : g.edges) {
        json coords = json::array();
        for (const GeoPoint& p : e.geometry) coords.push_back(json{p.lon, p.lat});
        json props = e.attrs;
        props["id"] = e.id_raw;
        props["u"] = e.u_raw;
        props["v"] = e.v_raw;
        features.push_back(json{{"type", "Feature"},
                                {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
                                {"properties", props}});
    }
    return json{{"type", "FeatureCollection"}, {"features", features}};
}

inline void write_geojson(const RoadGraph& g, std::ostream& os) {
    os << graph_to_geojson(g).dump() << "\n";
}

// The representative point of an edge for cell assignment: the point half way
// along the polyline by arc length (Euclidean in degree space). Whole-edge
// assignment by this point avoids cutting edges at cell boundaries.
inline GeoPoint arc_midpoint(const std::vector<GeoPoint>& polyline) {
    if (polyline.size() < 2) return polyline.empty() ? GeoPoint{} : polyline.front();
    double total = 0.0;
    std::vector<double> seg(polyline.size() - 1, 0.0);
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
        const double dlat = polyline[i + 1].lat - polyline[i].lat;
        const double dlon = polyline[i + 1].lon - polyline[i].lon;
        seg[i] = std::sqrt(dlat * dlat + dlon * dlon);
        total += seg[i];
    }
    if (total == 0.0) return polyline.front();
    double remaining = total / 2.0;
    for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
        if (remaining <= seg[i] && seg[i] > 0.0) {
            const double t = remaining / seg[i];
            return GeoPoint{polyline[i].lat + t * (polyline[i + 1].lat - polyline[i].lat),
                            polyline[i].lon + t * (polyline[i + 1].lon - polyline[i].lon)};
        }
        remaining -= seg[i];
    }
    return polyline.back();
}

// Ids of edges whose arc-length midpoint lies in the half-open box, in edge
// order. With the lattice-exact cell boxes of one tiling, every midpoint
// inside the tiled square is claimed by exactly one cell.
inline std::vector<std::string> edges_in_bbox(const RoadGraph& g, const BBox& box) {
    std::vector<std::string> ids;
    for (const Edge& e : g.edges) {
        if (box.contains(arc_midpoint(e.geometry))) ids.push_back(e.id);
    }
    return ids;
}

// Sets one numeric attribute on exactly the named edges; everything else is
// left untouched. Last write wins on an existing key.
inline void set_edge_attr(RoadGraph& g, const std::vector<std::string>& ids,
                          const std::string& name, double value) {
    for (const std::string& id : ids) {
        const auto it = g.edge_index.find(id);
        if (it == g.edge_index.end()) throw UnknownEdge(id);
        g.edges[it->second].attrs[name] = value;
    }
}

}  // namespace maprf
