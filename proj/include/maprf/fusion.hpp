#pragma once

// Assigns raster feature values to road-network edges, one grid cell at a
// time: each cell's value is queried from the raster over the cell's box and
// stamped onto every edge whose midpoint the cell owns. Edges are treated as
// whole units (never cut), cells partition the edge set exactly, and the
// #edges_assigned == #edges_total conservation check is enforced before any
// result is returned.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "maprf/errors.hpp"
#include "maprf/geo.hpp"
#include "maprf/graph.hpp"
#include "maprf/grid.hpp"
#include "maprf/raster.hpp"

namespace maprf {

// Per-city fusion summary, one JSON line per run.
struct FusionReport {
    std::string city_id;
    std::string feature;
    std::string status = "ok";
    std::string error;
    std::int64_t g = 0;
    std::int64_t edges_total = 0;
    std::int64_t edges_assigned = 0;
    std::int64_t cells_empty = 0;
    std::int64_t cells_nodata = 0;
    double value_min = std::numeric_limits<double>::quiet_NaN();
    double value_max = std::numeric_limits<double>::quiet_NaN();
    double value_mean = std::numeric_limits<double>::quiet_NaN();

    json to_json() const {
        json j{{"city_id", city_id}, {"status", status}};
        if (status != "ok") {
            j["error"] = error;
            return j;
        }
        j["feature"] = feature;
        j["g"] = g;
        j["edges_total"] = edges_total;
        j["edges_assigned"] = edges_assigned;
        j["cells_empty"] = cells_empty;
        j["cells_nodata"] = cells_nodata;
        j["value_min"] = std::isnan(value_min) ? json() : json(value_min);
        j["value_max"] = std::isnan(value_max) ? json() : json(value_max);
        j["value_mean"] = std::isnan(value_mean) ? json() : json(value_mean);
        return j;
    }

    std::string to_json_line() const { return to_json().dump(); }
};

struct FuseOptions {
    enum class Sampling { bbox_mean, point };
    Sampling sampling = Sampling::bbox_mean;
    // Fraction of cells allowed to come back NoData/OutOfExtent before the
    // whole city is rejected.
    double nodata_threshold = 0.1;
    std::string city_id;
};

namespace detail {

// Locates the cell owning a midpoint: an approximate index from the inverse
// offset transform, then an exact half-open membership check against the
// candidate box and its neighbors. Midpoints outside the tiled square get the
// nearest cell, so conservation holds for graphs that overflow the square.
class CellLocator {
public:
    CellLocator(const CenterList& centers, const GridSpec& spec)
        : city_(centers.city_center),
          s_(spec.s),
          b_(spec.b_real_m),
          cos_(degree_cos(centers.city_center.lat)) {
        boxes_.reserve(centers.offsets.size());
        for (const LocalOffset& off : centers.offsets) {
            boxes_.push_back(cell_bbox(city_, off, b_));
        }
    }

    const BBox& box(std::size_t cell) const { return boxes_[cell]; }

    // Returns (cell index, inside flag).
    std::pair<std::size_t, bool> locate(const GeoPoint& p) const {
        const double oy = (p.lat - city_.lat) * kMetersPerDegree * 2.0;
        const double ox = (p.lon - city_.lon) * kMetersPerDegree * cos_ * 2.0;
        const double cell_units = 2.0 * static_cast<double>(b_);
        const double half_span = static_cast<double>(s_) * static_cast<double>(b_);
        const std::int64_t iy = clamp_index(std::floor((oy + half_span) / cell_units));
        const std::int64_t ix = clamp_index(std::floor((ox + half_span) / cell_units));
        // Candidate cell first, then the 8 neighbors.
        static const std::int64_t kOffsets[][2] = {{0, 0},  {0, 1},  {0, -1}, {1, 0},  {-1, 0},
                                                   {1, 1},  {1, -1}, {-1, 1}, {-1, -1}};
        for (const auto& d : kOffsets) {
            const std::int64_t ny = iy + d[0];
            const std::int64_t nx = ix + d[1];
            if (ny < 0 || ny >= s_ || nx < 0 || nx >= s_) continue;
            const std::size_t cell = static_cast<std::size_t>(ny * s_ + nx);
            if (boxes_[cell].contains(p)) return {cell, true};
        }
        // Outside the square: nearest cell is the clamped index on each axis.
        return {static_cast<std::size_t>(iy * s_ + ix), false};
    }

private:
    std::int64_t clamp_index(double idx) const {
        if (!(idx >= 0.0)) return 0;
        if (idx >= static_cast<double>(s_)) return s_ - 1;
        return static_cast<std::int64_t>(idx);
    }

    GeoPoint city_;
    std::int64_t s_ = 0;
    std::int64_t b_ = 0;
    double cos_ = 1.0;
    std::vector<BBox> boxes_;
};

}  // namespace detail

// Fuses one raster feature into one city's road graph. centers must come
// from rasterize for the same spec. Returns the updated graph (identical
// except for the added attribute) and the per-city report.
inline std::pair<RoadGraph, FusionReport> fuse(const RoadGraph& graph, const RasterGrid& raster,
                                               const CenterList& centers, const GridSpec& spec,
                                               const std::string& feature_name,
                                               const FuseOptions& opts = {}) {
    FusionReport report;
    report.city_id = opts.city_id;
    report.feature = feature_name;
    report.g = spec.g;
    report.edges_total = static_cast<std::int64_t>(graph.edges.size());

    const detail::CellLocator locator(centers, spec);
    const std::size_t cell_count = centers.offsets.size();

    // Partition the edge set by midpoint ownership.
    std::vector<std::vector<std::string>> cell_edges(cell_count);
    std::int64_t assigned = 0;
    for (const Edge& e : graph.edges) {
        const std::size_t cell = locator.locate(arc_midpoint(e.geometry)).first;
        cell_edges[cell].push_back(e.id);
        ++assigned;
    }
    report.edges_assigned = assigned;
    if (assigned != report.edges_total) {
        throw ConservationViolation(report.edges_total, assigned);
    }

    // Query the raster per cell; nodata cells keep their edges unattributed.
    std::vector<double> cell_value(cell_count, 0.0);
    std::vector<bool> cell_has_value(cell_count, false);
    for (std::size_t c = 0; c < cell_count; ++c) {
        if (cell_edges[c].empty()) ++report.cells_empty;
        try {
            cell_value[c] = (opts.sampling == FuseOptions::Sampling::point)
                                ? query_point(raster, centers.decoded[c])
                                : query_bbox_mean(raster, locator.box(c));
            cell_has_value[c] = true;
        } catch (const OutOfExtent&) {
            ++report.cells_nodata;
        } catch (const NoData&) {
            ++report.cells_nodata;
        }
    }
    if (static_cast<double>(report.cells_nodata) >
        opts.nodata_threshold * static_cast<double>(spec.g)) {
        throw RasterCoverageError(report.cells_nodata, spec.g, opts.nodata_threshold);
    }

    // Single exclusive merge phase.
    RoadGraph fused = graph;
    double vmin = std::numeric_limits<double>::infinity();
    double vmax = -std::numeric_limits<double>::infinity();
    double vsum = 0.0;
    std::int64_t vcount = 0;
    for (std::size_t c = 0; c < cell_count; ++c) {
        if (!cell_has_value[c] || cell_edges[c].empty()) continue;
        set_edge_attr(fused, cell_edges[c], feature_name, cell_value[c]);
        vmin = std::min(vmin, cell_value[c]);
        vmax = std::max(vmax, cell_value[c]);
        vsum += cell_value[c] * static_cast<double>(cell_edges[c].size());
        vcount += static_cast<std::int64_t>(cell_edges[c].size());
    }
    if (vcount > 0) {
        report.value_min = vmin;
        report.value_max = vmax;
        report.value_mean = vsum / static_cast<double>(vcount);
    }
    return {std::move(fused), report};
}

}  // namespace maprf
