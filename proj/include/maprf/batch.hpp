#pragma once

// Batch driver: iterate derive_spec -> rasterize -> fuse over a city list
// with per-city inputs, one isolated worker per city, order-restoring report
// aggregation. Also hosts the deterministic synthetic-fixture generator used
// for desk-scale runs and tests.

#include <atomic>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "maprf/errors.hpp"
#include "maprf/fusion.hpp"
#include "maprf/geo.hpp"
#include "maprf/graph.hpp"
#include "maprf/grid.hpp"
#include "maprf/io.hpp"
#include "maprf/raster.hpp"

namespace maprf {

// One row of the batch input: where the city is, how big it is, and which
// feature rasters to fuse into its graph.
struct CityRecord {
    std::string city_id;
    GeoPoint center;
    double a_m = 0.0;
    std::string graph_path;
    std::vector<std::pair<std::string, std::string>> features;  // (feature_name, raster_path)
};

inline constexpr const char* kCityListHeader = "city_id,lat,lon,size_m,graph_path";

namespace detail {

inline std::string strip_cr(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
    return s;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_csv_double(const std::string& tok, std::size_t line_no, const char* what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw ParseError(line_no, std::string(what) + " '" + tok + "' is not a number");
    }
    return v;
}

}  // namespace detail

// City list CSV: header `city_id,lat,lon,size_m,graph_path`, no quoting.
inline std::vector<CityRecord> parse_city_list(std::istream& in) {
    std::vector<CityRecord> cities;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError(1, "empty city list");
    ++line_no;
    if (detail::strip_cr(line) != kCityListHeader) {
        throw ParseError(1, std::string("city list header must be '") + kCityListHeader + "'");
    }
    while (std::getline(in, line)) {
        ++line_no;
        const std::string row = detail::strip_cr(line);
        if (row.empty()) continue;
        const auto fields = detail::split_csv_line(row);
        if (fields.size() != 5) {
            throw ParseError(line_no, "expected 5 fields, got " + std::to_string(fields.size()));
        }
        CityRecord rec;
        rec.city_id = fields[0];
        rec.center.lat = detail::parse_csv_double(fields[1], line_no, "lat");
        rec.center.lon = detail::parse_csv_double(fields[2], line_no, "lon");
        rec.a_m = detail::parse_csv_double(fields[3], line_no, "size_m");
        rec.graph_path = fields[4];
        if (!(rec.a_m > 0.0)) throw ParseError(line_no, "size_m must be positive");
        cities.push_back(std::move(rec));
    }
    return cities;
}

inline void write_city_list(const std::vector<CityRecord>& cities, std::ostream& os) {
    os << kCityListHeader << "\n";
    char buf[64];
    for (const CityRecord& c : cities) {
        std::snprintf(buf, sizeof(buf), "%.7f,%.7f", c.center.lat, c.center.lon);
        os << c.city_id << "," << buf << "," << c.a_m << "," << c.graph_path << "\n";
    }
}

// Runs the full pipeline for one city: parse inputs, rasterize, fuse every
// feature raster in turn into the same graph. Returns one report per feature.
// When out_path is non-empty the fused graph is written there.
inline std::vector<FusionReport> process_city(const CityRecord& city, double r_m,
                                              const FuseOptions& base_opts = {},
                                              const std::string& out_path = "") {
    std::ifstream gin(city.graph_path);
    if (!gin) throw Error("cannot open graph file '" + city.graph_path + "'");
    RoadGraph graph = parse_geojson(gin);

    const GridSpec spec = derive_spec(city.a_m, r_m);
    const CenterList centers = rasterize(city.center, spec);

    std::vector<FusionReport> reports;
    for (const auto& [feature, raster_path] : city.features) {
        std::ifstream rin(raster_path);
        if (!rin) throw Error("cannot open raster file '" + raster_path + "'");
        const RasterGrid raster = parse_ascii_grid(rin, feature);
        FuseOptions opts = base_opts;
        opts.city_id = city.city_id;
        auto [fused, report] = fuse(graph, raster, centers, spec, feature, opts);
        graph = std::move(fused);
        reports.push_back(std::move(report));
    }
    if (!out_path.empty()) {
        std::ostringstream os;
        write_geojson(graph, os);
        write_file_atomic(out_path, os.str());
    }
    return reports;
}

// One isolated worker per city; a failing city yields an error record without
// aborting the batch, and the report list is independent of the worker count.
inline std::vector<FusionReport> run_batch(const std::vector<CityRecord>& cities, double r_m,
                                           int parallelism, const std::string& out_dir = "",
                                           const FuseOptions& base_opts = {}) {
    std::vector<std::vector<FusionReport>> per_city(cities.size());
    const auto work_one = [&](std::size_t k) {
        const CityRecord& city = cities[k];
        try {
            std::string out_path;
            if (!out_dir.empty()) {
                out_path = (std::filesystem::path(out_dir) / (city.city_id + ".fused.geojson")).string();
            }
            per_city[k] = process_city(city, r_m, base_opts, out_path);
        } catch (const std::exception& e) {
            FusionReport err;
            err.city_id = city.city_id;
            err.status = "error";
            err.error = e.what();
            per_city[k] = {std::move(err)};
        }
    };

    const std::size_t workers =
        std::min<std::size_t>(std::max(parallelism, 1), std::max<std::size_t>(cities.size(), 1));
    if (workers <= 1) {
        for (std::size_t k = 0; k < cities.size(); ++k) work_one(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t k = next.fetch_add(1); k < cities.size(); k = next.fetch_add(1)) {
                    work_one(k);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }

    std::vector<FusionReport> reports;
    for (auto& group : per_city) {
        for (auto& r : group) reports.push_back(std::move(r));
    }
    return reports;
}

// ---------------------------------------------------------------------------
// Synthetic fixtures.
// ---------------------------------------------------------------------------

namespace detail {

// Deterministic uniform double in [0, 1) straight from the engine's bits, so
// fixture bytes do not depend on the standard library's distribution code.
class SyntheticRng {
public:
    explicit SyntheticRng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {}

    double u01() {
        // splitmix64 step
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z ^= z >> 31;
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    std::uint64_t pick(std::uint64_t n) { return static_cast<std::uint64_t>(u01() * static_cast<double>(n)); }

private:
    std::uint64_t state_;
};

}  // namespace detail

// Pseudo-random road graph covering the city square: edges_per_cell edges per
// grid cell, midpoints inside the cell, endpoints free to cross cell (and
// city) boundaries. The first edge of every cell is long enough to cross into
// a neighbor cell. Same seed, same graph.
inline RoadGraph build_synthetic_graph(std::uint64_t seed, const GeoPoint& center,
                                       const GridSpec& spec, std::int64_t edges_per_cell) {
    detail::SyntheticRng rng(seed);
    const double cosc = degree_cos(center.lat);
    const double b = static_cast<double>(spec.b_real_m);
    static const char* kHighway[] = {"residential", "primary", "secondary"};

    RoadGraph g;
    std::int64_t edge_seq = 0;
    const auto add_edge = [&](const std::vector<GeoPoint>& geometry) {
        const std::string uid = "n" + std::to_string(2 * edge_seq);
        const std::string vid = "n" + std::to_string(2 * edge_seq + 1);
        GraphNode nu{uid, json(uid), geometry.front()};
        GraphNode nv{vid, json(vid), geometry.back()};
        g.node_index[uid] = g.nodes.size();
        g.nodes.push_back(std::move(nu));
        g.node_index[vid] = g.nodes.size();
        g.nodes.push_back(std::move(nv));

        Edge e;
        e.id = "e" + std::to_string(edge_seq);
        e.id_raw = json(e.id);
        e.u = uid;
        e.v = vid;
        e.u_raw = json(uid);
        e.v_raw = json(vid);
        e.geometry = geometry;
        e.attrs["highway"] = kHighway[rng.pick(3)];
        e.attrs["lanes"] = static_cast<std::int64_t>(1 + rng.pick(4));
        g.edge_index[e.id] = g.edges.size();
        g.edges.push_back(std::move(e));
        ++edge_seq;
    };
    const auto to_geo = [&](double mx, double my) {
        return GeoPoint{center.lat + my / kMetersPerDegree,
                        center.lon + mx / (kMetersPerDegree * cosc)};
    };

    for (std::int64_t iy = 0; iy < spec.s; ++iy) {
        for (std::int64_t ix = 0; ix < spec.s; ++ix) {
            // Cell center in meters east/north of the city center.
            const double cx = (static_cast<double>(2 * ix + 1 - spec.s)) * b / 2.0;
            const double cy = (static_cast<double>(2 * iy + 1 - spec.s)) * b / 2.0;
            for (std::int64_t k = 0; k < edges_per_cell; ++k) {
                double mx, my, half_len, angle;
                if (k == 0) {
                    // Guaranteed boundary crosser: short jitter, long reach.
                    mx = cx + rng.uniform(-0.1, 0.1) * b;
                    my = cy + rng.uniform(-0.1, 0.1) * b;
                    half_len = 0.8 * b;
                    angle = rng.u01() < 0.5 ? 0.0 : M_PI / 2.0;
                } else {
                    mx = cx + rng.uniform(-0.4, 0.4) * b;
                    my = cy + rng.uniform(-0.4, 0.4) * b;
                    half_len = rng.uniform(0.15, 0.75) * b;
                    angle = rng.uniform(0.0, 2.0 * M_PI);
                }
                const double ex = half_len * std::cos(angle);
                const double ey = half_len * std::sin(angle);
                const GeoPoint a = to_geo(mx - ex, my - ey);
                const GeoPoint c = to_geo(mx + ex, my + ey);
                if (k % 3 == 2) {
                    // Bent three-point polyline; the bend sits at the arc midpoint.
                    const GeoPoint bend = to_geo(mx - ey * 0.1, my + ex * 0.1);
                    add_edge({a, bend, c});
                } else {
                    add_edge({a, c});
                }
            }
        }
    }
    return g;
}

// s x s raster aligned with the city grid; pixel (i, j) carries the value
// i*ncols + j so per-edge ground truth is recomputable from geometry alone.
// Callers pin the city-center latitude to 0 so the single square cellsize
// matches the cell extent on both axes.
inline RasterGrid build_synthetic_raster(const GeoPoint& center, const GridSpec& spec,
                                         const std::string& feature_name = "value") {
    RasterGrid r;
    r.feature_name = feature_name;
    r.ncols = spec.s;
    r.nrows = spec.s;
    r.cellsize = static_cast<double>(spec.b_real_m) / kMetersPerDegree;
    r.xllcorner = center.lon - static_cast<double>(spec.s) / 2.0 * r.cellsize;
    r.yllcorner = center.lat - static_cast<double>(spec.s) / 2.0 * r.cellsize;
    r.nodata = -9999.0;
    r.values.resize(static_cast<std::size_t>(spec.s * spec.s));
    for (std::int64_t i = 0; i < spec.s; ++i) {
        for (std::int64_t j = 0; j < spec.s; ++j) {
            r.values[static_cast<std::size_t>(i * spec.s + j)] = static_cast<double>(i * spec.s + j);
        }
    }
    return r;
}

// Writes a synthetic city's graph and raster to the given paths and returns
// the matching batch record. Deterministic: same seed, identical file bytes.
inline CityRecord gen_synthetic(std::uint64_t seed, double a_m, double r_m,
                                std::int64_t edges_per_cell, const std::string& graph_path,
                                const std::string& raster_path,
                                const std::string& feature_name = "value") {
    if (edges_per_cell < 0) throw InvalidSize("edges_per_cell must be >= 0");
    const GridSpec spec = derive_spec(a_m, r_m);

    detail::SyntheticRng seed_rng(seed * 0x51ed2701u + 17u);
    const GeoPoint center{0.0, seed_rng.uniform(-170.0, 170.0)};

    const RoadGraph graph = build_synthetic_graph(seed, center, spec, edges_per_cell);
    const RasterGrid raster = build_synthetic_raster(center, spec, feature_name);

    std::ostringstream gs;
    write_geojson(graph, gs);
    write_file_atomic(graph_path, gs.str());
    std::ostringstream rs;
    write_ascii_grid(raster, rs);
    write_file_atomic(raster_path, rs.str());

    CityRecord rec;
    rec.city_id = "synth" + std::to_string(seed);
    rec.center = center;
    rec.a_m = a_m;
    rec.graph_path = graph_path;
    rec.features = {{feature_name, raster_path}};
    return rec;
}

}  // namespace maprf
