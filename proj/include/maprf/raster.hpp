#pragma once

// ESRI ASCII grid raster store: parsing, serialisation, and point / box value
// queries for one named feature (e.g. a pollutant concentration field).

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "maprf/errors.hpp"
#include "maprf/geo.hpp"

namespace maprf {

// Row-major grid of feature values; row 0 is the northernmost. Pixel (i, j)
// has its center at lon = xllcorner + (j+0.5)*cellsize,
// lat = yllcorner + (nrows-i-0.5)*cellsize. Immutable after parsing.
struct RasterGrid {
    std::int64_t ncols = 0;
    std::int64_t nrows = 0;
    double xllcorner = 0.0;
    double yllcorner = 0.0;
    double cellsize = 0.0;
    double nodata = -9999.0;
    std::vector<double> values;
    std::string feature_name;

    double at(std::int64_t row, std::int64_t col) const {
        return values[static_cast<std::size_t>(row * ncols + col)];
    }

    GeoPoint pixel_center(std::int64_t row, std::int64_t col) const {
        return GeoPoint{yllcorner + (static_cast<double>(nrows - row) - 0.5) * cellsize,
                        xllcorner + (static_cast<double>(col) + 0.5) * cellsize};
    }

    BBox extent() const {
        return BBox{yllcorner, yllcorner + static_cast<double>(nrows) * cellsize,
                    xllcorner, xllcorner + static_cast<double>(ncols) * cellsize};
    }

    friend bool operator==(const RasterGrid&, const RasterGrid&) = default;
};

namespace detail {

inline bool parse_double_token(const std::string& tok, double& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace detail

// Parses the six-line header (ncols, nrows, xllcorner, yllcorner, cellsize,
// NODATA_value; case-insensitive keys, any order) followed by nrows*ncols
// whitespace-separated values, top row first.
inline RasterGrid parse_ascii_grid(std::istream& in, const std::string& feature_name = "") {
    RasterGrid g;
    g.feature_name = feature_name;

    std::map<std::string, double> header;
    std::string line;
    std::size_t line_no = 0;
    std::string data_carry;  // first non-header line already consumed

    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;  // blank line
        const std::string lk = detail::lower(key);
        if (lk == "ncols" || lk == "nrows" || lk == "xllcorner" || lk == "yllcorner" ||
            lk == "cellsize" || lk == "nodata_value") {
            std::string val;
            if (!(ls >> val)) throw ParseError(line_no, "header key '" + key + "' has no value");
            double v = 0.0;
            if (!detail::parse_double_token(val, v)) {
                throw ParseError(line_no, "header value '" + val + "' is not a number");
            }
            if (header.count(lk)) throw ParseError(line_no, "duplicate header key '" + key + "'");
            header[lk] = v;
        } else {
            data_carry = line;
            break;
        }
    }

    for (const char* req : {"ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value"}) {
        if (!header.count(req)) throw ParseError(line_no, std::string("missing header key '") + req + "'");
    }
    g.ncols = static_cast<std::int64_t>(header["ncols"]);
    g.nrows = static_cast<std::int64_t>(header["nrows"]);
    g.xllcorner = header["xllcorner"];
    g.yllcorner = header["yllcorner"];
    g.cellsize = header["cellsize"];
    g.nodata = header["nodata_value"];
    if (g.ncols <= 0 || g.nrows <= 0) throw ParseError(line_no, "ncols and nrows must be positive");
    if (!(g.cellsize > 0.0)) throw ParseError(line_no, "cellsize must be positive");

    const std::size_t expected = static_cast<std::size_t>(g.ncols * g.nrows);
    g.values.reserve(expected);
    const auto consume_tokens = [&](const std::string& text, std::size_t at_line) {
        std::istringstream ts(text);
        std::string tok;
        while (ts >> tok) {
            double v = 0.0;
            if (!detail::parse_double_token(tok, v)) {
                throw ParseError(at_line, "data token '" + tok + "' is not a number");
            }
            g.values.push_back(v);
        }
    };
    if (!data_carry.empty()) consume_tokens(data_carry, line_no);
    while (std::getline(in, line)) {
        ++line_no;
        consume_tokens(line, line_no);
    }
    if (g.values.size() != expected) {
        throw ParseError(line_no, "value count " + std::to_string(g.values.size()) +
                                      " does not match ncols*nrows = " + std::to_string(expected));
    }
    return g;
}

// Serialisation with full double round-trip precision; parse(write(g)) == g
// bit-exactly on every field.
inline void write_ascii_grid(const RasterGrid& g, std::ostream& os) {
    char buf[64];
    const auto num = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    os << "ncols " << g.ncols << "\n";
    os << "nrows " << g.nrows << "\n";
    os << "xllcorner " << num(g.xllcorner) << "\n";
    os << "yllcorner " << num(g.yllcorner) << "\n";
    os << "cellsize " << num(g.cellsize) << "\n";
    os << "NODATA_value " << num(g.nodata) << "\n";
    for (std::int64_t i = 0; i < g.nrows; ++i) {
        for (std::int64_t j = 0; j < g.ncols; ++j) {
            if (j) os << ' ';
            os << num(g.at(i, j));
        }
        os << "\n";
    }
}

// Value of the pixel whose half-open cell contains p.
inline double query_point(const RasterGrid& g, const GeoPoint& p) {
    if (!g.extent().contains(p)) throw OutOfExtent();
    std::int64_t col = static_cast<std::int64_t>(std::floor((p.lon - g.xllcorner) / g.cellsize));
    std::int64_t row_from_bottom =
        static_cast<std::int64_t>(std::floor((p.lat - g.yllcorner) / g.cellsize));
    col = std::clamp<std::int64_t>(col, 0, g.ncols - 1);
    row_from_bottom = std::clamp<std::int64_t>(row_from_bottom, 0, g.nrows - 1);
    const double v = g.at(g.nrows - 1 - row_from_bottom, col);
    if (v == g.nodata) throw NoData();
    return v;
}

// Arithmetic mean of all non-nodata pixel values whose centers fall inside
// the half-open box. When no usable center falls inside (box smaller than a
// pixel, or every candidate is nodata), falls back to a point query at the
// box center.
inline double query_bbox_mean(const RasterGrid& g, const BBox& box) {
    const BBox ext = g.extent();
    const bool overlaps = box.min_lon < ext.max_lon && box.max_lon > ext.min_lon &&
                          box.min_lat < ext.max_lat && box.max_lat > ext.min_lat;
    if (!overlaps) throw OutOfExtent();

    // Candidate index ranges from the box bounds, then an exact half-open
    // re-check per center to absorb the division rounding.
    const auto col_of = [&g](double lon) { return (lon - g.xllcorner) / g.cellsize - 0.5; };
    const auto row_b_of = [&g](double lat) { return (lat - g.yllcorner) / g.cellsize - 0.5; };
    std::int64_t j0 = static_cast<std::int64_t>(std::ceil(col_of(box.min_lon))) - 1;
    std::int64_t j1 = static_cast<std::int64_t>(std::floor(col_of(box.max_lon))) + 1;
    std::int64_t rb0 = static_cast<std::int64_t>(std::ceil(row_b_of(box.min_lat))) - 1;
    std::int64_t rb1 = static_cast<std::int64_t>(std::floor(row_b_of(box.max_lat))) + 1;
    j0 = std::max<std::int64_t>(j0, 0);
    j1 = std::min<std::int64_t>(j1, g.ncols - 1);
    rb0 = std::max<std::int64_t>(rb0, 0);
    rb1 = std::min<std::int64_t>(rb1, g.nrows - 1);

    double sum = 0.0;
    std::int64_t count = 0;
    for (std::int64_t rb = rb0; rb <= rb1; ++rb) {
        const std::int64_t i = g.nrows - 1 - rb;
        for (std::int64_t j = j0; j <= j1; ++j) {
            if (!box.contains(g.pixel_center(i, j))) continue;
            const double v = g.at(i, j);
            if (v == g.nodata) continue;
            sum += v;
            ++count;
        }
    }
    if (count > 0) return sum / static_cast<double>(count);
    return query_point(g, box.center());
}

}  // namespace maprf
