#pragma once

// Coordinate primitives shared by every other header: WGS84-style degree
// coordinates, exact integer half-meter offsets from a city center, and
// half-open bounding boxes.
//
// All meter<->degree conversion uses the equirectangular approximation with a
// single constant of 111320 m per degree and cos(latitude) longitude scaling,
// evaluated once at the city-center latitude for the whole city. That keeps
// the lattice affine so the s x s cell boxes tile the city square exactly.

#include <cmath>
#include <compare>
#include <cstdint>

#include "maprf/errors.hpp"

namespace maprf {

inline constexpr double kMetersPerDegree = 111320.0;

// Latitudes at or beyond this are rejected: cos(lat) scaling degenerates.
inline constexpr double kPolarGuardLat = 89.0;

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

// Exact integer offsets from a city center, in half-meter units (dx east,
// dy north). Half meters because box half-sides B/2 may be half-integral
// when B is odd. No floating representation enters lattice arithmetic.
struct LocalOffset {
    std::int64_t dx = 0;
    std::int64_t dy = 0;

    friend bool operator==(const LocalOffset&, const LocalOffset&) = default;
};

// Canonical row-major order: by dy, then dx.
inline bool canonical_less(const LocalOffset& a, const LocalOffset& b) {
    if (a.dy != b.dy) return a.dy < b.dy;
    return a.dx < b.dx;
}

// Half-open box: a point belongs iff min <= coord < max on both axes, so a
// boundary point is never owned by two adjacent cells.
struct BBox {
    double min_lat = 0.0;
    double max_lat = 0.0;
    double min_lon = 0.0;
    double max_lon = 0.0;

    bool contains(const GeoPoint& p) const {
        return p.lat >= min_lat && p.lat < max_lat && p.lon >= min_lon && p.lon < max_lon;
    }

    GeoPoint center() const {
        return GeoPoint{(min_lat + max_lat) / 2.0, (min_lon + max_lon) / 2.0};
    }

    friend bool operator==(const BBox&, const BBox&) = default;
};

// Degree spans of a length measured in meters: dlat along latitude and the
// cos-scaled dlon along longitude.
struct DegreeSpan {
    double dlat = 0.0;
    double dlon = 0.0;
};

inline double degree_cos(double lat_deg) {
    return std::cos(lat_deg * M_PI / 180.0);
}

// Converts a length in meters to degree spans at the given latitude.
inline DegreeSpan meters_to_degrees(double b_meters, double at_lat) {
    if (std::abs(at_lat) >= kPolarGuardLat) throw PolarRegion(at_lat);
    if (!(b_meters > 0.0)) throw InvalidSize("meters_to_degrees requires a positive length");
    return DegreeSpan{b_meters / kMetersPerDegree,
                      b_meters / (kMetersPerDegree * degree_cos(at_lat))};
}

// Decodes an integer half-meter offset into degrees, scaling at the city
// center latitude. Pure: identical inputs give bit-identical output, which is
// what lets adjacent cell boxes share exactly equal boundary coordinates.
inline GeoPoint offset_to_geo(const GeoPoint& center, const LocalOffset& off) {
    if (std::abs(center.lat) >= kPolarGuardLat) throw PolarRegion(center.lat);
    const double dy_m = static_cast<double>(off.dy) * 0.5;
    const double dx_m = static_cast<double>(off.dx) * 0.5;
    return GeoPoint{center.lat + dy_m / kMetersPerDegree,
                    center.lon + dx_m / (kMetersPerDegree * degree_cos(center.lat))};
}

// Box of side b_real_m (meters) around a center, with the degree spans
// evaluated at the city-center latitude.
inline BBox cell_bbox(const GeoPoint& center, double b_real_m, double city_center_lat) {
    const DegreeSpan span = meters_to_degrees(b_real_m, city_center_lat);
    return BBox{center.lat - span.dlat / 2.0, center.lat + span.dlat / 2.0,
                center.lon - span.dlon / 2.0, center.lon + span.dlon / 2.0};
}

// Lattice-exact form: bounds are decoded from the two corner offsets, so the
// shared boundary of two adjacent cells is the same float in both boxes and
// the half-open convention yields an exact partition of the city square.
inline BBox cell_bbox(const GeoPoint& city_center, const LocalOffset& cell_off,
                      std::int64_t b_real_m) {
    const GeoPoint lo = offset_to_geo(city_center, LocalOffset{cell_off.dx - b_real_m, cell_off.dy - b_real_m});
    const GeoPoint hi = offset_to_geo(city_center, LocalOffset{cell_off.dx + b_real_m, cell_off.dy + b_real_m});
    return BBox{lo.lat, hi.lat, lo.lon, hi.lon};
}

}  // namespace maprf
