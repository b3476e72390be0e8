#pragma once

// Iterative perfect-square map rasterisation: derive grid parameters from
// city size A and raster resolution r, grow the virtual vertex lattice from
// the city center by repeated corner expansion, then expand once more with
// the real box size to obtain the s*s grid-cell centers.
//
// All lattice arithmetic is exact: vertices live on an integer half-meter
// lattice and duplicate removal compares integers, so the grid-count check
// can demand exact equality at any resolution. A floating-degree path with
// decimal-rounding dedup (rasterize_quantized) is kept as a compatibility
// mode to demonstrate the precision failure the integer lattice eliminates.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "maprf/errors.hpp"
#include "maprf/geo.hpp"

namespace maprf {

enum class Parity { trivial, even, odd };

inline const char* to_string(Parity p) {
    switch (p) {
        case Parity::even: return "even";
        case Parity::odd: return "odd";
        default: return "trivial";
    }
}

// Derived rasterisation parameters for one city.
struct GridSpec {
    double a_m = 0.0;            // city side length A, meters
    double r_m = 0.0;            // target resolution r, meters
    std::int64_t s = 0;          // steps: nearest integer of A/r
    std::int64_t g = 0;          // target grid count, s^2
    Parity parity = Parity::trivial;
    std::int64_t i_total = 0;    // total iterations
    std::int64_t i_vir = 0;      // virtual iterations, i_total - 1
    std::int64_t b_real_m = 0;   // real box side, meters
    std::int64_t b_vir_m = 0;    // virtual box side, meters
};

// Nearest integer, halves away from zero.
inline std::int64_t round_half_away(double x) {
    return std::llround(x);
}

inline GridSpec derive_spec(double a_m, double r_m) {
    if (!(a_m > 0.0) || !(r_m > 0.0)) {
        throw InvalidSize("city size and resolution must be positive");
    }
    GridSpec spec;
    spec.a_m = a_m;
    spec.r_m = r_m;
    spec.s = round_half_away(a_m / r_m);
    if (spec.s < 1) {
        throw InvalidSize("A/r rounds to zero steps (resolution coarser than twice the city size)");
    }
    spec.g = spec.s * spec.s;
    spec.b_real_m = round_half_away(a_m / static_cast<double>(spec.s));
    if (spec.s == 1) {
        spec.parity = Parity::trivial;
        spec.i_total = 0;
        spec.i_vir = 0;
        spec.b_vir_m = spec.b_real_m;
    } else if (spec.s % 2 == 0) {
        spec.parity = Parity::even;
        spec.i_total = spec.s / 2;
        spec.b_vir_m = 2 * spec.b_real_m;
    } else {
        spec.parity = Parity::odd;
        spec.i_total = spec.s - 1;
        spec.b_vir_m = spec.b_real_m;
    }
    if (spec.i_total >= 1) spec.i_vir = spec.i_total - 1;
    return spec;
}

// The evolving center set of one rasterisation, anchored at a city center.
// offsets are pairwise distinct, sorted canonically (dy then dx); decoded[i]
// is offset_to_geo(city_center, offsets[i]). virtual_counts records the
// distinct-vertex count after each virtual iteration ({4, 9, 16, ...}).
struct CenterList {
    GeoPoint city_center;
    std::vector<LocalOffset> offsets;
    std::vector<GeoPoint> decoded;
    std::vector<std::size_t> virtual_counts;
};

// The four corners of a box of side b_m meters centered on p: offsets of
// +-B/2 meters, i.e. +-b_m in half-meter units. Integer-exact.
inline std::array<LocalOffset, 4> expand_corners(const LocalOffset& p, std::int64_t b_m) {
    return {LocalOffset{p.dx - b_m, p.dy - b_m}, LocalOffset{p.dx + b_m, p.dy - b_m},
            LocalOffset{p.dx - b_m, p.dy + b_m}, LocalOffset{p.dx + b_m, p.dy + b_m}};
}

namespace detail {

// Expand every vertex into its four corners, then deduplicate on exact
// integer keys. Result is canonically sorted.
inline std::vector<LocalOffset> expand_all(const std::vector<LocalOffset>& verts, std::int64_t b_m) {
    std::vector<LocalOffset> out;
    out.reserve(verts.size() * 4);
    for (const LocalOffset& v : verts) {
        for (const LocalOffset& c : expand_corners(v, b_m)) out.push_back(c);
    }
    std::sort(out.begin(), out.end(), canonical_less);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace detail

// Grows the vertex lattice through the virtual iterations and expands it to
// the final grid centers. Verifies the perfect-square counts after every
// virtual iteration and #centers == G before returning.
inline CenterList rasterize(const GeoPoint& center, const GridSpec& spec) {
    CenterList out;
    out.city_center = center;

    if (spec.parity == Parity::trivial) {
        out.offsets = {LocalOffset{0, 0}};
    } else if (spec.i_total == 1) {
        // No virtual layer: one real expansion of the city center gives the 4 centers.
        out.offsets = detail::expand_all({LocalOffset{0, 0}}, spec.b_real_m);
    } else {
        std::vector<LocalOffset> verts{LocalOffset{0, 0}};
        for (std::int64_t n = 0; n < spec.i_vir; ++n) {
            verts = detail::expand_all(verts, spec.b_vir_m);
            out.virtual_counts.push_back(verts.size());
            const std::int64_t expected = (n + 2) * (n + 2);
            if (static_cast<std::int64_t>(verts.size()) != expected) {
                throw CountMismatch(expected, static_cast<std::int64_t>(verts.size()),
                                    "virtual iteration " + std::to_string(n));
            }
        }
        out.offsets = detail::expand_all(verts, spec.b_real_m);
    }

    if (static_cast<std::int64_t>(out.offsets.size()) != spec.g) {
        throw CountMismatch(spec.g, static_cast<std::int64_t>(out.offsets.size()), "final grid");
    }
    out.decoded.reserve(out.offsets.size());
    for (const LocalOffset& off : out.offsets) {
        out.decoded.push_back(offset_to_geo(center, off));
    }
    return out;
}

// Compatibility mode reproducing the original floating-point pipeline: all
// expansion arithmetic runs in decimal degrees and duplicates are detected by
// rounding both coordinates to `decimals` places. Raises CountMismatch when
// quantisation merges or splits lattice points, which is expected behaviour
// for lattice spacings near or below the rounding grid.
inline CenterList rasterize_quantized(const GeoPoint& center, const GridSpec& spec, int decimals) {
    if (decimals < 1 || decimals > 9) {
        throw std::invalid_argument("decimals must be in [1, 9]");
    }
    const double scale = std::pow(10.0, decimals);
    const auto key = [scale](const GeoPoint& p) {
        return std::pair<std::int64_t, std::int64_t>{std::llround(p.lat * scale),
                                                     std::llround(p.lon * scale)};
    };
    // Dedup keeps the first occurrence, in insertion order.
    const auto dedup = [&key](std::vector<GeoPoint>& pts) {
        std::vector<std::pair<std::int64_t, std::int64_t>> seen;
        std::vector<GeoPoint> kept;
        kept.reserve(pts.size());
        for (const GeoPoint& p : pts) {
            const auto k = key(p);
            if (std::find(seen.begin(), seen.end(), k) == seen.end()) {
                seen.push_back(k);
                kept.push_back(p);
            }
        }
        pts = std::move(kept);
    };
    const auto expand_deg = [](const std::vector<GeoPoint>& pts, const DegreeSpan& box) {
        std::vector<GeoPoint> out;
        out.reserve(pts.size() * 4);
        for (const GeoPoint& p : pts) {
            const double hlat = box.dlat / 2.0;
            const double hlon = box.dlon / 2.0;
            out.push_back(GeoPoint{p.lat - hlat, p.lon - hlon});
            out.push_back(GeoPoint{p.lat - hlat, p.lon + hlon});
            out.push_back(GeoPoint{p.lat + hlat, p.lon - hlon});
            out.push_back(GeoPoint{p.lat + hlat, p.lon + hlon});
        }
        return out;
    };

    CenterList out;
    out.city_center = center;
    std::vector<GeoPoint> pts{center};

    if (spec.parity == Parity::trivial) {
        // Single center, nothing to expand.
    } else if (spec.i_total == 1) {
        const DegreeSpan real_span = meters_to_degrees(static_cast<double>(spec.b_real_m), center.lat);
        pts = expand_deg(pts, real_span);
        dedup(pts);
    } else {
        const DegreeSpan vir_span = meters_to_degrees(static_cast<double>(spec.b_vir_m), center.lat);
        const DegreeSpan real_span = meters_to_degrees(static_cast<double>(spec.b_real_m), center.lat);
        for (std::int64_t n = 0; n < spec.i_vir; ++n) {
            pts = expand_deg(pts, vir_span);
            dedup(pts);
            out.virtual_counts.push_back(pts.size());
            const std::int64_t expected = (n + 2) * (n + 2);
            if (static_cast<std::int64_t>(pts.size()) != expected) {
                throw CountMismatch(expected, static_cast<std::int64_t>(pts.size()),
                                    "quantized virtual iteration " + std::to_string(n));
            }
        }
        pts = expand_deg(pts, real_span);
        dedup(pts);
    }

    if (static_cast<std::int64_t>(pts.size()) != spec.g) {
        throw CountMismatch(spec.g, static_cast<std::int64_t>(pts.size()), "quantized final grid");
    }

    // Snap the surviving float representatives back onto the half-meter
    // lattice for the canonical ordering; decoded keeps the float values the
    // expansion actually produced.
    const double cosc = degree_cos(center.lat);
    std::vector<std::pair<LocalOffset, GeoPoint>> tagged;
    tagged.reserve(pts.size());
    for (const GeoPoint& p : pts) {
        LocalOffset off{std::llround((p.lon - center.lon) * kMetersPerDegree * cosc * 2.0),
                        std::llround((p.lat - center.lat) * kMetersPerDegree * 2.0)};
        tagged.emplace_back(off, p);
    }
    std::sort(tagged.begin(), tagged.end(),
              [](const auto& a, const auto& b) { return canonical_less(a.first, b.first); });
    for (auto& [off, p] : tagged) {
        out.offsets.push_back(off);
        out.decoded.push_back(p);
    }
    return out;
}

// CSV serialisation: header `lat,lon`, decimal degrees with 7 fractional digits.
inline void write_centers_csv(const CenterList& centers, std::ostream& os) {
    os << "lat,lon\n";
    char buf[64];
    for (const GeoPoint& p : centers.decoded) {
        std::snprintf(buf, sizeof(buf), "%.7f,%.7f\n", p.lat, p.lon);
        os << buf;
    }
}

}  // namespace maprf
