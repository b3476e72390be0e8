#pragma once

// Self-check sweeps: an independent meshgrid construction of the expected
// grid centers and comparisons against the iterative expansion. The oracle
// builds the lattice directly from the spec parameters and never touches the
// expansion code, so agreement is a meaningful check.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "maprf/geo.hpp"
#include "maprf/grid.hpp"

namespace maprf {

// Direct construction: center offsets ((i+0.5) - s/2) * B on each axis,
// i.e. (2i + 1 - s) * b_real in half-meter units, row-major by dy then dx.
inline std::vector<LocalOffset> meshgrid_offsets(const GridSpec& spec) {
    std::vector<LocalOffset> out;
    out.reserve(static_cast<std::size_t>(spec.g));
    for (std::int64_t iy = 0; iy < spec.s; ++iy) {
        const std::int64_t dy = (2 * iy + 1 - spec.s) * spec.b_real_m;
        for (std::int64_t ix = 0; ix < spec.s; ++ix) {
            out.push_back(LocalOffset{(2 * ix + 1 - spec.s) * spec.b_real_m, dy});
        }
    }
    return out;
}

// Elementwise comparison after canonical sort, plus the count and
// perfect-square-sequence checks. Returns a failure description, or nullopt.
inline std::optional<std::string> compare_with_oracle(const CenterList& centers,
                                                      const GridSpec& spec) {
    if (static_cast<std::int64_t>(centers.offsets.size()) != spec.g) {
        return "center count " + std::to_string(centers.offsets.size()) + " != G=" +
               std::to_string(spec.g);
    }
    for (std::size_t n = 0; n < centers.virtual_counts.size(); ++n) {
        const std::size_t expected = (n + 2) * (n + 2);
        if (centers.virtual_counts[n] != expected) {
            return "virtual count after iteration " + std::to_string(n) + " is " +
                   std::to_string(centers.virtual_counts[n]) + ", expected " +
                   std::to_string(expected);
        }
    }
    const std::vector<LocalOffset> oracle = meshgrid_offsets(spec);
    for (std::size_t i = 0; i < oracle.size(); ++i) {
        if (!(centers.offsets[i] == oracle[i])) {
            return "offset " + std::to_string(i) + " is (" + std::to_string(centers.offsets[i].dx) +
                   "," + std::to_string(centers.offsets[i].dy) + "), expected (" +
                   std::to_string(oracle[i].dx) + "," + std::to_string(oracle[i].dy) + ")";
        }
    }
    return std::nullopt;
}

// (A, r) pairs that round to the requested step count, exercising both
// rounding directions of A/r.
inline std::vector<std::pair<double, double>> spec_pairs_for_steps(std::int64_t s) {
    std::vector<std::pair<double, double>> pairs;
    pairs.emplace_back(500.0 * static_cast<double>(s), 500.0);
    pairs.emplace_back(713.0 * static_cast<double>(s) + 300.0, 713.0);   // rounds down to s
    if (250.0 * static_cast<double>(s) - 100.0 > 0.0) {
        pairs.emplace_back(250.0 * static_cast<double>(s) - 100.0, 250.0);  // rounds up to s
    }
    return pairs;
}

// Oracle-equivalence and perfect-square-growth sweep over s in [1, max_s],
// several (A, r) pairs per s, at a few city latitudes. Prints one line per
// failure; returns true when everything agreed.
inline bool verify_sweep(std::int64_t max_s, std::ostream& diag) {
    static const GeoPoint kProbes[] = {{0.0, 0.0}, {48.8566, 2.3522}, {-33.8688, 151.2093}};
    bool ok = true;
    for (std::int64_t s = 1; s <= max_s; ++s) {
        for (const auto& [a_m, r_m] : spec_pairs_for_steps(s)) {
            const GridSpec spec = derive_spec(a_m, r_m);
            if (spec.s != s) {
                diag << "FAIL s=" << s << " A=" << a_m << " r=" << r_m
                     << ": derived steps " << spec.s << "\n";
                ok = false;
                continue;
            }
            for (const GeoPoint& center : kProbes) {
                try {
                    const CenterList centers = rasterize(center, spec);
                    if (auto err = compare_with_oracle(centers, spec)) {
                        diag << "FAIL s=" << s << " A=" << a_m << " r=" << r_m << ": " << *err
                             << "\n";
                        ok = false;
                    }
                } catch (const Error& e) {
                    diag << "FAIL s=" << s << " A=" << a_m << " r=" << r_m << ": " << e.what()
                         << "\n";
                    ok = false;
                }
            }
        }
    }
    return ok;
}

}  // namespace maprf
