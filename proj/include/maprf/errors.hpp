#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace maprf {

// Base class for all domain errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Degree<->meter conversion is degenerate near the poles.
class PolarRegion : public Error {
public:
    explicit PolarRegion(double lat)
        : Error("latitude " + std::to_string(lat) + " is inside the polar guard band (|lat| >= 89)") {}
};

// City size or resolution out of range (including A/r rounding to zero steps).
class InvalidSize : public Error {
public:
    explicit InvalidSize(const std::string& msg) : Error(msg) {}
};

// The grid-count check (#centers == G) or a perfect-square layer count failed.
class CountMismatch : public Error {
public:
    CountMismatch(std::int64_t expected_count, std::int64_t got_count, const std::string& stage)
        : Error("count mismatch at " + stage + ": expected " + std::to_string(expected_count) +
                ", got " + std::to_string(got_count)),
          expected(expected_count),
          got(got_count) {}

    std::int64_t expected;
    std::int64_t got;
};

// Unusable input file (raster header, GeoJSON structure, city list).
class ParseError : public Error {
public:
    ParseError(std::size_t line_no, const std::string& why)
        : Error("parse error at line " + std::to_string(line_no) + ": " + why),
          line(line_no),
          reason(why) {}

    explicit ParseError(const std::string& why)
        : Error("parse error: " + why), line(0), reason(why) {}

    std::size_t line;
    std::string reason;
};

// Query point or box does not intersect the raster extent.
class OutOfExtent : public Error {
public:
    OutOfExtent() : Error("query outside raster extent") {}
};

// Queried pixel holds the nodata sentinel.
class NoData : public Error {
public:
    NoData() : Error("raster pixel holds the nodata sentinel") {}
};

class UnknownEdge : public Error {
public:
    explicit UnknownEdge(const std::string& id) : Error("unknown edge id: " + id) {}
};

// The per-cell edge sets failed to partition the global edge set.
class ConservationViolation : public Error {
public:
    ConservationViolation(std::int64_t expected_count, std::int64_t got_count)
        : Error("edge conservation violated: expected " + std::to_string(expected_count) +
                " assigned edges, got " + std::to_string(got_count)),
          expected(expected_count),
          got(got_count) {}

    std::int64_t expected;
    std::int64_t got;
};

// Too many grid cells had no usable raster value.
class RasterCoverageError : public Error {
public:
    RasterCoverageError(std::int64_t failed_cells, std::int64_t total_cells, double threshold)
        : Error("raster coverage too low: " + std::to_string(failed_cells) + " of " +
                std::to_string(total_cells) + " cells unusable (threshold " +
                std::to_string(threshold) + ")") {}
};

}  // namespace maprf
