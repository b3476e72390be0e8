#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <sstream>

#include "maprf/batch.hpp"
#include "maprf/graph.hpp"

using namespace maprf;

namespace {

RoadGraph parse_str(const std::string& text) {
    std::istringstream in(text);
    return parse_geojson(in);
}

const char* kTwoNodeGraph = R"({"type":"FeatureCollection","features":[
  {"type":"Feature","geometry":{"type":"Point","coordinates":[2.0,1.0]},"properties":{"id":1}},
  {"type":"Feature","geometry":{"type":"Point","coordinates":[2.1,1.1]},"properties":{"id":2}},
  {"type":"Feature","geometry":{"type":"LineString","coordinates":[[2.0,1.0],[2.1,1.1]]},
   "properties":{"id":10,"u":1,"v":2,"highway":"residential","lanes":2,"maxspeed":50.5,"oneway":true}}
]})";

}  // namespace

TEST_CASE("parse a two-node one-edge collection") {
    const RoadGraph g = parse_str(kTwoNodeGraph);
    REQUIRE(g.nodes.size() == 2);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.nodes[0].pos == GeoPoint{1.0, 2.0});
    const Edge& e = g.edges[0];
    CHECK(e.id == "10");
    CHECK(e.u == "1");
    CHECK(e.v == "2");
    REQUIRE(e.geometry.size() == 2);
    // id/u/v stay out of the attribute map; everything else lands in it.
    CHECK(e.attrs ==
          json({{"highway", "residential"}, {"lanes", 2}, {"maxspeed", 50.5}, {"oneway", true}}));
}

TEST_CASE("parse rejects broken collections") {
    SECTION("dangling endpoint reference") {
        CHECK_THROWS_AS(parse_str(R"({"type":"FeatureCollection","features":[
          {"type":"Feature","geometry":{"type":"Point","coordinates":[0,0]},"properties":{"id":"a"}},
          {"type":"Feature","geometry":{"type":"LineString","coordinates":[[0,0],[1,1]]},
           "properties":{"id":"e","u":"a","v":"missing"}}]})"),
                        ParseError);
    }
    SECTION("geometry does not meet its nodes") {
        CHECK_THROWS_AS(parse_str(R"({"type":"FeatureCollection","features":[
          {"type":"Feature","geometry":{"type":"Point","coordinates":[0,0]},"properties":{"id":"a"}},
          {"type":"Feature","geometry":{"type":"Point","coordinates":[1,1]},"properties":{"id":"b"}},
          {"type":"Feature","geometry":{"type":"LineString","coordinates":[[0,0],[0.9,1]]},
           "properties":{"id":"e","u":"a","v":"b"}}]})"),
                        ParseError);
    }
    SECTION("missing required properties") {
        CHECK_THROWS_AS(parse_str(R"({"type":"FeatureCollection","features":[
          {"type":"Feature","geometry":{"type":"Point","coordinates":[0,0]},"properties":{}}]})"),
                        ParseError);
    }
    SECTION("not a FeatureCollection") {
        CHECK_THROWS_AS(parse_str(R"({"type":"Feature"})"), ParseError);
    }
    SECTION("malformed JSON reports the line") {
        try {
            parse_str("{\n\"type\": \"FeatureCollection\",\n\"features\": [},\n}");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line == 3);
        }
    }
    SECTION("duplicate edge id") {
        CHECK_THROWS_AS(parse_str(R"({"type":"FeatureCollection","features":[
          {"type":"Feature","geometry":{"type":"Point","coordinates":[0,0]},"properties":{"id":"a"}},
          {"type":"Feature","geometry":{"type":"Point","coordinates":[1,1]},"properties":{"id":"b"}},
          {"type":"Feature","geometry":{"type":"LineString","coordinates":[[0,0],[1,1]]},
           "properties":{"id":"e","u":"a","v":"b"}},
          {"type":"Feature","geometry":{"type":"LineString","coordinates":[[1,1],[0,0]]},
           "properties":{"id":"e","u":"b","v":"a"}}]})"),
                        ParseError);
    }
}

TEST_CASE("round trip: parse, serialise, parse is identity") {
    const RoadGraph g = parse_str(kTwoNodeGraph);
    std::ostringstream os;
    write_geojson(g, os);
    const RoadGraph g2 = parse_str(os.str());
    CHECK(g2 == g);

    // Numeric ids keep their JSON type on the way out.
    CHECK(os.str().find("\"id\":10") != std::string::npos);
    CHECK(os.str().find("\"lanes\":2") != std::string::npos);
}

TEST_CASE("round trip preserves a generated city graph exactly") {
    const GridSpec spec = derive_spec(2000.0, 500.0);
    const RoadGraph g = build_synthetic_graph(7, {0.0, 10.0}, spec, 3);
    std::ostringstream os;
    write_geojson(g, os);
    const RoadGraph g2 = parse_str(os.str());
    CHECK(g2 == g);
}

TEST_CASE("arc midpoint walks the polyline by length") {
    // Two segments of lengths 3 and 4: half of 7 sits 0.5 into the second.
    const std::vector<GeoPoint> bent{{0.0, 0.0}, {0.0, 3.0}, {4.0, 3.0}};
    const GeoPoint mid = arc_midpoint(bent);
    CHECK(mid.lat == Catch::Approx(0.5).margin(1e-12));
    CHECK(mid.lon == Catch::Approx(3.0).margin(1e-12));

    const std::vector<GeoPoint> straight{{1.0, 1.0}, {2.0, 3.0}};
    const GeoPoint m2 = arc_midpoint(straight);
    CHECK(m2.lat == Catch::Approx(1.5).margin(1e-12));
    CHECK(m2.lon == Catch::Approx(2.0).margin(1e-12));

    // Degenerate zero-length edge.
    const std::vector<GeoPoint> zero{{5.0, 6.0}, {5.0, 6.0}};
    CHECK(arc_midpoint(zero) == GeoPoint{5.0, 6.0});
}

TEST_CASE("edges_in_bbox selects by midpoint, one cell per edge") {
    // One edge fully in the west cell, one crossing with its midpoint west.
    const RoadGraph g = parse_str(R"({"type":"FeatureCollection","features":[
      {"type":"Feature","geometry":{"type":"Point","coordinates":[0.2,0.5]},"properties":{"id":"a"}},
      {"type":"Feature","geometry":{"type":"Point","coordinates":[0.4,0.5]},"properties":{"id":"b"}},
      {"type":"Feature","geometry":{"type":"Point","coordinates":[0.8,0.4]},"properties":{"id":"c"}},
      {"type":"Feature","geometry":{"type":"Point","coordinates":[1.4,0.4]},"properties":{"id":"d"}},
      {"type":"Feature","geometry":{"type":"LineString","coordinates":[[0.2,0.5],[0.4,0.5]]},
       "properties":{"id":"inside","u":"a","v":"b"}},
      {"type":"Feature","geometry":{"type":"LineString","coordinates":[[0.8,0.4],[1.4,0.4]]},
       "properties":{"id":"crossing","u":"c","v":"d"}}
    ]})");
    const BBox west{0.0, 1.0, 0.0, 1.0};
    const BBox east{0.0, 1.0, 1.0, 2.0};
    // "crossing" starts in the west cell but its midpoint (lon 1.1) is east:
    // it belongs to the east cell and to nothing else.
    CHECK(edges_in_bbox(g, west) == std::vector<std::string>{"inside"});
    CHECK(edges_in_bbox(g, east) == std::vector<std::string>{"crossing"});
}

TEST_CASE("empty graph yields empty extraction") {
    const RoadGraph g = parse_str(R"({"type":"FeatureCollection","features":[]})");
    CHECK(edges_in_bbox(g, BBox{0, 1, 0, 1}).empty());
}

TEST_CASE("partition: cells claim every edge exactly once") {
    const GeoPoint city{-33.8688, 151.2093};
    for (double a_m : {1000.0, 2500.0, 3000.0}) {
        const GridSpec spec = derive_spec(a_m, 500.0);
        const RoadGraph g = build_synthetic_graph(99, city, spec, 4);
        const CenterList centers = rasterize(city, spec);

        std::map<std::string, int> claims;
        for (const LocalOffset& off : centers.offsets) {
            for (const std::string& id : edges_in_bbox(g, cell_bbox(city, off, spec.b_real_m))) {
                ++claims[id];
            }
        }
        REQUIRE(claims.size() == g.edges.size());
        for (const auto& [id, n] : claims) {
            INFO("edge " << id);
            CHECK(n == 1);
        }
    }
}

TEST_CASE("set_edge_attr touches exactly the named edges") {
    RoadGraph g = parse_str(kTwoNodeGraph);
    const json before = g.edges[0].attrs;

    set_edge_attr(g, {}, "pm25", 1.0);
    CHECK(g.edges[0].attrs == before);  // empty id list is the identity

    set_edge_attr(g, {"10"}, "pm25", 12.5);
    CHECK(g.edges[0].attrs["pm25"] == 12.5);
    CHECK(g.edges[0].attrs["highway"] == "residential");

    set_edge_attr(g, {"10"}, "pm25", 99.0);
    CHECK(g.edges[0].attrs["pm25"] == 99.0);  // last write wins

    CHECK_THROWS_AS(set_edge_attr(g, {"nope"}, "pm25", 1.0), UnknownEdge);
}
