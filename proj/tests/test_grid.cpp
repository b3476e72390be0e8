#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <sstream>

#include "maprf/grid.hpp"
#include "maprf/verify.hpp"

using namespace maprf;

TEST_CASE("derive_spec worked examples") {
    SECTION("even: A=3000 r=500") {
        const GridSpec s = derive_spec(3000.0, 500.0);
        CHECK(s.s == 6);
        CHECK(s.g == 36);
        CHECK(s.parity == Parity::even);
        CHECK(s.i_total == 3);
        CHECK(s.i_vir == 2);
        CHECK(s.b_real_m == 500);
        CHECK(s.b_vir_m == 1000);
    }
    SECTION("odd: A=2500 r=500") {
        const GridSpec s = derive_spec(2500.0, 500.0);
        CHECK(s.s == 5);
        CHECK(s.g == 25);
        CHECK(s.parity == Parity::odd);
        CHECK(s.i_total == 4);
        CHECK(s.i_vir == 3);
        CHECK(s.b_real_m == 500);
        CHECK(s.b_vir_m == 500);
    }
    SECTION("trivial: A=400 r=500") {
        const GridSpec s = derive_spec(400.0, 500.0);
        CHECK(s.s == 1);
        CHECK(s.g == 1);
        CHECK(s.parity == Parity::trivial);
        CHECK(s.i_total == 0);
    }
    SECTION("single expansion: A=1000 r=500") {
        const GridSpec s = derive_spec(1000.0, 500.0);
        CHECK(s.s == 2);
        CHECK(s.parity == Parity::even);
        CHECK(s.i_total == 1);
        CHECK(s.g == 4);
    }
}

TEST_CASE("derive_spec rejects impossible sizes") {
    CHECK_THROWS_AS(derive_spec(0.0, 500.0), InvalidSize);
    CHECK_THROWS_AS(derive_spec(-10.0, 500.0), InvalidSize);
    CHECK_THROWS_AS(derive_spec(3000.0, 0.0), InvalidSize);
    // A/r < 0.5 rounds to zero steps.
    CHECK_THROWS_AS(derive_spec(200.0, 500.0), InvalidSize);
}

TEST_CASE("expand_corners returns the four half-extent corners") {
    const auto c0 = expand_corners({0, 0}, 1000);
    const std::set<std::pair<std::int64_t, std::int64_t>> got0 = {
        {c0[0].dx, c0[0].dy}, {c0[1].dx, c0[1].dy}, {c0[2].dx, c0[2].dy}, {c0[3].dx, c0[3].dy}};
    CHECK(got0 == std::set<std::pair<std::int64_t, std::int64_t>>{
                      {-1000, -1000}, {-1000, 1000}, {1000, -1000}, {1000, 1000}});

    const auto c1 = expand_corners({1000, 1000}, 1000);
    const std::set<std::pair<std::int64_t, std::int64_t>> got1 = {
        {c1[0].dx, c1[0].dy}, {c1[1].dx, c1[1].dy}, {c1[2].dx, c1[2].dy}, {c1[3].dx, c1[3].dy}};
    CHECK(got1 == std::set<std::pair<std::int64_t, std::int64_t>>{
                      {0, 0}, {0, 2000}, {2000, 0}, {2000, 2000}});
}

TEST_CASE("expanding two lattice-adjacent points shares exactly two corners") {
    const auto a = expand_corners({0, 0}, 800);
    const auto b = expand_corners({1600, 0}, 800);
    std::set<std::pair<std::int64_t, std::int64_t>> sa, sb;
    for (const auto& p : a) sa.insert({p.dx, p.dy});
    for (const auto& p : b) sb.insert({p.dx, p.dy});
    std::vector<std::pair<std::int64_t, std::int64_t>> common;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
    CHECK(common.size() == 2);
}

TEST_CASE("rasterize: even worked example A=3000 r=500") {
    const GridSpec spec = derive_spec(3000.0, 500.0);
    const CenterList centers = rasterize({0.0, 0.0}, spec);
    CHECK(centers.virtual_counts == std::vector<std::size_t>{4, 9});
    REQUIRE(centers.offsets.size() == 36);

    // First canonical row: dy = -2500 half-meters, dx sweeps the odd multiples of 500.
    const std::int64_t row_dx[] = {-2500, -1500, -500, 500, 1500, 2500};
    for (int i = 0; i < 6; ++i) {
        CHECK(centers.offsets[i] == LocalOffset{row_dx[i], -2500});
    }
    CHECK_FALSE(compare_with_oracle(centers, spec).has_value());
}

TEST_CASE("rasterize: odd worked example A=2500 r=500") {
    const GridSpec spec = derive_spec(2500.0, 500.0);
    const CenterList centers = rasterize({0.0, 0.0}, spec);
    CHECK(centers.virtual_counts == std::vector<std::size_t>{4, 9, 16});
    CHECK(centers.offsets.size() == 25);
    CHECK_FALSE(compare_with_oracle(centers, spec).has_value());
}

TEST_CASE("rasterize: trivial city is just its center") {
    const GridSpec spec = derive_spec(400.0, 500.0);
    const GeoPoint center{37.77, -122.42};
    const CenterList centers = rasterize(center, spec);
    REQUIRE(centers.offsets.size() == 1);
    CHECK(centers.offsets[0] == LocalOffset{0, 0});
    CHECK(centers.decoded[0] == center);
    CHECK(centers.virtual_counts.empty());
}

TEST_CASE("rasterize: single-iteration city expands once with the real box") {
    const GridSpec spec = derive_spec(1000.0, 500.0);
    const CenterList centers = rasterize({0.0, 0.0}, spec);
    REQUIRE(centers.offsets.size() == 4);
    CHECK(centers.virtual_counts.empty());
    CHECK(centers.offsets[0] == LocalOffset{-500, -500});
    CHECK(centers.offsets[1] == LocalOffset{500, -500});
    CHECK(centers.offsets[2] == LocalOffset{-500, 500});
    CHECK(centers.offsets[3] == LocalOffset{500, 500});
}

TEST_CASE("rasterize is deterministic and canonically ordered") {
    const GridSpec spec = derive_spec(4500.0, 500.0);
    const CenterList a = rasterize({48.8566, 2.3522}, spec);
    const CenterList b = rasterize({48.8566, 2.3522}, spec);
    CHECK(a.offsets == b.offsets);
    CHECK(a.decoded == b.decoded);
    CHECK(std::is_sorted(a.offsets.begin(), a.offsets.end(), canonical_less));
}

TEST_CASE("oracle sweep: expansion equals meshgrid for s in [1, 41]") {
    std::ostringstream diag;
    CHECK(verify_sweep(41, diag));
    CHECK(diag.str().empty());
}

TEST_CASE("perfect-square growth and parity per step count") {
    for (std::int64_t s = 2; s <= 25; ++s) {
        const GridSpec spec = derive_spec(static_cast<double>(s) * 500.0, 500.0);
        CHECK(spec.parity == (s % 2 == 0 ? Parity::even : Parity::odd));
        const CenterList centers = rasterize({0.0, 0.0}, spec);
        REQUIRE(static_cast<std::int64_t>(centers.virtual_counts.size()) == spec.i_vir);
        for (std::size_t n = 0; n < centers.virtual_counts.size(); ++n) {
            CHECK(centers.virtual_counts[n] == (n + 2) * (n + 2));
        }
    }
}

TEST_CASE("compare_with_oracle flags a corrupted center list") {
    const GridSpec spec = derive_spec(3000.0, 500.0);
    CenterList centers = rasterize({0.0, 0.0}, spec);

    SECTION("perturbed offset") {
        centers.offsets[7].dx += 1;
        CHECK(compare_with_oracle(centers, spec).has_value());
    }
    SECTION("dropped center") {
        centers.offsets.pop_back();
        CHECK(compare_with_oracle(centers, spec).has_value());
    }
    SECTION("bad virtual count") {
        centers.virtual_counts[0] = 5;
        CHECK(compare_with_oracle(centers, spec).has_value());
    }
}

TEST_CASE("quantized mode agrees with the integer path at 4+ decimals") {
    const GridSpec spec = derive_spec(3000.0, 500.0);
    const GeoPoint center{0.0, 0.0};
    const CenterList exact = rasterize(center, spec);

    for (int decimals : {4, 6, 9}) {
        const CenterList quant = rasterize_quantized(center, spec, decimals);
        REQUIRE(quant.offsets.size() == exact.offsets.size());
        CHECK(quant.offsets == exact.offsets);  // snapped back to the same lattice
        for (std::size_t i = 0; i < quant.decoded.size(); ++i) {
            CHECK(quant.decoded[i].lat == Catch::Approx(exact.decoded[i].lat).margin(1e-9));
            CHECK(quant.decoded[i].lon == Catch::Approx(exact.decoded[i].lon).margin(1e-9));
        }
    }
}

TEST_CASE("quantized mode reproduces the 3-decimal duplicate-detection failure") {
    // Lattice spacing ~8.98e-4 degrees: below the 1e-3 rounding grid.
    const GridSpec spec = derive_spec(1100.0, 100.0);
    REQUIRE(spec.s == 11);
    const GeoPoint center{0.0, 0.0};

    CHECK_THROWS_AS(rasterize_quantized(center, spec, 3), CountMismatch);
    const CenterList fine = rasterize_quantized(center, spec, 4);
    CHECK(fine.offsets.size() == 121);
    // The integer path is immune by construction.
    CHECK(rasterize({0.0, 0.0}, spec).offsets.size() == 121);
}

TEST_CASE("quantized mode validates the decimals range") {
    const GridSpec spec = derive_spec(3000.0, 500.0);
    CHECK_THROWS_AS(rasterize_quantized({0.0, 0.0}, spec, 0), std::invalid_argument);
    CHECK_THROWS_AS(rasterize_quantized({0.0, 0.0}, spec, 10), std::invalid_argument);
}

TEST_CASE("center CSV has a lat,lon header and 7 fractional digits") {
    const GridSpec spec = derive_spec(1000.0, 500.0);
    const CenterList centers = rasterize({0.0, 0.0}, spec);
    std::ostringstream os;
    write_centers_csv(centers, os);
    std::istringstream is(os.str());
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "lat,lon");
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        const auto comma = line.find(',');
        REQUIRE(comma != std::string::npos);
        CHECK(line.find('.') != std::string::npos);
        // 7 digits after each decimal point
        CHECK(comma - line.find('.') - 1 == 7);
        CHECK(line.size() - line.rfind('.') - 1 == 7);
    }
    CHECK(rows == 4);
}
