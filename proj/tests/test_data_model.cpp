#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "netq/data_model.hpp"
#include "netq/errors.hpp"
#include "netq/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace netq;

TEST_CASE("compute_score basic values") {
    const ScoreRule equal;
    CHECK(compute_score(100000.0, 20000.0, equal) == doctest::Approx(120.0).epsilon(1e-15));
    CHECK(compute_score(0.0, 0.0, equal) == 0.0);
    const ScoreRule down_heavy{2.0, 1.0};
    CHECK(compute_score(50000.0, 10000.0, down_heavy) == doctest::Approx(110.0).epsilon(1e-15));
}

TEST_CASE("compute_score rejects degenerate rules") {
    CHECK_THROWS_AS(compute_score(1.0, 1.0, ScoreRule{0.0, 0.0}), DataError);
    CHECK_THROWS_AS(compute_score(1.0, 1.0, ScoreRule{-1.0, 2.0}), DataError);
}

TEST_CASE("compute_score is homogeneous in the speeds") {
    const ScoreRule rule{1.7, 0.4};
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        const double d = rng.uniform(0.0, 1e6);
        const double u = rng.uniform(0.0, 1e6);
        const double lam = rng.uniform(0.0, 50.0);
        const double lhs = compute_score(lam * d, lam * u, rule);
        const double rhs = lam * compute_score(d, u, rule);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("parse_records single row") {
    std::istringstream in("lon,lat,avg_d_kbps,avg_u_kbps,tests,devices\n"
                          "-84.39,33.75,100000,20000,5,3\n");
    const Dataset ds = parse_records(in, ScoreRule{});
    REQUIRE(ds.size() == 1);
    CHECK(ds.points[0].id == 0);
    CHECK(ds.points[0].lon == -84.39);
    CHECK(ds.points[0].lat == 33.75);
    CHECK(ds.points[0].score == doctest::Approx(120.0).epsilon(1e-15));
}

TEST_CASE("parse_records merges duplicate locations by test weight") {
    std::istringstream in("lon,lat,avg_d_kbps,avg_u_kbps,tests,devices\n"
                          "1.5,2.5,100000,10000,1,1\n"
                          "1.5,2.5,200000,30000,3,2\n");
    const Dataset ds = parse_records(in, ScoreRule{});
    REQUIRE(ds.size() == 1);
    CHECK(ds.points[0].download_kbps == doctest::Approx(175000.0).epsilon(1e-15));
    CHECK(ds.points[0].upload_kbps == doctest::Approx(25000.0).epsilon(1e-15));
    CHECK(ds.points[0].tests == 4);
    CHECK(ds.points[0].devices == 3);
}

TEST_CASE("merging preserves the total test count") {
    Rng rng(5);
    std::ostringstream src;
    src << "lon,lat,avg_d_kbps,avg_u_kbps,tests,devices\n";
    std::int64_t total_tests = 0;
    for (int i = 0; i < 300; ++i) {
        const int loc = static_cast<int>(rng.below(40)); // forced collisions
        const std::int64_t tests = 1 + static_cast<std::int64_t>(rng.below(6));
        total_tests += tests;
        src << (loc % 8) << '.' << (loc / 8) << ",2.0," << rng.uniform(0.0, 1e5) << ','
            << rng.uniform(0.0, 1e4) << ',' << tests << ",1\n";
    }
    std::istringstream in(src.str());
    const Dataset ds = parse_records(in, ScoreRule{});
    std::int64_t merged_tests = 0;
    for (const SamplePoint& p : ds.points)
        merged_tests += p.tests;
    CHECK(merged_tests == total_tests);
}

TEST_CASE("parse_records error cases carry line numbers") {
    SUBCASE("latitude out of range") {
        std::istringstream in("lon,lat,avg_d_kbps,avg_u_kbps,tests,devices\n"
                              "0,95,1,1,1,1\n");
        try {
            parse_records(in, ScoreRule{});
            FAIL("expected IngestError");
        } catch (const IngestError& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("non-numeric field") {
        std::istringstream in("lon,lat,avg_d_kbps,avg_u_kbps,tests,devices\n"
                              "0,0,1,1,1,1\n"
                              "0,1,abc,1,1,1\n");
        try {
            parse_records(in, ScoreRule{});
            FAIL("expected IngestError");
        } catch (const IngestError& e) {
            CHECK(e.line() == 3);
        }
    }
    SUBCASE("negative speed") {
        std::istringstream in("lon,lat,avg_d_kbps,avg_u_kbps,tests,devices\n"
                              "0,0,-5,1,1,1\n");
        CHECK_THROWS_AS(parse_records(in, ScoreRule{}), IngestError);
    }
    SUBCASE("fractional test count") {
        std::istringstream in("lon,lat,avg_d_kbps,avg_u_kbps,tests,devices\n"
                              "0,0,1,1,3.5,1\n");
        CHECK_THROWS_AS(parse_records(in, ScoreRule{}), IngestError);
    }
    SUBCASE("zero tests") {
        std::istringstream in("lon,lat,avg_d_kbps,avg_u_kbps,tests,devices\n"
                              "0,0,1,1,0,1\n");
        CHECK_THROWS_AS(parse_records(in, ScoreRule{}), IngestError);
    }
    SUBCASE("empty after header") {
        std::istringstream in("lon,lat,avg_d_kbps,avg_u_kbps,tests,devices\n");
        CHECK_THROWS_AS(parse_records(in, ScoreRule{}), DataError);
    }
    SUBCASE("missing required column") {
        std::istringstream in("lon,lat,avg_u_kbps,tests,devices\n0,0,1,1,1\n");
        CHECK_THROWS_AS(parse_records(in, ScoreRule{}), IngestError);
    }
}

TEST_CASE("parse_records ignores extra columns") {
    std::istringstream in("quarter,lon,lat,avg_d_kbps,avg_u_kbps,tests,devices,extra\n"
                          "2022Q1,1,2,10,20,1,1,zzz\n");
    const Dataset ds = parse_records(in, ScoreRule{});
    REQUIRE(ds.size() == 1);
    CHECK(ds.points[0].lon == 1.0);
}

TEST_CASE("parse_records accepts the quadkey header form") {
    std::istringstream in("quadkey,avg_d_kbps,avg_u_kbps,tests,devices\n"
                          "0231,10,20,1,1\n");
    const Dataset ds = parse_records(in, ScoreRule{});
    REQUIRE(ds.size() == 1);
    const auto [lon, lat] = tile_centroid("0231");
    CHECK(ds.points[0].lon == lon);
    CHECK(ds.points[0].lat == lat);

    std::istringstream bad("quadkey,avg_d_kbps,avg_u_kbps,tests,devices\n"
                           "07,10,20,1,1\n");
    CHECK_THROWS_AS(parse_records(bad, ScoreRule{}), IngestError);
}

TEST_CASE("canonical CSV round-trips bit-exactly") {
    Rng rng(17);
    std::ostringstream src;
    src << "lon,lat,avg_d_kbps,avg_u_kbps,tests,devices\n";
    for (int i = 0; i < 200; ++i)
        src << rng.uniform(-180.0, 180.0) << ',' << rng.uniform(-90.0, 90.0) << ','
            << rng.uniform(0.0, 3e6) << ',' << rng.uniform(0.0, 5e5) << ','
            << 1 + rng.below(9) << ',' << 1 + rng.below(5) << '\n';
    std::istringstream in(src.str());
    const Dataset first = parse_records(in, ScoreRule{});

    std::ostringstream canon;
    write_canonical_csv(first, canon);
    std::istringstream again(canon.str());
    const Dataset second = parse_records(again, ScoreRule{});

    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first.points[i].id == second.points[i].id);
        CHECK(first.points[i].lon == second.points[i].lon);
        CHECK(first.points[i].lat == second.points[i].lat);
        CHECK(first.points[i].download_kbps == second.points[i].download_kbps);
        CHECK(first.points[i].upload_kbps == second.points[i].upload_kbps);
        CHECK(first.points[i].tests == second.points[i].tests);
        CHECK(first.points[i].devices == second.points[i].devices);
        CHECK(first.points[i].score == second.points[i].score);
    }
}

TEST_CASE("tile_centroid matches the closed-form inverse mapping") {
    // lat(y_frac) = atan(sinh(pi * (1 - 2 y_frac))) * 180 / pi
    const auto [lon3, lat3] = tile_centroid("3"); // zoom 1, tile (1,1)
    CHECK(lon3 == doctest::Approx(90.0).epsilon(1e-14));
    CHECK(lat3 == doctest::Approx(-66.51326044311186).epsilon(1e-12));
    const auto [lon0, lat0] = tile_centroid("0"); // zoom 1, tile (0,0)
    CHECK(lon0 == doctest::Approx(-90.0).epsilon(1e-14));
    CHECK(lat0 == doctest::Approx(66.51326044311186).epsilon(1e-12));

    CHECK_THROWS_AS(tile_centroid("4"), DataError);
    CHECK_THROWS_AS(tile_centroid(""), DataError);
    CHECK_THROWS_AS(tile_centroid("01a"), DataError);
}

TEST_CASE("tile centroids lie strictly inside their tile bounds") {
    Rng rng(23);
    for (int trial = 0; trial < 500; ++trial) {
        std::string qk;
        const std::size_t zoom = 1 + rng.below(20);
        for (std::size_t j = 0; j < zoom; ++j)
            qk.push_back(static_cast<char>('0' + rng.below(4)));
        const auto [lon, lat] = tile_centroid(qk);
        const TileBounds b = tile_bounds(qk);
        CHECK(lon > b.lon_min);
        CHECK(lon < b.lon_max);
        CHECK(lat > b.lat_min);
        CHECK(lat < b.lat_max);
    }
}

namespace {

Dataset dataset_with_scores(const std::vector<double>& scores) {
    Dataset ds;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        SamplePoint p;
        p.id = static_cast<std::int64_t>(i);
        p.lon = static_cast<double>(i);
        p.score = scores[i];
        ds.points.push_back(p);
    }
    return ds;
}

} // namespace

TEST_CASE("summarize") {
    const Summary s = summarize(dataset_with_scores({1.0, 2.0, 3.0}));
    CHECK(s.n == 3);
    CHECK(s.mean == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(s.min == 1.0);
    CHECK(s.max == 3.0);

    const Summary single = summarize(dataset_with_scores({5.0}));
    CHECK(single.mean == 5.0);
    CHECK(single.stddev == 0.0);

    // population, not sample: {1, 3} has stddev exactly 1
    const Summary pop = summarize(dataset_with_scores({1.0, 3.0}));
    CHECK(pop.stddev == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(summarize(Dataset{}), DataError);
}
