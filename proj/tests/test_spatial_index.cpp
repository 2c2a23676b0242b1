#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "netq/errors.hpp"
#include "netq/rng.hpp"
#include "netq/spatial_index.hpp"

#include "oracles.hpp"

#include <cmath>

using namespace netq;

namespace {

std::vector<std::array<double, 2>> random_points(std::size_t n, Rng& rng, double span = 10.0) {
    std::vector<std::array<double, 2>> pts(n);
    for (auto& p : pts)
        p = {rng.uniform(-span, span), rng.uniform(-span, span)};
    return pts;
}

void check_against_oracle(const PointIndex& index,
                          std::span<const std::array<double, 2>> pts,
                          const std::array<double, 2>& q, std::size_t k) {
    const auto got = index.knn(q[0], q[1], k);
    const auto want = oracle::brute_knn(pts, q, k);
    REQUIRE(got.size() == k);
    for (std::size_t i = 0; i < k; ++i) {
        CHECK(got[i].id == want[i].id);
        CHECK(got[i].dist == std::sqrt(want[i].d2)); // identical, not just close
    }
}

} // namespace

TEST_CASE("build basics") {
    std::vector<std::array<double, 2>> one{{1.0, 2.0}};
    const PointIndex idx = PointIndex::build(one);
    CHECK(idx.size() == 1);
    CHECK(idx.knn(0.0, 0.0, 1)[0].id == 0);

    CHECK_THROWS_AS(PointIndex::build(std::span<const std::array<double, 2>>{}), DataError);

    std::vector<std::array<double, 2>> dup{{1.0, 2.0}, {3.0, 4.0}, {1.0, 2.0}};
    CHECK_THROWS_AS(PointIndex::build(dup), DataError);
}

TEST_CASE("knn on a tiny line of points") {
    std::vector<std::array<double, 2>> pts{{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
    const PointIndex idx = PointIndex::build(pts);

    const auto self = idx.knn(0.0, 0.0, 1);
    CHECK(self[0].id == 0);
    CHECK(self[0].dist == 0.0);

    const auto two = idx.knn(0.9, 0.0, 2);
    CHECK(two[0].id == 1);
    CHECK(two[0].dist == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(two[1].id == 0);
    CHECK(two[1].dist == doctest::Approx(0.9).epsilon(1e-12));

    // equidistant neighbors list the smaller id first
    const auto tie = idx.knn(1.0, 5.0, 3);
    CHECK(tie[1].id == 0);
    CHECK(tie[2].id == 2);
    CHECK(tie[1].dist == tie[2].dist);
}

TEST_CASE("k bounds are enforced, never clamped") {
    std::vector<std::array<double, 2>> pts{{0.0, 0.0}, {1.0, 0.0}};
    const PointIndex idx = PointIndex::build(pts);
    CHECK_THROWS_AS(idx.knn(0.0, 0.0, 3), DataError);
    CHECK_THROWS_AS(idx.knn(0.0, 0.0, 0), DataError);
    CHECK_THROWS_AS(idx.kth_distance(0.0, 0.0, 3), DataError);
}

TEST_CASE("kth_distance 3-4-5 triangle") {
    std::vector<std::array<double, 2>> pts{{0.0, 0.0}, {3.0, 4.0}};
    const PointIndex idx = PointIndex::build(pts);
    CHECK(idx.kth_distance(0.0, 0.0, 1) == 0.0);
    CHECK(idx.kth_distance(0.0, 0.0, 2) == 5.0);
}

TEST_CASE("queries match the linear-scan oracle") {
    Rng rng(101);
    const auto pts = random_points(2000, rng);
    const PointIndex idx = PointIndex::build(pts);
    for (int qi = 0; qi < 100; ++qi) {
        const std::array<double, 2> q{rng.uniform(-12.0, 12.0), rng.uniform(-12.0, 12.0)};
        for (const std::size_t k : {std::size_t(1), std::size_t(5), std::size_t(10)})
            check_against_oracle(idx, pts, q, k);
    }
}

TEST_CASE("k = 7 over 1000 points matches brute force") {
    Rng rng(207);
    const auto pts = random_points(1000, rng);
    const PointIndex idx = PointIndex::build(pts);
    for (int qi = 0; qi < 50; ++qi) {
        const std::array<double, 2> q{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
        const double rk = idx.kth_distance(q[0], q[1], 7);
        CHECK(rk == oracle::brute_rk(pts, q, 7));
    }
}

TEST_CASE("queries at indexed points match the oracle too") {
    Rng rng(33);
    const auto pts = random_points(500, rng);
    const PointIndex idx = PointIndex::build(pts);
    for (int i = 0; i < 40; ++i) {
        const std::size_t pick = rng.below(pts.size());
        check_against_oracle(idx, pts, pts[pick], 5);
        CHECK(idx.kth_distance(pts[pick][0], pts[pick][1], 1) == 0.0);
    }
}

TEST_CASE("clustered and collinear layouts stay exact") {
    Rng rng(77);
    std::vector<std::array<double, 2>> pts;
    for (int i = 0; i < 300; ++i) // tight cluster
        pts.push_back({rng.normal(0.0, 1e-3), rng.normal(0.0, 1e-3)});
    for (int i = 0; i < 100; ++i) // axis-aligned line with many equal coords
        pts.push_back({static_cast<double>(i), 0.0});
    const PointIndex idx = PointIndex::build(pts);
    for (int qi = 0; qi < 60; ++qi) {
        const std::array<double, 2> q{rng.uniform(-2.0, 5.0), rng.uniform(-1.0, 1.0)};
        check_against_oracle(idx, pts, q, 10);
    }
}

TEST_CASE("kth_distance is non-decreasing in k") {
    Rng rng(55);
    const auto pts = random_points(400, rng);
    const PointIndex idx = PointIndex::build(pts);
    for (int qi = 0; qi < 30; ++qi) {
        const std::array<double, 2> q{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
        double prev = 0.0;
        for (std::size_t k = 1; k <= 20; ++k) {
            const double rk = idx.kth_distance(q[0], q[1], k);
            CHECK(rk >= prev);
            prev = rk;
        }
    }
}

TEST_CASE("equirectangular metric scales the lon axis") {
    Rng rng(91);
    std::vector<std::array<double, 2>> pts = random_points(300, rng, 2.0);
    for (auto& p : pts)
        p[1] += 45.0; // move the band north so the scaling is material
    const PointIndex idx = PointIndex::build(pts, Metric::Equirectangular);

    double mean_lat = 0.0;
    for (const auto& p : pts)
        mean_lat += p[1];
    mean_lat /= static_cast<double>(pts.size());
    const double scale = std::cos(mean_lat * std::numbers::pi / 180.0);

    std::vector<std::array<double, 2>> scaled(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        scaled[i] = {pts[i][0] * scale, pts[i][1]};

    for (int qi = 0; qi < 40; ++qi) {
        const std::array<double, 2> q{rng.uniform(-2.0, 2.0), 45.0 + rng.uniform(-2.0, 2.0)};
        const auto got = idx.knn(q[0], q[1], 5);
        const auto want = oracle::brute_knn(scaled, {q[0] * scale, q[1]}, 5);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(got[i].id == want[i].id);
            CHECK(got[i].dist == std::sqrt(want[i].d2));
        }
    }
}
