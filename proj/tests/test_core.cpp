#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "robustplay/core.hpp"

#include <sstream>

using namespace robustplay;

TEST_CASE("average_point: identity, midpoint, empty list") {
    CHECK(average_point(std::vector<Point>{Point{1.0, 0.0}}) == Point{1.0, 0.0});
    const Point mid = average_point(std::vector<Point>{Point{0.0, 1.0}, Point{-2.0, -1.0}});
    CHECK(mid[0] == doctest::Approx(-1.0));
    CHECK(mid[1] == doctest::Approx(0.0));
    CHECK_THROWS_WITH_AS(average_point(std::vector<Point>{}), "no rounds", std::invalid_argument);
    CHECK_THROWS(average_point(std::vector<Point>{Point{1.0}, Point{1.0, 2.0}}));
}

TEST_CASE("average_point cancels alternating perturbations") {
    std::vector<Point> pts;
    for (int i = 0; i < 1000; ++i) {
        const double e = (i % 2 == 0 ? 1e-12 : -1e-12);
        pts.push_back(Point{0.1 + e, 0.2 - e});
    }
    const Point m = average_point(pts);
    CHECK(std::abs(m[0] - 0.1) <= 1e-13);
    CHECK(std::abs(m[1] - 0.2) <= 1e-13);
}

TEST_CASE("compensated sum keeps small terms next to large ones") {
    CompensatedSum s;
    s.add(1e16);
    for (int i = 0; i < 1000; ++i) s.add(1.0);
    s.add(-1e16);
    CHECK(s.value() == 1000.0);

    CompensatedVector v(2);
    v.add(Point{1.0, 2.0});
    v.add(Point{1.0, 2.0}, -0.5);
    CHECK(v.value() == Point{0.5, 1.0});
}

TEST_CASE("point arithmetic, norms, concat and split") {
    const Point a{3.0, -4.0};
    CHECK(norm1(a) == 7.0);
    CHECK(norm2(a) == 5.0);
    CHECK(norm_inf(a) == 4.0);
    CHECK(dot(a, Point{1.0, 1.0}) == -1.0);
    CHECK((a + Point{1.0, 1.0}) == Point{4.0, -3.0});
    CHECK((2.0 * a) == Point{6.0, -8.0});
    CHECK(unit_vector(3, 1) == Point{0.0, 1.0, 0.0});

    const std::vector<Point> blocks{Point{1.0}, Point{2.0, 3.0}};
    const Point c = concat(blocks);
    CHECK(c == Point{1.0, 2.0, 3.0});
    const std::vector<std::size_t> sizes{1, 2};
    CHECK(split(c, sizes) == blocks);
    CHECK_THROWS(require_same_dim(Point{1.0}, Point{1.0, 2.0}, "test"));
}

TEST_CASE("random source: per-round streams are replayable and independent of order") {
    const RandomSource src(42);
    auto e5 = src.round_stream(5);
    const double first = uniform01(e5);
    auto e1 = src.round_stream(1);
    (void)uniform01(e1);
    auto again = src.round_stream(5);
    CHECK(uniform01(again) == first);

    auto other = RandomSource(43).round_stream(5);
    CHECK(uniform01(other) != first);
    CHECK(src.derive(0).seed() != src.derive(1).seed());
    CHECK(src.derive(1).seed() == RandomSource(42).derive(1).seed());
}

TEST_CASE("uniform01 stays in [0,1)") {
    auto e = RandomSource(7).round_stream(1);
    for (int i = 0; i < 10000; ++i) {
        const double v = uniform01(e);
        REQUIRE(v >= 0.0);
        REQUIRE(v < 1.0);
    }
}

TEST_CASE("format_real round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 0.0}) CHECK(std::stod(format_real(v)) == v);
    CHECK(format_real(0.5) == "0.5");
}

TEST_CASE("transcript CSV omits absent columns") {
    Transcript tr;
    tr.rounds.push_back(Round{1, Point{0.5, 0.5}, Point{1.0}, std::nullopt, 0.25});
    std::ostringstream os;
    write_transcript_csv(os, tr);
    std::istringstream in(os.str());
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "t,x_0,x_1,u_0,loss");
    CHECK(row == "1,0.5,0.5,1,0.25");

    tr.cum_regret_x = {0.1};
    tr.cum_regret_u = {0.2};
    tr.gap_bound = {0.3};
    std::ostringstream full;
    write_transcript_csv(full, tr);
    CHECK(full.str().rfind("t,x_0,x_1,u_0,loss,cum_regret_x,cum_regret_u,gap_bound\n", 0) == 0);
}

TEST_CASE("solution mean point") {
    Solution s;
    s.kind = SolutionKind::empirical_distribution;
    s.support = {Point{1.0, 0.0}, Point{0.0, 1.0}};
    CHECK(s.mean_point() == Point{0.5, 0.5});
    s.kind = SolutionKind::averaged_point;
    s.xbar = Point{0.25, 0.75};
    CHECK(s.mean_point() == Point{0.25, 0.75});
}
