#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "robustplay/domain.hpp"
#include "support.hpp"

using namespace robustplay;
namespace ts = testing_support;

namespace {

std::shared_ptr<const Graph> triangle() {
    // s=0, t=1, a=2: s-a, a-t, s-t
    return std::make_shared<const Graph>(3, std::vector<Edge>{{0, 2, 0.1, 1.0}, {2, 1, 0.1, 1.0}, {0, 1, 0.3, 1.0}}, 0, 1);
}

}  // namespace

TEST_CASE("constructors reject degenerate parameters") {
    CHECK_THROWS(Domain::simplex(0));
    CHECK_THROWS(Domain::l2ball(Point{0.0}, 0.0));
    CHECK_THROWS(Domain::budget(3, 0.0));
    CHECK_THROWS(Domain::box(Point{1.0}, Point{0.0}));
    CHECK_THROWS(Domain::vertex_hull({}));
    CHECK_THROWS(Domain::vertex_hull({Point{1.0}, Point{1.0, 2.0}}));
    CHECK_THROWS(Domain::product({}));
}

TEST_CASE("dimensions and block sizes") {
    const auto p = Domain::product({Domain::simplex(3), Domain::l2ball(Point{0.0, 0.0}, 1.0)});
    CHECK(p.dims() == 5);
    CHECK(p.block_sizes() == std::vector<std::size_t>{3, 2});
    CHECK(Domain::simplex(4).block_sizes() == std::vector<std::size_t>{4});
    CHECK(Domain::flow_polytope(triangle()).dims() == 3);
}

TEST_CASE("membership per kind") {
    CHECK(contains(Domain::simplex(2), Point{0.25, 0.75}));
    CHECK_FALSE(contains(Domain::simplex(2), Point{0.5, 0.6}));
    CHECK_FALSE(contains(Domain::simplex(2), Point{0.5}));
    CHECK(contains(Domain::l2ball(Point{1.0, 1.0}, 1.0), Point{1.0, 2.0}));
    CHECK_FALSE(contains(Domain::l2ball(Point{1.0, 1.0}, 1.0), Point{2.0, 2.0}));
    CHECK(contains(Domain::budget(3, 2.0), Point{1.0, 0.5, 0.5}));
    CHECK_FALSE(contains(Domain::budget(3, 2.0), Point{1.0, 1.0, 0.5}));
    CHECK_FALSE(contains(Domain::budget(3, 2.0), Point{-0.1, 0.0, 0.0}));

    const auto hull = Domain::vertex_hull({Point{0.0, 1.0}, Point{-2.0, -1.0}, Point{0.0, 0.0}});
    CHECK(contains(hull, Point{-1.0, 0.0}));
    CHECK(contains(hull, Point{-0.5, 0.0}));
    CHECK_FALSE(contains(hull, Point{0.5, 0.0}));

    const auto flow = Domain::flow_polytope(triangle());
    CHECK(contains(flow, Point{1.0, 1.0, 0.0}));
    CHECK(contains(flow, Point{0.5, 0.5, 0.5}));
    CHECK_FALSE(contains(flow, Point{0.5, 0.0, 0.5}));

    const auto removal = Domain::edge_removal(triangle(), 1);
    CHECK(contains(removal, Point{0.0, 0.0, 1.0}));
    CHECK_FALSE(contains(removal, Point{1.0, 0.0, 1.0}));
    CHECK_FALSE(contains(removal, Point{0.5, 0.0, 0.0}));
}

TEST_CASE("convexity flags") {
    CHECK(is_convex(Domain::simplex(2)));
    CHECK(is_convex(Domain::flow_polytope(triangle())));
    CHECK_FALSE(is_convex(Domain::edge_removal(triangle(), 1)));
    CHECK_FALSE(is_convex(Domain::product({Domain::simplex(1), Domain::edge_removal(triangle(), 1)})));
}

TEST_CASE("diameter bounds dominate sampled pairs") {
    ts::Rng rng(3);
    const auto mdp = std::make_shared<const Mdp>(random_mdp(3, 2, 0.9, 1));
    const std::vector<Domain> ds{
        Domain::simplex(4),
        Domain::box(Point{-1.0, 0.0}, Point{1.0, 2.0}),
        Domain::l2ball(Point{1.0, 2.0, 3.0}, 2.0),
        Domain::budget(3, 4.0),
        Domain::vertex_hull({Point{1.0, 1.0}, Point{-1.0, -1.0}, Point{2.0, 1.0}}),
        Domain::flow_polytope(triangle()),
        Domain::occupancy_polytope(mdp),
        Domain::product({Domain::simplex(2), Domain::budget(2, 1.0)}),
    };
    for (const auto& d : ds) {
        CAPTURE(d.describe());
        for (int k = 0; k < 200; ++k) {
            const Point a = ts::sample_point(d, rng), b = ts::sample_point(d, rng);
            REQUIRE(contains(d, a, 1e-9));
            CHECK(distance2(a, b) <= l2_diameter(d) + 1e-9);
            CHECK(norm1(a - b) <= l1_diameter(d) + 1e-9);
            CHECK(norm1(a) <= max_l1_norm(d) + 1e-9);
            CHECK(norm2(a) <= max_l2_norm(d) + 1e-9);
        }
        CHECK(contains(d, default_point(d), 1e-9));
    }
    CHECK(l2_diameter(Domain::l2ball(Point{0.0, 0.0}, 3.0)) == doctest::Approx(6.0));
    CHECK(l2_diameter(Domain::simplex(5)) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("vertex enumeration") {
    CHECK(enumerate_vertices(Domain::simplex(3)).size() == 3);
    CHECK(enumerate_vertices(Domain::box(Point{0.0, 0.0, 0.0}, Point{1.0, 1.0, 1.0})).size() == 8);
    CHECK(enumerate_vertices(Domain::budget(2, 1.0)).size() == 3);
    const auto pv = enumerate_vertices(Domain::product({Domain::simplex(2), Domain::simplex(3)}));
    CHECK(pv.size() == 6);
    CHECK_THROWS_AS(enumerate_vertices(Domain::l2ball(Point{0.0}, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_vertices(Domain::box(Point(20, 0.0), Point(20, 1.0)), 1000), std::length_error);
}

TEST_CASE("grids stay inside the domain") {
    for (const auto& d : {Domain::simplex(3), Domain::l2ball(Point{0.0, 0.0}, 1.0), Domain::budget(2, 2.0),
                          Domain::vertex_hull({Point{1.0, 1.0}, Point{-1.0, -1.0}, Point{2.0, 1.0}})}) {
        const auto g = grid_points(d, 10);
        CHECK(!g.empty());
        for (const auto& p : g) CHECK(contains(d, p, 1e-9));
    }
    CHECK(grid_points(Domain::simplex(2), 4).size() == 5);
    CHECK_THROWS_AS(grid_points(Domain::simplex(10), 50, 1000), std::length_error);
}

TEST_CASE("hull point is the weighted vertex sum") {
    const Domain::VertexHull h{{Point{0.0, 1.0}, Point{-2.0, -1.0}}};
    CHECK(hull_point(h, Point{0.5, 0.5}) == Point{-1.0, 0.0});
}
