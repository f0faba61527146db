#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "robustplay/apps.hpp"
#include "support.hpp"

using namespace robustplay;
namespace ts = testing_support;

TEST_CASE("counter-example demo") {
    const std::vector<std::uint64_t> seeds{1, 2, 3};
    const auto rep = counterexample_demo(10'000, seeds);
    CHECK(rep.runs.size() == 3);
    CHECK(rep.flawed_hits == 3);
    CHECK(rep.corrected_hits == 3);
    CHECK(rep.pass);
    for (const auto& r : rep.runs) {
        CHECK(r.flawed_value <= -0.2 + 0.05);
        CHECK(std::abs(r.corrected_value) <= 0.05);
        // the flawed average sits on the segment between (0,1) and (-2,-1)
        CHECK(r.segment_residual <= 1e-9);
        CHECK(r.flawed.transcript->notes.count("master_seed") == 1);
    }
    CHECK_THROWS_AS(counterexample_demo(999, seeds), ConfigurationError);
}

TEST_CASE("concatenated learners") {
    const auto r = concatenation_check(10'000, 1);
    CHECK(r.mean_zero == doctest::Approx(0.5).epsilon(0.05));
    CHECK(r.mean_ones == doctest::Approx(0.75).epsilon(0.05));
    const auto m = concatenation_objectives();
    CHECK(m.size() == 2);
    CHECK(m.explicit_max(Point{1.0, -1.0}, {Point{0.0}, Point{0.0}}) == doctest::Approx(0.5));
    CHECK(m.explicit_max(Point{-1.0, -1.0}, {Point{1.0}, Point{1.0}}) == doctest::Approx(1.0));
}

TEST_CASE("routing instances") {
    const auto inst = make_routing_instance(50, 0.1, UncertaintySpec{}, 3);
    CHECK(inst.graph->num_nodes() == 50);
    CHECK(connects(*inst.graph, 0, 1));
    CHECK(inst.uncertainty.is<Domain::L2Ball>());
    CHECK(inst.big_M == doctest::Approx(default_big_M(50, inst.graph->max_cost())));
    for (const auto& e : inst.graph->edges()) {
        CHECK(e.cost <= 1.0);
        CHECK(e.capacity <= 1.0);
    }
    // nonnegative congestion inside the ball
    ts::Rng rng(1);
    for (int k = 0; k < 50; ++k)
        for (double v : ts::sample_point(inst.uncertainty, rng)) CHECK(v >= -1e-12);

    const auto budget = make_routing_instance(40, 0.2, UncertaintySpec{UncertaintyKind::budget, 5.0, 50.0}, 4);
    CHECK(budget.uncertainty.is<Domain::Budget>());
    CHECK_THROWS_AS(make_routing_instance(50, 0.0, UncertaintySpec{}, 1), std::invalid_argument);

    const Objective f = routing_objective(inst);
    const Point x = mincost_flow(*inst.graph, inst.graph->base_costs().view()).indicator;
    const Point u(inst.graph->num_edges(), 0.5);
    CHECK(f.value(x, u) == doctest::Approx(dot(inst.graph->base_costs(), x) + inst.big_M * dot(u, x)).epsilon(1e-12));
}

TEST_CASE("routing experiment: every x_t is a unit flow and the gap shrinks") {
    RoutingOptions o;
    o.T = 1000;
    o.benchmark_rounds = 5000;
    const auto r = robust_routing_experiment(30, 0.15, UncertaintySpec{}, o, 7);
    const auto& g = *r.instance.graph;
    const auto& tr = *r.solution.transcript;
    REQUIRE(tr.rounds.size() == 1000);
    for (const auto& round : tr.rounds) {
        REQUIRE(contains(Domain::flow_polytope(r.instance.graph), round.x, 1e-9));
        for (double v : round.x) REQUIRE((v == 0.0 || v == 1.0));
    }
    // integral node balance of the path indicators: degree parity along a simple path
    const auto& x = tr.rounds.front().x;
    std::vector<int> deg(g.num_nodes(), 0);
    for (std::size_t e = 0; e < g.num_edges(); ++e)
        if (x[e] == 1.0) ++deg[g.edges()[e].a], ++deg[g.edges()[e].b];
    CHECK(deg[g.source()] == 1);
    CHECK(deg[g.sink()] == 1);
    for (std::size_t v = 0; v < g.num_nodes(); ++v)
        if (v != g.source() && v != g.sink()) CHECK((deg[v] == 0 || deg[v] == 2));

    CHECK(r.plot.size() == 1000);
    CHECK(tr.gap.back() < tr.gap[9]);
    CHECK(tr.notes.at("benchmark_method") == r.benchmark.method);
    CHECK(tr.notes.count("big_M") == 1);
}

TEST_CASE("routing with edge removal keeps the graph connected every round") {
    RoutingOptions o;
    o.T = 200;
    o.benchmark_rounds = 1000;
    const auto r = robust_routing_experiment(12, 0.5, UncertaintySpec{UncertaintyKind::edge_removal, 0.0, 2.0}, o, 5);
    CHECK(r.solution.kind == SolutionKind::empirical_distribution);
    const auto& g = *r.instance.graph;
    for (const auto& round : r.solution.transcript->rounds) {
        std::vector<char> removed(g.num_edges(), 0);
        std::size_t count = 0;
        for (std::size_t e = 0; e < g.num_edges(); ++e)
            if (round.u[e] == 1.0) removed[e] = 1, ++count;
        REQUIRE(count <= 2);
        REQUIRE(is_connected(g, removed));
    }
}

TEST_CASE("robust MDP") {
    const auto mdp = std::make_shared<const Mdp>(random_mdp(4, 3, 0.9, 11));

    SUBCASE("zero radius reduces to the nominal MDP") {
        const RobustMdpInstance inst{mdp, RewardUncertainty::l2ball, 0.0, 1};
        const auto res = robust_mdp_solve(inst, 200, 0.05);
        const auto nominal = solve_occupancy(*mdp, mdp->nominal_reward());
        for (std::size_t s = 0; s < mdp->states(); ++s)
            for (std::size_t a = 0; a < mdp->actions(); ++a)
                CHECK(res.policy.probs[s][a] == (a == nominal.policy[s] ? 1.0 : 0.0));
        CHECK(res.robust_value == doctest::Approx(dot(mdp->nominal_reward(), nominal.occupancy)));
    }

    SUBCASE("l2 ball: feasibility and a valid policy") {
        const RobustMdpInstance inst{mdp, RewardUncertainty::l2ball, 0.2, 2};
        const auto res = robust_mdp_solve(inst, 2000, 0.05);
        CHECK(norm1(res.occupancy) == doctest::Approx(1.0 / (1.0 - mdp->gamma())).epsilon(1e-8));
        CHECK(occupancy_residual(*mdp, res.occupancy) <= 1e-8);
        for (const auto& q : res.policy.probs) {
            double s = 0.0;
            for (double v : q) s += v;
            CHECK(s == doctest::Approx(1.0));
        }
        CHECK(res.value_bound == doctest::Approx((norm_inf(mdp->nominal_reward()) + 0.2) / (1.0 - mdp->gamma())));
        CHECK(robust_reward(inst, res.occupancy) == doctest::Approx(res.robust_value));
    }

    SUBCASE("sparse set: diameter bound") {
        const RobustMdpInstance inst{mdp, RewardUncertainty::sparse, 0.3, 3};
        const double d = static_cast<double>(mdp->pairs());
        CHECK(inst.diameter_bound() <= 2.0 * std::sqrt(d) * 0.3 + 1e-12);
        CHECK(l2_diameter(inst.reward_domain()) <= inst.diameter_bound() + 1e-12);
        const auto res = robust_mdp_solve(inst, 500, 0.05);
        CHECK(occupancy_residual(*mdp, res.occupancy) <= 1e-8);
    }
}

TEST_CASE("robust MDP value against brute force on a small instance") {
    // 3 states, 2 actions, radius 0.1, against a search built from policy enumeration.
    const auto mdp = std::make_shared<const Mdp>(random_mdp(3, 2, 0.8, 21));
    const RobustMdpInstance inst{mdp, RewardUncertainty::l2ball, 0.1, 4};
    const std::size_t T = 20'000;
    const auto res = robust_mdp_solve(inst, T, 0.05, 4);

    // max over mixed occupancies of min_r r.x; the inner min is r0.x - c ||x||_2, concave in x,
    // so it is searched on mixtures (step 1e-2) of pairs of deterministic policies.
    std::vector<Point> occ;
    for (std::size_t code = 0; code < 8; ++code) {
        std::vector<std::size_t> pol{code & 1u, (code >> 1) & 1u, (code >> 2) & 1u};
        occ.push_back(ts::series_occupancy(*mdp, pol));
    }
    double best = -1e300;
    for (std::size_t i = 0; i < occ.size(); ++i)
        for (std::size_t j = i; j < occ.size(); ++j)
            for (int k = 0; k <= 100; ++k) {
                const double w = k / 100.0;
                best = std::max(best, robust_reward(inst, w * occ[i] + (1.0 - w) * occ[j]));
            }
    CHECK(std::abs(best - res.robust_value) <= res.solution.gap_bound + 1e-2);
}
