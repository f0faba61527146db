#pragma once

#include "robustplay/core.hpp"
#include "robustplay/domain.hpp"
#include "robustplay/graph.hpp"
#include "robustplay/learners.hpp"
#include "robustplay/mdp.hpp"
#include "robustplay/meta.hpp"
#include "robustplay/objective.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace robustplay {

// ---------------------------------------------------------------------------
// Counter-example: a weak learner facing a best-responding opponent.

/// U = conv{(1,1),(-1,-1),(2,1)}, X = conv{(0,1),(-2,-1),(0,0)} and f(x,u) = -u.x,
/// the min-max form of max_x min_u u.x.
struct CounterexampleGame {
    Domain x_domain;
    Domain u_domain;
    Objective f;
};
CounterexampleGame counterexample_game();

struct CounterexampleSeed {
    std::uint64_t seed = 0;
    Point flawed_xbar;
    Point corrected_xbar;
    double flawed_value = 0.0;     // min_u u.xbar
    double corrected_value = 0.0;
    /// Distance of the flawed xbar from the segment [(0,1), (-2,-1)].
    double segment_residual = 0.0;
    bool flawed_hit = false;       // value <= -1/5 + tol
    bool corrected_hit = false;    // |value| <= tol
    Solution flawed;
    Solution corrected;
};

struct CounterexampleReport {
    std::size_t T = 0;
    double tolerance = 0.05;
    std::vector<CounterexampleSeed> runs;
    std::size_t flawed_hits = 0;
    std::size_t corrected_hits = 0;
    /// Both schemes behave as predicted on at least 90% of the seeds.
    bool pass = false;
};

/// Runs FPL(u) against an x best response (the flawed scheme, via the weak-slot
/// bypass) and OGD(u) against the same best response, once per seed. T >= 1000.
CounterexampleReport counterexample_demo(std::size_t T, std::span<const std::uint64_t> seeds, double tolerance = 0.05);

// ---------------------------------------------------------------------------
// Concatenated learners are not a learner for F = max_i f^i.

struct ConcatenationReport {
    std::size_t T = 0;
    double mean_zero = 0.0;  // (1/T) sum_t F(x_t, 0)
    double mean_ones = 0.0;  // (1/T) sum_t F(x_t, (1,1))
};

/// f^i(x, u^i) = |x_i - u^i| / 2 with x_t uniform on {-1,1}^2.
ConcatenationReport concatenation_check(std::size_t T, std::uint64_t seed);

/// The two objectives above over X = [-1,1]^2, U^i = [-1,1], Lambda = simplex(2).
MultiObjective concatenation_objectives();

// ---------------------------------------------------------------------------
// Robust routing

enum class UncertaintyKind { l2ball, budget, edge_removal };
const char* to_string(UncertaintyKind kind);

struct UncertaintySpec {
    UncertaintyKind kind = UncertaintyKind::l2ball;
    double radius = 5.0;  // l2ball: ball of this radius around radius * 1 (nonnegative congestion)
    double K = 50.0;      // budget: sum u <= K; edge_removal: at most K edges
};

struct RoutingInstance {
    std::shared_ptr<const Graph> graph;
    Domain uncertainty = Domain::simplex(1);
    double big_M = 0.0;
    std::uint64_t seed = 0;
};

/// G(n,p) with uniform costs and capacities, s = 0, t = 1. Throws std::runtime_error
/// ("cannot generate a connected instance") after 100 failed draws.
RoutingInstance make_routing_instance(std::size_t n, double p, const UncertaintySpec& spec, std::uint64_t seed);

/// f(x,u) = c.x + M u.x.
Objective routing_objective(const RoutingInstance& instance);

struct RoutingOptions {
    std::size_t T = 1000;
    double delta = 0.05;
    /// Rounds of the long strong-vs-strong run that brackets the benchmark.
    std::size_t benchmark_rounds = 20000;
    LearnerSpec learner_x{LearnerName::fpl, {}};
    LearnerSpec learner_u{LearnerName::fpl, {}};
};

struct RoutingResult {
    RoutingInstance instance;
    Solution solution;
    BenchmarkResult benchmark;
    /// (t, log10 gap_t); gaps below 1e-16 are clamped.
    std::vector<std::pair<std::size_t, double>> plot;
};

/// Two learners (FPL by default) in parallel play: r2ool for edge removal, rool otherwise.
RoutingResult robust_routing_experiment(std::size_t n, double p, const UncertaintySpec& spec,
                                        const RoutingOptions& options, std::uint64_t seed);

RoutingResult robust_routing_experiment(const RoutingInstance& instance, const RoutingOptions& options,
                                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// Robust MDP with uncertain rewards

enum class RewardUncertainty { l2ball, sparse };

struct RobustMdpInstance {
    std::shared_ptr<const Mdp> mdp;
    RewardUncertainty kind = RewardUncertainty::l2ball;
    double radius = 0.0;
    std::uint64_t seed = 0;

    /// l2ball around r0 (a single point when the radius is 0), or the hull of r0 +- radius e_i.
    Domain reward_domain() const;
    /// l2 diameter of the reward set; for the sparse hull it is at most 2 sqrt(d) radius.
    double diameter_bound() const;
};

struct RobustMdpResult {
    Point occupancy;  // averaged occupancy
    StochasticPolicy policy;
    /// min_r r.xbar: the guaranteed reward of the averaged occupancy.
    double robust_value = 0.0;
    /// Bound on |r.x| over both sets: max ||r||_inf / (1 - gamma).
    double value_bound = 0.0;
    Solution solution;
};

/// FPL over occupancies against OGD on the rewards (f(x,r) = -r.x). A zero-radius
/// set has nothing to learn, so x best-responds to the single reward vector instead.
RobustMdpResult robust_mdp_solve(const RobustMdpInstance& instance, std::size_t T, double delta, std::uint64_t seed = 0);

/// min_r r.x over the reward set.
double robust_reward(const RobustMdpInstance& instance, const Point& occupancy);

}  // namespace robustplay
