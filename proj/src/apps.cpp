#include "robustplay/apps.hpp"

#include "robustplay/learners.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace robustplay {

// ---------------------------------------------------------------------------
// counter-example

CounterexampleGame counterexample_game() {
    Domain X = Domain::vertex_hull({Point{0.0, 1.0}, Point{-2.0, -1.0}, Point{0.0, 0.0}});
    Domain U = Domain::vertex_hull({Point{1.0, 1.0}, Point{-1.0, -1.0}, Point{2.0, 1.0}});
    // max_x min_u u.x is min_x max_u -u.x; the sign flip is undone when reporting.
    Objective f = Objective::bilinear(LinearMap::scaled_identity(2, -1.0));
    return {std::move(X), std::move(U), std::move(f)};
}

namespace {

double segment_distance(const Point& x) {
    const Point a{0.0, 1.0};
    const Point d{-2.0, -2.0};  // b - a
    const double s = std::clamp(dot(x - a, d) / dot(d, d), 0.0, 1.0);
    return norm2(x - (a + s * d));
}

}  // namespace

CounterexampleReport counterexample_demo(std::size_t T, std::span<const std::uint64_t> seeds, double tolerance) {
    if (T < 1000) throw ConfigurationError("counterexample_demo needs T >= 1000");
    const auto game = counterexample_game();
    const double benchmark = benchmark_value(game.f, game.x_domain, game.u_domain).value;

    CounterexampleReport report;
    report.T = T;
    report.tolerance = tolerance;
    for (std::uint64_t seed : seeds) {
        RunOptions o;
        o.T = T;
        o.seed = seed;
        o.benchmark = benchmark;

        CounterexampleSeed run;
        run.seed = seed;
        {
            FplLearner weak;
            RunOptions bypass = o;
            bypass.allow_weak_in_strong_slot = true;
            run.flawed = biased_dual_run(game.f, game.x_domain, game.u_domain, weak, bypass);
        }
        {
            OgdLearner strong;
            run.corrected = biased_dual_run(game.f, game.x_domain, game.u_domain, strong, o);
        }
        run.flawed_xbar = *run.flawed.xbar;
        run.corrected_xbar = *run.corrected.xbar;
        run.flawed_value = -worst_case_value(game.f, run.flawed_xbar, game.u_domain);
        run.corrected_value = -worst_case_value(game.f, run.corrected_xbar, game.u_domain);
        run.segment_residual = segment_distance(run.flawed_xbar);
        run.flawed_hit = run.flawed_value <= -0.2 + tolerance;
        run.corrected_hit = std::abs(run.corrected_value) <= tolerance;
        report.flawed_hits += run.flawed_hit;
        report.corrected_hits += run.corrected_hit;
        report.runs.push_back(std::move(run));
    }
    const auto need = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(seeds.size())));
    report.pass = report.flawed_hits >= need && report.corrected_hits >= need;
    return report;
}

// ---------------------------------------------------------------------------
// concatenation

MultiObjective concatenation_objectives() {
    std::vector<Objective> fs;
    for (std::size_t i = 0; i < 2; ++i) {
        auto value = [i](const Point& x, const Point& u) { return 0.5 * std::abs(x[i] - u[0]); };
        auto gx = [i](const Point& x, const Point& u) {
            Point g(2);
            g[i] = x[i] >= u[0] ? 0.5 : -0.5;
            return g;
        };
        auto gu = [i](const Point& x, const Point& u) { return Point{x[i] >= u[0] ? -0.5 : 0.5}; };
        fs.push_back(Objective::blackbox(2, 1, value, gx, gu, true, "half_abs_" + std::to_string(i + 1)));
    }
    std::vector<Domain> us(2, Domain::box(Point{-1.0}, Point{1.0}));
    return MultiObjective(std::move(fs), Domain::simplex(2), std::move(us));
}

ConcatenationReport concatenation_check(std::size_t T, std::uint64_t seed) {
    if (T == 0) throw std::invalid_argument("no rounds");
    const auto m = concatenation_objectives();
    const RandomSource source = RandomSource(seed).derive(0);
    const std::vector<Point> zero{Point{0.0}, Point{0.0}};
    const std::vector<Point> ones{Point{1.0}, Point{1.0}};
    CompensatedSum s0, s1;
    for (std::size_t t = 1; t <= T; ++t) {
        auto xi = source.round_stream(t);
        const Point x{uniform01(xi) < 0.5 ? -1.0 : 1.0, uniform01(xi) < 0.5 ? -1.0 : 1.0};
        s0.add(m.explicit_max(x, zero));
        s1.add(m.explicit_max(x, ones));
    }
    const double Td = static_cast<double>(T);
    return {T, s0.value() / Td, s1.value() / Td};
}

// ---------------------------------------------------------------------------
// routing

const char* to_string(UncertaintyKind kind) {
    switch (kind) {
    case UncertaintyKind::l2ball: return "l2ball";
    case UncertaintyKind::budget: return "budget";
    case UncertaintyKind::edge_removal: return "edge_removal";
    }
    return "?";
}

RoutingInstance make_routing_instance(std::size_t n, double p, const UncertaintySpec& spec, std::uint64_t seed) {
    GnpOptions go;
    go.n = n;
    go.p = p;
    go.require_connected = spec.kind == UncertaintyKind::edge_removal;
    std::shared_ptr<const Graph> g;
    try {
        g = std::make_shared<const Graph>(random_gnp_graph(go, seed));
    } catch (const std::runtime_error&) {
        throw std::runtime_error("cannot generate a connected instance");
    }
    const std::size_t m = g->num_edges();
    RoutingInstance inst{g, Domain::simplex(1), g->big_M(), seed};
    switch (spec.kind) {
    case UncertaintyKind::l2ball:
        if (!(spec.radius > 0.0)) throw ConfigurationError("routing: l2ball radius must be positive");
        inst.uncertainty = Domain::l2ball(Point(m, spec.radius), spec.radius);
        break;
    case UncertaintyKind::budget:
        inst.uncertainty = Domain::budget(m, spec.K);
        break;
    case UncertaintyKind::edge_removal: {
        const double k = std::floor(spec.K);
        if (!(k >= 0.0)) throw ConfigurationError("routing: edge budget must be nonnegative");
        inst.uncertainty = Domain::edge_removal(g, static_cast<std::size_t>(k));
        break;
    }
    }
    return inst;
}

Objective routing_objective(const RoutingInstance& instance) {
    const std::size_t m = instance.graph->num_edges();
    return Objective::bilinear(LinearMap::scaled_identity(m, instance.big_M), instance.graph->base_costs());
}

RoutingResult robust_routing_experiment(const RoutingInstance& instance, const RoutingOptions& options,
                                        std::uint64_t seed) {
    const Objective f = routing_objective(instance);
    const Domain X = Domain::flow_polytope(instance.graph);
    const Domain& U = instance.uncertainty;

    RoutingResult out;
    out.instance = instance;
    RunOptions o;
    o.T = options.T;
    o.delta = options.delta;
    o.seed = seed;
    BenchmarkOptions bo;
    bo.sandwich_rounds = options.benchmark_rounds;
    bo.seed = seed ^ 0x5bd1e995u;
    try {
        out.benchmark = benchmark_value(f, X, U, bo);
        o.benchmark = out.benchmark.value;
    } catch (const std::invalid_argument&) {
        out.benchmark.method = "unavailable";
        out.benchmark.value = std::numeric_limits<double>::quiet_NaN();
    }

    auto lx = make_learner(options.learner_x);
    auto lu = make_learner(options.learner_u);
    out.solution = is_convex(U) ? rool_run(f, X, U, *lx, *lu, o) : r2ool_run(f, X, U, *lx, *lu, o);
    if (!o.benchmark) out.solution.warnings.push_back("benchmark unavailable: no gap trace");

    auto& notes = const_cast<Transcript&>(*out.solution.transcript).notes;
    notes["big_M"] = format_real(instance.big_M);
    notes["uncertainty"] = U.describe();
    notes["benchmark_method"] = out.benchmark.method;
    if (o.benchmark) notes["benchmark_width"] = format_real(out.benchmark.width);

    const auto& gap = out.solution.transcript->gap;
    out.plot.reserve(gap.size());
    for (std::size_t k = 0; k < gap.size(); ++k) out.plot.emplace_back(k + 1, std::log10(std::max(gap[k], 1e-16)));
    return out;
}

RoutingResult robust_routing_experiment(std::size_t n, double p, const UncertaintySpec& spec,
                                        const RoutingOptions& options, std::uint64_t seed) {
    return robust_routing_experiment(make_routing_instance(n, p, spec, seed), options, seed);
}

// ---------------------------------------------------------------------------
// robust MDP

Domain RobustMdpInstance::reward_domain() const {
    if (!mdp) throw ConfigurationError("robust MDP instance without an MDP");
    if (!(radius >= 0.0) || !std::isfinite(radius)) throw ConfigurationError("reward radius must be finite and >= 0");
    const Point& r0 = mdp->nominal_reward();
    if (radius == 0.0) return Domain::vertex_hull({r0});
    if (kind == RewardUncertainty::l2ball) return Domain::l2ball(r0, radius);
    std::vector<Point> vs;
    for (std::size_t i = 0; i < r0.size(); ++i) {
        Point up = r0, down = r0;
        up[i] += radius;
        down[i] -= radius;
        vs.push_back(std::move(up));
        vs.push_back(std::move(down));
    }
    return Domain::vertex_hull(std::move(vs));
}

double RobustMdpInstance::diameter_bound() const {
    if (kind == RewardUncertainty::l2ball) return 2.0 * radius;
    return 2.0 * std::sqrt(static_cast<double>(mdp->pairs())) * radius;
}

double robust_reward(const RobustMdpInstance& instance, const Point& occupancy) {
    const Domain U = instance.reward_domain();
    return dot(occupancy, linear_argmax(U, occupancy, Sense::minimize));
}

RobustMdpResult robust_mdp_solve(const RobustMdpInstance& instance, std::size_t T, double delta, std::uint64_t seed) {
    const Domain U = instance.reward_domain();
    const Domain X = Domain::occupancy_polytope(instance.mdp);
    const std::size_t d = instance.mdp->pairs();
    // Maximize_x minimize_r r.x, run as min_x max_r -r.x.
    const Objective f = Objective::bilinear(LinearMap::scaled_identity(d, -1.0));

    RunOptions o;
    o.T = T;
    o.delta = delta;
    o.seed = seed;
    o.record_traces = false;

    RobustMdpResult out;
    OgdLearner lr;
    if (instance.radius == 0.0) {
        out.solution = biased_dual_run(f, X, U, lr, o);
    } else {
        FplLearner lx;
        out.solution = rool_run(f, X, U, lx, lr, o);
    }
    out.occupancy = *out.solution.xbar;
    out.policy = extract_policy(*instance.mdp, out.occupancy);
    out.robust_value = robust_reward(instance, out.occupancy);
    out.value_bound = (norm_inf(instance.mdp->nominal_reward()) + instance.radius) / (1.0 - instance.mdp->gamma());

    auto& notes = const_cast<Transcript&>(*out.solution.transcript).notes;
    notes["sign"] = "negated: max_x min_r r.x";
    notes["value_bound"] = format_real(out.value_bound);
    notes["diameter_bound"] = format_real(instance.diameter_bound());
    if (instance.radius == 0.0) notes["driver"] = "biased_dual (degenerate reward set)";
    return out;
}

}  // namespace robustplay
