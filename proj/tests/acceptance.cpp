// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "robustplay/apps.hpp"
#include "robustplay/cli.hpp"
#include "robustplay/lp.hpp"
#include "robustplay/meta.hpp"
#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace robustplay;
namespace ts = testing_support;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// 1 -------------------------------------------------------------------------
Outcome counterexample_dichotomy() {
    const auto t0 = Clock::now();
    std::vector<std::uint64_t> seeds(20);
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = 1000 + i;
    const auto rep = counterexample_demo(10'000, seeds);
    const double secs = seconds_since(t0);
    const bool ok = rep.flawed_hits >= 18 && rep.corrected_hits >= 18 && secs < 60.0;
    std::ostringstream os;
    os << "flawed " << rep.flawed_hits << "/20 at <= -1/5+0.05, corrected " << rep.corrected_hits
       << "/20 within 0.05 of 0, " << fmt("%.1f s", secs);
    return {ok, os.str()};
}

// 2 -------------------------------------------------------------------------
Outcome certificate_on_random_games() {
    ts::Rng rng(20240501);
    const std::size_t T = 10'000;
    std::size_t ok_runs = 0;
    double worst_slack = std::numeric_limits<double>::infinity();
    for (int g = 0; g < 50; ++g) {
        const std::size_t dx = 2 + rng() % 4, du = 2 + rng() % 4;
        std::vector<std::vector<double>> A(du, std::vector<double>(dx));
        for (auto& row : A)
            for (auto& v : row) v = 2.0 * ts::unif(rng) - 1.0;
        // x-player minimizes over rows of the transposed game.
        std::vector<std::vector<double>> M(dx, std::vector<double>(du));
        for (std::size_t i = 0; i < dx; ++i)
            for (std::size_t j = 0; j < du; ++j) M[i][j] = A[j][i];
        const double value = ts::support_enumeration_value(M);

        const Objective f = Objective::bilinear(LinearMap::dense(A));
        const Domain X = Domain::simplex(dx), U = Domain::simplex(du);
        RunOptions o;
        o.T = T;
        o.seed = static_cast<std::uint64_t>(g);
        o.benchmark = value;
        o.record_traces = false;
        std::unique_ptr<Learner> lx, lu;
        switch (g % 3) {
        case 0: lx = std::make_unique<OgdLearner>(); lu = std::make_unique<OgdLearner>(); break;
        case 1: lx = std::make_unique<FplLearner>(); lu = std::make_unique<FplLearner>(); break;
        default: lx = std::make_unique<EwLearner>(EwMode::averaged); lu = std::make_unique<OgdLearner>(); break;
        }
        const auto s = rool_run(f, X, U, *lx, *lu, o);
        const double rhs = (s.certificate.realized_regret_x + s.certificate.realized_regret_u) / static_cast<double>(T);
        const double slack = rhs + 1e-6 - *s.gap_evaluated;
        worst_slack = std::min(worst_slack, slack);
        ok_runs += slack >= 0.0;
    }
    return {ok_runs == 50, std::to_string(ok_runs) + "/50 games satisfy gap <= realized regrets/T + 1e-6 (min slack " +
                               fmt("%.3g", worst_slack) + ")"};
}

// 3 -------------------------------------------------------------------------
Outcome convergence_rate() {
    const Objective f = Objective::bilinear(LinearMap::dense({{1.0, -1.0}, {-1.0, 1.0}}));
    const Domain S = Domain::simplex(2);
    std::vector<double> lx, ly;
    std::ostringstream os;
    for (std::size_t T : {100u, 1'000u, 10'000u, 100'000u}) {
        double sum = 0.0;
        const int seeds = 20;
        for (int s = 0; s < seeds; ++s) {
            FplLearner a, b;
            RunOptions o;
            o.T = T;
            o.seed = 77 + static_cast<std::uint64_t>(s);
            o.benchmark = 0.0;
            o.record_traces = false;
            sum += *rool_run(f, S, S, a, b, o).gap_evaluated;
        }
        const double gap = sum / seeds;
        lx.push_back(std::log10(static_cast<double>(T)));
        ly.push_back(std::log10(gap));
        os << "T=" << T << ":" << fmt("%.3g", gap) << " ";
    }
    const double slope = ts::fit_slope(lx, ly);
    os << "slope " << fmt("%.3f", slope) << " (FPL vs FPL, mean over 20 seeds)";
    return {slope >= -0.65 && slope <= -0.35, os.str()};
}

// 4 -------------------------------------------------------------------------
Outcome concatenation() {
    const auto r = concatenation_check(10'000, 4);
    const bool ok = std::abs(r.mean_zero - 0.5) <= 0.05 * 0.5 && std::abs(r.mean_ones - 0.75) <= 0.05 * 0.75;
    return {ok, "mean F with u=0: " + fmt("%.4f", r.mean_zero) + ", with u=(1,1): " + fmt("%.4f", r.mean_ones)};
}

// 5 -------------------------------------------------------------------------
Outcome mdp_invariants() {
    ts::Rng rng(55);
    double worst = 0.0;
    const double gammas[] = {0.5, 0.9, 0.99};
    for (int k = 0; k < 100; ++k) {
        const std::size_t S = 1 + rng() % 10, A = 1 + rng() % 10;
        const double gamma = gammas[k % 3];
        const Mdp mdp = random_mdp(S, A, gamma, 9000 + static_cast<std::uint64_t>(k));
        const Point x = mdp_occupancy(mdp, mdp.nominal_reward());
        worst = std::max(worst, std::abs(norm1(x) - 1.0 / (1.0 - gamma)));
    }
    std::size_t mismatches = 0;
    const int small = 300;
    for (int k = 0; k < small; ++k) {
        const Mdp mdp = random_mdp(2, 2, gammas[k % 3], 7000 + static_cast<std::uint64_t>(k));
        const Point& r = mdp.nominal_reward();
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t a0 = 0; a0 < 2; ++a0)
            for (std::size_t a1 = 0; a1 < 2; ++a1) best = std::max(best, dot(r, ts::series_occupancy(mdp, {a0, a1})));
        const double got = dot(r, mdp_occupancy(mdp, r));
        if (std::abs(got - best) > 1e-8 * (1.0 + std::abs(best))) ++mismatches;
    }
    const bool ok = worst <= 1e-8 && mismatches == 0;
    return {ok, "max | ||x||_1 - 1/(1-gamma) | = " + fmt("%.2e", worst) + " on 100 MDPs; " +
                    std::to_string(small - mismatches) + "/" + std::to_string(small) +
                    " 2x2 instances match policy enumeration"};
}

// 6 -------------------------------------------------------------------------
Outcome oracle_correctness() {
    ts::Rng rng(66);
    auto graph = std::make_shared<const Graph>(random_gnp_graph({12, 0.35, 0, 1, true, 100}, 3));
    const auto mdp = std::make_shared<const Mdp>(random_mdp(4, 3, 0.9, 5));
    std::vector<Domain> domains{
        Domain::simplex(5),
        Domain::box(Point{-1.0, 0.0, 2.0}, Point{1.0, 3.0, 2.5}),
        Domain::l2ball(Point{1.0, -2.0, 0.5}, 1.5),
        Domain::budget(6, 2.5),
        Domain::vertex_hull({Point{1.0, 1.0}, Point{-1.0, -1.0}, Point{2.0, 1.0}, Point{0.0, 3.0}}),
        Domain::flow_polytope(graph),
        Domain::occupancy_polytope(mdp),
        Domain::edge_removal(graph, 2),
        Domain::product({Domain::simplex(3), Domain::box(Point{0.0}, Point{1.0})}),
    };
    std::size_t failures = 0;
    for (const auto& d : domains) {
        for (int trial = 0; trial < 4; ++trial) {
            Point theta(d.dims());
            for (auto& v : theta) v = 2.0 * ts::unif(rng) - 1.0;
            for (Sense sense : {Sense::minimize, Sense::maximize}) {
                const double best = dot(theta, linear_argmax(d, theta, sense));
                for (int k = 0; k < 1000 / 8; ++k) {
                    const double v = dot(theta, ts::sample_point(d, rng));
                    const bool beaten = sense == Sense::minimize ? v < best - 1e-9 : v > best + 1e-9;
                    failures += beaten;
                }
            }
        }
    }
    std::size_t flow_mismatch = 0;
    for (int k = 0; k < 100; ++k) {
        const Graph g = random_gnp_graph({15 + static_cast<std::size_t>(k % 10), 0.25, 0, 1, false, 100},
                                         500 + static_cast<std::uint64_t>(k));
        std::vector<double> c(g.num_edges());
        for (auto& v : c) v = ts::unif(rng);
        const auto fr = mincost_flow(g, c);
        const double ref = ts::bellman_ford_cost(g, c);
        if (std::abs(fr.cost - ref) > 1e-9) ++flow_mismatch;
    }
    const bool ok = failures == 0 && flow_mismatch == 0;
    return {ok, std::to_string(domains.size()) + " domain kinds x 1000 samples: " + std::to_string(failures) +
                    " beaten; min-cost flow vs Bellman-Ford: " + std::to_string(100 - flow_mismatch) + "/100 agree"};
}

// 7 -------------------------------------------------------------------------
Outcome routing_shape() {
    const auto t0 = Clock::now();
    RoutingOptions o;
    o.T = 5000;
    const auto r = robust_routing_experiment(50, 0.1, UncertaintySpec{}, o, 2024);
    const double secs = seconds_since(t0);
    const auto& gap = r.solution.transcript->gap;
    if (gap.size() != 5000) return {false, "no gap trace"};
    const double ratio = gap.back() / gap[9];
    const bool ok = ratio <= 0.05 && secs < 300.0;
    return {ok, "gap(5000)/gap(10) = " + fmt("%.4f", ratio) + " (benchmark " + r.benchmark.method + "), " +
                    fmt("%.1f s", secs)};
}

// 8 -------------------------------------------------------------------------
Outcome randomized_feasibility() {
    const std::size_t T = 100'000;
    const Domain X = Domain::simplex(2);
    // Feasible: both objectives vanish at x = (1, 0) for every u.
    const Objective f1 = Objective::bilinear(LinearMap::dense({{0.0, 1.0}, {0.0, 0.5}}));
    const Objective f2 = Objective::bilinear(LinearMap::dense({{0.0, 2.0}}));
    const MultiObjective feasible({f1, f2}, Domain::simplex(2), {Domain::box(Point{0.0, 0.0}, Point{1.0, 1.0}), Domain::box(Point{0.0}, Point{1.0})});
    // Infeasible: f^i = u^i x_i with u^i in [0,1]; min_x max_i x_i = 1/2 = eps.
    const Objective g1 = Objective::bilinear(LinearMap::dense({{1.0, 0.0}}));
    const Objective g2 = Objective::bilinear(LinearMap::dense({{0.0, 1.0}}));
    const MultiObjective infeasible({g1, g2}, Domain::simplex(2), {Domain::box(Point{0.0}, Point{1.0}), Domain::box(Point{0.0}, Point{1.0})});
    const double eps = 0.5, n = 2.0;

    std::ostringstream os;
    bool ok = true;
    for (RandomizedMode mode : {RandomizedMode::explicit_max, RandomizedMode::distributional}) {
        const char* name = mode == RandomizedMode::explicit_max ? "explicit" : "distributional";
        {
            OgdLearner lx, u1, u2, ll;
            RunOptions o;
            o.T = T;
            o.seed = 8;
            o.record_traces = false;
            const auto r = randomized_multi_run(feasible, X, mode, lx, {&u1, &u2}, &ll, o);
            const bool good = r.average_F < r.threshold && r.verdict == Verdict::feasible;
            ok = ok && good;
            os << name << " feasible: avg F " << fmt("%.2e", r.average_F) << " < tau " << fmt("%.2e", r.threshold)
               << "; ";
        }
        {
            OgdLearner lx, u1, u2, ll;
            RunOptions o;
            o.T = T;
            o.seed = 9;
            o.record_traces = false;
            const auto r = randomized_multi_run(infeasible, X, mode, lx, {&u1, &u2}, &ll, o);
            // liminf over the second half of the run
            double low = std::numeric_limits<double>::infinity();
            for (std::size_t t = T / 2; t < T; ++t) low = std::min(low, r.running_F[t]);
            const bool good = low >= eps / (n + 1.0) - 0.01;
            ok = ok && good;
            os << name << " infeasible: min running avg " << fmt("%.3f", low) << " >= " << fmt("%.3f", eps / (n + 1.0) - 0.01)
               << "; ";
        }
    }
    return {ok, os.str()};
}

// 9 -------------------------------------------------------------------------
Outcome fpl_regret_growth() {
    const Domain S = Domain::simplex(2);
    const LossBounds bounds{std::sqrt(2.0), 2.0, 1.0};
    // Oblivious adversarial sequences fixed in advance.
    const std::function<Point(std::size_t)> sequences[] = {
        // Alternating losses that defeat follow-the-leader.
        [](std::size_t t) { return t == 1 ? Point{0.5, 0.0} : (t % 2 == 0 ? Point{0.0, 1.0} : Point{1.0, 0.0}); },
        // Slowly drifting preference with a switch.
        [](std::size_t t) {
            const double s = std::sin(0.001 * static_cast<double>(t));
            return Point{0.5 + 0.5 * s, 0.5 - 0.5 * s};
        },
    };
    std::ostringstream os;
    bool ok = true;
    int idx = 0;
    for (const auto& seq : sequences) {
        std::vector<double> lx, ly;
        for (std::size_t T : {100u, 1'000u, 10'000u, 100'000u}) {
            double sum = 0.0;
            for (int s = 0; s < 20; ++s) {
                FplLearner l;
                l.seed_from(RandomSource(31 + static_cast<std::uint64_t>(s)), 0);
                l.prepare(S, bounds, T);
                CompensatedSum played;
                CompensatedVector cum(2);
                for (std::size_t t = 1; t <= T; ++t) {
                    const Point x = l.next(PlayContext{t, OpponentView{}});
                    const Point g = seq(t);
                    played.add(dot(g, x));
                    cum.add(g);
                    l.observe(Feedback{g, dot(g, x), {}});
                }
                const Point c = cum.value();
                sum += played.value() - std::min(c[0], c[1]);
            }
            lx.push_back(std::log10(static_cast<double>(T)));
            ly.push_back(std::log10(std::max(sum / 20.0, 1e-12)));
        }
        const double slope = ts::fit_slope(lx, ly);
        ok = ok && slope <= 0.6;
        os << "sequence " << ++idx << " slope " << fmt("%.3f", slope) << "; ";
    }
    return {ok, os.str()};
}

// 10 ------------------------------------------------------------------------
std::map<std::string, std::string> read_dir(const std::filesystem::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        out[e.path().filename().string()] = ss.str();
    }
    return out;
}

Outcome determinism() {
    const auto root = std::filesystem::temp_directory_path() / "robustplay_acceptance_determinism";
    std::filesystem::remove_all(root);
    const std::vector<std::string> configs{
        "[run]\nexperiment=counterexample\nT=1000\nrepeats=3\nseed=5\n",
        "[run]\nexperiment=routing\nT=300\nrepeats=2\nseed=6\n[routing]\nn=30\np=0.2\nbenchmark_rounds=2000\n",
        "[run]\nexperiment=custom_game\nalgorithm=r2ool\nT=2000\nrepeats=3\nseed=7\n[game]\nx_domain=simplex:3\n"
        "u_domain=ball:0,0;1\nmatrix=1,0,-1;0.5,2,0\n[learner_x]\nname=ew_sampled\n[learner_u]\nname=fpl\n",
        "[run]\nexperiment=mdp\nT=2000\nrepeats=2\nseed=8\n[mdp]\nstates=4\nactions=2\nradius=0.2\n",
        "[run]\nexperiment=custom_game\nalgorithm=multi_distributional\nT=2000\nseed=9\n[game]\nx_domain=simplex:2\n"
        "objectives=2\n[objective1]\nmatrix=1,0;0,1\nu_domain=simplex:2\n[objective2]\nmatrix=0,1\nu_domain=box:0;1\n"
        "[learner_x]\nname=fpl\n[learner_lambda]\nname=fpl\n",
    };
    std::size_t identical = 0, files = 0;
    std::ostringstream sink;
    for (std::size_t k = 0; k < configs.size(); ++k) {
        std::istringstream in(configs[k]);
        const auto cfg = cli::parse_config(in);
        std::map<std::string, std::string> runs[2];
        for (int rep = 0; rep < 2; ++rep) {
            cli::RunnerOptions o;
            o.output_dir = (root / (std::to_string(k) + "_" + std::to_string(rep))).string();
            o.quiet = true;
            o.threads = rep == 0 ? 1 : 4;
            if (cli::run(cfg, o, sink, sink) != 0) return {false, "config " + std::to_string(k) + " failed: " + sink.str()};
            runs[rep] = read_dir(*o.output_dir);
        }
        files += runs[0].size();
        identical += runs[0] == runs[1];
    }
    std::filesystem::remove_all(root);
    return {identical == configs.size(), std::to_string(identical) + "/" + std::to_string(configs.size()) +
                                              " configs rerun byte-identical (" + std::to_string(files) +
                                              " files; 1 vs 4 worker threads)"};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"counter-example dichotomy", counterexample_dichotomy},
        {"gap certificate on random bilinear games", certificate_on_random_games},
        {"O(1/sqrt T) convergence on matching pennies", convergence_rate},
        {"concatenated learners are not a learner for F", concatenation},
        {"occupancy measure invariants", mdp_invariants},
        {"linear oracles and min-cost flow", oracle_correctness},
        {"routing gap trace shape", routing_shape},
        {"randomized multi-objective feasibility", randomized_feasibility},
        {"FPL regret grows sublinearly", fpl_regret_growth},
        {"determinism of reruns", determinism},
    };
    int failed = 0, id = 0;
    for (const auto& [name, fn] : criteria) {
        ++id;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        while (!o.detail.empty() && (o.detail.back() == ' ' || o.detail.back() == ';')) o.detail.pop_back();
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << name << " -- " << o.detail << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
