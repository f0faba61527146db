// Python module: domains, objectives, the single-objective drivers and the applications.
// Points cross the boundary as lists of floats.

#include "robustplay/apps.hpp"
#include "robustplay/meta.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace robustplay;

namespace {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

Point P(const Vec& v) { return Point(v); }
Vec V(const Point& p) { return p.coords(); }

std::unique_ptr<Learner> learner(const std::string& name, const std::map<std::string, double>& params) {
    const auto n = parse_learner_name(name);
    if (!n) throw ConfigurationError("unknown learner '" + name + "'");
    return make_learner(LearnerSpec{*n, params});
}

RunOptions options(std::size_t T, std::uint64_t seed, double delta, std::optional<double> benchmark) {
    RunOptions o;
    o.T = T;
    o.seed = seed;
    o.delta = delta;
    o.benchmark = benchmark;
    return o;
}

py::dict solution_dict(const Solution& s) {
    py::dict d;
    d["kind"] = s.kind == SolutionKind::averaged_point ? "averaged_point" : "empirical_distribution";
    d["mean"] = V(s.mean_point());
    d["gap_bound"] = s.gap_bound;
    d["gap_evaluated"] = s.gap_evaluated ? py::cast(*s.gap_evaluated) : py::none();
    d["bound_x"] = s.certificate.bound_x;
    d["bound_u"] = s.certificate.bound_u;
    d["realized_regret_x"] = s.certificate.realized_regret_x;
    d["realized_regret_u"] = s.certificate.realized_regret_u;
    d["failure_probability"] = s.certificate.failure_probability;
    d["benchmark_factor"] = s.benchmark_factor;
    d["warnings"] = s.warnings;
    if (s.transcript) {
        d["gap_trace"] = s.transcript->gap;
        d["notes"] = s.transcript->notes;
        std::vector<Vec> xs;
        for (const auto& r : s.transcript->rounds) xs.push_back(V(r.x));
        d["x"] = xs;
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Robust optimization via online learning";
    m.attr("__version__") = "0.1.0";

    py::register_exception<ConfigurationError>(m, "ConfigurationError", PyExc_ValueError);
    py::register_exception<ScheduleViolation>(m, "ScheduleViolation", PyExc_RuntimeError);

    py::class_<Domain>(m, "Domain")
        .def_static("simplex", &Domain::simplex, py::arg("n"))
        .def_static("box", [](const Vec& lo, const Vec& hi) { return Domain::box(P(lo), P(hi)); })
        .def_static("l2ball", [](const Vec& c, double r) { return Domain::l2ball(P(c), r); }, py::arg("center"),
                    py::arg("radius"))
        .def_static("budget", &Domain::budget, py::arg("n"), py::arg("K"))
        .def_static("vertex_hull",
                    [](const std::vector<Vec>& vs) {
                        std::vector<Point> pts;
                        for (const auto& v : vs) pts.push_back(P(v));
                        return Domain::vertex_hull(std::move(pts));
                    })
        .def_static("product", &Domain::product)
        .def_property_readonly("dims", &Domain::dims)
        .def("__repr__", &Domain::describe);

    m.def("linear_argmax", [](const Domain& d, const Vec& theta, bool maximize) {
        return V(linear_argmax(d, P(theta), maximize ? Sense::maximize : Sense::minimize));
    }, py::arg("domain"), py::arg("theta"), py::arg("maximize") = true);
    m.def("project", [](const Domain& d, const Vec& z) { return V(project(d, P(z))); });
    m.def("contains", [](const Domain& d, const Vec& z, double tol) { return contains(d, P(z), tol); }, py::arg("domain"),
          py::arg("z"), py::arg("tol") = 1e-9);

    py::class_<Objective>(m, "Objective")
        .def_static("bilinear",
                    [](const Mat& A, std::optional<Vec> x_cost, std::optional<Vec> u_cost, double offset) {
                        std::optional<Point> c, d;
                        if (x_cost) c = P(*x_cost);
                        if (u_cost) d = P(*u_cost);
                        return Objective::bilinear(LinearMap::dense(A), c, d, offset);
                    },
                    py::arg("A"), py::arg("x_cost") = py::none(), py::arg("u_cost") = py::none(), py::arg("offset") = 0.0)
        .def_static("constant", &Objective::constant)
        .def("value", [](const Objective& f, const Vec& x, const Vec& u) { return f.value(P(x), P(u)); })
        .def_property_readonly("x_dim", &Objective::x_dim)
        .def_property_readonly("u_dim", &Objective::u_dim);

    m.def("strength", [](const std::string& name) {
        const auto n = parse_learner_name(name);
        if (!n) throw ConfigurationError("unknown learner '" + name + "'");
        return std::string(to_string(strength_of(*n)));
    });

    m.def("worst_case_value",
          [](const Objective& f, const Vec& x, const Domain& U) { return worst_case_value(f, P(x), U); });
    m.def("benchmark_value", [](const Objective& f, const Domain& X, const Domain& U) {
        const auto b = benchmark_value(f, X, U);
        return py::make_tuple(b.value, b.method);
    });

    m.def("rool",
          [](const Objective& f, const Domain& X, const Domain& U, const std::string& lx, const std::string& lu, std::size_t T,
             std::uint64_t seed, double delta, std::optional<double> benchmark, bool randomized,
             std::map<std::string, double> px, std::map<std::string, double> pu) {
              auto a = learner(lx, px);
              auto b = learner(lu, pu);
              const auto o = options(T, seed, delta, benchmark);
              py::gil_scoped_release release;
              Solution s = randomized ? r2ool_run(f, X, U, *a, *b, o) : rool_run(f, X, U, *a, *b, o);
              py::gil_scoped_acquire acquire;
              return solution_dict(s);
          },
          py::arg("f"), py::arg("x_domain"), py::arg("u_domain"), py::arg("learner_x") = "ogd",
          py::arg("learner_u") = "ogd", py::arg("T") = 1000, py::arg("seed") = 0, py::arg("delta") = 0.05,
          py::arg("benchmark") = py::none(), py::arg("randomized") = false,
          py::arg("params_x") = std::map<std::string, double>{}, py::arg("params_u") = std::map<std::string, double>{},
          "Parallel play of two learners (r2ool when randomized=True).");

    m.def("biased_dual",
          [](const Objective& f, const Domain& X, const Domain& U, const std::string& lu, std::size_t T, std::uint64_t seed,
             double delta, std::optional<double> benchmark) {
              auto b = learner(lu, {});
              return solution_dict(biased_dual_run(f, X, U, *b, options(T, seed, delta, benchmark)));
          },
          py::arg("f"), py::arg("x_domain"), py::arg("u_domain"), py::arg("learner_u") = "ogd", py::arg("T") = 1000,
          py::arg("seed") = 0, py::arg("delta") = 0.05, py::arg("benchmark") = py::none());

    m.def("biased_primal_randomized",
          [](const Objective& f, const Domain& X, const Domain& U, const std::string& lx, std::size_t T, std::uint64_t seed,
             double delta, std::optional<double> benchmark) {
              auto a = learner(lx, {});
              return solution_dict(biased_primal_randomized_run(f, X, U, *a, options(T, seed, delta, benchmark)));
          },
          py::arg("f"), py::arg("x_domain"), py::arg("u_domain"), py::arg("learner_x") = "ogd", py::arg("T") = 1000,
          py::arg("seed") = 0, py::arg("delta") = 0.05, py::arg("benchmark") = py::none());

    m.def("counterexample_demo",
          [](std::size_t T, const std::vector<std::uint64_t>& seeds, double tol) {
              const auto r = counterexample_demo(T, seeds, tol);
              py::dict d;
              d["flawed_hits"] = r.flawed_hits;
              d["corrected_hits"] = r.corrected_hits;
              d["pass"] = r.pass;
              std::vector<double> fv, cv;
              for (const auto& s : r.runs) fv.push_back(s.flawed_value), cv.push_back(s.corrected_value);
              d["flawed_values"] = fv;
              d["corrected_values"] = cv;
              return d;
          },
          py::arg("T") = 10000, py::arg("seeds") = std::vector<std::uint64_t>{1, 2, 3}, py::arg("tolerance") = 0.05);

    m.def("concatenation_check", [](std::size_t T, std::uint64_t seed) {
        const auto r = concatenation_check(T, seed);
        return py::make_tuple(r.mean_zero, r.mean_ones);
    }, py::arg("T") = 10000, py::arg("seed") = 0);

    m.def("robust_routing",
          [](std::size_t n, double p, std::size_t T, std::uint64_t seed, const std::string& uncertainty, double radius,
             double K, std::size_t benchmark_rounds) {
              UncertaintySpec spec;
              if (uncertainty == "l2ball") spec.kind = UncertaintyKind::l2ball;
              else if (uncertainty == "budget") spec.kind = UncertaintyKind::budget;
              else if (uncertainty == "edge_removal") spec.kind = UncertaintyKind::edge_removal;
              else throw ConfigurationError("unknown uncertainty '" + uncertainty + "'");
              spec.radius = radius;
              spec.K = K;
              RoutingOptions o;
              o.T = T;
              o.benchmark_rounds = benchmark_rounds;
              const auto r = robust_routing_experiment(n, p, spec, o, seed);
              py::dict d = solution_dict(r.solution);
              d["benchmark"] = r.benchmark.value;
              d["benchmark_method"] = r.benchmark.method;
              d["big_M"] = r.instance.big_M;
              d["edges"] = r.instance.graph->num_edges();
              return d;
          },
          py::arg("n") = 50, py::arg("p") = 0.1, py::arg("T") = 1000, py::arg("seed") = 0, py::arg("uncertainty") = "l2ball",
          py::arg("radius") = 5.0, py::arg("K") = 50.0, py::arg("benchmark_rounds") = 20000);

    m.def("random_mdp_occupancy", [](std::size_t S, std::size_t A, double gamma, std::uint64_t seed) {
        const Mdp mdp = random_mdp(S, A, gamma, seed);
        return V(mdp_occupancy(mdp, mdp.nominal_reward()));
    }, py::arg("states"), py::arg("actions"), py::arg("gamma"), py::arg("seed") = 0);

    m.def("robust_mdp",
          [](std::size_t S, std::size_t A, double gamma, double radius, const std::string& kind, std::size_t T,
             std::uint64_t seed) {
              RobustMdpInstance inst;
              inst.mdp = std::make_shared<const Mdp>(random_mdp(S, A, gamma, seed));
              inst.kind = kind == "sparse" ? RewardUncertainty::sparse : RewardUncertainty::l2ball;
              inst.radius = radius;
              inst.seed = seed;
              const auto r = robust_mdp_solve(inst, T, 0.05, seed);
              py::dict d;
              d["occupancy"] = V(r.occupancy);
              d["policy"] = r.policy.probs;
              d["robust_value"] = r.robust_value;
              d["value_bound"] = r.value_bound;
              d["gap_bound"] = r.solution.gap_bound;
              return d;
          },
          py::arg("states"), py::arg("actions"), py::arg("gamma"), py::arg("radius"), py::arg("kind") = "l2ball",
          py::arg("T") = 1000, py::arg("seed") = 0);
}
