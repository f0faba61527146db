#include "robustplay/cli.hpp"

#include "robustplay/apps.hpp"
#include "robustplay/meta.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

namespace robustplay::cli {

namespace {

const char* const weak_citation =
    "Sec. 2.2: FPL and exponential weighting are weak learners; against a best-responding "
    "(anticipatory) opponent their guarantee is void";
const char* const lambda_citation = "Proposition 1: Lambda must be a closed convex subset of the probability simplex";

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

double parse_real(const std::string& text, const std::string& field) {
    const std::string t = trim(text);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v))
        throw ConfigurationError(field + ": expected a finite number, got '" + text + "'");
    return v;
}

std::uint64_t parse_uint(const std::string& text, const std::string& field) {
    const std::string t = trim(text);
    if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); }))
        throw ConfigurationError(field + ": expected a nonnegative integer, got '" + text + "'");
    try {
        return std::stoull(t);
    } catch (const std::exception&) {
        throw ConfigurationError(field + ": integer out of range");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// names

const char* to_string(Experiment e) {
    switch (e) {
    case Experiment::counterexample: return "counterexample";
    case Experiment::routing: return "routing";
    case Experiment::mdp: return "mdp";
    case Experiment::custom_game: return "custom_game";
    }
    return "?";
}

const char* to_string(Algorithm a) {
    switch (a) {
    case Algorithm::rool: return "rool";
    case Algorithm::r2ool: return "r2ool";
    case Algorithm::biased_dual: return "biased_dual";
    case Algorithm::biased_primal_randomized: return "biased_primal_randomized";
    case Algorithm::multi_explicit: return "multi_explicit";
    case Algorithm::multi_distributional: return "multi_distributional";
    case Algorithm::multi_biased_dual: return "multi_biased_dual";
    case Algorithm::multi_biased_primal: return "multi_biased_primal";
    case Algorithm::randomized_multi_explicit: return "randomized_multi_explicit";
    case Algorithm::randomized_multi_distributional: return "randomized_multi_distributional";
    }
    return "?";
}

std::optional<Experiment> parse_experiment(const std::string& text) {
    for (auto e : {Experiment::counterexample, Experiment::routing, Experiment::mdp, Experiment::custom_game})
        if (text == to_string(e)) return e;
    return std::nullopt;
}

std::optional<Algorithm> parse_algorithm(const std::string& text) {
    for (int i = 0; i <= static_cast<int>(Algorithm::randomized_multi_distributional); ++i) {
        const auto a = static_cast<Algorithm>(i);
        if (text == to_string(a)) return a;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// config

std::optional<std::string> RunConfig::get(const std::string& section, const std::string& key) const {
    const auto s = sections.find(section);
    if (s == sections.end()) return std::nullopt;
    const auto v = s->second.find(key);
    if (v == s->second.end()) return std::nullopt;
    return v->second;
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
    sections[section][key] = value;
}

std::string RunConfig::experiment_name() const { return get("run", "experiment").value_or(""); }

std::string RunConfig::algorithm_name() const {
    if (auto a = get("run", "algorithm")) return *a;
    const auto e = parse_experiment(experiment_name());
    if (e == Experiment::counterexample) return "biased_dual";
    return "rool";
}

std::size_t RunConfig::T() const {
    const auto v = get("run", "T");
    return v ? parse_uint(*v, "run.T") : 1000;
}

double RunConfig::delta() const {
    const auto v = get("run", "delta");
    return v ? parse_real(*v, "run.delta") : 0.05;
}

std::uint64_t RunConfig::seed() const {
    const auto v = get("run", "seed");
    return v ? parse_uint(*v, "run.seed") : 0;
}

std::size_t RunConfig::repeats() const {
    const auto v = get("run", "repeats");
    return v ? parse_uint(*v, "run.repeats") : 1;
}

std::string RunConfig::output_dir() const { return get("run", "output_dir").value_or("out"); }

RunConfig parse_config(std::istream& is) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigurationError(std::string("config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    RunConfig c;
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            c.set("run", name, trim(node.data()));
            continue;
        }
        auto& sec = c.sections[name];
        for (const auto& [key, value] : node) sec[key] = trim(value.data());
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("config: cannot open '" + path + "'");
    return parse_config(in);
}

std::string config_hash(const RunConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto feed = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        h ^= 0xff;
        h *= 0x100000001b3ull;
    };
    for (const auto& [name, sec] : config.sections)
        for (const auto& [key, value] : sec) {
            if (name == "run" && (key == "seed" || key == "output_dir" || key == "repeats")) continue;
            feed(name);
            feed(key);
            feed(value);
        }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

// ---------------------------------------------------------------------------
// value parsers

std::vector<double> parse_reals(const std::string& text) {
    std::vector<double> out;
    for (const auto& part : split_on(text, ',')) out.push_back(parse_real(part, "list"));
    return out;
}

std::vector<std::vector<double>> parse_matrix(const std::string& text) {
    std::vector<std::vector<double>> rows;
    for (const auto& row : split_on(text, ';')) rows.push_back(parse_reals(row));
    if (rows.empty() || rows.front().empty()) throw ConfigurationError("matrix: empty");
    for (const auto& r : rows)
        if (r.size() != rows.front().size()) throw ConfigurationError("matrix: ragged rows");
    return rows;
}

Domain parse_domain(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigurationError("domain '" + text + "': expected kind:arguments");
    const std::string kind = trim(text.substr(0, colon));
    const auto args = split_on(text.substr(colon + 1), ';');
    auto need = [&](std::size_t n) {
        if (args.size() != n)
            throw ConfigurationError("domain '" + text + "': expected " + std::to_string(n) + " ';'-separated parts");
    };
    if (kind == "simplex") {
        need(1);
        return Domain::simplex(parse_uint(args[0], "simplex dimension"));
    }
    if (kind == "box") {
        need(2);
        return Domain::box(Point(parse_reals(args[0])), Point(parse_reals(args[1])));
    }
    if (kind == "ball") {
        need(2);
        return Domain::l2ball(Point(parse_reals(args[0])), parse_real(args[1], "ball radius"));
    }
    if (kind == "budget") {
        need(2);
        return Domain::budget(parse_uint(args[0], "budget dimension"), parse_real(args[1], "budget K"));
    }
    if (kind == "hull") {
        std::vector<Point> vs;
        for (const auto& a : args) vs.emplace_back(parse_reals(a));
        return Domain::vertex_hull(std::move(vs));
    }
    throw ConfigurationError("domain '" + text + "': unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// plan

namespace {

struct GamePlan {
    std::optional<Objective> f;
    std::optional<Domain> X;
    std::optional<Domain> U;
    std::optional<MultiObjective> multi;
    std::optional<double> benchmark;
};

struct Plan {
    Experiment experiment = Experiment::custom_game;
    Algorithm algorithm = Algorithm::rool;
    std::size_t T = 1000;
    double delta = 0.05;
    std::string hash;
    std::map<std::string, LearnerSpec> learners;

    // routing
    std::size_t n = 50;
    double p = 0.1;
    UncertaintySpec uncertainty;
    std::size_t benchmark_rounds = 20000;
    std::optional<std::uint64_t> graph_seed;

    // mdp
    std::shared_ptr<const Mdp> mdp;
    RewardUncertainty reward_kind = RewardUncertainty::l2ball;
    double radius = 0.1;

    std::shared_ptr<const GamePlan> game;
};

/// Collects findings instead of throwing, so validate() reports every problem.
class Checker {
public:
    explicit Checker(std::vector<Finding>& out) : out_(out) {}

    template <class F>
    bool attempt(const std::string& field, F&& fn, const std::string& citation = "") {
        try {
            fn();
            return true;
        } catch (const ConfigurationError& e) {
            add(field, e.what(), citation);
        } catch (const std::invalid_argument& e) {
            add(field, e.what(), citation);
        } catch (const std::length_error& e) {
            add(field, e.what(), citation);
        }
        return false;
    }
    void add(const std::string& field, const std::string& message, const std::string& citation = "") {
        out_.push_back({field, message, citation});
    }

private:
    std::vector<Finding>& out_;
};

bool is_multi(Algorithm a) {
    return a != Algorithm::rool && a != Algorithm::r2ool && a != Algorithm::biased_dual &&
           a != Algorithm::biased_primal_randomized;
}

/// Learner slots an algorithm reads from the config, and which of them must be strong.
struct SlotUse {
    std::vector<std::string> slots;
    std::vector<std::string> strong;
};

SlotUse slot_use(Algorithm a, std::size_t n) {
    std::vector<std::string> us;
    for (std::size_t i = 1; i <= n; ++i) us.push_back("u" + std::to_string(i));
    auto with = [](std::vector<std::string> v, std::initializer_list<std::string> more) {
        v.insert(v.begin(), more);
        return v;
    };
    switch (a) {
    case Algorithm::rool:
    case Algorithm::r2ool: return {{"x", "u"}, {}};
    case Algorithm::biased_dual: return {{"u"}, {"u"}};
    case Algorithm::biased_primal_randomized: return {{"x"}, {"x"}};
    case Algorithm::multi_explicit:
    case Algorithm::randomized_multi_explicit: return {with(us, {"x"}), {}};
    case Algorithm::multi_distributional:
    case Algorithm::randomized_multi_distributional: {
        auto v = with(us, {"x"});
        v.push_back("lambda");
        return {v, {}};
    }
    case Algorithm::multi_biased_dual: return {us, us};
    case Algorithm::multi_biased_primal: return {{"x"}, {"x"}};
    }
    return {};
}

LearnerSpec learner_spec(const RunConfig& c, const std::string& slot, LearnerName fallback) {
    std::string section = "learner_" + slot;
    if (!c.sections.count(section) && slot.size() > 1 && slot[0] == 'u' && std::isdigit(static_cast<unsigned char>(slot[1])))
        section = "learner_u";
    LearnerSpec spec{fallback, {}};
    const auto it = c.sections.find(section);
    if (it == c.sections.end()) return spec;
    for (const auto& [key, value] : it->second) {
        if (key == "name") {
            const auto name = parse_learner_name(value);
            if (!name) throw ConfigurationError("unknown learner '" + value + "'");
            spec.name = *name;
        } else {
            spec.params[key] = parse_real(value, section + "." + key);
        }
    }
    return spec;
}

std::string learner_field(const RunConfig& c, const std::string& slot) {
    const std::string own = "learner_" + slot;
    if (c.sections.count(own) || !(slot.size() > 1 && slot[0] == 'u')) return own + ".name";
    return "learner_u.name";
}

/// Whether a learner can run on a domain at all.
std::optional<std::string> learner_domain_problem(LearnerName name, const Domain& d) {
    switch (name) {
    case LearnerName::ogd:
        if (!has_projection(d) && !d.is<Domain::VertexHull>())
            return "ogd needs a Euclidean projection onto " + d.describe();
        return std::nullopt;
    case LearnerName::ew_averaged:
    case LearnerName::ew_sampled:
        try {
            (void)enumerate_vertices(d, 100'000);
        } catch (const std::exception&) {
            return std::string(to_string(name)) + " needs a finite vertex list for " + d.describe();
        }
        return std::nullopt;
    default: return std::nullopt;
    }
}

std::optional<Objective> parse_objective(const Section& s, const std::string& where, std::size_t x_dim) {
    const auto m = s.find("matrix");
    if (m == s.end()) throw ConfigurationError(where + ".matrix: missing");
    auto rows = parse_matrix(m->second);
    if (rows.front().size() != x_dim)
        throw ConfigurationError(where + ".matrix: needs one column per x coordinate (" + std::to_string(x_dim) + ")");
    std::optional<Point> xc, uc;
    double offset = 0.0;
    if (auto it = s.find("x_cost"); it != s.end()) xc = Point(parse_reals(it->second));
    if (auto it = s.find("u_cost"); it != s.end()) uc = Point(parse_reals(it->second));
    if (auto it = s.find("offset"); it != s.end()) offset = parse_real(it->second, where + ".offset");
    return Objective::bilinear(LinearMap::dense(std::move(rows)), xc, uc, offset);
}

std::optional<Plan> build_plan(const RunConfig& c, std::vector<Finding>& findings) {
    Checker chk(findings);
    Plan plan;
    plan.hash = config_hash(c);

    const auto experiment = parse_experiment(c.experiment_name());
    if (!experiment) {
        chk.add("run.experiment", "unknown experiment '" + c.experiment_name() +
                                      "' (expected counterexample, routing, mdp or custom_game)");
        return std::nullopt;
    }
    plan.experiment = *experiment;
    const auto algorithm = parse_algorithm(c.algorithm_name());
    if (!algorithm) {
        chk.add("run.algorithm", "unknown algorithm '" + c.algorithm_name() + "'");
        return std::nullopt;
    }
    plan.algorithm = *algorithm;

    chk.attempt("run.T", [&] {
        plan.T = c.T();
        if (plan.T == 0) throw ConfigurationError("run.T must be at least 1");
        if (plan.experiment == Experiment::counterexample && plan.T < 1000)
            throw ConfigurationError("run.T must be at least 1000 for the counterexample");
    });
    chk.attempt("run.delta", [&] {
        plan.delta = c.delta();
        if (!(plan.delta > 0.0 && plan.delta < 1.0)) throw ConfigurationError("run.delta must lie in (0,1)");
    });
    chk.attempt("run.seed", [&] { (void)c.seed(); });
    chk.attempt("run.repeats", [&] {
        if (c.repeats() == 0) throw ConfigurationError("run.repeats must be at least 1");
    });

    auto allowed = [&](std::initializer_list<Algorithm> as) {
        if (std::find(as.begin(), as.end(), plan.algorithm) == as.end())
            chk.add("run.algorithm", std::string("algorithm '") + to_string(plan.algorithm) +
                                         "' is not available for experiment '" + to_string(plan.experiment) + "'");
    };

    // Learner specs and slot rules. `domains` maps a slot to its domain when known.
    auto check_learners = [&](std::size_t n, const std::map<std::string, const Domain*>& domains,
                              LearnerName fallback) {
        const auto use = slot_use(plan.algorithm, n);
        for (const auto& slot : use.slots) {
            const std::string field = learner_field(c, slot);
            chk.attempt(field, [&] {
                plan.learners[slot] = learner_spec(c, slot, fallback);
                const LearnerSpec& spec = plan.learners[slot];
                const bool strong_slot = std::find(use.strong.begin(), use.strong.end(), slot) != use.strong.end();
                if (strong_slot && strength_of(spec.name) == Strength::weak)
                    chk.add(field,
                            std::string("weak learner in strong slot: ") + to_string(spec.name) + " cannot serve as the " +
                                slot + "-learner of " + to_string(plan.algorithm),
                            weak_citation);
                if (auto d = domains.find(slot); d != domains.end() && d->second)
                    if (auto problem = learner_domain_problem(spec.name, *d->second)) chk.add(field, *problem);
            });
        }
    };

    switch (plan.experiment) {
    case Experiment::counterexample:
        allowed({Algorithm::biased_dual});
        break;

    case Experiment::routing: {
        allowed({Algorithm::rool, Algorithm::r2ool});
        const auto get = [&](const std::string& k) { return c.get("routing", k); };
        chk.attempt("routing.n", [&] {
            if (auto v = get("n")) plan.n = parse_uint(*v, "routing.n");
            if (plan.n < 2) throw ConfigurationError("routing.n must be at least 2");
        });
        chk.attempt("routing.p", [&] {
            if (auto v = get("p")) plan.p = parse_real(*v, "routing.p");
            if (!(plan.p > 0.0 && plan.p <= 1.0)) throw ConfigurationError("routing.p must lie in (0,1]");
        });
        chk.attempt("routing.uncertainty", [&] {
            const std::string kind = get("uncertainty").value_or("l2ball");
            if (kind == "l2ball") plan.uncertainty.kind = UncertaintyKind::l2ball;
            else if (kind == "budget") plan.uncertainty.kind = UncertaintyKind::budget;
            else if (kind == "edge_removal") plan.uncertainty.kind = UncertaintyKind::edge_removal;
            else throw ConfigurationError("unknown uncertainty '" + kind + "' (expected l2ball, budget or edge_removal)");
        });
        chk.attempt("routing.radius", [&] {
            if (auto v = get("radius")) plan.uncertainty.radius = parse_real(*v, "routing.radius");
            if (!(plan.uncertainty.radius > 0.0)) throw ConfigurationError("routing.radius must be positive");
        });
        chk.attempt("routing.K", [&] {
            if (auto v = get("K")) plan.uncertainty.K = parse_real(*v, "routing.K");
            if (!(plan.uncertainty.K >= 0.0)) throw ConfigurationError("routing.K must be nonnegative");
        });
        chk.attempt("routing.benchmark_rounds", [&] {
            if (auto v = get("benchmark_rounds")) plan.benchmark_rounds = parse_uint(*v, "routing.benchmark_rounds");
        });
        chk.attempt("routing.graph_seed", [&] {
            if (auto v = get("graph_seed")) plan.graph_seed = parse_uint(*v, "routing.graph_seed");
        });
        if (plan.uncertainty.kind == UncertaintyKind::edge_removal && plan.algorithm == Algorithm::rool)
            chk.add("run.algorithm", "edge removal is not convex: use r2ool");
        // Kind-level probes: the graph itself is drawn per run.
        const auto probe_graph = std::make_shared<const Graph>(
            3, std::vector<Edge>{{0, 2, 0.5, 1.0}, {2, 1, 0.5, 1.0}, {0, 1, 0.5, 1.0}}, 0, 1);
        const Domain px = Domain::flow_polytope(probe_graph);
        const Domain pu = plan.uncertainty.kind == UncertaintyKind::l2ball ? Domain::l2ball(Point(3, 1.0), 1.0)
                          : plan.uncertainty.kind == UncertaintyKind::budget
                              ? Domain::budget(3, 1.0)
                              : Domain::edge_removal(probe_graph, 1);
        check_learners(0, {{"x", &px}, {"u", &pu}}, LearnerName::fpl);
        break;
    }

    case Experiment::mdp: {
        allowed({Algorithm::rool});
        const auto get = [&](const std::string& k) { return c.get("mdp", k); };
        chk.attempt("mdp.uncertainty", [&] {
            const std::string kind = get("uncertainty").value_or("l2ball");
            if (kind == "l2ball") plan.reward_kind = RewardUncertainty::l2ball;
            else if (kind == "sparse") plan.reward_kind = RewardUncertainty::sparse;
            else throw ConfigurationError("unknown reward uncertainty '" + kind + "' (expected l2ball or sparse)");
        });
        chk.attempt("mdp.radius", [&] {
            if (auto v = get("radius")) plan.radius = parse_real(*v, "mdp.radius");
            if (!(plan.radius >= 0.0)) throw ConfigurationError("mdp.radius must be nonnegative");
        });
        chk.attempt("mdp.file", [&] {
            if (auto file = get("file")) {
                std::ifstream in(*file);
                if (!in) throw ConfigurationError("cannot open MDP file '" + *file + "'");
                plan.mdp = std::make_shared<const Mdp>(read_mdp(in));
                return;
            }
            std::size_t S = 3, A = 2;
            double gamma = 0.9;
            std::uint64_t seed = 0;
            if (auto v = get("states")) S = parse_uint(*v, "mdp.states");
            if (auto v = get("actions")) A = parse_uint(*v, "mdp.actions");
            if (auto v = get("gamma")) gamma = parse_real(*v, "mdp.gamma");
            if (auto v = get("mdp_seed")) seed = parse_uint(*v, "mdp.mdp_seed");
            if (S == 0 || A == 0) throw ConfigurationError("mdp.states and mdp.actions must be positive");
            if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigurationError("mdp.gamma must lie in (0,1)");
            plan.mdp = std::make_shared<const Mdp>(random_mdp(S, A, gamma, seed));
        });
        break;
    }

    case Experiment::custom_game: {
        auto game = std::make_shared<GamePlan>();
        const auto xs = c.get("game", "x_domain");
        if (!xs) {
            chk.add("game.x_domain", "missing");
            return std::nullopt;
        }
        if (!chk.attempt("game.x_domain", [&] { game->X = parse_domain(*xs); })) return std::nullopt;
        const std::size_t dx = game->X->dims();

        if (!is_multi(plan.algorithm)) {
            const auto us = c.get("game", "u_domain");
            if (!us) {
                chk.add("game.u_domain", "missing");
                return std::nullopt;
            }
            if (!chk.attempt("game.u_domain", [&] { game->U = parse_domain(*us); })) return std::nullopt;
            if (!chk.attempt("game.matrix", [&] {
                    game->f = parse_objective(c.sections.at("game"), "game", dx);
                    if (game->f->u_dim() != game->U->dims())
                        throw ConfigurationError("game.matrix: needs one row per u coordinate");
                }))
                return std::nullopt;
            check_learners(1, {{"x", &*game->X}, {"u", &*game->U}}, LearnerName::ogd);
            try {
                game->benchmark = benchmark_value(*game->f, *game->X, *game->U).value;
            } catch (const std::invalid_argument&) {
            }
        } else {
            std::size_t n = 0;
            if (!chk.attempt("game.objectives", [&] {
                    n = parse_uint(c.get("game", "objectives").value_or(""), "game.objectives");
                    if (n == 0) throw ConfigurationError("game.objectives must be at least 1");
                }))
                return std::nullopt;
            std::vector<Objective> fs;
            std::vector<Domain> uds;
            bool ok = true;
            for (std::size_t i = 1; i <= n; ++i) {
                const std::string name = "objective" + std::to_string(i);
                ok = chk.attempt(name, [&] {
                    const auto s = c.sections.find(name);
                    if (s == c.sections.end()) throw ConfigurationError("section [" + name + "] missing");
                    const auto ud = s->second.find("u_domain");
                    if (ud == s->second.end()) throw ConfigurationError(name + ".u_domain: missing");
                    uds.push_back(parse_domain(ud->second));
                    fs.push_back(*parse_objective(s->second, name, dx));
                    if (fs.back().u_dim() != uds.back().dims())
                        throw ConfigurationError(name + ".matrix: needs one row per u coordinate");
                }) && ok;
            }
            std::optional<Domain> lam;
            ok = chk.attempt("lambda.domain", [&] {
                     lam = parse_domain(c.get("lambda", "domain").value_or("simplex:" + std::to_string(n)));
                 }) && ok;
            if (lam && !lambda_in_simplex(*lam, n)) {
                chk.add("lambda.domain", "Lambda must lie inside the probability simplex of dimension " + std::to_string(n),
                        lambda_citation);
                ok = false;
            }
            if ((plan.algorithm == Algorithm::randomized_multi_explicit ||
                 plan.algorithm == Algorithm::randomized_multi_distributional) &&
                lam && !(lam->is<Domain::Simplex>() && lam->dims() == n)) {
                chk.add("lambda.domain", "the randomized drivers need Lambda to be the full simplex");
                ok = false;
            }
            if (!ok) return std::nullopt;
            chk.attempt("game", [&] { game->multi.emplace(fs, *lam, uds); });
            std::map<std::string, const Domain*> domains{{"x", &*game->X}, {"lambda", &*lam}};
            for (std::size_t i = 0; i < n; ++i) domains["u" + std::to_string(i + 1)] = &game->multi->u_domains()[i];
            check_learners(n, domains, LearnerName::ogd);
        }
        plan.game = game;
        break;
    }
    }
    if (!findings.empty()) return std::nullopt;
    return plan;
}

// ---------------------------------------------------------------------------
// execution

struct SummaryRow {
    std::uint64_t seed = 0;
    double gap_bound = 0.0;
    std::optional<double> gap_evaluated;
    std::string verdict;
};

struct RepeatOutput {
    std::vector<std::pair<std::string, std::string>> files;  // name, contents
    std::vector<SummaryRow> summary;
    std::vector<std::pair<std::string, const std::vector<double>*>> gaps;
    std::vector<std::shared_ptr<const Transcript>> keep;  // owns the gap traces
    std::vector<std::string> log;
    std::size_t flawed_hits = 0, corrected_hits = 0;
};

std::string transcript_text(const Transcript& tr) {
    std::ostringstream os;
    write_transcript_csv(os, tr);
    return os.str();
}

std::string tag(std::size_t r) {
    std::ostringstream os;
    os << 'r' << std::setw(3) << std::setfill('0') << r;
    return os.str();
}

std::string certify(const Solution& s) {
    if (!s.gap_evaluated) return "n/a";
    return *s.gap_evaluated <= s.gap_bound + 1e-6 ? "certified" : "uncertified";
}

void add_solution(RepeatOutput& out, const std::string& name, std::uint64_t seed, const Solution& s,
                  std::string verdict) {
    out.files.emplace_back(name + ".csv", transcript_text(*s.transcript));
    out.summary.push_back({seed, s.gap_bound, s.gap_evaluated, std::move(verdict)});
    out.keep.push_back(s.transcript);
    if (!s.transcript->gap.empty()) out.gaps.emplace_back(name, &s.transcript->gap);
    for (const auto& w : s.warnings) out.log.push_back(name + ": warning: " + w);
}

/// Learner for a slot; best_response slots get an exact oracle that reads the
/// opponent's current move (and so trips the schedule guard under parallel play).
std::unique_ptr<Learner> slot_learner(const Plan& plan, const std::string& slot, const Objective* f,
                                      const Domain* own) {
    auto l = make_learner(plan.learners.at(slot));
    if (auto* br = dynamic_cast<BestResponseLearner*>(l.get()); br && f && own) {
        const bool is_x = slot == "x";
        br->set_oracle([f, own, is_x](const Point& opp) {
            return best_response(*f, opp, *own, is_x ? Sense::minimize : Sense::maximize,
                                 is_x ? Player::x : Player::u);
        });
    }
    return l;
}

RepeatOutput run_repeat(const Plan& plan, std::size_t r, std::uint64_t seed) {
    RepeatOutput out;
    const std::string rt = tag(r);
    switch (plan.experiment) {
    case Experiment::counterexample: {
        const std::uint64_t seeds[] = {seed};
        auto rep = counterexample_demo(plan.T, seeds);
        const auto& run = rep.runs.front();
        add_solution(out, "flawed_" + rt, seed, run.flawed, run.flawed_hit ? "flawed_hit" : "flawed_miss");
        add_solution(out, "corrected_" + rt, seed, run.corrected, run.corrected_hit ? "corrected_hit" : "corrected_miss");
        out.flawed_hits = run.flawed_hit;
        out.corrected_hits = run.corrected_hit;
        std::ostringstream os;
        os << rt << ": min_u u.xbar flawed " << format_real(run.flawed_value) << ", corrected "
           << format_real(run.corrected_value);
        out.log.push_back(os.str());
        break;
    }
    case Experiment::routing: {
        RoutingOptions ro;
        ro.T = plan.T;
        ro.delta = plan.delta;
        ro.benchmark_rounds = plan.benchmark_rounds;
        ro.learner_x = plan.learners.at("x");
        ro.learner_u = plan.learners.at("u");
        const auto inst = make_routing_instance(plan.n, plan.p, plan.uncertainty, plan.graph_seed.value_or(seed));
        auto res = robust_routing_experiment(inst, ro, seed);
        add_solution(out, "routing_" + rt, seed, res.solution, certify(res.solution));
        std::ostringstream os;
        os << rt << ": edges " << inst.graph->num_edges() << ", benchmark " << res.benchmark.method << ' '
           << format_real(res.benchmark.value);
        out.log.push_back(os.str());
        break;
    }
    case Experiment::mdp: {
        RobustMdpInstance inst{plan.mdp, plan.reward_kind, plan.radius, seed};
        auto res = robust_mdp_solve(inst, plan.T, plan.delta, seed);
        add_solution(out, "mdp_" + rt, seed, res.solution, "n/a");
        std::ostringstream pol;
        pol << "state,action,probability\n";
        for (std::size_t s = 0; s < res.policy.probs.size(); ++s)
            for (std::size_t a = 0; a < res.policy.probs[s].size(); ++a)
                pol << s << ',' << a << ',' << format_real(res.policy.probs[s][a]) << '\n';
        out.files.emplace_back("policy_" + rt + ".csv", pol.str());
        out.log.push_back(rt + ": robust value " + format_real(res.robust_value));
        break;
    }
    case Experiment::custom_game: {
        const GamePlan& g = *plan.game;
        robustplay::RunOptions o;
        o.T = plan.T;
        o.delta = plan.delta;
        o.seed = seed;
        o.benchmark = g.benchmark;
        const std::string name = std::string(to_string(plan.algorithm)) + "_" + rt;
        if (!is_multi(plan.algorithm)) {
            const Objective& f = *g.f;
            const Domain& X = *g.X;
            const Domain& U = *g.U;
            Solution s;
            switch (plan.algorithm) {
            case Algorithm::rool:
            case Algorithm::r2ool: {
                auto lx = slot_learner(plan, "x", &f, &X);
                auto lu = slot_learner(plan, "u", &f, &U);
                s = plan.algorithm == Algorithm::rool ? rool_run(f, X, U, *lx, *lu, o) : r2ool_run(f, X, U, *lx, *lu, o);
                break;
            }
            case Algorithm::biased_dual: {
                auto lu = slot_learner(plan, "u", &f, &U);
                s = biased_dual_run(f, X, U, *lu, o);
                break;
            }
            default: {
                auto lx = slot_learner(plan, "x", &f, &X);
                s = biased_primal_randomized_run(f, X, U, *lx, o);
                break;
            }
            }
            add_solution(out, name, seed, s, certify(s));
            break;
        }
        const MultiObjective& m = *g.multi;
        const std::size_t n = m.size();
        std::vector<std::unique_ptr<Learner>> owned;
        std::vector<Learner*> us;
        for (std::size_t i = 1; i <= n; ++i) {
            owned.push_back(make_learner(plan.learners.at("u" + std::to_string(i))));
            us.push_back(owned.back().get());
        }
        auto get = [&](const std::string& slot) { return make_learner(plan.learners.at(slot)); };
        switch (plan.algorithm) {
        case Algorithm::multi_explicit: {
            auto lx = get("x");
            add_solution(out, name, seed, multi_explicit_run(m, *g.X, *lx, us, o), "n/a");
            break;
        }
        case Algorithm::multi_distributional: {
            auto lx = get("x");
            auto ll = get("lambda");
            add_solution(out, name, seed, multi_distributional_run(m, *g.X, *lx, us, *ll, o), "n/a");
            break;
        }
        case Algorithm::multi_biased_dual:
            add_solution(out, name, seed, multi_biased_run(m, *g.X, BiasedMode::strong_dual, us, o), "n/a");
            break;
        case Algorithm::multi_biased_primal: {
            auto lx = get("x");
            add_solution(out, name, seed, multi_biased_run(m, *g.X, BiasedMode::strong_primal, {lx.get()}, o), "n/a");
            break;
        }
        default: {
            const bool dist = plan.algorithm == Algorithm::randomized_multi_distributional;
            auto lx = get("x");
            std::unique_ptr<Learner> ll = dist ? get("lambda") : nullptr;
            auto res = randomized_multi_run(m, *g.X, dist ? RandomizedMode::distributional : RandomizedMode::explicit_max,
                                            *lx, us, ll.get(), o);
            add_solution(out, name, seed, res.solution, to_string(res.verdict));
            out.log.push_back(rt + ": average F " + format_real(res.average_F) + ", threshold " +
                              format_real(res.threshold));
            break;
        }
        }
        break;
    }
    }
    return out;
}

std::size_t worker_count(const RunnerOptions& o, std::size_t jobs) {
    std::size_t n = o.threads;
    if (n == 0) {
        if (const char* env = std::getenv("ROBUSTPLAY_THREADS")) {
            try {
                n = std::stoul(env);
            } catch (const std::exception&) {
                n = 0;
            }
        }
    }
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(n, jobs));
}

std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

}  // namespace

std::vector<Finding> validate(const RunConfig& config) {
    std::vector<Finding> findings;
    (void)build_plan(config, findings);
    return findings;
}

void write_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
        out << contents;
        out.flush();
        if (!out) throw std::runtime_error("write failed for '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path);
}

int run(RunConfig config, const RunnerOptions& options, std::ostream& log, std::ostream& err) {
    if (options.seed) config.set("run", "seed", std::to_string(*options.seed));
    if (options.output_dir) config.set("run", "output_dir", *options.output_dir);
    if (options.repeats) config.set("run", "repeats", std::to_string(*options.repeats));

    std::vector<Finding> findings;
    const auto plan = build_plan(config, findings);
    if (!plan) {
        for (const auto& f : findings) {
            err << "config error: " << f.field << ": " << f.message;
            if (!f.citation.empty()) err << " [" << f.citation << "]";
            err << '\n';
        }
        return exit_config;
    }
    const std::size_t repeats = config.repeats();
    const std::uint64_t seed = config.seed();
    const std::filesystem::path dir = config.output_dir();

    std::vector<RepeatOutput> outputs(repeats);
    std::vector<std::exception_ptr> errors(repeats);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r; (r = next.fetch_add(1)) < repeats;) {
            try {
                outputs[r] = run_repeat(*plan, r, seed + r);
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::thread> pool;
        const std::size_t workers = worker_count(options, repeats);
        for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
    }
    for (std::size_t r = 0; r < repeats; ++r) {
        if (!errors[r]) continue;
        try {
            std::rethrow_exception(errors[r]);
        } catch (const ScheduleViolation& e) {
            err << "schedule violation in " << tag(r) << ": " << e.what() << '\n';
            return exit_schedule;
        } catch (const std::invalid_argument& e) {
            err << "config error in " << tag(r) << ": " << e.what() << '\n';
            return exit_config;
        } catch (const std::exception& e) {
            err << "error in " << tag(r) << ": " << e.what() << '\n';
            return exit_failure;
        }
    }

    std::filesystem::create_directories(dir);
    std::ostringstream summary, plot;
    summary << "config_hash,seed,T,gap_bound,gap_evaluated,verdict\n";
    plot << "run,t,log10_gap\n";
    std::size_t flawed = 0, corrected = 0;
    for (std::size_t r = 0; r < repeats; ++r) {
        auto& o = outputs[r];
        for (const auto& [name, text] : o.files) write_atomic((dir / name).string(), text);
        for (const auto& row : o.summary)
            summary << plan->hash << ',' << row.seed << ',' << plan->T << ',' << format_real(row.gap_bound) << ','
                    << optional_real(row.gap_evaluated) << ',' << row.verdict << '\n';
        for (const auto& [name, gaps] : o.gaps)
            for (std::size_t k = 0; k < gaps->size(); ++k)
                plot << name << ',' << k + 1 << ',' << format_real(std::log10(std::max((*gaps)[k], 1e-16))) << '\n';
        flawed += o.flawed_hits;
        corrected += o.corrected_hits;
        if (!options.quiet)
            for (const auto& line : o.log) log << line << '\n';
    }
    write_atomic((dir / "summary.csv").string(), summary.str());
    write_atomic((dir / "plotdata.csv").string(), plot.str());
    if (plan->experiment == Experiment::counterexample) {
        const auto need = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(repeats)));
        const bool pass = flawed >= need && corrected >= need;
        std::ostringstream d;
        d << "seeds,flawed_hits,corrected_hits,verdict\n"
          << repeats << ',' << flawed << ',' << corrected << ',' << (pass ? "pass" : "fail") << '\n';
        write_atomic((dir / "dichotomy.csv").string(), d.str());
        if (!options.quiet)
            log << "dichotomy: flawed " << flawed << '/' << repeats << ", corrected " << corrected << '/' << repeats
                << (pass ? " (pass)" : " (fail)") << '\n';
    }
    if (!options.quiet) log << "wrote " << dir.string() << '\n';
    return exit_ok;
}

}  // namespace robustplay::cli
