#include "robustplay/meta.hpp"

#include "robustplay/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace robustplay {

namespace {

using LossFn = std::function<double(const Point& x, const Point& u, const Point* lambda)>;
using FeedbackFn = std::function<Feedback(const Point& x, const Point& u, const Point* lambda)>;

struct EngineSpec {
    ScheduleOrder schedule = ScheduleOrder::parallel;
    Learner* x = nullptr;
    Learner* u = nullptr;
    Learner* lambda = nullptr;
    LossFn loss;
    FeedbackFn feedback_x;
    FeedbackFn feedback_u;
    FeedbackFn feedback_lambda;
};

// The single game loop. Each learner only ever sees what the schedule grants:
// prefix feedback through observe(), and the opponent's current move through
// an OpponentView that is empty unless this player moves second.
std::shared_ptr<Transcript> run_engine(const EngineSpec& spec, std::size_t T) {
    auto tr = std::make_shared<Transcript>();
    tr->schedule = spec.schedule;
    tr->rounds.reserve(T);
    for (std::size_t t = 1; t <= T; ++t) {
        Point x, u;
        switch (spec.schedule) {
        case ScheduleOrder::parallel:
            x = spec.x->next(PlayContext{t, OpponentView{}});
            u = spec.u->next(PlayContext{t, OpponentView{}});
            break;
        case ScheduleOrder::dual_first:
            u = spec.u->next(PlayContext{t, OpponentView{}});
            x = spec.x->next(PlayContext{t, OpponentView{&u}});
            break;
        case ScheduleOrder::primal_first:
            x = spec.x->next(PlayContext{t, OpponentView{}});
            u = spec.u->next(PlayContext{t, OpponentView{&x}});
            break;
        }
        std::optional<Point> lambda;
        if (spec.lambda) lambda = spec.lambda->next(PlayContext{t, OpponentView{}});
        const Point* lam = lambda ? &*lambda : nullptr;

        const double loss = spec.loss(x, u, lam);
        spec.x->observe(spec.feedback_x(x, u, lam));
        spec.u->observe(spec.feedback_u(x, u, lam));
        if (spec.lambda) spec.lambda->observe(spec.feedback_lambda(x, u, lam));
        tr->rounds.push_back(Round{t, std::move(x), std::move(u), std::move(lambda), loss});
    }
    return tr;
}

LossBounds bounds_for(const Objective& f, const Domain& X, const Domain& U, Player side, const RunOptions& o) {
    const auto& given = side == Player::x ? o.x_bounds : o.u_bounds;
    if (given) return *given;
    if (!f.is_bilinear())
        throw ConfigurationError(std::string("loss bounds for player ") + to_string(side) +
                                 " are required with a black-box objective");
    return loss_bounds(f, X, U, side);
}

void check_options(const RunOptions& o) {
    if (o.T == 0) throw std::invalid_argument("no rounds");
    if (!(o.delta > 0.0 && o.delta < 1.0)) throw ConfigurationError("delta must lie in (0,1)");
}

void require_strong(const Learner& l, const char* slot, const RunOptions& o) {
    if (l.strength() == Strength::weak && !o.allow_weak_in_strong_slot)
        throw ConfigurationError(std::string("weak learner in strong slot: ") + to_string(l.name()) + " cannot fill the " +
                                 slot + " slot (it is only no-regret against non-anticipatory sequences)");
}

double failure_probability(std::initializer_list<const Learner*> learners, double delta) {
    double p = 0.0;
    for (auto* l : learners)
        if (l && l->randomized()) p += delta;
    return std::min(1.0, p);
}

Feedback x_feedback(const Objective& f, const Point& x, const Point& u) {
    Feedback fb{f.grad_x(x, u), f.value(x, u), {}};
    if (!f.is_bilinear()) fb.evaluate = [&f, u](const Point& z) { return f.value(z, u); };
    return fb;
}

Feedback u_feedback(const Objective& f, const Point& x, const Point& u) {
    Feedback fb{-f.grad_u(x, u), -f.value(x, u), {}};
    if (!f.is_bilinear()) fb.evaluate = [&f, x](const Point& z) { return -f.value(x, z); };
    return fb;
}

EngineSpec single_spec(const Objective& f, ScheduleOrder schedule, Learner& lx, Learner& lu) {
    EngineSpec s;
    s.schedule = schedule;
    s.x = &lx;
    s.u = &lu;
    s.loss = [&f](const Point& x, const Point& u, const Point*) { return f.value(x, u); };
    s.feedback_x = [&f](const Point& x, const Point& u, const Point*) { return x_feedback(f, x, u); };
    s.feedback_u = [&f](const Point& x, const Point& u, const Point*) { return u_feedback(f, x, u); };
    return s;
}

// Prefix regrets, gap bound and (with a benchmark) gap per round for bilinear f.
void fill_traces(Transcript& tr, const Objective& f, const Domain& X, const Domain& U, const Learner* lx,
                 const Learner* lu, const RunOptions& o, bool distribution) {
    if (!o.record_traces || !f.is_bilinear()) return;
    const std::size_t T = tr.rounds.size();
    CompensatedVector cx(X.dims()), cu(U.dims()), xsum(X.dims());
    CompensatedSum kx, ku, played;
    tr.cum_regret_x.resize(T);
    tr.cum_regret_u.resize(T);
    tr.gap_bound.resize(T);
    if (o.benchmark) tr.gap.resize(T);
    for (std::size_t k = 0; k < T; ++k) {
        const auto& r = tr.rounds[k];
        cx.add(f.x_coefficients(r.u));
        kx.add(f.x_constant(r.u));
        cu.add(f.u_coefficients(r.x));
        ku.add(f.u_constant(r.x));
        played.add(f.value(r.x, r.u));
        xsum.add(r.x);
        const Point tx = cx.value();
        const Point tu = cu.value();
        const double best_x = dot(tx, linear_argmax(X, tx, Sense::minimize)) + kx.value();
        const double best_u = dot(tu, linear_argmax(U, tu, Sense::maximize)) + ku.value();
        tr.cum_regret_x[k] = played.value() - best_x;
        tr.cum_regret_u[k] = best_u - played.value();
        const std::size_t t = k + 1;
        const double rx = lx ? lx->regret_bound(t, o.delta) : 0.0;
        const double ru = lu ? lu->regret_bound(t, o.delta) : 0.0;
        tr.gap_bound[k] = (rx + ru) / static_cast<double>(t);
        if (o.benchmark) {
            // Bilinear: the expectation over the empirical distribution is the value at its mean.
            Point mean = xsum.value();
            mean *= 1.0 / static_cast<double>(t);
            tr.gap[k] = worst_case_value(f, mean, U) - *o.benchmark;
        }
    }
    (void)distribution;
}

Solution make_solution(std::shared_ptr<Transcript> tr, SolutionKind kind) {
    Solution s;
    s.kind = kind;
    std::vector<Point> xs;
    xs.reserve(tr->rounds.size());
    for (const auto& r : tr->rounds) xs.push_back(r.x);
    if (kind == SolutionKind::averaged_point) {
        s.xbar = average_point(xs);
    } else {
        s.support = std::move(xs);
    }
    s.transcript = std::move(tr);
    return s;
}

void note_seeds(Transcript& tr, const RunOptions& o, std::initializer_list<std::pair<const char*, const Learner*>> ls) {
    tr.notes["master_seed"] = std::to_string(o.seed);
    for (auto [name, l] : ls)
        if (l) tr.notes[std::string("seed_") + name] = std::to_string(l->seed());
}

Solution single_run(const Objective& f, const Domain& X, const Domain& U, Learner& lx, Learner& lu,
                    const RunOptions& o, ScheduleOrder schedule, SolutionKind kind, bool x_is_oracle,
                    bool u_is_oracle) {
    check_options(o);
    if (X.dims() != f.x_dim() || U.dims() != f.u_dim()) throw ConfigurationError("domain dimensions do not match f");
    const RandomSource master(o.seed);
    lx.seed_from(master, 0);
    lu.seed_from(master, 1);
    if (!x_is_oracle) lx.prepare(X, bounds_for(f, X, U, Player::x, o), o.T);
    if (!u_is_oracle) lu.prepare(U, bounds_for(f, X, U, Player::u, o), o.T);

    auto tr = run_engine(single_spec(f, schedule, lx, lu), o.T);
    note_seeds(*tr, o, {{"x", &lx}, {"u", &lu}});
    const Learner* bx = x_is_oracle ? nullptr : &lx;
    const Learner* bu = u_is_oracle ? nullptr : &lu;
    fill_traces(*tr, f, X, U, bx, bu, o, kind == SolutionKind::empirical_distribution);

    Solution s = make_solution(tr, kind);
    auto& c = s.certificate;
    c.T = o.T;
    c.delta = o.delta;
    c.bound_x = bx ? bx->regret_bound(o.T, o.delta) : 0.0;
    c.bound_u = bu ? bu->regret_bound(o.T, o.delta) : 0.0;
    c.failure_probability = failure_probability({bx, bu}, o.delta);
    const std::size_t steps = o.grid_steps;
    try {
        c.realized_regret_x = regret_of(*tr, Player::x, f, X, steps);
        c.realized_regret_u = regret_of(*tr, Player::u, f, U, steps);
    } catch (const std::invalid_argument& e) {
        c.realized_regret_x = c.realized_regret_u = std::numeric_limits<double>::quiet_NaN();
        s.warnings.push_back(std::string("realized regret not computed: ") + e.what());
    }
    s.gap_bound = (c.bound_x + c.bound_u) / static_cast<double>(o.T);
    if (o.benchmark) {
        try {
            s.gap_evaluated = evaluate_gap(s, f, U, *o.benchmark, steps);
        } catch (const std::invalid_argument& e) {
            s.warnings.push_back(e.what());
        }
    }
    return s;
}

// Per-u-block feedback on -f^i, concatenated for a block learner.
Feedback multi_u_feedback(const MultiObjective& m, const Point& x, const std::vector<Point>& us) {
    std::vector<Point> grads;
    double loss = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        grads.push_back(-m.objectives()[i].grad_u(x, us[i]));
        loss -= m.objectives()[i].value(x, us[i]);
    }
    return Feedback{concat(grads), loss, {}};
}

// Runs the u^i learners of a multi-objective game as one block learner without
// owning them.
class BorrowedBlocks final : public Learner {
public:
    BorrowedBlocks(std::vector<Learner*> blocks, std::vector<std::size_t> sizes)
        : blocks_(std::move(blocks)), sizes_(std::move(sizes)) {}
    LearnerName name() const override {
        LearnerName weakest = blocks_.front()->name();
        for (auto* b : blocks_)
            if (b->strength() == Strength::weak) weakest = b->name();
        return weakest;
    }
    bool randomized() const override {
        return std::any_of(blocks_.begin(), blocks_.end(), [](auto* b) { return b->randomized(); });
    }
    void prepare(const Domain&, const LossBounds&, std::size_t) override {}
    Point next(const PlayContext& ctx) override {
        std::vector<Point> out;
        for (auto* b : blocks_) out.push_back(b->next(ctx));
        return concat(out);
    }
    void observe(const Feedback& fb) override {
        const auto g = split(fb.gradient, sizes_);
        for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i]->observe(Feedback{g[i], 0.0, {}});
    }
    double regret_bound(std::size_t T, double delta) const override {
        double m = 0.0;
        for (auto* b : blocks_) m = std::max(m, b->regret_bound(T, delta));
        return m;
    }
    void seed_from(const RandomSource& master, std::uint64_t slot) override {
        for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i]->seed_from(master, slot + i);
    }

private:
    std::vector<Learner*> blocks_;
    std::vector<std::size_t> sizes_;
};

// Regret of u^i on f^i over a multi-objective transcript (max_i).
double multi_u_regret(const MultiObjective& m, const Transcript& tr, std::size_t grid_steps) {
    double worst = -std::numeric_limits<double>::infinity();
    const auto sizes = m.u_block_sizes();
    for (std::size_t i = 0; i < m.size(); ++i) {
        Transcript sub;
        for (const auto& r : tr.rounds) {
            auto parts = split(r.u, sizes);
            sub.rounds.push_back(Round{r.t, r.x, std::move(parts[i]), std::nullopt, 0.0});
        }
        worst = std::max(worst, regret_of(sub, Player::u, m.objectives()[i], m.u_domains()[i], grid_steps));
    }
    return worst;
}

std::vector<Point> u_blocks(const MultiObjective& m, const Point& u) { return split(u, m.u_block_sizes()); }

// min_x sum_t F(x, u_t) over a grid (or vertices) of X.
double min_sum_F(const MultiObjective& m, const Domain& X, const Transcript& tr, std::size_t grid_steps) {
    const auto grid = grid_points(X, std::max<std::size_t>(grid_steps, 1), 200'000);
    std::vector<std::vector<Point>> us;
    for (const auto& r : tr.rounds) us.push_back(u_blocks(m, r.u));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& x : grid) {
        CompensatedSum s;
        for (const auto& u : us) s.add(m.explicit_max(x, u));
        best = std::min(best, s.value());
    }
    return best;
}

LossBounds multi_x_bounds(const MultiObjective& m, const Domain& X, const RunOptions& o) {
    if (o.x_bounds) return *o.x_bounds;
    // Gradients of <lambda, f> with lambda in the simplex are convex combinations
    // (or shrinkages) of the per-objective gradients.
    LossBounds b{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto& f = m.objectives()[i];
        if (!f.is_bilinear()) throw ConfigurationError("loss bounds are required with black-box objectives");
        const auto bi = loss_bounds(f, X, m.u_domains()[i], Player::x);
        b.grad_l2 = std::max(b.grad_l2, bi.grad_l2);
        b.grad_l1 = std::max(b.grad_l1, bi.grad_l1);
        b.value_abs = std::max(b.value_abs, bi.value_abs);
    }
    return b;
}

LossBounds multi_u_bounds(const MultiObjective& m, const Domain& X, std::size_t i, const RunOptions& o) {
    if (o.u_bounds) return *o.u_bounds;
    const auto& f = m.objectives()[i];
    if (!f.is_bilinear()) throw ConfigurationError("loss bounds are required with black-box objectives");
    return loss_bounds(f, X, m.u_domains()[i], Player::u);
}

// Bound on |f^i| over the domains, used for the lambda-learner's linear losses.
double multi_value_bound(const MultiObjective& m, const Domain& X) {
    double b = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto& f = m.objectives()[i];
        if (!f.is_bilinear()) return 1.0;
        const auto& U = m.u_domains()[i];
        const double a = f.matrix().is_diagonal() ? f.matrix().max_abs_entry() : f.matrix().frobenius();
        b = std::max(b, a * max_l2_norm(X) * max_l2_norm(U) + norm2(f.x_cost()) * max_l2_norm(X) +
                            norm2(f.u_cost()) * max_l2_norm(U) + std::abs(f.offset()));
    }
    return std::max(b, 1e-12);
}

void check_multi_dims(const MultiObjective& m, const Domain& X, std::size_t n_learners) {
    if (X.dims() != m.x_dim()) throw ConfigurationError("x-domain dimension does not match the objectives");
    if (n_learners != m.size()) throw ConfigurationError("need one u-learner per objective");
}

}  // namespace

// ---------------------------------------------------------------------------
// evaluation

double worst_case_value(const Objective& f, const Point& x, const Domain& U, std::size_t grid_steps) {
    if (f.is_bilinear()) {
        const Point theta = f.u_coefficients(x);
        return dot(theta, linear_argmax(U, theta, Sense::maximize)) + f.u_constant(x);
    }
    if (grid_steps == 0) throw std::invalid_argument("no worst-case oracle");
    std::vector<Point> grid;
    try {
        grid = grid_points(U, grid_steps);
    } catch (const std::exception&) {
        throw std::invalid_argument("no worst-case oracle");
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& u : grid) best = std::max(best, f.value(x, u));
    return best;
}

double worst_case_expected(const Objective& f, const std::vector<Point>& support, const Domain& U,
                           std::size_t grid_steps) {
    if (support.empty()) throw std::invalid_argument("no rounds");
    if (f.is_bilinear()) return worst_case_value(f, average_point(support), U);
    if (grid_steps == 0) throw std::invalid_argument("no worst-case oracle");
    std::vector<Point> grid;
    try {
        grid = grid_points(U, grid_steps);
    } catch (const std::exception&) {
        throw std::invalid_argument("no worst-case oracle");
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& u : grid) {
        CompensatedSum s;
        for (const auto& x : support) s.add(f.value(x, u));
        best = std::max(best, s.value() / static_cast<double>(support.size()));
    }
    return best;
}

double evaluate_gap(const Solution& s, const Objective& f, const Domain& U, double benchmark, std::size_t grid_steps) {
    const double worst = s.kind == SolutionKind::averaged_point
                             ? worst_case_value(f, s.xbar.value(), U, grid_steps)
                             : worst_case_expected(f, s.support, U, grid_steps);
    return worst - benchmark;
}

BenchmarkResult benchmark_value(const Objective& f, const Domain& X, const Domain& U, const BenchmarkOptions& o) {
    if (X.dims() != f.x_dim() || U.dims() != f.u_dim()) throw std::invalid_argument("benchmark: dimension mismatch");

    if (f.is_bilinear() && f.matrix().max_abs_entry() == 0.0 && norm_inf(f.x_cost()) == 0.0) {
        // f does not depend on x.
        return {worst_case_value(f, Point(f.x_dim()), U), "constant", 0.0, 0.0};
    }

    std::vector<Point> xv, uv;
    bool x_finite = true, u_finite = true;
    try {
        xv = enumerate_vertices(X, o.max_vertices);
    } catch (const std::exception&) {
        x_finite = false;
    }
    try {
        uv = enumerate_vertices(U, o.max_vertices);
    } catch (const std::exception&) {
        u_finite = false;
    }

    if (f.is_bilinear() && x_finite && u_finite && xv.size() * uv.size() <= 4'000'000) {
        // Affine in each argument: the min-max over the hulls is the mixed value of the vertex game.
        std::vector<std::vector<double>> M(xv.size(), std::vector<double>(uv.size()));
        for (std::size_t i = 0; i < xv.size(); ++i)
            for (std::size_t j = 0; j < uv.size(); ++j) M[i][j] = f.value(xv[i], uv[j]);
        return {solve_matrix_game(M).value, "vertex_lp", 0.0, 0.0};
    }

    if (f.is_bilinear()) {
        // Grid over x with an exact inner maximization.
        try {
            const auto grid = grid_points(X, o.grid_steps, o.max_grid);
            double best = std::numeric_limits<double>::infinity();
            for (const auto& x : grid) best = std::min(best, worst_case_value(f, x, U));
            return {best, "grid", 1.0 / static_cast<double>(o.grid_steps), 0.0};
        } catch (const std::exception&) {
        }
        if (o.sandwich_rounds > 0 && has_projection(U)) {
            // Long FPL(x) vs OGD(u) run: min_x f(x, ubar) <= value <= max_u f(xbar, u).
            FplLearner lx;
            OgdLearner lu;
            RunOptions ro;
            ro.T = o.sandwich_rounds;
            ro.seed = o.seed;
            ro.record_traces = false;
            const auto sol = rool_run(f, X, U, lx, lu, ro);
            std::vector<Point> us;
            for (const auto& r : sol.transcript->rounds) us.push_back(r.u);
            const Point ubar = average_point(us);
            const Point tx = f.x_coefficients(ubar);
            const double lower = dot(tx, linear_argmax(X, tx, Sense::minimize)) + f.x_constant(ubar);
            const double upper = worst_case_value(f, *sol.xbar, U);
            return {lower, "sandwich", 0.0, upper - lower};
        }
        throw std::invalid_argument("benchmark unavailable");
    }

    // Black box: grid over both sides.
    try {
        const auto gx = grid_points(X, o.grid_steps, o.max_grid);
        const auto gu = grid_points(U, o.grid_steps, o.max_grid);
        if (gx.size() * gu.size() > 50'000'000) throw std::length_error("grid too large");
        double best = std::numeric_limits<double>::infinity();
        for (const auto& x : gx) {
            double worst = -std::numeric_limits<double>::infinity();
            for (const auto& u : gu) worst = std::max(worst, f.value(x, u));
            best = std::min(best, worst);
        }
        return {best, "grid", 1.0 / static_cast<double>(o.grid_steps), 0.0};
    } catch (const std::exception&) {
        throw std::invalid_argument("benchmark unavailable");
    }
}

// ---------------------------------------------------------------------------
// single objective drivers

Solution rool_run(const Objective& f, const Domain& X, const Domain& U, Learner& lx, Learner& lu,
                  const RunOptions& o) {
    if (!is_convex(X)) throw ConfigurationError("rool needs a convex x-domain; use r2ool for non-convex X");
    if (!f.convex_in_x()) throw ConfigurationError("rool needs f convex in x; use r2ool");
    return single_run(f, X, U, lx, lu, o, ScheduleOrder::parallel, SolutionKind::averaged_point, false, false);
}

Solution r2ool_run(const Objective& f, const Domain& X, const Domain& U, Learner& lx, Learner& lu,
                   const RunOptions& o) {
    return single_run(f, X, U, lx, lu, o, ScheduleOrder::parallel, SolutionKind::empirical_distribution, false, false);
}

Solution biased_dual_run(const Objective& f, const Domain& X, const Domain& U, Learner& lu, const RunOptions& o,
                         double approx_factor, BestResponseLearner::Oracle x_oracle) {
    require_strong(lu, "strong u-learner", o);
    if (!(approx_factor >= 1.0)) throw ConfigurationError("approximation factor must be >= 1");
    if (!is_convex(X)) throw ConfigurationError("biased play with an averaged x needs a convex x-domain");
    if (!x_oracle) {
        const std::size_t steps = o.grid_steps;
        x_oracle = [&f, &X, steps](const Point& u) { return best_response(f, u, X, Sense::minimize, Player::x, steps); };
    }
    BestResponseLearner bx(std::move(x_oracle), approx_factor);
    Solution s = single_run(f, X, U, bx, lu, o, ScheduleOrder::dual_first, SolutionKind::averaged_point, true, false);
    s.benchmark_factor = approx_factor;
    s.gap_bound = s.certificate.bound_u / static_cast<double>(o.T);
    if (lu.strength() == Strength::weak)
        s.warnings.push_back("weak learner in strong slot (bypass enabled): the certificate does not apply");
    return s;
}

Solution biased_primal_randomized_run(const Objective& f, const Domain& X, const Domain& U, Learner& lx,
                                      const RunOptions& o) {
    require_strong(lx, "strong x-learner", o);
    const std::size_t steps = o.grid_steps;
    BestResponseLearner bu(
        [&f, &U, steps](const Point& x) { return best_response(f, x, U, Sense::maximize, Player::u, steps); });
    Solution s = single_run(f, X, U, lx, bu, o, ScheduleOrder::primal_first, SolutionKind::empirical_distribution,
                            false, true);
    s.gap_bound = s.certificate.bound_x / static_cast<double>(o.T);
    return s;
}

// ---------------------------------------------------------------------------
// multi-objective drivers

Solution multi_explicit_run(const MultiObjective& m, const Domain& X, Learner& lx, std::vector<Learner*> lus,
                            const RunOptions& o) {
    check_options(o);
    check_multi_dims(m, X, lus.size());
    const RandomSource master(o.seed);
    lx.seed_from(master, 0);
    BorrowedBlocks ub(lus, m.u_block_sizes());
    ub.seed_from(master, 1);
    lx.prepare(X, multi_x_bounds(m, X, o), o.T);
    for (std::size_t i = 0; i < lus.size(); ++i) lus[i]->prepare(m.u_domains()[i], multi_u_bounds(m, X, i, o), o.T);

    EngineSpec spec;
    spec.schedule = ScheduleOrder::parallel;
    spec.x = &lx;
    spec.u = &ub;
    spec.loss = [&m](const Point& x, const Point& u, const Point*) { return m.explicit_max(x, u_blocks(m, u)); };
    spec.feedback_x = [&m](const Point& x, const Point& u, const Point*) {
        const auto us = u_blocks(m, u);
        return Feedback{m.explicit_subgradient(x, us), m.explicit_max(x, us), {}};
    };
    spec.feedback_u = [&m](const Point& x, const Point& u, const Point*) {
        return multi_u_feedback(m, x, u_blocks(m, u));
    };
    auto tr = run_engine(spec, o.T);
    for (auto& r : tr->rounds) {
        Point lam;
        m.explicit_max(r.x, u_blocks(m, r.u), &lam);
        r.lambda = std::move(lam);
    }
    note_seeds(*tr, o, {{"x", &lx}});
    for (std::size_t i = 0; i < lus.size(); ++i) tr->notes["seed_u" + std::to_string(i + 1)] = std::to_string(lus[i]->seed());

    Solution s = make_solution(tr, SolutionKind::averaged_point);
    if (lx.name() == LearnerName::fpl)
        s.warnings.push_back("fpl as the x-learner for F: F is not linear in x, so its guarantee does not carry over");
    auto& c = s.certificate;
    c.T = o.T;
    c.delta = o.delta;
    c.bound_x = lx.regret_bound(o.T, o.delta);
    c.bound_u = ub.regret_bound(o.T, o.delta);
    double fp = failure_probability({&lx}, o.delta);
    for (auto* l : lus) fp += l->randomized() ? o.delta : 0.0;
    c.failure_probability = std::min(1.0, fp);
    c.realized_regret_u = multi_u_regret(m, *tr, o.grid_steps);
    try {
        CompensatedSum played;
        for (const auto& r : tr->rounds) played.add(r.loss);
        c.realized_regret_x = played.value() - min_sum_F(m, X, *tr, o.grid_steps ? o.grid_steps : 100);
    } catch (const std::exception& e) {
        c.realized_regret_x = std::numeric_limits<double>::quiet_NaN();
        s.warnings.push_back(std::string("realized x-regret not computed: ") + e.what());
    }
    s.gap_bound = (c.bound_x + c.bound_u) / static_cast<double>(o.T);
    return s;
}

Solution multi_distributional_run(const MultiObjective& m, const Domain& X, Learner& lx, std::vector<Learner*> lus,
                                  Learner& ll, const RunOptions& o) {
    check_options(o);
    check_multi_dims(m, X, lus.size());
    const std::size_t n = m.size();
    const RandomSource master(o.seed);
    lx.seed_from(master, 0);
    BorrowedBlocks ub(lus, m.u_block_sizes());
    ub.seed_from(master, 1);
    ll.seed_from(master, n + 1);
    lx.prepare(X, multi_x_bounds(m, X, o), o.T);
    for (std::size_t i = 0; i < n; ++i) lus[i]->prepare(m.u_domains()[i], multi_u_bounds(m, X, i, o), o.T);
    {
        // lambda's loss is -<lambda, f>: |g.lambda| <= max |f^i|, ||g||_1 <= n max |f^i|.
        const double vb = multi_value_bound(m, X);
        ll.prepare(m.lambda_domain(), LossBounds{std::sqrt(static_cast<double>(n)) * vb, static_cast<double>(n) * vb, vb},
                   o.T);
    }

    EngineSpec spec;
    spec.schedule = ScheduleOrder::parallel;
    spec.x = &lx;
    spec.u = &ub;
    spec.lambda = &ll;
    spec.loss = [&m](const Point& x, const Point& u, const Point* lam) { return m.weighted(x, u_blocks(m, u), *lam); };
    spec.feedback_x = [&m](const Point& x, const Point& u, const Point* lam) {
        const auto us = u_blocks(m, u);
        Point g(x.size());
        for (std::size_t i = 0; i < m.size(); ++i)
            if ((*lam)[i] != 0.0) g += (*lam)[i] * m.objectives()[i].grad_x(x, us[i]);
        return Feedback{std::move(g), m.weighted(x, us, *lam), {}};
    };
    spec.feedback_u = [&m](const Point& x, const Point& u, const Point*) {
        return multi_u_feedback(m, x, u_blocks(m, u));
    };
    spec.feedback_lambda = [&m](const Point& x, const Point& u, const Point* lam) {
        const Point v = m.values(x, u_blocks(m, u));
        return Feedback{-v, -dot(*lam, v), {}};
    };
    auto tr = run_engine(spec, o.T);
    note_seeds(*tr, o, {{"x", &lx}, {"lambda", &ll}});
    for (std::size_t i = 0; i < n; ++i) tr->notes["seed_u" + std::to_string(i + 1)] = std::to_string(lus[i]->seed());

    Solution s = make_solution(tr, SolutionKind::averaged_point);
    auto& c = s.certificate;
    c.T = o.T;
    c.delta = o.delta;
    c.bound_x = lx.regret_bound(o.T, o.delta);
    c.bound_u = ub.regret_bound(o.T, o.delta);
    c.bound_lambda = ll.regret_bound(o.T, o.delta);
    double fp = failure_probability({&lx, &ll}, o.delta);
    for (auto* l : lus) fp += l->randomized() ? o.delta : 0.0;
    c.failure_probability = std::min(1.0, fp);
    c.realized_regret_u = multi_u_regret(m, *tr, o.grid_steps);

    // g is affine in x for bilinear pieces, so x's best fixed action is a linear-oracle call.
    bool all_bilinear = true;
    for (const auto& f : m.objectives()) all_bilinear = all_bilinear && f.is_bilinear();
    CompensatedSum played;
    for (const auto& r : tr->rounds) played.add(r.loss);
    if (all_bilinear) {
        CompensatedVector coeff(X.dims());
        CompensatedSum constant;
        CompensatedVector fsum(n);
        for (const auto& r : tr->rounds) {
            const auto us = u_blocks(m, r.u);
            for (std::size_t i = 0; i < n; ++i) {
                const double li = (*r.lambda)[i];
                if (li == 0.0) continue;
                coeff.add(m.objectives()[i].x_coefficients(us[i]), li);
                constant.add(li * m.objectives()[i].x_constant(us[i]));
            }
            fsum.add(m.values(r.x, us));
        }
        const Point th = coeff.value();
        c.realized_regret_x = played.value() - (dot(th, linear_argmax(X, th, Sense::minimize)) + constant.value());
        const Point fl = fsum.value();
        c.realized_regret_lambda = dot(fl, linear_argmax(m.lambda_domain(), fl, Sense::maximize)) - played.value();
    } else {
        c.realized_regret_x = std::numeric_limits<double>::quiet_NaN();
        s.warnings.push_back("realized x-regret not computed for black-box objectives");
    }
    s.gap_bound = (c.bound_x + c.bound_u + *c.bound_lambda) / static_cast<double>(o.T);
    return s;
}

Point explicit_x_oracle(const MultiObjective& m, const Domain& X, const std::vector<Point>& us,
                        std::size_t grid_steps) {
    bool all_bilinear = true;
    for (const auto& f : m.objectives()) all_bilinear = all_bilinear && f.is_bilinear();
    if (all_bilinear) {
        try {
            const auto xv = enumerate_vertices(X, 2000);
            const auto lv = enumerate_vertices(m.lambda_domain(), 2000);
            // f^i is affine in x, so min over conv(X) of max over lambda vertices is a matrix game.
            std::vector<std::vector<double>> M(xv.size(), std::vector<double>(lv.size()));
            for (std::size_t j = 0; j < xv.size(); ++j) {
                const Point v = m.values(xv[j], us);
                for (std::size_t k = 0; k < lv.size(); ++k) M[j][k] = dot(lv[k], v);
            }
            const auto sol = solve_matrix_game(M);
            CompensatedVector acc(X.dims());
            for (std::size_t j = 0; j < xv.size(); ++j)
                if (sol.row_strategy[j] != 0.0) acc.add(xv[j], sol.row_strategy[j]);
            return acc.value();
        } catch (const std::invalid_argument&) {
        } catch (const std::length_error&) {
        }
    }
    if (grid_steps == 0) throw ConfigurationError("no exact x-oracle for F on " + X.describe());
    const auto grid = grid_points(X, grid_steps);
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double v = m.explicit_max(grid[k], us);
        if (v < best_value) {
            best_value = v;
            best = k;
        }
    }
    return grid[best];
}

double multi_benchmark(const MultiObjective& m, const Domain& X, std::size_t grid_steps) {
    // max over u of F separates: max_lambda sum_i lambda_i max_{u^i} f^i(x, u^i).
    auto worst_F = [&](const Point& x) {
        Point h(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) h[i] = worst_case_value(m.objectives()[i], x, m.u_domains()[i], grid_steps);
        return dot(h, linear_argmax(m.lambda_domain(), h, Sense::maximize));
    };
    const auto grid = grid_points(X, std::max<std::size_t>(grid_steps, 1));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& x : grid) best = std::min(best, worst_F(x));
    return best;
}

Solution multi_biased_run(const MultiObjective& m, const Domain& X, BiasedMode mode, std::vector<Learner*> learners,
                          const RunOptions& o) {
    check_options(o);
    if (X.dims() != m.x_dim()) throw ConfigurationError("x-domain dimension does not match the objectives");
    if (!is_convex(X)) throw ConfigurationError("biased multi-objective play needs a convex x-domain");
    const RandomSource master(o.seed);
    const std::size_t steps = o.grid_steps;

    if (mode == BiasedMode::strong_dual) {
        if (learners.size() != m.size()) throw ConfigurationError("strong_dual needs one strong u-learner per objective");
        for (auto* l : learners) require_strong(*l, "strong u-learner", o);
        // Fail at configuration time when no exact x-oracle exists.
        {
            std::vector<Point> probe;
            for (const auto& U : m.u_domains()) probe.push_back(default_point(U));
            (void)explicit_x_oracle(m, X, probe, steps);
        }
        BestResponseLearner bx([&m, &X, steps](const Point& u) { return explicit_x_oracle(m, X, u_blocks(m, u), steps); });
        BorrowedBlocks ub(learners, m.u_block_sizes());
        ub.seed_from(master, 1);
        for (std::size_t i = 0; i < m.size(); ++i)
            learners[i]->prepare(m.u_domains()[i], multi_u_bounds(m, X, i, o), o.T);
        EngineSpec spec;
        spec.schedule = ScheduleOrder::dual_first;
        spec.x = &bx;
        spec.u = &ub;
        spec.loss = [&m](const Point& x, const Point& u, const Point*) { return m.explicit_max(x, u_blocks(m, u)); };
        spec.feedback_x = [](const Point&, const Point&, const Point*) { return Feedback{}; };
        spec.feedback_u = [&m](const Point& x, const Point& u, const Point*) {
            return multi_u_feedback(m, x, u_blocks(m, u));
        };
        auto tr = run_engine(spec, o.T);
        note_seeds(*tr, o, {});
        for (std::size_t i = 0; i < m.size(); ++i)
            tr->notes["seed_u" + std::to_string(i + 1)] = std::to_string(learners[i]->seed());
        Solution s = make_solution(tr, SolutionKind::averaged_point);
        auto& c = s.certificate;
        c.T = o.T;
        c.delta = o.delta;
        c.bound_u = ub.regret_bound(o.T, o.delta);
        c.realized_regret_u = multi_u_regret(m, *tr, steps);
        double fp = 0.0;
        for (auto* l : learners) fp += l->randomized() ? o.delta : 0.0;
        c.failure_probability = std::min(1.0, fp);
        s.gap_bound = c.bound_u / static_cast<double>(o.T);
        return s;
    }

    if (learners.size() != 1) throw ConfigurationError("strong_primal takes exactly one strong x-learner");
    Learner& lx = *learners.front();
    require_strong(lx, "strong x-learner", o);
    lx.seed_from(master, 0);
    lx.prepare(X, multi_x_bounds(m, X, o), o.T);
    BestResponseLearner bu([&m, steps](const Point& x) {
        std::vector<Point> us;
        for (std::size_t i = 0; i < m.size(); ++i)
            us.push_back(best_response(m.objectives()[i], x, m.u_domains()[i], Sense::maximize, Player::u, steps));
        return concat(us);
    });
    EngineSpec spec;
    spec.schedule = ScheduleOrder::primal_first;
    spec.x = &lx;
    spec.u = &bu;
    spec.loss = [&m](const Point& x, const Point& u, const Point*) { return m.explicit_max(x, u_blocks(m, u)); };
    spec.feedback_x = [&m](const Point& x, const Point& u, const Point*) {
        const auto us = u_blocks(m, u);
        return Feedback{m.explicit_subgradient(x, us), m.explicit_max(x, us), {}};
    };
    spec.feedback_u = [](const Point&, const Point&, const Point*) { return Feedback{}; };
    auto tr = run_engine(spec, o.T);
    note_seeds(*tr, o, {{"x", &lx}});
    Solution s = make_solution(tr, SolutionKind::averaged_point);
    auto& c = s.certificate;
    c.T = o.T;
    c.delta = o.delta;
    c.bound_x = lx.regret_bound(o.T, o.delta);
    c.failure_probability = failure_probability({&lx}, o.delta);
    try {
        CompensatedSum played;
        for (const auto& r : tr->rounds) played.add(r.loss);
        c.realized_regret_x = played.value() - min_sum_F(m, X, *tr, steps ? steps : 100);
    } catch (const std::exception& e) {
        c.realized_regret_x = std::numeric_limits<double>::quiet_NaN();
        s.warnings.push_back(std::string("realized x-regret not computed: ") + e.what());
    }
    s.gap_bound = c.bound_x / static_cast<double>(o.T);
    return s;
}

const char* to_string(Verdict v) { return v == Verdict::feasible ? "feasible" : "infeasible"; }

RandomizedMultiResult randomized_multi_run(const MultiObjective& m, const Domain& X, RandomizedMode mode, Learner& lx,
                                           std::vector<Learner*> lus, Learner* ll, const RunOptions& o) {
    check_options(o);
    check_multi_dims(m, X, lus.size());
    const std::size_t n = m.size();
    if (!m.lambda_domain().is<Domain::Simplex>())
        throw ConfigurationError("randomized multi-objective drivers need Lambda to be the full simplex");
    if (mode == RandomizedMode::distributional && !ll)
        throw ConfigurationError("distributional mode needs a lambda-learner");

    // Every evaluation of f^i goes through this check.
    auto checked_values = [&m](const Point& x, const std::vector<Point>& us) {
        Point v = m.values(x, us);
        for (double fi : v)
            if (fi < 0.0) throw std::domain_error("nonnegativity violated");
        return v;
    };

    const RandomSource master(o.seed);
    lx.seed_from(master, 0);
    BorrowedBlocks ub(lus, m.u_block_sizes());
    ub.seed_from(master, 1);
    lx.prepare(X, multi_x_bounds(m, X, o), o.T);
    for (std::size_t i = 0; i < n; ++i) lus[i]->prepare(m.u_domains()[i], multi_u_bounds(m, X, i, o), o.T);
    if (ll) {
        ll->seed_from(master, n + 1);
        const double vb = multi_value_bound(m, X);
        ll->prepare(m.lambda_domain(), LossBounds{std::sqrt(static_cast<double>(n)) * vb, static_cast<double>(n) * vb, vb},
                    o.T);
    }

    auto F_of = [&m, checked_values](const Point& x, const std::vector<Point>& us, Point* lam) {
        const Point v = checked_values(x, us);
        Point l = linear_argmax(m.lambda_domain(), v, Sense::maximize);
        const double out = dot(l, v);
        if (lam) *lam = std::move(l);
        return out;
    };

    EngineSpec spec;
    spec.schedule = ScheduleOrder::parallel;
    spec.x = &lx;
    spec.u = &ub;
    spec.feedback_u = [&m, checked_values](const Point& x, const Point& u, const Point*) {
        const auto us = u_blocks(m, u);
        (void)checked_values(x, us);
        return multi_u_feedback(m, x, us);
    };
    if (mode == RandomizedMode::explicit_max) {
        spec.loss = [&m, F_of](const Point& x, const Point& u, const Point*) { return F_of(x, u_blocks(m, u), nullptr); };
        spec.feedback_x = [&m, F_of](const Point& x, const Point& u, const Point*) {
            const auto us = u_blocks(m, u);
            Point lam;
            const double F = F_of(x, us, &lam);
            Point g(x.size());
            for (std::size_t i = 0; i < m.size(); ++i)
                if (lam[i] != 0.0) g += lam[i] * m.objectives()[i].grad_x(x, us[i]);
            Feedback fb{std::move(g), F, {}};
            bool bilinear = true;
            for (const auto& f : m.objectives()) bilinear = bilinear && f.is_bilinear();
            if (!bilinear) fb.evaluate = [&m, us](const Point& z) { return m.explicit_max(z, us); };
            return fb;
        };
    } else {
        spec.lambda = ll;
        spec.loss = [&m, checked_values](const Point& x, const Point& u, const Point* lam) {
            return dot(*lam, checked_values(x, u_blocks(m, u)));
        };
        spec.feedback_x = [&m, checked_values](const Point& x, const Point& u, const Point* lam) {
            const auto us = u_blocks(m, u);
            const Point v = checked_values(x, us);
            Point g(x.size());
            for (std::size_t i = 0; i < m.size(); ++i)
                if ((*lam)[i] != 0.0) g += (*lam)[i] * m.objectives()[i].grad_x(x, us[i]);
            return Feedback{std::move(g), dot(*lam, v), {}};
        };
        spec.feedback_lambda = [&m, checked_values](const Point& x, const Point& u, const Point* lam) {
            const Point v = checked_values(x, u_blocks(m, u));
            return Feedback{-v, -dot(*lam, v), {}};
        };
    }
    auto tr = run_engine(spec, o.T);
    note_seeds(*tr, o, {{"x", &lx}, {"lambda", ll}});
    for (std::size_t i = 0; i < n; ++i) tr->notes["seed_u" + std::to_string(i + 1)] = std::to_string(lus[i]->seed());

    RandomizedMultiResult out;
    out.solution = make_solution(tr, SolutionKind::empirical_distribution);
    auto& s = out.solution;
    auto& c = s.certificate;
    c.T = o.T;
    c.delta = o.delta;
    c.bound_x = lx.regret_bound(o.T, o.delta);
    double sum_u = 0.0, max_u = 0.0;
    double fp = failure_probability({&lx, ll}, o.delta);
    for (auto* l : lus) {
        const double r = l->regret_bound(o.T, o.delta);
        sum_u += r;
        max_u = std::max(max_u, r);
        fp += l->randomized() ? o.delta : 0.0;
    }
    c.bound_u = mode == RandomizedMode::explicit_max ? sum_u : max_u;
    if (ll && mode == RandomizedMode::distributional) c.bound_lambda = ll->regret_bound(o.T, o.delta);
    c.failure_probability = std::min(1.0, fp);
    c.realized_regret_u = multi_u_regret(m, *tr, o.grid_steps);
    const double Td = static_cast<double>(o.T);
    const double nd = static_cast<double>(n);
    if (mode == RandomizedMode::explicit_max) {
        s.gap_bound = ((nd + 1.0) * c.bound_x + sum_u) / Td;
        s.benchmark_factor = nd + 1.0;
    } else {
        s.gap_bound = nd * (c.bound_x + max_u + c.bound_lambda.value_or(0.0)) / Td;
        s.benchmark_factor = nd;
    }

    CompensatedSum acc;
    out.running_F.reserve(o.T);
    for (const auto& r : tr->rounds) {
        acc.add(m.explicit_max(r.x, u_blocks(m, r.u)));
        out.running_F.push_back(acc.value() / static_cast<double>(r.t));
    }
    out.average_F = out.running_F.back();
    out.threshold = 3.0 * s.gap_bound;
    out.verdict = out.average_F < out.threshold ? Verdict::feasible : Verdict::infeasible;
    tr->notes["verdict"] = to_string(out.verdict);
    return out;
}

}  // namespace robustplay
