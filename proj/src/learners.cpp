#include "robustplay/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace robustplay {

Strength strength_of(LearnerName name) {
    switch (name) {
    case LearnerName::fpl: return Strength::weak;
    case LearnerName::ogd: return Strength::strong;
    case LearnerName::ew_averaged: return Strength::strong;
    case LearnerName::ew_sampled: return Strength::weak;
    case LearnerName::best_response: return Strength::oracle;
    }
    return Strength::weak;
}

const char* to_string(LearnerName name) {
    switch (name) {
    case LearnerName::fpl: return "fpl";
    case LearnerName::ogd: return "ogd";
    case LearnerName::ew_averaged: return "ew_averaged";
    case LearnerName::ew_sampled: return "ew_sampled";
    case LearnerName::best_response: return "best_response";
    }
    return "?";
}

const char* to_string(Strength strength) {
    switch (strength) {
    case Strength::weak: return "weak";
    case Strength::strong: return "strong";
    case Strength::oracle: return "oracle";
    }
    return "?";
}

std::optional<LearnerName> parse_learner_name(std::string_view text) {
    for (auto n : {LearnerName::fpl, LearnerName::ogd, LearnerName::ew_averaged, LearnerName::ew_sampled,
                   LearnerName::best_response})
        if (text == to_string(n)) return n;
    return std::nullopt;
}

std::optional<double> LearnerSpec::param(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    return it->second;
}

const Point& OpponentView::current() const {
    if (!current_) throw ScheduleViolation("schedule violation: opponent's current move is not visible");
    return *current_;
}

std::unique_ptr<Learner> make_learner(const LearnerSpec& spec) {
    switch (spec.name) {
    case LearnerName::fpl: return std::make_unique<FplLearner>(spec.param("epsilon"));
    case LearnerName::ogd:
        return std::make_unique<OgdLearner>(OgdLearner::Options{spec.param("step"), spec.param("G"), spec.param("D")});
    case LearnerName::ew_averaged: return std::make_unique<EwLearner>(EwMode::averaged, spec.param("eta"));
    case LearnerName::ew_sampled: return std::make_unique<EwLearner>(EwMode::sampled, spec.param("eta"));
    case LearnerName::best_response: return std::make_unique<BestResponseLearner>();
    }
    throw ConfigurationError("unknown learner");
}

// ---------------------------------------------------------------------------
// stateless steps

Point fpl_perturbation(std::size_t dims, double scale, RandomSource::Engine& xi) {
    Point p(dims);
    for (auto& v : p) v = scale * uniform01(xi);
    return p;
}

Point fpl_next(const Point& cumulative, const Point& perturbation, const Domain& domain, Sense sense) {
    return linear_argmax(domain, cumulative + perturbation, sense);
}

Point ogd_next(const Point& z, const Point& gradient, double eta, const Domain& domain) {
    if (!gradient.is_finite()) throw std::invalid_argument("ogd: non-finite gradient");
    require_same_dim(z, gradient, "ogd step");
    Point step = z;
    for (std::size_t i = 0; i < z.size(); ++i) step[i] -= eta * gradient[i];
    return project(domain, step);
}

Point ew_weights(const Point& cumulative, double eta) {
    if (cumulative.empty()) throw std::invalid_argument("ew: no experts");
    const double lo = *std::min_element(cumulative.begin(), cumulative.end());
    Point w(cumulative.size());
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) total += w[i] = std::exp(-eta * (cumulative[i] - lo));
    w *= 1.0 / total;
    return w;
}

Point ew_next(EwState& state, EwMode mode, const Point& losses, RandomSource::Engine* xi) {
    if (state.cumulative.empty()) state.cumulative = Point(losses.size());
    require_same_dim(state.cumulative, losses, "ew losses");
    for (double l : losses)
        if (!(l >= 0.0) || !std::isfinite(l)) throw std::invalid_argument("ew: losses must be finite and nonnegative");
    state.cumulative += losses;
    Point w = ew_weights(state.cumulative, state.eta);
    if (mode == EwMode::averaged) return w;
    if (!xi) throw std::invalid_argument("ew sampled mode needs a random stream");
    const double r = uniform01(*xi);
    double acc = 0.0;
    std::size_t pick = w.size() - 1;
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        if (r < acc) {
            pick = i;
            break;
        }
    }
    return unit_vector(w.size(), pick);
}

Point best_response(const Objective& f, const Point& opponent_move, const Domain& domain, Sense sense, Player side,
                    std::size_t grid_steps) {
    if (side == Player::lambda) throw std::invalid_argument("best_response: lambda side is handled by the drivers");
    if (f.is_bilinear()) {
        const Point theta = side == Player::x ? f.x_coefficients(opponent_move) : f.u_coefficients(opponent_move);
        return linear_argmax(domain, theta, sense);
    }
    if (grid_steps == 0) throw std::invalid_argument("best_response: black-box objective needs a grid resolution");
    const auto grid = grid_points(domain, grid_steps);
    std::size_t best = 0;
    double best_value = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double v = side == Player::x ? f.value(grid[k], opponent_move) : f.value(opponent_move, grid[k]);
        if (k == 0 || (sense == Sense::maximize ? v > best_value : v < best_value)) {
            best = k;
            best_value = v;
        }
    }
    return grid[best];
}

double regret_of(const Transcript& tr, Player player, const Objective& f, const Domain& domain, std::size_t grid_steps) {
    if (player == Player::lambda) throw std::invalid_argument("regret_of: lambda regret is computed by the drivers");
    if (domain.dims() != (player == Player::x ? f.x_dim() : f.u_dim()))
        throw std::invalid_argument("regret_of: dimension mismatch");
    if (tr.rounds.empty()) return 0.0;
    CompensatedSum played;
    for (const auto& r : tr.rounds) played.add(f.value(r.x, r.u));

    if (f.is_bilinear()) {
        CompensatedVector coeff(domain.dims());
        CompensatedSum constant;
        for (const auto& r : tr.rounds) {
            if (player == Player::x) {
                coeff.add(f.x_coefficients(r.u));
                constant.add(f.x_constant(r.u));
            } else {
                coeff.add(f.u_coefficients(r.x));
                constant.add(f.u_constant(r.x));
            }
        }
        const Point theta = coeff.value();
        const Sense sense = player == Player::x ? Sense::minimize : Sense::maximize;
        const double best = dot(theta, linear_argmax(domain, theta, sense)) + constant.value();
        return player == Player::x ? played.value() - best : best - played.value();
    }

    if (grid_steps == 0) throw std::invalid_argument("regret_of: black-box objective needs a grid resolution");
    const auto grid = grid_points(domain, grid_steps);
    double best = player == Player::x ? std::numeric_limits<double>::infinity()
                                      : -std::numeric_limits<double>::infinity();
    for (const auto& z : grid) {
        CompensatedSum s;
        for (const auto& r : tr.rounds) s.add(player == Player::x ? f.value(z, r.u) : f.value(r.x, z));
        best = player == Player::x ? std::min(best, s.value()) : std::max(best, s.value());
    }
    return player == Player::x ? played.value() - best : best - played.value();
}

// ---------------------------------------------------------------------------
// FPL

void FplLearner::prepare(const Domain& domain, const LossBounds& bounds, std::size_t horizon) {
    domain_ = domain;
    cumulative_ = Point(domain.dims());
    D_ = l1_diameter(domain);
    R_ = bounds.value_abs;
    A_ = bounds.grad_l1;
    horizon_ = horizon;
    epoch_start_ = 1;
    epoch_length_ = horizon ? horizon : 1;
    epsilon_ = epoch_epsilon(epoch_length_);
}

double FplLearner::epoch_epsilon(std::size_t length) const {
    if (fixed_epsilon_) return *fixed_epsilon_;
    if (D_ <= 0.0) return std::numeric_limits<double>::infinity();  // singleton: nothing to perturb
    return std::sqrt(D_ / (R_ * A_ * static_cast<double>(length)));
}

Point FplLearner::next(const PlayContext& ctx) {
    if (!domain_) throw std::logic_error("fpl: prepare() not called");
    if (!horizon_ && ctx.t >= epoch_start_ + epoch_length_) {
        // Doubling trick: restart with a fresh epoch twice as long.
        epoch_start_ += epoch_length_;
        epoch_length_ *= 2;
        epsilon_ = epoch_epsilon(epoch_length_);
        cumulative_ = Point(domain_->dims());
    }
    auto xi = stream(ctx.t);
    const double scale = std::isinf(epsilon_) ? 0.0 : 1.0 / epsilon_;
    return fpl_next(cumulative_, fpl_perturbation(domain_->dims(), scale, xi), *domain_, Sense::minimize);
}

void FplLearner::observe(const Feedback& feedback) {
    if (!feedback.gradient.is_finite()) throw std::invalid_argument("fpl: non-finite loss vector");
    cumulative_ += feedback.gradient;
}

double FplLearner::regret_bound(std::size_t T, double delta) const {
    if (T == 0) return 0.0;
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
    // Expected regret eps*R*A*t + D/eps per epoch, plus an Azuma term for the
    // realized losses (per-round deviation at most 2R).
    auto epoch_bound = [&](double eps, double t) {
        if (D_ <= 0.0) return 0.0;
        return eps * R_ * A_ * t + D_ / eps;
    };
    double expected = 0.0;
    if (horizon_) {
        expected = epoch_bound(epoch_epsilon(horizon_), static_cast<double>(T));
    } else {
        std::size_t start = 1, length = 1;
        while (start <= T) {
            const std::size_t covered = std::min(length, T - start + 1);
            expected += epoch_bound(epoch_epsilon(length), static_cast<double>(covered));
            start += length;
            length *= 2;
        }
    }
    const double azuma = 2.0 * R_ * std::sqrt(2.0 * static_cast<double>(T) * std::log(1.0 / delta));
    return expected + (D_ > 0.0 ? azuma : 0.0);
}

// ---------------------------------------------------------------------------
// OGD

void OgdLearner::prepare(const Domain& domain, const LossBounds& bounds, std::size_t) {
    steps_ = 0;
    hull_.reset();
    if (domain.is<Domain::VertexHull>()) {
        // Run on barycentric weights; a gradient g becomes (g.v_k)_k.
        hull_ = domain.as<Domain::VertexHull>();
        const auto k = hull_->vertices.size();
        double vmax = 0.0;
        for (const auto& v : hull_->vertices) vmax = std::max(vmax, norm2(v));
        domain_ = Domain::simplex(k);
        G_ = options_.G.value_or(std::sqrt(static_cast<double>(k)) * vmax * bounds.grad_l2);
        D_ = options_.D.value_or(l2_diameter(*domain_));
    } else {
        if (!has_projection(domain))
            throw ConfigurationError("ogd needs a domain with a projection, got " + domain.describe());
        domain_ = domain;
        G_ = options_.G.value_or(bounds.grad_l2);
        D_ = options_.D.value_or(l2_diameter(domain));
    }
    z_ = default_point(*domain_);
}

Point OgdLearner::next(const PlayContext&) {
    if (!domain_) throw std::logic_error("ogd: prepare() not called");
    return hull_ ? hull_point(*hull_, z_) : z_;
}

void OgdLearner::observe(const Feedback& feedback) {
    if (!feedback.gradient.is_finite()) throw std::invalid_argument("ogd: non-finite gradient");
    ++steps_;
    Point g = feedback.gradient;
    if (hull_) {
        Point lifted(hull_->vertices.size());
        for (std::size_t k = 0; k < lifted.size(); ++k) lifted[k] = dot(g, hull_->vertices[k]);
        g = std::move(lifted);
    }
    double eta = 0.0;
    if (options_.step) {
        eta = *options_.step;
    } else {
        if (G_ <= 0.0 || D_ <= 0.0) return;
        eta = D_ / (G_ * std::sqrt(static_cast<double>(steps_)));
    }
    z_ = ogd_next(z_, g, eta, *domain_);
}

double OgdLearner::regret_bound(std::size_t T, double) const {
    const double t = static_cast<double>(T);
    if (options_.step) {
        const double eta = *options_.step;
        return D_ * D_ / (2.0 * eta) + eta * G_ * G_ * t / 2.0;
    }
    return 1.5 * G_ * D_ * std::sqrt(t);
}

// ---------------------------------------------------------------------------
// Exponential weights

void EwLearner::prepare(const Domain& domain, const LossBounds& bounds, std::size_t horizon) {
    experts_ = enumerate_vertices(domain);
    const double n = static_cast<double>(experts_.size());
    range_ = 2.0 * bounds.value_abs;
    state_ = EwState{Point(experts_.size()), 0.0};
    anytime_ = horizon == 0;
    rounds_ = 0;
    if (fixed_eta_) {
        state_.eta = *fixed_eta_;
    } else if (experts_.size() > 1) {
        const double T = static_cast<double>(std::max<std::size_t>(horizon, 1));
        state_.eta = std::sqrt(8.0 * std::log(n) / T) / range_;
    }
    weights_ = Point(experts_.size(), 1.0 / n);
}

Point EwLearner::next(const PlayContext& ctx) {
    if (experts_.empty()) throw std::logic_error("ew: prepare() not called");
    if (mode_ == EwMode::averaged) {
        CompensatedVector acc(experts_.front().size());
        for (std::size_t k = 0; k < experts_.size(); ++k)
            if (weights_[k] != 0.0) acc.add(experts_[k], weights_[k]);
        return acc.value();
    }
    auto xi = stream(ctx.t);
    const double r = uniform01(xi);
    double acc = 0.0;
    for (std::size_t k = 0; k < experts_.size(); ++k) {
        acc += weights_[k];
        if (r < acc) return experts_[k];
    }
    return experts_.back();
}

void EwLearner::observe(const Feedback& feedback) {
    Point losses(experts_.size());
    for (std::size_t k = 0; k < experts_.size(); ++k)
        losses[k] = feedback.evaluate ? feedback.evaluate(experts_[k]) : dot(feedback.gradient, experts_[k]);
    // Shift by the round minimum: weights are unchanged and losses become nonnegative.
    const double lo = *std::min_element(losses.begin(), losses.end());
    for (auto& l : losses) l -= lo;
    ++rounds_;
    if (anytime_ && !fixed_eta_ && experts_.size() > 1)
        state_.eta = std::sqrt(8.0 * std::log(static_cast<double>(experts_.size())) /
                               static_cast<double>(rounds_ + 1)) / range_;
    weights_ = ew_next(state_, EwMode::averaged, losses);
}

double EwLearner::regret_bound(std::size_t T, double delta) const {
    if (experts_.size() <= 1 || T == 0) return 0.0;
    const double t = static_cast<double>(T);
    const double ln_n = std::log(static_cast<double>(experts_.size()));
    double bound = 0.0;
    if (anytime_ && !fixed_eta_)
        bound = range_ * (2.0 * std::sqrt(t * ln_n / 2.0) + std::sqrt(ln_n / 8.0));
    else
        bound = ln_n / state_.eta + state_.eta * t * range_ * range_ / 8.0;
    if (mode_ == EwMode::sampled) {
        if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
        bound += range_ * std::sqrt(t * std::log(1.0 / delta) / 2.0);
    }
    return bound;
}

// ---------------------------------------------------------------------------
// Best response

Point BestResponseLearner::next(const PlayContext& ctx) {
    if (!oracle_) throw ConfigurationError("best_response learner has no oracle attached");
    return oracle_(ctx.opponent.current());
}

// ---------------------------------------------------------------------------
// Blocks

BlockLearner::BlockLearner(std::vector<std::unique_ptr<Learner>> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw ConfigurationError("block learner needs at least one block");
}

LearnerName BlockLearner::name() const {
    // Report the weakest block: the composite is only as strong as its weakest part.
    LearnerName weakest = blocks_.front()->name();
    for (const auto& b : blocks_)
        if (b->strength() == Strength::weak) weakest = b->name();
    return weakest;
}

bool BlockLearner::randomized() const {
    return std::any_of(blocks_.begin(), blocks_.end(), [](const auto& b) { return b->randomized(); });
}

void BlockLearner::prepare(const Domain& domain, const LossBounds& bounds, std::size_t horizon) {
    if (!domain.is<Domain::Product>()) throw ConfigurationError("block learner needs a product domain");
    const auto& parts = *domain.as<Domain::Product>().parts;
    if (parts.size() != blocks_.size()) throw ConfigurationError("block learner: block count mismatch");
    sizes_ = domain.block_sizes();
    for (std::size_t i = 0; i < blocks_.size(); ++i)
        blocks_[i]->prepare(parts[i], block_bounds_.empty() ? bounds : block_bounds_.at(i), horizon);
}

Point BlockLearner::next(const PlayContext& ctx) {
    std::vector<Point> out;
    for (std::size_t i = 0; i < blocks_.size(); ++i) out.push_back(blocks_[i]->next(ctx));
    return concat(out);
}

void BlockLearner::observe(const Feedback& feedback) {
    const auto grads = split(feedback.gradient, sizes_);
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i]->observe(Feedback{grads[i], 0.0, {}});
}

double BlockLearner::regret_bound(std::size_t T, double delta) const {
    double s = 0.0;
    for (const auto& b : blocks_) s += b->regret_bound(T, delta);
    return s;
}

void BlockLearner::seed_from(const RandomSource& master, std::uint64_t slot) {
    Learner::seed_from(master, slot);
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i]->seed_from(master, slot + i);
}

std::string BlockLearner::describe() const {
    std::string s = "blocks(";
    for (std::size_t i = 0; i < blocks_.size(); ++i) s += (i ? "," : "") + blocks_[i]->describe();
    return s + ")";
}

}  // namespace robustplay
