#pragma once

#include "robustplay/core.hpp"
#include "robustplay/domain.hpp"
#include "robustplay/objective.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace robustplay {

enum class LearnerName { fpl, ogd, ew_averaged, ew_sampled, best_response };
enum class Strength { weak, strong, oracle };

/// Fixed classification: fpl and ew_sampled are weak, ogd and ew_averaged strong.
Strength strength_of(LearnerName name);
const char* to_string(LearnerName name);
const char* to_string(Strength strength);
std::optional<LearnerName> parse_learner_name(std::string_view text);

struct LearnerSpec {
    LearnerName name = LearnerName::ogd;
    /// fpl: epsilon | ogd: step, G, D | ew_*: eta
    std::map<std::string, double> params;

    std::optional<double> param(const std::string& key) const;
};

/// The opponent's move of the current round, visible only when the schedule grants it.
class OpponentView {
public:
    OpponentView() = default;
    explicit OpponentView(const Point* current) : current_(current) {}

    bool granted() const { return current_ != nullptr; }
    /// Throws ScheduleViolation when not granted.
    const Point& current() const;

private:
    const Point* current_ = nullptr;
};

struct PlayContext {
    std::size_t t = 1;
    OpponentView opponent;
};

/// Full-information feedback after a round. Every learner minimizes its loss;
/// the u-player receives the loss -f.
struct Feedback {
    Point gradient;  // gradient of this round's loss at the played point
    double loss = 0.0;
    /// This round's loss at any point of the learner's domain (optional).
    std::function<double(const Point&)> evaluate;
};

class Learner {
public:
    virtual ~Learner() = default;

    virtual LearnerName name() const = 0;
    Strength strength() const { return strength_of(name()); }
    virtual bool randomized() const { return false; }

    /// horizon = 0 means unknown (doubling trick where relevant).
    virtual void prepare(const Domain& domain, const LossBounds& bounds, std::size_t horizon) = 0;
    virtual Point next(const PlayContext& ctx) = 0;
    virtual void observe(const Feedback& feedback) = 0;

    /// High-probability regret bound R(T, delta) for the parameters chosen in prepare().
    virtual double regret_bound(std::size_t T, double delta) const = 0;

    /// Seeds the learner from the master source; slot ids are x=0, u^i=i, lambda=n+1.
    virtual void seed_from(const RandomSource& master, std::uint64_t slot) { source_ = master.derive(slot); }
    std::uint64_t seed() const { return source_.seed(); }

    virtual std::string describe() const { return to_string(name()); }

protected:
    RandomSource::Engine stream(std::size_t t) const { return source_.round_stream(t); }

private:
    RandomSource source_{0};
};

std::unique_ptr<Learner> make_learner(const LearnerSpec& spec);

// ---------------------------------------------------------------------------
// Stateless steps

/// Per-coordinate uniform perturbation on [0, scale].
Point fpl_perturbation(std::size_t dims, double scale, RandomSource::Engine& xi);

/// Optimizer of (cumulative + perturbation).z over the domain.
Point fpl_next(const Point& cumulative, const Point& perturbation, const Domain& domain, Sense sense);

/// project(domain, z - eta * gradient). Throws on non-finite gradients.
Point ogd_next(const Point& z, const Point& gradient, double eta, const Domain& domain);

enum class EwMode { averaged, sampled };

struct EwState {
    Point cumulative;  // summed per-expert losses
    double eta = 1.0;
};

/// Adds `losses` to the state and returns the next play: the weight vector (averaged)
/// or a vertex e_i drawn with probability w_i from `xi` (sampled).
/// Throws on negative or non-finite losses.
Point ew_next(EwState& state, EwMode mode, const Point& losses, RandomSource::Engine* xi = nullptr);

/// w proportional to exp(-eta * cumulative), computed stably.
Point ew_weights(const Point& cumulative, double eta);

/// Exact optimizer of f against the opponent's move over the player's domain.
/// Bilinear objectives use the linear oracle; others search a grid with `grid_steps`.
Point best_response(const Objective& f, const Point& opponent_move, const Domain& domain, Sense sense, Player side,
                    std::size_t grid_steps = 0);

/// Realized regret of one player on a transcript: the x-player minimizes f, the u-player maximizes.
/// Negative values are returned as computed.
double regret_of(const Transcript& transcript, Player player, const Objective& f, const Domain& domain,
                 std::size_t grid_steps = 0);

// ---------------------------------------------------------------------------
// Learners

class FplLearner final : public Learner {
public:
    explicit FplLearner(std::optional<double> epsilon = std::nullopt) : fixed_epsilon_(epsilon) {}

    LearnerName name() const override { return LearnerName::fpl; }
    bool randomized() const override { return true; }
    void prepare(const Domain& domain, const LossBounds& bounds, std::size_t horizon) override;
    Point next(const PlayContext& ctx) override;
    void observe(const Feedback& feedback) override;
    double regret_bound(std::size_t T, double delta) const override;

    double epsilon() const { return epsilon_; }

private:
    double epoch_epsilon(std::size_t length) const;

    std::optional<double> fixed_epsilon_;
    std::optional<Domain> domain_;
    Point cumulative_;
    double D_ = 0.0, R_ = 0.0, A_ = 0.0;
    std::size_t horizon_ = 0;
    double epsilon_ = 0.0;
    std::size_t epoch_start_ = 1;  // doubling trick bookkeeping
    std::size_t epoch_length_ = 0;
};

class OgdLearner final : public Learner {
public:
    struct Options {
        std::optional<double> step;  // constant step instead of D/(G sqrt t)
        std::optional<double> G;
        std::optional<double> D;
    };

    OgdLearner() = default;
    explicit OgdLearner(Options options) : options_(options) {}

    LearnerName name() const override { return LearnerName::ogd; }
    void prepare(const Domain& domain, const LossBounds& bounds, std::size_t horizon) override;
    Point next(const PlayContext& ctx) override;
    void observe(const Feedback& feedback) override;
    double regret_bound(std::size_t T, double delta) const override;

    /// Current iterate in the learner's own coordinates (barycentric on vertex hulls).
    const Point& iterate() const { return z_; }
    double G() const { return G_; }
    double D() const { return D_; }

private:
    Options options_;
    std::optional<Domain> domain_;    // where the iterate lives
    std::optional<Domain::VertexHull> hull_;  // set when lifted
    Point z_;
    std::size_t steps_ = 0;
    double G_ = 0.0, D_ = 0.0;
};

class EwLearner final : public Learner {
public:
    EwLearner(EwMode mode, std::optional<double> eta = std::nullopt) : mode_(mode), fixed_eta_(eta) {}

    LearnerName name() const override {
        return mode_ == EwMode::averaged ? LearnerName::ew_averaged : LearnerName::ew_sampled;
    }
    bool randomized() const override { return mode_ == EwMode::sampled; }
    void prepare(const Domain& domain, const LossBounds& bounds, std::size_t horizon) override;
    Point next(const PlayContext& ctx) override;
    void observe(const Feedback& feedback) override;
    double regret_bound(std::size_t T, double delta) const override;

    const Point& weights() const { return weights_; }

private:
    EwMode mode_;
    std::optional<double> fixed_eta_;
    std::vector<Point> experts_;
    EwState state_;
    Point weights_;
    double range_ = 1.0;
    bool anytime_ = false;
    std::size_t rounds_ = 0;
};

/// Oracle player: needs the opponent's current move (anticipatory by construction).
class BestResponseLearner final : public Learner {
public:
    using Oracle = std::function<Point(const Point& opponent_move)>;

    BestResponseLearner() = default;
    explicit BestResponseLearner(Oracle oracle, double approx_factor = 1.0)
        : oracle_(std::move(oracle)), approx_(approx_factor) {}

    void set_oracle(Oracle oracle) { oracle_ = std::move(oracle); }
    bool has_oracle() const { return static_cast<bool>(oracle_); }
    double approx_factor() const { return approx_; }

    LearnerName name() const override { return LearnerName::best_response; }
    void prepare(const Domain&, const LossBounds&, std::size_t) override {}
    Point next(const PlayContext& ctx) override;
    void observe(const Feedback&) override {}
    double regret_bound(std::size_t, double) const override { return 0.0; }

private:
    Oracle oracle_;
    double approx_ = 1.0;
};

/// Independent sub-learners on the factors of a product domain.
class BlockLearner final : public Learner {
public:
    explicit BlockLearner(std::vector<std::unique_ptr<Learner>> blocks);

    LearnerName name() const override;
    bool randomized() const override;
    void set_block_bounds(std::vector<LossBounds> bounds) { block_bounds_ = std::move(bounds); }
    void prepare(const Domain& domain, const LossBounds& bounds, std::size_t horizon) override;
    Point next(const PlayContext& ctx) override;
    void observe(const Feedback& feedback) override;
    double regret_bound(std::size_t T, double delta) const override;
    /// Block i is seeded from slot + i.
    void seed_from(const RandomSource& master, std::uint64_t slot) override;
    std::string describe() const override;

    std::size_t size() const { return blocks_.size(); }
    Learner& block(std::size_t i) { return *blocks_[i]; }

private:
    std::vector<std::unique_ptr<Learner>> blocks_;
    std::vector<LossBounds> block_bounds_;
    std::vector<std::size_t> sizes_;
};

}  // namespace robustplay
