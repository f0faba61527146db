#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace robustplay {

// *******************************************************
// Errors
// *******************************************************

/// Raised when a run or learner is assembled in a way the theory forbids
/// (weak learner in a strong slot, Lambda outside the simplex, ...).
class ConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a learner asks for information its information schedule
/// does not grant it (the opponent's move of the current round).
class ScheduleViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// *******************************************************
// Point
// *******************************************************

/// Dense real vector used for decisions x, uncertainties u and weights lambda.
class Point {
public:
    Point() = default;
    explicit Point(std::size_t dim, double fill = 0.0) : coords_(dim, fill) {}
    Point(std::initializer_list<double> values) : coords_(values) {}
    explicit Point(std::vector<double> values) : coords_(std::move(values)) {}

    std::size_t size() const { return coords_.size(); }
    bool empty() const { return coords_.empty(); }

    double& operator[](std::size_t i) { return coords_[i]; }
    double operator[](std::size_t i) const { return coords_[i]; }

    auto begin() { return coords_.begin(); }
    auto end() { return coords_.end(); }
    auto begin() const { return coords_.begin(); }
    auto end() const { return coords_.end(); }

    const std::vector<double>& coords() const { return coords_; }
    std::span<const double> view() const { return coords_; }

    bool is_finite() const;

    Point& operator+=(const Point& other);
    Point& operator-=(const Point& other);
    Point& operator*=(double scale);

    friend bool operator==(const Point&, const Point&) = default;

private:
    std::vector<double> coords_;
};

Point operator+(Point lhs, const Point& rhs);
Point operator-(Point lhs, const Point& rhs);
Point operator*(double scale, Point p);
Point operator-(Point p);

double dot(const Point& a, const Point& b);
double norm1(const Point& p);
double norm2(const Point& p);
double norm_inf(const Point& p);
double distance2(const Point& a, const Point& b);

/// Unit vector e_i of dimension n.
Point unit_vector(std::size_t n, std::size_t i);

/// Concatenation of blocks, in order.
Point concat(std::span<const Point> blocks);

/// Splits `p` into consecutive blocks of the given sizes.
std::vector<Point> split(const Point& p, std::span<const std::size_t> sizes);

std::ostream& operator<<(std::ostream& os, const Point& p);

/// Throws std::invalid_argument naming `what` when dimensions differ.
void require_same_dim(const Point& a, const Point& b, const char* what);

// *******************************************************
// Compensated summation
// *******************************************************

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
public:
    void add(double value);
    double value() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

/// Coordinatewise compensated accumulator for vectors.
class CompensatedVector {
public:
    CompensatedVector() = default;
    explicit CompensatedVector(std::size_t dim) : sums_(dim) {}

    std::size_t size() const { return sums_.size(); }
    void add(const Point& p, double scale = 1.0);
    Point value() const;

private:
    std::vector<CompensatedSum> sums_;
};

/// Coordinatewise arithmetic mean with compensated summation.
/// Throws std::invalid_argument("no rounds") on an empty list.
Point average_point(std::span<const Point> points);

// *******************************************************
// Randomness
// *******************************************************

/// Seeded source of per-round independent streams xi_1, xi_2, ...
///
/// The stream for round t depends only on (seed, t), so any round can be
/// replayed in isolation and two sources with the same seed agree bit for bit.
class RandomSource {
public:
    using Engine = std::mt19937_64;

    explicit RandomSource(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Independent child source, e.g. per learner slot.
    RandomSource derive(std::uint64_t stream_id) const;

    /// Engine for round t (t >= 1).
    Engine round_stream(std::uint64_t t) const;

private:
    std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Uniform double in [0, 1) from 53 random bits (portable across standard libraries).
double uniform01(RandomSource::Engine& engine);

// *******************************************************
// Transcripts
// *******************************************************

enum class ScheduleOrder { parallel, dual_first, primal_first };

const char* to_string(ScheduleOrder order);

struct Round {
    std::size_t t = 0;
    Point x;
    Point u;  // concatenated u^1..u^n for multi-objective runs
    std::optional<Point> lambda;
    double loss = 0.0;
};

/// Per-run record of play. Optional per-round traces are empty when the run
/// could not compute them (e.g. no best-fixed-action oracle for the loss).
struct Transcript {
    ScheduleOrder schedule = ScheduleOrder::parallel;
    std::vector<Round> rounds;
    std::vector<double> cum_regret_x;
    std::vector<double> cum_regret_u;
    std::vector<double> gap_bound;
    std::vector<double> gap;
    std::map<std::string, std::string> notes;

    std::size_t horizon() const { return rounds.size(); }
};

/// Writes `t,x_0..x_{d-1},u_0..u_{d'-1}[,lambda_..],loss[,cum_regret_x][,cum_regret_u][,gap_bound]`.
/// Reals are printed in shortest round-trip form so reruns are byte-identical.
void write_transcript_csv(std::ostream& os, const Transcript& transcript);

/// Shortest decimal representation that round-trips to the same double.
std::string format_real(double value);

// *******************************************************
// Certificates and solutions
// *******************************************************

struct RegretCertificate {
    std::size_t T = 0;
    double delta = 0.05;  // per learner
    double bound_x = 0.0;
    double bound_u = 0.0;
    std::optional<double> bound_lambda;
    double realized_regret_x = 0.0;
    double realized_regret_u = 0.0;
    std::optional<double> realized_regret_lambda;
    /// Union bound over all learners that may fail, e.g. 2*delta for two weak learners.
    double failure_probability = 0.0;
};

enum class SolutionKind { averaged_point, empirical_distribution };

struct Solution {
    SolutionKind kind = SolutionKind::averaged_point;
    std::optional<Point> xbar;
    std::vector<Point> support;  // uniform weights, one entry per round
    double gap_bound = 0.0;
    std::optional<double> gap_evaluated;
    /// Multiplier on the benchmark in the certified inequality (C-approximate oracles,
    /// (n+1)/n factors of the randomized multi-objective drivers).
    double benchmark_factor = 1.0;
    RegretCertificate certificate;
    std::shared_ptr<const Transcript> transcript;
    std::vector<std::string> warnings;

    /// Mean of the support for distributions, xbar otherwise.
    Point mean_point() const;
};

}  // namespace robustplay
