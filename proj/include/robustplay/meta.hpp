#pragma once

#include "robustplay/core.hpp"
#include "robustplay/domain.hpp"
#include "robustplay/learners.hpp"
#include "robustplay/objective.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace robustplay {

struct RunOptions {
    std::size_t T = 1000;
    double delta = 0.05;  // per learner
    std::uint64_t seed = 0;
    /// Per-round prefix regrets, gap bound and gap (bilinear objectives only).
    bool record_traces = true;
    /// min_x max_u f, used for gap_evaluated and the gap trace when present.
    std::optional<double> benchmark;
    /// Grid resolution for black-box objectives (worst case, best response, regret).
    std::size_t grid_steps = 0;
    /// Loss bounds for black-box objectives; bilinear objectives derive them.
    std::optional<LossBounds> x_bounds;
    std::optional<LossBounds> u_bounds;
    /// Allows a weak learner in a strong slot. Only for reproducing the failure mode.
    bool allow_weak_in_strong_slot = false;
};

// ---------------------------------------------------------------------------
// evaluation

/// max_u f(x, u): linear oracle for bilinear f, grid otherwise.
/// Throws std::invalid_argument("no worst-case oracle") when neither applies.
double worst_case_value(const Objective& f, const Point& x, const Domain& u_domain, std::size_t grid_steps = 0);

/// max_u E_{x ~ uniform(support)} f(x, u).
double worst_case_expected(const Objective& f, const std::vector<Point>& support, const Domain& u_domain,
                           std::size_t grid_steps = 0);

/// Worst-case value of the solution minus the benchmark.
double evaluate_gap(const Solution& solution, const Objective& f, const Domain& u_domain, double benchmark,
                    std::size_t grid_steps = 0);

struct BenchmarkResult {
    double value = 0.0;
    std::string method;  // constant | vertex_lp | grid | sandwich
    double resolution = 0.0;
    /// Width of the bracket for the sandwich method (upper - lower); 0 when exact.
    double width = 0.0;
};

struct BenchmarkOptions {
    std::size_t grid_steps = 200;
    std::size_t max_vertices = 2000;
    std::size_t max_grid = 2'000'000;
    /// Rounds of the strong-vs-strong run for the sandwich method (0 disables it).
    std::size_t sandwich_rounds = 0;
    std::uint64_t seed = 0;
};

/// min_x max_u f. Throws std::invalid_argument("benchmark unavailable") past the limits.
BenchmarkResult benchmark_value(const Objective& f, const Domain& x_domain, const Domain& u_domain,
                                const BenchmarkOptions& options = {});

// ---------------------------------------------------------------------------
// single objective

/// Parallel play of two learners; averaged x.
Solution rool_run(const Objective& f, const Domain& x_domain, const Domain& u_domain, Learner& learner_x,
                  Learner& learner_u, const RunOptions& options);

/// Parallel play; empirical distribution of x. X and f(., u) may be non-convex.
Solution r2ool_run(const Objective& f, const Domain& x_domain, const Domain& u_domain, Learner& learner_x,
                   Learner& learner_u, const RunOptions& options);

/// Strong u-learner against an x best response (u moves first each round).
/// `x_oracle` replaces the exact best response, e.g. by a C-approximate one.
Solution biased_dual_run(const Objective& f, const Domain& x_domain, const Domain& u_domain, Learner& strong_learner_u,
                         const RunOptions& options, double approx_factor = 1.0,
                         BestResponseLearner::Oracle x_oracle = {});

/// Strong x-learner against a u best response (x moves first); empirical distribution.
Solution biased_primal_randomized_run(const Objective& f, const Domain& x_domain, const Domain& u_domain,
                                      Learner& strong_learner_x, const RunOptions& options);

// ---------------------------------------------------------------------------
// multi-objective

/// x learns F = max_lambda <lambda, f> with subgradient <lambda*, grad f>; u^i learns f^i.
Solution multi_explicit_run(const MultiObjective& multi, const Domain& x_domain, Learner& learner_x,
                            std::vector<Learner*> learners_u, const RunOptions& options);

/// lambda is a third player on g = <lambda, f>.
Solution multi_distributional_run(const MultiObjective& multi, const Domain& x_domain, Learner& learner_x,
                                  std::vector<Learner*> learners_u, Learner& learner_lambda,
                                  const RunOptions& options);

enum class BiasedMode { strong_dual, strong_primal };

/// strong_dual: strong u^i-learners, exact x-oracle on F. strong_primal: strong x-learner on F,
/// exact u^i-oracles. Pass the strong learners in `learners` (u^1..u^n, or just x).
Solution multi_biased_run(const MultiObjective& multi, const Domain& x_domain, BiasedMode mode,
                          std::vector<Learner*> learners, const RunOptions& options);

enum class RandomizedMode { explicit_max, distributional };
enum class Verdict { feasible, infeasible };

const char* to_string(Verdict v);

struct RandomizedMultiResult {
    Solution solution;
    Verdict verdict = Verdict::infeasible;
    double threshold = 0.0;        // 3 * gap_bound
    double average_F = 0.0;        // (1/T) sum_t F(x_t, u_t)
    std::vector<double> running_F; // prefix averages
};

/// Empirical-distribution drivers for nonnegative f^i with Lambda the full simplex.
/// `learner_lambda` is used only in distributional mode.
RandomizedMultiResult randomized_multi_run(const MultiObjective& multi, const Domain& x_domain, RandomizedMode mode,
                                           Learner& learner_x, std::vector<Learner*> learners_u,
                                           Learner* learner_lambda, const RunOptions& options);

/// min over the x-grid (or x vertices) of max_lambda sum_i lambda_i f^i, the F benchmark.
double multi_benchmark(const MultiObjective& multi, const Domain& x_domain, std::size_t grid_steps);

/// Exact best response of x on F against fixed u^1..u^n (LP over vertices, else grid).
Point explicit_x_oracle(const MultiObjective& multi, const Domain& x_domain, const std::vector<Point>& us,
                        std::size_t grid_steps);

}  // namespace robustplay
