#pragma once

#include "robustplay/core.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace robustplay {

/// Finite discounted MDP. Pair (s, a) is stored at index s * A + a.
class Mdp {
public:
    /// `transitions` holds p(s'|s,a) at [(s * A + a) * S + s'].
    Mdp(std::size_t states, std::size_t actions, std::vector<double> transitions, Point nominal_reward, double gamma,
        Point alpha);

    std::size_t states() const { return S_; }
    std::size_t actions() const { return A_; }
    std::size_t pairs() const { return S_ * A_; }
    std::size_t index(std::size_t s, std::size_t a) const { return s * A_ + a; }

    double gamma() const { return gamma_; }
    const Point& alpha() const { return alpha_; }
    const Point& nominal_reward() const { return r0_; }

    double prob(std::size_t s, std::size_t a, std::size_t next) const { return P_[(s * A_ + a) * S_ + next]; }
    std::span<const double> row(std::size_t s, std::size_t a) const {
        return {P_.data() + (s * A_ + a) * S_, S_};
    }
    const std::vector<double>& transitions() const { return P_; }

private:
    std::size_t S_;
    std::size_t A_;
    std::vector<double> P_;
    Point r0_;
    double gamma_;
    Point alpha_;
};

struct OccupancySolution {
    Point occupancy;                  // x(s,a)
    std::vector<std::size_t> policy;  // deterministic optimal policy
    Point values;                     // V^pi
    std::size_t sweeps = 0;           // value-iteration sweeps
};

/// Optimal occupancy measure for the reward vector (maximization).
/// Value iteration to sup-norm residual 1e-10, then exact policy evaluation/improvement.
/// Throws std::runtime_error when value iteration exceeds `max_sweeps`.
OccupancySolution solve_occupancy(const Mdp& mdp, const Point& rewards, std::size_t max_sweeps = 1'000'000);

Point mdp_occupancy(const Mdp& mdp, const Point& rewards);

/// Discounted state visitation y = (I - gamma P_pi^T)^{-1} alpha for a stochastic policy.
/// `policy[s]` is a distribution over actions.
Point state_visitation(const Mdp& mdp, const std::vector<std::vector<double>>& policy);

/// Occupancy of a deterministic policy.
Point policy_occupancy(const Mdp& mdp, std::span<const std::size_t> policy);

/// max_s' | sum_a x(s',a) - gamma sum_{s,a} p(s'|s,a) x(s,a) - alpha(s') |
double occupancy_residual(const Mdp& mdp, const Point& x);

struct StochasticPolicy {
    std::vector<std::vector<double>> probs;
    std::vector<char> unvisited;  // states with zero occupancy get a uniform distribution
};

/// q_s(a) = x(s,a) / sum_a' x(s,a').
StochasticPolicy extract_policy(const Mdp& mdp, const Point& occupancy, double tol = 1e-14);

/// Random MDP with Dirichlet(1) transition rows, uniform [0,1] rewards and uniform alpha.
Mdp random_mdp(std::size_t states, std::size_t actions, double gamma, std::uint64_t seed);

/// Block format:
///   states S / actions A / gamma g / alpha <S values> / r0 <S*A values> / p <S*A*S values>
Mdp read_mdp(std::istream& is);
void write_mdp(std::ostream& os, const Mdp& mdp);

}  // namespace robustplay
