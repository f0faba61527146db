#include "robustplay/mdp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace robustplay {

namespace {

constexpr std::size_t dense_limit = 2000;

void check_distribution(std::span<const double> p, const char* what) {
    double s = 0.0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": negative or non-finite");
        s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument(std::string(what) + ": does not sum to 1");
}

// Solves (I - gamma * M^T) y = alpha where M is the S x S state transition
// matrix of a policy, given row by row through `trans(s, s')`.
template <class Trans>
Point solve_visitation(const Mdp& mdp, Trans&& trans) {
    const std::size_t S = mdp.states();
    const double g = mdp.gamma();
    if (S <= dense_limit) {
        Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(S, S);
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t n = 0; n < S; ++n) lhs(n, s) -= g * trans(s, n);
        Eigen::VectorXd rhs(S);
        for (std::size_t s = 0; s < S; ++s) rhs(s) = mdp.alpha()[s];
        Eigen::VectorXd y = lhs.partialPivLu().solve(rhs);
        Point out(S);
        for (std::size_t s = 0; s < S; ++s) out[s] = y(s);
        return out;
    }
    // y = sum_i (gamma M^T)^i alpha, truncated once the increment is below 1e-10.
    Point y = mdp.alpha();
    Point term = mdp.alpha();
    for (std::size_t it = 0; it < 100'000'000; ++it) {
        Point next(S);
        for (std::size_t s = 0; s < S; ++s) {
            if (term[s] == 0.0) continue;
            for (std::size_t n = 0; n < S; ++n) next[n] += g * trans(s, n) * term[s];
        }
        term = std::move(next);
        y += term;
        if (norm1(term) < 1e-10 * (1.0 - g)) return y;
    }
    throw std::runtime_error("visitation series did not converge");
}

Point evaluate_policy(const Mdp& mdp, std::span<const std::size_t> policy, const Point& rewards) {
    // V = r_pi + gamma P_pi V
    const std::size_t S = mdp.states();
    const double g = mdp.gamma();
    if (S <= dense_limit) {
        Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(S, S);
        Eigen::VectorXd rhs(S);
        for (std::size_t s = 0; s < S; ++s) {
            const auto row = mdp.row(s, policy[s]);
            for (std::size_t n = 0; n < S; ++n) lhs(s, n) -= g * row[n];
            rhs(s) = rewards[mdp.index(s, policy[s])];
        }
        Eigen::VectorXd v = lhs.partialPivLu().solve(rhs);
        Point out(S);
        for (std::size_t s = 0; s < S; ++s) out[s] = v(s);
        return out;
    }
    Point v(S);
    for (;;) {
        Point next(S);
        double diff = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            const auto row = mdp.row(s, policy[s]);
            double acc = rewards[mdp.index(s, policy[s])];
            for (std::size_t n = 0; n < S; ++n) acc += g * row[n] * v[n];
            next[s] = acc;
            diff = std::max(diff, std::abs(acc - v[s]));
        }
        v = std::move(next);
        if (diff < 1e-12) return v;
    }
}

double q_value(const Mdp& mdp, const Point& rewards, const Point& v, std::size_t s, std::size_t a) {
    const auto row = mdp.row(s, a);
    double acc = 0.0;
    for (std::size_t n = 0; n < mdp.states(); ++n) acc += row[n] * v[n];
    return rewards[mdp.index(s, a)] + mdp.gamma() * acc;
}

}  // namespace

Mdp::Mdp(std::size_t states, std::size_t actions, std::vector<double> transitions, Point nominal_reward, double gamma,
         Point alpha)
    : S_(states), A_(actions), P_(std::move(transitions)), r0_(std::move(nominal_reward)), gamma_(gamma),
      alpha_(std::move(alpha)) {
    if (S_ == 0 || A_ == 0) throw std::invalid_argument("mdp: empty state or action set");
    if (!(gamma_ > 0.0 && gamma_ < 1.0)) throw std::invalid_argument("mdp: gamma must lie strictly inside (0,1)");
    if (P_.size() != S_ * A_ * S_) throw std::invalid_argument("mdp: transition table has wrong size");
    if (r0_.size() != S_ * A_) throw std::invalid_argument("mdp: reward vector has wrong size");
    if (alpha_.size() != S_) throw std::invalid_argument("mdp: alpha has wrong size");
    if (!r0_.is_finite()) throw std::invalid_argument("mdp: non-finite reward");
    check_distribution(alpha_.view(), "mdp alpha");
    for (std::size_t i = 0; i < S_ * A_; ++i)
        check_distribution(std::span<const double>(P_.data() + i * S_, S_), "mdp transition row");
}

OccupancySolution solve_occupancy(const Mdp& mdp, const Point& rewards, std::size_t max_sweeps) {
    const std::size_t S = mdp.states();
    const std::size_t A = mdp.actions();
    if (rewards.size() != mdp.pairs()) throw std::invalid_argument("mdp_occupancy: reward vector has wrong size");
    if (!rewards.is_finite()) throw std::invalid_argument("mdp_occupancy: non-finite reward");

    OccupancySolution out;
    Point v(S);
    for (;;) {
        if (out.sweeps >= max_sweeps) throw std::runtime_error("value iteration did not converge");
        ++out.sweeps;
        Point next(S);
        double residual = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < A; ++a) best = std::max(best, q_value(mdp, rewards, v, s, a));
            next[s] = best;
            residual = std::max(residual, std::abs(best - v[s]));
        }
        v = std::move(next);
        if (residual < 1e-10) break;
    }

    // Greedy policy, then policy iteration from it. Switching needs a strict
    // improvement above rounding, so ties keep the lowest action index.
    out.policy.assign(S, 0);
    auto greedy = [&](const Point& values, std::vector<std::size_t>& policy) {
        bool changed = false;
        for (std::size_t s = 0; s < S; ++s) {
            std::size_t best_a = 0;
            double best_q = q_value(mdp, rewards, values, s, 0);
            for (std::size_t a = 1; a < A; ++a) {
                const double q = q_value(mdp, rewards, values, s, a);
                if (q > best_q + 1e-12 * (1.0 + std::abs(best_q))) {
                    best_q = q;
                    best_a = a;
                }
            }
            const double cur = q_value(mdp, rewards, values, s, policy[s]);
            if (best_a != policy[s] && best_q > cur + 1e-12 * (1.0 + std::abs(cur))) {
                policy[s] = best_a;
                changed = true;
            }
        }
        return changed;
    };
    std::vector<std::size_t> start(S, 0);
    for (std::size_t s = 0; s < S; ++s) {
        std::size_t best_a = 0;
        double best_q = q_value(mdp, rewards, v, s, 0);
        for (std::size_t a = 1; a < A; ++a) {
            const double q = q_value(mdp, rewards, v, s, a);
            if (q > best_q + 1e-12 * (1.0 + std::abs(best_q))) {
                best_q = q;
                best_a = a;
            }
        }
        start[s] = best_a;
    }
    out.policy = std::move(start);
    for (std::size_t round = 0; round < 1000; ++round) {
        out.values = evaluate_policy(mdp, out.policy, rewards);
        if (!greedy(out.values, out.policy)) break;
    }
    out.occupancy = policy_occupancy(mdp, out.policy);
    return out;
}

Point mdp_occupancy(const Mdp& mdp, const Point& rewards) { return solve_occupancy(mdp, rewards).occupancy; }

Point state_visitation(const Mdp& mdp, const std::vector<std::vector<double>>& policy) {
    const std::size_t S = mdp.states();
    if (policy.size() != S) throw std::invalid_argument("state_visitation: policy has wrong size");
    return solve_visitation(mdp, [&](std::size_t s, std::size_t n) {
        double p = 0.0;
        for (std::size_t a = 0; a < mdp.actions(); ++a)
            if (policy[s][a] != 0.0) p += policy[s][a] * mdp.prob(s, a, n);
        return p;
    });
}

Point policy_occupancy(const Mdp& mdp, std::span<const std::size_t> policy) {
    if (policy.size() != mdp.states()) throw std::invalid_argument("policy_occupancy: policy has wrong size");
    const Point y = solve_visitation(mdp, [&](std::size_t s, std::size_t n) { return mdp.prob(s, policy[s], n); });
    Point x(mdp.pairs());
    for (std::size_t s = 0; s < mdp.states(); ++s) x[mdp.index(s, policy[s])] = y[s];
    return x;
}

double occupancy_residual(const Mdp& mdp, const Point& x) {
    const std::size_t S = mdp.states();
    const std::size_t A = mdp.actions();
    if (x.size() != mdp.pairs()) throw std::invalid_argument("occupancy_residual: wrong dimension");
    std::vector<CompensatedSum> balance(S);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const double xv = x[mdp.index(s, a)];
            balance[s].add(xv);
            if (xv == 0.0) continue;
            const auto row = mdp.row(s, a);
            for (std::size_t n = 0; n < S; ++n) balance[n].add(-mdp.gamma() * row[n] * xv);
        }
    }
    double worst = 0.0;
    for (std::size_t s = 0; s < S; ++s) worst = std::max(worst, std::abs(balance[s].value() - mdp.alpha()[s]));
    return worst;
}

StochasticPolicy extract_policy(const Mdp& mdp, const Point& occupancy, double tol) {
    const std::size_t S = mdp.states();
    const std::size_t A = mdp.actions();
    if (occupancy.size() != mdp.pairs()) throw std::invalid_argument("extract_policy: wrong dimension");
    StochasticPolicy out{std::vector<std::vector<double>>(S, std::vector<double>(A, 0.0)), std::vector<char>(S, 0)};
    for (std::size_t s = 0; s < S; ++s) {
        double total = 0.0;
        for (std::size_t a = 0; a < A; ++a) total += std::max(0.0, occupancy[mdp.index(s, a)]);
        if (total <= tol) {
            out.unvisited[s] = 1;
            std::fill(out.probs[s].begin(), out.probs[s].end(), 1.0 / static_cast<double>(A));
            continue;
        }
        for (std::size_t a = 0; a < A; ++a) out.probs[s][a] = std::max(0.0, occupancy[mdp.index(s, a)]) / total;
    }
    return out;
}

Mdp random_mdp(std::size_t states, std::size_t actions, double gamma, std::uint64_t seed) {
    auto engine = RandomSource(seed).round_stream(1);
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> P(states * actions * states);
    for (std::size_t i = 0; i < states * actions; ++i) {
        double total = 0.0;
        for (std::size_t n = 0; n < states; ++n) total += P[i * states + n] = expo(engine);
        for (std::size_t n = 0; n < states; ++n) P[i * states + n] /= total;
    }
    Point r(states * actions);
    for (auto& v : r) v = uniform01(engine);
    return Mdp(states, actions, std::move(P), std::move(r), gamma,
               Point(states, 1.0 / static_cast<double>(states)));
}

Mdp read_mdp(std::istream& is) {
    std::map<std::string, std::vector<double>> blocks;
    std::string token;
    std::string current;
    std::string line;
    while (std::getline(is, line)) {
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        std::istringstream ss(line);
        while (ss >> token) {
            if (std::isalpha(static_cast<unsigned char>(token[0]))) {
                current = token;
                if (blocks.count(current)) throw std::invalid_argument("mdp file: duplicate block " + current);
                blocks[current];
                continue;
            }
            if (current.empty()) throw std::invalid_argument("mdp file: value before first block");
            try {
                blocks[current].push_back(std::stod(token));
            } catch (const std::exception&) {
                throw std::invalid_argument("mdp file: bad number '" + token + "'");
            }
        }
    }
    auto scalar = [&](const char* name) {
        auto it = blocks.find(name);
        if (it == blocks.end() || it->second.size() != 1)
            throw std::invalid_argument(std::string("mdp file: block '") + name + "' needs one value");
        return it->second.front();
    };
    auto vec = [&](const char* name, std::size_t expected) {
        auto it = blocks.find(name);
        if (it == blocks.end()) throw std::invalid_argument(std::string("mdp file: missing block '") + name + "'");
        if (it->second.size() != expected)
            throw std::invalid_argument(std::string("mdp file: block '") + name + "' expects " +
                                        std::to_string(expected) + " values");
        return it->second;
    };
    const double sd = scalar("states");
    const double ad = scalar("actions");
    if (sd < 1 || ad < 1 || sd != std::floor(sd) || ad != std::floor(ad))
        throw std::invalid_argument("mdp file: states/actions must be positive integers");
    const auto S = static_cast<std::size_t>(sd);
    const auto A = static_cast<std::size_t>(ad);
    return Mdp(S, A, vec("p", S * A * S), Point(vec("r0", S * A)), scalar("gamma"), Point(vec("alpha", S)));
}

void write_mdp(std::ostream& os, const Mdp& mdp) {
    const std::size_t S = mdp.states();
    const std::size_t A = mdp.actions();
    os << "states " << S << "\nactions " << A << "\ngamma " << format_real(mdp.gamma()) << "\nalpha";
    for (double v : mdp.alpha()) os << ' ' << format_real(v);
    os << "\nr0\n";
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) os << (a ? " " : "") << format_real(mdp.nominal_reward()[mdp.index(s, a)]);
        os << '\n';
    }
    os << "p\n";
    for (std::size_t i = 0; i < S * A; ++i) {
        for (std::size_t n = 0; n < S; ++n) os << (n ? " " : "") << format_real(mdp.transitions()[i * S + n]);
        os << '\n';
    }
}

}  // namespace robustplay
