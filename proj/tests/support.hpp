// Shared helpers for the unit and acceptance tests: feasible-point samplers per
// domain kind and small independent oracles (support enumeration, Bellman-Ford,
// brute-force policy enumeration) that do not reuse the library's solvers.
#pragma once

#include "robustplay/domain.hpp"
#include "robustplay/graph.hpp"
#include "robustplay/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <variant>
#include <vector>

namespace testing_support {

using robustplay::Domain;
using robustplay::Point;
using Rng = std::mt19937_64;

inline double unif(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline Point random_weights(std::size_t k, Rng& rng) {
    std::exponential_distribution<double> e(1.0);
    Point w(k);
    double s = 0.0;
    for (auto& v : w) s += (v = e(rng));
    w *= 1.0 / s;
    return w;
}

/// A random feasible point of any domain kind.
inline Point sample_point(const Domain& d, Rng& rng) {
    using robustplay::dot;
    if (auto* s = std::get_if<Domain::Simplex>(&d.kind())) return random_weights(s->n, rng);
    if (auto* b = std::get_if<Domain::Box>(&d.kind())) {
        Point p(b->lo.size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = b->lo[i] + unif(rng) * (b->hi[i] - b->lo[i]);
        return p;
    }
    if (auto* b = std::get_if<Domain::L2Ball>(&d.kind())) {
        std::normal_distribution<double> g;
        Point dir(b->center.size());
        for (auto& v : dir) v = g(rng);
        const double nn = robustplay::norm2(dir);
        const double r = b->radius * std::pow(unif(rng), 1.0 / static_cast<double>(dir.size()));
        return b->center + (r / nn) * dir;
    }
    if (auto* b = std::get_if<Domain::Budget>(&d.kind())) {
        Point w = random_weights(b->n + 1, rng);  // last weight is slack
        Point p(b->n);
        for (std::size_t i = 0; i < b->n; ++i) p[i] = b->K * w[i];
        return p;
    }
    if (auto* h = std::get_if<Domain::VertexHull>(&d.kind())) {
        const Point w = random_weights(h->vertices.size(), rng);
        return robustplay::hull_point(*h, w);
    }
    if (auto* f = std::get_if<Domain::FlowPolytope>(&d.kind())) {
        // Convex combination of shortest paths under random costs.
        const std::size_t m = f->graph->num_edges();
        const Point w = random_weights(3, rng);
        Point acc(m);
        for (double wk : w) {
            std::vector<double> c(m);
            for (auto& v : c) v = unif(rng);
            const auto fr = robustplay::mincost_flow(*f->graph, c);
            acc += wk * fr.indicator;
        }
        return acc;
    }
    if (auto* o = std::get_if<Domain::OccupancyPolytope>(&d.kind())) {
        const auto& mdp = *o->mdp;
        std::vector<std::vector<double>> pol(mdp.states());
        for (auto& row : pol) {
            const Point w = random_weights(mdp.actions(), rng);
            row.assign(w.begin(), w.end());
        }
        const Point y = robustplay::state_visitation(mdp, pol);
        Point x(mdp.pairs());
        for (std::size_t s = 0; s < mdp.states(); ++s)
            for (std::size_t a = 0; a < mdp.actions(); ++a) x[mdp.index(s, a)] = y[s] * pol[s][a];
        return x;
    }
    if (auto* e = std::get_if<Domain::EdgeRemoval>(&d.kind())) {
        const auto& g = *e->graph;
        std::vector<std::size_t> order(g.num_edges());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<char> removed(g.num_edges(), 0);
        const std::size_t target = e->K == 0 ? 0 : static_cast<std::size_t>(unif(rng) * static_cast<double>(e->K + 1));
        std::size_t count = 0;
        for (std::size_t idx : order) {
            if (count >= target) break;
            removed[idx] = 1;
            if (robustplay::is_connected(g, removed)) {
                ++count;
            } else {
                removed[idx] = 0;
            }
        }
        Point p(g.num_edges());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = removed[i];
        return p;
    }
    if (auto* pr = std::get_if<Domain::Product>(&d.kind())) {
        std::vector<Point> parts;
        for (const auto& part : *pr->parts) parts.push_back(sample_point(part, rng));
        return robustplay::concat(parts);
    }
    throw std::logic_error("sample_point: unhandled domain kind");
}

// ---------------------------------------------------------------------------
// Gaussian elimination with partial pivoting; false when singular.
inline bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (std::abs(a[piv][c]) < 1e-12) return false;
        std::swap(a[piv], a[c]);
        std::swap(b[piv], b[c]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    x.resize(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return true;
}

/// min over row mixtures of max over columns, by enumerating equal-payoff supports.
inline double support_enumeration_value(const std::vector<std::vector<double>>& M) {
    const std::size_t R = M.size(), C = M.front().size();
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t rs = 1; rs < (1u << R); ++rs) {
        std::vector<std::size_t> I;
        for (std::size_t i = 0; i < R; ++i)
            if (rs >> i & 1u) I.push_back(i);
        const std::size_t k = I.size();
        for (std::uint32_t cs = 1; cs < (1u << C); ++cs) {
            if (static_cast<std::size_t>(__builtin_popcount(cs)) != k) continue;
            std::vector<std::size_t> J;
            for (std::size_t j = 0; j < C; ++j)
                if (cs >> j & 1u) J.push_back(j);
            // unknowns: x_I (k) and v; equations: (x M)_j = v for j in J, sum x = 1.
            std::vector<std::vector<double>> a(k + 1, std::vector<double>(k + 1, 0.0));
            std::vector<double> b(k + 1, 0.0), sol;
            for (std::size_t e = 0; e < k; ++e) {
                for (std::size_t q = 0; q < k; ++q) a[e][q] = M[I[q]][J[e]];
                a[e][k] = -1.0;
            }
            for (std::size_t q = 0; q < k; ++q) a[k][q] = 1.0;
            b[k] = 1.0;
            if (!solve_dense(a, b, sol)) continue;
            if (std::any_of(sol.begin(), sol.begin() + static_cast<long>(k), [](double v) { return v < -1e-10; })) continue;
            double worst = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < C; ++j) {
                double s = 0.0;
                for (std::size_t q = 0; q < k; ++q) s += std::max(sol[q], 0.0) * M[I[q]][j];
                worst = std::max(worst, s);
            }
            best = std::min(best, worst);
        }
    }
    return best;
}

/// Shortest s-t path cost by Bellman-Ford over both arc directions.
inline double bellman_ford_cost(const robustplay::Graph& g, const std::vector<double>& cost) {
    std::vector<double> dist(g.num_nodes(), std::numeric_limits<double>::infinity());
    dist[g.source()] = 0.0;
    for (std::size_t it = 0; it + 1 < g.num_nodes(); ++it) {
        bool changed = false;
        for (std::size_t e = 0; e < g.num_edges(); ++e) {
            const auto& ed = g.edges()[e];
            if (dist[ed.a] + cost[e] < dist[ed.b]) dist[ed.b] = dist[ed.a] + cost[e], changed = true;
            if (dist[ed.b] + cost[e] < dist[ed.a]) dist[ed.a] = dist[ed.b] + cost[e], changed = true;
        }
        if (!changed) break;
    }
    return dist[g.sink()];
}

/// Occupancy of a deterministic policy via the series sum of discounted visits
/// (independent of the library's linear solve).
inline Point series_occupancy(const robustplay::Mdp& mdp, const std::vector<std::size_t>& policy) {
    const std::size_t S = mdp.states();
    Point y(S), cur = mdp.alpha();
    double scale = 1.0;
    for (int k = 0; k < 20000 && scale > 1e-16; ++k) {
        y += cur;
        Point nxt(S);
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t s2 = 0; s2 < S; ++s2) nxt[s2] += mdp.gamma() * cur[s] * mdp.prob(s, policy[s], s2);
        cur = nxt;
        scale = robustplay::norm1(cur);
    }
    Point x(mdp.pairs());
    for (std::size_t s = 0; s < S; ++s) x[mdp.index(s, policy[s])] = y[s];
    return x;
}

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace testing_support
