#include "robustplay/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>

namespace robustplay {

namespace {

struct DisjointSets {
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

bool removed_at(std::span<const char> removed, std::size_t e) { return !removed.empty() && removed[e]; }

std::string next_content_line(std::istream& is) {
    std::string line;
    while (std::getline(is, line)) {
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        if (line.find_first_not_of(" \t\r") != std::string::npos) return line;
    }
    return {};
}

}  // namespace

double default_big_M(std::size_t n, double max_edge_cost) {
    return 10.0 * static_cast<double>(n) * std::max(max_edge_cost, 1.0);
}

Graph::Graph(std::size_t n, std::vector<Edge> edges, std::size_t source, std::size_t sink, int demand,
             std::optional<double> big_M)
    : n_(n), edges_(std::move(edges)), source_(source), sink_(sink), demand_(demand), adjacency_(n) {
    if (n < 2) throw std::invalid_argument("graph needs at least two nodes");
    if (source >= n || sink >= n || source == sink) throw std::invalid_argument("invalid source/sink");
    if (demand != 1) throw std::invalid_argument("only unit demand is supported");
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto& ed = edges_[e];
        if (ed.a >= n || ed.b >= n) throw std::invalid_argument("edge endpoint out of range");
        if (ed.a == ed.b) throw std::invalid_argument("self loops are not supported");
        if (!std::isfinite(ed.cost) || !std::isfinite(ed.capacity))
            throw std::invalid_argument("non-finite edge data");
        adjacency_[ed.a].emplace_back(ed.b, e);
        adjacency_[ed.b].emplace_back(ed.a, e);
    }
    big_M_ = big_M.value_or(default_big_M(n, max_cost()));
    if (!(big_M_ > max_cost())) throw std::invalid_argument("big_M must exceed the largest edge cost");
}

double Graph::max_cost() const {
    double m = 0.0;
    for (const auto& e : edges_) m = std::max(m, e.cost);
    return m;
}

Point Graph::base_costs() const {
    Point c(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) c[e] = edges_[e].cost;
    return c;
}

Graph read_graph(std::istream& is) {
    std::istringstream header(next_content_line(is));
    std::size_t n = 0, m = 0, s = 0, t = 0;
    int demand = 0;
    if (!(header >> n >> m >> s >> t >> demand)) throw std::invalid_argument("graph file: bad header");
    std::vector<Edge> edges;
    edges.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::istringstream row(next_content_line(is));
        Edge e;
        if (!(row >> e.a >> e.b >> e.cost >> e.capacity))
            throw std::invalid_argument("graph file: bad edge line " + std::to_string(i + 1));
        edges.push_back(e);
    }
    return Graph(n, std::move(edges), s, t, demand);
}

void write_graph(std::ostream& os, const Graph& g) {
    os << g.num_nodes() << ' ' << g.num_edges() << ' ' << g.source() << ' ' << g.sink() << ' ' << g.demand()
       << '\n';
    for (const auto& e : g.edges())
        os << e.a << ' ' << e.b << ' ' << format_real(e.cost) << ' ' << format_real(e.capacity) << '\n';
}

bool is_connected(const Graph& g, std::span<const char> removed) {
    DisjointSets ds(g.num_nodes());
    std::size_t components = g.num_nodes();
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        if (removed_at(removed, e)) continue;
        if (ds.unite(g.edges()[e].a, g.edges()[e].b)) --components;
    }
    return components == 1;
}

bool connects(const Graph& g, std::size_t from, std::size_t to, std::span<const char> removed) {
    DisjointSets ds(g.num_nodes());
    for (std::size_t e = 0; e < g.num_edges(); ++e)
        if (!removed_at(removed, e)) ds.unite(g.edges()[e].a, g.edges()[e].b);
    return ds.find(from) == ds.find(to);
}

FlowResult mincost_flow(const Graph& g, std::span<const double> edge_costs) {
    const std::size_t n = g.num_nodes();
    const std::size_t m = g.num_edges();
    if (edge_costs.size() != m) throw std::invalid_argument("mincost_flow: cost vector has wrong dimension");
    for (double c : edge_costs) {
        if (!std::isfinite(c)) throw std::invalid_argument("mincost_flow: non-finite cost");
        // An undirected edge of negative cost is a negative cycle.
        if (c < 0.0) throw std::invalid_argument("mincost_flow: negative edge cost on undirected graph");
    }

    // Costs are nonnegative, so the initial potentials are zero and one Dijkstra
    // pass per unit of demand is an exact successive-shortest-path step.
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, inf);
    std::vector<std::size_t> pred_edge(n, m);
    std::vector<char> done(n, 0);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[g.source()] = 0.0;
    heap.emplace(0.0, g.source());
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (done[v]) continue;
        done[v] = 1;
        if (v == g.sink()) break;
        for (auto [w, e] : g.adjacency()[v]) {
            const double nd = d + edge_costs[e];
            if (nd < dist[w]) {
                dist[w] = nd;
                pred_edge[w] = e;
                heap.emplace(nd, w);
            }
        }
    }
    if (!done[g.sink()]) throw std::invalid_argument("infeasible demand");

    FlowResult out{Point(m), std::vector<int>(m, 0), 0.0};
    CompensatedSum cost;
    for (std::size_t v = g.sink(); v != g.source();) {
        const std::size_t e = pred_edge[v];
        const auto& ed = g.edges()[e];
        const std::size_t u = ed.a == v ? ed.b : ed.a;
        out.arc_flow[e] = (ed.a == u) ? 1 : -1;
        out.indicator[e] = 1.0;
        cost.add(edge_costs[e]);
        v = u;
    }
    out.cost = cost.value();
    return out;
}

std::vector<long> node_balance(const Graph& g, std::span<const int> arc_flow) {
    std::vector<long> balance(g.num_nodes(), 0);
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        balance[g.edges()[e].a] += arc_flow[e];
        balance[g.edges()[e].b] -= arc_flow[e];
    }
    return balance;
}

double max_flow_value(const Graph& g, std::span<const double> capacities) {
    // Edmonds-Karp on the symmetric residual graph.
    const std::size_t n = g.num_nodes();
    const std::size_t m = g.num_edges();
    // residual[e][0]: capacity a->b, residual[e][1]: b->a
    std::vector<std::array<double, 2>> residual(m);
    for (std::size_t e = 0; e < m; ++e) residual[e] = {std::max(0.0, capacities[e]), std::max(0.0, capacities[e])};
    double total = 0.0;
    for (;;) {
        std::vector<std::pair<std::size_t, int>> via(n, {m, 0});
        std::vector<char> seen(n, 0);
        std::queue<std::size_t> q;
        q.push(g.source());
        seen[g.source()] = 1;
        while (!q.empty() && !seen[g.sink()]) {
            const auto v = q.front();
            q.pop();
            for (auto [w, e] : g.adjacency()[v]) {
                const int dir = g.edges()[e].a == v ? 0 : 1;
                if (!seen[w] && residual[e][dir] > 1e-15) {
                    seen[w] = 1;
                    via[w] = {e, dir};
                    q.push(w);
                }
            }
        }
        if (!seen[g.sink()]) break;
        double bottleneck = std::numeric_limits<double>::infinity();
        for (std::size_t v = g.sink(); v != g.source();) {
            auto [e, dir] = via[v];
            bottleneck = std::min(bottleneck, residual[e][dir]);
            v = dir == 0 ? g.edges()[e].a : g.edges()[e].b;
        }
        for (std::size_t v = g.sink(); v != g.source();) {
            auto [e, dir] = via[v];
            residual[e][dir] -= bottleneck;
            residual[e][1 - dir] += bottleneck;
            v = dir == 0 ? g.edges()[e].a : g.edges()[e].b;
        }
        total += bottleneck;
    }
    return total;
}

namespace {

// Number of subsets of size <= K of an m-set, saturating at limit + 1.
std::uint64_t count_subsets(std::size_t m, std::size_t K, std::uint64_t limit) {
    std::uint64_t total = 0;
    long double binom = 1.0L;
    for (std::size_t k = 0; k <= std::min(K, m); ++k) {
        if (k > 0) binom = binom * static_cast<long double>(m - k + 1) / static_cast<long double>(k);
        total += binom > static_cast<long double>(limit) ? limit + 1 : static_cast<std::uint64_t>(binom + 0.5L);
        if (total > limit) return limit + 1;
    }
    return total;
}

}  // namespace

EdgeRemovalResult edge_removal_argmax(const Graph& g, std::span<const double> weights, std::size_t K,
                                      std::uint64_t exact_limit) {
    const std::size_t m = g.num_edges();
    if (weights.size() != m) throw std::invalid_argument("edge_removal_argmax: weight vector has wrong dimension");
    for (double w : weights)
        if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("edge_removal_argmax: weights must be >= 0");
    if (!is_connected(g)) throw std::invalid_argument("edge_removal_argmax: graph already disconnected");

    EdgeRemovalResult out{Point(m), 0.0, false, 0};
    if (K == 0 || m == 0) return out;

    std::vector<char> removed(m, 0);
    const auto total = count_subsets(m, K, exact_limit);
    if (total <= exact_limit) {
        // Sizes ascending, combinations in lexicographic order; strict improvement keeps
        // the smallest and then lexicographically first optimal set.
        std::vector<std::size_t> best;
        double best_value = 0.0;
        for (std::size_t k = 1; k <= std::min(K, m); ++k) {
            std::vector<std::size_t> idx(k);
            std::iota(idx.begin(), idx.end(), 0);
            for (;;) {
                ++out.combinations;
                double value = 0.0;
                for (auto e : idx) value += weights[e];
                if (value > best_value) {
                    std::fill(removed.begin(), removed.end(), 0);
                    for (auto e : idx) removed[e] = 1;
                    if (is_connected(g, removed)) {
                        best_value = value;
                        best = idx;
                    }
                }
                // next combination
                std::size_t i = k;
                while (i > 0 && idx[i - 1] == m - k + (i - 1)) --i;
                if (i == 0) break;
                ++idx[i - 1];
                for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
            }
        }
        for (auto e : best) out.indicator[e] = 1.0;
        out.value = best_value;
        return out;
    }

    out.approximate = true;
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return weights[a] > weights[b]; });
    std::size_t taken = 0;
    for (auto e : order) {
        if (taken == K || weights[e] <= 0.0) break;
        removed[e] = 1;
        if (is_connected(g, removed)) {
            ++taken;
            out.indicator[e] = 1.0;
            out.value += weights[e];
        } else {
            removed[e] = 0;
        }
    }
    return out;
}

Graph random_gnp_graph(const GnpOptions& options, std::uint64_t seed) {
    const std::size_t n = options.n;
    const double p = options.p;
    if (n < 2) throw std::invalid_argument("random_gnp_graph: n must be at least 2");
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("random_gnp_graph: p must lie in (0, 1]");
    const RandomSource master(seed);
    for (std::size_t attempt = 0; attempt < options.max_attempts; ++attempt) {
        auto engine = master.derive(attempt).round_stream(1);
        std::vector<Edge> edges;
        if (p == 1.0) {
            for (std::size_t v = 1; v < n; ++v)
                for (std::size_t w = 0; w < v; ++w) edges.push_back({v, w, 0.0, 0.0});
        } else {
            // Batagelj-Brandes skipping over the lower triangle.
            const double lp = std::log1p(-p);
            long long v = 1;
            long long w = -1;
            const auto nn = static_cast<long long>(n);
            while (v < nn) {
                const double lr = std::log1p(-uniform01(engine));
                w += 1 + static_cast<long long>(std::floor(lr / lp));
                while (w >= v && v < nn) {
                    w -= v;
                    ++v;
                }
                if (v < nn) edges.push_back({static_cast<std::size_t>(v), static_cast<std::size_t>(w), 0.0, 0.0});
            }
        }
        for (auto& e : edges) {
            e.cost = uniform01(engine);
            e.capacity = uniform01(engine);
        }
        Graph g(n, std::move(edges), options.source, options.sink);
        const bool ok = options.require_connected ? is_connected(g) : connects(g, g.source(), g.sink());
        if (ok) return g;
    }
    throw std::runtime_error("random_gnp_graph: cannot generate a connected instance");
}

}  // namespace robustplay
