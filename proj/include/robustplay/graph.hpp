#pragma once

#include "robustplay/core.hpp"

#include <cstdint>
#include <optional>
#include <iosfwd>
#include <span>
#include <vector>

namespace robustplay {

struct Edge {
    std::size_t a = 0;
    std::size_t b = 0;
    double cost = 0.0;
    double capacity = 1.0;  // soft: congestion is priced, never enforced
};

/// Undirected graph with a distinguished source/sink pair and unit demand.
class Graph {
public:
    /// `big_M` defaults to 10 * n * max edge cost (at least 10 * n).
    Graph(std::size_t n, std::vector<Edge> edges, std::size_t source, std::size_t sink, int demand = 1,
          std::optional<double> big_M = std::nullopt);

    std::size_t num_nodes() const { return n_; }
    std::size_t num_edges() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    std::size_t source() const { return source_; }
    std::size_t sink() const { return sink_; }
    int demand() const { return demand_; }
    double big_M() const { return big_M_; }
    double max_cost() const;

    Point base_costs() const;

    /// (neighbour, edge index) pairs per node, ordered by edge index.
    const std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& adjacency() const { return adjacency_; }

private:
    std::size_t n_;
    std::vector<Edge> edges_;
    std::size_t source_;
    std::size_t sink_;
    int demand_;
    double big_M_;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency_;
};

double default_big_M(std::size_t n, double max_edge_cost);

/// Header `n m source sink demand`, then m lines `u v cost capacity`. '#' starts a comment.
Graph read_graph(std::istream& is);
void write_graph(std::ostream& os, const Graph& g);

/// Connectivity of the graph with the edges flagged in `removed` deleted (empty span: none).
bool is_connected(const Graph& g, std::span<const char> removed = {});
bool connects(const Graph& g, std::size_t from, std::size_t to, std::span<const char> removed = {});

struct FlowResult {
    Point indicator;            // |flow| per edge, in {0,1}
    std::vector<int> arc_flow;  // signed flow per edge: +1 along a->b, -1 along b->a
    double cost = 0.0;
};

/// Optimal integral unit s-t flow for nonnegative edge costs (successive shortest paths).
/// Throws std::invalid_argument("infeasible demand") when s and t are disconnected.
FlowResult mincost_flow(const Graph& g, std::span<const double> edge_costs);

/// Net outflow per node of a signed edge flow.
std::vector<long> node_balance(const Graph& g, std::span<const int> arc_flow);

/// Maximum s-t flow value with undirected real capacities (used for flow-polytope membership).
double max_flow_value(const Graph& g, std::span<const double> capacities);

struct EdgeRemovalResult {
    Point indicator;
    double value = 0.0;
    bool approximate = false;
    std::uint64_t combinations = 0;  // subsets examined by the exact search
};

/// Maximizes sum of weights over removable edge sets C with |C| <= K and G[E \ C] connected.
/// Exact enumeration when at most `exact_limit` subsets exist, greedy otherwise (flagged).
EdgeRemovalResult edge_removal_argmax(const Graph& g, std::span<const double> weights, std::size_t K,
                                      std::uint64_t exact_limit = 1'000'000);

struct GnpOptions {
    std::size_t n = 50;
    double p = 0.1;
    std::size_t source = 0;
    std::size_t sink = 1;
    bool require_connected = false;  // whole graph, not just source-sink
    std::size_t max_attempts = 100;
};

/// Erdos-Renyi G(n, p) via geometric skipping, with costs and capacities uniform in [0, 1].
/// Regenerates until the source reaches the sink (and the whole graph is connected if requested).
Graph random_gnp_graph(const GnpOptions& options, std::uint64_t seed);

}  // namespace robustplay
