#pragma once

#include "robustplay/core.hpp"
#include "robustplay/graph.hpp"
#include "robustplay/mdp.hpp"

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace robustplay {

enum class Sense { minimize, maximize };

/// Feasible set of one player. Immutable after construction; cheap to copy.
class Domain {
public:
    struct Simplex {
        std::size_t n;
    };
    struct Box {
        Point lo, hi;
    };
    struct L2Ball {
        Point center;
        double radius;
    };
    /// {z >= 0 : sum z <= K}
    struct Budget {
        std::size_t n;
        double K;
    };
    struct VertexHull {
        std::vector<Point> vertices;
    };
    /// Convex hull of unit s-t path indicators (one coordinate per edge).
    struct FlowPolytope {
        std::shared_ptr<const Graph> graph;
    };
    /// Occupancy measures x(s,a) of the MDP.
    struct OccupancyPolytope {
        std::shared_ptr<const Mdp> mdp;
    };
    /// Indicators of edge sets C with |C| <= K whose removal keeps the graph connected.
    struct EdgeRemoval {
        std::shared_ptr<const Graph> graph;
        std::size_t K;
    };
    struct Product {
        std::shared_ptr<const std::vector<Domain>> parts;
    };

    using Kind = std::variant<Simplex, Box, L2Ball, Budget, VertexHull, FlowPolytope, OccupancyPolytope, EdgeRemoval,
                              Product>;

    static Domain simplex(std::size_t n);
    static Domain box(Point lo, Point hi);
    static Domain l2ball(Point center, double radius);
    static Domain budget(std::size_t n, double K);
    static Domain vertex_hull(std::vector<Point> vertices);
    static Domain flow_polytope(std::shared_ptr<const Graph> graph);
    static Domain occupancy_polytope(std::shared_ptr<const Mdp> mdp);
    static Domain edge_removal(std::shared_ptr<const Graph> graph, std::size_t K);
    static Domain product(std::vector<Domain> parts);

    std::size_t dims() const { return dims_; }
    const Kind& kind() const { return kind_; }

    template <class T>
    bool is() const {
        return std::holds_alternative<T>(kind_);
    }
    template <class T>
    const T& as() const {
        return std::get<T>(kind_);
    }

    /// Block sizes of a product, or {dims} for a plain domain.
    std::vector<std::size_t> block_sizes() const;

    std::string describe() const;

private:
    Domain(Kind kind, std::size_t dims) : kind_(std::move(kind)), dims_(dims) {}

    Kind kind_;
    std::size_t dims_;
};

/// Exact optimizer of theta.z over the domain; ties go to the lowest index.
/// theta = 0 on an l2 ball returns the center.
Point linear_argmax(const Domain& domain, const Point& theta, Sense sense);

/// Whether project() is available (simplex, box, l2 ball, budget and products of these).
bool has_projection(const Domain& domain);

/// Euclidean projection. Throws std::invalid_argument("no projection") for other kinds.
Point project(const Domain& domain, const Point& z);

/// Euclidean projection onto {z >= 0 : sum z = radius}.
Point project_scaled_simplex(const Point& z, double radius);

/// Membership up to an absolute tolerance per constraint. Flow polytope points are
/// checked as edge loads that support a unit s-t flow.
bool contains(const Domain& domain, const Point& z, double tol = 1e-9);

/// Whether the domain is a convex set (edge-removal sets are finite, not convex).
bool is_convex(const Domain& domain);

/// Upper bounds on diameters and norms over the domain.
double l2_diameter(const Domain& domain);
double l1_diameter(const Domain& domain);
double max_l1_norm(const Domain& domain);
double max_l2_norm(const Domain& domain);

/// Deterministic starting point (uniform mixture, center, zero budget, ...).
Point default_point(const Domain& domain);

/// Vertices of a polytope described by finitely many points. Throws std::length_error
/// past `limit` and std::invalid_argument for kinds without a finite description.
std::vector<Point> enumerate_vertices(const Domain& domain, std::size_t limit = 100'000);

/// Regular grid with `steps` subdivisions per direction (barycentric on simplices and hulls;
/// l2 balls get the cube grid clipped to the ball plus the radial images of outside points).
/// Throws std::length_error past `limit` points.
std::vector<Point> grid_points(const Domain& domain, std::size_t steps, std::size_t limit = 2'000'000);

/// Hull point sum_k w_k v_k.
Point hull_point(const Domain::VertexHull& hull, const Point& weights);

}  // namespace robustplay
