#include "robustplay/domain.hpp"

#include "robustplay/lp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace robustplay {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_theta(const Domain& d, const Point& theta) {
    if (theta.size() != d.dims()) throw std::invalid_argument("linear_argmax: dimension mismatch");
    if (!theta.is_finite()) throw std::invalid_argument("linear_argmax: non-finite direction");
}

bool better(double candidate, double incumbent, Sense sense) {
    return sense == Sense::maximize ? candidate > incumbent : candidate < incumbent;
}

std::size_t best_index(const std::vector<double>& values, Sense sense) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (better(values[i], values[best], sense)) best = i;
    return best;
}

std::vector<Point> split_parts(const Domain& d, const Point& z) {
    const auto sizes = d.block_sizes();
    return split(z, sizes);
}

// All compositions of `total` into `parts` nonnegative integers, lexicographic.
void compositions(std::size_t total, std::size_t parts, std::size_t limit,
                  const std::function<void(const std::vector<std::size_t>&)>& visit) {
    std::vector<std::size_t> c(parts, 0);
    std::size_t count = 0;
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
        if (i + 1 == parts) {
            c[i] = left;
            if (++count > limit) throw std::length_error("grid too large");
            visit(c);
            return;
        }
        for (std::size_t k = 0; k <= left; ++k) {
            c[i] = k;
            rec(i + 1, left - k);
        }
    };
    if (parts == 0) return;
    rec(0, total);
}

std::vector<Point> cartesian(const std::vector<std::vector<Point>>& factors, std::size_t limit) {
    std::vector<Point> out{Point()};
    for (const auto& f : factors) {
        if (out.size() * f.size() > limit) throw std::length_error("grid too large");
        std::vector<Point> next;
        next.reserve(out.size() * f.size());
        for (const auto& prefix : out)
            for (const auto& p : f) {
                std::vector<double> v(prefix.begin(), prefix.end());
                v.insert(v.end(), p.begin(), p.end());
                next.emplace_back(std::move(v));
            }
        out = std::move(next);
    }
    return out;
}

std::size_t path_edge_bound(const Graph& g) { return std::min(g.num_edges(), g.num_nodes() - 1); }

}  // namespace

// ---------------------------------------------------------------------------
// construction

Domain Domain::simplex(std::size_t n) {
    if (n == 0) throw std::invalid_argument("simplex: n must be positive");
    return Domain(Simplex{n}, n);
}

Domain Domain::box(Point lo, Point hi) {
    require_same_dim(lo, hi, "box");
    if (lo.empty()) throw std::invalid_argument("box: empty");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(lo[i] <= hi[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i]))
            throw std::invalid_argument("box: need finite lo <= hi");
    const auto n = lo.size();
    return Domain(Box{std::move(lo), std::move(hi)}, n);
}

Domain Domain::l2ball(Point center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("l2ball: radius must be positive");
    if (center.empty() || !center.is_finite()) throw std::invalid_argument("l2ball: bad center");
    const auto n = center.size();
    return Domain(L2Ball{std::move(center), radius}, n);
}

Domain Domain::budget(std::size_t n, double K) {
    if (n == 0) throw std::invalid_argument("budget: n must be positive");
    if (!(K > 0.0) || !std::isfinite(K)) throw std::invalid_argument("budget: K must be positive");
    return Domain(Budget{n, K}, n);
}

Domain Domain::vertex_hull(std::vector<Point> vertices) {
    if (vertices.empty()) throw std::invalid_argument("vertex_hull: no vertices");
    for (const auto& v : vertices) {
        require_same_dim(v, vertices.front(), "vertex_hull");
        if (!v.is_finite()) throw std::invalid_argument("vertex_hull: non-finite vertex");
    }
    const auto n = vertices.front().size();
    return Domain(VertexHull{std::move(vertices)}, n);
}

Domain Domain::flow_polytope(std::shared_ptr<const Graph> graph) {
    if (!graph) throw std::invalid_argument("flow_polytope: null graph");
    if (!connects(*graph, graph->source(), graph->sink())) throw std::invalid_argument("infeasible demand");
    const auto m = graph->num_edges();
    return Domain(FlowPolytope{std::move(graph)}, m);
}

Domain Domain::occupancy_polytope(std::shared_ptr<const Mdp> mdp) {
    if (!mdp) throw std::invalid_argument("occupancy_polytope: null mdp");
    const auto d = mdp->pairs();
    return Domain(OccupancyPolytope{std::move(mdp)}, d);
}

Domain Domain::edge_removal(std::shared_ptr<const Graph> graph, std::size_t K) {
    if (!graph) throw std::invalid_argument("edge_removal: null graph");
    if (!is_connected(*graph)) throw std::invalid_argument("edge_removal: graph already disconnected");
    const auto m = graph->num_edges();
    return Domain(EdgeRemoval{std::move(graph), K}, m);
}

Domain Domain::product(std::vector<Domain> parts) {
    if (parts.empty()) throw std::invalid_argument("product: no factors");
    std::size_t d = 0;
    for (const auto& p : parts) d += p.dims();
    return Domain(Product{std::make_shared<const std::vector<Domain>>(std::move(parts))}, d);
}

std::vector<std::size_t> Domain::block_sizes() const {
    if (!is<Product>()) return {dims_};
    std::vector<std::size_t> out;
    for (const auto& p : *as<Product>().parts) out.push_back(p.dims());
    return out;
}

std::string Domain::describe() const {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const Simplex& s) { os << "simplex(" << s.n << ")"; },
                   [&](const Box& b) { os << "box(" << b.lo << ", " << b.hi << ")"; },
                   [&](const L2Ball& b) { os << "l2ball(" << b.center << ", " << format_real(b.radius) << ")"; },
                   [&](const Budget& b) { os << "budget(" << b.n << ", K=" << format_real(b.K) << ")"; },
                   [&](const VertexHull& h) { os << "vertex_hull(" << h.vertices.size() << " vertices)"; },
                   [&](const FlowPolytope& f) {
                       os << "flow_polytope(n=" << f.graph->num_nodes() << ", m=" << f.graph->num_edges() << ")";
                   },
                   [&](const OccupancyPolytope& o) {
                       os << "occupancy_polytope(S=" << o.mdp->states() << ", A=" << o.mdp->actions() << ")";
                   },
                   [&](const EdgeRemoval& e) {
                       os << "edge_removal(m=" << e.graph->num_edges() << ", K=" << e.K << ")";
                   },
                   [&](const Product& p) {
                       os << "product(";
                       for (std::size_t i = 0; i < p.parts->size(); ++i) os << (i ? ", " : "") << (*p.parts)[i].describe();
                       os << ")";
                   },
               },
               kind_);
    return os.str();
}

// ---------------------------------------------------------------------------
// linear oracle

Point linear_argmax(const Domain& domain, const Point& theta, Sense sense) {
    check_theta(domain, theta);
    const bool maxi = sense == Sense::maximize;
    return std::visit(
        overloaded{
            [&](const Domain::Simplex& s) {
                return unit_vector(s.n, best_index(theta.coords(), sense));
            },
            [&](const Domain::Box& b) {
                Point z(b.lo.size());
                for (std::size_t i = 0; i < z.size(); ++i) {
                    const bool take_hi = maxi ? theta[i] > 0.0 : theta[i] < 0.0;
                    z[i] = take_hi ? b.hi[i] : b.lo[i];
                }
                return z;
            },
            [&](const Domain::L2Ball& b) {
                const double nrm = norm2(theta);
                if (nrm == 0.0) return b.center;
                Point z = b.center;
                const double scale = (maxi ? b.radius : -b.radius) / nrm;
                for (std::size_t i = 0; i < z.size(); ++i) z[i] += scale * theta[i];
                return z;
            },
            [&](const Domain::Budget& b) {
                const auto i = best_index(theta.coords(), sense);
                Point z(b.n);
                if (maxi ? theta[i] > 0.0 : theta[i] < 0.0) z[i] = b.K;
                return z;
            },
            [&](const Domain::VertexHull& h) {
                std::vector<double> values;
                values.reserve(h.vertices.size());
                for (const auto& v : h.vertices) values.push_back(dot(theta, v));
                return h.vertices[best_index(values, sense)];
            },
            [&](const Domain::FlowPolytope& f) {
                // Membership is z in [0,1]^E carrying a unit flow, so negative-cost edges are
                // switched on outright and the path is priced on the clamped costs.
                Point costs = maxi ? -theta : theta;
                std::vector<char> negative(costs.size(), 0);
                for (std::size_t e = 0; e < costs.size(); ++e)
                    if (costs[e] < 0.0) negative[e] = 1, costs[e] = 0.0;
                Point z = mincost_flow(*f.graph, costs.view()).indicator;
                for (std::size_t e = 0; e < z.size(); ++e)
                    if (negative[e]) z[e] = 1.0;
                return z;
            },
            [&](const Domain::OccupancyPolytope& o) {
                return mdp_occupancy(*o.mdp, maxi ? theta : -theta);
            },
            [&](const Domain::EdgeRemoval& e) {
                Point w(theta.size());
                for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::max(0.0, maxi ? theta[i] : -theta[i]);
                return edge_removal_argmax(*e.graph, w.view(), e.K).indicator;
            },
            [&](const Domain::Product& p) {
                auto thetas = split_parts(domain, theta);
                std::vector<Point> blocks;
                for (std::size_t i = 0; i < thetas.size(); ++i)
                    blocks.push_back(linear_argmax((*p.parts)[i], thetas[i], sense));
                return concat(blocks);
            },
        },
        domain.kind());
}

// ---------------------------------------------------------------------------
// projection

Point project_scaled_simplex(const Point& z, double radius) {
    // Sort-based threshold (Held, Wolfe, Crowder).
    std::vector<double> u(z.begin(), z.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0;
    double tau = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        cumulative += u[k];
        const double t = (cumulative - radius) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) tau = t;
    }
    Point out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::max(0.0, z[i] - tau);
    return out;
}

bool has_projection(const Domain& domain) {
    return std::visit(overloaded{
                          [](const Domain::Simplex&) { return true; },
                          [](const Domain::Box&) { return true; },
                          [](const Domain::L2Ball&) { return true; },
                          [](const Domain::Budget&) { return true; },
                          [](const Domain::Product& p) {
                              return std::all_of(p.parts->begin(), p.parts->end(), has_projection);
                          },
                          [](const auto&) { return false; },
                      },
                      domain.kind());
}

Point project(const Domain& domain, const Point& z) {
    if (z.size() != domain.dims()) throw std::invalid_argument("project: dimension mismatch");
    if (!z.is_finite()) throw std::invalid_argument("project: non-finite point");
    return std::visit(
        overloaded{
            [&](const Domain::Simplex&) { return project_scaled_simplex(z, 1.0); },
            [&](const Domain::Box& b) {
                Point out(z.size());
                for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::clamp(z[i], b.lo[i], b.hi[i]);
                return out;
            },
            [&](const Domain::L2Ball& b) {
                Point diff = z - b.center;
                const double nrm = norm2(diff);
                if (nrm <= b.radius) return z;
                diff *= b.radius / nrm;
                return b.center + diff;
            },
            [&](const Domain::Budget& b) {
                Point out(z.size());
                double total = 0.0;
                for (std::size_t i = 0; i < z.size(); ++i) total += out[i] = std::max(0.0, z[i]);
                if (total <= b.K) return out;
                return project_scaled_simplex(z, b.K);
            },
            [&](const Domain::Product& p) {
                auto parts = split_parts(domain, z);
                std::vector<Point> blocks;
                for (std::size_t i = 0; i < parts.size(); ++i) blocks.push_back(project((*p.parts)[i], parts[i]));
                return concat(blocks);
            },
            [&](const auto&) -> Point { throw std::invalid_argument("no projection"); },
        },
        domain.kind());
}

// ---------------------------------------------------------------------------
// membership

bool contains(const Domain& domain, const Point& z, double tol) {
    if (z.size() != domain.dims() || !z.is_finite()) return false;
    return std::visit(
        overloaded{
            [&](const Domain::Simplex&) {
                double total = 0.0;
                for (double v : z) {
                    if (v < -tol) return false;
                    total += v;
                }
                return std::abs(total - 1.0) <= tol;
            },
            [&](const Domain::Box& b) {
                for (std::size_t i = 0; i < z.size(); ++i)
                    if (z[i] < b.lo[i] - tol || z[i] > b.hi[i] + tol) return false;
                return true;
            },
            [&](const Domain::L2Ball& b) { return distance2(z, b.center) <= b.radius + tol; },
            [&](const Domain::Budget& b) {
                double total = 0.0;
                for (double v : z) {
                    if (v < -tol) return false;
                    total += v;
                }
                return total <= b.K + tol;
            },
            [&](const Domain::VertexHull& h) {
                // min sum(s+ + s-) s.t. V^T w + s+ - s- = z, sum w = 1, all >= 0
                const std::size_t k = h.vertices.size();
                const std::size_t d = z.size();
                std::vector<std::vector<double>> A(d + 1, std::vector<double>(k + 2 * d, 0.0));
                std::vector<double> b(d + 1, 0.0);
                std::vector<double> c(k + 2 * d, 0.0);
                for (std::size_t i = 0; i < d; ++i) {
                    for (std::size_t j = 0; j < k; ++j) A[i][j] = h.vertices[j][i];
                    A[i][k + i] = 1.0;
                    A[i][k + d + i] = -1.0;
                    b[i] = z[i];
                    c[k + i] = c[k + d + i] = 1.0;
                }
                for (std::size_t j = 0; j < k; ++j) A[d][j] = 1.0;
                b[d] = 1.0;
                const auto res = solve_standard_lp(A, b, c);
                return res.status == LpResult::Status::optimal && res.value <= tol;
            },
            [&](const Domain::FlowPolytope& f) {
                for (double v : z)
                    if (v < -tol || v > 1.0 + tol) return false;
                return max_flow_value(*f.graph, z.view()) >= 1.0 - tol;
            },
            [&](const Domain::OccupancyPolytope& o) {
                for (double v : z)
                    if (v < -tol) return false;
                return occupancy_residual(*o.mdp, z) <= tol;
            },
            [&](const Domain::EdgeRemoval& e) {
                std::vector<char> removed(z.size(), 0);
                std::size_t count = 0;
                for (std::size_t i = 0; i < z.size(); ++i) {
                    if (std::abs(z[i]) <= tol) continue;
                    if (std::abs(z[i] - 1.0) > tol) return false;
                    removed[i] = 1;
                    ++count;
                }
                return count <= e.K && is_connected(*e.graph, removed);
            },
            [&](const Domain::Product& p) {
                auto parts = split_parts(domain, z);
                for (std::size_t i = 0; i < parts.size(); ++i)
                    if (!contains((*p.parts)[i], parts[i], tol)) return false;
                return true;
            },
        },
        domain.kind());
}

bool is_convex(const Domain& domain) {
    if (domain.is<Domain::EdgeRemoval>()) return false;
    if (domain.is<Domain::Product>()) {
        const auto& parts = *domain.as<Domain::Product>().parts;
        return std::all_of(parts.begin(), parts.end(), is_convex);
    }
    return true;
}

// ---------------------------------------------------------------------------
// geometry bounds

double l2_diameter(const Domain& domain) {
    return std::visit(
        overloaded{
            [](const Domain::Simplex& s) { return s.n > 1 ? std::sqrt(2.0) : 0.0; },
            [](const Domain::Box& b) { return norm2(b.hi - b.lo); },
            [](const Domain::L2Ball& b) { return 2.0 * b.radius; },
            [](const Domain::Budget& b) { return b.n > 1 ? std::sqrt(2.0) * b.K : b.K; },
            [](const Domain::VertexHull& h) {
                double d = 0.0;
                for (std::size_t i = 0; i < h.vertices.size(); ++i)
                    for (std::size_t j = i + 1; j < h.vertices.size(); ++j)
                        d = std::max(d, distance2(h.vertices[i], h.vertices[j]));
                return d;
            },
            [](const Domain::FlowPolytope& f) {
                return std::sqrt(2.0 * static_cast<double>(path_edge_bound(*f.graph)));
            },
            [](const Domain::OccupancyPolytope& o) { return std::sqrt(2.0) / (1.0 - o.mdp->gamma()); },
            [](const Domain::EdgeRemoval& e) {
                return std::sqrt(2.0 * static_cast<double>(std::min(e.K, e.graph->num_edges())));
            },
            [](const Domain::Product& p) {
                double s = 0.0;
                for (const auto& d : *p.parts) s += std::pow(l2_diameter(d), 2);
                return std::sqrt(s);
            },
        },
        domain.kind());
}

double l1_diameter(const Domain& domain) {
    return std::visit(
        overloaded{
            [](const Domain::Simplex& s) { return s.n > 1 ? 2.0 : 0.0; },
            [](const Domain::Box& b) { return norm1(b.hi - b.lo); },
            [&](const Domain::L2Ball& b) { return 2.0 * b.radius * std::sqrt(static_cast<double>(domain.dims())); },
            [](const Domain::Budget& b) { return 2.0 * b.K; },
            [](const Domain::VertexHull& h) {
                double d = 0.0;
                for (std::size_t i = 0; i < h.vertices.size(); ++i)
                    for (std::size_t j = i + 1; j < h.vertices.size(); ++j)
                        d = std::max(d, norm1(h.vertices[i] - h.vertices[j]));
                return d;
            },
            [](const Domain::FlowPolytope& f) { return 2.0 * static_cast<double>(path_edge_bound(*f.graph)); },
            [](const Domain::OccupancyPolytope& o) { return 2.0 / (1.0 - o.mdp->gamma()); },
            [](const Domain::EdgeRemoval& e) {
                return 2.0 * static_cast<double>(std::min(e.K, e.graph->num_edges()));
            },
            [](const Domain::Product& p) {
                double s = 0.0;
                for (const auto& d : *p.parts) s += l1_diameter(d);
                return s;
            },
        },
        domain.kind());
}

double max_l1_norm(const Domain& domain) {
    return std::visit(
        overloaded{
            [](const Domain::Simplex&) { return 1.0; },
            [](const Domain::Box& b) {
                double s = 0.0;
                for (std::size_t i = 0; i < b.lo.size(); ++i) s += std::max(std::abs(b.lo[i]), std::abs(b.hi[i]));
                return s;
            },
            [&](const Domain::L2Ball& b) {
                return norm1(b.center) + b.radius * std::sqrt(static_cast<double>(domain.dims()));
            },
            [](const Domain::Budget& b) { return b.K; },
            [](const Domain::VertexHull& h) {
                double m = 0.0;
                for (const auto& v : h.vertices) m = std::max(m, norm1(v));
                return m;
            },
            [](const Domain::FlowPolytope& f) { return static_cast<double>(path_edge_bound(*f.graph)); },
            [](const Domain::OccupancyPolytope& o) { return 1.0 / (1.0 - o.mdp->gamma()); },
            [](const Domain::EdgeRemoval& e) { return static_cast<double>(std::min(e.K, e.graph->num_edges())); },
            [](const Domain::Product& p) {
                double s = 0.0;
                for (const auto& d : *p.parts) s += max_l1_norm(d);
                return s;
            },
        },
        domain.kind());
}

double max_l2_norm(const Domain& domain) {
    return std::visit(
        overloaded{
            [](const Domain::Simplex&) { return 1.0; },
            [](const Domain::Box& b) {
                double s = 0.0;
                for (std::size_t i = 0; i < b.lo.size(); ++i) s += std::pow(std::max(std::abs(b.lo[i]), std::abs(b.hi[i])), 2);
                return std::sqrt(s);
            },
            [](const Domain::L2Ball& b) { return norm2(b.center) + b.radius; },
            [](const Domain::Budget& b) { return b.K; },
            [](const Domain::VertexHull& h) {
                double m = 0.0;
                for (const auto& v : h.vertices) m = std::max(m, norm2(v));
                return m;
            },
            [](const Domain::FlowPolytope& f) { return std::sqrt(static_cast<double>(path_edge_bound(*f.graph))); },
            [](const Domain::OccupancyPolytope& o) { return 1.0 / (1.0 - o.mdp->gamma()); },
            [](const Domain::EdgeRemoval& e) {
                return std::sqrt(static_cast<double>(std::min(e.K, e.graph->num_edges())));
            },
            [](const Domain::Product& p) {
                double s = 0.0;
                for (const auto& d : *p.parts) s += std::pow(max_l2_norm(d), 2);
                return std::sqrt(s);
            },
        },
        domain.kind());
}

Point default_point(const Domain& domain) {
    return std::visit(
        overloaded{
            [](const Domain::Simplex& s) { return Point(s.n, 1.0 / static_cast<double>(s.n)); },
            [](const Domain::Box& b) { return 0.5 * (b.lo + b.hi); },
            [](const Domain::L2Ball& b) { return b.center; },
            [](const Domain::Budget& b) { return Point(b.n); },
            [](const Domain::VertexHull& h) { return average_point(h.vertices); },
            [](const Domain::FlowPolytope& f) { return mincost_flow(*f.graph, f.graph->base_costs().view()).indicator; },
            [](const Domain::OccupancyPolytope& o) { return mdp_occupancy(*o.mdp, o.mdp->nominal_reward()); },
            [&](const Domain::EdgeRemoval&) { return Point(domain.dims()); },
            [](const Domain::Product& p) {
                std::vector<Point> blocks;
                for (const auto& d : *p.parts) blocks.push_back(default_point(d));
                return concat(blocks);
            },
        },
        domain.kind());
}

std::vector<Point> enumerate_vertices(const Domain& domain, std::size_t limit) {
    return std::visit(
        overloaded{
            [&](const Domain::Simplex& s) {
                if (s.n > limit) throw std::length_error("too many vertices");
                std::vector<Point> out;
                for (std::size_t i = 0; i < s.n; ++i) out.push_back(unit_vector(s.n, i));
                return out;
            },
            [&](const Domain::Box& b) {
                const std::size_t d = b.lo.size();
                if (d >= 63 || (std::size_t{1} << d) > limit) throw std::length_error("too many vertices");
                std::vector<Point> out;
                for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
                    Point z(d);
                    for (std::size_t i = 0; i < d; ++i) z[i] = (mask >> i) & 1 ? b.hi[i] : b.lo[i];
                    out.push_back(std::move(z));
                }
                return out;
            },
            [&](const Domain::Budget& b) {
                if (b.n + 1 > limit) throw std::length_error("too many vertices");
                std::vector<Point> out{Point(b.n)};
                for (std::size_t i = 0; i < b.n; ++i) out.push_back(b.K * unit_vector(b.n, i));
                return out;
            },
            [&](const Domain::VertexHull& h) {
                if (h.vertices.size() > limit) throw std::length_error("too many vertices");
                return h.vertices;
            },
            [&](const Domain::EdgeRemoval& e) {
                const std::size_t m = e.graph->num_edges();
                std::vector<Point> out{Point(m)};
                std::vector<char> removed(m, 0);
                for (std::size_t k = 1; k <= std::min(e.K, m); ++k) {
                    std::vector<std::size_t> idx(k);
                    std::iota(idx.begin(), idx.end(), 0);
                    for (;;) {
                        std::fill(removed.begin(), removed.end(), 0);
                        for (auto i : idx) removed[i] = 1;
                        if (is_connected(*e.graph, removed)) {
                            if (out.size() >= limit) throw std::length_error("too many vertices");
                            Point z(m);
                            for (auto i : idx) z[i] = 1.0;
                            out.push_back(std::move(z));
                        }
                        std::size_t i = k;
                        while (i > 0 && idx[i - 1] == m - k + (i - 1)) --i;
                        if (i == 0) break;
                        ++idx[i - 1];
                        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
                    }
                }
                return out;
            },
            [&](const Domain::Product& p) {
                std::vector<std::vector<Point>> factors;
                for (const auto& d : *p.parts) factors.push_back(enumerate_vertices(d, limit));
                return cartesian(factors, limit);
            },
            [&](const auto&) -> std::vector<Point> {
                throw std::invalid_argument("enumerate_vertices: " + domain.describe() + " has no finite vertex list");
            },
        },
        domain.kind());
}

std::vector<Point> grid_points(const Domain& domain, std::size_t steps, std::size_t limit) {
    if (steps == 0) throw std::invalid_argument("grid_points: steps must be positive");
    const double h = 1.0 / static_cast<double>(steps);
    auto cube = [&](const Point& lo, const Point& hi) {
        const std::size_t d = lo.size();
        std::vector<std::vector<Point>> axes(d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t k = 0; k <= steps; ++k)
                axes[i].push_back(Point{lo[i] + (hi[i] - lo[i]) * static_cast<double>(k) * h});
        return cartesian(axes, limit);
    };
    return std::visit(
        overloaded{
            [&](const Domain::Simplex& s) {
                std::vector<Point> out;
                compositions(steps, s.n, limit, [&](const auto& c) {
                    Point z(s.n);
                    for (std::size_t i = 0; i < s.n; ++i) z[i] = static_cast<double>(c[i]) * h;
                    out.push_back(std::move(z));
                });
                return out;
            },
            [&](const Domain::VertexHull& hull) {
                std::vector<Point> out;
                const std::size_t k = hull.vertices.size();
                compositions(steps, k, limit, [&](const auto& c) {
                    Point w(k);
                    for (std::size_t i = 0; i < k; ++i) w[i] = static_cast<double>(c[i]) * h;
                    out.push_back(hull_point(hull, w));
                });
                return out;
            },
            [&](const Domain::Budget& b) {
                std::vector<Point> out;
                compositions(steps, b.n + 1, limit, [&](const auto& c) {
                    Point z(b.n);
                    for (std::size_t i = 0; i < b.n; ++i) z[i] = b.K * static_cast<double>(c[i]) * h;
                    out.push_back(std::move(z));
                });
                return out;
            },
            [&](const Domain::Box& b) { return cube(b.lo, b.hi); },
            [&](const Domain::L2Ball& b) {
                const Point r(b.center.size(), b.radius);
                std::vector<Point> out;
                for (auto& z : cube(b.center - r, b.center + r)) {
                    Point diff = z - b.center;
                    const double nrm = norm2(diff);
                    if (nrm > b.radius) {
                        diff *= b.radius / nrm;
                        z = b.center + diff;
                    }
                    out.push_back(std::move(z));
                }
                return out;
            },
            [&](const Domain::Product& p) {
                std::vector<std::vector<Point>> factors;
                for (const auto& d : *p.parts) factors.push_back(grid_points(d, steps, limit));
                return cartesian(factors, limit);
            },
            [&](const auto&) -> std::vector<Point> {
                // Finite sets are their own grid.
                return enumerate_vertices(domain, limit);
            },
        },
        domain.kind());
}

Point hull_point(const Domain::VertexHull& hull, const Point& weights) {
    if (weights.size() != hull.vertices.size()) throw std::invalid_argument("hull_point: weight dimension mismatch");
    CompensatedVector acc(hull.vertices.front().size());
    for (std::size_t k = 0; k < weights.size(); ++k)
        if (weights[k] != 0.0) acc.add(hull.vertices[k], weights[k]);
    return acc.value();
}

}  // namespace robustplay
