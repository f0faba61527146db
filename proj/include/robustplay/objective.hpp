#pragma once

#include "robustplay/core.hpp"
#include "robustplay/domain.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace robustplay {

/// Matrix A with rows indexed by u and columns by x; dense or diagonal.
class LinearMap {
public:
    static LinearMap dense(std::vector<std::vector<double>> rows);
    static LinearMap diagonal(Point diag);
    static LinearMap scaled_identity(std::size_t n, double scale);
    static LinearMap zero(std::size_t rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_diagonal() const { return diagonal_; }

    double entry(std::size_t i, std::size_t j) const;

    Point apply(const Point& x) const;            // A x
    Point apply_transpose(const Point& u) const;  // A^T u

    /// Operator-norm style bounds: ||A^T u||_p <= factor * ||u||_q for the pairs used by the learners.
    double frobenius() const;
    double max_abs_entry() const;
    double max_row_l1() const;  // max_i sum_j |A_ij|

    LinearMap scaled(double s) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    bool diagonal_ = false;
    std::vector<double> data_;  // row-major, or the diagonal
};

/// f(x, u). Bilinear objectives are affine in each argument:
///   f = u^T A x + c.x + d.u + k.
class Objective {
public:
    using ValueFn = std::function<double(const Point& x, const Point& u)>;
    using GradFn = std::function<Point(const Point& x, const Point& u)>;

    static Objective bilinear(LinearMap A, std::optional<Point> x_cost = std::nullopt,
                              std::optional<Point> u_cost = std::nullopt, double offset = 0.0);
    /// `convex_in_x` is asserted by the caller; drivers that need convexity check it.
    static Objective blackbox(std::size_t x_dim, std::size_t u_dim, ValueFn value, GradFn grad_x, GradFn grad_u,
                              bool convex_in_x, std::string label = "blackbox");
    static Objective constant(std::size_t x_dim, std::size_t u_dim, double value);

    std::size_t x_dim() const { return x_dim_; }
    std::size_t u_dim() const { return u_dim_; }
    bool is_bilinear() const { return bilinear_.has_value(); }
    bool convex_in_x() const { return convex_; }
    const std::string& label() const { return label_; }

    double value(const Point& x, const Point& u) const;
    Point grad_x(const Point& x, const Point& u) const;
    Point grad_u(const Point& x, const Point& u) const;

    /// For bilinear objectives: f(., u) = x_coefficients(u).x + x_constant(u).
    Point x_coefficients(const Point& u) const;
    double x_constant(const Point& u) const;
    /// For bilinear objectives: f(x, .) = u_coefficients(x).u + u_constant(x).
    Point u_coefficients(const Point& x) const;
    double u_constant(const Point& x) const;

    const LinearMap& matrix() const;
    const Point& x_cost() const;
    const Point& u_cost() const;
    double offset() const;

    Objective negated() const;
    /// s * f
    Objective scaled(double s) const;

private:
    struct Affine {
        LinearMap A;
        Point c;
        Point d;
        double k;
    };

    std::size_t x_dim_ = 0;
    std::size_t u_dim_ = 0;
    bool convex_ = true;
    std::string label_;
    std::optional<Affine> bilinear_;
    ValueFn value_;
    GradFn grad_x_;
    GradFn grad_u_;
};

/// Bounds on the per-round linear loss a learner sees (gradient of its own loss).
struct LossBounds {
    double grad_l2 = 1.0;   // ||g||_2
    double grad_l1 = 1.0;   // ||g||_1
    double value_abs = 1.0; // |g.z| over the learner's domain
};

enum class Player { x, u, lambda };

const char* to_string(Player p);

/// Loss bounds for one side of f over the two domains (bilinear objectives only).
/// The u-player's loss is -f.
LossBounds loss_bounds(const Objective& f, const Domain& x_domain, const Domain& u_domain, Player side);

/// Bundle f^1..f^n sharing x, with weights lambda in Lambda (a subset of the simplex).
class MultiObjective {
public:
    MultiObjective(std::vector<Objective> objectives, Domain lambda_domain, std::vector<Domain> u_domains);

    std::size_t size() const { return objectives_.size(); }
    std::size_t x_dim() const { return objectives_.front().x_dim(); }
    std::size_t u_dim_total() const;
    const std::vector<Objective>& objectives() const { return objectives_; }
    const Domain& lambda_domain() const { return lambda_domain_; }
    const std::vector<Domain>& u_domains() const { return u_domains_; }
    std::vector<std::size_t> u_block_sizes() const;

    Point values(const Point& x, const std::vector<Point>& us) const;
    /// F(x, u) = max over Lambda of <lambda, f>; `lambda_star` receives the maximizer.
    double explicit_max(const Point& x, const std::vector<Point>& us, Point* lambda_star = nullptr) const;
    /// g(x, u, lambda) = <lambda, f>
    double weighted(const Point& x, const std::vector<Point>& us, const Point& lambda) const;

    /// Subgradient of F in x: sum_i lambda*_i grad_x f^i.
    Point explicit_subgradient(const Point& x, const std::vector<Point>& us) const;

    /// Single objective sum_i lambda_i f^i over the concatenated u (bilinear pieces only).
    Objective weighted_sum(const Point& lambda) const;

private:
    std::vector<Objective> objectives_;
    Domain lambda_domain_;
    std::vector<Domain> u_domains_;
};

/// Whether Lambda lies inside the probability simplex (nonnegative, sums to at most 1).
bool lambda_in_simplex(const Domain& lambda_domain, std::size_t n, double tol = 1e-9);

}  // namespace robustplay
