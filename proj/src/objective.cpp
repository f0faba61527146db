#include "robustplay/objective.hpp"

#include <algorithm>
#include <cmath>

namespace robustplay {

// ---------------------------------------------------------------------------
// LinearMap

LinearMap LinearMap::dense(std::vector<std::vector<double>> rows) {
    if (rows.empty() || rows.front().empty()) throw std::invalid_argument("LinearMap: empty matrix");
    LinearMap m;
    m.rows_ = rows.size();
    m.cols_ = rows.front().size();
    m.data_.reserve(m.rows_ * m.cols_);
    for (const auto& r : rows) {
        if (r.size() != m.cols_) throw std::invalid_argument("LinearMap: ragged matrix");
        for (double v : r) {
            if (!std::isfinite(v)) throw std::invalid_argument("LinearMap: non-finite entry");
            m.data_.push_back(v);
        }
    }
    return m;
}

LinearMap LinearMap::diagonal(Point diag) {
    if (diag.empty() || !diag.is_finite()) throw std::invalid_argument("LinearMap: bad diagonal");
    LinearMap m;
    m.rows_ = m.cols_ = diag.size();
    m.diagonal_ = true;
    m.data_ = diag.coords();
    return m;
}

LinearMap LinearMap::scaled_identity(std::size_t n, double scale) { return diagonal(Point(n, scale)); }

LinearMap LinearMap::zero(std::size_t rows, std::size_t cols) {
    LinearMap m;
    m.rows_ = rows;
    m.cols_ = cols;
    if (rows == cols) {
        m.diagonal_ = true;
        m.data_.assign(rows, 0.0);
    } else {
        m.data_.assign(rows * cols, 0.0);
    }
    return m;
}

double LinearMap::entry(std::size_t i, std::size_t j) const {
    if (diagonal_) return i == j ? data_[i] : 0.0;
    return data_[i * cols_ + j];
}

Point LinearMap::apply(const Point& x) const {
    if (x.size() != cols_) throw std::invalid_argument("LinearMap::apply: dimension mismatch");
    Point out(rows_);
    if (diagonal_) {
        for (std::size_t i = 0; i < rows_; ++i) out[i] = data_[i] * x[i];
        return out;
    }
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) s += data_[i * cols_ + j] * x[j];
        out[i] = s;
    }
    return out;
}

Point LinearMap::apply_transpose(const Point& u) const {
    if (u.size() != rows_) throw std::invalid_argument("LinearMap::apply_transpose: dimension mismatch");
    Point out(cols_);
    if (diagonal_) {
        for (std::size_t i = 0; i < rows_; ++i) out[i] = data_[i] * u[i];
        return out;
    }
    for (std::size_t j = 0; j < cols_; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) s += data_[i * cols_ + j] * u[i];
        out[j] = s;
    }
    return out;
}

double LinearMap::frobenius() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double LinearMap::max_abs_entry() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

double LinearMap::max_row_l1() const {
    if (diagonal_) return max_abs_entry();
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) s += std::abs(data_[i * cols_ + j]);
        m = std::max(m, s);
    }
    return m;
}

LinearMap LinearMap::scaled(double s) const {
    LinearMap m = *this;
    for (auto& v : m.data_) v *= s;
    return m;
}

// ---------------------------------------------------------------------------
// Objective

Objective Objective::bilinear(LinearMap A, std::optional<Point> x_cost, std::optional<Point> u_cost, double offset) {
    Objective f;
    f.x_dim_ = A.cols();
    f.u_dim_ = A.rows();
    f.convex_ = true;
    f.label_ = "bilinear";
    Point c = x_cost.value_or(Point(f.x_dim_));
    Point d = u_cost.value_or(Point(f.u_dim_));
    if (c.size() != f.x_dim_ || d.size() != f.u_dim_) throw std::invalid_argument("bilinear: cost vector dimension");
    if (!c.is_finite() || !d.is_finite() || !std::isfinite(offset))
        throw std::invalid_argument("bilinear: non-finite cost");
    f.bilinear_ = Affine{std::move(A), std::move(c), std::move(d), offset};
    return f;
}

Objective Objective::blackbox(std::size_t x_dim, std::size_t u_dim, ValueFn value, GradFn grad_x, GradFn grad_u,
                              bool convex_in_x, std::string label) {
    if (!value) throw std::invalid_argument("blackbox: value function required");
    Objective f;
    f.x_dim_ = x_dim;
    f.u_dim_ = u_dim;
    f.convex_ = convex_in_x;
    f.label_ = std::move(label);
    f.value_ = std::move(value);
    f.grad_x_ = std::move(grad_x);
    f.grad_u_ = std::move(grad_u);
    return f;
}

Objective Objective::constant(std::size_t x_dim, std::size_t u_dim, double value) {
    auto f = bilinear(LinearMap::zero(u_dim, x_dim), std::nullopt, std::nullopt, value);
    f.label_ = "constant";
    return f;
}

double Objective::value(const Point& x, const Point& u) const {
    if (x.size() != x_dim_ || u.size() != u_dim_) throw std::invalid_argument("objective: dimension mismatch");
    if (!bilinear_) return value_(x, u);
    const auto& b = *bilinear_;
    return dot(u, b.A.apply(x)) + dot(b.c, x) + dot(b.d, u) + b.k;
}

Point Objective::grad_x(const Point& x, const Point& u) const {
    if (bilinear_) return x_coefficients(u);
    if (!grad_x_) throw std::invalid_argument("objective '" + label_ + "' has no x-gradient");
    return grad_x_(x, u);
}

Point Objective::grad_u(const Point& x, const Point& u) const {
    if (bilinear_) return u_coefficients(x);
    if (!grad_u_) throw std::invalid_argument("objective '" + label_ + "' has no u-gradient");
    return grad_u_(x, u);
}

Point Objective::x_coefficients(const Point& u) const {
    if (!bilinear_) throw std::invalid_argument("x_coefficients: objective is not bilinear");
    return bilinear_->A.apply_transpose(u) + bilinear_->c;
}

double Objective::x_constant(const Point& u) const {
    if (!bilinear_) throw std::invalid_argument("x_constant: objective is not bilinear");
    return dot(bilinear_->d, u) + bilinear_->k;
}

Point Objective::u_coefficients(const Point& x) const {
    if (!bilinear_) throw std::invalid_argument("u_coefficients: objective is not bilinear");
    return bilinear_->A.apply(x) + bilinear_->d;
}

double Objective::u_constant(const Point& x) const {
    if (!bilinear_) throw std::invalid_argument("u_constant: objective is not bilinear");
    return dot(bilinear_->c, x) + bilinear_->k;
}

const LinearMap& Objective::matrix() const {
    if (!bilinear_) throw std::invalid_argument("matrix: objective is not bilinear");
    return bilinear_->A;
}
const Point& Objective::x_cost() const {
    if (!bilinear_) throw std::invalid_argument("x_cost: objective is not bilinear");
    return bilinear_->c;
}
const Point& Objective::u_cost() const {
    if (!bilinear_) throw std::invalid_argument("u_cost: objective is not bilinear");
    return bilinear_->d;
}
double Objective::offset() const {
    if (!bilinear_) throw std::invalid_argument("offset: objective is not bilinear");
    return bilinear_->k;
}

Objective Objective::scaled(double s) const {
    Objective f = *this;
    if (bilinear_) {
        f.bilinear_->A = bilinear_->A.scaled(s);
        f.bilinear_->c *= s;
        f.bilinear_->d *= s;
        f.bilinear_->k *= s;
        return f;
    }
    auto v = value_;
    f.value_ = [v, s](const Point& x, const Point& u) { return s * v(x, u); };
    if (grad_x_) {
        auto g = grad_x_;
        f.grad_x_ = [g, s](const Point& x, const Point& u) { return s * g(x, u); };
    }
    if (grad_u_) {
        auto g = grad_u_;
        f.grad_u_ = [g, s](const Point& x, const Point& u) { return s * g(x, u); };
    }
    // convexity flips with the sign; keep the flag honest
    if (s < 0) f.convex_ = false;
    return f;
}

Objective Objective::negated() const { return scaled(-1.0); }

const char* to_string(Player p) {
    switch (p) {
    case Player::x: return "x";
    case Player::u: return "u";
    case Player::lambda: return "lambda";
    }
    return "?";
}

LossBounds loss_bounds(const Objective& f, const Domain& x_domain, const Domain& u_domain, Player side) {
    if (!f.is_bilinear()) throw std::invalid_argument("loss_bounds: needs a bilinear objective");
    const auto& A = f.matrix();
    LossBounds b;
    if (side == Player::x) {
        // g = A^T u + c
        const double u1 = max_l1_norm(u_domain);
        const double u2 = max_l2_norm(u_domain);
        const double a2 = A.is_diagonal() ? A.max_abs_entry() * u2 : A.frobenius() * u2;
        // ||A^T u||_1 <= sum_i |u_i| * ||row_i||_1
        const double a1 = A.max_row_l1() * u1;
        b.grad_l2 = a2 + norm2(f.x_cost());
        b.grad_l1 = a1 + norm1(f.x_cost());
        b.value_abs = std::min(b.grad_l2 * max_l2_norm(x_domain), b.grad_l1 * max_l1_norm(x_domain));
        if (x_domain.is<Domain::Simplex>()) b.value_abs = std::min(b.value_abs, b.grad_l1);
    } else {
        // g = -(A x + d)
        const double x1 = max_l1_norm(x_domain);
        const double x2 = max_l2_norm(x_domain);
        double col_l1 = 0.0;  // max_j sum_i |A_ij|
        if (A.is_diagonal()) {
            col_l1 = A.max_abs_entry();
        } else {
            for (std::size_t j = 0; j < A.cols(); ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < A.rows(); ++i) s += std::abs(A.entry(i, j));
                col_l1 = std::max(col_l1, s);
            }
        }
        const double a2 = A.is_diagonal() ? A.max_abs_entry() * x2 : A.frobenius() * x2;
        b.grad_l2 = a2 + norm2(f.u_cost());
        b.grad_l1 = col_l1 * x1 + norm1(f.u_cost());
        b.value_abs = std::min(b.grad_l2 * max_l2_norm(u_domain), b.grad_l1 * max_l1_norm(u_domain));
        if (u_domain.is<Domain::Simplex>()) b.value_abs = std::min(b.value_abs, b.grad_l1);
    }
    // Zero bounds would make step sizes infinite; a constant game needs no learning.
    const double floor = 1e-12;
    b.grad_l2 = std::max(b.grad_l2, floor);
    b.grad_l1 = std::max(b.grad_l1, floor);
    b.value_abs = std::max(b.value_abs, floor);
    return b;
}

// ---------------------------------------------------------------------------
// MultiObjective

bool lambda_in_simplex(const Domain& lambda_domain, std::size_t n, double tol) {
    if (lambda_domain.dims() != n) return false;
    const Point ones(n, 1.0);
    if (dot(ones, linear_argmax(lambda_domain, ones, Sense::maximize)) > 1.0 + tol) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Point e = unit_vector(n, i);
        if (dot(e, linear_argmax(lambda_domain, e, Sense::minimize)) < -tol) return false;
    }
    return true;
}

MultiObjective::MultiObjective(std::vector<Objective> objectives, Domain lambda_domain, std::vector<Domain> u_domains)
    : objectives_(std::move(objectives)), lambda_domain_(std::move(lambda_domain)), u_domains_(std::move(u_domains)) {
    if (objectives_.empty()) throw ConfigurationError("multi-objective: no objectives");
    if (u_domains_.size() != objectives_.size())
        throw ConfigurationError("multi-objective: need one uncertainty set per objective");
    for (std::size_t i = 0; i < objectives_.size(); ++i) {
        if (objectives_[i].x_dim() != objectives_.front().x_dim())
            throw ConfigurationError("multi-objective: objectives disagree on dim x");
        if (objectives_[i].u_dim() != u_domains_[i].dims())
            throw ConfigurationError("multi-objective: u-domain " + std::to_string(i) + " has wrong dimension");
    }
    if (!lambda_in_simplex(lambda_domain_, objectives_.size()))
        throw ConfigurationError("Lambda must lie inside the probability simplex");
}

std::size_t MultiObjective::u_dim_total() const {
    std::size_t s = 0;
    for (const auto& d : u_domains_) s += d.dims();
    return s;
}

std::vector<std::size_t> MultiObjective::u_block_sizes() const {
    std::vector<std::size_t> out;
    for (const auto& d : u_domains_) out.push_back(d.dims());
    return out;
}

Point MultiObjective::values(const Point& x, const std::vector<Point>& us) const {
    if (us.size() != size()) throw std::invalid_argument("multi-objective: wrong number of u blocks");
    Point v(size());
    for (std::size_t i = 0; i < size(); ++i) v[i] = objectives_[i].value(x, us[i]);
    return v;
}

double MultiObjective::explicit_max(const Point& x, const std::vector<Point>& us, Point* lambda_star) const {
    const Point v = values(x, us);
    Point lam = linear_argmax(lambda_domain_, v, Sense::maximize);
    const double out = dot(lam, v);
    if (lambda_star) *lambda_star = std::move(lam);
    return out;
}

double MultiObjective::weighted(const Point& x, const std::vector<Point>& us, const Point& lambda) const {
    return dot(lambda, values(x, us));
}

Point MultiObjective::explicit_subgradient(const Point& x, const std::vector<Point>& us) const {
    Point lam;
    explicit_max(x, us, &lam);
    Point g(x_dim());
    for (std::size_t i = 0; i < size(); ++i)
        if (lam[i] != 0.0) g += lam[i] * objectives_[i].grad_x(x, us[i]);
    return g;
}

Objective MultiObjective::weighted_sum(const Point& lambda) const {
    if (lambda.size() != size()) throw std::invalid_argument("weighted_sum: lambda dimension");
    for (const auto& f : objectives_)
        if (!f.is_bilinear()) throw std::invalid_argument("weighted_sum: bilinear objectives only");
    if (size() == 1) return objectives_.front().scaled(lambda[0]);
    const std::size_t dx = x_dim();
    std::vector<std::vector<double>> rows;
    Point c(dx);
    std::vector<double> d;
    double k = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
        const auto& f = objectives_[i];
        for (std::size_t r = 0; r < f.u_dim(); ++r) {
            std::vector<double> row(dx);
            for (std::size_t j = 0; j < dx; ++j) row[j] = lambda[i] * f.matrix().entry(r, j);
            rows.push_back(std::move(row));
            d.push_back(lambda[i] * f.u_cost()[r]);
        }
        c += lambda[i] * f.x_cost();
        k += lambda[i] * f.offset();
    }
    return Objective::bilinear(LinearMap::dense(std::move(rows)), c, Point(std::move(d)), k);
}

}  // namespace robustplay
