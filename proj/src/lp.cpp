#include "robustplay/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace robustplay {

namespace {

constexpr double eps = 1e-11;

// Tableau: rows 0..m-1 constraints, last column rhs; `obj` is the reduced-cost row.
struct Tableau {
    std::vector<std::vector<double>> rows;
    std::vector<double> obj;
    std::vector<std::size_t> basis;
    std::size_t cols = 0;

    void pivot(std::size_t r, std::size_t c) {
        auto& pr = rows[r];
        const double p = pr[c];
        for (auto& v : pr) v /= p;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == r) continue;
            const double f = rows[i][c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= cols; ++j) rows[i][j] -= f * pr[j];
        }
        const double f = obj[c];
        if (f != 0.0)
            for (std::size_t j = 0; j <= cols; ++j) obj[j] -= f * pr[j];
        basis[r] = c;
    }

    // Minimizes; returns false when unbounded. `allowed` limits entering columns.
    bool optimize(std::size_t allowed) {
        for (std::size_t iter = 0; iter < 100000; ++iter) {
            std::size_t enter = cols;
            for (std::size_t j = 0; j < allowed; ++j)
                if (obj[j] < -eps) {
                    enter = j;
                    break;
                }
            if (enter == cols) return true;
            std::size_t leave = rows.size();
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i][enter] > eps) {
                    const double ratio = rows[i][cols] / rows[i][enter];
                    if (ratio < best - eps || (ratio <= best + eps && leave < rows.size() && basis[i] < basis[leave])) {
                        best = ratio;
                        leave = i;
                    }
                }
            }
            if (leave == rows.size()) return false;
            pivot(leave, enter);
        }
        throw std::runtime_error("lp: iteration limit");
    }
};

}  // namespace

LpResult solve_standard_lp(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                           const std::vector<double>& c) {
    const std::size_t m = A.size();
    const std::size_t n = c.size();
    if (b.size() != m) throw std::invalid_argument("lp: rhs has wrong size");
    for (const auto& row : A)
        if (row.size() != n) throw std::invalid_argument("lp: ragged constraint matrix");

    // Phase 1 with one artificial per row.
    Tableau t;
    t.cols = n + m;
    t.rows.assign(m, std::vector<double>(t.cols + 1, 0.0));
    t.basis.resize(m);
    t.obj.assign(t.cols + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double sign = b[i] < 0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) t.rows[i][j] = sign * A[i][j];
        t.rows[i][n + i] = 1.0;
        t.rows[i][t.cols] = sign * b[i];
        t.basis[i] = n + i;
        for (std::size_t j = 0; j < n; ++j) t.obj[j] -= t.rows[i][j];
        t.obj[t.cols] -= t.rows[i][t.cols];
    }
    t.optimize(t.cols);
    LpResult out;
    if (-t.obj[t.cols] > 1e-9) return out;  // infeasible

    // Drive remaining artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
        if (t.basis[i] < n) continue;
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(t.rows[i][j]) > eps) {
                t.pivot(i, j);
                break;
            }
    }

    // Phase 2: real objective, artificials may not enter.
    std::fill(t.obj.begin(), t.obj.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) t.obj[j] = c[j];
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t bj = t.basis[i];
        if (bj < n && t.obj[bj] != 0.0) {
            const double f = t.obj[bj];
            for (std::size_t j = 0; j <= t.cols; ++j) t.obj[j] -= f * t.rows[i][j];
        }
    }
    if (!t.optimize(n)) {
        out.status = LpResult::Status::unbounded;
        return out;
    }
    out.status = LpResult::Status::optimal;
    out.z.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (t.basis[i] < n) out.z[t.basis[i]] = t.rows[i][t.cols];
    double v = 0.0;
    for (std::size_t j = 0; j < n; ++j) v += c[j] * out.z[j];
    out.value = v;
    return out;
}

MatrixGameSolution solve_matrix_game(const std::vector<std::vector<double>>& M) {
    const std::size_t rows = M.size();
    if (rows == 0 || M.front().empty()) throw std::invalid_argument("matrix game: empty payoff matrix");
    const std::size_t cols = M.front().size();
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& r : M) {
        if (r.size() != cols) throw std::invalid_argument("matrix game: ragged payoff matrix");
        for (double v : r) lo = std::min(lo, v);
    }
    const double shift = 1.0 - lo;  // payoffs become >= 1

    // Row player: max sum p  s.t.  sum_i p_i M'_ij <= 1.
    // Column player: min sum q  s.t.  sum_j M'_ij q_j >= 1.
    auto solve_side = [&](bool row_side) {
        const std::size_t vars = row_side ? rows : cols;
        const std::size_t cons = row_side ? cols : rows;
        std::vector<std::vector<double>> A(cons, std::vector<double>(vars + cons, 0.0));
        std::vector<double> b(cons, 1.0);
        std::vector<double> c(vars + cons, 0.0);
        for (std::size_t k = 0; k < cons; ++k) {
            for (std::size_t v = 0; v < vars; ++v)
                A[k][v] = (row_side ? M[v][k] : M[k][v]) + shift;
            A[k][vars + k] = row_side ? 1.0 : -1.0;
        }
        for (std::size_t v = 0; v < vars; ++v) c[v] = row_side ? -1.0 : 1.0;
        auto res = solve_standard_lp(A, b, c);
        if (res.status != LpResult::Status::optimal) throw std::runtime_error("matrix game: lp failed");
        double total = 0.0;
        for (std::size_t v = 0; v < vars; ++v) total += res.z[v];
        Point strat(vars);
        for (std::size_t v = 0; v < vars; ++v) strat[v] = res.z[v] / total;
        return std::pair{strat, 1.0 / total};
    };
    auto [w, v_row] = solve_side(true);
    auto [q, v_col] = solve_side(false);
    (void)v_col;
    return {v_row - shift, std::move(w), std::move(q)};
}

}  // namespace robustplay
