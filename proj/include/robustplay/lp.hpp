#pragma once

#include "robustplay/core.hpp"

#include <vector>

namespace robustplay {

/// Small dense LP helper for desk-scale benchmarks and hull membership.
/// Not a general solver: tableau simplex with Bland's rule.
struct LpResult {
    enum class Status { optimal, infeasible, unbounded };
    Status status = Status::infeasible;
    std::vector<double> z;
    double value = 0.0;
};

/// minimize c.z subject to A z = b, z >= 0.
LpResult solve_standard_lp(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                           const std::vector<double>& c);

struct MatrixGameSolution {
    double value = 0.0;
    Point row_strategy;     // minimizer over rows
    Point column_strategy;  // maximizer over columns
};

/// min over row mixtures, max over column mixtures of w^T M v.
MatrixGameSolution solve_matrix_game(const std::vector<std::vector<double>>& M);

}  // namespace robustplay
