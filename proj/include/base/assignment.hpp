#pragma once

#include <limits>
#include <utility>
#include <vector>

namespace base {

// Sentinel for forbidden pairs.
constexpr double kInfeasible = std::numeric_limits<double>::infinity();

struct MatchResult {
  std::vector<std::pair<int, int>> pairs;  // (row, col), sorted by row
  std::vector<int> unmatched_rows;
  std::vector<int> unmatched_cols;
  double total_cost = 0.0;
};

// Min-cost matching with optional assignment: any row or column may stay
// unmatched at cost 0, so only pairs with negative cost are worth taking.
// `cost` is row-major n_rows x n_cols; kInfeasible entries are never matched.
// O((n_rows + n_cols)^3) shortest-augmenting-path with potentials.
MatchResult solve_matching(const std::vector<double>& cost, int n_rows, int n_cols);

}  // namespace base
