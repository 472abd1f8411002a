#include "base/assignment.hpp"

#include <algorithm>
#include <cmath>

namespace base {

namespace {

// Large finite stand-in for forbidden edges; keeps potential arithmetic sane.
constexpr double kBig = 1e15;

}  // namespace

MatchResult solve_matching(const std::vector<double>& cost, int n_rows, int n_cols) {
  MatchResult result;
  if (n_rows == 0 && n_cols == 0) return result;

  // Square (n+m) problem: top-left holds the pair costs, the diagonal dummy
  // blocks let every row/column opt out at cost 0.
  const int n = n_rows + n_cols;
  std::vector<double> a(static_cast<size_t>(n) * n, kBig);
  for (int i = 0; i < n_rows; ++i) {
    for (int j = 0; j < n_cols; ++j) {
      const double c = cost[static_cast<size_t>(i) * n_cols + j];
      a[static_cast<size_t>(i) * n + j] = std::isfinite(c) ? c : kBig;
    }
    a[static_cast<size_t>(i) * n + (n_cols + i)] = 0.0;  // row i unmatched
  }
  for (int j = 0; j < n_cols; ++j) {
    a[static_cast<size_t>(n_rows + j) * n + j] = 0.0;  // col j unmatched
  }
  for (int i = n_rows; i < n; ++i) {
    for (int j = n_cols; j < n; ++j) {
      a[static_cast<size_t>(i) * n + j] = 0.0;  // dummy-dummy, free
    }
  }

  // Shortest augmenting path with dual potentials (1-indexed bookkeeping).
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kBig * n);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = kBig * n;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a[static_cast<size_t>(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> row_to_col(n_rows, -1);
  for (int j = 1; j <= n; ++j) {
    const int i = p[j] - 1;
    if (i >= 0 && i < n_rows && j - 1 < n_cols) {
      const double c = cost[static_cast<size_t>(i) * n_cols + (j - 1)];
      if (std::isfinite(c)) {
        row_to_col[i] = j - 1;
        result.total_cost += c;
      }
    }
  }

  std::vector<char> col_used(n_cols, 0);
  for (int i = 0; i < n_rows; ++i) {
    if (row_to_col[i] >= 0) {
      result.pairs.emplace_back(i, row_to_col[i]);
      col_used[row_to_col[i]] = 1;
    } else {
      result.unmatched_rows.push_back(i);
    }
  }
  for (int j = 0; j < n_cols; ++j) {
    if (!col_used[j]) result.unmatched_cols.push_back(j);
  }
  return result;
}

}  // namespace base
