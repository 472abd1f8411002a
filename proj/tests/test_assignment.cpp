#include "base/assignment.hpp"

#include <random>

#include "doctest.h"
#include "oracles.hpp"

using namespace base;

TEST_CASE("empty problem yields empty matching") {
  const MatchResult r = solve_matching({}, 0, 0);
  CHECK(r.pairs.empty());
  CHECK(r.total_cost == 0.0);
}

TEST_CASE("positive costs are never matched") {
  const MatchResult r = solve_matching({1.0, 2.0, 3.0, 4.0}, 2, 2);
  CHECK(r.pairs.empty());
  CHECK(r.unmatched_rows.size() == 2);
  CHECK(r.unmatched_cols.size() == 2);
}

TEST_CASE("clear diagonal preference") {
  // -log(0.9) ~ 0.105, -log(0.1) ~ 2.3; shifted by log tau both negative,
  // here encoded directly as negative costs.
  const std::vector<double> cost{-2.0, -0.5, -0.5, -2.0};
  const MatchResult r = solve_matching(cost, 2, 2);
  REQUIRE(r.pairs.size() == 2);
  CHECK(r.pairs[0] == std::pair<int, int>{0, 0});
  CHECK(r.pairs[1] == std::pair<int, int>{1, 1});
}

TEST_CASE("infeasible entries are respected") {
  const std::vector<double> cost{kInfeasible, -1.0, -1.0, kInfeasible};
  const MatchResult r = solve_matching(cost, 2, 2);
  REQUIRE(r.pairs.size() == 2);
  CHECK(r.pairs[0] == std::pair<int, int>{0, 1});
  CHECK(r.pairs[1] == std::pair<int, int>{1, 0});
}

TEST_CASE("solver equals exhaustive search on random rectangular instances") {
  std::mt19937 gen(123);
  std::uniform_real_distribution<double> u(-5.0, 1.0);
  std::uniform_real_distribution<double> feas(0.0, 1.0);
  std::uniform_int_distribution<int> dim(0, 7);

  for (int rep = 0; rep < 400; ++rep) {
    const int n = dim(gen);
    const int m = dim(gen);
    std::vector<double> cost(static_cast<size_t>(n) * m);
    oracle::Mat ocost = oracle::zeros(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        const double c = feas(gen) < 0.3 ? kInfeasible : u(gen);
        cost[static_cast<size_t>(i) * m + j] = c;
        ocost[i][j] = c;
      }
    }
    const MatchResult r = solve_matching(cost, n, m);
    const double want = n == 0 || m == 0 ? 0.0 : oracle::brute_force_matching(ocost);
    CHECK(r.total_cost == doctest::Approx(want).epsilon(1e-9));
  }
}
