#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "lp_oracle.hpp"
#include "nestcg/lp.hpp"

using namespace nestcg;
using lp_oracle::dense;
using lp_oracle::vertex_minimum;

namespace {

LpProblem random_lp(std::mt19937_64& rng, std::size_t m, std::size_t n, bool feasible_by_construction) {
  std::uniform_int_distribution<int> coef(-3, 5), cost(0, 10), s(0, 2), z(0, 3);
  LpProblem lp;
  std::vector<double> x0(n);
  for (auto& v : x0) v = static_cast<double>(z(rng));
  for (std::size_t j = 0; j < n; ++j) lp.columns.push_back(LpColumn{static_cast<double>(cost(rng)), {}});
  for (std::size_t i = 0; i < m; ++i) {
    double ax = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const int v = coef(rng);
      if (v == 0 || rng() % 3 == 0) continue;
      lp.columns[j].entries.emplace_back(i, v);
      ax += v * x0[j];
    }
    const auto sense = static_cast<RowSense>(s(rng));
    lp.sense.push_back(sense);
    double rhs = static_cast<double>(coef(rng) * 2);
    if (feasible_by_construction) {
      rhs = sense == RowSense::eq ? ax : sense == RowSense::ge ? ax - z(rng) : ax + z(rng);
    }
    lp.rhs.push_back(rhs);
  }
  return lp;
}

// Optimality certificate: primal feasibility, dual sign feasibility,
// nonnegative reduced costs and a zero duality gap.
void expect_certificate(const LpProblem& lp, const LpResult& r, double tol = 1e-6) {
  ASSERT_EQ(r.status, LpStatus::optimal);
  const auto a = dense(lp);
  for (double v : r.x) EXPECT_GE(v, -tol);
  double dual_obj = 0.0;
  for (std::size_t i = 0; i < lp.rows(); ++i) {
    double ax = 0.0;
    for (std::size_t j = 0; j < lp.columns.size(); ++j) ax += a[i][j] * r.x[j];
    const double scale = 1.0 + std::abs(lp.rhs[i]);
    switch (lp.sense[i]) {
      case RowSense::ge:
        EXPECT_GE(ax, lp.rhs[i] - tol * scale);
        EXPECT_GE(r.duals[i], -tol);
        break;
      case RowSense::le:
        EXPECT_LE(ax, lp.rhs[i] + tol * scale);
        EXPECT_LE(r.duals[i], tol);
        break;
      case RowSense::eq:
        EXPECT_NEAR(ax, lp.rhs[i], tol * scale);
        break;
    }
    dual_obj += r.duals[i] * lp.rhs[i];
  }
  double primal = 0.0;
  for (std::size_t j = 0; j < lp.columns.size(); ++j) {
    double rc = lp.columns[j].cost;
    for (std::size_t i = 0; i < lp.rows(); ++i) rc -= r.duals[i] * a[i][j];
    EXPECT_GE(rc, -tol * (1.0 + std::abs(lp.columns[j].cost)));
    primal += lp.columns[j].cost * r.x[j];
  }
  EXPECT_NEAR(primal, r.objective, tol * (1.0 + std::abs(primal)));
  EXPECT_NEAR(primal, dual_obj, tol * (1.0 + std::abs(primal)));
}

}  // namespace

TEST(Simplex, MatchesVertexEnumeration) {
  std::mt19937_64 rng(101);
  std::size_t feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t m = 1 + rng() % 4, n = 1 + rng() % 6;
    auto lp = random_lp(rng, m, n, false);
    const auto oracle = vertex_minimum(lp);
    const auto r = solve_lp(lp);
    if (!oracle) {
      EXPECT_EQ(r.status, LpStatus::infeasible) << "trial " << trial;
      ++infeasible;
      continue;
    }
    ASSERT_EQ(r.status, LpStatus::optimal) << "trial " << trial;
    EXPECT_NEAR(r.objective, *oracle, 1e-6 * (1.0 + std::abs(*oracle))) << "trial " << trial;
    expect_certificate(lp, r);
    ++feasible;
  }
  EXPECT_GT(feasible, 100u);
  EXPECT_GT(infeasible, 10u);
}

TEST(Simplex, CertificatesOnLargerProblems) {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 1 + rng() % 20, n = 1 + rng() % 40;
    auto lp = random_lp(rng, m, n, true);
    expect_certificate(lp, solve_lp(lp));
  }
}

TEST(Simplex, DetectsInfeasibility) {
  LpProblem lp;
  lp.sense = {RowSense::ge, RowSense::le};
  lp.rhs = {2, 1};
  lp.columns = {LpColumn{1.0, {{0, 1.0}, {1, 1.0}}}};
  EXPECT_EQ(solve_lp(lp).status, LpStatus::infeasible);
}

TEST(Simplex, DetectsUnboundedness) {
  LpProblem lp;
  lp.sense = {RowSense::ge};
  lp.rhs = {0};
  lp.columns = {LpColumn{-1.0, {{0, 1.0}}}, LpColumn{0.0, {{0, -1.0}}}};
  EXPECT_EQ(solve_lp(lp).status, LpStatus::unbounded);
}

TEST(Simplex, RedundantEqualityRows) {
  LpProblem lp;
  lp.sense = {RowSense::eq, RowSense::eq};
  lp.rhs = {4, 8};
  lp.columns = {LpColumn{1.0, {{0, 1.0}, {1, 2.0}}}, LpColumn{3.0, {{0, 1.0}, {1, 2.0}}}};
  auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.objective, 4.0, 1e-9);
}

TEST(Simplex, WarmStartAfterAddingColumns) {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 2 + rng() % 10, n = 2 + rng() % 20;
    auto lp = random_lp(rng, m, n, true);
    SimplexSolver solver;
    auto first = solver.solve(lp);
    ASSERT_EQ(first.status, LpStatus::optimal);
    auto grown = lp;
    auto extra = random_lp(rng, m, 5, true);
    for (auto& c : extra.columns) grown.columns.push_back(c);
    auto warm = solver.solve(grown, &first.basis);
    auto cold = solve_lp(grown);
    ASSERT_EQ(warm.status, LpStatus::optimal);
    EXPECT_NEAR(warm.objective, cold.objective, 1e-6 * (1.0 + std::abs(cold.objective)));
    EXPECT_LE(warm.objective, first.objective + 1e-7);
    expect_certificate(grown, warm);
  }
}

TEST(Simplex, DegenerateProblemTerminates) {
  // Many identical tight rows through the origin.
  LpProblem lp;
  for (int i = 0; i < 12; ++i) {
    lp.sense.push_back(RowSense::le);
    lp.rhs.push_back(0.0);
  }
  for (int j = 0; j < 8; ++j) {
    LpColumn c{-1.0 - j, {}};
    for (int i = 0; i < 12; ++i) c.entries.emplace_back(i, (i + j) % 3 == 0 ? 1.0 : -0.5 + (i % 2));
    lp.columns.push_back(c);
  }
  auto r = solve_lp(lp);
  EXPECT_NE(r.status, LpStatus::infeasible);
}
