#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "support.hpp"

using namespace nestcg;
using namespace nestcg::mpcvrp;

namespace {

Instance two_days() {
  Instance inst;
  inst.days = 2;
  inst.vehicles = 2;
  inst.capacity = 10;
  inst.depot = {0, 0};
  inst.customers = {{{3, 4}, 2, 0}, {{6, 8}, 3, 0}, {{0, 10}, 4, 0},
                    {{-5, 0}, 2, 1}, {{-5, -5}, 5, 1}, {{0, -7}, 1, 1}};
  inst.distance_cap = 60;
  return inst;
}

Value route_cost(const Instance& inst, const std::vector<std::size_t>& order) {
  Value c = 0;
  Point at = inst.depot;
  for (auto i : order) {
    c += distance(at, inst.customers[i].at);
    at = inst.customers[i].at;
  }
  return c + distance(at, inst.depot);
}

// Cheapest single route over the given customers, by permutation.
Value best_route(const Instance& inst, std::vector<std::size_t> group) {
  std::sort(group.begin(), group.end());
  Value best = kValueMax;
  do best = std::min(best, route_cost(inst, group));
  while (std::next_permutation(group.begin(), group.end()));
  return best;
}

// Minimum over all partitions of the day into at most K capacity-feasible routes.
Value brute_force_day(const Instance& inst, const std::vector<std::size_t>& day) {
  Value best = kValueMax;
  std::vector<std::vector<std::size_t>> groups;
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == day.size()) {
      Value total = 0;
      for (const auto& g : groups) {
        Value load = 0;
        for (auto c : g) load += inst.customers[c].demand;
        if (load > inst.capacity) return;
        total += best_route(inst, g);
      }
      best = std::min(best, total);
      return;
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      groups[g].push_back(day[i]);
      self(self, i + 1);
      groups[g].pop_back();
    }
    if (groups.size() < static_cast<std::size_t>(inst.vehicles)) {
      groups.push_back({day[i]});
      self(self, i + 1);
      groups.pop_back();
    }
  };
  rec(rec, 0);
  return best;
}

Instance small_generated(std::uint64_t seed, std::size_t n = 4, std::size_t T = 2, std::int64_t K = 2) {
  GeneratorParams g;
  g.customers_per_day = n;
  g.days = T;
  g.vehicles = K;
  g.delta = 0.5;
  g.seed = seed;
  return generate_instance(random_coordinates(n * T + 5, seed), g);
}

}  // namespace

TEST(Distance, RoundedEuclidean) {
  EXPECT_EQ(distance({0, 0}, {3, 4}), 5);
  EXPECT_EQ(distance({0, 0}, {1, 1}), 1);
  EXPECT_EQ(distance({0, 0}, {1, 2}), 2);
  EXPECT_EQ(distance({2, 7}, {2, 7}), 0);
}

TEST(DistanceCap, Formula) {
  EXPECT_EQ(distance_cap(100, 200, 0.3), 130);
  EXPECT_EQ(distance_cap(100, 200, 1.0), 200);
  EXPECT_EQ(distance_cap(100, 200, 0.0), 100);
  EXPECT_THROW(distance_cap(100, 200, 1.5), InvalidInput);
}

TEST(BuildNested, BlocksPerDay) {
  auto m = build_nested(two_days());
  ASSERT_EQ(m.problem.block_count(), 2u);
  // Three customers and the idle element of the day.
  EXPECT_EQ(m.problem.block(0).elements.size(), 4u);
  EXPECT_EQ(m.problem.block(1).elements.size(), 4u);
  EXPECT_EQ(m.problem.coverage().size(), 6u);
  EXPECT_EQ(m.master.sense, Sense::partition);
  EXPECT_EQ(*m.master.cardinality, 2);
  EXPECT_EQ(m.idle_of_day.size(), 2u);
  EXPECT_FALSE(m.problem.covered(m.idle_of_day[0]));
}

TEST(BuildNested, RejectsOversizedDemand) {
  auto inst = two_days();
  inst.customers[2].demand = 11;
  EXPECT_THROW(build_nested(inst), InvalidInput);
  inst = two_days();
  inst.distance_cap = 0;
  EXPECT_THROW(build_nested(inst), InvalidInput);
}

TEST(BuildNested, RouteDistanceReplay) {
  Instance inst;
  inst.days = 1;
  inst.vehicles = 1;
  inst.capacity = 100;
  inst.depot = {0, 0};
  inst.customers = {{{3, 4}, 1, 0}, {{6, 8}, 1, 0}, {{6, 0}, 1, 0}, {{1, 1}, 1, 0}};
  inst.distance_cap = 1000;
  auto m = build_nested(inst);
  auto r = check_subpath_feasible(m.problem, 0, std::vector<ElementId>{0, 1, 2, 3});
  ASSERT_TRUE(r.feasible());
  // 5 + 5 + 8 + 5 + 1 by hand.
  EXPECT_EQ(r.subpath->cost, 24);
  EXPECT_EQ(r.subpath->contribution, IntVec{24});
  EXPECT_EQ(route_cost(inst, {0, 1, 2, 3}), 24);
}

TEST(BuildNested, CapacityBindsOnRoutes) {
  auto inst = two_days();
  inst.capacity = 7;
  auto m = build_nested(inst);
  EXPECT_FALSE(check_subpath_feasible(m.problem, 1, std::vector<ElementId>{4, 5, 6}).feasible());
  EXPECT_TRUE(check_subpath_feasible(m.problem, 1, std::vector<ElementId>{4, 6}).feasible());
}

TEST(SolveDayExact, MatchesPartitionBruteForce) {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    auto src = random_coordinates(6, seed);
    Instance inst;
    inst.days = 1;
    inst.vehicles = 2;
    inst.depot = src.depot;
    inst.capacity = 0;
    for (std::size_t i = 0; i < 6; ++i) {
      inst.customers.push_back(Customer{src.points[i], src.demands[i], 0});
      inst.capacity += src.demands[i];
    }
    inst.capacity = (inst.capacity + 1) / 2 + 3;
    std::vector<std::size_t> day{0, 1, 2, 3, 4, 5};
    auto sol = solve_day_exact(inst, day);
    EXPECT_EQ(sol.cost, brute_force_day(inst, day)) << "seed " << seed;
    Value sum = 0;
    for (auto c : sol.route_costs) sum += c;
    EXPECT_EQ(sum, sol.cost);
  }
}

TEST(SolveDayExact, InfeasibleAndOversized) {
  auto inst = two_days();
  inst.vehicles = 1;
  inst.capacity = 5;
  inst.customers = {{{1, 0}, 4, 0}, {{2, 0}, 4, 0}};
  EXPECT_THROW(solve_day_exact(inst, {0, 1}), InvalidInput);
  std::vector<std::size_t> big(15, 0);
  EXPECT_THROW(solve_day_exact(inst, big), CapacityExceeded);
}

TEST(BalancedWorkload, Examples) {
  std::vector<DaySolution> days{{10, {6, 4}}, {9, {5, 4}}};
  // Pair 6 with 4 and 4 with 5.
  EXPECT_EQ(balanced_workload(days, 2), 10);
  EXPECT_EQ(balanced_workload({{7, {7}}}, 3), 7);
}

TEST(Generator, CapBetweenBounds) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto inst = small_generated(seed, 5, 3, 2);
    EXPECT_LE(inst.d_min, inst.d_max + 1e-9);
    EXPECT_GE(static_cast<double>(inst.distance_cap), std::floor(inst.d_min) - 1e-9);
    EXPECT_LE(static_cast<double>(inst.distance_cap), inst.d_max + 1e-9);
    EXPECT_EQ(inst.customers.size(), 15u);
    for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(inst.customers_of_day(t).size(), 5u);
  }
}

TEST(Generator, DisjointDaysAndDeterminism) {
  auto a = small_generated(4, 4, 3, 2), b = small_generated(4, 4, 3, 2);
  EXPECT_EQ(to_json(a), to_json(b));
  std::set<std::pair<Value, Value>> seen;
  for (const auto& c : a.customers) seen.insert({c.at.x, c.at.y});
  EXPECT_EQ(seen.size(), a.customers.size());
}

TEST(Generator, Refusals) {
  GeneratorParams g;
  g.customers_per_day = 15;
  g.days = 1;
  EXPECT_THROW(generate_instance(random_coordinates(20, 1), g), CapacityExceeded);
  g.customers_per_day = 5;
  g.days = 3;
  EXPECT_THROW(generate_instance(random_coordinates(10, 1), g), InvalidInput);
  g.days = 1;
  g.delta = 2.0;
  EXPECT_THROW(generate_instance(random_coordinates(10, 1), g), InvalidInput);
}

TEST(Json, RoundTrip) {
  auto inst = small_generated(7);
  auto back = instance_from_json(to_json(inst));
  EXPECT_EQ(to_json(back), to_json(inst));
  auto j = to_json(inst);
  j.erase("capacity");
  EXPECT_THROW(instance_from_json(j), InvalidInput);
}

TEST(Coordinates, ReadsBundledFile) {
  auto src = read_cvrp_coordinates(std::string(NESTCG_DATA_DIR) + "/desk61.vrp");
  EXPECT_EQ(src.points.size(), 60u);
  EXPECT_EQ(src.demands.size(), 60u);
  EXPECT_EQ(src.depot.x, 500);
  EXPECT_EQ(src.depot.y, 500);
}

TEST(Coordinates, CustomDepotAndMissingFile) {
  const auto path = std::filesystem::temp_directory_path() / "nestcg_coords.vrp";
  {
    std::ofstream out(path);
    out << "NAME : t\nNODE_COORD_SECTION\n1 0 0\n2 10.4 3\n3 7 7\nDEPOT_SECTION\n 3\n -1\nEOF\n";
  }
  auto src = read_cvrp_coordinates(path.string());
  EXPECT_EQ(src.depot.x, 7);
  ASSERT_EQ(src.points.size(), 2u);
  EXPECT_EQ(src.points[1].x, 10);
  EXPECT_TRUE(src.demands.empty());
  std::filesystem::remove(path);
  EXPECT_THROW(read_cvrp_coordinates("/nonexistent/file.vrp"), InvalidInput);
}

TEST(DailyPricer, ZeroDualsFullWindow) {
  auto m = build_nested(two_days());
  auto r = daily_route_pricer(m, 0, Duals::zero(m.problem.element_count()), 0, 1000);
  ASSERT_EQ(r.size(), 1u);
  // The idle route is free.
  EXPECT_EQ(r[0].subpath.nodes, std::vector<ElementId>{m.idle_of_day[0]});
  EXPECT_DOUBLE_EQ(r[0].rcost, 0.0);
}

TEST(DailyPricer, EmptyWindow) {
  auto m = build_nested(two_days());
  EXPECT_TRUE(daily_route_pricer(m, 0, Duals::zero(m.problem.element_count()), 1, 9).empty());
}

TEST(DailyPricer, MatchesExhaustiveRouteScan) {
  std::mt19937_64 rng(31);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto inst = small_generated(seed, 5, 2, 2);
    auto m = build_nested(inst);
    auto duals = synth::random_duals(m.problem, rng, 0, 400, true);
    for (std::size_t day = 0; day < 2; ++day) {
      std::vector<std::size_t> members;
      for (std::size_t e = 0; e < m.customer_of.size(); ++e)
        if (m.customer_of[e] >= 0 && inst.customers[static_cast<std::size_t>(m.customer_of[e])].day == day)
          members.push_back(e);
      for (auto [lo, hi] : {std::pair<Value, Value>{0, 100000}, {300, 900}, {0, 500}}) {
        double best = kInfinity;
        if (lo == 0) best = day == 0 ? -duals.per_path : 0.0;
        // All orderings of all nonempty subsets.
        for (std::size_t mask = 1; mask < (std::size_t{1} << members.size()); ++mask) {
          std::vector<std::size_t> sub;
          for (std::size_t k = 0; k < members.size(); ++k)
            if (mask >> k & 1) sub.push_back(members[k]);
          do {
            std::vector<std::size_t> order;
            Value load = 0;
            double dual = 0.0;
            for (auto e : sub) {
              order.push_back(static_cast<std::size_t>(m.customer_of[e]));
              load += inst.customers[order.back()].demand;
              dual += duals.element[e];
            }
            if (load > inst.capacity) continue;
            const Value c = route_cost(inst, order);
            if (c < lo || c > hi) continue;
            best = std::min(best, static_cast<double>(c) - dual - (day == 0 ? duals.per_path : 0.0));
          } while (std::next_permutation(sub.begin(), sub.end()));
        }
        auto got = daily_route_pricer(m, day, duals, lo, hi);
        if (!std::isfinite(best)) {
          EXPECT_TRUE(got.empty());
        } else {
          ASSERT_FALSE(got.empty()) << "seed " << seed;
          EXPECT_NEAR(got[0].rcost, best, 1e-9) << "seed " << seed << " day " << day;
        }
      }
    }
  }
}

TEST(Mpcvrp, PricedPathsDecodeToSchedules) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto inst = small_generated(seed, 4, 3, 2);
    auto m = build_nested(inst);
    SolverConfig cfg;
    cfg.adaptive.widths = {50};
    ColumnGeneration cg(m.problem, m.master, cfg);
    cg.run();
    for (const auto& col : cg.rmp().columns()) {
      if (col.artificial) continue;
      ASSERT_EQ(col.path.subpaths.size(), inst.days);
      Value total = 0;
      std::set<std::int64_t> seen;
      for (std::size_t t = 0; t < inst.days; ++t) {
        const auto& s = col.path.subpaths[t];
        std::vector<std::size_t> order;
        for (auto e : s.nodes) {
          const auto c = m.customer_of[e];
          if (c < 0) continue;
          EXPECT_TRUE(seen.insert(c).second);
          EXPECT_EQ(inst.customers[static_cast<std::size_t>(c)].day, t);
          order.push_back(static_cast<std::size_t>(c));
        }
        total += order.empty() ? 0 : route_cost(inst, order);
      }
      EXPECT_LE(total, inst.distance_cap);
      EXPECT_EQ(total, col.path.cost);
    }
  }
}

TEST(Mpcvrp, LpEquivalence) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto inst = small_generated(seed, 4, 2, 2);
    auto m = build_nested(inst);
    const double oracle = synth::oracle_lp(m.problem, m.master);
    SolverConfig a;
    a.adaptive.widths = {25};
    SolverConfig e;
    e.pricer = PricerKind::enumerative;
    EXPECT_NEAR(solve_root(m.problem, m.master, a).lp_value, oracle, 1e-6 * (1 + oracle)) << "seed " << seed;
    EXPECT_NEAR(solve_root(m.problem, m.master, e).lp_value, oracle, 1e-6 * (1 + oracle)) << "seed " << seed;
  }
}
