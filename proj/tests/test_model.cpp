#include <gtest/gtest.h>

#include "support.hpp"

using namespace nestcg;
using namespace testing_support;

namespace {

NestedProblem two_load_nodes() {
  auto b = chain_block({0, 1}, 1, 6);
  b.entries[0].sub_delta = {3};
  b.entries[1].sub_delta = {4};
  b.arcs.push_back(Arc{0, 1, 5, {4}, {0}});
  return NestedProblem({b}, {sum_resource(100)});
}

}  // namespace

TEST(CheckSubpath, SingleNodeIsFeasibleWithZeroContribution) {
  NestedProblem p({chain_block({0}, 1)}, {sum_resource(10)});
  auto r = check_subpath_feasible(p, 0, std::vector<ElementId>{0});
  ASSERT_TRUE(r.feasible());
  EXPECT_EQ(r.subpath->contribution, IntVec{0});
  EXPECT_EQ(r.subpath->cost, 0);
}

TEST(CheckSubpath, CapacityViolationReportsPosition) {
  auto p = two_load_nodes();
  auto r = check_subpath_feasible(p, 0, std::vector<ElementId>{0, 1});
  ASSERT_FALSE(r.feasible());
  EXPECT_EQ(r.violation->resource, 0u);
  EXPECT_EQ(r.violation->position, 2u);
}

TEST(CheckSubpath, DistanceContributionsAccumulate) {
  auto b = chain_block({0, 1, 2}, 1);
  b.entries[0].path_delta = {5};
  b.arcs.push_back(Arc{0, 1, 7, {}, {7}});
  b.arcs.push_back(Arc{1, 2, 2, {}, {2}});
  b.exits[2].cost = 0;
  NestedProblem p({b}, {sum_resource(100)});
  auto r = check_subpath_feasible(p, 0, std::vector<ElementId>{0, 1, 2});
  ASSERT_TRUE(r.feasible());
  EXPECT_EQ(r.subpath->contribution, IntVec{14});
  EXPECT_EQ(r.subpath->cost, 9);
}

TEST(CheckSubpath, Errors) {
  auto p = two_load_nodes();
  EXPECT_THROW(check_subpath_feasible(p, 0, std::vector<ElementId>{7}), InvalidInput);
  EXPECT_THROW(check_subpath_feasible(p, 0, std::vector<ElementId>{1, 0}), InvalidInput);
  EXPECT_THROW(check_subpath_feasible(p, 0, std::vector<ElementId>{}), InvalidInput);
  EXPECT_THROW(check_subpath_feasible(p, 0, std::vector<ElementId>{0, 0}), InvalidInput);
}

TEST(CheckSubpath, FloorLiftsToWindowStart) {
  auto b = chain_block({0, 1}, 1);
  SubpathResource t;
  t.name = "time";
  t.floor_at_lower = true;
  t.windows[0] = {0, 10};
  t.windows[1] = {20, 25};
  b.resources.push_back(t);
  for (auto& a : b.entries) a.sub_delta = {1};
  for (auto& a : b.exits) a.sub_delta = {0};
  b.arcs.push_back(Arc{0, 1, 1, {3}, {0}});
  NestedProblem p({b}, {sum_resource(100)});
  EXPECT_TRUE(check_subpath_feasible(p, 0, std::vector<ElementId>{0, 1}).feasible());
  EXPECT_TRUE(p.bounds(0).sub_le_dominance[0]);
}

TEST(CheckPath, SumAggregator) {
  NestedProblem p({chain_block({0}, 1), chain_block({1}, 1)}, {sum_resource(100)});
  std::vector<Subpath> s{Subpath{0, {0}, 1, {40}}, Subpath{1, {1}, 2, {55}}};
  auto r = check_path_feasible(p, s);
  ASSERT_TRUE(r.feasible());
  EXPECT_EQ(r.path->aggregate, IntVec{95});
  EXPECT_EQ(r.path->cost, 3);
}

TEST(CheckPath, MaxAggregatorSpanEncoding) {
  for (Value bound : {570, 550}) {
    NestedProblem p({chain_block({0}, 2), chain_block({1}, 2)}, {max_resource({1, 1}, bound)});
    std::vector<Subpath> s{Subpath{0, {0}, 0, {1020, -480}}, Subpath{1, {1}, 0, {1040, -500}}};
    auto r = check_path_feasible(p, s);
    EXPECT_EQ(r.aggregate, (IntVec{1040, -480}));
    EXPECT_EQ(r.feasible(), bound == 570);
    if (!r.feasible()) EXPECT_EQ(*r.violated_resource, 0u);
  }
}

TEST(CheckPath, Errors) {
  NestedProblem p({chain_block({0}, 1), chain_block({1}, 1)}, {sum_resource(100)});
  std::vector<Subpath> one{Subpath{0, {0}, 1, {40}}};
  EXPECT_THROW(check_path_feasible(p, one), InvalidInput);
  std::vector<Subpath> swapped{Subpath{1, {1}, 2, {55}}, Subpath{0, {0}, 1, {40}}};
  EXPECT_THROW(check_path_feasible(p, swapped), InvalidInput);
}

TEST(ReducedCost, Examples) {
  Subpath s{0, {0, 1}, 10, {0}};
  Duals d{{3.0, 4.0}, 0.0};
  EXPECT_DOUBLE_EQ(reduced_cost(s, d), 3.0);
  EXPECT_DOUBLE_EQ(reduced_cost(s, Duals::zero(2)), 10.0);
  Path path{{s}, 10, {0}};
  d.per_path = 1.5;
  EXPECT_DOUBLE_EQ(reduced_cost(path, d), 1.5);
}

TEST(ReducedCost, MatchesArcRecomputationOnRandomPaths) {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto inst = corpus_instance(seed);
    const auto& p = inst.problem;
    auto duals = synth::random_duals(p, rng, 0, 30, true);
    for (const auto& path : synth::all_feasible_paths(p)) {
      double rc = -duals.per_path;
      for (const auto& s : path.subpaths) {
        const auto& blk = p.block(s.block);
        for (const auto& a : blk.entries)
          if (a.element == s.nodes.front()) rc += static_cast<double>(a.cost);
        for (const auto& a : blk.exits)
          if (a.element == s.nodes.back()) rc += static_cast<double>(a.cost);
        for (std::size_t i = 1; i < s.nodes.size(); ++i)
          for (const auto& a : blk.arcs)
            if (a.from == s.nodes[i - 1] && a.to == s.nodes[i]) rc += static_cast<double>(a.cost);
        for (auto e : s.nodes) rc -= duals.element[e];
      }
      EXPECT_DOUBLE_EQ(rc, reduced_cost(path, duals));
    }
  }
}

TEST(Problem, ValidationErrors) {
  EXPECT_THROW(NestedProblem({}, {}), InvalidInput);
  EXPECT_THROW(NestedProblem({chain_block({0}, 1), chain_block({0}, 1)}, {sum_resource(1)}), InvalidInput);
  EXPECT_THROW(NestedProblem({chain_block({5}, 1)}, {sum_resource(1)}), InvalidInput);
  auto bad = sum_resource(1);
  bad.coeff = {-1};
  EXPECT_THROW(NestedProblem({chain_block({0}, 1)}, {bad}), InvalidInput);
  auto loop = chain_block({0}, 1);
  loop.arcs.push_back(Arc{0, 0, 1, {}, {0}});
  EXPECT_THROW(NestedProblem({loop}, {sum_resource(1)}), InvalidInput);
  auto foreign = chain_block({0}, 1);
  foreign.arcs.push_back(Arc{0, 1, 1, {}, {0}});
  EXPECT_THROW(NestedProblem({foreign, chain_block({1}, 1)}, {sum_resource(1)}), InvalidInput);
}

TEST(Problem, MonotoneFlag) {
  NestedProblem a({chain_block({0}, 1)}, {sum_resource(1)});
  EXPECT_TRUE(a.path_resources()[0].monotone_over_blocks);
  auto neg = chain_block({0}, 1);
  neg.entries[0].path_delta = {-3};
  NestedProblem b({neg}, {sum_resource(1)});
  EXPECT_FALSE(b.path_resources()[0].monotone_over_blocks);
  NestedProblem c({neg}, {max_resource({1}, 1)});
  EXPECT_TRUE(c.path_resources()[0].monotone_over_blocks);
}

TEST(Problem, ContributionReplayIsDeterministic) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto inst = corpus_instance(seed);
    for (std::size_t b = 0; b < inst.problem.block_count(); ++b)
      for (const auto& s : synth::enumerate_subpaths_recursive(inst.problem, b)) {
        auto again = check_subpath_feasible(inst.problem, b, s.nodes);
        ASSERT_TRUE(again.feasible());
        EXPECT_EQ(*again.subpath, s);
      }
  }
}

TEST(Problem, StaticBoundsContainEveryContribution) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto inst = corpus_instance(seed);
    const auto& p = inst.problem;
    for (std::size_t b = 0; b < p.block_count(); ++b)
      for (const auto& s : synth::enumerate_subpaths_iterative(p, b))
        for (std::size_t c = 0; c < p.path_dim(); ++c) {
          EXPECT_LE(p.bounds(b).lower[c], s.contribution[c]);
          EXPECT_GE(p.bounds(b).upper[c], s.contribution[c]);
        }
  }
}

TEST(Properties, DownwardClosureUnderPerturbation) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<Value> drop(0, 50);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto inst = corpus_instance(seed);
    const auto& p = inst.problem;
    for (const auto& path : synth::all_feasible_paths(p)) {
      auto subs = path.subpaths;
      auto& s = subs[rng() % subs.size()];
      s.contribution[rng() % s.contribution.size()] -= drop(rng);
      EXPECT_TRUE(check_path_feasible(p, subs).feasible());
    }
  }
}

TEST(Properties, AggregationIsMonotone) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<Value> v(-100, 100), up(0, 40);
  for (auto agg : {Aggregator::sum, Aggregator::max}) {
    std::vector<Block> blocks{chain_block({0}, 2), chain_block({1}, 2), chain_block({2}, 2)};
    PathResource r = agg == Aggregator::sum ? sum_resource(0, 2) : max_resource({1, 1}, 0);
    NestedProblem p(blocks, {r});
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<IntVec> ts(3, IntVec{v(rng), v(rng)});
      for (auto& t : ts) t = {v(rng), v(rng)};
      auto agg_of = [&](const std::vector<IntVec>& xs) {
        IntVec acc = p.aggregate_start();
        for (const auto& t : xs) p.aggregate_into(acc, t);
        return acc;
      };
      const auto base = agg_of(ts);
      ts[rng() % 3][rng() % 2] += up(rng);
      const auto bumped = agg_of(ts);
      for (std::size_t c = 0; c < 2; ++c) EXPECT_GE(bumped[c], base[c]);
    }
  }
}
