#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"

using namespace nestcg;
using namespace testing_support;

namespace {

struct RandomDag {
  LayeredDag dag;
  AdditiveResources res;
  std::size_t source = 0;
  std::size_t sink = 0;
};

/// source, `layers` layers of `width` nodes, sink; dense random arcs between
/// consecutive layers, two resources with random windows.
RandomDag random_dag(std::mt19937_64& rng, std::size_t layers, std::size_t width) {
  RandomDag g;
  std::uniform_int_distribution<int> cost(-10, 20), delta(0, 6), cap(4, 14);
  std::uniform_real_distribution<double> unit(0, 1);
  g.source = g.dag.add_node(0);
  std::vector<std::vector<std::size_t>> L;
  for (std::size_t l = 0; l < layers; ++l) {
    L.emplace_back();
    for (std::size_t k = 0; k < width; ++k) L.back().push_back(g.dag.add_node(l + 1));
  }
  g.sink = g.dag.add_node(layers + 1);
  g.res.modes = {DominanceMode::le, DominanceMode::le};
  g.res.windows.resize(g.dag.node_count());
  for (std::size_t v = 0; v < g.dag.node_count(); ++v)
    if (unit(rng) < 0.5) g.res.windows[v] = {Window{0, cap(rng)}, Window{0, cap(rng)}};
  auto arc = [&](std::size_t u, std::size_t v) {
    g.res.delta.push_back({delta(rng), delta(rng)});
    g.dag.add_arc(u, v, cost(rng), g.res.delta.size() - 1);
  };
  for (auto v : L.front()) arc(g.source, v);
  for (std::size_t l = 0; l + 1 < layers; ++l)
    for (auto u : L[l])
      for (auto v : L[l + 1])
        if (unit(rng) < 0.6) arc(u, v);
  for (auto v : L.back()) arc(v, g.sink);
  return g;
}

/// Every feasible source-sink path cost, sorted.
std::vector<double> brute_force(const RandomDag& g) {
  std::vector<double> out;
  auto rec = [&](auto&& self, std::size_t v, double c, IntVec r) -> void {
    if (!g.res.windows[v].empty())
      for (std::size_t k = 0; k < r.size(); ++k)
        if (!g.res.windows[v][k].contains(r[k])) return;
    if (v == g.sink) {
      out.push_back(c);
      return;
    }
    for (auto a : g.dag.out(v)) {
      const auto& arc = g.dag.arc(a);
      IntVec n = r;
      for (std::size_t k = 0; k < n.size(); ++k) n[k] += g.res.delta[arc.tag][k];
      self(self, arc.to, c + arc.cost, n);
    }
  };
  rec(rec, g.source, 0.0, IntVec{0, 0});
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> oracle_block_rcosts(const NestedProblem& p, std::size_t b, const Duals& d, const IntVec& lo,
                                        const IntVec& hi) {
  std::vector<double> out;
  for (const auto& s : synth::enumerate_subpaths_recursive(p, b)) {
    bool in = true;
    for (std::size_t c = 0; c < lo.size(); ++c) in = in && lo[c] <= s.contribution[c] && s.contribution[c] <= hi[c];
    if (in) out.push_back(reduced_cost(s, d));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(LabelSearch, ParallelArcs) {
  LayeredDag dag;
  auto s = dag.add_node(0), t = dag.add_node(1);
  dag.add_arc(s, t, 5);
  dag.add_arc(s, t, 3);
  AdditiveResources res{{IntVec{}}, {}, {}};
  auto r = additive_label_search(dag, s, t, res, 1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].rcost, 3);
}

TEST(LabelSearch, WindowExcludesOnlyPath) {
  LayeredDag dag;
  auto s = dag.add_node(0), t = dag.add_node(1);
  dag.add_arc(s, t, 1, 0);
  AdditiveResources res{{IntVec{12}}, {{}, {Window{0, 10}}}, {DominanceMode::le}};
  EXPECT_TRUE(additive_label_search(dag, s, t, res, 3).empty());
}

TEST(LabelSearch, RejectsNonAdvancingArcs) {
  LayeredDag dag;
  auto a = dag.add_node(1), b = dag.add_node(1);
  EXPECT_THROW(dag.add_arc(a, b, 0), InvalidInput);
  EXPECT_THROW(dag.add_arc(b, a, 0), InvalidInput);
}

TEST(LabelSearch, MatchesBruteForceAndTopKPrefix) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto g = random_dag(rng, 3, 6);
    const auto all = brute_force(g);
    const auto best = additive_label_search(g.dag, g.source, g.sink, g.res, 1);
    if (all.empty()) {
      EXPECT_TRUE(best.empty());
      continue;
    }
    ASSERT_EQ(best.size(), 1u);
    EXPECT_EQ(best[0].rcost, all.front());
    const std::size_t k = 7;
    const auto top = additive_label_search(g.dag, g.source, g.sink, g.res, k);
    ASSERT_EQ(top.size(), std::min(k, all.size()));
    for (std::size_t i = 0; i < top.size(); ++i) EXPECT_EQ(top[i].rcost, all[i]) << "trial " << trial;
  }
}

TEST(LabelSearch, DominanceDoesNotChangeOptimum) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    auto g = random_dag(rng, 3, 5);
    auto on = additive_label_search(g.dag, g.source, g.sink, g.res, 1, true);
    auto off = additive_label_search(g.dag, g.source, g.sink, g.res, 1, false);
    ASSERT_EQ(on.size(), off.size());
    if (!on.empty()) EXPECT_EQ(on[0].rcost, off[0].rcost);
  }
}

TEST(LabelSearch, EqualityModeKeepsDistinctValues) {
  LayeredDag dag;
  auto s = dag.add_node(0), m1 = dag.add_node(1), m2 = dag.add_node(1), t = dag.add_node(2);
  AdditiveResources res{{IntVec{1}, IntVec{2}, IntVec{0}}, {}, {DominanceMode::eq}};
  dag.add_arc(s, m1, 0, 0);
  dag.add_arc(s, m2, 0, 1);
  dag.add_arc(m1, t, 0, 2);
  dag.add_arc(m2, t, 0, 2);
  res.windows.assign(4, {});
  res.windows[t] = {Window{2, 2}};
  auto r = additive_label_search(dag, s, t, res, 1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].state, IntVec{2});
}

TEST(ElementaryRcspp, FullRangeZeroDualsGivesCheapestSubpath) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto inst = corpus_instance(seed);
    const auto& p = inst.problem;
    for (std::size_t b = 0; b < p.block_count(); ++b) {
      auto d = Duals::zero(p.element_count());
      auto q = full_box_query(p, b);
      auto r = elementary_rcspp(p, d, q);
      auto o = oracle_block_rcosts(p, b, d, q.lo, q.hi);
      ASSERT_EQ(r.empty(), o.empty());
      if (!o.empty()) EXPECT_EQ(r[0].rcost, o.front());
    }
  }
}

TEST(ElementaryRcspp, EmptyWindow) {
  auto inst = corpus_instance(2);
  auto q = full_box_query(inst.problem, 0);
  for (auto& v : q.lo) v = q.hi[0] + 1000;
  for (auto& v : q.hi) v = q.hi[0] + 2000;
  EXPECT_TRUE(elementary_rcspp(inst.problem, Duals::zero(inst.problem.element_count()), q).empty());
}

TEST(ElementaryRcspp, RandomBoxesMatchExhaustiveRoutes) {
  std::mt19937_64 rng(8);
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    auto inst = corpus_instance(seed, 40);
    const auto& p = inst.problem;
    for (int rep = 0; rep < 5; ++rep) {
      auto d = synth::random_duals(p, rng, -5, 25);
      for (std::size_t b = 0; b < p.block_count(); ++b) {
        auto q = full_box_query(p, b);
        for (std::size_t c = 0; c < q.lo.size(); ++c) {
          std::uniform_int_distribution<Value> pick(q.lo[c], q.hi[c]);
          Value x = pick(rng), y = pick(rng);
          q.lo[c] = std::min(x, y);
          q.hi[c] = std::max(x, y);
        }
        q.top_k = 4;
        auto o = oracle_block_rcosts(p, b, d, q.lo, q.hi);
        auto r = elementary_rcspp(p, d, q);
        ASSERT_EQ(r.size(), std::min<std::size_t>(4, o.size())) << "seed " << seed;
        for (std::size_t i = 0; i < r.size(); ++i) {
          EXPECT_EQ(r[i].rcost, o[i]);
          EXPECT_EQ(r[i].rcost, reduced_cost(r[i].subpath, d));
          auto again = check_subpath_feasible(p, b, r[i].subpath.nodes);
          ASSERT_TRUE(again.feasible());
          EXPECT_EQ(again.subpath->contribution, r[i].subpath.contribution);
        }
        q.top_k = 1;
        q.use_dominance = false;
        auto nodom = elementary_rcspp(p, d, q);
        ASSERT_EQ(nodom.empty(), o.empty());
        if (!o.empty()) EXPECT_EQ(nodom[0].rcost, o.front());
      }
    }
  }
}

TEST(ElementaryRcspp, DailyRoutesWithDistanceWindow) {
  mpcvrp::GeneratorParams gp;
  gp.customers_per_day = 5;
  gp.days = 1;
  gp.vehicles = 2;
  std::mt19937_64 rng(21);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    gp.seed = seed;
    auto inst = mpcvrp::generate_instance(mpcvrp::random_coordinates(5, seed), gp);
    auto model = mpcvrp::build_nested(inst);
    const auto& p = model.problem;
    auto d = synth::random_duals(p, rng, 0, 400);
    const Value lo = 300, hi = 600;
    auto r = mpcvrp::daily_route_pricer(model, 0, d, lo, hi, 1);
    auto o = oracle_block_rcosts(p, 0, d, {lo}, {hi});
    ASSERT_EQ(r.empty(), o.empty());
    if (!o.empty()) EXPECT_NEAR(r[0].rcost, o.front() - d.per_path, 1e-9);
  }
}

TEST(ElementaryRcspp, SubpathWindowsRespected) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto inst = corpus_instance(seed, 40);
    const auto& p = inst.problem;
    for (std::size_t b = 0; b < p.block_count(); ++b) {
      auto q = full_box_query(p, b);
      q.top_k = 1000;
      auto r = elementary_rcspp(p, Duals::zero(p.element_count()), q);
      EXPECT_EQ(r.size(), synth::enumerate_subpaths_iterative(p, b).size());
    }
  }
}

TEST(ElementaryRcspp, RejectsOversizedBlock) {
  std::vector<ElementId> ids(32);
  std::iota(ids.begin(), ids.end(), 0);
  NestedProblem p({chain_block(ids, 1)}, {sum_resource(10)});
  EXPECT_THROW(elementary_rcspp(p, Duals::zero(32), full_box_query(p, 0)), CapacityExceeded);
}

TEST(ElementaryRcspp, ForbiddenElementsAreSkipped) {
  auto inst = corpus_instance(7, 40);
  const auto& p = inst.problem;
  std::vector<bool> forbidden(p.element_count(), false);
  forbidden[p.block(0).elements[0]] = true;
  auto q = full_box_query(p, 0);
  q.top_k = 1000;
  q.forbidden = &forbidden;
  for (const auto& r : elementary_rcspp(p, Duals::zero(p.element_count()), q))
    for (auto e : r.subpath.nodes) EXPECT_FALSE(forbidden[e]);
  for (const auto& s : enumerate_block_subpaths(p, 0, 1000, &forbidden))
    for (auto e : s.nodes) EXPECT_FALSE(forbidden[e]);
}

TEST(EnumerateBlockSubpaths, MatchesOracleAndCap) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto inst = corpus_instance(seed, 40);
    for (std::size_t b = 0; b < inst.problem.block_count(); ++b) {
      auto mine = enumerate_block_subpaths(inst.problem, b, 100000);
      auto ref = synth::enumerate_subpaths_iterative(inst.problem, b);
      std::sort(mine.begin(), mine.end(), [](auto& x, auto& y) { return x.nodes < y.nodes; });
      EXPECT_EQ(mine, ref);
      if (ref.size() > 1) EXPECT_THROW(enumerate_block_subpaths(inst.problem, b, 1), CapacityExceeded);
    }
  }
}
