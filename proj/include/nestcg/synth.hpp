#pragma once

// Synthetic nested problems and brute-force oracles.
//
// The span family: each block is a scenario of timed tasks, a subpath is a
// duty (chain of tasks), and the path resource is (end, -start) aggregated by
// componentwise max, so (1, 1) . aggregate is the span of the whole template.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <set>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "nestcg/driver.hpp"
#include "nestcg/master.hpp"
#include "nestcg/model.hpp"

namespace nestcg::synth {

struct Task {
  Value start = 0;
  Value end = 0;
};

struct SpanInstance {
  std::vector<std::vector<Task>> scenarios;
  Value min_connection = 0;
  Value max_duty_length = 600;
  Value span_cap = 1440;
  Cost duty_fixed_cost = 60;

  void validate() const {
    if (scenarios.empty()) throw InvalidInput("span instance needs at least one scenario");
    if (min_connection < 0) throw InvalidInput("connection time must be nonnegative");
    for (const auto& s : scenarios) {
      if (s.empty()) throw InvalidInput("scenario without tasks");
      for (const auto& t : s)
        if (t.end <= t.start) throw InvalidInput("task must end after it starts");
    }
  }
};

struct Built {
  NestedProblem problem;
  MasterSpec master;
};

/// Duties chain tasks with at least `min_connection` between them. Duty cost
/// is the fixed cost plus its elapsed time; elapsed time is capped per node.
inline Built build_span_problem(const SpanInstance& inst) {
  inst.validate();
  std::vector<Block> blocks;
  ElementId next = 0;
  for (const auto& sc : inst.scenarios) {
    Block b;
    SubpathResource len;
    len.name = "duty_length";
    std::vector<ElementId> ids;
    for (std::size_t k = 0; k < sc.size(); ++k) {
      ids.push_back(next++);
      b.elements.push_back(ids.back());
      len.windows[ids.back()] = Window{0, inst.max_duty_length};
    }
    for (std::size_t k = 0; k < sc.size(); ++k) {
      const auto& t = sc[k];
      b.entries.push_back(EndpointArc{ids[k], inst.duty_fixed_cost + (t.end - t.start), {t.end - t.start}, {t.end, -t.start}});
      b.exits.push_back(EndpointArc{ids[k], 0, {0}, {0, 0}});
      for (std::size_t l = 0; l < sc.size(); ++l) {
        const auto& u = sc[l];
        if (l == k || t.end + inst.min_connection > u.start) continue;
        b.arcs.push_back(Arc{ids[k], ids[l], u.end - t.end, {u.end - t.end}, {u.end - t.end, 0}});
      }
    }
    b.resources.push_back(std::move(len));
    blocks.push_back(std::move(b));
  }
  PathResource span;
  span.name = "span";
  span.dim = 2;
  span.aggregator = Aggregator::max;
  span.coeff = {1, 1};
  span.bound = inst.span_cap;
  return Built{NestedProblem(std::move(blocks), {span}), MasterSpec{Sense::cover, std::nullopt}};
}

// ---------------------------------------------------------------------------
// Independent subpath enumerators (no shared code with the labeling engine).

namespace detail {

/// Replays subpath windows along `nodes` without requiring a sink arc.
inline bool windows_hold(const NestedProblem& p, std::size_t block, const std::vector<ElementId>& nodes) {
  const auto& blk = p.block(block);
  const EndpointArc* entry = nullptr;
  for (const auto& a : blk.entries)
    if (a.element == nodes.front()) entry = &a;
  if (!entry) return false;
  for (std::size_t r = 0; r < blk.resources.size(); ++r) {
    const auto& res = blk.resources[r];
    Value v = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      Value d = 0;
      if (i == 0) {
        d = entry->sub_delta[r];
      } else {
        const Arc* arc = nullptr;
        for (const auto& a : blk.arcs)
          if (a.from == nodes[i - 1] && a.to == nodes[i]) arc = &a;
        if (!arc) return false;
        d = arc->sub_delta[r];
      }
      const auto w = res.window(nodes[i]);
      v += d;
      if (res.floor_at_lower) v = std::max(v, w.lo);
      if (!w.contains(v)) return false;
    }
  }
  return true;
}

inline bool has_exit(const NestedProblem& p, std::size_t block, ElementId e) {
  for (const auto& a : p.block(block).exits)
    if (a.element == e) return true;
  return false;
}

inline void canonical_sort(std::vector<Subpath>& v) {
  std::sort(v.begin(), v.end(), [](const Subpath& a, const Subpath& b) { return a.nodes < b.nodes; });
}

}  // namespace detail

/// Breadth-first over node sequences.
inline std::vector<Subpath> enumerate_subpaths_iterative(const NestedProblem& p, std::size_t block,
                                                         std::size_t guard = 1'000'000) {
  const auto& blk = p.block(block);
  std::vector<Subpath> out;
  std::deque<std::vector<ElementId>> queue;
  for (const auto& a : blk.entries) {
    std::vector<ElementId> s{a.element};
    if (detail::windows_hold(p, block, s)) queue.push_back(std::move(s));
  }
  while (!queue.empty()) {
    auto seq = std::move(queue.front());
    queue.pop_front();
    if (detail::has_exit(p, block, seq.back())) {
      auto chk = check_subpath_feasible(p, block, seq);
      if (chk.feasible()) out.push_back(*chk.subpath);
      if (out.size() > guard) throw CapacityExceeded("oracle subpath guard exceeded");
    }
    for (const auto& a : blk.arcs) {
      if (a.from != seq.back() || std::find(seq.begin(), seq.end(), a.to) != seq.end()) continue;
      auto ext = seq;
      ext.push_back(a.to);
      if (detail::windows_hold(p, block, ext)) queue.push_back(std::move(ext));
    }
  }
  detail::canonical_sort(out);
  return out;
}

/// Depth-first recursion computing cost and contribution itself.
inline std::vector<Subpath> enumerate_subpaths_recursive(const NestedProblem& p, std::size_t block,
                                                         std::size_t guard = 1'000'000) {
  const auto& blk = p.block(block);
  const auto dim = p.path_dim();
  std::vector<Subpath> out;
  std::vector<ElementId> seq;
  auto rec = [&](auto&& self, Cost cost, IntVec contrib) -> void {
    if (!detail::windows_hold(p, block, seq)) return;
    for (const auto& x : blk.exits)
      if (x.element == seq.back()) {
        IntVec c = contrib;
        for (std::size_t k = 0; k < dim; ++k) c[k] += x.path_delta[k];
        out.push_back(Subpath{block, seq, cost + x.cost, std::move(c)});
        if (out.size() > guard) throw CapacityExceeded("oracle subpath guard exceeded");
      }
    for (const auto& a : blk.arcs) {
      if (a.from != seq.back() || std::find(seq.begin(), seq.end(), a.to) != seq.end()) continue;
      IntVec c = contrib;
      for (std::size_t k = 0; k < dim; ++k) c[k] += a.path_delta[k];
      seq.push_back(a.to);
      self(self, cost + a.cost, std::move(c));
      seq.pop_back();
    }
  };
  for (const auto& a : blk.entries) {
    seq = {a.element};
    rec(rec, a.cost, a.path_delta);
  }
  detail::canonical_sort(out);
  return out;
}

/// Every feasible path, by odometer over the per-block subpath lists.
inline std::vector<Path> all_feasible_paths(const NestedProblem& p, std::size_t guard = 1'000'000) {
  std::vector<std::vector<Subpath>> per;
  double combos = 1.0;
  for (std::size_t i = 0; i < p.block_count(); ++i) {
    per.push_back(enumerate_subpaths_iterative(p, i, guard));
    combos *= static_cast<double>(per.back().size());
  }
  if (combos > static_cast<double>(guard)) throw CapacityExceeded("oracle path guard exceeded");
  std::vector<Path> out;
  if (combos == 0) return out;
  std::vector<std::size_t> idx(per.size(), 0);
  std::vector<Subpath> pick(per.size());
  while (true) {
    for (std::size_t i = 0; i < per.size(); ++i) pick[i] = per[i][idx[i]];
    auto chk = check_path_feasible(p, pick);
    if (chk.feasible()) out.push_back(std::move(*chk.path));
    std::size_t i = per.size();
    while (i > 0) {
      --i;
      if (++idx[i] < per[i].size()) break;
      idx[i] = 0;
      if (i == 0) return out;
    }
  }
}

/// Minimum reduced cost over all feasible paths; +inf if there are none.
inline double oracle_min_rcost(const NestedProblem& p, const Duals& duals, std::size_t guard = 1'000'000) {
  double best = kInfinity;
  for (const auto& path : all_feasible_paths(p, guard)) best = std::min(best, reduced_cost(path, duals));
  return best;
}

/// Second oracle: recursive enumeration of subpaths and of their combinations.
inline double oracle_min_rcost_recursive(const NestedProblem& p, const Duals& duals, std::size_t guard = 1'000'000) {
  std::vector<std::vector<Subpath>> per;
  double combos = 1.0;
  for (std::size_t i = 0; i < p.block_count(); ++i) {
    per.push_back(enumerate_subpaths_recursive(p, i, guard));
    combos *= static_cast<double>(per.back().size());
  }
  if (combos > static_cast<double>(guard)) throw CapacityExceeded("oracle path guard exceeded");
  double best = kInfinity;
  IntVec agg = p.aggregate_start();
  auto rec = [&](auto&& self, std::size_t i, double rc, const IntVec& acc) -> void {
    if (i == per.size()) {
      if (p.aggregate_feasible(acc)) best = std::min(best, rc - duals.per_path);
      return;
    }
    for (const auto& s : per[i]) {
      IntVec next = acc;
      p.aggregate_into(next, s.contribution);
      double r = static_cast<double>(s.cost);
      for (ElementId e : s.nodes) r -= duals.element[e];
      self(self, i + 1, rc + r, next);
    }
  };
  rec(rec, 0, 0.0, agg);
  return best;
}

/// Columns of the full LP: one cheapest feasible path per set of covered rows.
inline std::vector<Path> oracle_columns(const NestedProblem& p, std::size_t guard = 1'000'000) {
  // Per block, keep for every covered-row set the subpaths that are Pareto
  // minimal in (cost, contribution); others never give a cheaper column.
  std::vector<std::vector<Subpath>> per;
  double combos = 1.0;
  for (std::size_t i = 0; i < p.block_count(); ++i) {
    std::map<std::vector<ElementId>, std::vector<Subpath>> groups;
    for (auto& s : enumerate_subpaths_iterative(p, i, guard)) {
      std::vector<ElementId> key;
      for (ElementId e : s.nodes)
        if (p.covered(e)) key.push_back(e);
      std::sort(key.begin(), key.end());
      groups[key].push_back(std::move(s));
    }
    std::vector<Subpath> kept;
    for (auto& [key, g] : groups) {
      std::sort(g.begin(), g.end(), [](const Subpath& a, const Subpath& b) {
        return std::tie(a.cost, a.contribution, a.nodes) < std::tie(b.cost, b.contribution, b.nodes);
      });
      std::vector<Subpath> front;
      for (auto& s : g) {
        bool dom = false;
        for (const auto& f : front) {
          bool leq = true;
          for (std::size_t c = 0; c < s.contribution.size(); ++c)
            if (f.contribution[c] > s.contribution[c]) leq = false;
          if (leq) dom = true;
        }
        if (!dom) front.push_back(std::move(s));
      }
      for (auto& s : front) kept.push_back(std::move(s));
    }
    combos *= static_cast<double>(kept.size());
    per.push_back(std::move(kept));
  }
  if (combos > static_cast<double>(guard)) throw CapacityExceeded("oracle column guard exceeded");
  std::map<std::vector<ElementId>, Path> best;
  if (combos == 0) return {};
  std::vector<std::size_t> idx(per.size(), 0);
  std::vector<Subpath> pick(per.size());
  while (true) {
    for (std::size_t i = 0; i < per.size(); ++i) pick[i] = per[i][idx[i]];
    auto chk = check_path_feasible(p, pick);
    if (chk.feasible()) {
      std::vector<ElementId> key;
      for (ElementId e : chk.path->elements())
        if (p.covered(e)) key.push_back(e);
      std::sort(key.begin(), key.end());
      auto it = best.find(key);
      if (it == best.end() || chk.path->cost < it->second.cost) best[key] = std::move(*chk.path);
    }
    std::size_t i = per.size();
    bool done = true;
    while (i > 0) {
      --i;
      if (++idx[i] < per[i].size()) {
        done = false;
        break;
      }
      idx[i] = 0;
    }
    if (done) break;
  }
  std::vector<Path> out;
  for (auto& [k, path] : best) out.push_back(std::move(path));
  return out;
}

/// LP relaxation over the full column set, with the same artificial columns
/// as the column-generation master.
inline double oracle_lp(const NestedProblem& p, const MasterSpec& master, std::optional<double> big_m = std::nullopt,
                        std::size_t guard = 1'000'000) {
  Rmp rmp(p, master.sense, master.cardinality, big_m);
  for (const auto& path : oracle_columns(p, guard)) rmp.add_column(path);
  return rmp.solve().objective;
}

struct IntegerOptimum {
  bool feasible = false;
  double cost = kInfinity;
  std::vector<Path> solution;
};

/// Exact integer optimum of the master by search over the full column set.
/// Returns nullopt when the node budget is exhausted.
inline std::optional<IntegerOptimum> oracle_integer_optimum(const NestedProblem& p, const MasterSpec& master,
                                                            std::size_t node_budget = 5'000'000,
                                                            std::size_t guard = 1'000'000) {
  auto cols = oracle_columns(p, guard);
  const auto universe = p.coverage();
  std::vector<std::size_t> row_of(p.element_count(), static_cast<std::size_t>(-1));
  for (std::size_t r = 0; r < universe.size(); ++r) row_of[universe[r]] = r;
  const auto rows = universe.size();
  std::vector<std::vector<bool>> cover(cols.size(), std::vector<bool>(rows, false));
  std::map<std::vector<bool>, std::size_t> by_set;  // cheapest column per covered set
  std::optional<std::size_t> empty_col;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    bool any = false;
    for (ElementId e : cols[j].elements())
      if (p.covered(e)) {
        cover[j][row_of[e]] = true;
        any = true;
      }
    if (!any && (!empty_col || cols[j].cost < cols[*empty_col].cost)) empty_col = j;
    auto it = by_set.find(cover[j]);
    if (it == by_set.end() || cols[j].cost < cols[it->second].cost) by_set[cover[j]] = j;
  }
  std::vector<std::vector<std::size_t>> containing(rows);
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t r = 0; r < rows; ++r)
      if (cover[j][r]) containing[r].push_back(j);
  for (auto& v : containing)
    std::sort(v.begin(), v.end(), [&](auto a, auto b) { return cols[a].cost < cols[b].cost; });

  IntegerOptimum best;
  std::size_t nodes = 0;
  std::vector<bool> covered(rows, false);
  std::vector<std::size_t> chosen;
  const bool partition = master.sense == Sense::partition;
  const auto K = master.cardinality;
  bool exhausted = false;

  auto finish = [&](double cost) {
    // Cardinality: pad with the cheapest column covering nothing.
    std::vector<std::size_t> sol = chosen;
    if (K) {
      if (static_cast<std::int64_t>(sol.size()) > *K) return;
      const auto missing = *K - static_cast<std::int64_t>(sol.size());
      if (missing > 0) {
        if (!empty_col) return;
        cost += static_cast<double>(missing) * static_cast<double>(cols[*empty_col].cost);
        sol.insert(sol.end(), static_cast<std::size_t>(missing), *empty_col);
      }
    }
    if (cost < best.cost) {
      best.cost = cost;
      best.feasible = true;
      best.solution.clear();
      for (auto j : sol) best.solution.push_back(cols[j]);
    }
  };

  auto rec = [&](auto&& self, double cost) -> void {
    if (exhausted) return;
    if (++nodes > node_budget) {
      exhausted = true;
      return;
    }
    if (cost >= best.cost) return;
    std::size_t r = 0;
    while (r < rows && covered[r]) ++r;
    if (r == rows) {
      finish(cost);
      return;
    }
    if (K && static_cast<std::int64_t>(chosen.size()) >= *K) return;
    if (partition && K && static_cast<std::int64_t>(chosen.size()) + 1 == *K) {
      // The last column must cover exactly the remaining rows.
      std::vector<bool> rest(rows);
      for (std::size_t k = 0; k < rows; ++k) rest[k] = !covered[k];
      auto it = by_set.find(rest);
      if (it == by_set.end()) return;
      chosen.push_back(it->second);
      finish(cost + static_cast<double>(cols[it->second].cost));
      chosen.pop_back();
      return;
    }
    for (std::size_t j : containing[r]) {
      if (cost + static_cast<double>(cols[j].cost) >= best.cost) break;
      bool clash = false;
      if (partition)
        for (std::size_t k = 0; k < rows && !clash; ++k) clash = cover[j][k] && covered[k];
      if (clash) continue;
      std::vector<std::size_t> newly;
      for (std::size_t k = 0; k < rows; ++k)
        if (cover[j][k] && !covered[k]) {
          covered[k] = true;
          newly.push_back(k);
        }
      chosen.push_back(j);
      self(self, cost + static_cast<double>(cols[j].cost));
      chosen.pop_back();
      for (auto k : newly) covered[k] = false;
    }
  };
  rec(rec, 0.0);
  if (exhausted) return std::nullopt;
  return best;
}

// ---------------------------------------------------------------------------
// Random generators.

struct SpanParams {
  std::size_t scenarios = 3;
  std::size_t min_tasks = 4;
  std::size_t max_tasks = 10;
  Value horizon = 1440;
  Value min_connection = 10;
  Value max_duty_length = 600;
  /// Cap the number of feasible duties per scenario (0 = no cap).
  std::size_t max_duties = 0;
  std::uint64_t seed = 1;
};

/// Random span instance; the cap is placed at a random quantile in [0.2, 0.8]
/// of the spans of random duty combinations, so it binds but admits paths.
inline SpanInstance random_span_instance(const SpanParams& params) {
  std::mt19937_64 rng(params.seed);
  for (std::size_t attempt = 0; attempt < 1000; ++attempt) {
    SpanInstance inst;
    inst.min_connection = params.min_connection;
    inst.max_duty_length = params.max_duty_length;
    std::uniform_int_distribution<std::size_t> ntasks(params.min_tasks, params.max_tasks);
    std::uniform_int_distribution<Value> len(30, 180);
    for (std::size_t s = 0; s < params.scenarios; ++s) {
      std::vector<Task> tasks;
      const auto n = ntasks(rng);
      std::uniform_int_distribution<Value> start(0, params.horizon - 200);
      for (std::size_t k = 0; k < n; ++k) {
        const Value st = start(rng);
        tasks.push_back(Task{st, std::min(params.horizon, st + len(rng))});
      }
      std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) { return std::tie(a.start, a.end) < std::tie(b.start, b.end); });
      inst.scenarios.push_back(std::move(tasks));
    }
    inst.span_cap = 2 * params.horizon;
    auto built = build_span_problem(inst);
    std::vector<std::vector<Subpath>> duties;
    bool too_many = false;
    for (std::size_t i = 0; i < built.problem.block_count(); ++i) {
      duties.push_back(enumerate_subpaths_iterative(built.problem, i));
      if (params.max_duties && duties.back().size() > params.max_duties) too_many = true;
    }
    if (too_many) continue;
    std::vector<Value> spans;
    std::uniform_int_distribution<std::size_t> any(0, 1'000'000);
    for (int k = 0; k < 200; ++k) {
      Value e = kValueMin, ns = kValueMin;
      for (const auto& d : duties) {
        const auto& s = d[any(rng) % d.size()];
        e = std::max(e, s.contribution[0]);
        ns = std::max(ns, s.contribution[1]);
      }
      spans.push_back(e + ns);
    }
    std::sort(spans.begin(), spans.end());
    std::uniform_real_distribution<double> q(0.2, 0.8);
    inst.span_cap = spans[static_cast<std::size_t>(q(rng) * static_cast<double>(spans.size() - 1))];
    return inst;
  }
  throw InvalidInput("could not generate a span instance within the duty limit");
}

struct RandomParams {
  std::size_t blocks = 3;
  std::size_t elements_per_block = 4;
  /// Path-resource shape: sum with d = 1, sum with d = 2, or max with d = 2.
  enum class Shape { sum1, sum2, max2 } shape = Shape::sum1;
  bool negative_deltas = false;
  double arc_probability = 0.4;
  std::size_t max_subpaths_per_block = 8;
  Sense sense = Sense::cover;
  std::optional<std::int64_t> cardinality;
  std::uint64_t seed = 1;
};

/// Random layered instance with a load-like subpath resource and a path
/// resource whose cap is placed at a random quantile of combination values.
inline Built random_instance(const RandomParams& params) {
  std::mt19937_64 rng(params.seed);
  const std::size_t dim = params.shape == RandomParams::Shape::sum1 ? 1 : 2;
  const auto agg = params.shape == RandomParams::Shape::max2 ? Aggregator::max : Aggregator::sum;
  std::uniform_int_distribution<Cost> cost(1, 30);
  std::uniform_int_distribution<Value> load(1, 5), contrib(params.negative_deltas ? -6 : 0, 20), coef(1, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t attempt = 0; attempt < 10'000; ++attempt) {
    std::vector<Block> blocks;
    ElementId next = 0;
    for (std::size_t i = 0; i < params.blocks; ++i) {
      Block b;
      SubpathResource r;
      r.name = "load";
      const auto n = params.elements_per_block;
      for (std::size_t k = 0; k < n; ++k) b.elements.push_back(next++);
      const Value cap = std::uniform_int_distribution<Value>(4, 10)(rng);
      for (auto e : b.elements) r.windows[e] = Window{0, cap};
      auto pd = [&] {
        IntVec v(dim);
        for (auto& x : v) x = contrib(rng);
        return v;
      };
      for (auto e : b.elements) {
        if (unit(rng) < 0.8) b.entries.push_back(EndpointArc{e, cost(rng), {load(rng)}, pd()});
        if (unit(rng) < 0.8) b.exits.push_back(EndpointArc{e, cost(rng), {0}, pd()});
      }
      for (auto u : b.elements)
        for (auto v : b.elements)
          if (u != v && unit(rng) < params.arc_probability) b.arcs.push_back(Arc{u, v, cost(rng), {load(rng)}, pd()});
      b.resources.push_back(std::move(r));
      blocks.push_back(std::move(b));
    }
    PathResource pr;
    pr.name = "global";
    pr.dim = dim;
    pr.aggregator = agg;
    pr.coeff.assign(dim, 1);
    for (auto& a : pr.coeff) a = coef(rng);
    pr.bound = kValueMax / 8;
    std::vector<ElementId> coverage;
    NestedProblem probe(blocks, {pr});
    std::vector<std::vector<Subpath>> per;
    bool ok = true;
    for (std::size_t i = 0; i < probe.block_count() && ok; ++i) {
      per.push_back(enumerate_subpaths_iterative(probe, i));
      if (per.back().empty() || per.back().size() > params.max_subpaths_per_block) ok = false;
    }
    if (!ok) continue;
    std::vector<Value> values;
    std::uniform_int_distribution<std::size_t> any(0, 1'000'000);
    for (int k = 0; k < 200; ++k) {
      IntVec acc = probe.aggregate_start();
      for (const auto& d : per) probe.aggregate_into(acc, d[any(rng) % d.size()].contribution);
      Value v = 0;
      for (std::size_t c = 0; c < dim; ++c) v += pr.coeff[c] * acc[c];
      values.push_back(v);
    }
    std::sort(values.begin(), values.end());
    pr.bound = values[static_cast<std::size_t>(std::uniform_real_distribution<double>(0.2, 0.8)(rng) *
                                               static_cast<double>(values.size() - 1))];
    // Rows only for elements that some feasible path can visit.
    NestedProblem full(blocks, {pr});
    std::set<ElementId> reachable;
    for (const auto& path : all_feasible_paths(full))
      for (ElementId e : path.elements()) reachable.insert(e);
    if (reachable.empty()) continue;
    coverage.assign(reachable.begin(), reachable.end());
    return Built{NestedProblem(std::move(blocks), {pr}, std::move(coverage)), MasterSpec{params.sense, params.cardinality}};
  }
  throw InvalidInput("could not generate a random instance within the subpath limit");
}

/// Random integer duals in [lo, hi] for the covered elements, and a per-path dual.
inline Duals random_duals(const NestedProblem& p, std::mt19937_64& rng, Value lo = 0, Value hi = 40,
                          bool per_path = false) {
  std::uniform_int_distribution<Value> d(lo, hi);
  Duals out = Duals::zero(p.element_count());
  for (ElementId e : p.coverage()) out.element[e] = static_cast<double>(d(rng));
  if (per_path) out.per_path = static_cast<double>(d(rng));
  return out;
}

inline nlohmann::json to_json(const SpanInstance& s) {
  nlohmann::json sc = nlohmann::json::array();
  for (const auto& tasks : s.scenarios) {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& x : tasks) t.push_back({x.start, x.end});
    sc.push_back(std::move(t));
  }
  return nlohmann::json{{"type", "span"},
                        {"scenarios", sc},
                        {"min_connection", s.min_connection},
                        {"max_duty_length", s.max_duty_length},
                        {"span_cap", s.span_cap},
                        {"duty_fixed_cost", s.duty_fixed_cost}};
}

inline SpanInstance span_from_json(const nlohmann::json& j) {
  try {
    SpanInstance s;
    for (const auto& tasks : j.at("scenarios")) {
      std::vector<Task> v;
      for (const auto& t : tasks) v.push_back(Task{t.at(0).get<Value>(), t.at(1).get<Value>()});
      s.scenarios.push_back(std::move(v));
    }
    s.min_connection = j.value("min_connection", Value{0});
    s.max_duty_length = j.value("max_duty_length", Value{600});
    s.span_cap = j.at("span_cap").get<Value>();
    s.duty_fixed_cost = j.value("duty_fixed_cost", Cost{60});
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed span instance: ") + e.what());
  }
}

}  // namespace nestcg::synth
