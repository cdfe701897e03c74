#pragma once

// Label-setting search with k-dominance. Two instantiations live here: a
// generic engine over explicit layered DAGs and the elementary subpath search
// inside one block (layers are implicit: the number of visited elements).

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "nestcg/model.hpp"

namespace nestcg {

enum class DominanceMode { le, eq, ignore };

struct DagArc {
  std::size_t from = 0;
  std::size_t to = 0;
  double cost = 0.0;
  std::size_t tag = 0;
};

/// Acyclic graph whose nodes carry a layer index; every arc must go to a
/// strictly higher layer.
class LayeredDag {
 public:
  std::size_t add_node(std::size_t layer) {
    layer_.push_back(layer);
    out_.emplace_back();
    return layer_.size() - 1;
  }

  void add_arc(std::size_t from, std::size_t to, double cost, std::size_t tag = 0) {
    if (from >= layer_.size() || to >= layer_.size()) throw InvalidInput("arc endpoint out of range");
    if (layer_[to] <= layer_[from]) throw InvalidInput("arc does not advance the layer order");
    out_[from].push_back(arcs_.size());
    arcs_.push_back(DagArc{from, to, cost, tag});
  }

  [[nodiscard]] std::size_t node_count() const { return layer_.size(); }
  [[nodiscard]] std::size_t arc_count() const { return arcs_.size(); }
  [[nodiscard]] std::size_t layer(std::size_t v) const { return layer_[v]; }
  [[nodiscard]] const DagArc& arc(std::size_t a) const { return arcs_[a]; }
  [[nodiscard]] std::span<const std::size_t> out(std::size_t v) const { return out_[v]; }

  /// Nodes sorted by (layer, id).
  [[nodiscard]] std::vector<std::size_t> layer_order() const {
    std::vector<std::size_t> order(layer_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return layer_[a] < layer_[b]; });
    return order;
  }

 private:
  std::vector<std::size_t> layer_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<DagArc> arcs_;
};

template <class State>
struct LabelPath {
  std::vector<std::size_t> nodes;
  std::vector<std::size_t> arcs;
  double rcost = 0.0;
  State state{};
};

namespace detail {

template <class State>
struct DagLabel {
  std::size_t node;
  std::size_t pred;  // label index, npos at the source
  std::size_t via;   // arc index
  double rc;
  State state;
};

inline constexpr std::size_t kNoLabel = static_cast<std::size_t>(-1);

/// Keeps a candidate unless at least k already kept labels dominate it.
template <class L, class Dom>
bool k_dominated(const L& cand, const std::vector<const L*>& kept, std::size_t k, Dom&& dom) {
  std::size_t count = 0;
  for (const L* other : kept)
    if (dom(*other, cand) && ++count >= k) return true;
  return false;
}

}  // namespace detail

/// Generic label search from `source` to `sink`.
///
/// extend(state, arc) returns the extended state or nullopt when infeasible;
/// dominates(a, b) is the resource part of the dominance test (the engine adds
/// rc(a) <= rc(b)); accept(state) is the feasibility test at the sink.
/// Returns up to top_k sink paths ordered by (rcost, state, discovery order).
template <class State, class Extend, class Dominates, class Accept>
std::vector<LabelPath<State>> label_search(const LayeredDag& dag, std::size_t source, std::size_t sink,
                                           State initial, Extend&& extend, Dominates&& dominates,
                                           Accept&& accept, std::size_t top_k, bool use_dominance = true) {
  if (top_k == 0) throw InvalidInput("top_k must be at least 1");
  if (source >= dag.node_count() || sink >= dag.node_count()) throw InvalidInput("source or sink out of range");
  using Label = detail::DagLabel<State>;
  std::vector<Label> labels;
  std::vector<std::vector<std::size_t>> at(dag.node_count());
  labels.push_back(Label{source, detail::kNoLabel, detail::kNoLabel, 0.0, std::move(initial)});
  at[source].push_back(0);

  auto order_less = [&](std::size_t a, std::size_t b) {
    const auto& la = labels[a];
    const auto& lb = labels[b];
    if (la.rc != lb.rc) return la.rc < lb.rc;
    if (la.state < lb.state) return true;
    if (lb.state < la.state) return false;
    return a < b;
  };
  auto dom = [&](const Label& a, const Label& b) { return a.rc <= b.rc && dominates(a.state, b.state); };

  std::vector<std::size_t> kept_sink;
  for (std::size_t v : dag.layer_order()) {
    auto& cands = at[v];
    std::sort(cands.begin(), cands.end(), order_less);
    std::vector<std::size_t> kept;
    std::vector<const Label*> kept_ptr;
    for (std::size_t id : cands) {
      if (use_dominance && detail::k_dominated(labels[id], kept_ptr, top_k, dom)) continue;
      kept.push_back(id);
      kept_ptr.push_back(&labels[id]);
    }
    cands.clear();
    if (v == sink) {
      kept_sink = std::move(kept);
      continue;
    }
    for (std::size_t id : kept) {
      for (std::size_t a : dag.out(v)) {
        const auto& arc = dag.arc(a);
        std::optional<State> next = extend(labels[id].state, arc);
        if (!next) continue;
        const double rc = labels[id].rc + arc.cost;
        labels.push_back(Label{arc.to, id, a, rc, std::move(*next)});
        at[arc.to].push_back(labels.size() - 1);
      }
    }
  }

  std::vector<LabelPath<State>> out;
  for (std::size_t id : kept_sink) {
    if (!accept(labels[id].state)) continue;
    LabelPath<State> p;
    p.rcost = labels[id].rc;
    p.state = labels[id].state;
    for (std::size_t cur = id; cur != detail::kNoLabel; cur = labels[cur].pred) {
      p.nodes.push_back(labels[cur].node);
      if (labels[cur].via != detail::kNoLabel) p.arcs.push_back(labels[cur].via);
    }
    std::reverse(p.nodes.begin(), p.nodes.end());
    std::reverse(p.arcs.begin(), p.arcs.end());
    out.push_back(std::move(p));
    if (out.size() == top_k) break;
  }
  return out;
}

/// Additive resources on a DAG: each arc tag indexes a delta vector, windows
/// are checked at every node reached, dominance follows per-coordinate modes.
struct AdditiveResources {
  std::vector<IntVec> delta;                    // indexed by arc tag
  std::vector<std::vector<Window>> windows;     // [node][coordinate]; empty = unconstrained
  std::vector<DominanceMode> modes;
};

inline std::vector<LabelPath<IntVec>> additive_label_search(const LayeredDag& dag, std::size_t source,
                                                             std::size_t sink, const AdditiveResources& res,
                                                             std::size_t top_k, bool use_dominance = true) {
  const std::size_t dim = res.modes.size();
  auto inside = [&](std::size_t node, const IntVec& v) {
    if (node >= res.windows.size() || res.windows[node].empty()) return true;
    for (std::size_t c = 0; c < dim; ++c)
      if (!res.windows[node][c].contains(v[c])) return false;
    return true;
  };
  IntVec start(dim, 0);
  if (!inside(source, start)) return {};
  return label_search(
      dag, source, sink, start,
      [&](const IntVec& s, const DagArc& arc) -> std::optional<IntVec> {
        IntVec n = s;
        const auto& d = res.delta.at(arc.tag);
        for (std::size_t c = 0; c < dim; ++c) n[c] += d[c];
        if (!inside(arc.to, n)) return std::nullopt;
        return n;
      },
      [&](const IntVec& a, const IntVec& b) {
        for (std::size_t c = 0; c < dim; ++c) {
          if (res.modes[c] == DominanceMode::le && a[c] > b[c]) return false;
          if (res.modes[c] == DominanceMode::eq && a[c] != b[c]) return false;
        }
        return true;
      },
      [](const IntVec&) { return true; }, top_k, use_dominance);
}

// ---------------------------------------------------------------------------
// Elementary subpath search inside one block.

struct RcsppQuery {
  std::size_t block = 0;
  /// Box on the subpath's path-resource contribution (two-sided).
  IntVec lo;
  IntVec hi;
  /// Elements that may not be visited (diving filters).
  const std::vector<bool>* forbidden = nullptr;
  std::size_t top_k = 1;
  bool use_dominance = true;
  std::size_t label_cap = 4'000'000;
};

struct RcsppResult {
  Subpath subpath;
  double rcost = 0.0;
};

namespace detail {

struct BlockLabel {
  std::uint32_t local;
  std::uint32_t mask;
  std::size_t pred;
  double rc;
  IntVec sub;
  IntVec path;
};

}  // namespace detail

/// Minimum reduced cost elementary subpaths of `q.block` whose contribution
/// lies in [q.lo, q.hi] and that respect the block's subpath windows.
/// Reduced costs use element duals only; the per-path dual is the caller's.
inline std::vector<RcsppResult> elementary_rcspp(const NestedProblem& problem, const Duals& duals,
                                                 const RcsppQuery& q) {
  if (q.top_k == 0) throw InvalidInput("top_k must be at least 1");
  const auto& blk = problem.block(q.block);
  const auto n = blk.elements.size();
  if (n > kMaxBlockElements)
    throw CapacityExceeded("block " + std::to_string(q.block) + " has " + std::to_string(n) +
                           " elements; the bit-set search supports at most 31");
  const auto dim = problem.path_dim();
  if (q.lo.size() != dim || q.hi.size() != dim) throw InvalidInput("box dimension mismatch");
  for (std::size_t c = 0; c < dim; ++c)
    if (q.lo[c] > q.hi[c]) return {};

  const auto& bb = problem.bounds(q.block);
  const auto m = blk.resources.size();
  auto allowed = [&](ElementId e) { return !q.forbidden || !(*q.forbidden)[e]; };
  auto dual = [&](ElementId e) { return duals.element.at(e); };

  std::vector<detail::BlockLabel> labels;
  std::vector<std::vector<std::size_t>> kept(n);

  // Applies deltas and windows at `to`; returns false on violation or when the
  // box can no longer be reached.
  auto advance = [&](detail::BlockLabel& l, ElementId to, const IntVec& sd, const IntVec& pd) {
    for (std::size_t r = 0; r < m; ++r) {
      const auto& res = blk.resources[r];
      const auto w = res.window(to);
      Value v = l.sub[r] + sd[r];
      if (res.floor_at_lower) v = std::max(v, w.lo);
      if (!w.contains(v)) return false;
      l.sub[r] = v;
    }
    for (std::size_t c = 0; c < dim; ++c) {
      l.path[c] += pd[c];
      if (l.path[c] + bb.min_future[c] > q.hi[c]) return false;
    }
    return true;
  };

  auto dominates = [&](const detail::BlockLabel& a, const detail::BlockLabel& b) {
    if (a.rc > b.rc) return false;
    if ((a.mask & b.mask) != a.mask) return false;
    for (std::size_t r = 0; r < m; ++r) {
      if (bb.sub_le_dominance[r] ? a.sub[r] > b.sub[r] : a.sub[r] != b.sub[r]) return false;
    }
    for (std::size_t c = 0; c < dim; ++c) {
      if (a.path[c] == b.path[c]) continue;
      if (a.path[c] < b.path[c] && a.path[c] + bb.min_future[c] >= q.lo[c]) continue;
      return false;
    }
    return true;
  };

  std::vector<std::size_t> frontier;
  for (std::size_t j = 0; j < n; ++j) {
    const ElementId e = blk.elements[j];
    const auto* ea = problem.entry(q.block, j);
    if (!ea || !allowed(e)) continue;
    detail::BlockLabel l{static_cast<std::uint32_t>(j), 1u << j, detail::kNoLabel,
                         static_cast<double>(ea->cost) - dual(e), IntVec(m, 0), IntVec(dim, 0)};
    if (!advance(l, e, ea->sub_delta, ea->path_delta)) continue;
    labels.push_back(std::move(l));
    frontier.push_back(labels.size() - 1);
  }

  auto order_less = [&](std::size_t a, std::size_t b) {
    const auto& la = labels[a];
    const auto& lb = labels[b];
    return std::tie(la.rc, la.sub, la.path, a) < std::tie(lb.rc, lb.sub, lb.path, b);
  };

  while (!frontier.empty()) {
    std::sort(frontier.begin(), frontier.end(), order_less);
    std::vector<std::size_t> survivors;
    for (std::size_t id : frontier) {
      auto& bucket = kept[labels[id].local];
      if (q.use_dominance) {
        std::size_t count = 0;
        bool drop = false;
        for (std::size_t other : bucket)
          if (dominates(labels[other], labels[id]) && ++count >= q.top_k) {
            drop = true;
            break;
          }
        if (drop) continue;
      }
      bucket.push_back(id);
      survivors.push_back(id);
    }
    std::vector<std::size_t> next;
    for (std::size_t id : survivors) {
      const auto from_local = labels[id].local;
      for (std::size_t a : problem.out_arcs(q.block, from_local)) {
        const auto& arc = blk.arcs[a];
        const auto to_local = problem.local_index(arc.to);
        if (labels[id].mask & (1u << to_local)) continue;
        if (!allowed(arc.to)) continue;
        detail::BlockLabel l = labels[id];
        l.local = static_cast<std::uint32_t>(to_local);
        l.mask |= 1u << to_local;
        l.pred = id;
        l.rc += static_cast<double>(arc.cost) - dual(arc.to);
        if (!advance(l, arc.to, arc.sub_delta, arc.path_delta)) continue;
        labels.push_back(std::move(l));
        next.push_back(labels.size() - 1);
        if (labels.size() > q.label_cap) throw CapacityExceeded("elementary search exceeded its label cap");
      }
    }
    frontier = std::move(next);
  }

  struct Done {
    double rc;
    IntVec path;
    std::size_t id;
    Cost exit_cost;
  };
  std::vector<Done> done;
  for (std::size_t j = 0; j < n; ++j) {
    const auto* xa = problem.exit(q.block, j);
    if (!xa) continue;
    for (std::size_t id : kept[j]) {
      IntVec p = labels[id].path;
      bool ok = true;
      for (std::size_t c = 0; c < dim; ++c) {
        p[c] += xa->path_delta[c];
        if (p[c] < q.lo[c] || p[c] > q.hi[c]) ok = false;
      }
      if (ok) done.push_back(Done{labels[id].rc + static_cast<double>(xa->cost), std::move(p), id, xa->cost});
    }
  }
  std::sort(done.begin(), done.end(),
            [](const Done& a, const Done& b) { return std::tie(a.rc, a.path, a.id) < std::tie(b.rc, b.path, b.id); });
  if (done.size() > q.top_k) done.resize(q.top_k);

  std::vector<RcsppResult> out;
  for (auto& d : done) {
    std::vector<ElementId> nodes;
    for (std::size_t cur = d.id; cur != detail::kNoLabel; cur = labels[cur].pred)
      nodes.push_back(blk.elements[labels[cur].local]);
    std::reverse(nodes.begin(), nodes.end());
    Cost cost = d.exit_cost;
    cost += problem.entry(q.block, problem.local_index(nodes.front()))->cost;
    for (std::size_t i = 1; i < nodes.size(); ++i) cost += problem.arc_between(nodes[i - 1], nodes[i])->cost;
    out.push_back(RcsppResult{Subpath{q.block, std::move(nodes), cost, std::move(d.path)}, d.rc});
  }
  return out;
}

/// Full box [static lower, static upper] of a block.
inline RcsppQuery full_box_query(const NestedProblem& problem, std::size_t block) {
  RcsppQuery q;
  q.block = block;
  q.lo = problem.bounds(block).lower;
  q.hi = problem.bounds(block).upper;
  return q;
}

/// Every feasible elementary subpath of a block, in depth-first order.
inline std::vector<Subpath> enumerate_block_subpaths(const NestedProblem& problem, std::size_t block,
                                                     std::size_t cap, const std::vector<bool>* forbidden = nullptr) {
  const auto& blk = problem.block(block);
  const auto m = blk.resources.size();
  const auto dim = problem.path_dim();
  std::vector<Subpath> out;
  std::vector<ElementId> nodes;
  std::vector<bool> on_path(problem.element_count(), false);

  struct Frame {
    IntVec sub;
    IntVec path;
    Cost cost;
  };

  auto step = [&](const Frame& f, ElementId to, Cost c, const IntVec& sd, const IntVec& pd) -> std::optional<Frame> {
    Frame g = f;
    g.cost += c;
    for (std::size_t r = 0; r < m; ++r) {
      const auto& res = blk.resources[r];
      const auto w = res.window(to);
      Value v = g.sub[r] + sd[r];
      if (res.floor_at_lower) v = std::max(v, w.lo);
      if (!w.contains(v)) return std::nullopt;
      g.sub[r] = v;
    }
    for (std::size_t c2 = 0; c2 < dim; ++c2) g.path[c2] += pd[c2];
    return g;
  };

  auto dfs = [&](auto&& self, const Frame& f) -> void {
    const ElementId last = nodes.back();
    if (const auto* xa = problem.exit(block, problem.local_index(last))) {
      if (out.size() >= cap) throw CapacityExceeded("subpath enumeration exceeded its cap");
      IntVec p = f.path;
      for (std::size_t c = 0; c < dim; ++c) p[c] += xa->path_delta[c];
      out.push_back(Subpath{block, nodes, f.cost + xa->cost, std::move(p)});
    }
    for (std::size_t a : problem.out_arcs(block, problem.local_index(last))) {
      const auto& arc = blk.arcs[a];
      if (on_path[arc.to] || (forbidden && (*forbidden)[arc.to])) continue;
      auto g = step(f, arc.to, arc.cost, arc.sub_delta, arc.path_delta);
      if (!g) continue;
      nodes.push_back(arc.to);
      on_path[arc.to] = true;
      self(self, *g);
      on_path[arc.to] = false;
      nodes.pop_back();
    }
  };

  for (std::size_t j = 0; j < blk.elements.size(); ++j) {
    const ElementId e = blk.elements[j];
    const auto* ea = problem.entry(block, j);
    if (!ea || (forbidden && (*forbidden)[e])) continue;
    auto f = step(Frame{IntVec(m, 0), IntVec(dim, 0), 0}, e, ea->cost, ea->sub_delta, ea->path_delta);
    if (!f) continue;
    nodes.push_back(e);
    on_path[e] = true;
    dfs(dfs, *f);
    on_path[e] = false;
    nodes.pop_back();
  }
  return out;
}

}  // namespace nestcg
