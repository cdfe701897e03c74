#pragma once

// Path-level pricing: pessimistic and optimistic searches over the bucket
// graph, the adaptive refinement loop and the two-stage enumerative pricer.

#include <chrono>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "nestcg/buckets.hpp"
#include "nestcg/labeling.hpp"
#include "nestcg/model.hpp"

namespace nestcg {

inline constexpr double kDefaultEps = 1e-6;
inline constexpr std::size_t kDefaultTopK = 500;

enum class PricingStatus { columns_found, proven_optimal };

inline const char* to_string(PricingStatus s) {
  return s == PricingStatus::columns_found ? "columns_found" : "proven_optimal";
}

struct TraceEntry {
  std::size_t iteration = 0;
  std::string stage;  // "stale", "fresh", "refine"
  double pes_bound = kInfinity;
  std::optional<double> opt_bound;
  std::vector<std::size_t> buckets_per_block;
  std::size_t representative_solves = 0;
  std::size_t refinements = 0;
  std::size_t merges = 0;
};

inline nlohmann::json to_json(const TraceEntry& t) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(v > 0 ? "inf" : "-inf"); };
  return nlohmann::json{{"iteration", t.iteration},
                        {"stage", t.stage},
                        {"pes_bound", num(t.pes_bound)},
                        {"opt_bound", t.opt_bound ? num(*t.opt_bound) : nlohmann::json(nullptr)},
                        {"buckets_per_block", t.buckets_per_block},
                        {"representative_solves", t.representative_solves},
                        {"refinements", t.refinements},
                        {"merges", t.merges}};
}

struct PhaseTimes {
  double fill = 0.0;  // representative computation
  double pessimistic = 0.0;
  double optimistic = 0.0;
  double merge = 0.0;

  PhaseTimes& operator+=(const PhaseTimes& o) {
    fill += o.fill;
    pessimistic += o.pessimistic;
    optimistic += o.optimistic;
    merge += o.merge;
    return *this;
  }
  [[nodiscard]] double total() const { return fill + pessimistic + optimistic + merge; }
};

struct PricingOutcome {
  std::vector<Path> columns;
  double pes_bound = kInfinity;
  /// -inf when the optimistic step did not run.
  double opt_bound = -kInfinity;
  std::size_t refinements = 0;
  std::size_t representative_solves = 0;
  std::size_t merges = 0;
  PricingStatus status = PricingStatus::proven_optimal;
  /// Columns came from stale representatives.
  bool stale = false;
  std::vector<TraceEntry> trace;
  PhaseTimes times;

  /// Best reduced cost found (equals the minimum when bounds have met).
  [[nodiscard]] double min_rcost() const { return pes_bound; }
};

// ---------------------------------------------------------------------------
// Layer search: choose one node per block, aggregate path resources, keep
// feasible combinations. Hub nodes between blocks let labels merge.

struct LayerItem {
  double rcost = 0.0;
  const IntVec* vec = nullptr;
};

struct LayerChoice {
  double rcost = 0.0;
  std::vector<std::size_t> picks;  // item index per layer
  IntVec aggregate;
};

inline std::vector<LayerChoice> layer_search(const NestedProblem& problem,
                                             const std::vector<std::vector<LayerItem>>& layers, std::size_t top_k,
                                             bool use_dominance = true) {
  const auto n = layers.size();
  LayeredDag dag;
  std::vector<std::size_t> hub(n + 1);
  std::vector<std::pair<std::size_t, std::size_t>> item_of;  // tag -> (layer, item)
  hub[0] = dag.add_node(0);
  std::vector<std::vector<std::size_t>> node_id(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < layers[i].size(); ++j) node_id[i].push_back(dag.add_node(2 * i + 1));
    hub[i + 1] = dag.add_node(2 * i + 2);
    for (std::size_t j = 0; j < layers[i].size(); ++j) {
      dag.add_arc(hub[i], node_id[i][j], layers[i][j].rcost, item_of.size());
      item_of.emplace_back(i, j);
      dag.add_arc(node_id[i][j], hub[i + 1], 0.0, static_cast<std::size_t>(-1));
    }
  }
  auto results = label_search(
      dag, hub[0], hub[n], problem.aggregate_start(),
      [&](const IntVec& s, const DagArc& arc) -> std::optional<IntVec> {
        if (arc.tag == static_cast<std::size_t>(-1)) return s;
        const auto [i, j] = item_of[arc.tag];
        IntVec next = s;
        problem.aggregate_into(next, *layers[i][j].vec);
        if (problem.prunable(next)) return std::nullopt;
        return next;
      },
      [](const IntVec& a, const IntVec& b) {
        for (std::size_t c = 0; c < a.size(); ++c)
          if (a[c] > b[c]) return false;
        return true;
      },
      [&](const IntVec& s) { return problem.aggregate_feasible(s); }, top_k, use_dominance);

  std::vector<LayerChoice> out;
  for (auto& r : results) {
    LayerChoice c;
    c.rcost = r.rcost;
    c.aggregate = std::move(r.state);
    for (std::size_t a : r.arcs) {
      const auto tag = dag.arc(a).tag;
      if (tag != static_cast<std::size_t>(-1)) c.picks.push_back(item_of[tag].second);
    }
    out.push_back(std::move(c));
  }
  return out;
}

struct PessimisticResult {
  double bound = kInfinity;  // includes the per-path dual
  std::vector<Path> paths;   // negative reduced cost, deduplicated
};

struct OptimisticResult {
  double bound = kInfinity;
  std::vector<std::size_t> sequence;  // bucket index per block
};

namespace detail {

inline Path assemble_path(const NestedProblem& problem, std::vector<Subpath> subpaths) {
  Path p;
  p.aggregate = problem.aggregate_start();
  for (const auto& s : subpaths) {
    p.cost += s.cost;
    problem.aggregate_into(p.aggregate, s.contribution);
  }
  p.subpaths = std::move(subpaths);
  return p;
}

/// Best choice first; the top-k search only when that choice is negative.
template <class Decode>
PessimisticResult price_layers(const NestedProblem& problem, const std::vector<std::vector<LayerItem>>& layers,
                               double per_path, std::size_t top_k, double eps, Decode&& decode) {
  PessimisticResult out;
  auto best = layer_search(problem, layers, 1);
  if (best.empty()) return out;
  out.bound = best.front().rcost - per_path;
  if (out.bound >= -eps) return out;
  auto all = top_k > 1 ? layer_search(problem, layers, top_k) : best;
  std::set<std::vector<ElementId>> seen;
  for (const auto& c : all) {
    if (c.rcost - per_path >= -eps) break;
    Path p = assemble_path(problem, decode(c.picks));
    if (!seen.insert(p.elements()).second) continue;
    out.paths.push_back(std::move(p));
  }
  return out;
}

}  // namespace detail

/// Minimum reduced cost path through the bucket graph with true
/// representative contributions; every returned path is feasible.
inline PessimisticResult pessimistic_price(const NestedProblem& problem, const Partition& partition,
                                           const BucketGraph& g, const Duals& duals, std::size_t top_k,
                                           double eps = kDefaultEps) {
  if (g.empty_block) return {};
  std::vector<std::vector<LayerItem>> layers(g.layers.size());
  for (std::size_t i = 0; i < g.layers.size(); ++i)
    for (const auto& node : g.layers[i]) layers[i].push_back(LayerItem{node.rcost, &node.contribution});
  return detail::price_layers(problem, layers, duals.per_path, top_k, eps, [&](const std::vector<std::size_t>& picks) {
    std::vector<Subpath> subs;
    for (std::size_t i = 0; i < picks.size(); ++i)
      subs.push_back(partition.buckets[i][g.layers[i][picks[i]].bucket].rep->subpath);
    return subs;
  });
}

/// Same search with each contribution replaced by its bucket's lower corner:
/// a lower bound on the minimum reduced cost over all feasible paths.
inline OptimisticResult optimistic_price(const NestedProblem& problem, const BucketGraph& g, const Duals& duals) {
  OptimisticResult out;
  if (g.empty_block) return out;
  std::vector<std::vector<LayerItem>> layers(g.layers.size());
  for (std::size_t i = 0; i < g.layers.size(); ++i)
    for (const auto& node : g.layers[i]) layers[i].push_back(LayerItem{node.rcost, &node.lo});
  auto best = layer_search(problem, layers, 1);
  if (best.empty()) return out;
  out.bound = best.front().rcost - duals.per_path;
  for (std::size_t i = 0; i < best.front().picks.size(); ++i)
    out.sequence.push_back(g.layers[i][best.front().picks[i]].bucket);
  return out;
}

// ---------------------------------------------------------------------------

struct AdaptiveConfig {
  IntVec widths{250};
  RefineStrategy strategy = RefineStrategy::representative;
  bool reuse = false;
  bool merge = false;
  MergeCriterion criterion = MergeCriterion::automatic;
  std::size_t top_k = kDefaultTopK;
  double eps = kDefaultEps;
  /// Keep refining until the two bounds meet, so pes_bound is the exact minimum.
  bool exact_minimum = false;
  std::size_t max_refinements = 1'000'000;
};

class AdaptivePricer {
 public:
  AdaptivePricer(const NestedProblem& problem, AdaptiveConfig config)
      : problem_(&problem), config_(std::move(config)), partition_(init_partition(problem, config_.widths)) {}

  [[nodiscard]] const Partition& partition() const { return partition_; }
  [[nodiscard]] const AdaptiveConfig& config() const { return config_; }
  [[nodiscard]] std::uint64_t epoch() const { return epoch_; }

  /// Elements no column may visit from now on. Filters may only grow; a
  /// shrinking filter resets emptiness marks.
  void set_forbidden(std::vector<bool> forbidden) {
    bool grows = forbidden_.empty() || forbidden_.size() == forbidden.size();
    if (grows && !forbidden_.empty())
      for (std::size_t e = 0; e < forbidden_.size(); ++e)
        if (forbidden_[e] && !forbidden[e]) grows = false;
    forbidden_ = std::move(forbidden);
    for (auto& block : partition_.buckets)
      for (auto& b : block) {
        if (!grows && b.status == BucketStatus::empty) b.status = BucketStatus::fresh;
        // Representatives that now visit a forbidden element are dropped.
        if (b.rep)
          for (ElementId e : b.rep->subpath.nodes)
            if (forbidden_[e]) {
              b.rep.reset();
              b.status = BucketStatus::fresh;
              break;
            }
      }
  }

  PricingOutcome price(const Duals& duals) {
    using clock = std::chrono::steady_clock;
    auto secs = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
    ++epoch_;
    PricingOutcome out;
    std::size_t iteration = 0;

    auto snapshot = [&](const char* stage, double pes, std::optional<double> opt) {
      TraceEntry t;
      t.iteration = iteration;
      t.stage = stage;
      t.pes_bound = pes;
      t.opt_bound = opt;
      for (const auto& b : partition_.buckets) t.buckets_per_block.push_back(b.size());
      t.representative_solves = out.representative_solves;
      t.refinements = out.refinements;
      t.merges = out.merges;
      out.trace.push_back(std::move(t));
    };

    if (config_.reuse && epoch_ > 1) {
      auto t0 = clock::now();
      auto g = build_bucket_graph(partition_, epoch_, &duals);
      auto pes = pessimistic_price(*problem_, partition_, g, duals, config_.top_k, config_.eps);
      out.times.pessimistic += secs(t0, clock::now());
      snapshot("stale", pes.bound, std::nullopt);
      if (!pes.paths.empty()) {
        out.columns = std::move(pes.paths);
        out.pes_bound = pes.bound;
        out.status = PricingStatus::columns_found;
        out.stale = true;
        return out;
      }
    }

    while (true) {
      ++iteration;
      auto t0 = clock::now();
      fill(duals, out);
      auto t1 = clock::now();
      out.times.fill += secs(t0, t1);
      auto g = build_bucket_graph(partition_, epoch_);
      auto pes = pessimistic_price(*problem_, partition_, g, duals, config_.top_k, config_.eps);
      auto t2 = clock::now();
      out.times.pessimistic += secs(t1, t2);
      out.pes_bound = pes.bound;

      if (!config_.exact_minimum && pes.bound < -config_.eps) {
        snapshot("fresh", pes.bound, std::nullopt);
        out.columns = std::move(pes.paths);
        out.status = PricingStatus::columns_found;
        return out;
      }
      auto opt = optimistic_price(*problem_, g, duals);
      out.times.optimistic += secs(t2, clock::now());
      out.opt_bound = opt.bound;
      snapshot("fresh", pes.bound, opt.bound);

      const bool closed = config_.exact_minimum ? bounds_met(opt.bound, pes.bound) : opt.bound >= -config_.eps;
      if (closed) {
        if (pes.bound < -config_.eps) {
          out.columns = std::move(pes.paths);
          out.status = PricingStatus::columns_found;
        } else {
          out.status = PricingStatus::proven_optimal;
        }
        return out;
      }

      if (out.refinements >= config_.max_refinements) throw InvariantFailure("refinement limit reached");
      refine(partition_, opt.sequence, config_.strategy);
      ++out.refinements;

      if (config_.merge) {
        auto t3 = clock::now();
        fill(duals, out);
        auto t4 = clock::now();
        out.times.fill += secs(t3, t4);
        const double target = (config_.exact_minimum ? pes.bound : 0.0) + duals.per_path;
        if (std::isfinite(target))
          out.merges += merge_pass(*problem_, partition_, epoch_, config_.criterion, 64, target).merges;
        out.times.merge += secs(t4, clock::now());
      }
    }
  }

 private:
  static bool bounds_met(double opt, double pes) {
    if (opt == pes) return true;
    if (!std::isfinite(opt) || !std::isfinite(pes)) return false;
    return pes - opt <= 1e-9 * std::max(1.0, std::abs(pes));
  }

  void fill(const Duals& duals, PricingOutcome& out) {
    const auto* forbidden = forbidden_.empty() ? nullptr : &forbidden_;
    for (auto& block : partition_.buckets)
      for (auto& b : block) {
        if (b.status == BucketStatus::empty || b.current(epoch_)) continue;
        compute_representative(*problem_, b, duals, epoch_, forbidden);
        ++out.representative_solves;
      }
  }

  const NestedProblem* problem_;
  AdaptiveConfig config_;
  Partition partition_;
  std::vector<bool> forbidden_;
  std::uint64_t epoch_ = 0;
};

/// One-shot adaptive pricing from a fresh partition.
inline PricingOutcome adaptive_price(const NestedProblem& problem, const Duals& duals, const AdaptiveConfig& config) {
  AdaptivePricer pricer(problem, config);
  return pricer.price(duals);
}

// ---------------------------------------------------------------------------

struct ScoredSubpath {
  const Subpath* subpath = nullptr;
  double rcost = 0.0;
};

/// Subpaths not dominated in (reduced cost, contribution); among identical
/// pairs the lexicographically smallest node sequence is kept.
inline std::vector<ScoredSubpath> nondominated(std::vector<ScoredSubpath> items) {
  std::sort(items.begin(), items.end(), [](const ScoredSubpath& a, const ScoredSubpath& b) {
    return std::tie(a.rcost, a.subpath->contribution, a.subpath->nodes) <
           std::tie(b.rcost, b.subpath->contribution, b.subpath->nodes);
  });
  std::vector<ScoredSubpath> kept;
  for (const auto& s : items) {
    bool dominated = false;
    for (const auto& k : kept) {
      if (k.rcost > s.rcost) continue;
      bool leq = true;
      for (std::size_t c = 0; c < s.subpath->contribution.size(); ++c)
        if (k.subpath->contribution[c] > s.subpath->contribution[c]) leq = false;
      if (leq) {
        dominated = true;
        break;
      }
    }
    if (!dominated) kept.push_back(s);
  }
  return kept;
}

struct EnumerativeConfig {
  std::size_t top_k = kDefaultTopK;
  double eps = kDefaultEps;
  std::size_t subpath_cap = 200'000;
};

/// Stage 1 enumerates every feasible subpath once (dual independent) and
/// filters the non-dominated ones per call; stage 2 combines them.
class EnumerativePricer {
 public:
  EnumerativePricer(const NestedProblem& problem, EnumerativeConfig config = {})
      : problem_(&problem), config_(config) {}

  void set_forbidden(std::vector<bool> forbidden) {
    forbidden_ = std::move(forbidden);
    cache_.clear();
  }

  [[nodiscard]] std::size_t subpath_count() {
    ensure_cache();
    std::size_t n = 0;
    for (const auto& b : cache_) n += b.size();
    return n;
  }

  PricingOutcome price(const Duals& duals) {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    ensure_cache();
    PricingOutcome out;
    std::vector<std::vector<ScoredSubpath>> kept(cache_.size());
    for (std::size_t i = 0; i < cache_.size(); ++i) {
      std::vector<ScoredSubpath> scored;
      scored.reserve(cache_[i].size());
      for (const auto& s : cache_[i]) scored.push_back(ScoredSubpath{&s, reduced_cost(s, duals)});
      kept[i] = nondominated(std::move(scored));
    }
    auto t1 = clock::now();
    out.times.fill = std::chrono::duration<double>(t1 - t0).count();

    std::vector<std::vector<LayerItem>> layers(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (const auto& s : kept[i]) layers[i].push_back(LayerItem{s.rcost, &s.subpath->contribution});
    auto pes = detail::price_layers(*problem_, layers, duals.per_path, config_.top_k, config_.eps,
                                    [&](const std::vector<std::size_t>& picks) {
                                      std::vector<Subpath> subs;
                                      for (std::size_t i = 0; i < picks.size(); ++i)
                                        subs.push_back(*kept[i][picks[i]].subpath);
                                      return subs;
                                    });
    out.times.pessimistic = std::chrono::duration<double>(clock::now() - t1).count();
    out.pes_bound = pes.bound;
    out.opt_bound = pes.bound;
    out.columns = std::move(pes.paths);
    out.status = out.columns.empty() ? PricingStatus::proven_optimal : PricingStatus::columns_found;
    return out;
  }

 private:
  void ensure_cache() {
    if (!cache_.empty()) return;
    const auto* forbidden = forbidden_.empty() ? nullptr : &forbidden_;
    std::size_t total = 0;
    for (std::size_t i = 0; i < problem_->block_count(); ++i) {
      cache_.push_back(enumerate_block_subpaths(*problem_, i, config_.subpath_cap - total, forbidden));
      total += cache_.back().size();
    }
  }

  const NestedProblem* problem_;
  EnumerativeConfig config_;
  std::vector<bool> forbidden_;
  std::vector<std::vector<Subpath>> cache_;
};

inline PricingOutcome enumerative_price(const NestedProblem& problem, const Duals& duals,
                                        const EnumerativeConfig& config = {}) {
  EnumerativePricer pricer(problem, config);
  return pricer.price(duals);
}

}  // namespace nestcg
