#pragma once

// Bucket partitions of the path-resource space, bucket representatives,
// refinement, merging and the layered bucket graph.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include <json.hpp>

#include "nestcg/labeling.hpp"
#include "nestcg/model.hpp"

namespace nestcg {

enum class BucketStatus { fresh, computed, empty };
enum class RefineStrategy { midpoint, representative };
enum class MergeCriterion { exact, shortest_path, automatic };

inline const char* to_string(BucketStatus s) {
  switch (s) {
    case BucketStatus::fresh: return "fresh";
    case BucketStatus::computed: return "computed";
    case BucketStatus::empty: return "empty";
  }
  return "?";
}

struct Representative {
  Subpath subpath;
  double rcost = 0.0;
  /// Pricing epoch (dual vector) the representative was optimal for.
  std::uint64_t epoch = 0;
};

struct Bucket {
  std::size_t block = 0;
  IntVec lo;
  IntVec hi;
  BucketStatus status = BucketStatus::fresh;
  std::optional<Representative> rep;

  [[nodiscard]] bool contains(std::span<const Value> t) const {
    for (std::size_t c = 0; c < lo.size(); ++c)
      if (t[c] < lo[c] || t[c] > hi[c]) return false;
    return true;
  }
  [[nodiscard]] bool singleton() const { return lo == hi; }
  [[nodiscard]] bool current(std::uint64_t epoch) const {
    return status == BucketStatus::computed && rep && rep->epoch == epoch;
  }
};

inline Value floor_div(Value a, Value b) {
  Value q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

/// Every box formed by picking one interval per coordinate, first coordinate slowest.
inline std::vector<std::pair<IntVec, IntVec>> cartesian_boxes(
    const std::vector<std::vector<std::pair<Value, Value>>>& parts) {
  std::vector<std::pair<IntVec, IntVec>> out{{IntVec{}, IntVec{}}};
  for (const auto& axis : parts) {
    std::vector<std::pair<IntVec, IntVec>> next;
    for (const auto& [lo, hi] : out)
      for (const auto& [a, b] : axis) {
        auto l = lo, h = hi;
        l.push_back(a);
        h.push_back(b);
        next.emplace_back(std::move(l), std::move(h));
      }
    out = std::move(next);
  }
  return out;
}

struct Partition {
  /// Initial box per block; `box_empty` marks blocks without any admissible contribution.
  std::vector<IntVec> box_lo;
  std::vector<IntVec> box_hi;
  std::vector<bool> box_empty;
  /// Buckets per block, kept in lo-lexicographic order.
  std::vector<std::vector<Bucket>> buckets;

  [[nodiscard]] std::size_t block_count() const { return buckets.size(); }
  [[nodiscard]] std::size_t bucket_count() const {
    std::size_t n = 0;
    for (const auto& b : buckets) n += b.size();
    return n;
  }

  void sort_block(std::size_t i) {
    std::stable_sort(buckets[i].begin(), buckets[i].end(), [](const Bucket& a, const Bucket& b) { return a.lo < b.lo; });
  }

  /// Index of the bucket whose box contains `t`, if any.
  [[nodiscard]] std::optional<std::size_t> locate(std::size_t block, std::span<const Value> t) const {
    for (std::size_t j = 0; j < buckets[block].size(); ++j)
      if (buckets[block][j].contains(t)) return j;
    return std::nullopt;
  }

  /// Buckets of every block are pairwise disjoint and tile the initial box.
  [[nodiscard]] bool sound() const {
    for (std::size_t i = 0; i < buckets.size(); ++i) {
      const auto& bs = buckets[i];
      if (box_empty[i]) {
        if (!bs.empty()) return false;
        continue;
      }
      __int128 total = 0;
      for (std::size_t a = 0; a < bs.size(); ++a) {
        __int128 vol = 1;
        for (std::size_t c = 0; c < bs[a].lo.size(); ++c) {
          if (bs[a].lo[c] > bs[a].hi[c] || bs[a].lo[c] < box_lo[i][c] || bs[a].hi[c] > box_hi[i][c]) return false;
          vol *= static_cast<__int128>(bs[a].hi[c] - bs[a].lo[c] + 1);
        }
        total += vol;
        for (std::size_t b = a + 1; b < bs.size(); ++b) {
          bool overlap = true;
          for (std::size_t c = 0; c < bs[a].lo.size(); ++c)
            if (bs[a].hi[c] < bs[b].lo[c] || bs[b].hi[c] < bs[a].lo[c]) overlap = false;
          if (overlap) return false;
        }
      }
      __int128 box = 1;
      for (std::size_t c = 0; c < box_lo[i].size(); ++c) box *= static_cast<__int128>(box_hi[i][c] - box_lo[i][c] + 1);
      if (total != box) return false;
    }
    return true;
  }
};

/// Box of admissible contributions for a block: static arc bounds tightened by
/// the cap each path-resource predicate implies given the other blocks' lower bounds.
inline std::pair<IntVec, IntVec> admissible_box(const NestedProblem& problem, std::size_t block) {
  IntVec lo = problem.bounds(block).lower;
  IntVec hi = problem.bounds(block).upper;
  for (std::size_t r = 0; r < problem.path_resources().size(); ++r) {
    const auto& pr = problem.path_resources()[r];
    const auto off = problem.offset(r);
    for (std::size_t c = 0; c < pr.dim; ++c) {
      if (pr.coeff[c] == 0) continue;
      __int128 rest = 0;
      for (std::size_t c2 = 0; c2 < pr.dim; ++c2) {
        if (pr.coeff[c2] == 0) continue;
        if (pr.aggregator == Aggregator::sum) {
          for (std::size_t j = 0; j < problem.block_count(); ++j) {
            if (j == block && c2 == c) continue;
            rest += static_cast<__int128>(pr.coeff[c2]) * problem.bounds(j).lower[off + c2];
          }
        } else if (c2 != c) {
          Value mx = kValueMin;
          for (std::size_t j = 0; j < problem.block_count(); ++j) mx = std::max(mx, problem.bounds(j).lower[off + c2]);
          rest += static_cast<__int128>(pr.coeff[c2]) * mx;
        }
      }
      const __int128 room = static_cast<__int128>(pr.bound) - rest;
      __int128 cap = room / pr.coeff[c];
      if (room % pr.coeff[c] != 0 && room < 0) --cap;
      if (cap < static_cast<__int128>(hi[off + c])) hi[off + c] = static_cast<Value>(std::max<__int128>(cap, kValueMin));
    }
  }
  return {lo, hi};
}

/// Tiles each block's admissible box with boxes of the given widths (one per
/// coordinate, or a single width for all); the last tile absorbs the remainder.
inline Partition init_partition(const NestedProblem& problem, const IntVec& widths) {
  const auto dim = problem.path_dim();
  IntVec w = widths;
  if (w.size() == 1 && dim > 1) w.assign(dim, widths[0]);
  if (w.size() != dim) throw InvalidInput("need one bucket width per path-resource coordinate");
  for (Value x : w)
    if (x <= 0) throw InvalidInput("bucket widths must be positive");

  Partition p;
  const auto n = problem.block_count();
  p.box_lo.resize(n);
  p.box_hi.resize(n);
  p.box_empty.assign(n, false);
  p.buckets.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto [lo, hi] = admissible_box(problem, i);
    p.box_lo[i] = lo;
    p.box_hi[i] = hi;
    for (std::size_t c = 0; c < dim; ++c)
      if (lo[c] > hi[c]) p.box_empty[i] = true;
    if (p.box_empty[i]) continue;

    std::vector<std::vector<std::pair<Value, Value>>> tiles(dim);
    for (std::size_t c = 0; c < dim; ++c) {
      const __int128 span = static_cast<__int128>(hi[c]) - lo[c] + 1;
      const auto count = std::max<__int128>(1, span / w[c]);
      for (__int128 t = 0; t < count; ++t) {
        const Value a = static_cast<Value>(lo[c] + t * w[c]);
        const Value b = t + 1 == count ? hi[c] : static_cast<Value>(a + w[c] - 1);
        tiles[c].emplace_back(a, b);
      }
    }
    for (auto& [blo, bhi] : cartesian_boxes(tiles)) {
      Bucket b;
      b.block = i;
      b.lo = std::move(blo);
      b.hi = std::move(bhi);
      p.buckets[i].push_back(std::move(b));
    }
    p.sort_block(i);
  }
  return p;
}

/// Recomputes the representative of a bucket for the given duals. A bucket
/// found empty stays empty: emptiness does not depend on duals, and filters
/// only ever grow within one pricer.
inline void compute_representative(const NestedProblem& problem, Bucket& bucket, const Duals& duals,
                                   std::uint64_t epoch, const std::vector<bool>* forbidden = nullptr) {
  if (bucket.status == BucketStatus::empty) throw InvariantFailure("representative requested for an empty bucket");
  RcsppQuery q;
  q.block = bucket.block;
  q.lo = bucket.lo;
  q.hi = bucket.hi;
  q.forbidden = forbidden;
  auto res = elementary_rcspp(problem, duals, q);
  if (res.empty()) {
    bucket.status = BucketStatus::empty;
    bucket.rep.reset();
    return;
  }
  bucket.status = BucketStatus::computed;
  bucket.rep = Representative{std::move(res.front().subpath), res.front().rcost, epoch};
}

/// Splits every non-singleton bucket in `sequence` (one bucket index per block)
/// along all coordinates where lo < hi. Returns the number of buckets split.
inline std::size_t refine(Partition& partition, const std::vector<std::size_t>& sequence, RefineStrategy strategy) {
  if (sequence.size() != partition.block_count()) throw InvalidInput("refine needs one bucket per block");
  std::size_t split = 0;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    auto& bs = partition.buckets[i];
    if (sequence[i] >= bs.size()) throw InvalidInput("bucket index out of range");
    const Bucket old = bs[sequence[i]];
    if (old.singleton()) continue;
    const auto dim = old.lo.size();
    std::vector<std::vector<std::pair<Value, Value>>> parts(dim);
    for (std::size_t c = 0; c < dim; ++c) {
      const Value lo = old.lo[c], hi = old.hi[c];
      if (lo == hi) {
        parts[c].emplace_back(lo, hi);
        continue;
      }
      Value cut = floor_div(lo + hi, 2) + 1;  // first value of the upper half
      if (strategy == RefineStrategy::representative && old.rep) {
        const Value t = old.rep->subpath.contribution[c];
        if (t > lo && t <= hi) cut = t;
      }
      parts[c].emplace_back(lo, cut - 1);
      parts[c].emplace_back(cut, hi);
    }
    std::vector<Bucket> pieces;
    for (auto& [blo, bhi] : cartesian_boxes(parts)) {
      Bucket b;
      b.block = i;
      b.lo = std::move(blo);
      b.hi = std::move(bhi);
      if (old.rep && b.contains(old.rep->subpath.contribution)) {
        b.status = old.status;
        b.rep = old.rep;
      }
      pieces.push_back(std::move(b));
    }
    bs.erase(bs.begin() + static_cast<std::ptrdiff_t>(sequence[i]));
    bs.insert(bs.end(), pieces.begin(), pieces.end());
    partition.sort_block(i);
    ++split;
  }
  if (split == 0) throw InvariantFailure("refinement found no splittable bucket on the optimistic path");
  return split;
}

// ---------------------------------------------------------------------------
// Bucket graph.

struct BucketNode {
  std::size_t bucket = 0;  // index into partition.buckets[block]
  double rcost = 0.0;
  IntVec contribution;  // true contribution of the representative
  IntVec lo;
};

struct BucketGraph {
  std::vector<std::vector<BucketNode>> layers;
  /// Some block has no usable bucket: no path exists.
  bool empty_block = false;

  [[nodiscard]] std::size_t node_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.size();
    return n;
  }
  /// Arcs of the fully connected layered graph, source and sink arcs included.
  [[nodiscard]] std::size_t logical_arc_count() const {
    if (layers.empty()) return 0;
    std::size_t a = layers.front().size() + layers.back().size();
    for (std::size_t i = 0; i + 1 < layers.size(); ++i) a += layers[i].size() * layers[i + 1].size();
    return a;
  }
};

/// One node per bucket carrying a representative. With `reprice` set, stale
/// representatives get their reduced cost recomputed under those duals;
/// otherwise only representatives of `epoch` are used.
inline BucketGraph build_bucket_graph(const Partition& partition, std::uint64_t epoch, const Duals* reprice = nullptr) {
  BucketGraph g;
  g.layers.resize(partition.block_count());
  for (std::size_t i = 0; i < partition.block_count(); ++i) {
    const auto& bs = partition.buckets[i];
    for (std::size_t j = 0; j < bs.size(); ++j) {
      const auto& b = bs[j];
      if (b.status != BucketStatus::computed || !b.rep) continue;
      double rc = b.rep->rcost;
      if (b.rep->epoch != epoch) {
        if (!reprice) continue;
        rc = reduced_cost(b.rep->subpath, *reprice);
      }
      g.layers[i].push_back(BucketNode{j, rc, b.rep->subpath.contribution, b.lo});
    }
    if (g.layers[i].empty()) g.empty_block = true;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Optimistic value through a node, used by the merge criteria.

struct ValueLabel {
  double rc;
  IntVec agg;
};

/// Pareto-minimal (rc, aggregate) labels of partial optimistic paths before
/// each block (forward) and after each block (backward).
struct OptimisticProfile {
  std::vector<std::vector<ValueLabel>> forward;   // forward[i]: blocks < i
  std::vector<std::vector<ValueLabel>> backward;  // backward[i]: blocks >= i
};

namespace detail {

inline void pareto_insert(std::vector<ValueLabel>& set, ValueLabel cand) {
  auto leq = [](const IntVec& a, const IntVec& b) {
    for (std::size_t c = 0; c < a.size(); ++c)
      if (a[c] > b[c]) return false;
    return true;
  };
  for (const auto& l : set)
    if (l.rc <= cand.rc && leq(l.agg, cand.agg)) return;
  std::erase_if(set, [&](const ValueLabel& l) { return cand.rc <= l.rc && leq(cand.agg, l.agg); });
  set.push_back(std::move(cand));
}

}  // namespace detail

inline OptimisticProfile optimistic_profile(const NestedProblem& problem, const BucketGraph& g) {
  const auto n = g.layers.size();
  OptimisticProfile p;
  p.forward.resize(n + 1);
  p.backward.resize(n + 1);
  p.forward[0].push_back(ValueLabel{0.0, problem.aggregate_start()});
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& f : p.forward[i])
      for (const auto& node : g.layers[i]) {
        ValueLabel l{f.rc + node.rcost, f.agg};
        problem.aggregate_into(l.agg, node.lo);
        if (problem.prunable(l.agg)) continue;
        detail::pareto_insert(p.forward[i + 1], std::move(l));
      }
  p.backward[n].push_back(ValueLabel{0.0, problem.aggregate_start()});
  for (std::size_t i = n; i-- > 0;)
    for (const auto& b : p.backward[i + 1])
      for (const auto& node : g.layers[i]) {
        ValueLabel l{b.rc + node.rcost, b.agg};
        problem.aggregate_into(l.agg, node.lo);
        if (problem.prunable(l.agg)) continue;
        detail::pareto_insert(p.backward[i], std::move(l));
      }
  return p;
}

/// Minimum optimistic reduced cost over paths using a node with the given
/// (lo, rc) in block `block`; +inf if no feasible path uses it.
inline double optimistic_through(const NestedProblem& problem, const OptimisticProfile& p, std::size_t block,
                                 const IntVec& lo, double rc) {
  double best = kInfinity;
  for (const auto& f : p.forward[block]) {
    IntVec agg = f.agg;
    problem.aggregate_into(agg, lo);
    for (const auto& b : p.backward[block + 1]) {
      IntVec full = agg;
      problem.aggregate_into(full, b.agg);
      if (!problem.aggregate_feasible(full)) continue;
      best = std::min(best, f.rc + rc + b.rc);
    }
  }
  return best;
}

/// Resource-free lower bound on the same quantity.
inline double shortest_through(const OptimisticProfile& p, std::size_t block, double rc) {
  if (p.forward[block].empty() || p.backward[block + 1].empty()) return kInfinity;
  double f = kInfinity, b = kInfinity;
  for (const auto& l : p.forward[block]) f = std::min(f, l.rc);
  for (const auto& l : p.backward[block + 1]) b = std::min(b, l.rc);
  return f + rc + b;
}

/// Unconstrained min-rc prefix/suffix sums, used by the shortest-path criterion.
inline OptimisticProfile shortest_profile(const BucketGraph& g) {
  const auto n = g.layers.size();
  OptimisticProfile p;
  p.forward.resize(n + 1);
  p.backward.resize(n + 1);
  p.forward[0].push_back(ValueLabel{0.0, {}});
  for (std::size_t i = 0; i < n; ++i) {
    if (p.forward[i].empty() || g.layers[i].empty()) continue;
    double best = kInfinity;
    for (const auto& node : g.layers[i]) best = std::min(best, node.rcost);
    p.forward[i + 1].push_back(ValueLabel{p.forward[i][0].rc + best, {}});
  }
  p.backward[n].push_back(ValueLabel{0.0, {}});
  for (std::size_t i = n; i-- > 0;) {
    if (p.backward[i + 1].empty() || g.layers[i].empty()) continue;
    double best = kInfinity;
    for (const auto& node : g.layers[i]) best = std::min(best, node.rcost);
    p.backward[i].push_back(ValueLabel{p.backward[i + 1][0].rc + best, {}});
  }
  return p;
}

struct MergeStats {
  std::size_t merges = 0;
  std::size_t evaluated = 0;
};

/// Greedy merge of adjacent bucket pairs whose union cannot create an
/// optimistic path whose summed representative reduced cost is below `target`
/// (the per-path dual for the column search). Buckets must carry
/// representatives of `epoch` (or be empty).
inline MergeStats merge_pass(const NestedProblem& problem, Partition& partition, std::uint64_t epoch,
                             MergeCriterion criterion, std::size_t exact_threshold = 64, double target = 0.0) {
  MergeStats stats;
  const auto dim = problem.path_dim();
  for (std::size_t i = 0; i < partition.block_count(); ++i) {
    auto& bs = partition.buckets[i];
    const bool exact = criterion == MergeCriterion::exact ||
                       (criterion == MergeCriterion::automatic && bs.size() <= exact_threshold);
    std::vector<bool> used(bs.size(), false);
    for (std::size_t c = 0; c < dim; ++c) {
      bool merged_any = true;
      while (merged_any) {
        merged_any = false;
        auto g = build_bucket_graph(partition, epoch);
        const auto prof = exact ? optimistic_profile(problem, g) : shortest_profile(g);
        for (std::size_t a = 0; a < bs.size() && !merged_any; ++a) {
          if (used[a]) continue;
          const auto& A = bs[a];
          if (A.status == BucketStatus::fresh || (A.status == BucketStatus::computed && !A.current(epoch))) continue;
          for (std::size_t b = 0; b < bs.size(); ++b) {
            if (b == a || used[b]) continue;
            const auto& B = bs[b];
            if (B.status == BucketStatus::fresh || (B.status == BucketStatus::computed && !B.current(epoch))) continue;
            if (B.lo[c] != A.hi[c] + 1) continue;
            bool aligned = true;
            for (std::size_t c2 = 0; c2 < dim; ++c2)
              if (c2 != c && (A.lo[c2] != B.lo[c2] || A.hi[c2] != B.hi[c2])) aligned = false;
            if (!aligned) continue;

            ++stats.evaluated;
            std::optional<Representative> rep;
            if (A.rep) rep = A.rep;
            if (B.rep && (!rep || B.rep->rcost < rep->rcost)) rep = B.rep;
            bool ok = true;
            if (rep) {
              const double v = exact ? optimistic_through(problem, prof, i, A.lo, rep->rcost)
                                     : shortest_through(prof, i, rep->rcost);
              ok = v >= target;
            }
            if (!ok) continue;

            Bucket m;
            m.block = i;
            m.lo = A.lo;
            m.hi = A.hi;
            m.hi[c] = B.hi[c];
            m.status = rep ? BucketStatus::computed : BucketStatus::empty;
            m.rep = rep;
            const auto hi_idx = std::max(a, b), lo_idx = std::min(a, b);
            bs.erase(bs.begin() + static_cast<std::ptrdiff_t>(hi_idx));
            used.erase(used.begin() + static_cast<std::ptrdiff_t>(hi_idx));
            bs.erase(bs.begin() + static_cast<std::ptrdiff_t>(lo_idx));
            used.erase(used.begin() + static_cast<std::ptrdiff_t>(lo_idx));
            bs.push_back(std::move(m));
            used.push_back(true);
            // Keep `used` aligned with the re-sorted bucket order.
            std::vector<std::size_t> order(bs.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return bs[x].lo < bs[y].lo; });
            std::vector<Bucket> sorted;
            std::vector<bool> sorted_used;
            for (auto k : order) {
              sorted.push_back(std::move(bs[k]));
              sorted_used.push_back(used[k]);
            }
            bs = std::move(sorted);
            used = std::move(sorted_used);
            ++stats.merges;
            merged_any = true;
            break;
          }
        }
      }
    }
  }
  return stats;
}

inline nlohmann::json partition_to_json(const Partition& p) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < p.block_count(); ++i)
    for (const auto& b : p.buckets[i]) {
      nlohmann::json j{{"block", i}, {"lo", b.lo}, {"hi", b.hi}, {"status", to_string(b.status)}};
      j["rep_rcost"] = b.rep ? nlohmann::json(b.rep->rcost) : nlohmann::json(nullptr);
      out.push_back(std::move(j));
    }
  return out;
}

}  // namespace nestcg
