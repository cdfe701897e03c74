#pragma once

// Nested path problems: blocks of elements, subpath resources that live inside
// one block, and path resources aggregated across the blocks of a path.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nestcg {

/// Costs are exact integers (millicost units); resource values are integers.
using Cost = std::int64_t;
using Value = std::int64_t;
using ElementId = std::int32_t;
using IntVec = std::vector<Value>;

inline constexpr Value kValueMin = std::numeric_limits<Value>::min() / 4;
inline constexpr Value kValueMax = std::numeric_limits<Value>::max() / 4;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Largest block the bit-set based elementary search accepts.
inline constexpr std::size_t kMaxBlockElements = 31;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// An internal guarantee did not hold (e.g. refinement found nothing to split).
class InvariantFailure : public Error {
 public:
  using Error::Error;
};

/// A configured size guard was exceeded (bit-set bound, enumeration caps).
class CapacityExceeded : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

struct Window {
  Value lo = kValueMin;
  Value hi = kValueMax;

  [[nodiscard]] bool contains(Value v) const { return lo <= v && v <= hi; }
  friend bool operator==(const Window&, const Window&) = default;
};

/// One-dimensional resource constrained only inside its own block. The
/// extension along an arc adds the arc's delta; with `floor_at_lower` the value
/// is lifted to the window's lower bound (waiting in time-window resources).
struct SubpathResource {
  std::string name;
  bool floor_at_lower = false;
  std::map<ElementId, Window> windows;

  [[nodiscard]] Window window(ElementId e) const {
    auto it = windows.find(e);
    return it == windows.end() ? Window{} : it->second;
  }
};

enum class Aggregator { sum, max };

/// Global resource: each subpath contributes a vector in Z^dim, contributions
/// are aggregated across blocks (sum or componentwise max) and the aggregate
/// at the sink must satisfy coeff . aggregate <= bound with coeff >= 0.
struct PathResource {
  std::string name;
  std::size_t dim = 1;
  Aggregator aggregator = Aggregator::sum;
  IntVec coeff;
  Value bound = 0;
  /// Set by NestedProblem: the aggregate never decreases as blocks are appended.
  bool monotone_over_blocks = false;
};

/// Intra-block arc. `sub_delta` has one entry per subpath resource of the
/// block; `path_delta` has one entry per path-resource coordinate.
struct Arc {
  ElementId from = 0;
  ElementId to = 0;
  Cost cost = 0;
  IntVec sub_delta;
  IntVec path_delta;
};

/// Arc from the block start into `element` (entry) or from `element` to the
/// block end (exit). Inter-block arcs are implicit: exit(k) followed by entry(k').
struct EndpointArc {
  ElementId element = 0;
  Cost cost = 0;
  IntVec sub_delta;
  IntVec path_delta;
};

struct Block {
  std::vector<ElementId> elements;
  std::vector<Arc> arcs;
  std::vector<EndpointArc> entries;
  std::vector<EndpointArc> exits;
  std::vector<SubpathResource> resources;
};

/// Per-block static facts derived once from the arcs.
struct BlockBounds {
  /// Valid lower/upper bounds on every elementary subpath's contribution.
  IntVec lower;
  IntVec upper;
  /// Coordinate never decreases after the entry arc (intra and exit deltas >= 0).
  std::vector<bool> nondecreasing;
  /// Lower bound on what intra + exit arcs can still add to a coordinate.
  IntVec min_future;
  /// Subpath resource admits lower-or-equal dominance.
  std::vector<bool> sub_le_dominance;
};

struct Subpath {
  std::size_t block = 0;
  std::vector<ElementId> nodes;
  Cost cost = 0;
  IntVec contribution;

  friend bool operator==(const Subpath&, const Subpath&) = default;
};

struct Path {
  std::vector<Subpath> subpaths;
  Cost cost = 0;
  IntVec aggregate;

  [[nodiscard]] std::vector<ElementId> elements() const {
    std::vector<ElementId> out;
    for (const auto& s : subpaths) out.insert(out.end(), s.nodes.begin(), s.nodes.end());
    return out;
  }
};

/// Dual values: one per element (zero for elements without a coverage row)
/// plus a dual charged once per path (cardinality / convexity row).
struct Duals {
  std::vector<double> element;
  double per_path = 0.0;

  static Duals zero(std::size_t elements) { return Duals{std::vector<double>(elements, 0.0), 0.0}; }
};

struct SubpathViolation {
  std::size_t resource = 0;
  std::size_t position = 0;  // 1-based node position along the subpath
};

struct SubpathCheck {
  std::optional<Subpath> subpath;
  std::optional<SubpathViolation> violation;

  [[nodiscard]] bool feasible() const { return subpath.has_value(); }
};

struct PathCheck {
  std::optional<Path> path;
  std::optional<std::size_t> violated_resource;
  IntVec aggregate;

  [[nodiscard]] bool feasible() const { return path.has_value(); }
};

// ---------------------------------------------------------------------------
// Aggregation helpers shared by every path-level search.

inline Value aggregate_identity(Aggregator agg) { return agg == Aggregator::sum ? 0 : kValueMin; }

inline Value aggregate_combine(Aggregator agg, Value acc, Value t) {
  return agg == Aggregator::sum ? acc + t : std::max(acc, t);
}

/// coeff . v <= bound, evaluated without overflow.
inline bool linear_feasible(std::span<const Value> coeff, std::span<const Value> v, Value bound) {
  __int128 lhs = 0;
  for (std::size_t i = 0; i < coeff.size(); ++i) {
    if (coeff[i] == 0) continue;
    lhs += static_cast<__int128>(coeff[i]) * v[i];
  }
  return lhs <= bound;
}

class NestedProblem {
 public:
  NestedProblem() = default;

  /// Validates the structure and derives adjacency and static bounds.
  /// `coverage` lists the elements owning a master row; empty means all.
  NestedProblem(std::vector<Block> blocks, std::vector<PathResource> path_resources,
                std::vector<ElementId> coverage = {})
      : blocks_(std::move(blocks)), path_resources_(std::move(path_resources)) {
    if (blocks_.empty()) throw InvalidInput("nested problem needs at least one block");
    std::size_t n_elements = 0;
    for (const auto& b : blocks_) n_elements += b.elements.size();
    block_of_.assign(n_elements, npos);
    local_index_.assign(n_elements, npos);

    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const auto& b = blocks_[i];
      if (b.elements.empty()) throw InvalidInput("block " + std::to_string(i) + " has no elements");
      for (std::size_t j = 0; j < b.elements.size(); ++j) {
        const ElementId e = b.elements[j];
        if (e < 0 || static_cast<std::size_t>(e) >= n_elements)
          throw InvalidInput("element ids must be dense in [0, element_count)");
        if (block_of_[e] != npos) throw InvalidInput("element " + std::to_string(e) + " appears in two blocks");
        block_of_[e] = i;
        local_index_[e] = j;
      }
    }

    offsets_.clear();
    std::size_t dim = 0;
    for (auto& r : path_resources_) {
      if (r.dim == 0) throw InvalidInput("path resource dimension must be positive");
      if (r.coeff.size() != r.dim) throw InvalidInput("path resource coefficient vector has wrong length");
      if (std::any_of(r.coeff.begin(), r.coeff.end(), [](Value a) { return a < 0; }))
        throw InvalidInput("path resource coefficients must be nonnegative");
      offsets_.push_back(dim);
      dim += r.dim;
    }
    path_dim_ = dim;

    if (coverage.empty()) {
      covered_.assign(n_elements, true);
    } else {
      covered_.assign(n_elements, false);
      for (ElementId e : coverage) {
        if (e < 0 || static_cast<std::size_t>(e) >= n_elements) throw InvalidInput("coverage lists unknown element");
        covered_[e] = true;
      }
    }

    build_adjacency();
    derive_monotonicity();
    derive_bounds();
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  [[nodiscard]] std::size_t block_count() const { return blocks_.size(); }
  [[nodiscard]] const Block& block(std::size_t i) const { return blocks_.at(i); }
  [[nodiscard]] std::span<const Block> blocks() const { return blocks_; }
  [[nodiscard]] std::size_t element_count() const { return block_of_.size(); }
  [[nodiscard]] std::size_t block_of(ElementId e) const { return block_of_.at(e); }
  [[nodiscard]] std::size_t local_index(ElementId e) const { return local_index_.at(e); }
  [[nodiscard]] bool covered(ElementId e) const { return covered_.at(e); }
  [[nodiscard]] std::vector<ElementId> coverage() const {
    std::vector<ElementId> out;
    for (std::size_t e = 0; e < covered_.size(); ++e)
      if (covered_[e]) out.push_back(static_cast<ElementId>(e));
    return out;
  }

  [[nodiscard]] std::span<const PathResource> path_resources() const { return path_resources_; }
  [[nodiscard]] std::size_t path_dim() const { return path_dim_; }
  [[nodiscard]] std::size_t offset(std::size_t r) const { return offsets_.at(r); }
  [[nodiscard]] const BlockBounds& bounds(std::size_t block) const { return bounds_.at(block); }

  /// Arc indices leaving local node `j` of block `b`.
  [[nodiscard]] std::span<const std::size_t> out_arcs(std::size_t b, std::size_t j) const { return out_[b][j]; }
  [[nodiscard]] const EndpointArc* entry(std::size_t b, std::size_t j) const {
    const auto idx = entry_[b][j];
    return idx == npos ? nullptr : &blocks_[b].entries[idx];
  }
  [[nodiscard]] const EndpointArc* exit(std::size_t b, std::size_t j) const {
    const auto idx = exit_[b][j];
    return idx == npos ? nullptr : &blocks_[b].exits[idx];
  }
  [[nodiscard]] const Arc* arc_between(ElementId u, ElementId v) const {
    const auto b = block_of(u);
    if (block_of(v) != b) return nullptr;
    for (std::size_t a : out_[b][local_index(u)])
      if (blocks_[b].arcs[a].to == v) return &blocks_[b].arcs[a];
    return nullptr;
  }

  /// Upper bound on |cost| of any path (elementary subpaths, one per block).
  [[nodiscard]] Cost cost_magnitude_bound() const { return cost_bound_; }

  /// Identity aggregate (before any block).
  [[nodiscard]] IntVec aggregate_start() const {
    IntVec v(path_dim_);
    for (std::size_t r = 0; r < path_resources_.size(); ++r)
      for (std::size_t c = 0; c < path_resources_[r].dim; ++c)
        v[offsets_[r] + c] = aggregate_identity(path_resources_[r].aggregator);
    return v;
  }

  void aggregate_into(IntVec& acc, std::span<const Value> t) const {
    for (std::size_t r = 0; r < path_resources_.size(); ++r) {
      const auto agg = path_resources_[r].aggregator;
      for (std::size_t c = 0; c < path_resources_[r].dim; ++c) {
        const auto k = offsets_[r] + c;
        acc[k] = aggregate_combine(agg, acc[k], t[k]);
      }
    }
  }

  /// Index of the first violated path resource, if any.
  [[nodiscard]] std::optional<std::size_t> violated_resource(std::span<const Value> aggregate) const {
    for (std::size_t r = 0; r < path_resources_.size(); ++r) {
      const auto& pr = path_resources_[r];
      if (!linear_feasible(pr.coeff, aggregate.subspan(offsets_[r], pr.dim), pr.bound)) return r;
    }
    return std::nullopt;
  }

  [[nodiscard]] bool aggregate_feasible(std::span<const Value> aggregate) const {
    return !violated_resource(aggregate).has_value();
  }

  /// True when a partial aggregate already violates a resource whose aggregate
  /// cannot decrease with further blocks.
  [[nodiscard]] bool prunable(std::span<const Value> aggregate) const {
    for (std::size_t r = 0; r < path_resources_.size(); ++r) {
      const auto& pr = path_resources_[r];
      if (!pr.monotone_over_blocks) continue;
      auto part = aggregate.subspan(offsets_[r], pr.dim);
      // A max aggregate still at its identity has not seen a block yet.
      if (pr.aggregator == Aggregator::max &&
          std::any_of(part.begin(), part.end(), [](Value v) { return v == kValueMin; }))
        continue;
      if (!linear_feasible(pr.coeff, part, pr.bound)) return true;
    }
    return false;
  }

 private:
  void build_adjacency() {
    out_.resize(blocks_.size());
    entry_.resize(blocks_.size());
    exit_.resize(blocks_.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const auto& blk = blocks_[b];
      const auto m = blk.resources.size();
      out_[b].assign(blk.elements.size(), {});
      entry_[b].assign(blk.elements.size(), npos);
      exit_[b].assign(blk.elements.size(), npos);
      for (std::size_t a = 0; a < blk.arcs.size(); ++a) {
        const auto& arc = blk.arcs[a];
        check_element_in_block(arc.from, b, "arc");
        check_element_in_block(arc.to, b, "arc");
        if (arc.from == arc.to) throw InvalidInput("self loop on element " + std::to_string(arc.from));
        check_deltas(arc.sub_delta, arc.path_delta, m);
        for (std::size_t other : out_[b][local_index_[arc.from]])
          if (blk.arcs[other].to == arc.to) throw InvalidInput("duplicate arc in block " + std::to_string(b));
        out_[b][local_index_[arc.from]].push_back(a);
      }
      for (std::size_t a = 0; a < blk.entries.size(); ++a) {
        const auto& ea = blk.entries[a];
        check_element_in_block(ea.element, b, "source arc");
        check_deltas(ea.sub_delta, ea.path_delta, m);
        auto& slot = entry_[b][local_index_[ea.element]];
        if (slot != npos) throw InvalidInput("duplicate source arc");
        slot = a;
      }
      for (std::size_t a = 0; a < blk.exits.size(); ++a) {
        const auto& ea = blk.exits[a];
        check_element_in_block(ea.element, b, "sink arc");
        check_deltas(ea.sub_delta, ea.path_delta, m);
        auto& slot = exit_[b][local_index_[ea.element]];
        if (slot != npos) throw InvalidInput("duplicate sink arc");
        slot = a;
      }
      for (const auto& res : blk.resources)
        for (const auto& [e, w] : res.windows) {
          check_element_in_block(e, b, "subpath resource window");
          if (w.lo > w.hi) throw InvalidInput("empty subpath resource window");
        }
    }
  }

  void check_element_in_block(ElementId e, std::size_t b, const char* what) const {
    if (e < 0 || static_cast<std::size_t>(e) >= block_of_.size() || block_of_[e] != b)
      throw InvalidInput(std::string(what) + " references element " + std::to_string(e) + " outside block " +
                         std::to_string(b));
  }

  void check_deltas(const IntVec& sub, const IntVec& path, std::size_t m) const {
    if (sub.size() != m) throw InvalidInput("subpath resource delta count mismatch");
    if (path.size() != path_dim_) throw InvalidInput("path resource delta count mismatch");
  }

  void derive_monotonicity() {
    for (std::size_t r = 0; r < path_resources_.size(); ++r) {
      auto& pr = path_resources_[r];
      if (pr.aggregator == Aggregator::max) {
        pr.monotone_over_blocks = true;
        continue;
      }
      bool nonneg = true;
      auto scan = [&](const IntVec& d) {
        for (std::size_t c = 0; c < pr.dim; ++c)
          if (d[offsets_[r] + c] < 0) nonneg = false;
      };
      for (const auto& b : blocks_) {
        for (const auto& a : b.arcs) scan(a.path_delta);
        for (const auto& a : b.entries) scan(a.path_delta);
        for (const auto& a : b.exits) scan(a.path_delta);
      }
      pr.monotone_over_blocks = nonneg;
    }
  }

  void derive_bounds() {
    bounds_.resize(blocks_.size());
    cost_bound_ = 0;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const auto& blk = blocks_[b];
      auto& bb = bounds_[b];
      bb.lower.assign(path_dim_, 0);
      bb.upper.assign(path_dim_, 0);
      bb.nondecreasing.assign(path_dim_, true);
      bb.min_future.assign(path_dim_, 0);
      for (std::size_t c = 0; c < path_dim_; ++c) {
        Value entry_min = kValueMax, entry_max = kValueMin;
        for (const auto& a : blk.entries) {
          entry_min = std::min(entry_min, a.path_delta[c]);
          entry_max = std::max(entry_max, a.path_delta[c]);
        }
        if (blk.entries.empty()) entry_min = entry_max = 0;
        Value neg = 0, pos = 0;
        for (const auto& a : blk.arcs) {
          neg += std::min<Value>(0, a.path_delta[c]);
          pos += std::max<Value>(0, a.path_delta[c]);
        }
        Value exit_min = blk.exits.empty() ? 0 : kValueMax, exit_max = blk.exits.empty() ? 0 : kValueMin;
        for (const auto& a : blk.exits) {
          exit_min = std::min(exit_min, a.path_delta[c]);
          exit_max = std::max(exit_max, a.path_delta[c]);
        }
        neg += std::min<Value>(0, exit_min);
        pos += std::max<Value>(0, exit_max);
        bb.lower[c] = entry_min + neg;
        bb.upper[c] = entry_max + pos;
        bb.nondecreasing[c] = neg == 0;
        bb.min_future[c] = neg;
      }

      bb.sub_le_dominance.assign(blk.resources.size(), true);
      for (std::size_t r = 0; r < blk.resources.size(); ++r) {
        const auto& res = blk.resources[r];
        if (res.floor_at_lower) continue;
        Value lowest = 0;
        Value entry_min = kValueMax;
        for (const auto& a : blk.entries) entry_min = std::min(entry_min, a.sub_delta[r]);
        if (!blk.entries.empty()) lowest = entry_min;
        for (const auto& a : blk.arcs) lowest += std::min<Value>(0, a.sub_delta[r]);
        for (const auto& [e, w] : res.windows)
          if (w.lo > lowest) bb.sub_le_dominance[r] = false;
      }

      Cost entry_c = 0, exit_c = 0, arcs_c = 0;
      for (const auto& a : blk.entries) entry_c = std::max(entry_c, a.cost < 0 ? -a.cost : a.cost);
      for (const auto& a : blk.exits) exit_c = std::max(exit_c, a.cost < 0 ? -a.cost : a.cost);
      for (const auto& a : blk.arcs) arcs_c += a.cost < 0 ? -a.cost : a.cost;
      cost_bound_ += entry_c + exit_c + arcs_c;
    }
  }

  std::vector<Block> blocks_;
  std::vector<PathResource> path_resources_;
  std::vector<std::size_t> offsets_;
  std::size_t path_dim_ = 0;
  std::vector<std::size_t> block_of_;
  std::vector<std::size_t> local_index_;
  std::vector<bool> covered_;
  std::vector<std::vector<std::vector<std::size_t>>> out_;
  std::vector<std::vector<std::size_t>> entry_;
  std::vector<std::vector<std::size_t>> exit_;
  std::vector<BlockBounds> bounds_;
  Cost cost_bound_ = 0;
};

// ---------------------------------------------------------------------------

/// Replays the resource extension functions along `nodes` inside `block`.
/// Reports the first window violation as (resource, 1-based position).
inline SubpathCheck check_subpath_feasible(const NestedProblem& problem, std::size_t block,
                                           std::span<const ElementId> nodes) {
  if (block >= problem.block_count()) throw InvalidInput("block index out of range");
  if (nodes.empty()) throw InvalidInput("subpath must contain at least one node");
  const auto& blk = problem.block(block);
  for (ElementId e : nodes) {
    if (e < 0 || static_cast<std::size_t>(e) >= problem.element_count())
      throw InvalidInput("unknown element id " + std::to_string(e));
    if (problem.block_of(e) != block)
      throw InvalidInput("element " + std::to_string(e) + " is not in block " + std::to_string(block));
  }
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j)
      if (nodes[i] == nodes[j]) throw InvalidInput("subpath repeats element " + std::to_string(nodes[i]));

  const auto m = blk.resources.size();
  IntVec sub(m, 0);
  IntVec contribution(problem.path_dim(), 0);
  Cost cost = 0;
  SubpathCheck out;

  auto apply = [&](const IntVec& sub_delta, const IntVec& path_delta, ElementId at, std::size_t position) {
    for (std::size_t r = 0; r < m; ++r) {
      const auto w = blk.resources[r].window(at);
      Value v = sub[r] + sub_delta[r];
      if (blk.resources[r].floor_at_lower) v = std::max(v, w.lo);
      sub[r] = v;
      if (!w.contains(v) && !out.violation) out.violation = SubpathViolation{r, position};
    }
    for (std::size_t c = 0; c < contribution.size(); ++c) contribution[c] += path_delta[c];
  };

  const auto* entry = problem.entry(block, problem.local_index(nodes.front()));
  if (!entry) throw InvalidInput("no source arc into element " + std::to_string(nodes.front()));
  cost += entry->cost;
  apply(entry->sub_delta, entry->path_delta, nodes.front(), 1);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const auto* arc = problem.arc_between(nodes[i - 1], nodes[i]);
    if (!arc)
      throw InvalidInput("no arc " + std::to_string(nodes[i - 1]) + " -> " + std::to_string(nodes[i]));
    cost += arc->cost;
    apply(arc->sub_delta, arc->path_delta, nodes[i], i + 1);
  }
  const auto* exit = problem.exit(block, problem.local_index(nodes.back()));
  if (!exit) throw InvalidInput("no sink arc out of element " + std::to_string(nodes.back()));
  cost += exit->cost;
  // The block end carries no window; only the path-resource contribution moves.
  for (std::size_t c = 0; c < contribution.size(); ++c) contribution[c] += exit->path_delta[c];

  if (out.violation) return out;
  out.subpath = Subpath{block, std::vector<ElementId>(nodes.begin(), nodes.end()), cost, std::move(contribution)};
  return out;
}

/// Aggregates the subpaths' contributions and applies each path resource's
/// feasibility predicate at the sink.
inline PathCheck check_path_feasible(const NestedProblem& problem, std::span<const Subpath> subpaths) {
  if (subpaths.size() != problem.block_count())
    throw InvalidInput("path needs exactly one subpath per block");
  IntVec agg = problem.aggregate_start();
  Cost cost = 0;
  for (std::size_t i = 0; i < subpaths.size(); ++i) {
    if (subpaths[i].block != i) throw InvalidInput("subpath order does not match block order");
    if (subpaths[i].contribution.size() != problem.path_dim())
      throw InvalidInput("subpath contribution has wrong dimension");
    problem.aggregate_into(agg, subpaths[i].contribution);
    cost += subpaths[i].cost;
  }
  PathCheck out;
  out.aggregate = agg;
  out.violated_resource = problem.violated_resource(agg);
  if (!out.violated_resource)
    out.path = Path{std::vector<Subpath>(subpaths.begin(), subpaths.end()), cost, std::move(agg)};
  return out;
}

inline double reduced_cost(const Subpath& s, const Duals& duals) {
  double rc = static_cast<double>(s.cost);
  for (ElementId e : s.nodes) rc -= duals.element.at(e);
  return rc;
}

/// Path cost minus the duals of its covered rows and the per-path dual.
inline double reduced_cost(const Path& p, const Duals& duals) {
  double rc = -duals.per_path;
  for (const auto& s : p.subpaths) rc += reduced_cost(s, duals);
  return rc;
}

}  // namespace nestcg
