#pragma once

// Restricted master problem over a pool of path columns.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "nestcg/lp.hpp"
#include "nestcg/model.hpp"

namespace nestcg {

enum class Sense { cover, partition };

inline const char* to_string(Sense s) { return s == Sense::cover ? "cover" : "partition"; }

/// Artificial column cost: ten times the largest possible path cost, at least 10^6.
inline double default_big_m(const NestedProblem& problem) {
  return std::max(1e6, 10.0 * static_cast<double>(problem.cost_magnitude_bound()));
}

struct Column {
  std::uint64_t id = 0;
  Path path;
  double cost = 0.0;
  std::vector<ElementId> elements;  // covered elements that own a row
  bool artificial = false;
  std::size_t row = 0;  // row of an artificial column
  std::size_t age = 0;  // solves since the column was last basic
};

struct RmpSolution {
  double objective = 0.0;  // includes the cost of fixed columns
  std::vector<double> values;  // per pool column
  Duals duals;
  double artificial_mass = 0.0;
  std::size_t lp_iterations = 0;
};

struct PoolConfig {
  std::size_t period = 5;
  std::size_t max_age = 10;
  std::size_t floor = 1000;
};

class Rmp {
 public:
  Rmp(const NestedProblem& problem, Sense sense, std::optional<std::int64_t> cardinality = std::nullopt,
      std::optional<double> big_m = std::nullopt)
      : problem_(&problem), sense_(sense), cardinality_(cardinality), big_m_(big_m.value_or(default_big_m(problem))) {
    if (cardinality_ && *cardinality_ < 0) throw InvalidInput("cardinality must be nonnegative");
    active_.assign(problem.element_count(), false);
    for (ElementId e : problem.coverage()) active_[e] = true;
    rebuild_artificials();
  }

  [[nodiscard]] const NestedProblem& problem() const { return *problem_; }
  [[nodiscard]] Sense sense() const { return sense_; }
  [[nodiscard]] std::optional<std::int64_t> cardinality() const { return cardinality_; }
  [[nodiscard]] double big_m() const { return big_m_; }
  [[nodiscard]] const std::vector<Column>& columns() const { return columns_; }
  [[nodiscard]] double fixed_cost() const { return fixed_cost_; }
  [[nodiscard]] const std::vector<Path>& fixed_paths() const { return fixed_; }
  [[nodiscard]] bool row_active(ElementId e) const { return active_[e]; }

  [[nodiscard]] std::size_t row_count() const {
    std::size_t n = 0;
    for (bool a : active_) n += a;
    return n + (cardinality_ ? 1 : 0);
  }
  [[nodiscard]] std::size_t structural_count() const {
    return static_cast<std::size_t>(std::count_if(columns_.begin(), columns_.end(), [](const Column& c) { return !c.artificial; }));
  }

  /// Adds a path column unless an identical node sequence is pooled; returns
  /// whether it was added.
  bool add_column(const Path& path) {
    auto key = path.elements();
    if (!keys_.insert(key).second) return false;
    Column c;
    c.id = next_id_++;
    c.path = path;
    c.cost = static_cast<double>(path.cost);
    for (ElementId e : key)
      if (problem_->covered(e)) c.elements.push_back(e);
    std::sort(c.elements.begin(), c.elements.end());
    columns_.push_back(std::move(c));
    return true;
  }

  [[nodiscard]] bool contains(const Path& path) const { return keys_.count(path.elements()) > 0; }

  RmpSolution solve() {
    auto lp = build_lp();
    std::vector<std::size_t> warm;
    const std::vector<std::size_t>* warm_ptr = nullptr;
    if (!warm_ids_.empty()) {
      warm = translate_warm(lp);
      if (!warm.empty()) warm_ptr = &warm;
    }
    SimplexSolver solver;
    auto res = solver.solve(lp.problem, warm_ptr);
    if (res.status != LpStatus::optimal) throw NumericalFailure("restricted master LP not solved to optimality");

    RmpSolution sol;
    sol.objective = res.objective + fixed_cost_;
    sol.values = res.x;
    sol.lp_iterations = res.iterations;
    sol.duals = Duals::zero(problem_->element_count());
    for (std::size_t r = 0; r < lp.row_element.size(); ++r) sol.duals.element[lp.row_element[r]] = res.duals[r];
    if (cardinality_) sol.duals.per_path = res.duals[lp.row_element.size()];
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      if (columns_[j].artificial) sol.artificial_mass += res.x[j];
      columns_[j].age = res.basic[j] ? 0 : columns_[j].age + 1;
    }
    // Remember the basis by column id and slack row.
    warm_ids_.clear();
    for (auto k : res.basis) {
      if (k < columns_.size()) warm_ids_.push_back({false, columns_[k].id});
      else warm_ids_.push_back({true, lp.row_key[k - columns_.size()]});
    }
    last_basic_ = res.basic;
    return sol;
  }

  /// Drops old non-basic columns every `period` iterations, oldest first and
  /// never below `floor` remaining non-basic columns. Returns the removed count.
  std::size_t manage_pool(std::size_t iteration, const PoolConfig& cfg) {
    if (cfg.period == 0 || iteration % cfg.period != 0 || iteration == 0) return 0;
    std::vector<std::size_t> nonbasic, candidates;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      if (columns_[j].artificial) continue;
      const bool basic = j < last_basic_.size() && last_basic_[j];
      if (basic) continue;
      nonbasic.push_back(j);
      if (columns_[j].age > cfg.max_age) candidates.push_back(j);
    }
    if (nonbasic.size() <= cfg.floor) return 0;
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](auto a, auto b) { return columns_[a].age > columns_[b].age; });
    const auto removable = std::min(candidates.size(), nonbasic.size() - cfg.floor);
    std::vector<bool> drop(columns_.size(), false);
    for (std::size_t i = 0; i < removable; ++i) drop[candidates[i]] = true;
    erase_columns(drop);
    return removable;
  }

  /// Fixes a column to one (diving). Partitioning removes every pooled column
  /// sharing a row with it; both senses drop the rows it covers.
  void fix_column(std::size_t index) {
    if (index >= columns_.size() || columns_[index].artificial) throw InvalidInput("cannot fix this column");
    const Column fixed = columns_[index];
    fixed_.push_back(fixed.path);
    fixed_cost_ += fixed.cost;
    if (cardinality_) {
      if (*cardinality_ == 0) throw InvalidInput("cardinality exhausted");
      --*cardinality_;
    }
    for (ElementId e : fixed.elements) active_[e] = false;
    std::vector<bool> drop(columns_.size(), false);
    drop[index] = true;
    if (sense_ == Sense::partition)
      for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (columns_[j].artificial) continue;
        for (ElementId e : columns_[j].elements)
          if (std::binary_search(fixed.elements.begin(), fixed.elements.end(), e)) drop[j] = true;
      }
    erase_columns(drop);
    rebuild_artificials();
    warm_ids_.clear();
  }

  void write_mps(std::ostream& os, const std::string& name = "RMP") const {
    auto lp = build_lp();
    os << "NAME          " << name << "\nROWS\n N  COST\n";
    for (std::size_t r = 0; r < lp.problem.rows(); ++r) {
      const char* t = lp.problem.sense[r] == RowSense::ge ? "G" : lp.problem.sense[r] == RowSense::le ? "L" : "E";
      os << " " << t << "  R" << r << "\n";
    }
    os << "COLUMNS\n";
    for (std::size_t j = 0; j < lp.problem.columns.size(); ++j) {
      const auto& c = lp.problem.columns[j];
      os << "    X" << columns_[j].id << "  COST  " << c.cost << "\n";
      for (auto [r, v] : c.entries) os << "    X" << columns_[j].id << "  R" << r << "  " << v << "\n";
    }
    os << "RHS\n";
    for (std::size_t r = 0; r < lp.problem.rows(); ++r) os << "    RHS  R" << r << "  " << lp.problem.rhs[r] << "\n";
    os << "ENDATA\n";
  }

 private:
  struct BuiltLp {
    LpProblem problem;
    std::vector<ElementId> row_element;
    std::vector<std::int64_t> row_key;  // element id, or -1 for the cardinality row
  };

  BuiltLp build_lp() const {
    BuiltLp out;
    std::vector<std::size_t> row_of(problem_->element_count(), static_cast<std::size_t>(-1));
    for (std::size_t e = 0; e < active_.size(); ++e) {
      if (!active_[e]) continue;
      row_of[e] = out.row_element.size();
      out.row_element.push_back(static_cast<ElementId>(e));
      out.row_key.push_back(static_cast<std::int64_t>(e));
      out.problem.sense.push_back(sense_ == Sense::cover ? RowSense::ge : RowSense::eq);
      out.problem.rhs.push_back(1.0);
    }
    const auto card_row = out.row_element.size();
    if (cardinality_) {
      out.row_key.push_back(-1);
      out.problem.sense.push_back(RowSense::eq);
      out.problem.rhs.push_back(static_cast<double>(*cardinality_));
    }
    for (const auto& c : columns_) {
      LpColumn col;
      if (c.artificial) {
        col.cost = big_m_;
        col.entries.emplace_back(c.row == kCardinalityRow ? card_row : row_of[c.row], 1.0);
      } else {
        col.cost = c.cost;
        for (ElementId e : c.elements)
          if (active_[e]) col.entries.emplace_back(row_of[e], 1.0);
        if (cardinality_) col.entries.emplace_back(card_row, 1.0);
      }
      out.problem.columns.push_back(std::move(col));
    }
    return out;
  }

  std::vector<std::size_t> translate_warm(const BuiltLp& lp) const {
    std::map<std::uint64_t, std::size_t> col_index;
    for (std::size_t j = 0; j < columns_.size(); ++j) col_index[columns_[j].id] = j;
    std::map<std::int64_t, std::size_t> row_index;
    for (std::size_t r = 0; r < lp.row_key.size(); ++r) row_index[lp.row_key[r]] = r;
    std::vector<std::size_t> keys;
    for (const auto& [slack, id] : warm_ids_) {
      if (slack) {
        auto it = row_index.find(static_cast<std::int64_t>(id));
        if (it == row_index.end()) return {};
        keys.push_back(columns_.size() + it->second);
      } else {
        auto it = col_index.find(id);
        if (it == col_index.end()) return {};
        keys.push_back(it->second);
      }
    }
    return keys;
  }

  static constexpr std::size_t kCardinalityRow = static_cast<std::size_t>(-1);

  void rebuild_artificials() {
    std::erase_if(columns_, [](const Column& c) { return c.artificial; });
    std::vector<Column> arts;
    for (std::size_t e = 0; e < active_.size(); ++e) {
      if (!active_[e]) continue;
      Column c;
      c.id = next_id_++;
      c.artificial = true;
      c.row = e;
      c.cost = big_m_;
      arts.push_back(std::move(c));
    }
    if (cardinality_) {
      Column c;
      c.id = next_id_++;
      c.artificial = true;
      c.row = kCardinalityRow;
      c.cost = big_m_;
      arts.push_back(std::move(c));
    }
    columns_.insert(columns_.begin(), arts.begin(), arts.end());
    last_basic_.clear();
  }

  void erase_columns(const std::vector<bool>& drop) {
    std::vector<Column> kept;
    std::vector<bool> kept_basic;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      if (drop[j]) {
        keys_.erase(columns_[j].path.elements());
        continue;
      }
      kept.push_back(std::move(columns_[j]));
      if (j < last_basic_.size()) kept_basic.push_back(last_basic_[j]);
    }
    columns_ = std::move(kept);
    last_basic_ = std::move(kept_basic);
  }

  const NestedProblem* problem_;
  Sense sense_;
  std::optional<std::int64_t> cardinality_;
  double big_m_;
  std::vector<bool> active_;
  std::vector<Column> columns_;
  std::set<std::vector<ElementId>> keys_;
  std::vector<std::pair<bool, std::uint64_t>> warm_ids_;
  std::vector<bool> last_basic_;
  std::vector<Path> fixed_;
  double fixed_cost_ = 0.0;
  std::uint64_t next_id_ = 0;
};

// ---------------------------------------------------------------------------

inline Duals smoothed_duals(const Duals& center, const Duals& current, double alpha) {
  if (center.element.size() != current.element.size()) throw InvalidInput("dual vectors differ in length");
  Duals out = current;
  for (std::size_t i = 0; i < out.element.size(); ++i)
    out.element[i] = alpha * center.element[i] + (1.0 - alpha) * current.element[i];
  out.per_path = alpha * center.per_path + (1.0 - alpha) * current.per_path;
  return out;
}

/// Wentges smoothing with a stability center that moves whenever a better
/// Lagrangian bound is observed.
class DualSmoother {
 public:
  explicit DualSmoother(double alpha = 0.5, bool auto_adjust = false) : alpha_(alpha), auto_adjust_(auto_adjust) {
    if (alpha < 0.0 || alpha >= 1.0) throw InvalidInput("smoothing weight must lie in [0, 1)");
  }

  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] bool has_center() const { return center_.has_value(); }
  [[nodiscard]] const Duals& center() const { return *center_; }
  [[nodiscard]] double center_bound() const { return center_bound_; }

  [[nodiscard]] Duals smooth(const Duals& current) const {
    if (!center_ || alpha_ == 0.0) return current;
    return smoothed_duals(*center_, current, alpha_);
  }

  /// Offers a dual point with its Lagrangian bound; returns whether it became the center.
  bool offer(const Duals& point, double lagrangian_bound) {
    if (center_ && !(lagrangian_bound > center_bound_)) return false;
    center_ = point;
    center_bound_ = lagrangian_bound;
    return true;
  }

  void on_misprice() {
    if (auto_adjust_) alpha_ *= 0.8;
  }
  void on_success() {
    if (auto_adjust_) alpha_ = std::min(0.9, alpha_ + 0.02);
  }

 private:
  double alpha_;
  bool auto_adjust_;
  std::optional<Duals> center_;
  double center_bound_ = -kInfinity;
};

}  // namespace nestcg
