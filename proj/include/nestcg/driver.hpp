#pragma once

// Column generation at the root and the diving heuristic.

#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nestcg/master.hpp"
#include "nestcg/pricing.hpp"

namespace nestcg {

enum class PricerKind { adaptive, enumerative };

inline const char* to_string(PricerKind k) { return k == PricerKind::adaptive ? "adaptive" : "enumerative"; }

/// Coverage sense and optional cardinality that go with a nested problem.
struct MasterSpec {
  Sense sense = Sense::cover;
  std::optional<std::int64_t> cardinality;
};

struct SolverConfig {
  PricerKind pricer = PricerKind::adaptive;
  AdaptiveConfig adaptive;
  EnumerativeConfig enumerative;
  double smoothing_alpha = 0.5;
  bool smoothing_auto = false;
  PoolConfig pool;
  std::size_t max_iterations = 50'000;
  std::optional<double> big_m;
  bool keep_trace = false;
};

struct RunReport {
  double lp_value = 0.0;
  std::size_t iterations = 0;
  std::size_t columns_generated = 0;
  std::size_t refinements = 0;
  std::size_t merges = 0;
  std::size_t representative_solves = 0;
  std::size_t mispricings = 0;
  std::size_t pool_removed = 0;
  std::string termination;  // "optimal", "iteration_cap", "stalled"
  bool artificial_in_solution = false;
  PhaseTimes times;
  double lp_time = 0.0;
  double total_time = 0.0;
  std::vector<nlohmann::json> trace;

  [[nodiscard]] double pricing_time() const { return times.total(); }
};

inline nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j{{"lp_value", r.lp_value},
                   {"iterations", r.iterations},
                   {"columns_generated", r.columns_generated},
                   {"refinements", r.refinements},
                   {"merges", r.merges},
                   {"representative_solves", r.representative_solves},
                   {"mispricings", r.mispricings},
                   {"pool_removed", r.pool_removed},
                   {"termination", r.termination},
                   {"artificial_in_solution", r.artificial_in_solution},
                   {"time_s", r.total_time},
                   {"lp_time_s", r.lp_time},
                   {"fill_s", r.times.fill},
                   {"pess_s", r.times.pessimistic},
                   {"opt_s", r.times.optimistic},
                   {"merge_s", r.times.merge}};
  if (!r.trace.empty()) j["trace"] = r.trace;
  return j;
}

inline std::string csv_header() {
  return "pricer,merge,midway,reuse,width,lp_value,time_s,iterations,refinements,merges,columns,fill_pct,pess_pct,"
         "opt_pct,merge_pct,termination";
}

/// One CSV row; phase shares are percentages of pricing time.
inline std::string csv_row(const SolverConfig& cfg, const RunReport& r) {
  const double total = r.times.total();
  auto pct = [&](double v) { return total > 0 ? 100.0 * v / total : 0.0; };
  std::ostringstream os;
  os.precision(17);
  os << to_string(cfg.pricer) << ',' << (cfg.adaptive.merge ? 1 : 0) << ','
     << (cfg.adaptive.strategy == RefineStrategy::midpoint ? 1 : 0) << ',' << (cfg.adaptive.reuse ? 1 : 0) << ','
     << (cfg.adaptive.widths.empty() ? 0 : cfg.adaptive.widths.front()) << ',' << r.lp_value << ',' << r.total_time
     << ',' << r.iterations << ',' << r.refinements << ',' << r.merges << ',' << r.columns_generated << ','
     << pct(r.times.fill) << ',' << pct(r.times.pessimistic) << ',' << pct(r.times.optimistic) << ','
     << pct(r.times.merge) << ',' << r.termination;
  return os.str();
}

/// Column generation state shared by the root solve and the dive.
class ColumnGeneration {
 public:
  ColumnGeneration(const NestedProblem& problem, MasterSpec master, SolverConfig config)
      : problem_(&problem),
        config_(std::move(config)),
        rmp_(problem, master.sense, master.cardinality, config_.big_m),
        smoother_(config_.smoothing_alpha, config_.smoothing_auto) {
    if (config_.pricer == PricerKind::adaptive) adaptive_ = std::make_unique<AdaptivePricer>(problem, config_.adaptive);
    else enumerative_ = std::make_unique<EnumerativePricer>(problem, config_.enumerative);
  }

  [[nodiscard]] Rmp& rmp() { return rmp_; }
  [[nodiscard]] const RmpSolution& solution() const { return solution_; }
  [[nodiscard]] const AdaptivePricer* adaptive() const { return adaptive_.get(); }

  void forbid(const std::vector<bool>& forbidden) {
    if (adaptive_) adaptive_->set_forbidden(forbidden);
    if (enumerative_) enumerative_->set_forbidden(forbidden);
    smoother_ = DualSmoother(config_.smoothing_alpha, config_.smoothing_auto);
  }

  /// Runs to proven optimality under pure duals (or the iteration cap).
  RunReport run() {
    using clock = std::chrono::steady_clock;
    auto secs = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
    const auto start = clock::now();
    RunReport report;
    while (true) {
      if (report.iterations >= config_.max_iterations) {
        report.termination = "iteration_cap";
        break;
      }
      ++report.iterations;
      ++iteration_;
      auto t0 = clock::now();
      solution_ = rmp_.solve();
      report.lp_time += secs(t0, clock::now());
      const Duals& pure = solution_.duals;

      std::size_t added = 0;
      bool priced_pure = false;
      PricingOutcome outcome;
      if (smoother_.has_center() && smoother_.alpha() > 0.0) {
        const Duals smoothed = smoother_.smooth(pure);
        outcome = price(smoothed, report);
        offer_center(smoothed, outcome);
        added = add_columns(outcome, report);
        if (added == 0) {
          ++report.mispricings;
          smoother_.on_misprice();
        } else {
          smoother_.on_success();
        }
      }
      if (added == 0) {
        outcome = price(pure, report);
        offer_center(pure, outcome);
        priced_pure = true;
        added = add_columns(outcome, report);
      }
      report.pool_removed += rmp_.manage_pool(iteration_, config_.pool);
      if (priced_pure && added == 0) {
        report.termination = outcome.status == PricingStatus::proven_optimal ? "optimal" : "stalled";
        break;
      }
    }
    report.lp_value = solution_.objective;
    report.artificial_in_solution = solution_.artificial_mass > 1e-6;
    report.total_time = secs(start, clock::now());
    return report;
  }

 private:
  PricingOutcome price(const Duals& duals, RunReport& report) {
    PricingOutcome out = adaptive_ ? adaptive_->price(duals) : enumerative_->price(duals);
    report.refinements += out.refinements;
    report.merges += out.merges;
    report.representative_solves += out.representative_solves;
    report.times += out.times;
    if (config_.keep_trace)
      for (const auto& t : out.trace) report.trace.push_back(to_json(t));
    return out;
  }

  std::size_t add_columns(const PricingOutcome& out, RunReport& report) {
    std::size_t added = 0;
    for (const auto& p : out.columns)
      if (rmp_.add_column(p)) ++added;
    report.columns_generated += added;
    return added;
  }

  /// Lagrangian bound at `point` when the pricer certified a lower bound.
  void offer_center(const Duals& point, const PricingOutcome& out) {
    if (!std::isfinite(out.opt_bound) && out.opt_bound < 0) {
      if (!smoother_.has_center()) smoother_.offer(point, -kInfinity);
      return;
    }
    double dual_obj = rmp_.fixed_cost();
    for (std::size_t e = 0; e < point.element.size(); ++e)
      if (rmp_.row_active(static_cast<ElementId>(e))) dual_obj += point.element[e];
    double kappa = static_cast<double>(rmp_.row_count());
    if (rmp_.cardinality()) {
      dual_obj += static_cast<double>(*rmp_.cardinality()) * point.per_path;
      kappa = static_cast<double>(*rmp_.cardinality());
    }
    const double lb = dual_obj + kappa * std::min(0.0, out.opt_bound);
    smoother_.offer(point, lb);
  }

  const NestedProblem* problem_;
  SolverConfig config_;
  Rmp rmp_;
  DualSmoother smoother_;
  std::unique_ptr<AdaptivePricer> adaptive_;
  std::unique_ptr<EnumerativePricer> enumerative_;
  RmpSolution solution_;
  std::size_t iteration_ = 0;
};

inline RunReport solve_root(const NestedProblem& problem, const MasterSpec& master, const SolverConfig& config) {
  ColumnGeneration cg(problem, master, config);
  return cg.run();
}

// ---------------------------------------------------------------------------

struct DiveResult {
  bool success = false;
  double lower_bound = 0.0;
  double upper_bound = kInfinity;
  double gap = kInfinity;
  std::vector<Path> solution;
  std::size_t rounds = 0;
  std::size_t fixed_columns = 0;
  RunReport root;
  std::string failure;
};

inline nlohmann::json to_json(const DiveResult& d) {
  return nlohmann::json{{"success", d.success},
                        {"lower_bound", d.lower_bound},
                        {"upper_bound", std::isfinite(d.upper_bound) ? nlohmann::json(d.upper_bound) : nlohmann::json(nullptr)},
                        {"gap", std::isfinite(d.gap) ? nlohmann::json(d.gap) : nlohmann::json(nullptr)},
                        {"rounds", d.rounds},
                        {"fixed_columns", d.fixed_columns},
                        {"failure", d.failure},
                        {"root", to_json(d.root)}};
}

/// Columns to fix in one diving round: the highest fractional value plus every
/// other fractional value above 0.6, in descending order. Returns pool indices.
inline std::vector<std::size_t> dive_selection(const std::vector<double>& values, const std::vector<bool>& eligible,
                                               double tol = 1e-6) {
  std::vector<std::size_t> frac;
  for (std::size_t j = 0; j < values.size(); ++j)
    if (eligible[j] && values[j] > tol && values[j] < 1.0 - tol) frac.push_back(j);
  std::stable_sort(frac.begin(), frac.end(), [&](auto a, auto b) { return values[a] > values[b]; });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < frac.size(); ++i)
    if (i == 0 || values[frac[i]] > 0.6) out.push_back(frac[i]);
  return out;
}

inline DiveResult dive(const NestedProblem& problem, const MasterSpec& master, const SolverConfig& config,
                       std::size_t max_rounds = 1000) {
  constexpr double tol = 1e-6;
  DiveResult result;
  ColumnGeneration cg(problem, master, config);
  result.root = cg.run();
  result.lower_bound = result.root.lp_value;
  std::vector<bool> forbidden(problem.element_count(), false);

  for (result.rounds = 0; result.rounds < max_rounds; ++result.rounds) {
    const auto& sol = cg.solution();
    auto& rmp = cg.rmp();
    if (sol.artificial_mass > tol) {
      result.failure = "artificial columns remain in the solution";
      return result;
    }
    const auto& cols = rmp.columns();
    std::vector<bool> eligible(cols.size());
    bool integral = true;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      eligible[j] = !cols[j].artificial;
      const double v = sol.values[j];
      if (eligible[j] && std::abs(v - std::round(v)) > tol) integral = false;
    }
    if (integral) {
      result.solution = rmp.fixed_paths();
      for (std::size_t j = 0; j < cols.size(); ++j)
        for (long k = 0; eligible[j] && k < std::lround(sol.values[j]); ++k) result.solution.push_back(cols[j].path);
      result.upper_bound = sol.objective;
      result.success = true;
      const double lb = result.lower_bound;
      result.gap = std::abs(lb) > 1e-9 ? (result.upper_bound - lb) / std::abs(lb) : result.upper_bound - lb;
      return result;
    }

    auto pick = dive_selection(sol.values, eligible, tol);
    // Respect the remaining cardinality and, for partitioning, mutual disjointness.
    std::vector<std::uint64_t> ids;
    std::vector<bool> taken(problem.element_count(), false);
    auto remaining = rmp.cardinality();
    for (std::size_t j : pick) {
      if (remaining && static_cast<std::int64_t>(ids.size()) >= *remaining) break;
      bool clash = false;
      if (master.sense == Sense::partition)
        for (ElementId e : cols[j].elements) clash = clash || taken[e];
      if (clash) continue;
      for (ElementId e : cols[j].elements) taken[e] = true;
      ids.push_back(cols[j].id);
    }
    if (ids.empty()) {
      result.failure = "no column could be fixed";
      return result;
    }
    for (auto id : ids) {
      const auto& now = rmp.columns();
      for (std::size_t j = 0; j < now.size(); ++j)
        if (now[j].id == id) {
          if (master.sense == Sense::partition)
            for (ElementId e : now[j].elements) forbidden[e] = true;
          rmp.fix_column(j);
          ++result.fixed_columns;
          break;
        }
    }
    if (master.sense == Sense::partition) cg.forbid(forbidden);
    cg.run();
  }
  result.failure = "round limit reached";
  return result;
}

}  // namespace nestcg
