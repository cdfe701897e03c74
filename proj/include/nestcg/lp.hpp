#pragma once

// Dense revised simplex for small LPs: min c.x subject to row constraints and
// x >= 0. Two phases, Dantzig pricing with a Bland fallback on stalling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "nestcg/model.hpp"

namespace nestcg {

enum class RowSense { ge, le, eq };

struct LpColumn {
  double cost = 0.0;
  std::vector<std::pair<std::size_t, double>> entries;  // (row, coefficient)
};

struct LpProblem {
  std::vector<RowSense> sense;
  std::vector<double> rhs;
  std::vector<LpColumn> columns;

  [[nodiscard]] std::size_t rows() const { return rhs.size(); }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::optimal;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> duals;  // one per row, sign as in the original rows
  std::vector<bool> basic;    // per structural column
  /// Basis as variable keys: structural j -> j, slack of row i -> columns + i.
  std::vector<std::size_t> basis;
  std::size_t iterations = 0;
};

struct LpOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-11;
  std::size_t refactor_period = 64;
  std::size_t degenerate_switch = 50;
  std::size_t max_iterations = 1'000'000;
};

class SimplexSolver {
 public:
  explicit SimplexSolver(LpOptions options = {}) : opt_(options) {}

  /// `warm` is a basis from a previous result on an LP with the same rows;
  /// it is used when still valid and primal feasible.
  LpResult solve(const LpProblem& lp, const std::vector<std::size_t>* warm = nullptr) {
    setup(lp);
    bool warmed = warm && try_basis(*warm);
    if (!warmed) crash();
    LpResult res;
    if (!warmed && has_artificial_basic()) {
      phase_ = 1;
      iterate(res.iterations);
      if (phase1_objective() > 1e-7 * (1.0 + rhs_scale_)) {
        res.status = LpStatus::infeasible;
        return res;
      }
      drive_out_artificials();
    }
    phase_ = 2;
    if (!iterate(res.iterations)) {
      res.status = LpStatus::unbounded;
      return res;
    }
    if (!verify()) {
      refactor();
      if (!iterate(res.iterations) || !verify()) throw NumericalFailure("simplex solution failed verification");
    }
    extract(res);
    return res;
  }

 private:
  // Variable layout: [0, n) structural, [n, n+m) slacks, [n+m, n+2m) artificials.
  void setup(const LpProblem& lp) {
    m_ = lp.rows();
    n_ = lp.columns.size();
    if (lp.sense.size() != m_) throw InvalidInput("row sense count mismatch");
    sign_.assign(m_, 1.0);
    sense_ = lp.sense;
    b_ = lp.rhs;
    rhs_scale_ = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (b_[i] < 0) {
        sign_[i] = -1.0;
        b_[i] = -b_[i];
        if (sense_[i] == RowSense::ge) sense_[i] = RowSense::le;
        else if (sense_[i] == RowSense::le) sense_[i] = RowSense::ge;
      }
      rhs_scale_ = std::max(rhs_scale_, b_[i]);
    }
    cols_.assign(n_ + 2 * m_, {});
    cost_.assign(n_ + 2 * m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      cost_[j] = lp.columns[j].cost;
      for (auto [i, a] : lp.columns[j].entries) {
        if (i >= m_) throw InvalidInput("column entry row out of range");
        if (a != 0.0) cols_[j].emplace_back(i, a * sign_[i]);
      }
    }
    enterable_.assign(n_ + 2 * m_, true);
    for (std::size_t i = 0; i < m_; ++i) {
      if (sense_[i] == RowSense::le) cols_[n_ + i] = {{i, 1.0}};
      else if (sense_[i] == RowSense::ge) cols_[n_ + i] = {{i, -1.0}};
      else enterable_[n_ + i] = false;
      cols_[n_ + m_ + i] = {{i, 1.0}};
      enterable_[n_ + m_ + i] = false;
    }
    head_.assign(m_, 0);
    is_basic_.assign(n_ + 2 * m_, false);
  }

  bool try_basis(const std::vector<std::size_t>& keys) {
    if (keys.size() != m_) return false;
    std::fill(is_basic_.begin(), is_basic_.end(), false);
    for (std::size_t i = 0; i < m_; ++i) {
      const auto k = keys[i];
      if (k >= n_ + m_ || is_basic_[k] || !enterable_[k]) return false;
      head_[i] = k;
      is_basic_[k] = true;
    }
    if (!refactor()) return false;
    for (double v : xb_)
      if (v < -opt_.feasibility_tol * (1.0 + rhs_scale_)) return false;
    return true;
  }

  void crash() {
    std::fill(is_basic_.begin(), is_basic_.end(), false);
    // Singleton structurals with a positive entry give a feasible start for their row.
    std::vector<std::optional<std::size_t>> single(m_);
    for (std::size_t j = 0; j < n_; ++j) {
      if (cols_[j].size() != 1 || cols_[j][0].second <= 0) continue;
      const auto i = cols_[j][0].first;
      if (sense_[i] == RowSense::le) continue;
      const double ratio = cost_[j] / cols_[j][0].second;
      if (!single[i] || ratio < cost_[*single[i]] / cols_[*single[i]][0].second) single[i] = j;
    }
    for (std::size_t i = 0; i < m_; ++i) {
      std::size_t k;
      if (sense_[i] == RowSense::le) k = n_ + i;
      else if (single[i]) k = *single[i];
      else k = n_ + m_ + i;
      head_[i] = k;
      is_basic_[k] = true;
    }
    if (!refactor()) throw NumericalFailure("crash basis is singular");
  }

  [[nodiscard]] bool has_artificial_basic() const {
    for (auto k : head_)
      if (k >= n_ + m_) return true;
    return false;
  }

  [[nodiscard]] double phase_cost(std::size_t k) const {
    if (phase_ == 1) return k >= n_ + m_ ? 1.0 : 0.0;
    return k < n_ ? cost_[k] : 0.0;
  }

  [[nodiscard]] double phase1_objective() const {
    double s = 0.0;
    for (std::size_t i = 0; i < m_; ++i)
      if (head_[i] >= n_ + m_) s += xb_[i];
    return s;
  }

  /// Gauss-Jordan inverse of the basis matrix; false when singular.
  bool refactor() {
    std::vector<double> a(m_ * m_, 0.0), inv(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      for (auto [r, v] : cols_[head_[i]]) a[r * m_ + i] = v;
    for (std::size_t i = 0; i < m_; ++i) inv[i * m_ + i] = 1.0;
    for (std::size_t c = 0; c < m_; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < m_; ++r)
        if (std::abs(a[r * m_ + c]) > std::abs(a[piv * m_ + c])) piv = r;
      if (std::abs(a[piv * m_ + c]) < 1e-12) return false;
      if (piv != c)
        for (std::size_t k = 0; k < m_; ++k) {
          std::swap(a[piv * m_ + k], a[c * m_ + k]);
          std::swap(inv[piv * m_ + k], inv[c * m_ + k]);
        }
      const double d = a[c * m_ + c];
      for (std::size_t k = 0; k < m_; ++k) {
        a[c * m_ + k] /= d;
        inv[c * m_ + k] /= d;
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = a[r * m_ + c];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m_; ++k) {
          a[r * m_ + k] -= f * a[c * m_ + k];
          inv[r * m_ + k] -= f * inv[c * m_ + k];
        }
      }
    }
    binv_ = std::move(inv);
    xb_.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < m_; ++k) s += binv_[i * m_ + k] * b_[k];
      xb_[i] = s;
    }
    since_refactor_ = 0;
    return true;
  }

  [[nodiscard]] std::vector<double> row_prices() const {
    std::vector<double> y(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = phase_cost(head_[i]);
      if (cb == 0.0) continue;
      for (std::size_t k = 0; k < m_; ++k) y[k] += cb * binv_[i * m_ + k];
    }
    return y;
  }

  [[nodiscard]] double reduced(std::size_t k, const std::vector<double>& y) const {
    double d = phase_cost(k);
    for (auto [r, v] : cols_[k]) d -= y[r] * v;
    return d;
  }

  [[nodiscard]] std::vector<double> ftran(std::size_t k) const {
    std::vector<double> w(m_, 0.0);
    for (auto [r, v] : cols_[k])
      for (std::size_t i = 0; i < m_; ++i) w[i] += binv_[i * m_ + r] * v;
    return w;
  }

  /// Runs the current phase to optimality; false when unbounded.
  bool iterate(std::size_t& iterations) {
    std::size_t degenerate = 0;
    bool bland = false;
    while (true) {
      if (++iterations > opt_.max_iterations) throw NumericalFailure("simplex iteration limit reached");
      if (since_refactor_ >= opt_.refactor_period && !refactor()) throw NumericalFailure("basis became singular");
      const auto y = row_prices();
      std::optional<std::size_t> enter;
      double best = 0.0;
      for (std::size_t k = 0; k < n_ + m_; ++k) {
        if (is_basic_[k] || !enterable_[k]) continue;
        const double d = reduced(k, y);
        const double tol = opt_.optimality_tol * (1.0 + std::abs(phase_cost(k)));
        if (d >= -tol) continue;
        if (bland) {
          enter = k;
          break;
        }
        if (!enter || d < best) {
          enter = k;
          best = d;
        }
      }
      if (!enter) return true;

      const auto w = ftran(*enter);
      std::optional<std::size_t> leave;
      double theta = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        if (w[i] <= opt_.pivot_tol) continue;
        const double ratio = std::max(0.0, xb_[i]) / w[i];
        if (!leave) {
          leave = i;
          theta = ratio;
          continue;
        }
        const double diff = ratio - theta;
        const bool tie = std::abs(diff) <= 1e-12 * (1.0 + theta);
        if (diff < 0 && !tie) {
          leave = i;
          theta = ratio;
        } else if (tie) {
          const bool better = bland ? head_[i] < head_[*leave] : w[i] > w[*leave];
          if (better) {
            leave = i;
            theta = std::min(theta, ratio);
          }
        }
      }
      if (!leave) return false;

      if (theta <= opt_.feasibility_tol) {
        if (++degenerate > opt_.degenerate_switch) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }
      pivot(*leave, *enter, w, theta);
    }
  }

  void pivot(std::size_t r, std::size_t enter, const std::vector<double>& w, double theta) {
    for (std::size_t i = 0; i < m_; ++i) xb_[i] -= theta * w[i];
    xb_[r] = theta;
    const double p = w[r];
    for (std::size_t k = 0; k < m_; ++k) binv_[r * m_ + k] /= p;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r || w[i] == 0.0) continue;
      const double f = w[i];
      for (std::size_t k = 0; k < m_; ++k) binv_[i * m_ + k] -= f * binv_[r * m_ + k];
    }
    is_basic_[head_[r]] = false;
    head_[r] = enter;
    is_basic_[enter] = true;
    ++since_refactor_;
    for (auto& v : xb_)
      if (v < 0 && v > -opt_.feasibility_tol) v = 0.0;
  }

  /// Replaces basic artificials (at zero after phase 1) by structural or slack
  /// columns; rows where no replacement exists are redundant.
  void drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (head_[r] < n_ + m_) continue;
      for (std::size_t k = 0; k < n_ + m_; ++k) {
        if (is_basic_[k] || !enterable_[k]) continue;
        const auto w = ftran(k);
        if (std::abs(w[r]) > 1e-7) {
          pivot(r, k, w, xb_[r] / w[r]);
          break;
        }
      }
    }
    refactor();
  }

  bool verify() const {
    std::vector<double> ax(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (xb_[i] < -1e-7 * (1.0 + rhs_scale_)) return false;
      for (auto [r, v] : cols_[head_[i]]) ax[r] += v * xb_[i];
    }
    for (std::size_t i = 0; i < m_; ++i)
      if (std::abs(ax[i] - b_[i]) > 1e-7 * (1.0 + rhs_scale_)) return false;
    return true;
  }

  void extract(LpResult& res) const {
    res.x.assign(n_, 0.0);
    res.basic.assign(n_, false);
    res.objective = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const auto k = head_[i];
      if (k < n_) {
        res.x[k] = std::max(0.0, xb_[i]);
        res.basic[k] = true;
      }
    }
    for (std::size_t j = 0; j < n_; ++j) res.objective += cost_[j] * res.x[j];
    const auto y = row_prices();
    res.duals.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) res.duals[i] = y[i] * sign_[i];
    res.basis.clear();
    for (std::size_t i = 0; i < m_; ++i) {
      // Redundant rows may keep an artificial basic; such bases are not reused.
      if (head_[i] >= n_ + m_) {
        res.basis.clear();
        break;
      }
      res.basis.push_back(head_[i]);
    }
  }

  LpOptions opt_;
  std::size_t m_ = 0, n_ = 0;
  int phase_ = 2;
  double rhs_scale_ = 0.0;
  std::vector<double> sign_;
  std::vector<RowSense> sense_;
  std::vector<double> b_;
  std::vector<std::vector<std::pair<std::size_t, double>>> cols_;
  std::vector<double> cost_;
  std::vector<bool> enterable_;
  std::vector<std::size_t> head_;
  std::vector<bool> is_basic_;
  std::vector<double> binv_;
  std::vector<double> xb_;
  std::size_t since_refactor_ = 0;
};

inline LpResult solve_lp(const LpProblem& lp, const LpOptions& options = {}) {
  SimplexSolver s(options);
  return s.solve(lp);
}

}  // namespace nestcg
