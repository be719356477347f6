#pragma once

// Dense two-phase simplex for   min c.x  s.t.  A x = b,  x >= 0
// with a handful of rows and many columns (the mixture problems here have
// at most three rows). Callers are expected to scale rows to O(1).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "cowsf/errors.hpp"

namespace cowsf {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  std::vector<double> duals;  ///< one per row, for the original row signs
  double objective = 0.0;
};

class DenseSimplex {
 public:
  DenseSimplex(std::span<const double> cost, const std::vector<std::vector<double>>& rows, std::span<const double> rhs,
               double tolerance = 1e-11)
      : m_(rows.size()), n_(cost.size()), tol_(tolerance), width_(n_ + m_ + 1) {
    if (rhs.size() != m_) throw argument_error("simplex: rhs size mismatch");
    cost_.assign(cost.begin(), cost.end());
    cost_.resize(n_ + m_, 0.0);
    tab_.assign(m_ * width_, 0.0);
    sign_.assign(m_, 1.0);
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      if (rows[i].size() != n_) throw argument_error("simplex: row size mismatch");
      sign_[i] = rhs[i] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = sign_[i] * rows[i][j];
      at(i, n_ + i) = 1.0;
      at(i, width_ - 1) = sign_[i] * rhs[i];
      basis_[i] = n_ + i;
    }
  }

  LpResult solve(std::size_t max_iterations = 100000) {
    LpResult res;
    // Phase 1: minimise the artificial sum.
    std::vector<double> phase1(n_ + m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) phase1[n_ + i] = 1.0;
    if (!iterate(phase1, /*allow_artificial=*/false, max_iterations)) {
      res.status = LpStatus::IterationLimit;
      return res;
    }
    double infeasibility = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] >= n_) infeasibility += rhs(i);
    }
    if (infeasibility > 1e-9) {
      res.status = LpStatus::Infeasible;
      return res;
    }
    drive_out_artificials();

    if (!iterate(cost_, false, max_iterations)) {
      res.status = unbounded_ ? LpStatus::Unbounded : LpStatus::IterationLimit;
      return res;
    }

    res.status = LpStatus::Optimal;
    res.x.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) res.x[basis_[i]] = std::max(0.0, rhs(i));
    }
    res.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) res.objective += cost_[j] * res.x[j];
    // y_i = c_B B^{-1} e_i; the artificial columns hold B^{-1}.
    res.duals.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      double y = 0.0;
      for (std::size_t k = 0; k < m_; ++k) y += cost_[basis_[k]] * at(k, n_ + i);
      res.duals[i] = y * sign_[i];
    }
    return res;
  }

 private:
  double& at(std::size_t i, std::size_t j) { return tab_[i * width_ + j]; }
  double rhs(std::size_t i) const { return tab_[i * width_ + width_ - 1]; }

  bool iterate(const std::vector<double>& c, bool allow_artificial, std::size_t max_iterations) {
    unbounded_ = false;
    const std::size_t cols = allow_artificial ? n_ + m_ : n_;
    std::vector<double> reduced(cols);
    std::size_t stall = 0;
    double last_obj = std::numeric_limits<double>::infinity();
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
      std::vector<double> cb(m_);
      double obj = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        cb[i] = c[basis_[i]];
        obj += cb[i] * rhs(i);
      }
      stall = obj < last_obj - tol_ ? 0 : stall + 1;
      last_obj = std::min(last_obj, obj);
      const bool bland = stall > 50;

      std::size_t enter = cols;
      double best = -tol_;
      for (std::size_t j = 0; j < cols; ++j) {
        double d = c[j];
        for (std::size_t i = 0; i < m_; ++i) d -= cb[i] * tab_[i * width_ + j];
        if (d < best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter == cols) return true;

      std::size_t leave = m_;
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = at(i, enter);
        if (a <= tol_) continue;
        const double r = rhs(i) / a;
        if (r < ratio - tol_ || (r <= ratio + tol_ && leave < m_ && basis_[i] < basis_[leave])) {
          ratio = r;
          leave = i;
        }
      }
      if (leave == m_) {
        unbounded_ = true;
        return false;
      }
      pivot(leave, enter);
    }
    return false;
  }

  void pivot(std::size_t row, std::size_t col) {
    const double p = at(row, col);
    for (std::size_t j = 0; j < width_; ++j) at(row, j) /= p;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == row) continue;
      const double factor = at(i, col);
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) at(i, j) -= factor * at(row, j);
    }
    basis_[row] = col;
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      std::size_t best = n_;
      double mag = tol_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (std::abs(at(i, j)) > mag) {
          mag = std::abs(at(i, j));
          best = j;
        }
      }
      // No candidate: redundant row, the artificial stays basic at zero.
      if (best < n_) pivot(i, best);
    }
  }

  std::size_t m_;
  std::size_t n_;
  double tol_;
  std::size_t width_;
  std::vector<double> cost_;
  std::vector<double> tab_;
  std::vector<double> sign_;
  std::vector<std::size_t> basis_;
  bool unbounded_ = false;
};

inline LpResult solve_lp(std::span<const double> cost, const std::vector<std::vector<double>>& rows,
                         std::span<const double> rhs) {
  return DenseSimplex(cost, rows, rhs).solve();
}

}  // namespace cowsf
