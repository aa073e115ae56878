#include "stochctm/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stochctm/errors.hpp"

namespace stochctm {

std::size_t LinearProgram::add_variable(double cost, double lo, double hi) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  for (auto& row : rows) row.push_back(0.0);
  return objective.size() - 1;
}

void LinearProgram::add_row(std::vector<double> coeffs, double bound) {
  coeffs.resize(objective.size(), 0.0);
  rows.push_back(std::move(coeffs));
  rhs.push_back(bound);
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal:
      return "optimal";
    case LpStatus::infeasible:
      return "infeasible";
    case LpStatus::unbounded:
      return "unbounded";
  }
  return "unknown";
}

double max_violation(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t i = 0; i < lp.rows.size(); ++i) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) lhs += lp.rows[i][j] * x[j];
    worst = std::max(worst, lhs - lp.rhs[i]);
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    worst = std::max(worst, lp.lower[j] - x[j]);
    worst = std::max(worst, x[j] - lp.upper[j]);
  }
  return worst;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_shape(const LinearProgram& lp) {
  const std::size_t n = lp.num_vars();
  if (lp.lower.size() != n || lp.upper.size() != n) {
    throw ArgumentError("LinearProgram: bound vectors do not match variable count");
  }
  if (lp.rhs.size() != lp.rows.size()) {
    throw ArgumentError("LinearProgram: rhs length does not match row count");
  }
  for (double c : lp.objective) {
    if (std::isnan(c)) throw ArgumentError("LinearProgram: NaN objective coefficient");
  }
  for (std::size_t i = 0; i < lp.rows.size(); ++i) {
    if (lp.rows[i].size() != n) throw ArgumentError("LinearProgram: row length mismatch");
    if (std::isnan(lp.rhs[i])) throw ArgumentError("LinearProgram: NaN right-hand side");
    for (double a : lp.rows[i]) {
      if (!std::isfinite(a)) throw ArgumentError("LinearProgram: non-finite row entry");
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isnan(lp.lower[j]) || std::isnan(lp.upper[j]) || lp.lower[j] > lp.upper[j]) {
      throw ArgumentError("LinearProgram: invalid variable bounds");
    }
  }
}

// Original variable j = offset + sum(sign * y_col) over its standard columns.
struct ColumnMap {
  double offset = 0.0;
  std::size_t col = 0;
  double sign = 1.0;
  bool split = false;  // free variable: y_col - y_{col+1}
};

// max c.y, A y <= b, y >= 0
struct StandardForm {
  std::vector<ColumnMap> map;
  std::size_t n = 0;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  std::vector<double> c;
  double objective_offset = 0.0;
};

StandardForm standardize(const LinearProgram& lp) {
  StandardForm sf;
  const std::size_t n = lp.num_vars();
  sf.map.resize(n);
  std::vector<std::pair<std::size_t, double>> upper_rows;  // (std col, bound)
  for (std::size_t j = 0; j < n; ++j) {
    ColumnMap& m = sf.map[j];
    const double lo = lp.lower[j];
    const double hi = lp.upper[j];
    m.col = sf.n;
    if (std::isfinite(lo)) {
      m.offset = lo;
      m.sign = 1.0;
      sf.n += 1;
      if (std::isfinite(hi)) upper_rows.emplace_back(m.col, hi - lo);
    } else if (std::isfinite(hi)) {
      m.offset = hi;
      m.sign = -1.0;
      sf.n += 1;
    } else {
      m.split = true;
      sf.n += 2;
    }
  }
  auto expand = [&](const std::vector<double>& coeffs, double& constant) {
    std::vector<double> out(sf.n, 0.0);
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
      const ColumnMap& m = sf.map[j];
      constant += coeffs[j] * m.offset;
      if (m.split) {
        out[m.col] += coeffs[j];
        out[m.col + 1] -= coeffs[j];
      } else {
        out[m.col] += coeffs[j] * m.sign;
      }
    }
    return out;
  };
  sf.c = expand(lp.objective, sf.objective_offset);
  for (std::size_t i = 0; i < lp.rows.size(); ++i) {
    double constant = 0.0;
    sf.A.push_back(expand(lp.rows[i], constant));
    sf.b.push_back(lp.rhs[i] - constant);
  }
  for (auto [col, bound] : upper_rows) {
    std::vector<double> row(sf.n, 0.0);
    row[col] = 1.0;
    sf.A.push_back(std::move(row));
    sf.b.push_back(bound);
  }
  return sf;
}

std::vector<double> recover(const StandardForm& sf, const std::vector<double>& y) {
  std::vector<double> x(sf.map.size());
  for (std::size_t j = 0; j < sf.map.size(); ++j) {
    const ColumnMap& m = sf.map[j];
    x[j] = m.split ? y[m.col] - y[m.col + 1] : m.offset + m.sign * y[m.col];
  }
  return x;
}

class Tableau {
 public:
  Tableau(const StandardForm& sf, double tol) : tol_(tol) {
    m_ = sf.A.size();
    n_ = sf.n;
    std::size_t artificials = 0;
    for (double b : sf.b) artificials += b < 0.0 ? 1 : 0;
    cols_ = n_ + m_ + artificials;
    stride_ = cols_ + 1;
    t_.assign((m_ + 1) * stride_, 0.0);
    basis_.resize(m_);
    std::size_t art = n_ + m_;
    for (std::size_t i = 0; i < m_; ++i) {
      const double sign = sf.b[i] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = sign * sf.A[i][j];
      at(i, n_ + i) = sign;
      rhs(i) = sign * sf.b[i];
      if (sign < 0.0) {
        at(i, art) = 1.0;
        basis_[i] = art++;
      } else {
        basis_[i] = n_ + i;
      }
    }
  }

  bool is_artificial(std::size_t j) const { return j >= n_ + m_; }

  // Reduced-cost row for the cost vector `cost` (length cols_).
  void load_objective(const std::vector<double>& cost) {
    for (std::size_t j = 0; j < stride_; ++j) obj(j) = j < cols_ ? cost[j] : 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < stride_; ++j) obj(j) -= cb * at(i, j);
    }
  }

  // Returns false when unbounded.
  bool optimize(bool allow_artificial, std::size_t& pivots, std::size_t max_pivots) {
    for (;;) {
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (!allow_artificial && is_artificial(j)) continue;
        if (obj(j) > tol_) {
          enter = j;
          break;
        }
      }
      if (enter == cols_) return true;
      std::size_t leave = m_;
      double best = kInf;
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = at(i, enter);
        if (a <= tol_) continue;
        const double ratio = rhs(i) / a;
        if (ratio < best - 1e-12 ||
            (std::abs(ratio - best) <= 1e-12 && leave < m_ && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
      if (++pivots > max_pivots) throw NumericalError("simplex pivot budget exhausted");
    }
  }

  void pivot(std::size_t r, std::size_t s) {
    const double inv = 1.0 / at(r, s);
    for (std::size_t j = 0; j < stride_; ++j) at(r, j) *= inv;
    at(r, s) = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double factor = t_[i * stride_ + s];
      if (factor == 0.0) continue;
      double* row = &t_[i * stride_];
      const double* prow = &t_[r * stride_];
      for (std::size_t j = 0; j < stride_; ++j) row[j] -= factor * prow[j];
      row[s] = 0.0;
    }
    basis_[r] = s;
  }

  // Pivots basic artificials (at zero level) out where possible.
  void purge_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (!is_artificial(basis_[i])) continue;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (std::abs(at(i, j)) > tol_) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  std::vector<double> primal() const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) y[basis_[i]] = std::max(0.0, t_[i * stride_ + cols_]);
    }
    return y;
  }

  // Row multipliers of the original (un-negated) rows.
  std::vector<double> duals() const {
    std::vector<double> y(m_);
    for (std::size_t i = 0; i < m_; ++i) y[i] = -t_[m_ * stride_ + n_ + i];
    return y;
  }

  double objective_value() const { return -t_[m_ * stride_ + cols_]; }
  std::size_t cols() const { return cols_; }
  std::size_t structural() const { return n_; }
  std::size_t rows() const { return m_; }

 private:
  double& at(std::size_t i, std::size_t j) { return t_[i * stride_ + j]; }
  double at(std::size_t i, std::size_t j) const { return t_[i * stride_ + j]; }
  double& rhs(std::size_t i) { return t_[i * stride_ + cols_]; }
  double& obj(std::size_t j) { return t_[m_ * stride_ + j]; }
  double obj(std::size_t j) const { return t_[m_ * stride_ + j]; }

  double tol_;
  std::size_t m_ = 0, n_ = 0, cols_ = 0, stride_ = 0;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
};

double feasibility_tolerance(const StandardForm& sf) {
  double scale = 0.0;
  for (double b : sf.b) scale = std::max(scale, std::abs(b));
  return 1e-9 * (1.0 + scale);
}

// Runs phase one; returns false when the program is infeasible.
bool phase_one(Tableau& tab, const StandardForm& sf, const LpOptions& options,
               std::size_t& pivots) {
  std::vector<double> cost(tab.cols(), 0.0);
  bool any = false;
  for (std::size_t j = 0; j < tab.cols(); ++j) {
    if (tab.is_artificial(j)) {
      cost[j] = -1.0;
      any = true;
    }
  }
  if (!any) return true;
  tab.load_objective(cost);
  tab.optimize(true, pivots, options.max_pivots);
  if (tab.objective_value() < -feasibility_tolerance(sf)) return false;
  tab.purge_artificials();
  return true;
}

}  // namespace

LpResult solve(const LinearProgram& lp, const LpOptions& options) {
  check_shape(lp);
  const StandardForm sf = standardize(lp);
  Tableau tab(sf, options.pivot_tolerance);
  LpResult result;
  if (!phase_one(tab, sf, options, result.pivots)) {
    result.status = LpStatus::infeasible;
    return result;
  }
  std::vector<double> cost(tab.cols(), 0.0);
  for (std::size_t j = 0; j < sf.n; ++j) cost[j] = sf.c[j];
  tab.load_objective(cost);
  if (!tab.optimize(false, result.pivots, options.max_pivots)) {
    result.status = LpStatus::unbounded;
    result.x = recover(sf, tab.primal());
    return result;
  }
  result.status = LpStatus::optimal;
  const std::vector<double> y = tab.primal();
  result.x = recover(sf, y);
  double primal = 0.0;
  for (std::size_t j = 0; j < sf.n; ++j) primal += sf.c[j] * y[j];
  const std::vector<double> dual = tab.duals();
  double dual_obj = 0.0;
  for (std::size_t i = 0; i < dual.size(); ++i) dual_obj += sf.b[i] * dual[i];
  result.duality_gap = std::abs(primal - dual_obj);
  result.duals.assign(dual.begin(), dual.begin() + static_cast<std::ptrdiff_t>(lp.num_rows()));
  result.objective = 0.0;
  for (std::size_t j = 0; j < lp.num_vars(); ++j) result.objective += lp.objective[j] * result.x[j];
  result.max_violation = max_violation(lp, result.x);
  return result;
}

FeasibilityResult feasible(const LinearProgram& lp, const LpOptions& options) {
  check_shape(lp);
  const StandardForm sf = standardize(lp);
  Tableau tab(sf, options.pivot_tolerance);
  std::size_t pivots = 0;
  FeasibilityResult out;
  out.feasible = phase_one(tab, sf, options, pivots);
  if (out.feasible) {
    out.witness = recover(sf, tab.primal());
    out.max_violation = max_violation(lp, out.witness);
  }
  return out;
}

}  // namespace stochctm
