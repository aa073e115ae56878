#pragma once

// Dense two-phase simplex for small linear programs:
//
//   maximize   c . x
//   subject to a_i . x <= rhs_i      for every row i
//              lower_j <= x_j <= upper_j
//
// Bounds may be infinite. Bland's rule is used for both the entering and the
// leaving variable, so the method terminates on degenerate problems.

#include <cstddef>
#include <vector>

namespace stochctm {

struct LinearProgram {
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t num_vars() const { return objective.size(); }
  std::size_t num_rows() const { return rows.size(); }

  // Appends a variable with the given objective coefficient and bounds and
  // returns its index. Existing rows are padded with a zero coefficient.
  std::size_t add_variable(double cost, double lo, double hi);
  void add_row(std::vector<double> coeffs, double bound);
};

enum class LpStatus { optimal, infeasible, unbounded };

const char* to_string(LpStatus status);

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  double max_violation = 0.0;
  std::vector<double> duals;  // one per row of the input program
  double duality_gap = 0.0;
  std::size_t pivots = 0;
};

struct LpOptions {
  double pivot_tolerance = 1e-9;
  std::size_t max_pivots = 200000;
};

// Throws ArgumentError on dimension mismatch or NaN data and NumericalError
// when the pivot budget runs out.
LpResult solve(const LinearProgram& lp, const LpOptions& options = {});

struct FeasibilityResult {
  bool feasible = false;
  std::vector<double> witness;
  double max_violation = 0.0;
};

// Phase one only; the objective is ignored.
FeasibilityResult feasible(const LinearProgram& lp, const LpOptions& options = {});

// Largest amount by which x breaks a row or a bound (0 when feasible).
double max_violation(const LinearProgram& lp, const std::vector<double>& x);

}  // namespace stochctm
