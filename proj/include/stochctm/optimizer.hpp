#pragma once

// Stability-constrained throughput maximization for a fixed A: enumerate the
// binaries (w, xi), solve the remaining LP over (v, b, f~, r~) for each, and
// the closed-form results for stationary hotspots.

#include <cstddef>
#include <string>
#include <vector>

#include "stochctm/certifier.hpp"
#include "stochctm/highway.hpp"
#include "stochctm/lp.hpp"

namespace stochctm {

// Auxiliary flow block (mode i, queue pattern y != 0, congestion pattern z).
struct MilpBlock {
  std::size_t mode = 0;
  std::vector<int> y;
  std::vector<int> z;
};

// Every block in enumeration order: mode, then y (binary, cell 0 is the low
// bit), then z.
std::vector<MilpBlock> milp_blocks(std::size_t cells, std::size_t modes);

// Drift rows of a block are dropped exactly when some queued ramp is unmetered.
bool drift_rows_dropped(const MilpBlock& block, const std::vector<int>& w);

struct MilpOptions {
  double offset_bound = 1e6;
  // 0 drops relaxed drift rows; a positive value keeps them as
  // row <= -1 + big_m1 * sum_k y_k w_k instead.
  double big_m1 = 0.0;
  // Extra rows v_k <= R_k and, for stationary hotspots, the mean-capacity
  // row sum_k rho_k^K v_k <= sum_i p_i F_K(i). Both are necessary for
  // stability and keep the LP bounded under infinite demand.
  bool necessary_rows = true;
};

// Index map of the LP built for fixed binaries.
struct MilpLayout {
  std::size_t cells = 0;
  std::size_t modes = 0;
  std::vector<MilpBlock> blocks;
  std::size_t v(std::size_t k) const { return k; }
  std::size_t b(std::size_t mode, std::size_t h) const { return cells + mode * cells + h; }
  std::size_t f(std::size_t block, std::size_t k) const {
    return cells * (1 + modes) + block * 2 * cells + k;
  }
  std::size_t r(std::size_t block, std::size_t k) const { return f(block, k) + cells; }
};

// Big-M constant for the xi-gated v rows: sum_k (R_k + F_k) + max finite d_k.
double big_m2(const HighwaySpec& spec);

// Smallest big_m1 that deactivates a relaxed drift row given the offset box.
double big_m1_min(const HighwaySpec& spec, const MarkovCapacityModel& model, const Matrix& A,
                  double offset_bound);

// The full LP for fixed (w, xi), maximizing sum_k v_k.
LinearProgram build_milp(const HighwaySpec& spec, const MarkovCapacityModel& model,
                         const Matrix& A, const std::vector<int>& w, const std::vector<int>& xi,
                         const MilpOptions& options = {}, MilpLayout* layout = nullptr);

// Drift row h of mode i as a linear form in (v, r~, f~, b): value =
// v.inflow + r.ramp_flow + f.cell_flow + sum_j offsets[j] . b^(j), to be kept <= -1.
struct DriftRowForm {
  std::vector<double> inflow;
  std::vector<double> ramp_flow;
  std::vector<double> cell_flow;
  std::vector<double> offsets;  // per mode, coefficient of b^(j)_h
};
DriftRowForm milp_drift_row(const HighwaySpec& spec, const MarkovCapacityModel& model,
                            const Matrix& A, std::size_t mode, std::size_t h);

struct SubproblemLog {
  std::vector<int> w;
  std::vector<int> xi;
  std::string status;  // optimal, infeasible, or not_certified
  double J = 0.0;
  std::vector<double> v;
  std::size_t blocks_total = 0;
  std::size_t blocks_with_rows = 0;
  std::size_t blocks_added = 0;
  std::size_t rounds = 0;
};

struct OptResult {
  double J = 0.0;
  std::vector<double> v;
  std::vector<int> w;
  std::vector<int> xi;
  DriftCertificate certificate;
  std::size_t subproblem_count = 0;
  std::size_t pruned_count = 0;
  std::vector<SubproblemLog> log;
};

struct OptimizeOptions {
  MilpOptions milp;
  std::size_t threads = 0;  // 0: default_thread_count()
};

// Exhaustive over w; xi != 0 assignments are pruned because xi_k = 0 relaxes
// both v rows of ramp k. Among equal J: fewer metered ramps, then
// lexicographically smallest w. Among equal-J inflows of one w the most
// upstream-weighted v is returned. Throws ArgumentError for K > 8.
OptResult maximize_throughput(const HighwaySpec& spec, const MarkovCapacityModel& model,
                              const Matrix& A, const OptimizeOptions& options = {});

// Fixed-w throughput (xi = 0), used to compare metering plans.
SubproblemLog solve_fixed_w(const HighwaySpec& spec, const MarkovCapacityModel& model,
                            const Matrix& A, const std::vector<int>& w,
                            const MilpOptions& options = {});

// Sum_k rho_k^K d_k < sum_i p_i F_K(i), every d_k finite and at most R_k.
bool is_feasible_demand(const HighwaySpec& spec, const MarkovCapacityModel& model,
                        const std::vector<double>& d);

struct MarginDecision {
  std::vector<double> v;
  std::vector<std::vector<int>> w;  // one entry, or both plans at equal margins
  double mainline_margin = 0.0;     // F_1 - d_1
  double ramp_margin = 0.0;         // R_2 - d_2
};

// Throws NotApplicableError unless K = 2, rho_1 = 1, F_1 = R_1, the hotspot
// is stationary at cell 2 and d is feasible.
MarginDecision margin_criterion(const HighwaySpec& spec, const MarkovCapacityModel& model,
                                const std::vector<double>& d);

// v_1 range of an optimal set on the line v_1 + v_2 = F2bar.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = false;
  bool hi_open = false;
  bool empty() const;
  bool contains(double x, double tol = 0.0) const;
};

struct InfiniteDemandOptimum {
  double mean_capacity = 0.0;  // F2bar
  Interval metered_set;        // V1*, paired with w = [1, 0]
  Interval open_set;           // V2*, paired with w = [1, 1]
  std::vector<double> v;       // representative
  std::vector<int> w;
  // Whether (v, w) lies in the optimal set (v on the line within tol).
  bool contains(const std::vector<double>& v, const std::vector<int>& w, double tol) const;
};

// Same preconditions as margin_criterion except for the demand.
InfiniteDemandOptimum infinite_demand_optimum(const HighwaySpec& spec,
                                              const MarkovCapacityModel& model);

// Greedy metering plan for a stationary hotspot with feasible demand d.
std::vector<int> hotspot_algorithm(const HighwaySpec& spec, const MarkovCapacityModel& model,
                                   const std::vector<double>& d);

}  // namespace stochctm
