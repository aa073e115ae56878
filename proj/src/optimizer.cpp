#include "stochctm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stochctm/errors.hpp"
#include "stochctm/parallel.hpp"

namespace stochctm {

namespace {

// Symbolic LP terms so the same block rows feed both the master LP (all
// symbols are variables) and the per-block check (v and b are data).
enum class Sym { v, b, f, r };

struct Term {
  Sym sym;
  std::size_t index;  // cell for v/f/r, mode for b
  std::size_t h;      // component for b
  double coef;
};

struct SymRow {
  std::vector<Term> terms;
  double rhs;
};

double mean_bottleneck_capacity(const HighwaySpec& spec, const MarkovCapacityModel& model) {
  const std::vector<double> p = model.steady.empty() ? steady_state(model) : model.steady;
  double mean = 0.0;
  for (std::size_t i = 0; i < model.mode_count(); ++i) {
    mean += p[i] * model.capacity[i][spec.size() - 1];
  }
  return mean;
}

double inflow_cap(const HighwaySpec& spec, std::size_t k, bool necessary_rows) {
  return necessary_rows ? std::min(spec.demand[k], spec.buffer_capacity[k]) : spec.demand[k];
}

std::vector<SymRow> block_rows(const HighwaySpec& spec, const MarkovCapacityModel& model,
                               const Matrix& A, const std::vector<int>& w,
                               const std::vector<int>& xi, const MilpBlock& blk,
                               const MilpOptions& options, double m2, bool with_drift) {
  const std::size_t K = spec.size();
  std::vector<SymRow> rows;
  for (std::size_t k = 0; k < K; ++k) {
    if (blk.y[k] == 0) rows.push_back({{{Sym::r, k, 0, 1.0}, {Sym::v, k, 0, -1.0}}, 0.0});
    rows.push_back({{{Sym::r, k, 0, 1.0}}, spec.buffer_capacity[k]});
    if (blk.z[k] == 0) {
      for (std::size_t h = 0; h < k; ++h) {
        SymRow row{{{Sym::f, k, 0, 1.0}, {Sym::r, k, 0, -1.0}},
                   cumulative_ratio(spec, h, k) * model.min_capacity(h)};
        for (std::size_t l = h + 1; l < k; ++l) {
          row.terms.push_back({Sym::v, l, 0, -cumulative_ratio(spec, l, k)});
        }
        rows.push_back(std::move(row));
      }
      SymRow row{{{Sym::f, k, 0, 1.0}, {Sym::r, k, 0, -1.0}}, 0.0};
      for (std::size_t l = 0; l < k; ++l) {
        row.terms.push_back({Sym::v, l, 0, -cumulative_ratio(spec, l, k)});
      }
      rows.push_back(std::move(row));
    }
    rows.push_back({{{Sym::f, k, 0, 1.0}}, model.capacity[blk.mode][k]});
    if (k + 1 < K && blk.z[k + 1] == 1) {
      rows.push_back({{{Sym::f, k, 0, spec.mainline_ratio[k]},
                       {Sym::f, k + 1, 0, -1.0},
                       {Sym::r, k + 1, 0, 1.0}},
                      0.0});
    }
    if (k > 0 && xi[k] == 1) {
      rows.push_back({{{Sym::v, k, 0, 1.0},
                       {Sym::f, k, 0, -1.0},
                       {Sym::f, k - 1, 0, spec.mainline_ratio[k - 1]}},
                      m2 * w[k]});
      rows.push_back({{{Sym::v, k, 0, 1.0}, {Sym::f, k, 0, -1.0}}, m2 * (1 - w[k])});
    }
  }
  if (!with_drift) return rows;

  double relax = 0.0;
  for (std::size_t k = 0; k < K; ++k) relax += blk.y[k] * w[k];
  if (relax > 0.0 && options.big_m1 <= 0.0) return rows;
  for (std::size_t h = 0; h < K; ++h) {
    const DriftRowForm form = milp_drift_row(spec, model, A, blk.mode, h);
    SymRow row{{}, -1.0 + options.big_m1 * relax};
    for (std::size_t k = 0; k < K; ++k) {
      if (form.inflow[k] != 0.0) row.terms.push_back({Sym::v, k, 0, form.inflow[k]});
      if (form.ramp_flow[k] != 0.0) row.terms.push_back({Sym::r, k, 0, form.ramp_flow[k]});
      if (form.cell_flow[k] != 0.0) row.terms.push_back({Sym::f, k, 0, form.cell_flow[k]});
    }
    for (std::size_t j = 0; j < model.mode_count(); ++j) {
      if (form.offsets[j] != 0.0) row.terms.push_back({Sym::b, j, h, form.offsets[j]});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// Appends v and b variables shared by every block.
void add_shared_variables(LinearProgram& lp, const HighwaySpec& spec,
                          const MarkovCapacityModel& model, const MilpOptions& options,
                          const std::vector<double>& objective) {
  const std::size_t K = spec.size();
  for (std::size_t k = 0; k < K; ++k) {
    lp.add_variable(objective[k], 0.0, inflow_cap(spec, k, options.necessary_rows));
  }
  for (std::size_t i = 0; i < model.mode_count(); ++i) {
    for (std::size_t h = 0; h < K; ++h) {
      const double bound = i == 0 ? 0.0 : options.offset_bound;
      lp.add_variable(0.0, -bound, bound);
    }
  }
  if (options.necessary_rows && is_stationary_hotspot(spec)) {
    std::vector<double> row(lp.num_vars(), 0.0);
    for (std::size_t k = 0; k < K; ++k) row[k] = cumulative_ratio(spec, k, K - 1);
    lp.add_row(std::move(row), mean_bottleneck_capacity(spec, model));
  }
}

// Adds a block's f/r variables and rows to an LP whose leading variables are
// laid out as in MilpLayout.
void add_block(LinearProgram& lp, const MilpLayout& layout, const std::vector<SymRow>& rows) {
  const std::size_t K = layout.cells;
  const std::size_t base = lp.num_vars();
  for (std::size_t k = 0; k < 2 * K; ++k) lp.add_variable(0.0, 0.0, kInfinity);
  for (const SymRow& sr : rows) {
    std::vector<double> row(lp.num_vars(), 0.0);
    for (const Term& t : sr.terms) {
      switch (t.sym) {
        case Sym::v: row[layout.v(t.index)] += t.coef; break;
        case Sym::b: row[layout.b(t.index, t.h)] += t.coef; break;
        case Sym::f: row[base + t.index] += t.coef; break;
        case Sym::r: row[base + K + t.index] += t.coef; break;
      }
    }
    lp.add_row(std::move(row), sr.rhs);
  }
}

// Whether some (f~, r~) >= 0 satisfies the block rows at fixed (v, b).
bool block_satisfiable(std::size_t K, const std::vector<SymRow>& rows,
                       const std::vector<double>& x, const MilpLayout& layout) {
  LinearProgram lp;
  for (std::size_t k = 0; k < 2 * K; ++k) lp.add_variable(0.0, 0.0, kInfinity);
  for (const SymRow& sr : rows) {
    std::vector<double> row(2 * K, 0.0);
    double rhs = sr.rhs;
    for (const Term& t : sr.terms) {
      switch (t.sym) {
        case Sym::v: rhs -= t.coef * x[layout.v(t.index)]; break;
        case Sym::b: rhs -= t.coef * x[layout.b(t.index, t.h)]; break;
        case Sym::f: row[t.index] += t.coef; break;
        case Sym::r: row[K + t.index] += t.coef; break;
      }
    }
    lp.add_row(std::move(row), rhs + 1e-7 * (1.0 + std::abs(sr.rhs)));
  }
  return feasible(lp).feasible;
}

std::vector<int> bits(std::size_t mask, std::size_t K) {
  std::vector<int> out(K);
  for (std::size_t k = 0; k < K; ++k) out[k] = static_cast<int>((mask >> k) & 1U);
  return out;
}

int metered_count(const std::vector<int>& w) {
  int n = 0;
  for (int x : w) n += x == 0;
  return n;
}

void require_two_cell_hotspot(const HighwaySpec& spec) {
  if (spec.size() != 2) throw NotApplicableError("margin results need exactly two cells");
  if (spec.mainline_ratio[0] != 1.0) throw NotApplicableError("margin results need rho_1 = 1");
  if (spec.cells[0].nominal_capacity != spec.buffer_capacity[0]) {
    throw NotApplicableError("margin results need F_1 = R_1");
  }
  // Delta_2 = 0 is admitted as the degenerate hotspot.
  if (spec.cells[0].capacity_drop != 0.0) {
    throw NotApplicableError("margin results need a stationary hotspot at cell 2");
  }
}

}  // namespace

std::vector<MilpBlock> milp_blocks(std::size_t cells, std::size_t modes) {
  std::vector<MilpBlock> out;
  const std::size_t patterns = std::size_t{1} << cells;
  for (std::size_t i = 0; i < modes; ++i) {
    for (std::size_t y = 1; y < patterns; ++y) {
      for (std::size_t z = 0; z < patterns; ++z) out.push_back({i, bits(y, cells), bits(z, cells)});
    }
  }
  return out;
}

bool drift_rows_dropped(const MilpBlock& block, const std::vector<int>& w) {
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (block.y[k] == 1 && w[k] == 1) return true;
  }
  return false;
}

double big_m2(const HighwaySpec& spec) {
  double m = 0.0;
  double max_d = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    m += spec.buffer_capacity[k] + spec.cells[k].nominal_capacity;
    if (std::isfinite(spec.demand[k])) max_d = std::max(max_d, spec.demand[k]);
  }
  return m + max_d;
}

double big_m1_min(const HighwaySpec& spec, const MarkovCapacityModel& model, const Matrix& A,
                  double offset_bound) {
  // Every flow symbol lies in [0, m2]; offsets lie in the box.
  const double flow = big_m2(spec);
  double worst = 0.0;
  for (std::size_t i = 0; i < model.mode_count(); ++i) {
    for (std::size_t h = 0; h < spec.size(); ++h) {
      const DriftRowForm form = milp_drift_row(spec, model, A, i, h);
      double bound = 1.0;
      for (std::size_t k = 0; k < spec.size(); ++k) {
        bound += flow * (std::abs(form.inflow[k]) + std::abs(form.ramp_flow[k]) +
                         std::abs(form.cell_flow[k]));
      }
      for (double c : form.offsets) bound += offset_bound * std::abs(c);
      worst = std::max(worst, bound);
    }
  }
  return worst;
}

DriftRowForm milp_drift_row(const HighwaySpec& spec, const MarkovCapacityModel& model,
                            const Matrix& A, std::size_t mode, std::size_t h) {
  const DriftCoefficients coef = drift_coefficients(spec, A);
  DriftRowForm form;
  form.inflow = coef.inflow[h];
  form.ramp_flow = coef.ramp_flow[h];
  form.cell_flow = coef.cell_flow[h];
  form.offsets.assign(model.mode_count(), 0.0);
  for (std::size_t j = 0; j < model.mode_count(); ++j) {
    if (j == mode) continue;
    form.offsets[j] += model.rates[mode][j];
    form.offsets[mode] -= model.rates[mode][j];
  }
  return form;
}

LinearProgram build_milp(const HighwaySpec& spec, const MarkovCapacityModel& model,
                         const Matrix& A, const std::vector<int>& w, const std::vector<int>& xi,
                         const MilpOptions& options, MilpLayout* layout) {
  const std::size_t K = spec.size();
  if (w.size() != K || xi.size() != K) throw ArgumentError("build_milp: binaries length != K");
  if (A.size() != K) throw ArgumentError("build_milp: A must be K x K");
  MilpLayout lay{K, model.mode_count(), milp_blocks(K, model.mode_count())};
  LinearProgram lp;
  add_shared_variables(lp, spec, model, options, std::vector<double>(K, 1.0));
  const double m2 = big_m2(spec);
  for (const MilpBlock& blk : lay.blocks) {
    add_block(lp, lay, block_rows(spec, model, A, w, xi, blk, options, m2, true));
  }
  if (layout != nullptr) *layout = lay;
  return lp;
}

SubproblemLog solve_fixed_w(const HighwaySpec& spec, const MarkovCapacityModel& model,
                            const Matrix& A, const std::vector<int>& w,
                            const MilpOptions& options) {
  const std::size_t K = spec.size();
  if (w.size() != K) throw ArgumentError("solve_fixed_w: w length != K");
  const std::vector<int> xi(K, 0);
  const double m2 = big_m2(spec);
  MilpLayout lay{K, model.mode_count(), milp_blocks(K, model.mode_count())};

  SubproblemLog log;
  log.w = w;
  log.xi = xi;
  log.blocks_total = lay.blocks.size();

  // Blocks whose drift rows are dropped are satisfied by f~ = r~ = 0 once
  // xi = 0, so only the remaining ones can constrain (v, b).
  std::vector<std::vector<SymRow>> candidates;
  for (const MilpBlock& blk : lay.blocks) {
    if (options.big_m1 <= 0.0 && drift_rows_dropped(blk, w)) continue;
    candidates.push_back(block_rows(spec, model, A, w, xi, blk, options, m2, true));
  }
  log.blocks_with_rows = candidates.size();

  std::vector<char> active(candidates.size(), 0);
  std::vector<double> upstream(K);
  for (std::size_t k = 0; k < K; ++k) upstream[k] = static_cast<double>(K - k);

  const std::size_t max_add = 32;
  while (true) {
    ++log.rounds;
    auto master = [&](const std::vector<double>& objective, double floor) {
      LinearProgram lp;
      add_shared_variables(lp, spec, model, options, objective);
      if (floor > -kInfinity) {
        std::vector<double> row(lp.num_vars(), 0.0);
        for (std::size_t k = 0; k < K; ++k) row[k] = -1.0;
        lp.add_row(std::move(row), -floor);
      }
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        if (active[c]) add_block(lp, lay, candidates[c]);
      }
      return solve(lp);
    };
    const LpResult first = master(std::vector<double>(K, 1.0), -kInfinity);
    if (first.status == LpStatus::infeasible) {
      log.status = "infeasible";
      log.J = 0.0;
      log.v.assign(K, 0.0);
      return log;
    }
    if (first.status != LpStatus::optimal) {
      throw NumericalError(std::string("throughput LP ended ") + to_string(first.status));
    }
    const double J1 = first.objective;
    LpResult second = master(upstream, J1 - 1e-10 * (1.0 + std::abs(J1)));
    if (second.status != LpStatus::optimal) second = first;

    std::size_t added = 0;
    for (std::size_t c = 0; c < candidates.size() && added < max_add; ++c) {
      if (active[c]) continue;
      if (!block_satisfiable(K, candidates[c], second.x, lay)) {
        active[c] = 1;
        ++added;
      }
    }
    log.blocks_added += added;
    if (added == 0) {
      log.status = "optimal";
      log.v.assign(second.x.begin(), second.x.begin() + static_cast<std::ptrdiff_t>(K));
      for (double& x : log.v) x = std::max(0.0, x);
      log.J = 0.0;
      for (double x : log.v) log.J += x;
      return log;
    }
  }
}

OptResult maximize_throughput(const HighwaySpec& spec, const MarkovCapacityModel& model,
                              const Matrix& A, const OptimizeOptions& options) {
  const std::size_t K = spec.size();
  if (K > 8) throw ArgumentError("maximize_throughput: enumeration is limited to K <= 8");
  const auto issues = check_A(spec, A);
  if (!issues.empty()) throw ArgumentError("maximize_throughput: invalid A: " + issues.front());

  const std::size_t plans = std::size_t{1} << K;
  std::vector<SubproblemLog> logs(plans);
  std::vector<DriftCertificate> certs(plans);
  parallel_for(plans, options.threads, [&](std::size_t mask) {
    SubproblemLog log = solve_fixed_w(spec, model, A, bits(mask, K), options.milp);
    if (log.status == "optimal") {
      try {
        certs[mask] = certify(spec, model, ControlConfig{log.v, log.w}, A);
        if (certs[mask].verdict != Verdict::stable_certified) log.status = "not_certified";
      } catch (const ScenarioError&) {
        log.status = "not_certified";
      }
    }
    logs[mask] = std::move(log);
  });

  OptResult out;
  out.subproblem_count = plans;
  out.pruned_count = plans * (plans - 1);
  out.log = logs;

  std::ptrdiff_t best = -1;
  double best_J = -1.0;
  for (std::size_t m = 0; m < plans; ++m) {
    if (logs[m].status == "optimal") best_J = std::max(best_J, logs[m].J);
  }
  const double tie = 1e-6 * std::max(1.0, best_J);
  for (std::size_t m = 0; m < plans; ++m) {
    if (logs[m].status != "optimal" || logs[m].J < best_J - tie) continue;
    if (best < 0) {
      best = static_cast<std::ptrdiff_t>(m);
      continue;
    }
    const auto& cur = logs[static_cast<std::size_t>(best)].w;
    const auto& cand = logs[m].w;
    const int mc = metered_count(cand);
    const int mb = metered_count(cur);
    if (mc < mb || (mc == mb && cand < cur)) best = static_cast<std::ptrdiff_t>(m);
  }

  out.xi.assign(K, 0);
  if (best < 0) {
    out.J = 0.0;
    out.v.assign(K, 0.0);
    out.w.assign(K, 1);
    out.certificate = certify(spec, model, ControlConfig{out.v, out.w}, A);
    return out;
  }
  const SubproblemLog& win = logs[static_cast<std::size_t>(best)];
  out.J = win.J;
  out.v = win.v;
  out.w = win.w;
  out.certificate = certs[static_cast<std::size_t>(best)];
  return out;
}

bool is_feasible_demand(const HighwaySpec& spec, const MarkovCapacityModel& model,
                        const std::vector<double>& d) {
  const std::size_t K = spec.size();
  if (d.size() != K) return false;
  double arriving = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (!std::isfinite(d[k]) || d[k] < 0.0 || d[k] > spec.buffer_capacity[k]) return false;
    arriving += cumulative_ratio(spec, k, K - 1) * d[k];
  }
  return arriving < mean_bottleneck_capacity(spec, model);
}

MarginDecision margin_criterion(const HighwaySpec& spec, const MarkovCapacityModel& model,
                                const std::vector<double>& d) {
  require_two_cell_hotspot(spec);
  if (!is_feasible_demand(spec, model, d)) throw NotApplicableError("demand is not feasible");
  MarginDecision out;
  out.v = d;
  out.mainline_margin = spec.cells[0].nominal_capacity - d[0];
  out.ramp_margin = spec.buffer_capacity[1] - d[1];
  if (out.mainline_margin >= out.ramp_margin) out.w.push_back({1, 1});
  if (out.mainline_margin <= out.ramp_margin) out.w.push_back({1, 0});
  return out;
}

bool Interval::empty() const {
  if (lo > hi) return true;
  return lo == hi && (lo_open || hi_open);
}

bool Interval::contains(double x, double tol) const {
  if (empty()) return false;
  const bool above = lo_open ? x > lo : x >= lo - tol;
  const bool below = hi_open ? x < hi : x <= hi + tol;
  return above && below;
}

bool InfiniteDemandOptimum::contains(const std::vector<double>& v, const std::vector<int>& w,
                                     double tol) const {
  if (v.size() != 2 || w.size() != 2 || w[0] != 1) return false;
  if (std::abs(v[0] + v[1] - mean_capacity) > tol) return false;
  return w[1] == 0 ? metered_set.contains(v[0], tol) : open_set.contains(v[0], tol);
}

InfiniteDemandOptimum infinite_demand_optimum(const HighwaySpec& spec,
                                              const MarkovCapacityModel& model) {
  require_two_cell_hotspot(spec);
  const double F1 = spec.cells[0].nominal_capacity;
  const double F2 = spec.cells[1].nominal_capacity;
  const double drop = spec.cells[1].capacity_drop;
  const double R2 = spec.buffer_capacity[1];
  InfiniteDemandOptimum out;
  const double Fbar = mean_bottleneck_capacity(spec, model);
  out.mean_capacity = Fbar;

  // Parametrize both sets by v_1 on v_1 + v_2 = F2bar with 0 <= v_2 <= d_2.
  const double v1_min = std::max(0.0, Fbar - spec.demand[1]);
  const double v1_max = std::min(Fbar, spec.demand[0]);

  // V1*: R_2 - v_2 >= F_2 - F2bar and v_1 < min{F_1, F_2 - Delta_2}.
  out.metered_set.lo = std::max(v1_min, F2 - R2);
  out.metered_set.hi = std::min(v1_max, std::min(F1, F2 - drop));
  out.metered_set.hi_open = out.metered_set.hi == std::min(F1, F2 - drop);

  // V2*: F_1 - v_1 >= F_2 - F2bar and v_2 < min{R_2, F_2 - Delta_2}.
  const double v2_limit = std::min(R2, F2 - drop);
  out.open_set.lo = std::max(v1_min, Fbar - v2_limit);
  out.open_set.lo_open = out.open_set.lo == Fbar - v2_limit;
  out.open_set.hi = std::min(v1_max, F1 - F2 + Fbar);

  const Interval* pick = !out.metered_set.empty() ? &out.metered_set : &out.open_set;
  out.w = pick == &out.metered_set ? std::vector<int>{1, 0} : std::vector<int>{1, 1};
  if (!pick->empty()) {
    const double v1 = 0.5 * (pick->lo + pick->hi);
    out.v = {v1, Fbar - v1};
  }
  return out;
}

std::vector<int> hotspot_algorithm(const HighwaySpec& spec, const MarkovCapacityModel& model,
                                   const std::vector<double>& d) {
  const std::size_t K = spec.size();
  if (!is_stationary_hotspot(spec)) throw NotApplicableError("not a stationary hotspot");
  if (!is_feasible_demand(spec, model, d)) throw NotApplicableError("demand is not feasible");

  auto F = [&](std::size_t k) { return spec.cells[k].nominal_capacity; };
  const double* R = spec.buffer_capacity.data();
  const auto& rho = spec.mainline_ratio;
  // rho_j^k with the empty product (and j = k + 1) equal to 1.
  auto ratio = [&](std::size_t j, std::size_t k) {
    return j >= k ? 1.0 : cumulative_ratio(spec, j, k);
  };
  auto arriving = [&](std::size_t upto, std::size_t k) {
    double s = 0.0;
    for (std::size_t j = 0; j <= upto && j < K; ++j) s += ratio(j, k) * d[j];
    return s;
  };

  std::vector<double> T(K);
  T[K - 1] = F(K - 1) - spec.cells[K - 1].capacity_drop - d[K - 1];
  for (std::size_t k = K - 1; k-- > 0;) T[k] = std::max(0.0, T[k + 1] - d[k + 1]);

  std::vector<int> w(K, 1);
  std::vector<double> f(K, 0.0);
  f[0] = F(0);
  for (std::size_t k = 1; k < K; ++k) {
    f[k] = std::min(rho[k - 1] * f[k - 1] + d[k], arriving(k - 1, k) + R[k]);
    if (k + 1 < K && arriving(k + 1, k) < T[k + 1] / rho[k]) {
      f[k] = F(k);
      w[k] = 0;
    } else if (R[k] - d[k] > rho[k - 1] * (F(k - 1) - f[k - 1])) {
      w[k] = 0;
      if (arriving(k, k) <= T[k]) f[k] = arriving(k - 1, k) + R[k];
    } else {
      w[k] = 1;
      f[k] = f[k - 1] + d[k];
    }
  }
  return w;
}

}  // namespace stochctm
