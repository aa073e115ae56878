#include "stochctm/highway.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stochctm/errors.hpp"

namespace stochctm {

namespace {

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

void check_density(const CellParams& cell, double density) {
  if (!(density >= 0.0 && density <= cell.jam_density)) {
    std::ostringstream os;
    os << "density " << density << " outside [0, " << cell.jam_density << "]";
    throw ArgumentError(os.str());
  }
}

}  // namespace

double MarkovCapacityModel::exit_rate(std::size_t mode) const {
  double total = 0.0;
  for (std::size_t j = 0; j < rates[mode].size(); ++j) {
    if (j != mode) total += rates[mode][j];
  }
  return total;
}

double MarkovCapacityModel::min_capacity(std::size_t cell) const {
  double m = kInfinity;
  for (const auto& row : capacity) m = std::min(m, row[cell]);
  return m;
}

MarkovCapacityModel with_steady_state(MarkovCapacityModel model) {
  model.steady = steady_state(model);
  return model;
}

double cumulative_ratio(const HighwaySpec& spec, std::size_t k1, std::size_t k2) {
  if (k1 > k2 || k2 >= spec.size()) {
    throw ArgumentError("cumulative_ratio: need k1 <= k2 < K");
  }
  double product = 1.0;
  for (std::size_t k = k1; k < k2; ++k) product *= spec.mainline_ratio[k];
  return product;
}

double sending_flow(const CellParams& cell, double mode_capacity, double density) {
  check_density(cell, density);
  return std::min(cell.free_flow_speed * density, mode_capacity);
}

double receiving_flow(const CellParams& cell, double density) {
  check_density(cell, density);
  return cell.wave_speed * (cell.jam_density - density);
}

double buffer_demand(const HighwaySpec& spec, const ControlConfig& config,
                     std::size_t k, double queue) {
  if (k >= spec.size() || k >= config.inflow.size()) {
    throw ArgumentError("buffer_demand: index out of range");
  }
  if (queue < 0.0) throw ArgumentError("buffer_demand: negative queue");
  if (queue > 0.0) return spec.buffer_capacity[k];
  return std::min(config.inflow[k], spec.buffer_capacity[k]);
}

FlowSnapshot merge_flows(const HighwaySpec& spec, std::span<const double> capacities,
                         const ControlConfig& config, std::span<const char> backlogged,
                         std::span<const double> density) {
  const std::size_t K = spec.size();
  FlowSnapshot out;
  out.sending.resize(K);
  out.receiving.resize(K);
  out.buffer_demand.resize(K);
  out.ramp_flow.resize(K);
  out.cell_flow.resize(K);

  for (std::size_t k = 0; k < K; ++k) {
    const CellParams& c = spec.cells[k];
    out.sending[k] = std::min(c.free_flow_speed * density[k], capacities[k]);
    out.receiving[k] = c.wave_speed * (c.jam_density - density[k]);
    out.buffer_demand[k] = backlogged[k]
                               ? spec.buffer_capacity[k]
                               : std::min(config.inflow[k], spec.buffer_capacity[k]);
  }

  // Buffer 0 has no mainline competitor.
  out.ramp_flow[0] = std::min(out.buffer_demand[0], out.receiving[0]);
  for (std::size_t k = 1; k < K; ++k) {
    const double rho = spec.mainline_ratio[k - 1];
    const double supply = out.receiving[k];
    if (config.metering_off[k] == 0) {
      out.cell_flow[k - 1] = std::min(out.sending[k - 1], supply / rho);
      out.ramp_flow[k] = std::min(out.buffer_demand[k],
                                  positive_part(supply - rho * out.cell_flow[k - 1]));
    } else {
      out.ramp_flow[k] = std::min(out.buffer_demand[k], supply);
      out.cell_flow[k - 1] =
          std::min(out.sending[k - 1], positive_part(supply - out.ramp_flow[k]) / rho);
    }
  }
  out.cell_flow[K - 1] = out.sending[K - 1];
  return out;
}

FlowSnapshot merge_flows(const HighwaySpec& spec, std::span<const double> capacities,
                         const ControlConfig& config, const HybridState& state) {
  const std::size_t K = spec.size();
  std::vector<char> backlogged(K);
  for (std::size_t k = 0; k < K; ++k) {
    if (state.queue[k] < 0.0) throw ArgumentError("merge_flows: negative queue");
    check_density(spec.cells[k], state.density[k]);
    backlogged[k] = state.queue[k] > 0.0;
  }
  return merge_flows(spec, capacities, config, backlogged, state.density);
}

VectorField vector_field(const HighwaySpec& spec, const ControlConfig& config,
                         const FlowSnapshot& flows) {
  const std::size_t K = spec.size();
  VectorField out{std::vector<double>(K), std::vector<double>(K)};
  for (std::size_t k = 0; k < K; ++k) {
    out.queue_rate[k] = config.inflow[k] - flows.ramp_flow[k];
    const double upstream = k == 0 ? 0.0 : spec.mainline_ratio[k - 1] * flows.cell_flow[k - 1];
    out.density_rate[k] = upstream + flows.ramp_flow[k] - flows.cell_flow[k];
  }
  return out;
}

VectorField vector_field(const HighwaySpec& spec, std::span<const double> capacities,
                         const ControlConfig& config, const HybridState& state) {
  return vector_field(spec, config, merge_flows(spec, capacities, config, state));
}

bool is_irreducible(const std::vector<std::vector<double>>& rates) {
  const std::size_t n = rates.size();
  if (n <= 1) return true;
  auto reaches_all = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < n; ++j) {
        const double r = transpose ? rates[j][i] : rates[i][j];
        if (j != i && r > 0.0 && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char s) { return s != 0; });
  };
  return reaches_all(false) && reaches_all(true);
}

std::vector<double> steady_state(const MarkovCapacityModel& model) {
  const std::size_t n = model.mode_count();
  if (n == 0) throw ModelError("steady_state: no modes");
  if (model.rates.size() != n) throw ModelError("steady_state: rate matrix size mismatch");
  if (!is_irreducible(model.rates)) throw ModelError("mode chain is not irreducible");
  if (n == 1) return {1.0};

  // Solve Q^T p = 0 with the last balance equation replaced by sum(p) = 1.
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      system(j, i) += model.rates[i][j];
      system(i, i) -= model.rates[i][j];
    }
  }
  system.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::VectorXd p = system.fullPivLu().solve(rhs);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::max(0.0, p(i));
  return out;
}

bool is_stationary_hotspot(const HighwaySpec& spec) {
  const std::size_t K = spec.size();
  if (K == 0) return false;
  for (std::size_t k = 0; k + 1 < K; ++k) {
    if (spec.cells[k].capacity_drop != 0.0) return false;
  }
  return spec.cells[K - 1].capacity_drop > 0.0;
}

std::vector<std::string> validate(const HighwaySpec& spec, const MarkovCapacityModel& model,
                                  const ControlConfig* config) {
  std::vector<std::string> report;
  auto fail = [&](std::size_t k, const std::string& what) {
    std::ostringstream os;
    os << what << " (index " << k << ")";
    report.push_back(os.str());
  };

  const std::size_t K = spec.size();
  if (K == 0) {
    report.emplace_back("highway has no cells");
    return report;
  }
  if (spec.buffer_capacity.size() != K) report.emplace_back("buffer_capacity length != K");
  if (spec.mainline_ratio.size() != K) report.emplace_back("mainline_ratio length != K");
  if (spec.demand.size() != K) report.emplace_back("demand length != K");
  if (!report.empty()) return report;

  for (std::size_t k = 0; k < K; ++k) {
    const CellParams& c = spec.cells[k];
    if (!(c.free_flow_speed > 0.0)) fail(k, "free_flow_speed must be positive");
    if (!(c.wave_speed > 0.0)) fail(k, "wave_speed must be positive");
    if (!(c.jam_density > 0.0)) fail(k, "jam_density must be positive");
    if (!(c.capacity_drop >= 0.0 && c.capacity_drop <= c.nominal_capacity)) {
      fail(k, "capacity_drop must lie in [0, nominal_capacity]");
    }
    if (c.free_flow_speed > 0.0 && !(c.nominal_capacity / c.free_flow_speed < c.jam_density)) {
      fail(k, "critical density must be below jam density");
    }
    if (!(spec.buffer_capacity[k] > 0.0)) fail(k, "buffer_capacity must be positive");
    if (!(spec.demand[k] >= 0.0)) fail(k, "demand must be non-negative");
    if (k + 1 < K && !(spec.mainline_ratio[k] > 0.0 && spec.mainline_ratio[k] <= 1.0)) {
      fail(k, "mainline_ratio must lie in (0, 1]");
    }
  }
  if (spec.mainline_ratio[K - 1] != 0.0) report.emplace_back("mainline_ratio: terminal ratio must be zero");

  const std::size_t n = model.mode_count();
  if (n == 0) report.emplace_back("capacity model has no modes");
  if (model.rates.size() != n) report.emplace_back("rate matrix row count != mode count");
  for (std::size_t i = 0; i < n && i < model.rates.size(); ++i) {
    if (model.capacity[i].size() != K) {
      fail(i, "capacity row length != K");
      continue;
    }
    if (model.rates[i].size() != n) {
      fail(i, "rate matrix row length != mode count");
      continue;
    }
    for (std::size_t k = 0; k < K; ++k) {
      const double F = spec.cells[k].nominal_capacity;
      const double cap = model.capacity[i][k];
      if (cap != F && cap != F - spec.cells[k].capacity_drop) {
        std::ostringstream os;
        os << "capacity[" << i << "][" << k << "] = " << cap
           << " must equal nominal_capacity or nominal_capacity - capacity_drop";
        report.push_back(os.str());
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double r = model.rates[i][j];
      if (i == j && r != 0.0) fail(i, "rate matrix diagonal must be zero");
      if (!(r >= 0.0) || !std::isfinite(r)) fail(i, "transition rates must be finite and non-negative");
    }
  }
  if (report.empty() && !is_irreducible(model.rates)) {
    report.emplace_back("mode chain is not irreducible");
  }

  if (config != nullptr) {
    if (config->inflow.size() != K || config->metering_off.size() != K) {
      report.emplace_back("control config length != K");
    } else {
      for (std::size_t k = 0; k < K; ++k) {
        const double v = config->inflow[k];
        if (!(v >= 0.0) || !std::isfinite(v)) fail(k, "inflow must be finite and non-negative");
        if (v > spec.demand[k]) fail(k, "inflow exceeds demand");
        if (config->metering_off[k] != 0 && config->metering_off[k] != 1) {
          fail(k, "metering state must be 0 or 1");
        }
      }
    }
  }
  return report;
}

}  // namespace stochctm
