#pragma once

// Static highway data and the deterministic cell-transmission flow equations.
//
// Units: flows veh/hr, speeds km/hr, densities veh/km, time hr. Every cell
// is 1 km long. Cells, buffers and modes are indexed from 0 throughout the
// C++ API; cell k = 0 is the most upstream cell.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stochctm/constants.hpp"

namespace stochctm {

struct CellParams {
  double free_flow_speed = 0.0;   // alpha
  double nominal_capacity = 0.0;  // F
  double capacity_drop = 0.0;     // Delta
  double wave_speed = 0.0;        // beta
  double jam_density = 0.0;       // n^max
};

struct HighwaySpec {
  std::vector<CellParams> cells;
  std::vector<double> buffer_capacity;  // R_k
  std::vector<double> mainline_ratio;   // rho_k; the last entry must be 0
  std::vector<double> demand;           // d_k, may be +inf

  std::size_t size() const { return cells.size(); }
};

struct MarkovCapacityModel {
  std::vector<std::vector<double>> capacity;  // capacity[mode][cell]
  std::vector<std::vector<double>> rates;     // rates[i][j], zero diagonal
  std::vector<double> steady;                 // filled by with_steady_state()

  std::size_t mode_count() const { return capacity.size(); }
  double exit_rate(std::size_t mode) const;
  // Smallest capacity of `cell` over all modes.
  double min_capacity(std::size_t cell) const;
};

// Copy of `model` with `steady` computed; throws ModelError on a reducible chain.
MarkovCapacityModel with_steady_state(MarkovCapacityModel model);

// u = (v, w). metering_off[k] == 1 prioritizes ramp k over the mainline.
struct ControlConfig {
  std::vector<double> inflow;
  std::vector<int> metering_off;
};

struct HybridState {
  std::size_t mode = 0;
  std::vector<double> queue;
  std::vector<double> density;
};

struct FlowSnapshot {
  std::vector<double> sending;    // S_k
  std::vector<double> receiving;  // T_k
  std::vector<double> buffer_demand;  // D_k
  std::vector<double> ramp_flow;  // r_k
  std::vector<double> cell_flow;  // f_k
};

struct VectorField {
  std::vector<double> queue_rate;    // G
  std::vector<double> density_rate;  // H
};

// Product rho_k1 * ... * rho_{k2-1}; 1 when k1 == k2.
double cumulative_ratio(const HighwaySpec& spec, std::size_t k1, std::size_t k2);

double sending_flow(const CellParams& cell, double mode_capacity, double density);
double receiving_flow(const CellParams& cell, double density);
double buffer_demand(const HighwaySpec& spec, const ControlConfig& config,
                     std::size_t k, double queue);

// Merge with the priority of ramp k against the upstream mainline gated by w_k.
// `backlogged[k]` selects the saturated buffer branch D_k = R_k. Densities are
// taken as given (vertex evaluation may sit on box corners).
FlowSnapshot merge_flows(const HighwaySpec& spec, std::span<const double> capacities,
                         const ControlConfig& config, std::span<const char> backlogged,
                         std::span<const double> density);
FlowSnapshot merge_flows(const HighwaySpec& spec, std::span<const double> capacities,
                         const ControlConfig& config, const HybridState& state);

VectorField vector_field(const HighwaySpec& spec, const ControlConfig& config,
                         const FlowSnapshot& flows);
VectorField vector_field(const HighwaySpec& spec, std::span<const double> capacities,
                         const ControlConfig& config, const HybridState& state);

// Stationary distribution of the mode process. Throws ModelError if the
// chain is not irreducible.
std::vector<double> steady_state(const MarkovCapacityModel& model);
bool is_irreducible(const std::vector<std::vector<double>>& rates);

// Every violated invariant, one message per line item. Empty means well formed.
std::vector<std::string> validate(const HighwaySpec& spec,
                                  const MarkovCapacityModel& model,
                                  const ControlConfig* config = nullptr);

// Only cell K-1 fluctuates (all other drops zero, last drop positive).
bool is_stationary_hotspot(const HighwaySpec& spec);

}  // namespace stochctm
