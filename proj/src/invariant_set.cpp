#include "stochctm/invariant_set.hpp"

#include <algorithm>
#include <sstream>

#include "stochctm/errors.hpp"

namespace stochctm {

std::vector<double> InvariantBounds::n_lower(std::span<const char> backlogged) const {
  const std::size_t K = size();
  std::vector<double> out(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double feed = backlogged[k] ? buffer_capacity[k] : inflow[k];
    double value = feed / free_flow_speed[k];
    if (k > 0) {
      value = std::min(mainline_ratio[k - 1] * out[k - 1] + value,
                       nominal_capacity[k] / free_flow_speed[k]);
    }
    out[k] = std::min(value, n_upper[k]);
  }
  return out;
}

bool InvariantBounds::m1_empty() const {
  return std::all_of(q_upper.begin(), q_upper.end(), [](double q) { return q == 0.0; });
}

InvariantBounds compute_bounds(const HighwaySpec& spec, const MarkovCapacityModel& model,
                               const ControlConfig& config, bool enforce_no_queue_assumption) {
  const std::size_t K = spec.size();
  if (config.inflow.size() != K || config.metering_off.size() != K) {
    throw ArgumentError("compute_bounds: control config length != K");
  }
  InvariantBounds b;
  b.inflow = config.inflow;
  b.buffer_capacity = spec.buffer_capacity;
  b.mainline_ratio = spec.mainline_ratio;
  b.q_lower.resize(K);
  b.q_upper.resize(K);
  b.n_upper.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    b.free_flow_speed.push_back(spec.cells[k].free_flow_speed);
    b.nominal_capacity.push_back(spec.cells[k].nominal_capacity);
    b.q_lower[k] = config.inflow[k] > spec.buffer_capacity[k] ? kInfinity : 0.0;
  }

  // Upper densities: maximal downstream congestion, swept upstream.
  const CellParams& last = spec.cells[K - 1];
  b.n_upper[K - 1] = last.jam_density - model.min_capacity(K - 1) / last.wave_speed;
  for (std::size_t k = K - 1; k-- > 0;) {
    const CellParams& c = spec.cells[k];
    const CellParams& next = spec.cells[k + 1];
    const double spill = (next.wave_speed * (next.jam_density - b.n_upper[k + 1]) -
                          config.inflow[k + 1] * config.metering_off[k + 1]) /
                         (spec.mainline_ratio[k] * c.wave_speed);
    b.n_upper[k] = std::min({c.nominal_capacity / c.free_flow_speed,
                             c.jam_density - model.min_capacity(k) / c.wave_speed,
                             c.jam_density - spill});
  }

  for (std::size_t k = 0; k < K; ++k) {
    const CellParams& c = spec.cells[k];
    double room = c.wave_speed * (c.jam_density - b.n_upper[k]);
    if (k > 0 && config.metering_off[k] == 0) {
      const CellParams& up = spec.cells[k - 1];
      room -= spec.mainline_ratio[k - 1] *
              std::min(up.free_flow_speed * b.n_upper[k - 1], c.nominal_capacity);
    }
    const double v = config.inflow[k];
    b.q_upper[k] = (v <= spec.buffer_capacity[k] && v <= room) ? 0.0 : kInfinity;
    if (enforce_no_queue_assumption && config.metering_off[k] == 1 && b.q_upper[k] > 0.0) {
      std::ostringstream os;
      os << "unmetered ramp " << k << " admits a queue (inflow " << v
         << " exceeds its guaranteed room " << room << ")";
      throw ScenarioError(os.str());
    }
  }
  return b;
}

VertexSet vertex_set(const InvariantBounds& bounds) {
  const std::size_t K = bounds.size();
  VertexSet out;
  std::vector<std::size_t> free_axes;
  std::vector<char> pattern(K, 0);
  for (std::size_t k = 0; k < K; ++k) {
    if (bounds.q_lower[k] > 0.0) {
      pattern[k] = 1;
    } else if (bounds.q_upper[k] > 0.0) {
      free_axes.push_back(k);
    }
  }
  const std::size_t combos = std::size_t{1} << free_axes.size();
  for (std::size_t mask = 0; mask < combos; ++mask) {
    std::vector<char> theta = pattern;
    for (std::size_t a = 0; a < free_axes.size(); ++a) theta[free_axes[a]] = (mask >> a) & 1U;
    if (std::none_of(theta.begin(), theta.end(), [](char c) { return c != 0; })) continue;

    const std::vector<double> low = bounds.n_lower(theta);
    std::vector<std::size_t> axes;
    for (std::size_t k = 0; k < K; ++k) {
      if (low[k] != bounds.n_upper[k]) axes.push_back(k);
    }
    const std::size_t corners = std::size_t{1} << axes.size();
    for (std::size_t c = 0; c < corners; ++c) {
      Vertex v;
      v.backlogged = theta;
      v.high.assign(K, 1);
      v.density = bounds.n_upper;
      for (std::size_t a = 0; a < axes.size(); ++a) {
        if (((c >> a) & 1U) == 0) {
          v.high[axes[a]] = 0;
          v.density[axes[a]] = low[axes[a]];
        }
      }
      out.vertices.push_back(std::move(v));
    }
  }
  return out;
}

bool contains(const InvariantBounds& bounds, const HybridState& state, double tolerance) {
  const std::size_t K = bounds.size();
  std::vector<char> occupied(K);
  for (std::size_t k = 0; k < K; ++k) {
    occupied[k] = state.queue[k] > 0.0;
    if (bounds.q_upper[k] == 0.0 && occupied[k]) return false;
    if (bounds.q_lower[k] > 0.0 && !occupied[k]) return false;
  }
  const std::vector<double> low = bounds.n_lower(occupied);
  for (std::size_t k = 0; k < K; ++k) {
    if (state.density[k] < low[k] - tolerance) return false;
    if (state.density[k] > bounds.n_upper[k] + tolerance) return false;
  }
  return true;
}

}  // namespace stochctm
