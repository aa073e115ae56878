#include "stochctm/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "stochctm/errors.hpp"

namespace stochctm {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t run) {
  std::uint64_t z = run + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return seed ^ (z ^ (z >> 31));
}

std::vector<ModeJump> sample_mode_path(const MarkovCapacityModel& model, double horizon,
                                       std::uint64_t seed, std::size_t initial_mode) {
  const std::size_t n = model.mode_count();
  if (initial_mode >= n) throw ArgumentError("sample_mode_path: initial mode out of range");
  if (!(horizon >= 0.0)) throw ArgumentError("sample_mode_path: negative horizon");
  if (n == 1) return {};
  for (std::size_t i = 0; i < n; ++i) {
    if (!(model.exit_rate(i) > 0.0)) throw ModelError("absorbing mode in capacity chain");
  }
  if (!is_irreducible(model.rates)) throw ModelError("mode chain is not irreducible");

  std::mt19937_64 rng(seed);
  std::vector<ModeJump> jumps;
  std::size_t mode = initial_mode;
  double t = 0.0;
  while (true) {
    std::exponential_distribution<double> hold(model.exit_rate(mode));
    t += hold(rng);
    if (t >= horizon) break;
    std::vector<double> weights = model.rates[mode];
    weights[mode] = 0.0;
    std::discrete_distribution<std::size_t> next(weights.begin(), weights.end());
    const std::size_t to = next(rng);
    jumps.push_back({t, mode, to});
    mode = to;
  }
  return jumps;
}

std::vector<double> mode_occupancy(const std::vector<ModeJump>& jumps, std::size_t initial_mode,
                                   double horizon, std::size_t mode_count) {
  std::vector<double> time(mode_count, 0.0);
  double last = 0.0;
  std::size_t mode = initial_mode;
  for (const ModeJump& j : jumps) {
    time[mode] += j.time - last;
    last = j.time;
    mode = j.to;
  }
  time[mode] += horizon - last;
  for (double& x : time) x /= horizon;
  return time;
}

Trajectory integrate(const HighwaySpec& spec, const MarkovCapacityModel& model,
                     const ControlConfig& config, const SimConfig& sim) {
  const std::size_t K = spec.size();
  if (!(sim.step > 0.0)) throw ArgumentError("integrate: step must be positive");
  if (!(sim.step <= sim.record_interval && sim.record_interval <= sim.horizon)) {
    throw ArgumentError("integrate: need 0 < step <= record_interval <= horizon");
  }
  if (sim.initial.queue.size() != K || sim.initial.density.size() != K) {
    throw ArgumentError("integrate: initial state length != K");
  }
  if (config.inflow.size() != K || config.metering_off.size() != K) {
    throw ArgumentError("integrate: control config length != K");
  }

  Trajectory traj;
  traj.jumps = sample_mode_path(model, sim.horizon, sim.seed, sim.initial.mode);

  HybridState x = sim.initial;
  for (std::size_t k = 0; k < K; ++k) {
    x.queue[k] = std::max(0.0, x.queue[k]);
    x.density[k] = std::clamp(x.density[k], 0.0, spec.cells[k].jam_density);
  }
  std::vector<double> density_correction(K, 0.0);
  std::vector<char> backlogged(K);

  auto snapshot = [&]() {
    for (std::size_t k = 0; k < K; ++k) backlogged[k] = x.queue[k] > 0.0;
    return merge_flows(spec, model.capacity[x.mode], config, backlogged, x.density);
  };

  double t = 0.0;
  std::size_t next_jump = 0;
  std::size_t record_index = 1;
  traj.times.push_back(0.0);
  traj.states.push_back(x);
  traj.flows.push_back(snapshot());

  const double eps = 1e-12 * std::max(1.0, sim.horizon);
  while (t < sim.horizon - eps) {
    const double record_at =
        std::min(sim.horizon, static_cast<double>(record_index) * sim.record_interval);
    double stop = std::min(t + sim.step, record_at);
    bool jump_now = false;
    if (next_jump < traj.jumps.size() && traj.jumps[next_jump].time <= stop) {
      stop = traj.jumps[next_jump].time;
      jump_now = true;
    }
    const double dt = stop - t;
    if (dt > 0.0) {
      const FlowSnapshot flows = snapshot();
      const VectorField field = vector_field(spec, config, flows);
      for (std::size_t k = 0; k < K; ++k) {
        const double q = x.queue[k] + dt * field.queue_rate[k];
        if (q < 0.0) traj.queue_projection -= q;
        x.queue[k] = std::max(0.0, q);
        const double n = x.density[k] + dt * field.density_rate[k];
        const double clipped = std::clamp(n, 0.0, spec.cells[k].jam_density);
        density_correction[k] += std::abs(clipped - n);
        x.density[k] = clipped;
      }
    }
    t = stop;
    if (jump_now) {
      x.mode = traj.jumps[next_jump].to;
      ++next_jump;
    }
    if (t >= record_at - eps) {
      traj.times.push_back(record_at);
      traj.states.push_back(x);
      traj.flows.push_back(snapshot());
      ++record_index;
      t = record_at;
    }
  }
  traj.density_projection = *std::max_element(density_correction.begin(), density_correction.end());
  return traj;
}

QueueStats queue_stats(const Trajectory& traj) {
  QueueStats stats;
  const std::size_t m = traj.times.size();
  if (m == 0) throw ArgumentError("queue_stats: empty trajectory");
  auto total_queue = [&](std::size_t i) {
    double s = 0.0;
    for (double q : traj.states[i].queue) s += q;
    return s;
  };
  auto total_ramp = [&](std::size_t i) {
    double s = 0.0;
    for (double r : traj.flows[i].ramp_flow) s += r;
    return s;
  };
  if (m == 1) {
    stats.time_avg_total_queue = total_queue(0);
    stats.discharged_throughput = total_ramp(0);
    return stats;
  }

  const double span = traj.times.back() - traj.times.front();
  double area_q = 0.0;
  double area_r = 0.0;
  for (std::size_t i = 1; i < m; ++i) {
    const double dt = traj.times[i] - traj.times[i - 1];
    area_q += 0.5 * dt * (total_queue(i) + total_queue(i - 1));
    area_r += 0.5 * dt * (total_ramp(i) + total_ramp(i - 1));
  }
  stats.time_avg_total_queue = area_q / span;
  stats.discharged_throughput = area_r / span;

  const std::size_t first = m / 2;
  const double count = static_cast<double>(m - first);
  double mt = 0.0;
  double mq = 0.0;
  for (std::size_t i = first; i < m; ++i) {
    mt += traj.times[i];
    mq += total_queue(i);
  }
  mt /= count;
  mq /= count;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = first; i < m; ++i) {
    sxy += (traj.times[i] - mt) * (total_queue(i) - mq);
    sxx += (traj.times[i] - mt) * (traj.times[i] - mt);
  }
  stats.tail_growth_slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return stats;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const std::size_t K = traj.states.empty() ? 0 : traj.states.front().queue.size();
  out << "t,mode";
  for (const char* prefix : {"q", "n", "r", "f"}) {
    for (std::size_t k = 1; k <= K; ++k) out << ',' << prefix << k;
  }
  out << '\n';
  out.precision(10);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const HybridState& s = traj.states[i];
    const FlowSnapshot& f = traj.flows[i];
    out << traj.times[i] << ',' << s.mode;
    for (const auto* col : {&s.queue, &s.density, &f.ramp_flow, &f.cell_flow}) {
      for (double value : *col) out << ',' << value;
    }
    out << '\n';
  }
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  return os.str();
}

}  // namespace stochctm
