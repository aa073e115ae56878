#pragma once

// Piecewise-deterministic simulation of (mode, queues, densities): exponential
// mode jumps, explicit Euler flow in between.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stochctm/highway.hpp"

namespace stochctm {

struct ModeJump {
  double time = 0.0;
  std::size_t from = 0;
  std::size_t to = 0;
};

struct SimConfig {
  double horizon = 1.0;
  double step = 1e-3;
  std::uint64_t seed = 0;
  double record_interval = 0.01;
  HybridState initial;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<HybridState> states;
  std::vector<FlowSnapshot> flows;
  std::vector<ModeJump> jumps;
  // Largest cumulative |projection| applied to any density, and the total
  // amount of queue clipped at zero (queues overshoot by at most |G| h per step).
  double density_projection = 0.0;
  double queue_projection = 0.0;
};

struct QueueStats {
  double time_avg_total_queue = 0.0;
  double tail_growth_slope = 0.0;
  double discharged_throughput = 0.0;
};

// Seed of replication `run`: seed XOR splitmix64(run).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t run);

std::vector<ModeJump> sample_mode_path(const MarkovCapacityModel& model, double horizon,
                                       std::uint64_t seed, std::size_t initial_mode = 0);

// Fraction of [0, horizon] spent in each mode along a jump log.
std::vector<double> mode_occupancy(const std::vector<ModeJump>& jumps, std::size_t initial_mode,
                                   double horizon, std::size_t mode_count);

Trajectory integrate(const HighwaySpec& spec, const MarkovCapacityModel& model,
                     const ControlConfig& config, const SimConfig& sim);

QueueStats queue_stats(const Trajectory& traj);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
std::string trajectory_csv(const Trajectory& traj);

}  // namespace stochctm
