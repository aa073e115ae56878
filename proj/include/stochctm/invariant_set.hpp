#pragma once

// Invariant box M(u) of the continuous state and the finite vertex set of its
// backlogged part M1(u).
//
// Queue bounds only take the values 0 and +inf: flows depend on a queue only
// through whether it is empty, so a backlogged coordinate is carried as a
// symbolic flag instead of a large surrogate number.

#include <cstddef>
#include <span>
#include <vector>

#include "stochctm/highway.hpp"

namespace stochctm {

struct InvariantBounds {
  std::vector<double> q_lower;  // 0 or +inf
  std::vector<double> q_upper;  // 0 or +inf
  std::vector<double> n_upper;

  // Inputs of the lower-density recursion.
  std::vector<double> inflow;
  std::vector<double> free_flow_speed;
  std::vector<double> nominal_capacity;
  std::vector<double> buffer_capacity;
  std::vector<double> mainline_ratio;

  std::size_t size() const { return n_upper.size(); }

  // Lower density bound for the queue occupancy pattern; clipped at n_upper.
  std::vector<double> n_lower(std::span<const char> backlogged) const;
  bool m1_empty() const;
};

// Throws ScenarioError when an unmetered ramp (w_k = 1) would admit a queue,
// unless `enforce_no_queue_assumption` is false.
InvariantBounds compute_bounds(const HighwaySpec& spec, const MarkovCapacityModel& model,
                               const ControlConfig& config,
                               bool enforce_no_queue_assumption = true);

struct Vertex {
  std::vector<char> backlogged;  // occupancy pattern, never all empty
  std::vector<char> high;        // density at n_upper (1) or n_lower (0)
  std::vector<double> density;
};

struct VertexSet {
  std::vector<Vertex> vertices;
  std::size_t size() const { return vertices.size(); }
  bool empty() const { return vertices.empty(); }
};

VertexSet vertex_set(const InvariantBounds& bounds);

// Membership of a concrete state. `tolerance` widens the density box.
bool contains(const InvariantBounds& bounds, const HybridState& state, double tolerance = 0.0);

}  // namespace stochctm
