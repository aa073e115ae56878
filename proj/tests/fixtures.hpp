#pragma once

// Desk scenarios shared by the unit and acceptance suites.

#include <vector>

#include "stochctm/highway.hpp"

namespace fixtures {

struct Scenario {
  stochctm::HighwaySpec spec;
  stochctm::MarkovCapacityModel model;
};

inline stochctm::CellParams cell(double alpha, double F, double drop, double beta, double nmax) {
  return {alpha, F, drop, beta, nmax};
}

// Two cells, hotspot at cell 2 dropping to 2000 veh/hr half the time.
inline Scenario s2(double d1 = stochctm::kInfinity, double d2 = stochctm::kInfinity) {
  Scenario s;
  s.spec.cells = {cell(100, 4000, 0, 20, 240), cell(100, 4000, 2000, 20, 240)};
  s.spec.buffer_capacity = {4000, 2000};
  s.spec.mainline_ratio = {1.0, 0.0};
  s.spec.demand = {d1, d2};
  s.model.capacity = {{4000, 4000}, {4000, 2000}};
  s.model.rates = {{0, 6}, {6, 0}};
  s.model = stochctm::with_steady_state(s.model);
  return s;
}

// S2 geometry with the nominal mode only.
inline Scenario s2_nominal() {
  Scenario s = s2();
  s.model.capacity = {{4000, 4000}};
  s.model.rates = {{0}};
  s.model = stochctm::with_steady_state(s.model);
  return s;
}

// Three-mode cyclic heavy-vehicle chain: mode 1 (resp. 2) has one lane of
// cell 1 (resp. 2) blocked; each mode is left at 12/hr (5 min mean stay).
inline Scenario example1() {
  Scenario s;
  s.spec.cells = {cell(100, 6000, 1500, 20, 400), cell(100, 6000, 1500, 20, 400)};
  s.spec.buffer_capacity = {6000, 2000};
  s.spec.mainline_ratio = {1.0, 0.0};
  s.spec.demand = {stochctm::kInfinity, stochctm::kInfinity};
  s.model.capacity = {{6000, 6000}, {4500, 6000}, {6000, 4500}};
  s.model.rates = {{0, 12, 0}, {0, 0, 12}, {12, 0, 0}};
  s.model = stochctm::with_steady_state(s.model);
  return s;
}

// Three-cell stationary hotspot with the hand-traced metering plan [1, 0, 0].
inline Scenario h3() {
  Scenario s;
  s.spec.cells = {cell(100, 4000, 0, 20, 240), cell(100, 4000, 0, 20, 240),
                  cell(100, 4000, 1000, 20, 240)};
  s.spec.buffer_capacity = {4000, 1500, 1500};
  s.spec.mainline_ratio = {1.0, 1.0, 0.0};
  s.spec.demand = {2000, 500, 300};
  s.model.capacity = {{4000, 4000, 4000}, {4000, 4000, 3000}};
  s.model.rates = {{0, 6}, {6, 0}};
  s.model = stochctm::with_steady_state(s.model);
  return s;
}

inline stochctm::ControlConfig config(std::vector<double> v, std::vector<int> w) {
  return {std::move(v), std::move(w)};
}

}  // namespace fixtures
