#pragma once

// Batch evaluations behind the command layer: verdict sweeps over inflow
// grids and seeded Monte Carlo replications.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stochctm/certifier.hpp"
#include "stochctm/highway.hpp"
#include "stochctm/simulator.hpp"

namespace stochctm {

struct GridAxis {
  std::size_t cell = 0;  // inflow component, 0-based
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 1;
  double value(std::size_t i) const;
};

// "v1=lo:hi:n,v2=lo:hi:n" with 1-based component names. At most two axes.
std::vector<GridAxis> parse_grid(const std::string& text, std::size_t cells);

// "10" -> {1, 0}.
std::vector<int> parse_pattern(const std::string& text, std::size_t cells);
std::string pattern_string(const std::vector<int>& w);

enum class SweepVerdict { stable_certified, violates_necessary, unknown };
const char* to_string(SweepVerdict verdict);

struct SweepPoint {
  std::vector<double> v;
  std::vector<int> w;
  SweepVerdict verdict = SweepVerdict::unknown;
  double J = 0.0;  // sum of v when certified
};

struct SweepOptions {
  std::vector<GridAxis> axes;
  std::vector<std::vector<int>> patterns;  // empty: every w in {0,1}^K
  std::vector<double> base_inflow;         // values of the non-swept components
  AKind a_kind = AKind::uniform;
  double gamma = 1.0;
  std::size_t point_cap = 1000000;
  std::size_t threads = 0;
};

SweepVerdict classify(const HighwaySpec& spec, const MarkovCapacityModel& model,
                      const ControlConfig& config, const Matrix& A);

// Points ordered by pattern, then the first axis, then the second.
std::vector<SweepPoint> sweep(const HighwaySpec& spec, const MarkovCapacityModel& model,
                              const SweepOptions& options);

// Header v1,v2,w_pattern,verdict,J.
void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points);
std::string sweep_csv(const std::vector<SweepPoint>& points);

struct MonteCarloOptions {
  std::size_t runs = 10;
  double horizon = 200.0;
  std::uint64_t seed = 0;
  double step = 1e-3;
  double record_interval = 0.05;
  std::size_t threads = 0;
};

struct StatSummary {
  double mean = 0.0;
  double ci_half_width = 0.0;  // 95% normal approximation
};

struct MonteCarloSummary {
  std::vector<QueueStats> runs;
  StatSummary time_avg_total_queue;
  StatSummary tail_growth_slope;
  StatSummary discharged_throughput;
};

// Run r uses seed stream_seed(seed, r) from an empty highway in mode 0.
// Throws ArgumentError for zero runs or a non-positive horizon.
MonteCarloSummary montecarlo(const HighwaySpec& spec, const MarkovCapacityModel& model,
                             const ControlConfig& config, const MonteCarloOptions& options);

std::string montecarlo_json(const MonteCarloSummary& summary);

}  // namespace stochctm
