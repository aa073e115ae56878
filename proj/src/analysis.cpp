#include "stochctm/analysis.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "stochctm/errors.hpp"
#include "stochctm/parallel.hpp"

namespace stochctm {

double GridAxis::value(std::size_t i) const {
  if (count <= 1) return lo;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

std::vector<GridAxis> parse_grid(const std::string& text, std::size_t cells) {
  std::vector<GridAxis> axes;
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || item.size() < 2 || item[0] != 'v') {
      throw ArgumentError("grid axis '" + item + "' is not of the form vK=lo:hi:n");
    }
    GridAxis axis;
    try {
      const long k = std::stol(item.substr(1, eq - 1));
      if (k < 1 || static_cast<std::size_t>(k) > cells) throw ArgumentError("");
      axis.cell = static_cast<std::size_t>(k - 1);
      std::stringstream spec(item.substr(eq + 1));
      std::string lo, hi, n;
      if (!std::getline(spec, lo, ':') || !std::getline(spec, hi, ':') ||
          !std::getline(spec, n, ':')) {
        throw ArgumentError("");
      }
      axis.lo = std::stod(lo);
      axis.hi = std::stod(hi);
      const long count = std::stol(n);
      if (count < 1) throw ArgumentError("");
      axis.count = static_cast<std::size_t>(count);
    } catch (const std::exception&) {
      throw ArgumentError("grid axis '" + item + "' is not of the form vK=lo:hi:n");
    }
    for (const GridAxis& other : axes) {
      if (other.cell == axis.cell) throw ArgumentError("grid axis repeated: " + item);
    }
    axes.push_back(axis);
  }
  if (axes.empty() || axes.size() > 2) throw ArgumentError("grid needs one or two axes");
  return axes;
}

std::vector<int> parse_pattern(const std::string& text, std::size_t cells) {
  if (text.size() != cells) throw ArgumentError("pattern '" + text + "' must have K digits");
  std::vector<int> w;
  for (char c : text) {
    if (c != '0' && c != '1') throw ArgumentError("pattern '" + text + "' must be 0/1 digits");
    w.push_back(c - '0');
  }
  return w;
}

std::string pattern_string(const std::vector<int>& w) {
  std::string s;
  for (int x : w) s.push_back(static_cast<char>('0' + x));
  return s;
}

const char* to_string(SweepVerdict verdict) {
  switch (verdict) {
    case SweepVerdict::stable_certified: return "stable_certified";
    case SweepVerdict::violates_necessary: return "violates_necessary";
    case SweepVerdict::unknown: return "unknown";
  }
  return "?";
}

SweepVerdict classify(const HighwaySpec& spec, const MarkovCapacityModel& model,
                      const ControlConfig& config, const Matrix& A) {
  if (!necessary_check(spec, model, config).passes) return SweepVerdict::violates_necessary;
  try {
    if (certify(spec, model, config, A).verdict == Verdict::stable_certified) {
      return SweepVerdict::stable_certified;
    }
  } catch (const ScenarioError&) {
    // An unmetered ramp that can queue lies outside the certificate's scope.
  }
  return SweepVerdict::unknown;
}

std::vector<SweepPoint> sweep(const HighwaySpec& spec, const MarkovCapacityModel& model,
                              const SweepOptions& options) {
  const std::size_t K = spec.size();
  if (options.axes.empty() || options.axes.size() > 2) {
    throw ArgumentError("sweep: one or two grid axes required");
  }
  std::vector<std::vector<int>> patterns = options.patterns;
  if (patterns.empty()) {
    for (std::size_t m = 0; m < (std::size_t{1} << K); ++m) {
      std::vector<int> w(K);
      for (std::size_t k = 0; k < K; ++k) w[k] = static_cast<int>((m >> (K - 1 - k)) & 1U);
      patterns.push_back(w);
    }
  }
  for (const auto& w : patterns) {
    if (w.size() != K) throw ArgumentError("sweep: pattern length != K");
  }
  const std::size_t n1 = options.axes[0].count;
  const std::size_t n2 = options.axes.size() > 1 ? options.axes[1].count : 1;
  const double total = static_cast<double>(patterns.size()) * static_cast<double>(n1) *
                       static_cast<double>(n2);
  if (total > static_cast<double>(options.point_cap)) {
    throw ArgumentError("sweep: grid exceeds the point cap");
  }

  std::vector<double> base = options.base_inflow;
  if (base.empty()) base.assign(K, 0.0);
  if (base.size() != K) throw ArgumentError("sweep: base inflow length != K");

  const Matrix A = build_A(spec, options.a_kind, options.gamma);
  std::vector<SweepPoint> points(static_cast<std::size_t>(total));
  parallel_for(points.size(), options.threads, [&](std::size_t idx) {
    const std::size_t p = idx / (n1 * n2);
    const std::size_t i = (idx / n2) % n1;
    const std::size_t j = idx % n2;
    SweepPoint& pt = points[idx];
    pt.v = base;
    pt.v[options.axes[0].cell] = options.axes[0].value(i);
    if (options.axes.size() > 1) pt.v[options.axes[1].cell] = options.axes[1].value(j);
    pt.w = patterns[p];
    pt.verdict = classify(spec, model, ControlConfig{pt.v, pt.w}, A);
    if (pt.verdict == SweepVerdict::stable_certified) {
      for (double x : pt.v) pt.J += x;
    }
  });
  return points;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
  out << "v1,v2,w_pattern,verdict,J\n";
  out.precision(10);
  for (const SweepPoint& p : points) {
    out << p.v[0] << ',';
    if (p.v.size() > 1) out << p.v[1];
    out << ',' << pattern_string(p.w) << ',' << to_string(p.verdict) << ',';
    if (p.verdict == SweepVerdict::stable_certified) out << p.J;
    out << '\n';
  }
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream os;
  write_sweep_csv(os, points);
  return os.str();
}

namespace {

template <typename Get>
StatSummary summarize(const std::vector<QueueStats>& runs, Get get) {
  StatSummary s;
  const double n = static_cast<double>(runs.size());
  for (const QueueStats& r : runs) s.mean += get(r);
  s.mean /= n;
  if (runs.size() > 1) {
    double ss = 0.0;
    for (const QueueStats& r : runs) ss += (get(r) - s.mean) * (get(r) - s.mean);
    s.ci_half_width = 1.96 * std::sqrt(ss / (n - 1.0) / n);
  }
  return s;
}

}  // namespace

MonteCarloSummary montecarlo(const HighwaySpec& spec, const MarkovCapacityModel& model,
                             const ControlConfig& config, const MonteCarloOptions& options) {
  if (options.runs == 0) throw ArgumentError("montecarlo: runs must be >= 1");
  if (!(options.horizon > 0.0)) throw ArgumentError("montecarlo: empty horizon, nothing to summarize");
  const std::size_t K = spec.size();
  MonteCarloSummary out;
  out.runs.resize(options.runs);
  parallel_for(options.runs, options.threads, [&](std::size_t r) {
    SimConfig sim;
    sim.horizon = options.horizon;
    sim.step = options.step;
    sim.seed = stream_seed(options.seed, r);
    sim.record_interval = std::min(options.record_interval, options.horizon);
    sim.initial = HybridState{0, std::vector<double>(K, 0.0), std::vector<double>(K, 0.0)};
    out.runs[r] = queue_stats(integrate(spec, model, config, sim));
  });
  out.time_avg_total_queue =
      summarize(out.runs, [](const QueueStats& s) { return s.time_avg_total_queue; });
  out.tail_growth_slope =
      summarize(out.runs, [](const QueueStats& s) { return s.tail_growth_slope; });
  out.discharged_throughput =
      summarize(out.runs, [](const QueueStats& s) { return s.discharged_throughput; });
  return out;
}

std::string montecarlo_json(const MonteCarloSummary& summary) {
  using nlohmann::json;
  auto stat = [](const StatSummary& s) {
    return json{{"mean", s.mean}, {"ci95_half_width", s.ci_half_width}};
  };
  json runs = json::array();
  for (const QueueStats& r : summary.runs) {
    runs.push_back({{"time_avg_total_queue", r.time_avg_total_queue},
                    {"tail_growth_slope", r.tail_growth_slope},
                    {"discharged_throughput", r.discharged_throughput}});
  }
  return json{{"runs", summary.runs.size()},
              {"time_avg_total_queue", stat(summary.time_avg_total_queue)},
              {"tail_growth_slope", stat(summary.tail_growth_slope)},
              {"discharged_throughput", stat(summary.discharged_throughput)},
              {"per_run", runs}}
      .dump(2);
}

}  // namespace stochctm
