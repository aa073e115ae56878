#include "stochctm/stochctm.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <new>
#include <sstream>
#include <string>

#include <json.hpp>

#include "stochctm/analysis.hpp"
#include "stochctm/certifier.hpp"
#include "stochctm/errors.hpp"
#include "stochctm/io.hpp"
#include "stochctm/optimizer.hpp"
#include "stochctm/simulator.hpp"

struct stochctm_scenario {
  stochctm::Scenario scenario;
};

namespace {

using nlohmann::json;
using namespace stochctm;

thread_local std::string g_last_error;

stochctm_status fail(stochctm_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Maps library exceptions onto status codes; the body returns STOCHCTM_OK.
template <typename Body>
stochctm_status guarded(Body body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const ArgumentError& e) {
    return fail(STOCHCTM_E_ARGUMENT, e.what());
  } catch (const ScenarioError& e) {
    return fail(STOCHCTM_E_SCHEMA, e.what());
  } catch (const ModelError& e) {
    return fail(STOCHCTM_E_MODEL, e.what());
  } catch (const NumericalError& e) {
    return fail(STOCHCTM_E_NUMERICAL, e.what());
  } catch (const NotApplicableError& e) {
    return fail(STOCHCTM_E_NOT_APPLICABLE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(STOCHCTM_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(STOCHCTM_E_INTERNAL, e.what());
  } catch (...) {
    return fail(STOCHCTM_E_INTERNAL, "unknown failure");
  }
}

char* dup(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const Scenario& get(const stochctm_scenario* s) {
  if (s == nullptr) throw ArgumentError("scenario handle is null");
  return s->scenario;
}

void require_out(const void* out) {
  if (out == nullptr) throw ArgumentError("output pointer is null");
}

ControlConfig config_of(const Scenario& sc, const char* config_json) {
  ControlConfig config;
  if (config_json != nullptr) {
    config = parse_control_config(config_json, sc.spec.size());
  } else if (sc.config) {
    config = *sc.config;
  } else {
    throw ArgumentError("no control config given and the scenario has none");
  }
  const auto report = validate(sc.spec, sc.model, &config);
  if (!report.empty()) {
    std::string msg = "invalid control config: " + report.front();
    for (std::size_t i = 1; i < report.size(); ++i) msg += "; " + report[i];
    throw ArgumentError(msg);
  }
  return config;
}

AKind kind_of(const char* a_kind) { return a_kind ? parse_a_kind(a_kind) : AKind::uniform; }

json interval_json(const Interval& iv) {
  if (iv.empty()) return nullptr;
  return json{{"lo", iv.lo}, {"hi", iv.hi}, {"lo_open", iv.lo_open}, {"hi_open", iv.hi_open}};
}

}  // namespace

extern "C" {

const char* stochctm_version(void) { return "0.1.0"; }

const char* stochctm_status_name(stochctm_status status) {
  switch (status) {
    case STOCHCTM_OK: return "ok";
    case STOCHCTM_E_ARGUMENT: return "argument error";
    case STOCHCTM_E_SCHEMA: return "schema error";
    case STOCHCTM_E_MODEL: return "model error";
    case STOCHCTM_E_NUMERICAL: return "numerical error";
    case STOCHCTM_E_IO: return "io error";
    case STOCHCTM_E_NOT_APPLICABLE: return "not applicable";
    case STOCHCTM_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* stochctm_last_error(void) { return g_last_error.c_str(); }

void stochctm_string_free(char* text) { delete[] text; }

stochctm_status stochctm_scenario_load_file(const char* path, stochctm_scenario** out) {
  return guarded([&] {
    require_out(out);
    *out = nullptr;
    if (path == nullptr) throw ArgumentError("path is null");
    Scenario sc;
    try {
      sc = load_scenario(path);
    } catch (const IoError& e) {
      return fail(STOCHCTM_E_IO, e.what());
    }
    *out = new stochctm_scenario{std::move(sc)};
    return STOCHCTM_OK;
  });
}

stochctm_status stochctm_scenario_load_json(const char* text, stochctm_scenario** out) {
  return guarded([&] {
    require_out(out);
    *out = nullptr;
    if (text == nullptr) throw ArgumentError("json text is null");
    *out = new stochctm_scenario{parse_scenario(text)};
    return STOCHCTM_OK;
  });
}

void stochctm_scenario_free(stochctm_scenario* scenario) { delete scenario; }

size_t stochctm_scenario_cells(const stochctm_scenario* scenario) {
  return scenario ? scenario->scenario.spec.size() : 0;
}

stochctm_status stochctm_validate(const stochctm_scenario* scenario, const char* config_json,
                                  char** out_json) {
  return guarded([&] {
    require_out(out_json);
    const Scenario& sc = get(scenario);
    json j{{"name", sc.name},
           {"valid", true},
           {"cells", sc.spec.size()},
           {"modes", sc.model.mode_count()},
           {"steady_state", sc.model.steady},
           {"stationary_hotspot", is_stationary_hotspot(sc.spec)}};
    if (config_json != nullptr || sc.config) {
      const ControlConfig config = config_of(sc, config_json);
      const NecessaryCheck nc = necessary_check(sc.spec, sc.model, config);
      j["necessary_check"] = {{"passes", nc.passes}, {"witness", nc.witness}};
    }
    *out_json = dup(j.dump(2));
    return STOCHCTM_OK;
  });
}

stochctm_status stochctm_simulate(const stochctm_scenario* scenario, const char* config_json,
                                  double horizon, double dt, uint64_t seed, char** out_csv) {
  return guarded([&] {
    require_out(out_csv);
    const Scenario& sc = get(scenario);
    const std::size_t K = sc.spec.size();
    SimConfig sim;
    sim.horizon = horizon;
    if (dt > 0.0) sim.step = dt;
    sim.seed = seed;
    sim.initial = HybridState{0, std::vector<double>(K, 0.0), std::vector<double>(K, 0.0)};
    const Trajectory traj = integrate(sc.spec, sc.model, config_of(sc, config_json), sim);
    *out_csv = dup(trajectory_csv(traj));
    return STOCHCTM_OK;
  });
}

stochctm_status stochctm_certify(const stochctm_scenario* scenario, const char* config_json,
                                 const char* a_kind, double gamma, char** out_json) {
  return guarded([&] {
    require_out(out_json);
    const Scenario& sc = get(scenario);
    const ControlConfig config = config_of(sc, config_json);
    const Matrix A = build_A(sc.spec, kind_of(a_kind), gamma);
    DriftCertificate cert;
    try {
      cert = certify(sc.spec, sc.model, config, A);
    } catch (const ScenarioError& e) {
      // An unmetered ramp whose queue can grow is outside the certificate's scope.
      cert.verdict = Verdict::no_certificate;
      cert.A = A;
      cert.max_slack = kInfinity;
      cert.warnings.push_back(e.what());
    }
    *out_json = dup(certificate_json(cert));
    return STOCHCTM_OK;
  });
}

stochctm_status stochctm_optimize(const stochctm_scenario* scenario, const char* a_kind,
                                  double gamma, char** out_json) {
  return guarded([&] {
    require_out(out_json);
    const Scenario& sc = get(scenario);
    const Matrix A = build_A(sc.spec, kind_of(a_kind), gamma);
    *out_json = dup(opt_result_json(maximize_throughput(sc.spec, sc.model, A)));
    return STOCHCTM_OK;
  });
}

stochctm_status stochctm_hotspot(const stochctm_scenario* scenario, char** out_json) {
  return guarded([&] {
    require_out(out_json);
    const Scenario& sc = get(scenario);
    if (!is_stationary_hotspot(sc.spec)) throw NotApplicableError("not a stationary hotspot");
    json j;
    bool finite = true;
    for (double d : sc.spec.demand) finite = finite && std::isfinite(d);
    if (finite) {
      const std::vector<int> w = hotspot_algorithm(sc.spec, sc.model, sc.spec.demand);
      double J = 0.0;
      for (double d : sc.spec.demand) J += d;
      j = {{"algorithm", "greedy"}, {"w", w}, {"v", sc.spec.demand}, {"J", J}};
    } else {
      const InfiniteDemandOptimum opt = infinite_demand_optimum(sc.spec, sc.model);
      j = {{"algorithm", "infinite_demand"},
           {"J", opt.mean_capacity},
           {"v", opt.v},
           {"w", opt.w},
           {"metered_set_v1", interval_json(opt.metered_set)},
           {"open_set_v1", interval_json(opt.open_set)}};
    }
    *out_json = dup(j.dump(2));
    return STOCHCTM_OK;
  });
}

stochctm_status stochctm_sweep(const stochctm_scenario* scenario, const char* grid,
                               const char* patterns, const char* a_kind, double gamma,
                               char** out_csv) {
  return guarded([&] {
    require_out(out_csv);
    const Scenario& sc = get(scenario);
    if (grid == nullptr) throw ArgumentError("grid is null");
    SweepOptions opts;
    opts.axes = parse_grid(grid, sc.spec.size());
    if (patterns != nullptr) {
      std::stringstream all(patterns);
      std::string item;
      while (std::getline(all, item, ',')) {
        if (!item.empty()) opts.patterns.push_back(parse_pattern(item, sc.spec.size()));
      }
    }
    if (sc.config) opts.base_inflow = sc.config->inflow;
    opts.a_kind = kind_of(a_kind);
    opts.gamma = gamma;
    *out_csv = dup(sweep_csv(sweep(sc.spec, sc.model, opts)));
    return STOCHCTM_OK;
  });
}

stochctm_status stochctm_montecarlo(const stochctm_scenario* scenario, const char* config_json,
                                    size_t runs, double horizon, uint64_t seed, char** out_json) {
  return guarded([&] {
    require_out(out_json);
    const Scenario& sc = get(scenario);
    MonteCarloOptions opts;
    opts.runs = runs;
    opts.horizon = horizon;
    opts.seed = seed;
    *out_json = dup(montecarlo_json(montecarlo(sc.spec, sc.model, config_of(sc, config_json), opts)));
    return STOCHCTM_OK;
  });
}

}  // extern "C"
