// Command-line front end. Talks to the toolkit only through the C API.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stochctm/stochctm.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

int exit_code(stochctm_status status) {
  switch (status) {
    case STOCHCTM_OK: return kExitOk;
    case STOCHCTM_E_ARGUMENT:
    case STOCHCTM_E_SCHEMA:
    case STOCHCTM_E_MODEL:
    case STOCHCTM_E_IO:
    case STOCHCTM_E_NOT_APPLICABLE: return kExitUsage;
    case STOCHCTM_E_NUMERICAL:
    case STOCHCTM_E_INTERNAL: return kExitNumerical;
  }
  return kExitNumerical;
}

int report(stochctm_status status) {
  std::cerr << "error (" << stochctm_status_name(status) << "): " << stochctm_last_error() << '\n';
  return exit_code(status);
}

// Accepts inline JSON or the path of a JSON file.
bool read_config(const std::string& arg, std::string& out) {
  if (arg.empty()) return true;
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && arg[first] == '{') {
    out = arg;
    return true;
  }
  std::ifstream in(arg);
  if (!in) {
    std::cerr << "error: cannot read config '" << arg << "'\n";
    return false;
  }
  std::ostringstream os;
  os << in.rdbuf();
  out = os.str();
  return true;
}

bool write_text(const std::string& path, const char* text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return true;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    return false;
  }
  out << text;
  return static_cast<bool>(out);
}

class Handle {
 public:
  ~Handle() { stochctm_scenario_free(ptr_); }
  stochctm_status load(const std::string& path) {
    return stochctm_scenario_load_file(path.c_str(), &ptr_);
  }
  const stochctm_scenario* get() const { return ptr_; }

 private:
  stochctm_scenario* ptr_ = nullptr;
};

class Text {
 public:
  ~Text() { stochctm_string_free(ptr_); }
  char** out() { return &ptr_; }
  const char* get() const { return ptr_; }

 private:
  char* ptr_ = nullptr;
};

struct Args {
  std::string file;
  std::string config;
  std::string out;
  std::string a_kind = "uniform";
  double gamma = 1.0;
  double horizon = 200.0;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  std::size_t runs = 10;
  std::string grid;
  std::vector<std::string> patterns;
};

template <typename Call>
int run(const Args& args, bool needs_config, const std::string& out_path, Call call) {
  std::string config;
  if (!read_config(args.config, config)) return kExitUsage;
  Handle scenario;
  if (stochctm_status s = scenario.load(args.file); s != STOCHCTM_OK) return report(s);
  Text text;
  const char* cfg = needs_config && !config.empty() ? config.c_str() : nullptr;
  if (stochctm_status s = call(scenario.get(), cfg, text.out()); s != STOCHCTM_OK) {
    return report(s);
  }
  if (!write_text(out_path, text.get())) return kExitUsage;
  if (out_path.empty() || out_path == "-") {
    const std::string t = text.get();
    if (!t.empty() && t.back() != '\n') std::cout << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ramp-control design for highways with Markov-switching capacities"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(stochctm_version()));
  Args args;
  auto add_a = [&](CLI::App* cmd) {
    cmd->add_option("--A", args.a_kind, "Lyapunov matrix construction")
        ->check(CLI::IsMember({"uniform", "weighted", "position_weighted", "hotspot"}));
    cmd->add_option("--gamma", args.gamma, "Scale of the uniform and weighted constructions")
        ->check(CLI::PositiveNumber);
  };

  auto* validate = app.add_subcommand("validate", "Parse and check a scenario file");
  validate->add_option("file", args.file)->required();
  validate->add_option("--config", args.config, "Control config (JSON text or file)");

  auto* simulate = app.add_subcommand("simulate", "Simulate one trajectory to CSV");
  simulate->add_option("file", args.file)->required();
  simulate->add_option("--config", args.config, "Control config (JSON text or file)");
  simulate->add_option("--horizon", args.horizon, "Horizon in hours")->check(CLI::PositiveNumber);
  simulate->add_option("--dt", args.dt, "Euler step in hours")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", args.seed);
  simulate->add_option("--out", args.out, "CSV output path (default stdout)");

  auto* certify = app.add_subcommand("certify", "Search for a drift certificate");
  certify->add_option("file", args.file)->required();
  certify->add_option("--config", args.config, "Control config (JSON text or file)");
  add_a(certify);

  auto* optimize = app.add_subcommand("optimize", "Maximize certified throughput");
  optimize->add_option("file", args.file)->required();
  add_a(optimize);

  auto* hotspot = app.add_subcommand("hotspot", "Metering plan for a stationary hotspot");
  hotspot->add_option("file", args.file)->required();

  auto* sweep = app.add_subcommand("sweep", "Verdicts over an inflow grid");
  sweep->add_option("file", args.file)->required();
  sweep->add_option("--grid", args.grid, "v1=lo:hi:n[,v2=lo:hi:n]")->required();
  sweep->add_option("--w", args.patterns, "Metering patterns such as 10 (default: all)");
  sweep->add_option("--out", args.out, "CSV output path (default stdout)");
  add_a(sweep);

  auto* montecarlo = app.add_subcommand("montecarlo", "Seeded replications with queue statistics");
  montecarlo->add_option("file", args.file)->required();
  montecarlo->add_option("--config", args.config, "Control config (JSON text or file)");
  montecarlo->add_option("--runs", args.runs)->check(CLI::PositiveNumber);
  montecarlo->add_option("--horizon", args.horizon, "Horizon in hours");
  montecarlo->add_option("--seed", args.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const char* a = args.a_kind.c_str();
  if (validate->parsed()) {
    return run(args, true, "", [&](const stochctm_scenario* s, const char* cfg, char** out) {
      return stochctm_validate(s, cfg, out);
    });
  }
  if (simulate->parsed()) {
    return run(args, true, args.out, [&](const stochctm_scenario* s, const char* cfg, char** out) {
      return stochctm_simulate(s, cfg, args.horizon, args.dt, args.seed, out);
    });
  }
  if (certify->parsed()) {
    return run(args, true, "", [&](const stochctm_scenario* s, const char* cfg, char** out) {
      return stochctm_certify(s, cfg, a, args.gamma, out);
    });
  }
  if (optimize->parsed()) {
    return run(args, false, "", [&](const stochctm_scenario* s, const char*, char** out) {
      return stochctm_optimize(s, a, args.gamma, out);
    });
  }
  if (hotspot->parsed()) {
    return run(args, false, "", [&](const stochctm_scenario* s, const char*, char** out) {
      return stochctm_hotspot(s, out);
    });
  }
  if (sweep->parsed()) {
    std::string joined;
    for (const std::string& p : args.patterns) joined += (joined.empty() ? "" : ",") + p;
    const char* pats = args.patterns.empty() ? nullptr : joined.c_str();
    return run(args, false, args.out, [&](const stochctm_scenario* s, const char*, char** out) {
      return stochctm_sweep(s, args.grid.c_str(), pats, a, args.gamma, out);
    });
  }
  if (montecarlo->parsed()) {
    return run(args, true, "", [&](const stochctm_scenario* s, const char* cfg, char** out) {
      return stochctm_montecarlo(s, cfg, args.runs, args.horizon, args.seed, out);
    });
  }
  return kExitUsage;
}
