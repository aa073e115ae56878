#include "stochctm/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "stochctm/errors.hpp"

namespace stochctm {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& origin, const std::string& where,
                               const std::string& what) {
  throw ScenarioError(origin + ": " + where + ": " + what);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& origin, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      schema_error(origin, where.empty() ? it.key() : where + "." + it.key(), "unknown field");
    }
  }
}

const json& field(const json& obj, const std::string& key, const std::string& origin,
                  const std::string& where) {
  const std::string path = where.empty() ? key : where + "." + key;
  if (!obj.contains(key)) schema_error(origin, path, "missing field");
  return obj.at(key);
}

double number(const json& value, const std::string& origin, const std::string& path,
              bool allow_inf = false) {
  if (value.is_number()) return value.get<double>();
  if (allow_inf && value.is_string() && value.get<std::string>() == "inf") return kInfinity;
  schema_error(origin, path, allow_inf ? "expected a number or \"inf\"" : "expected a number");
}

std::vector<double> numbers(const json& value, const std::string& origin, const std::string& path,
                            bool allow_inf = false) {
  if (!value.is_array()) schema_error(origin, path, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    out.push_back(number(value[i], origin, path + "[" + std::to_string(i) + "]", allow_inf));
  }
  return out;
}

std::vector<std::vector<double>> matrix(const json& value, const std::string& origin,
                                        const std::string& path) {
  if (!value.is_array()) schema_error(origin, path, "expected an array of arrays");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    out.push_back(numbers(value[i], origin, path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

ControlConfig config_from(const json& doc, std::size_t cells, const std::string& origin,
                          const std::string& where) {
  if (!doc.is_object()) schema_error(origin, where.empty() ? "config" : where, "expected an object");
  reject_unknown(doc, {"v", "w"}, origin, where);
  ControlConfig c;
  const std::string prefix = where.empty() ? "" : where + ".";
  c.inflow = numbers(field(doc, "v", origin, where), origin, prefix + "v");
  const json& w = field(doc, "w", origin, where);
  if (!w.is_array()) schema_error(origin, prefix + "w", "expected an array");
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (!w[k].is_number_integer()) {
      schema_error(origin, prefix + "w[" + std::to_string(k) + "]", "expected 0 or 1");
    }
    c.metering_off.push_back(w[k].get<int>());
  }
  if (c.inflow.size() != cells) schema_error(origin, prefix + "v", "length must equal cell count");
  if (c.metering_off.size() != cells) {
    schema_error(origin, prefix + "w", "length must equal cell count");
  }
  return c;
}

json finite_or_tag(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : "-inf";
}

json certificate_object(const DriftCertificate& cert) {
  json slacks = json::array();
  for (double s : cert.slacks) slacks.push_back(s);
  return json{{"verdict", to_string(cert.verdict)},
              {"A", cert.A},
              {"b", cert.b},
              {"slacks", slacks},
              {"max_slack", finite_or_tag(cert.max_slack)},
              {"vertex_count", cert.vertex_count},
              {"warnings", cert.warnings}};
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(origin + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) schema_error(origin, "<root>", "expected an object");
  reject_unknown(doc,
                 {"version", "name", "merge_semantics", "cells", "buffer_capacity",
                  "mainline_ratio", "demand", "modes", "config"},
                 origin, "");

  const json& version = field(doc, "version", origin, "");
  if (!version.is_number_integer() || version.get<int>() != 1) {
    schema_error(origin, "version", "only version 1 is supported");
  }
  const json& merge = field(doc, "merge_semantics", origin, "");
  if (!merge.is_string() || merge.get<std::string>() != "corrected") {
    schema_error(origin, "merge_semantics", "only \"corrected\" is supported");
  }

  Scenario sc;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) schema_error(origin, "name", "expected a string");
    sc.name = doc["name"].get<std::string>();
  }

  const json& cells = field(doc, "cells", origin, "");
  if (!cells.is_array() || cells.empty()) schema_error(origin, "cells", "expected a non-empty array");
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const std::string where = "cells[" + std::to_string(k) + "]";
    if (!cells[k].is_object()) schema_error(origin, where, "expected an object");
    reject_unknown(cells[k],
                   {"free_flow_speed", "nominal_capacity", "capacity_drop", "wave_speed",
                    "jam_density"},
                   origin, where);
    CellParams c;
    c.free_flow_speed = number(field(cells[k], "free_flow_speed", origin, where), origin,
                               where + ".free_flow_speed");
    c.nominal_capacity = number(field(cells[k], "nominal_capacity", origin, where), origin,
                                where + ".nominal_capacity");
    c.capacity_drop = number(field(cells[k], "capacity_drop", origin, where), origin,
                             where + ".capacity_drop");
    c.wave_speed =
        number(field(cells[k], "wave_speed", origin, where), origin, where + ".wave_speed");
    c.jam_density =
        number(field(cells[k], "jam_density", origin, where), origin, where + ".jam_density");
    sc.spec.cells.push_back(c);
  }
  sc.spec.buffer_capacity =
      numbers(field(doc, "buffer_capacity", origin, ""), origin, "buffer_capacity");
  sc.spec.mainline_ratio = numbers(field(doc, "mainline_ratio", origin, ""), origin, "mainline_ratio");
  sc.spec.demand = numbers(field(doc, "demand", origin, ""), origin, "demand", true);

  const json& modes = field(doc, "modes", origin, "");
  if (!modes.is_object()) schema_error(origin, "modes", "expected an object");
  reject_unknown(modes, {"capacity", "rates"}, origin, "modes");
  sc.model.capacity = matrix(field(modes, "capacity", origin, "modes"), origin, "modes.capacity");
  sc.model.rates = matrix(field(modes, "rates", origin, "modes"), origin, "modes.rates");

  if (doc.contains("config")) {
    sc.config = config_from(doc["config"], sc.spec.size(), origin, "config");
  }

  const auto report =
      validate(sc.spec, sc.model, sc.config ? &*sc.config : nullptr);
  if (!report.empty()) {
    std::string all;
    for (const auto& line : report) all += (all.empty() ? "" : "; ") + line;
    throw ScenarioError(origin + ": " + all);
  }
  sc.model = with_steady_state(sc.model);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_scenario(os.str(), path);
}

std::string scenario_to_json(const Scenario& sc) {
  json cells = json::array();
  for (const CellParams& c : sc.spec.cells) {
    cells.push_back({{"free_flow_speed", c.free_flow_speed},
                     {"nominal_capacity", c.nominal_capacity},
                     {"capacity_drop", c.capacity_drop},
                     {"wave_speed", c.wave_speed},
                     {"jam_density", c.jam_density}});
  }
  json demand = json::array();
  for (double d : sc.spec.demand) demand.push_back(finite_or_tag(d));
  json doc{{"version", 1},
           {"merge_semantics", "corrected"},
           {"cells", cells},
           {"buffer_capacity", sc.spec.buffer_capacity},
           {"mainline_ratio", sc.spec.mainline_ratio},
           {"demand", demand},
           {"modes", {{"capacity", sc.model.capacity}, {"rates", sc.model.rates}}}};
  if (!sc.name.empty()) doc["name"] = sc.name;
  if (sc.config) doc["config"] = {{"v", sc.config->inflow}, {"w", sc.config->metering_off}};
  return doc.dump(2);
}

ControlConfig parse_control_config(const std::string& text, std::size_t cells) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("config: invalid JSON: ") + e.what());
  }
  return config_from(doc, cells, "config", "");
}

std::string certificate_json(const DriftCertificate& cert) {
  return certificate_object(cert).dump(2);
}

std::string opt_result_json(const OptResult& r) {
  json log = json::array();
  for (const SubproblemLog& s : r.log) {
    log.push_back({{"w", s.w},
                   {"xi", s.xi},
                   {"status", s.status},
                   {"J", s.J},
                   {"v", s.v},
                   {"blocks_total", s.blocks_total},
                   {"blocks_with_rows", s.blocks_with_rows},
                   {"blocks_added", s.blocks_added},
                   {"rounds", s.rounds}});
  }
  return json{{"J", r.J},
              {"v", r.v},
              {"w", r.w},
              {"xi", r.xi},
              {"certificate", certificate_object(r.certificate)},
              {"subproblem_count", r.subproblem_count},
              {"pruned_count", r.pruned_count},
              {"log", log}}
      .dump(2);
}

std::string queue_stats_json(const QueueStats& s) {
  return json{{"time_avg_total_queue", s.time_avg_total_queue},
              {"tail_growth_slope", s.tail_growth_slope},
              {"discharged_throughput", s.discharged_throughput}}
      .dump(2);
}

}  // namespace stochctm
