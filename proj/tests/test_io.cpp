#include <doctest.h>

#include <json.hpp>

#include <string>

#include "stochctm/errors.hpp"
#include "stochctm/io.hpp"

using namespace stochctm;
using nlohmann::json;

namespace {

json s2_doc() {
  return json::parse(R"({
    "version": 1,
    "merge_semantics": "corrected",
    "cells": [
      {"free_flow_speed": 100, "nominal_capacity": 4000, "capacity_drop": 0, "wave_speed": 20, "jam_density": 240},
      {"free_flow_speed": 100, "nominal_capacity": 4000, "capacity_drop": 2000, "wave_speed": 20, "jam_density": 240}
    ],
    "buffer_capacity": [4000, 2000],
    "mainline_ratio": [1.0, 0.0],
    "demand": ["inf", "inf"],
    "modes": {"capacity": [[4000, 4000], [4000, 2000]], "rates": [[0, 6], [6, 0]]}
  })");
}

std::string rejection(const json& doc) {
  try {
    parse_scenario(doc.dump(), "doc");
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("S2 document parses with an empty validation report") {
  const Scenario sc = parse_scenario(s2_doc().dump());
  CHECK(sc.spec.size() == 2);
  CHECK(std::isinf(sc.spec.demand[0]));
  CHECK(validate(sc.spec, sc.model).empty());
  CHECK(sc.model.steady[0] == doctest::Approx(0.5));
  CHECK_FALSE(sc.config.has_value());
}

TEST_CASE("scenario files in the repository load") {
  for (const char* name : {"s2", "s2_nominal", "example1", "h3"}) {
    const Scenario sc = load_scenario(std::string("scenarios/") + name + ".json");
    CHECK(sc.name == name);
    REQUIRE(sc.config.has_value());
    CHECK(validate(sc.spec, sc.model, &*sc.config).empty());
  }
}

TEST_CASE("non-zero terminal ratio is rejected naming the field") {
  json doc = s2_doc();
  doc["mainline_ratio"] = {1.0, 0.5};
  CHECK(rejection(doc).find("mainline_ratio") != std::string::npos);
}

TEST_CASE("capacity off the two levels is rejected") {
  json doc = s2_doc();
  doc["modes"]["capacity"][1][1] = 2500;
  const std::string msg = rejection(doc);
  CHECK(msg.find("capacity[1][1]") != std::string::npos);
}

TEST_CASE("unknown fields are rejected with their path") {
  json doc = s2_doc();
  doc["cells"][1]["lanes"] = 3;
  CHECK(rejection(doc).find("cells[1].lanes: unknown field") != std::string::npos);
  json top = s2_doc();
  top["extra"] = true;
  CHECK(rejection(top).find("extra: unknown field") != std::string::npos);
}

TEST_CASE("type errors name the field") {
  json doc = s2_doc();
  doc["cells"][0]["jam_density"] = "wide";
  CHECK(rejection(doc).find("cells[0].jam_density: expected a number") != std::string::npos);
  json missing = s2_doc();
  missing.erase("modes");
  CHECK(rejection(missing).find("modes: missing field") != std::string::npos);
  json sem = s2_doc();
  sem["merge_semantics"] = "original";
  CHECK(rejection(sem).find("merge_semantics") != std::string::npos);
  CHECK_THROWS_AS(parse_scenario("{not json"), ScenarioError);
}

TEST_CASE("reducible chain is rejected") {
  json doc = s2_doc();
  doc["modes"]["rates"] = {{0, 6}, {0, 0}};
  CHECK(rejection(doc).find("irreducible") != std::string::npos);
}

TEST_CASE("missing files raise an io error") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/s.json"), IoError);
}

TEST_CASE("scenario round-trips through JSON") {
  json doc = s2_doc();
  doc["config"] = {{"v", {2000, 300}}, {"w", {1, 0}}};
  const Scenario a = parse_scenario(doc.dump());
  const Scenario b = parse_scenario(scenario_to_json(a));
  CHECK(b.spec.demand.size() == 2);
  CHECK(std::isinf(b.spec.demand[1]));
  CHECK(b.model.capacity == a.model.capacity);
  CHECK(b.config->inflow == a.config->inflow);
  CHECK(b.config->metering_off == a.config->metering_off);
}

TEST_CASE("control config parsing checks lengths and types") {
  const ControlConfig c = parse_control_config(R"({"v": [1, 2], "w": [1, 0]})", 2);
  CHECK(c.inflow == std::vector<double>{1, 2});
  CHECK_THROWS_AS(parse_control_config(R"({"v": [1], "w": [1, 0]})", 2), ScenarioError);
  CHECK_THROWS_AS(parse_control_config(R"({"v": [1, 2], "w": [1.5, 0]})", 2), ScenarioError);
  CHECK_THROWS_AS(parse_control_config(R"({"v": [1, 2]})", 2), ScenarioError);
}
