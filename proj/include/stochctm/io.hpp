#pragma once

// Scenario files (JSON) and the JSON/CSV payloads of the command layer.
//
// Scenario document:
//   {
//     "version": 1,
//     "name": "s2",                        (optional)
//     "merge_semantics": "corrected",
//     "cells": [{"free_flow_speed", "nominal_capacity", "capacity_drop",
//                "wave_speed", "jam_density"}, ...],
//     "buffer_capacity": [...],
//     "mainline_ratio": [...],
//     "demand": [number or "inf", ...],
//     "modes": {"capacity": [[...], ...], "rates": [[...], ...]},
//     "config": {"v": [...], "w": [...]}   (optional)
//   }
// Unknown keys are rejected.

#include <optional>
#include <string>

#include "stochctm/certifier.hpp"
#include "stochctm/highway.hpp"
#include "stochctm/optimizer.hpp"
#include "stochctm/simulator.hpp"

namespace stochctm {

struct Scenario {
  std::string name;
  HighwaySpec spec;
  MarkovCapacityModel model;  // steady state filled in
  std::optional<ControlConfig> config;
};

// Throws ScenarioError naming the offending field (or the parse position)
// and ModelError for a reducible chain.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<memory>");
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& scenario);

// {"v": [...], "w": [...]} for a K-cell highway.
ControlConfig parse_control_config(const std::string& text, std::size_t cells);

std::string certificate_json(const DriftCertificate& cert);
std::string opt_result_json(const OptResult& result);
std::string queue_stats_json(const QueueStats& stats);

}  // namespace stochctm
