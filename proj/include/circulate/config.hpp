#pragma once

#include <string>

#include <json.hpp>

#include "circulate/engine.hpp"
#include "circulate/types.hpp"

namespace circulate {

/// One self-contained run definition: who exists, what to execute, where
/// everything lives, and how to run it.
struct Scenario {
    BehaviorMap behaviors;
    WorkflowPattern pattern;
    Topology topology;
    Mode mode = Mode::Centralized;
    Case kase = Case::Worst;
    SimOptions sim;
};

Scenario load_scenario(const nlohmann::json& doc);
Scenario load_scenario_file(const std::string& path);

nlohmann::json scenario_to_json(const Scenario& s);
nlohmann::json trace_to_json(const RunTrace& trace);

TransformSpec parse_transform(const nlohmann::json& j);
WorkflowPattern parse_pattern(const nlohmann::json& j);
Topology parse_topology(const nlohmann::json& j);
BehaviorMap parse_registry(const nlohmann::json& j);

}  // namespace circulate
