#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "detlimits/detectors.hpp"
#include "detlimits/distributions.hpp"

namespace detlimits {

inline constexpr int kScenarioSchemaVersion = 1;

struct NamedDetector {
  std::string name;
  Detector detector;
};

/// On-disk description of a population, its AI model(s), and optional
/// detectors. All invariants of the underlying types are re-checked on load.
struct Scenario {
  SpacePtr space;
  PopulationModel population;
  /// AI pmf per task. A scenario with a single untagged AI pmf stores it
  /// under the empty key, which applies to every task.
  std::map<std::string, Pmf> ai_models;
  std::vector<NamedDetector> detectors;

  /// The AI pmf used for `task`.
  const Pmf& ai_for(const std::string& task) const;

  /// Population and AI pmf restricted to one task. Without a task the
  /// scenario must contain exactly one.
  std::pair<PopulationModel, Pmf> for_task(const std::optional<std::string>& task) const;

  const Detector& detector(const std::optional<std::string>& name) const;
};

Scenario parse_scenario(const nlohmann::json& doc);
Scenario parse_scenario_text(const std::string& text);
nlohmann::json to_json(const Scenario& scenario);

}  // namespace detlimits
