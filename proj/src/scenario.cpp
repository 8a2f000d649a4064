#include "detlimits/scenario.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "detlimits/errors.hpp"

namespace detlimits {

namespace {

using nlohmann::json;

std::vector<double> numbers(const json& j, const char* what) {
  if (!j.is_array()) throw InputError(fmt::format("{} must be an array of numbers", what));
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw InputError(fmt::format("{} must be an array of numbers", what));
    out.push_back(v.get<double>());
  }
  return out;
}

const json& field(const json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key)) throw InputError(fmt::format("{}: missing '{}'", where, key));
  return j.at(key);
}

std::string text_field(const json& j, const char* key, const char* where) {
  const auto& v = field(j, key, where);
  if (!v.is_string()) throw InputError(fmt::format("{}: '{}' must be a string", where, key));
  return v.get<std::string>();
}

// Re-raises validation failures of the domain types as input errors.
template <typename F>
auto checked(const std::string& where, F&& make) {
  try {
    return make();
  } catch (const std::invalid_argument& e) {
    throw InputError(where + ": " + e.what());
  }
}

json detector_json(const NamedDetector& d) {
  return {{"name", d.name}, {"accept", std::vector<double>(d.detector.accept().begin(), d.detector.accept().end())}};
}

}  // namespace

const Pmf& Scenario::ai_for(const std::string& task) const {
  if (auto it = ai_models.find(task); it != ai_models.end()) return it->second;
  if (auto it = ai_models.find(""); it != ai_models.end()) return it->second;
  throw InputError("no AI model for task: " + task);
}

std::pair<PopulationModel, Pmf> Scenario::for_task(const std::optional<std::string>& task) const {
  const auto tasks = population.tasks();
  std::string chosen;
  if (task) {
    chosen = *task;
  } else if (tasks.size() == 1) {
    chosen = tasks.front();
  } else {
    throw InputError(fmt::format("scenario has {} tasks; choose one with --task", tasks.size()));
  }
  if (std::find(tasks.begin(), tasks.end(), chosen) == tasks.end()) throw InputError("unknown task: " + chosen);
  return {checked("task " + chosen, [&] { return population.for_task(chosen); }), ai_for(chosen)};
}

const Detector& Scenario::detector(const std::optional<std::string>& name) const {
  if (detectors.empty()) throw InputError("scenario defines no detectors");
  if (!name) return detectors.front().detector;
  for (const auto& d : detectors) {
    if (d.name == *name) return d.detector;
  }
  throw InputError("unknown detector: " + *name);
}

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) throw InputError("scenario must be a JSON object");
  if (!doc.contains("schema_version") || doc["schema_version"] != kScenarioSchemaVersion) {
    throw InputError(fmt::format("scenario needs schema_version {}", kScenarioSchemaVersion));
  }

  const auto& sp = field(doc, "sample_space", "scenario");
  SpacePtr space = checked("sample_space", [&] {
    if (sp.contains("labels")) {
      auto labels = sp.at("labels").get<std::vector<std::string>>();
      if (sp.contains("size") && sp.at("size").get<std::size_t>() != labels.size()) {
        throw std::invalid_argument("size does not match the number of labels");
      }
      return make_space(std::move(labels));
    }
    const auto& size = field(sp, "size", "sample_space");
    if (!size.is_number_unsigned()) throw std::invalid_argument("size must be a positive integer");
    return make_space(size.get<std::size_t>());
  });

  const auto& rows = field(doc, "students", "scenario");
  if (!rows.is_array()) throw InputError("students must be an array");
  std::vector<StudentType> students;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string where = fmt::format("students[{}]", i);
    const auto& r = rows[i];
    const auto id = text_field(r, "id", where.c_str());
    const auto subgroup = text_field(r, "subgroup", where.c_str());
    const auto task = r.contains("task") ? text_field(r, "task", where.c_str()) : std::string("default");
    auto mass = numbers(field(r, "pmf", where.c_str()), (where + ".pmf").c_str());
    students.push_back({id, checked(where, [&] { return Pmf(space, std::move(mass)); }), subgroup, task});
  }
  auto weights = numbers(field(doc, "weights", "scenario"), "weights");
  PopulationModel pop = checked("population", [&] { return PopulationModel(std::move(students), std::move(weights)); });

  std::map<std::string, Pmf> ai;
  const auto& ai_doc = field(doc, "ai_model", "scenario");
  if (ai_doc.is_array()) {
    ai.emplace("", checked("ai_model", [&] { return Pmf(space, numbers(ai_doc, "ai_model")); }));
  } else if (ai_doc.is_object()) {
    for (const auto& [task, mass] : ai_doc.items()) {
      ai.emplace(task, checked("ai_model." + task, [&] { return Pmf(space, numbers(mass, "ai_model")); }));
    }
  } else {
    throw InputError("ai_model must be an array or an object keyed by task");
  }

  std::vector<NamedDetector> detectors;
  if (doc.contains("detectors")) {
    std::set<std::string> names;
    for (std::size_t i = 0; i < doc["detectors"].size(); ++i) {
      const std::string where = fmt::format("detectors[{}]", i);
      const auto& d = doc["detectors"][i];
      const auto name = text_field(d, "name", where.c_str());
      if (!names.insert(name).second) throw InputError("duplicate detector name: " + name);
      if (d.contains("accept")) {
        auto accept = numbers(d["accept"], (where + ".accept").c_str());
        detectors.push_back({name, checked(where, [&] { return Detector(space, std::move(accept)); })});
      } else {
        auto scores = numbers(field(d, "scores", where.c_str()), (where + ".scores").c_str());
        const auto& t = field(d, "threshold", where.c_str());
        if (!t.is_number()) throw InputError(where + ": threshold must be a number");
        detectors.push_back(
            {name, checked(where, [&] { return threshold_detector(space, scores, t.get<double>()); })});
      }
    }
  }

  Scenario s{space, std::move(pop), std::move(ai), std::move(detectors)};
  for (const auto& task : s.population.tasks()) (void)s.ai_for(task);
  return s;
}

Scenario parse_scenario_text(const std::string& text) {
  try {
    return parse_scenario(json::parse(text));
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid scenario JSON: ") + e.what());
  }
}

json to_json(const Scenario& s) {
  json space;
  if (s.space->has_labels()) space["labels"] = s.space->labels();
  space["size"] = s.space->size();

  json students = json::array();
  for (const auto& st : s.population.students()) {
    students.push_back({{"id", st.id},
                        {"subgroup", st.subgroup},
                        {"task", st.task},
                        {"pmf", std::vector<double>(st.pmf.mass().begin(), st.pmf.mass().end())}});
  }
  json ai;
  if (s.ai_models.size() == 1 && s.ai_models.count("")) {
    const auto& m = s.ai_models.at("").mass();
    ai = std::vector<double>(m.begin(), m.end());
  } else {
    ai = json::object();
    for (const auto& [task, pmf] : s.ai_models) ai[task] = std::vector<double>(pmf.mass().begin(), pmf.mass().end());
  }
  json detectors = json::array();
  for (const auto& d : s.detectors) detectors.push_back(detector_json(d));

  return {{"schema_version", kScenarioSchemaVersion},
          {"sample_space", space},
          {"students", students},
          {"weights", s.population.weights()},
          {"ai_model", ai},
          {"detectors", detectors}};
}

}  // namespace detlimits
