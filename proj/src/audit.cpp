#include "detlimits/audit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "detlimits/bounds.hpp"
#include "detlimits/errors.hpp"

namespace detlimits::audit {

const char* const kBoundCheckNote =
    "floor = max(0, power - TV). Valid as an FPR floor only when TV is exact or an upper bound; "
    "classifier-based TV estimates are lower bounds and do not yield a valid floor.";

namespace {

constexpr const char* kCsvHeader = "doc_id,subgroup,task,ground_truth,score";

// Splits one CSV line. Fields may be double-quoted with "" as an escaped quote.
bool split_csv_line(const std::string& line, std::vector<std::string>& fields, std::string& error) {
  fields.clear();
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      if (!field.empty() || was_quoted) {
        error = "unexpected quote inside field";
        return false;
      }
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else {
      if (was_quoted) {
        error = "characters after closing quote";
        return false;
      }
      field.push_back(c);
    }
  }
  if (quoted) {
    error = "unterminated quoted field";
    return false;
  }
  fields.push_back(std::move(field));
  return true;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::optional<GroundTruth> parse_ground_truth(const std::string& s) {
  if (s == "human") return GroundTruth::kHuman;
  if (s == "ai") return GroundTruth::kAi;
  return std::nullopt;
}

// Returns an error message, or empty on success.
std::string parse_score(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || s.empty()) return fmt::format("score '{}' is not a number", s);
  if (!std::isfinite(out) || out < 0.0 || out > 1.0) return fmt::format("score {} is outside [0, 1]", s);
  return {};
}

// Validates and appends a record; duplicates are reported, not kept.
void accept_record(AuditRecord rec, std::size_t line, IngestResult& result, std::set<std::string>& ids) {
  if (rec.doc_id.empty()) {
    result.diagnostics.push_back({line, "doc_id is empty"});
    return;
  }
  if (!ids.insert(rec.doc_id).second) {
    result.diagnostics.push_back({line, fmt::format("duplicate doc_id '{}'", rec.doc_id)});
    return;
  }
  result.records.push_back(std::move(rec));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

IngestResult ingest_csv(const std::string& text) {
  IngestResult result;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t data_rows = 0;
  std::set<std::string> ids;
  std::vector<std::string> fields;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      if (line != kCsvHeader) {
        throw InputError(fmt::format("line {}: expected header '{}'", line_no, kCsvHeader));
      }
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    ++data_rows;
    std::string error;
    if (!split_csv_line(line, fields, error)) {
      result.diagnostics.push_back({line_no, error});
      continue;
    }
    if (fields.size() != 5) {
      result.diagnostics.push_back({line_no, fmt::format("expected 5 fields, found {}", fields.size())});
      continue;
    }
    auto truth = parse_ground_truth(fields[3]);
    if (!truth) {
      result.diagnostics.push_back(
          {line_no, fmt::format("unknown ground_truth '{}' (expected human or ai)", fields[3])});
      continue;
    }
    AuditRecord rec{fields[0], fields[1], fields[2], *truth, 0.0};
    if (auto err = parse_score(fields[4], rec.score); !err.empty()) {
      result.diagnostics.push_back({line_no, err});
      continue;
    }
    accept_record(std::move(rec), line_no, result, ids);
  }
  if (!have_header) throw InputError("empty file: no header row");
  if (data_rows == 0) throw InputError("empty file: no data rows");
  return result;
}

IngestResult ingest_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("schema_version")) throw InputError("missing schema_version");
  if (doc["schema_version"] != kSchemaVersion) {
    throw InputError(fmt::format("unsupported schema_version {}", doc["schema_version"].dump()));
  }
  if (!doc.contains("records") || !doc["records"].is_array()) throw InputError("missing records array");
  const auto& rows = doc["records"];
  if (rows.empty()) throw InputError("empty file: no records");

  IngestResult result;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t line = i + 1;
    const auto& row = rows[i];
    auto str = [&](const char* key) -> std::optional<std::string> {
      if (!row.is_object() || !row.contains(key) || !row[key].is_string()) return std::nullopt;
      return row[key].get<std::string>();
    };
    auto doc_id = str("doc_id");
    auto subgroup = str("subgroup");
    auto task = str("task");
    auto gt = str("ground_truth");
    if (!doc_id || !subgroup || !task || !gt) {
      result.diagnostics.push_back({line, "record needs string fields doc_id, subgroup, task, ground_truth"});
      continue;
    }
    auto truth = parse_ground_truth(*gt);
    if (!truth) {
      result.diagnostics.push_back({line, fmt::format("unknown ground_truth '{}' (expected human or ai)", *gt)});
      continue;
    }
    if (!row.contains("score") || !row["score"].is_number()) {
      result.diagnostics.push_back({line, "score must be a number"});
      continue;
    }
    const double score = row["score"].get<double>();
    if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
      result.diagnostics.push_back({line, fmt::format("score {} is outside [0, 1]", score)});
      continue;
    }
    accept_record({*doc_id, *subgroup, *task, *truth, score}, line, result, ids);
  }
  return result;
}

Format format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".json") return Format::kJson;
  return Format::kCsv;
}

IngestResult ingest(const std::filesystem::path& path, Format format) {
  const std::string text = read_file(path);
  return format == Format::kJson ? ingest_json(text) : ingest_csv(text);
}

std::string to_csv(const std::vector<AuditRecord>& records) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : records) {
    fmt::format_to(std::back_inserter(out), "{},{},{},{},{}\n", csv_field(r.doc_id), csv_field(r.subgroup),
                   csv_field(r.task), to_string(r.ground_truth), r.score);
  }
  return out;
}

nlohmann::json to_json(const std::vector<AuditRecord>& records) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : records) {
    rows.push_back({{"doc_id", r.doc_id},
                    {"subgroup", r.subgroup},
                    {"task", r.task},
                    {"ground_truth", to_string(r.ground_truth)},
                    {"score", r.score}});
  }
  return {{"schema_version", kSchemaVersion}, {"records", std::move(rows)}};
}

void AuditRunConfig::validate() const {
  if (!std::isfinite(threshold)) throw std::invalid_argument("threshold must be finite");
  if (!(fpr_tolerance > 0.0 && fpr_tolerance < 1.0)) throw std::invalid_argument("fpr tolerance must lie in (0, 1)");
  if (!(confidence_level > 0.0 && confidence_level < 1.0)) {
    throw std::invalid_argument("confidence level must lie in (0, 1)");
  }
  if (min_stratum_size == 0) throw std::invalid_argument("minimum stratum size must be positive");
}

Strata stratify(const std::vector<AuditRecord>& records) {
  Strata strata;
  for (const auto& r : records) strata[{r.subgroup, r.task}].push_back(r);
  return strata;
}

Interval wilson_interval(std::size_t successes, std::size_t n, double confidence) {
  if (n == 0) throw std::invalid_argument("wilson interval needs n > 0");
  if (successes > n) throw std::invalid_argument("successes exceed trials");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("confidence must lie in (0, 1)");
  const boost::math::normal_distribution<double> normal;
  const double z = boost::math::quantile(normal, 0.5 + 0.5 * confidence);
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  // The exact interval always contains p; clamping keeps that true in floating point.
  return {std::clamp(std::min(center - half, p), 0.0, 1.0), std::clamp(std::max(center + half, p), 0.0, 1.0)};
}

StratumReport stratum_metrics(const std::vector<AuditRecord>& records, const AuditRunConfig& config) {
  if (records.empty()) throw std::invalid_argument("empty stratum");
  StratumReport rep;
  rep.subgroup = records.front().subgroup;
  rep.task = records.front().task;
  rep.threshold = config.threshold;
  for (const auto& r : records) {
    if (r.subgroup != rep.subgroup || r.task != rep.task) {
      throw std::invalid_argument("stratum_metrics: records belong to more than one stratum");
    }
    const bool flagged = r.score >= config.threshold;
    if (r.ground_truth == GroundTruth::kHuman) {
      ++rep.n_human;
      rep.flagged_human += flagged ? 1 : 0;
    } else {
      ++rep.n_ai;
      rep.flagged_ai += flagged ? 1 : 0;
    }
  }
  if (rep.n_human > 0) {
    rep.fpr_hat = static_cast<double>(rep.flagged_human) / static_cast<double>(rep.n_human);
    rep.fpr_ci = wilson_interval(rep.flagged_human, rep.n_human, config.confidence_level);
  }
  if (rep.n_ai > 0) {
    rep.power_hat = static_cast<double>(rep.flagged_ai) / static_cast<double>(rep.n_ai);
    rep.power_ci = wilson_interval(rep.flagged_ai, rep.n_ai, config.confidence_level);
  }
  rep.gate = gate(rep, config);
  return rep;
}

Gate gate(const StratumReport& report, const AuditRunConfig& config) {
  if (report.n_human < config.min_stratum_size || !report.fpr_ci) return Gate::kInsufficientData;
  return report.fpr_ci->upper <= config.fpr_tolerance ? Gate::kDeploy : Gate::kRestrict;
}

std::vector<TvValue> parse_tv_values(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("invalid TV-values JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("schema_version", 0) != kSchemaVersion) {
    throw InputError("TV-values file needs schema_version 1");
  }
  if (!doc.contains("entries") || !doc["entries"].is_array()) throw InputError("TV-values file needs an entries array");
  std::vector<TvValue> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& e : doc["entries"]) {
    try {
      TvValue v{e.at("subgroup").get<std::string>(), e.at("task").get<std::string>(), e.at("tv").get<double>(),
                std::nullopt};
      if (e.contains("weight")) v.weight = e["weight"].get<double>();
      if (!(v.tv >= 0.0 && v.tv <= 1.0)) throw InputError("tv must lie in [0, 1]");
      if (v.weight && !(*v.weight >= 0.0 && *v.weight <= 1.0)) throw InputError("weight must lie in [0, 1]");
      if (!seen.insert({v.subgroup, v.task}).second) {
        throw InputError(fmt::format("duplicate TV entry for ({}, {})", v.subgroup, v.task));
      }
      out.push_back(std::move(v));
    } catch (const nlohmann::json::exception& ex) {
      throw InputError(std::string("bad TV entry: ") + ex.what());
    }
  }
  return out;
}

std::size_t AuditReport::count(Gate g) const {
  return static_cast<std::size_t>(std::count_if(strata.begin(), strata.end(), [g](const auto& s) { return s.gate == g; }));
}

AuditReport audit_report(const Strata& strata, const AuditRunConfig& config, const std::vector<TvValue>* tv_values) {
  config.validate();
  AuditReport report;
  report.config = config;

  struct TaskPower {
    std::size_t n_ai = 0;
    std::size_t flagged = 0;
  };
  std::map<std::string, TaskPower> task_power;

  for (const auto& [key, records] : strata) {
    report.strata.push_back(stratum_metrics(records, config));
    report.total_records += records.size();
    auto& tp = task_power[key.task];
    tp.n_ai += report.strata.back().n_ai;
    tp.flagged += report.strata.back().flagged_ai;
  }
  if (!tv_values) return report;

  auto find_tv = [&](const std::string& subgroup, const std::string& task) -> const TvValue* {
    for (const auto& v : *tv_values) {
      if (v.subgroup == subgroup && v.task == task) return &v;
    }
    return nullptr;
  };
  auto pooled_power = [&](const std::string& task) -> std::optional<double> {
    const auto& tp = task_power[task];
    if (tp.n_ai == 0) return std::nullopt;
    return static_cast<double>(tp.flagged) / static_cast<double>(tp.n_ai);
  };

  for (auto& s : report.strata) {
    const TvValue* v = find_tv(s.subgroup, s.task);
    if (!v) continue;
    const std::optional<double> beta = s.power_hat ? s.power_hat : pooled_power(s.task);
    if (!beta) continue;
    s.bound_check = BoundCheck{v->tv, *beta, subgroup_fpr_lower_bound(*beta, v->tv)};
  }

  std::map<std::string, std::vector<const StratumReport*>> by_task;
  for (const auto& s : report.strata) {
    if (s.n_human > 0 && find_tv(s.subgroup, s.task)) by_task[s.task].push_back(&s);
  }
  for (const auto& [task, members] : by_task) {
    const auto beta = pooled_power(task);
    if (!beta) continue;
    bool all_weighted = true;
    std::size_t humans = 0;
    for (const auto* s : members) {
      all_weighted = all_weighted && find_tv(s->subgroup, task)->weight.has_value();
      humans += s->n_human;
    }
    std::vector<SubgroupTerm> terms;
    for (const auto* s : members) {
      const TvValue* v = find_tv(s->subgroup, task);
      const double w = all_weighted ? *v->weight : static_cast<double>(s->n_human) / static_cast<double>(humans);
      terms.push_back({s->subgroup, w, v->tv});
    }
    const auto b = institution_fpr_lower_bound(std::move(terms), *beta);
    report.institution.push_back(
        {task, *beta, b.literal, b.clipped, all_weighted ? "supplied" : "human-document share"});
  }
  return report;
}

std::string to_string(Gate g) {
  switch (g) {
    case Gate::kDeploy:
      return "deploy";
    case Gate::kRestrict:
      return "restrict";
    case Gate::kInsufficientData:
      return "insufficient-data";
  }
  return "unknown";
}

std::string to_string(GroundTruth g) { return g == GroundTruth::kHuman ? "human" : "ai"; }

namespace {
nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }
nlohmann::json opt_json(const std::optional<Interval>& v) {
  return v ? nlohmann::json::array({v->lower, v->upper}) : nlohmann::json(nullptr);
}
}  // namespace

nlohmann::json report_json(const AuditReport& report, const nlohmann::json& provenance) {
  nlohmann::json strata = nlohmann::json::array();
  for (const auto& s : report.strata) {
    nlohmann::json j = {{"subgroup", s.subgroup},
                        {"task", s.task},
                        {"n_human", s.n_human},
                        {"n_ai", s.n_ai},
                        {"flagged_human", s.flagged_human},
                        {"flagged_ai", s.flagged_ai},
                        {"fpr_hat", opt_json(s.fpr_hat)},
                        {"fpr_ci", opt_json(s.fpr_ci)},
                        {"power_hat", opt_json(s.power_hat)},
                        {"power_ci", opt_json(s.power_ci)},
                        {"threshold", s.threshold},
                        {"gate", to_string(s.gate)}};
    if (s.bound_check) {
      j["bound_check"] = {{"tv", s.bound_check->tv},
                          {"beta", s.bound_check->beta},
                          {"floor", s.bound_check->floor},
                          {"note", kBoundCheckNote}};
    } else {
      j["bound_check"] = nullptr;
    }
    strata.push_back(std::move(j));
  }
  nlohmann::json institution = nlohmann::json::array();
  for (const auto& b : report.institution) {
    institution.push_back({{"task", b.task},
                           {"beta", b.beta},
                           {"literal", b.literal},
                           {"clipped", b.clipped},
                           {"weights", b.weight_source},
                           {"note", kBoundCheckNote}});
  }
  nlohmann::json diagnostics = nlohmann::json::array();
  for (const auto& d : report.diagnostics) diagnostics.push_back({{"line", d.line}, {"message", d.message}});

  return {{"schema_version", kSchemaVersion},
          {"provenance", provenance},
          {"config",
           {{"threshold", report.config.threshold},
            {"flag_rule", "score >= threshold"},
            {"fpr_tolerance", report.config.fpr_tolerance},
            {"min_stratum_size", report.config.min_stratum_size},
            {"confidence_level", report.config.confidence_level},
            {"interval", "wilson"}}},
          {"total_records", report.total_records},
          {"diagnostics", std::move(diagnostics)},
          {"strata", std::move(strata)},
          {"institution_bounds", std::move(institution)},
          {"summary",
           {{"deploy", report.count(Gate::kDeploy)},
            {"restrict", report.count(Gate::kRestrict)},
            {"insufficient_data", report.count(Gate::kInsufficientData)}}}};
}

std::string report_text(const AuditReport& report) {
  auto pct = [](const std::optional<double>& v) { return v ? fmt::format("{:.4f}", *v) : std::string("-"); };
  auto ci = [](const std::optional<Interval>& v) {
    return v ? fmt::format("[{:.4f},{:.4f}]", v->lower, v->upper) : std::string("-");
  };
  std::string out = fmt::format("{:<16} {:<16} {:>7} {:>7} {:>8} {:>17} {:>8} {:>17} {:>8} {:<17}\n", "subgroup",
                                "task", "n_human", "n_ai", "fpr", "fpr_ci", "power", "power_ci", "floor", "gate");
  for (const auto& s : report.strata) {
    out += fmt::format("{:<16} {:<16} {:>7} {:>7} {:>8} {:>17} {:>8} {:>17} {:>8} {:<17}\n", s.subgroup, s.task,
                       s.n_human, s.n_ai, pct(s.fpr_hat), ci(s.fpr_ci), pct(s.power_hat), ci(s.power_ci),
                       s.bound_check ? fmt::format("{:.4f}", s.bound_check->floor) : std::string("-"),
                       to_string(s.gate));
  }
  out += fmt::format("\nthreshold {} (flag if score >= threshold), tolerance {}, confidence {}, min stratum {}\n",
                     report.config.threshold, report.config.fpr_tolerance, report.config.confidence_level,
                     report.config.min_stratum_size);
  out += fmt::format("deploy {}, restrict {}, insufficient-data {}\n", report.count(Gate::kDeploy),
                     report.count(Gate::kRestrict), report.count(Gate::kInsufficientData));
  for (const auto& b : report.institution) {
    out += fmt::format("institution floor [{}]: beta {:.4f}, literal {:.4f}, clipped {:.4f} ({} weights)\n", b.task,
                       b.beta, b.literal, b.clipped, b.weight_source);
  }
  bool any_floor = !report.institution.empty();
  for (const auto& s : report.strata) any_floor = any_floor || s.bound_check.has_value();
  if (any_floor) out += fmt::format("note: {}\n", kBoundCheckNote);
  for (const auto& d : report.diagnostics) out += fmt::format("input line {}: {}\n", d.line, d.message);
  return out;
}

}  // namespace detlimits::audit
