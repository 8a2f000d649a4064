#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace detlimits::audit {

inline constexpr int kSchemaVersion = 1;

enum class GroundTruth { kHuman, kAi };

struct AuditRecord {
  std::string doc_id;
  std::string subgroup;
  std::string task;
  GroundTruth ground_truth = GroundTruth::kHuman;
  double score = 0.0;

  friend bool operator==(const AuditRecord&, const AuditRecord&) = default;
};

/// A row-level problem found while ingesting. `line` is 1-based (the CSV
/// header is line 1); for JSON input it is the 1-based record index.
struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

struct IngestResult {
  std::vector<AuditRecord> records;
  std::vector<Diagnostic> diagnostics;
  bool dirty() const { return !diagnostics.empty(); }
};

enum class Format { kCsv, kJson };

/// Parses records from text. Bad rows are dropped with a diagnostic; a missing
/// or wrong header, unparseable document, or zero data rows throws InputError.
IngestResult ingest_csv(const std::string& text);
IngestResult ingest_json(const std::string& text);
IngestResult ingest(const std::filesystem::path& path, Format format);
Format format_from_path(const std::filesystem::path& path);

std::string to_csv(const std::vector<AuditRecord>& records);
nlohmann::json to_json(const std::vector<AuditRecord>& records);

struct AuditRunConfig {
  double threshold = 0.5;
  double fpr_tolerance = 0.05;
  std::size_t min_stratum_size = 30;
  double confidence_level = 0.95;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct StratumKey {
  std::string subgroup;
  std::string task;
  friend auto operator<=>(const StratumKey&, const StratumKey&) = default;
};

using Strata = std::map<StratumKey, std::vector<AuditRecord>>;

/// Groups records by (subgroup, task). Only strata with records appear.
Strata stratify(const std::vector<AuditRecord>& records);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double v) const { return v >= lower && v <= upper; }
};

/// Wilson score interval for k successes out of n at two-sided `confidence`.
Interval wilson_interval(std::size_t successes, std::size_t n, double confidence);

enum class Gate { kDeploy, kRestrict, kInsufficientData };

struct BoundCheck {
  double tv = 0.0;
  double beta = 0.0;
  double floor = 0.0;  // max(0, beta - tv)
};

struct StratumReport {
  std::string subgroup;
  std::string task;
  std::size_t n_human = 0;
  std::size_t n_ai = 0;
  std::size_t flagged_human = 0;
  std::size_t flagged_ai = 0;
  std::optional<double> fpr_hat;  // absent without human documents
  std::optional<Interval> fpr_ci;
  std::optional<double> power_hat;  // absent without AI documents
  std::optional<Interval> power_ci;
  double threshold = 0.0;
  Gate gate = Gate::kInsufficientData;
  std::optional<BoundCheck> bound_check;
};

/// Counts documents with score >= threshold. Throws on an empty stratum.
StratumReport stratum_metrics(const std::vector<AuditRecord>& records, const AuditRunConfig& config);

/// Insufficient data when n_human < min_stratum_size, otherwise deploy iff the
/// upper FPR interval bound is within tolerance.
Gate gate(const StratumReport& report, const AuditRunConfig& config);

/// Externally supplied mixture TV per stratum, with optional subgroup weight
/// used for the institution-wide sum.
struct TvValue {
  std::string subgroup;
  std::string task;
  double tv = 0.0;
  std::optional<double> weight;
};

std::vector<TvValue> parse_tv_values(const std::string& text);

struct InstitutionSummary {
  std::string task;
  double beta = 0.0;  // pooled power over AI documents of the task
  double literal = 0.0;
  double clipped = 0.0;
  std::string weight_source;  // "supplied" or "human-document share"
};

struct AuditReport {
  AuditRunConfig config;
  std::vector<StratumReport> strata;  // stratum-key order
  std::vector<InstitutionSummary> institution;
  std::vector<Diagnostic> diagnostics;
  std::size_t total_records = 0;

  std::size_t count(Gate g) const;
  bool has_restrict() const { return count(Gate::kRestrict) > 0; }
};

/// Runs metrics and gates for every stratum. With TV values, attaches the
/// per-stratum floor and the per-task institution sums.
AuditReport audit_report(const Strata& strata, const AuditRunConfig& config,
                         const std::vector<TvValue>* tv_values = nullptr);

std::string to_string(Gate g);
std::string to_string(GroundTruth g);

/// Versioned machine-readable report. `provenance` is embedded as given.
nlohmann::json report_json(const AuditReport& report, const nlohmann::json& provenance);
/// Fixed-width table for terminals.
std::string report_text(const AuditReport& report);

/// Caveat attached wherever a TV-based floor is printed.
extern const char* const kBoundCheckNote;

}  // namespace detlimits::audit
