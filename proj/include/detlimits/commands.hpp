#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace detlimits::cli {

// Exit statuses shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitFailed = 2;  // violations found / stratum restricted

/// What a command produced. `output` goes to the --out file (or stdout);
/// `text` is an optional human-readable companion printed to stdout.
struct CommandResult {
  int exit_code = kExitOk;
  std::string output;
  std::string text;
};

struct BoundMapOptions {
  double beta0 = 0.80;
  double pi_min = 0.0;
  double pi_max = 0.5;
  std::size_t pi_steps = 100;
  double delta_min = 0.0;
  double delta_max = 0.4;
  std::size_t delta_steps = 80;
};

struct VerifyOptions {
  std::optional<std::filesystem::path> scenario;
  std::optional<std::string> task;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
};

struct SimulateOptions {
  std::filesystem::path scenario;
  std::optional<std::string> task;
  std::optional<std::string> detector;
  double delta = 0.05;
  std::size_t n_students = 10000;
  std::size_t n_docs = 1;
  std::uint64_t seed = 1;
};

struct EstimateTvOptions {
  std::filesystem::path samples_p;
  std::filesystem::path samples_q;
  double split = 0.5;
  std::uint64_t seed = 1;
  std::optional<double> beta;
};

struct AuditOptions {
  std::filesystem::path input;
  std::optional<std::string> format;  // "csv" | "json"; inferred from extension otherwise
  double threshold = 0.5;
  double tolerance = 0.05;
  double confidence = 0.95;
  std::size_t min_stratum_size = 30;
  std::optional<std::filesystem::path> tv_values;
};

// Each command validates its inputs and maps failures to kExitInputError with
// the message in `text`; none of them throw for bad user input.
CommandResult run_bound_map(const BoundMapOptions& options);
CommandResult run_verify(const VerifyOptions& options);
CommandResult run_simulate(const SimulateOptions& options);
CommandResult run_estimate_tv(const EstimateTvOptions& options);
CommandResult run_audit(const AuditOptions& options);

/// Seed from DETLIMITS_SEED when set and parseable, else `fallback`.
std::uint64_t default_seed(std::uint64_t fallback = 1);

/// Reads a sample file: one outcome id per line, or a JSON array of ids
/// (strings or integers).
std::vector<std::string> read_sample_ids(const std::string& text);

}  // namespace detlimits::cli
