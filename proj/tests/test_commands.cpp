#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "detlimits/commands.hpp"

using namespace detlimits::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kData = DETLIMITS_TEST_DATA;
const fs::path kGolden = DETLIMITS_GOLDEN;
const fs::path kScenarios = DETLIMITS_SCENARIOS;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Compares against tests/golden/<name>. With DETLIMITS_UPDATE_GOLDEN=1 the
// file is rewritten instead.
void check_golden(const std::string& name, const std::string& actual) {
  const fs::path path = kGolden / name;
  if (const char* u = std::getenv("DETLIMITS_UPDATE_GOLDEN"); u && std::string(u) == "1") {
    std::ofstream(path, std::ios::binary) << actual;
    return;
  }
  REQUIRE_MESSAGE(fs::exists(path), "missing golden file " << path.string());
  CHECK_MESSAGE(slurp(path) == actual, "output differs from " << name);
}

}  // namespace

TEST_CASE("bound-map") {
  const auto r = run_bound_map({});
  CHECK(r.exit_code == kExitOk);
  CHECK(r.output.rfind("# {", 0) == 0);
  CHECK(r.output.find("\n0.1,0.05,0.075\n") != std::string::npos);
  CHECK(r.text.find("bound 0.075") != std::string::npos);
  check_golden("bound_map.csv", r.output);
  CHECK(run_bound_map({}).output == r.output);

  BoundMapOptions bad;
  bad.beta0 = 1.5;
  CHECK(run_bound_map(bad).exit_code == kExitInputError);
  bad = {};
  bad.pi_max = 2.0;
  CHECK(run_bound_map(bad).exit_code == kExitInputError);
}

TEST_CASE("verify, random instances") {
  VerifyOptions o;
  o.trials = 200;
  o.seed = 7;
  const auto r = run_verify(o);
  CHECK(r.exit_code == kExitOk);
  const auto j = nlohmann::json::parse(r.output);
  CHECK(j["status"] == "pass");
  CHECK(j["reports"].size() == 6);
  CHECK(j["provenance"]["seed"] == 7);
  check_golden("verify_random.json", r.output);
  CHECK(run_verify(o).output == r.output);
  o.seed = 8;
  CHECK(run_verify(o).output != r.output);
}

TEST_CASE("verify, scenario") {
  VerifyOptions o;
  o.scenario = kScenarios / "worked_example.json";
  o.trials = 200;
  o.seed = 7;
  const auto r = run_verify(o);
  CHECK(r.exit_code == kExitOk);
  check_golden("verify_worked.json", r.output);

  o.scenario = kScenarios / "two_tasks.json";
  CHECK(run_verify(o).exit_code == kExitInputError);  // task required
  o.task = "essay";
  CHECK(run_verify(o).exit_code == kExitOk);
  o.scenario = kData / "does_not_exist.json";
  const auto missing = run_verify(o);
  CHECK(missing.exit_code == kExitInputError);
  CHECK(missing.text.rfind("error: ", 0) == 0);
}

TEST_CASE("simulate") {
  SimulateOptions o;
  o.scenario = kScenarios / "worked_example.json";
  o.seed = 11;
  const auto r = run_simulate(o);
  CHECK(r.exit_code == kExitOk);
  const auto j = nlohmann::json::parse(r.output);
  CHECK(j["floor"]["average_fpr_floor"].get<double>() == doctest::Approx(0.075).epsilon(1e-14));
  CHECK(j["floor"]["false_accusations_floor"].get<double>() == doctest::Approx(750.0).epsilon(1e-14));
  CHECK(j["floor"]["overlap_mass"].get<double>() == doctest::Approx(0.10));
  CHECK(j["observed_consistent_with_floor"] == true);
  check_golden("simulate_worked.json", r.output);
  CHECK(run_simulate(o).output == r.output);

  o.detector = "nope";
  CHECK(run_simulate(o).exit_code == kExitInputError);
}

TEST_CASE("estimate-tv") {
  EstimateTvOptions o;
  o.samples_p = kData / "samples_human.txt";
  o.samples_q = kData / "samples_ai.json";
  o.seed = 5;
  o.beta = 0.8;
  const auto r = run_estimate_tv(o);
  CHECK(r.exit_code == kExitOk);
  const auto j = nlohmann::json::parse(r.output);
  CHECK(j["estimate"]["direction_note"] == "lower-bound-only");
  CHECK(j["estimate"]["n_train"] == 1250);
  CHECK(j["advisory"]["label"] == "NOT-VALID-AS-FPR-BOUND");
  CHECK(j["advisory"]["floor_valid"] == false);
  check_golden("estimate_tv.json", r.output);

  o.split = 1.0;
  CHECK(run_estimate_tv(o).exit_code == kExitInputError);
}

TEST_CASE("sample id parsing") {
  CHECK(read_sample_ids("a\n b \n\nc\n") == std::vector<std::string>{"a", "b", "c"});
  CHECK(read_sample_ids("[1, \"x\", 2]") == std::vector<std::string>{"1", "x", "2"});
  CHECK_THROWS(read_sample_ids("[1.5]"));
}

TEST_CASE("audit exit statuses and report") {
  AuditOptions o;
  o.input = kData / "audit_clean.csv";
  CHECK(run_audit(o).exit_code == kExitOk);

  o.input = kData / "audit_malformed.csv";
  const auto bad = run_audit(o);
  CHECK(bad.exit_code == kExitInputError);
  const auto jb = nlohmann::json::parse(bad.output);
  CHECK(jb["diagnostics"].size() == 3);

  o.input = kData / "audit_restrict.csv";
  o.tv_values = kData / "tv_values.json";
  const auto r = run_audit(o);
  CHECK(r.exit_code == kExitFailed);
  const auto j = nlohmann::json::parse(r.output);
  REQUIRE(j["strata"].size() == 3);
  CHECK(j["strata"][0]["subgroup"] == "dialect");
  CHECK(j["strata"][0]["gate"] == "insufficient-data");
  CHECK(j["strata"][1]["gate"] == "deploy");
  CHECK(j["strata"][2]["gate"] == "restrict");
  CHECK(j["institution_bounds"].size() == 1);
  check_golden("audit_restrict.json", r.output);
  check_golden("audit_restrict.txt", r.text);
  CHECK(run_audit(o).output == r.output);

  o.format = "xml";
  CHECK(run_audit(o).exit_code == kExitInputError);
  o.format.reset();
  o.tolerance = 0.0;
  CHECK(run_audit(o).exit_code == kExitInputError);
}

TEST_CASE("seed from environment") {
  setenv("DETLIMITS_SEED", "123", 1);
  CHECK(default_seed() == 123);
  setenv("DETLIMITS_SEED", "12x", 1);
  CHECK(default_seed(4) == 4);
  unsetenv("DETLIMITS_SEED");
  CHECK(default_seed(9) == 9);
}
