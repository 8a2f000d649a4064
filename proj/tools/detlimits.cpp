#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "detlimits/commands.hpp"
#include "detlimits/provenance.hpp"

namespace {

using namespace detlimits::cli;

// Writes the primary output to `out` (stdout when empty) and the text summary
// to stdout or stderr, then returns the exit status.
int emit(const CommandResult& r, const std::string& out) {
  if (r.exit_code == kExitInputError && r.output.empty()) {
    std::cerr << r.text;
    return r.exit_code;
  }
  if (out.empty() || out == "-") {
    std::cout << r.output;
    std::cerr << r.text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) {
      std::cerr << "error: cannot write " << out << "\n";
      return kExitInputError;
    }
    f << r.output;
    std::cout << r.text;
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural limits of one-shot AI-text detection: bounds, verification, TV estimation and audits"};
  app.set_version_flag("--version", std::string(detlimits::tool_version()));
  app.require_subcommand(1);

  const std::uint64_t env_seed = default_seed();
  std::string out;

  BoundMapOptions bm;
  auto* c_bm = app.add_subcommand("bound-map", "Average-case FPR floor over a (overlap fraction, delta) grid as CSV");
  c_bm->add_option("--beta0", bm.beta0, "Detector power")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  c_bm->add_option("--pi-min", bm.pi_min, "Smallest overlap fraction")->capture_default_str();
  c_bm->add_option("--pi-max", bm.pi_max, "Largest overlap fraction")->capture_default_str();
  c_bm->add_option("--pi-steps", bm.pi_steps, "Intervals along the overlap axis")->capture_default_str();
  c_bm->add_option("--delta-min", bm.delta_min, "Smallest TV threshold")->capture_default_str();
  c_bm->add_option("--delta-max", bm.delta_max, "Largest TV threshold")->capture_default_str();
  c_bm->add_option("--delta-steps", bm.delta_steps, "Intervals along the delta axis")->capture_default_str();
  c_bm->add_option("-o,--out", out, "Output CSV path (default stdout)");

  VerifyOptions vf;
  vf.seed = env_seed;
  std::string vf_scenario;
  std::string vf_task;
  auto* c_vf = app.add_subcommand("verify", "Check the trade-off inequalities on random or scenario instances");
  c_vf->add_option("--scenario", vf_scenario, "Scenario JSON (random instances when omitted)")->check(CLI::ExistingFile);
  c_vf->add_option("--task", vf_task, "Task to verify when the scenario has several");
  c_vf->add_option("--trials", vf.trials, "Random trials per inequality")->capture_default_str();
  c_vf->add_option("--seed", vf.seed, "Seed (default from DETLIMITS_SEED, else 1)")->capture_default_str();
  c_vf->add_option("-o,--out", out, "Output JSON path (default stdout)");

  SimulateOptions sm;
  sm.seed = env_seed;
  std::string sm_task;
  std::string sm_detector;
  auto* c_sm = app.add_subcommand("simulate", "Monte Carlo false accusations for an institution");
  c_sm->add_option("--scenario", sm.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  c_sm->add_option("--task", sm_task, "Task to simulate when the scenario has several");
  c_sm->add_option("--detector", sm_detector, "Detector name (default: first in scenario)");
  c_sm->add_option("--delta", sm.delta, "TV threshold for the overlap set")->capture_default_str();
  c_sm->add_option("--students", sm.n_students, "Number of students")->capture_default_str();
  c_sm->add_option("--docs", sm.n_docs, "Documents per student")->capture_default_str();
  c_sm->add_option("--seed", sm.seed, "Seed (default from DETLIMITS_SEED, else 1)")->capture_default_str();
  c_sm->add_option("-o,--out", out, "Output JSON path (default stdout)");

  EstimateTvOptions et;
  et.seed = env_seed;
  double et_beta = -1.0;
  auto* c_et = app.add_subcommand("estimate-tv", "Classifier-accuracy lower bound on TV between two samples");
  c_et->add_option("--samples-p", et.samples_p, "First sample: one outcome id per line or a JSON array")
      ->required()
      ->check(CLI::ExistingFile);
  c_et->add_option("--samples-q", et.samples_q, "Second sample, same format")->required()->check(CLI::ExistingFile);
  c_et->add_option("--split", et.split, "Training fraction in (0, 1)")->capture_default_str();
  c_et->add_option("--seed", et.seed, "Seed (default from DETLIMITS_SEED, else 1)")->capture_default_str();
  auto* et_beta_opt =
      c_et->add_option("--beta", et_beta, "Detector power; adds the direction-of-inference advisory")
          ->check(CLI::Range(0.0, 1.0));
  c_et->add_option("-o,--out", out, "Output JSON path (default stdout)");

  AuditOptions au;
  std::string au_format;
  std::string au_tv;
  auto* c_au = app.add_subcommand("audit", "Stratified FPR/power audit of detector scores with per-stratum gates");
  c_au->add_option("--input", au.input, "Records (CSV or JSON)")->required()->check(CLI::ExistingFile);
  c_au->add_option("--format", au_format, "csv or json (default: from extension)")
      ->check(CLI::IsMember({"csv", "json"}));
  c_au->add_option("--threshold", au.threshold, "Flag documents with score >= threshold")->capture_default_str();
  c_au->add_option("--tolerance", au.tolerance, "Largest acceptable FPR upper confidence bound")
      ->capture_default_str();
  c_au->add_option("--confidence", au.confidence, "Wilson interval confidence level")->capture_default_str();
  c_au->add_option("--min-stratum-size", au.min_stratum_size, "Human documents needed to gate a stratum")
      ->capture_default_str();
  c_au->add_option("--tv-values", au_tv, "JSON file of per-stratum TV values for the FPR floor")
      ->check(CLI::ExistingFile);
  c_au->add_option("-o,--out", out, "Output JSON report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInputError;
  }

  if (c_bm->parsed()) return emit(run_bound_map(bm), out);
  if (c_vf->parsed()) {
    if (!vf_scenario.empty()) vf.scenario = vf_scenario;
    if (!vf_task.empty()) vf.task = vf_task;
    return emit(run_verify(vf), out);
  }
  if (c_sm->parsed()) {
    if (!sm_task.empty()) sm.task = sm_task;
    if (!sm_detector.empty()) sm.detector = sm_detector;
    return emit(run_simulate(sm), out);
  }
  if (c_et->parsed()) {
    if (et_beta_opt->count() > 0) et.beta = et_beta;
    return emit(run_estimate_tv(et), out);
  }
  if (c_au->parsed()) {
    if (!au_format.empty()) au.format = au_format;
    if (!au_tv.empty()) au.tv_values = au_tv;
    return emit(run_audit(au), out);
  }
  return kExitInputError;
}
