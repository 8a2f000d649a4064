#include "detlimits/commands.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "detlimits/audit.hpp"
#include "detlimits/bounds.hpp"
#include "detlimits/errors.hpp"
#include "detlimits/provenance.hpp"
#include "detlimits/scenario.hpp"
#include "detlimits/tvest.hpp"
#include "detlimits/verify.hpp"

namespace detlimits::cli {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Runs `body`, mapping bad input to exit status 1.
template <typename F>
CommandResult guarded(F&& body) {
  try {
    return body();
  } catch (const InputError& e) {
    return {kExitInputError, "", std::string("error: ") + e.what() + "\n"};
  } catch (const std::invalid_argument& e) {
    return {kExitInputError, "", std::string("error: ") + e.what() + "\n"};
  } catch (const std::out_of_range& e) {
    return {kExitInputError, "", std::string("error: ") + e.what() + "\n"};
  }
}

json report_to_json(const VerificationReport& r) {
  return {{"theorem", r.theorem},
          {"seed", r.seed},
          {"trials", r.trials},
          {"not_applicable", r.not_applicable},
          {"violations", r.violations},
          {"max_slack", r.max_slack},
          {"min_slack", r.min_slack},
          {"max_violation", r.max_violation},
          {"passed", r.passed()}};
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::uint64_t default_seed(std::uint64_t fallback) {
  const char* env = std::getenv("DETLIMITS_SEED");
  if (!env || !*env) return fallback;
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(env, &pos);
    if (pos != std::string(env).size()) return fallback;
    return v;
  } catch (const std::exception&) {
    return fallback;
  }
}

std::vector<std::string> read_sample_ids(const std::string& text) {
  std::vector<std::string> ids;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '[') {
    json arr;
    try {
      arr = json::parse(body);
    } catch (const json::parse_error& e) {
      throw InputError(std::string("invalid sample JSON: ") + e.what());
    }
    for (const auto& v : arr) {
      if (v.is_string()) {
        ids.push_back(v.get<std::string>());
      } else if (v.is_number_integer()) {
        ids.push_back(std::to_string(v.get<long long>()));
      } else {
        throw InputError("sample ids must be strings or integers");
      }
    }
    return ids;
  }
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto id = trim(line);
    if (!id.empty()) ids.push_back(std::move(id));
  }
  return ids;
}

CommandResult run_bound_map(const BoundMapOptions& o) {
  return guarded([&] {
    const auto pi = linear_axis(o.pi_min, o.pi_max, o.pi_steps);
    const auto delta = linear_axis(o.delta_min, o.delta_max, o.delta_steps);
    for (double v : pi) detail::require_unit_interval(v, "pi axis value");
    for (double v : delta) detail::require_unit_interval(v, "delta axis value");
    const auto grid = bound_map(o.beta0, delta, pi);

    const std::string args = fmt::format("bound-map beta0={} pi={}:{}:{} delta={}:{}:{}", o.beta0, o.pi_min, o.pi_max,
                                         o.pi_steps, o.delta_min, o.delta_max, o.delta_steps);
    CommandResult r;
    r.output = "# " + provenance(args, std::nullopt).dump() + "\n" + bound_map_csv(grid);
    r.text = fmt::format("{} x {} cells at beta0 = {}\n", pi.size(), delta.size(), o.beta0);
    for (std::size_t i = 0; i < pi.size(); ++i) {
      for (std::size_t j = 0; j < delta.size(); ++j) {
        if (pi[i] == 0.1 && delta[j] == 0.05) {
          r.text += fmt::format("marked point pi = 0.1, delta = 0.05: bound {:.12g}\n", grid.values[i][j]);
        }
      }
    }
    return r;
  });
}

CommandResult run_verify(const VerifyOptions& o) {
  return guarded([&] {
    if (o.trials == 0) throw std::invalid_argument("trials must be positive");
    std::vector<VerificationReport> reports;
    std::string digest_input;
    std::string mode;
    if (o.scenario) {
      digest_input = read_file(*o.scenario);
      const Scenario s = parse_scenario_text(digest_input);
      const auto [pop, ai] = s.for_task(o.task);
      std::vector<Detector> detectors;
      for (const auto& d : s.detectors) detectors.push_back(d.detector);
      reports = run_population_suites(pop, ai, detectors, o.trials, o.seed);
      mode = "scenario";
    } else {
      const InstanceLimits limits;
      digest_input = fmt::format("random-instances space<={} students<={} subgroups<={}", limits.max_space,
                                 limits.max_students, limits.max_subgroups);
      reports = run_random_suites(o.trials, o.seed, limits);
      mode = "random";
    }
    json rows = json::array();
    for (const auto& r : reports) rows.push_back(report_to_json(r));
    const bool ok = all_passed(reports);
    json out = {{"schema_version", 1},
                {"provenance", provenance(digest_input, o.seed)},
                {"mode", mode},
                {"trials", o.trials},
                {"tolerance", kViolationTolerance},
                {"reports", rows},
                {"status", ok ? "pass" : "fail"}};

    CommandResult r;
    r.exit_code = ok ? kExitOk : kExitFailed;
    r.output = dump(out);
    for (const auto& rep : reports) {
      r.text += fmt::format("{:<28} checks {:>6}  n/a {:>5}  violations {:>3}  {}\n", rep.theorem, rep.trials,
                            rep.not_applicable, rep.violations, rep.passed() ? "PASS" : "FAIL");
    }
    return r;
  });
}

CommandResult run_simulate(const SimulateOptions& o) {
  return guarded([&] {
    const std::string bytes = read_file(o.scenario);
    const Scenario s = parse_scenario_text(bytes);
    const auto [pop, ai] = s.for_task(o.task);
    const Detector& phi = s.detector(o.detector);
    require_same_space(pop.space(), phi.space(), "simulate");

    const SimulationResult sim = simulate_institution(pop, phi, o.n_students, o.n_docs, o.seed);
    const double beta = power(phi, ai);
    const double pi_star = overlap_mass(pop, ai, o.delta);
    const double floor = avg_case_fpr_lower_bound(pi_star, beta, o.delta);
    const auto documents = static_cast<long long>(sim.documents);
    const bool consistent = sim.observed_fpr >= floor - 4.0 * sim.standard_error;

    json out = {{"schema_version", 1},
                {"provenance", provenance(bytes, o.seed)},
                {"students", sim.n_students},
                {"docs_per_student", sim.n_docs_per_student},
                {"documents", sim.documents},
                {"observed",
                 {{"accusations", sim.accusations},
                  {"average_fpr", sim.observed_fpr},
                  {"standard_error", sim.standard_error}}},
                {"exact",
                 {{"average_fpr", sim.exact_fpr}, {"expected_accusations", sim.expected_accusations}}},
                {"floor",
                 {{"delta", o.delta},
                  {"overlap_mass", pi_star},
                  {"power", beta},
                  {"average_fpr_floor", floor},
                  {"false_accusations_floor", expected_false_accusations(floor, documents)}}},
                {"delta_star", delta_star(pop, ai)},
                {"observed_consistent_with_floor", consistent}};

    CommandResult r;
    r.output = dump(out);
    r.text = fmt::format(
        "observed FPR {:.6f} ({} of {} documents), exact {:.6f}, floor {:.6g} "
        "(overlap {:.6g} x (power {:.6g} - delta {:.6g}))\n",
        sim.observed_fpr, sim.accusations, sim.documents, sim.exact_fpr, floor, pi_star, beta, o.delta);
    return r;
  });
}

CommandResult run_estimate_tv(const EstimateTvOptions& o) {
  return guarded([&] {
    const std::string text_p = read_file(o.samples_p);
    const std::string text_q = read_file(o.samples_q);
    const auto ids_p = read_sample_ids(text_p);
    const auto ids_q = read_sample_ids(text_q);
    if (ids_p.empty() || ids_q.empty()) throw InputError("both sample files must contain at least one outcome id");

    std::set<std::string> vocab(ids_p.begin(), ids_p.end());
    vocab.insert(ids_q.begin(), ids_q.end());
    std::map<std::string, std::size_t> index;
    for (const auto& id : vocab) index.emplace(id, index.size());
    std::vector<std::size_t> p;
    std::vector<std::size_t> q;
    for (const auto& id : ids_p) p.push_back(index.at(id));
    for (const auto& id : ids_q) q.push_back(index.at(id));

    const TvEstimate est = plugin_classifier_accuracy(p, q, o.split, o.seed);
    json estimate = {{"accuracy_hat", est.accuracy_hat},
                     {"tv_lower_bound", est.tv_lower_bound},
                     {"clipped", est.clipped},
                     {"n_p_input", est.n_p_input},
                     {"n_q_input", est.n_q_input},
                     {"n_train", est.n_train},
                     {"n_test", est.n_test},
                     {"split", o.split},
                     {"outcomes", vocab.size()},
                     {"direction_note", to_string(est.direction_note)}};
    json out = {{"schema_version", 1},
                {"provenance", provenance(text_p + '\0' + text_q, o.seed)},
                {"estimate", estimate}};
    CommandResult r;
    r.text = fmt::format("accuracy {:.6f}, TV >= {:.6f} (lower bound only; n_test {} per class)\n", est.accuracy_hat,
                         est.tv_lower_bound, est.n_test);
    if (o.beta) {
      const TvAdvisory a = direction_guard(est, *o.beta);
      out["advisory"] = {{"conclusion", to_string(a.conclusion)},
                         {"beta", a.beta},
                         {"noise_halfwidth", a.noise_halfwidth},
                         {"fpr_floor_with_lower_tv", a.fpr_floor_with_lower_tv},
                         {"floor_valid", a.floor_valid},
                         {"label", "NOT-VALID-AS-FPR-BOUND"},
                         {"message", a.message}};
      r.text += a.message + "\n";
    }
    r.output = dump(out);
    return r;
  });
}

CommandResult run_audit(const AuditOptions& o) {
  return guarded([&] {
    audit::AuditRunConfig config{o.threshold, o.tolerance, o.min_stratum_size, o.confidence};
    config.validate();

    audit::Format format = audit::format_from_path(o.input);
    if (o.format) {
      if (*o.format == "csv") {
        format = audit::Format::kCsv;
      } else if (*o.format == "json") {
        format = audit::Format::kJson;
      } else {
        throw InputError("format must be csv or json");
      }
    }
    std::string digest_input = read_file(o.input);
    const auto ingested =
        format == audit::Format::kJson ? audit::ingest_json(digest_input) : audit::ingest_csv(digest_input);

    std::optional<std::vector<audit::TvValue>> tv;
    if (o.tv_values) {
      const std::string tv_text = read_file(*o.tv_values);
      tv = audit::parse_tv_values(tv_text);
      digest_input += '\0';
      digest_input += tv_text;
    }

    auto report = audit::audit_report(audit::stratify(ingested.records), config, tv ? &*tv : nullptr);
    report.diagnostics = ingested.diagnostics;

    CommandResult r;
    r.output = dump(audit::report_json(report, provenance(digest_input, std::nullopt)));
    r.text = audit::report_text(report);
    if (ingested.dirty()) {
      r.exit_code = kExitInputError;
    } else if (report.has_restrict()) {
      r.exit_code = kExitFailed;
    }
    return r;
  });
}

}  // namespace detlimits::cli
