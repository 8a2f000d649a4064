#include "detlimits/verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "detlimits/bounds.hpp"
#include "detlimits/random.hpp"

namespace detlimits {

namespace {

constexpr const char* kAverageCase = "average-case-tradeoff";
constexpr const char* kWorstCase = "worst-case-power-cap";
constexpr const char* kSubgroupBound = "subgroup-mixture-bound";
constexpr const char* kSubgroupIdentity = "subgroup-mixture-identity";
constexpr const char* kConvexity = "mixture-convexity";
constexpr const char* kTightness = "variational-tightness";

enum SuiteTag : std::uint64_t { kTagInstance = 1, kTagTheorem1, kTagTheorem2, kTagTheorem3, kTagTightness };

Rng trial_rng(std::uint64_t seed, std::uint64_t tag, std::size_t trial) {
  return Rng(seed, (tag << 40) | static_cast<std::uint64_t>(trial));
}

double max_student_fpr(const PopulationModel& pop, const Detector& phi) {
  double m = 0.0;
  for (const auto& s : pop.students()) m = std::max(m, fpr(phi, s.pmf));
  return m;
}

// Scales phi down so that no student's fpr exceeds alpha0.
Detector enforce_size(const PopulationModel& pop, const Detector& phi, double alpha0) {
  const double m = max_student_fpr(pop, phi);
  if (m <= alpha0) return phi;
  return phi.scaled(std::clamp(alpha0 / m, 0.0, 1.0));
}

double draw_delta(const PopulationModel& pop, const Pmf& ai, Rng& rng) {
  // Half the draws land exactly on a student's TV so the boundary of the
  // overlap set is exercised.
  if (rng.bernoulli(0.5)) {
    const auto& s = pop.students()[rng.uniform_index(pop.size())];
    return tv_distance(s.pmf, ai);
  }
  return rng.uniform01();
}

double draw_alpha0(const PopulationModel& pop, const Detector& phi, Rng& rng) {
  if (rng.bernoulli(0.5)) return max_student_fpr(pop, phi) * rng.uniform(0.0, 1.0);
  return rng.uniform(0.0, 1.0);
}

CheckResult identity_result(const SubgroupCheck& c) {
  CheckResult r;
  r.lhs = c.mixture_response;
  r.rhs = c.average_fpr;
  r.slack = kViolationTolerance - c.identity_error;
  r.pass = c.identity_error <= kViolationTolerance;
  return r;
}

CheckResult tightness_result(const TightnessResult& t) {
  CheckResult r;
  r.lhs = t.max_gap;
  r.rhs = t.tv;
  r.slack = t.tv - t.best_random_gap;
  r.pass = std::abs(t.optimal_gap - t.tv) <= kViolationTolerance && std::abs(t.max_gap - t.tv) <= kViolationTolerance &&
           t.exceeding == 0;
  return r;
}

std::vector<VerificationReport> empty_reports(std::uint64_t seed) {
  std::vector<VerificationReport> reports;
  for (const char* name : {kAverageCase, kWorstCase, kSubgroupBound, kSubgroupIdentity, kConvexity, kTightness}) {
    VerificationReport r;
    r.theorem = name;
    r.seed = seed;
    reports.push_back(r);
  }
  return reports;
}

}  // namespace

CheckResult compare_ge(double lhs, double rhs, double tol) {
  CheckResult r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = lhs - rhs;
  r.pass = r.slack >= -tol;
  return r;
}

CheckResult compare_le(double lhs, double rhs, double tol) {
  CheckResult r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.pass = r.slack >= -tol;
  return r;
}

CheckResult check_theorem1(const PopulationModel& pop, const Pmf& ai, const Detector& phi, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be nonnegative");
  double average_fpr = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) average_fpr += pop.weights()[i] * fpr(phi, pop.students()[i].pmf);
  const double rhs = overlap_mass(pop, ai, delta) * (power(phi, ai) - delta);
  return compare_ge(average_fpr, rhs);
}

CheckResult check_theorem2(const PopulationModel& pop, const Pmf& ai, const Detector& phi, double alpha0) {
  if (!(alpha0 >= 0.0 && alpha0 <= 1.0)) throw std::invalid_argument("alpha0 must lie in [0, 1]");
  require_same_space(pop.space(), phi.space(), "check_theorem2");
  if (max_student_fpr(pop, phi) > alpha0 + kViolationTolerance) {
    CheckResult r;
    r.applicable = false;
    return r;
  }
  return compare_le(power(phi, ai), alpha0 + delta_star(pop, ai));
}

SubgroupCheck check_theorem3(const PopulationModel& pop, const Pmf& ai, const Detector& phi,
                             const std::string& subgroup) {
  const auto& idx = pop.members(subgroup);
  const auto w = conditional_weights(pop, subgroup);
  const Pmf mix = subgroup_mixture(pop, subgroup);

  SubgroupCheck c;
  c.mixture_response = expected_response(phi, mix);
  for (std::size_t m = 0; m < idx.size(); ++m) c.average_fpr += w[m] * fpr(phi, pop.students()[idx[m]].pmf);
  c.identity_error = std::abs(c.mixture_response - c.average_fpr);
  c.bound = compare_ge(c.average_fpr, power(phi, ai) - tv_distance(mix, ai));
  return c;
}

CheckResult check_convexity(const PopulationModel& pop, const Pmf& ai, const std::string& subgroup) {
  const auto& idx = pop.members(subgroup);
  const auto w = conditional_weights(pop, subgroup);
  double average_tv = 0.0;
  for (std::size_t m = 0; m < idx.size(); ++m) average_tv += w[m] * tv_distance(pop.students()[idx[m]].pmf, ai);
  return compare_le(tv_distance(subgroup_mixture(pop, subgroup), ai), average_tv);
}

TightnessResult tightness_search(const Pmf& student, const Pmf& ai, std::size_t n_random, std::uint64_t seed) {
  require_same_space(student.space(), ai.space(), "tightness_search");
  TightnessResult t;
  t.tv = tv_distance(student, ai);
  const Detector best = optimal_detector(student, ai);
  t.optimal_gap = power(best, ai) - fpr(best, student);
  t.best_random_gap = -1.0;
  Rng rng(seed);
  for (std::size_t i = 0; i < n_random; ++i) {
    const Detector phi = random_detector(student.space_ptr(), rng);
    const double gap = power(phi, ai) - fpr(phi, student);
    t.best_random_gap = std::max(t.best_random_gap, gap);
    if (gap > t.tv + kViolationTolerance) ++t.exceeding;
  }
  t.max_gap = std::max(t.optimal_gap, t.best_random_gap);
  return t;
}

SimulationResult simulate_institution(const PopulationModel& pop, const Detector& phi, std::size_t n_students,
                                      std::size_t n_docs_per_student, std::uint64_t seed) {
  if (n_students == 0) throw std::invalid_argument("simulation needs at least one student");
  if (n_docs_per_student == 0) throw std::invalid_argument("simulation needs at least one document per student");
  require_same_space(pop.space(), phi.space(), "simulate_institution");

  SimulationResult r;
  r.seed = seed;
  r.n_students = n_students;
  r.n_docs_per_student = n_docs_per_student;
  r.documents = n_students * n_docs_per_student;

  Rng rng(seed);
  for (std::size_t s = 0; s < n_students; ++s) {
    const auto& student = pop.students()[rng.categorical(pop.weights())];
    for (std::size_t d = 0; d < n_docs_per_student; ++d) {
      const std::size_t x = rng.categorical(student.pmf.mass());
      if (rng.bernoulli(phi[x])) ++r.accusations;
    }
  }
  r.observed_fpr = static_cast<double>(r.accusations) / static_cast<double>(r.documents);

  // Per-student mean accusation rate Y has variance
  //   E[a(1-a)] / m + Var(a), a = fpr of the drawn student type.
  double mean = 0.0;
  double within = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const double a = fpr(phi, pop.students()[i].pmf);
    const double w = pop.weights()[i];
    mean += w * a;
    second += w * a * a;
    within += w * a * (1.0 - a);
  }
  const double between = std::max(0.0, second - mean * mean);
  const double m = static_cast<double>(n_docs_per_student);
  r.exact_fpr = mean;
  r.standard_error = std::sqrt((within / m + between) / static_cast<double>(n_students));
  r.expected_accusations = mean * static_cast<double>(r.documents);
  return r;
}

void VerificationReport::record(const CheckResult& r) {
  ++trials;
  if (!r.applicable) {
    ++not_applicable;
    return;
  }
  if (trials - not_applicable == 1) {
    max_slack = r.slack;
    min_slack = r.slack;
  } else {
    max_slack = std::max(max_slack, r.slack);
    min_slack = std::min(min_slack, r.slack);
  }
  if (!r.pass) {
    ++violations;
    max_violation = std::max(max_violation, -r.slack);
  }
}

void VerificationReport::merge(const VerificationReport& other) {
  const std::size_t mine = trials - not_applicable;
  const std::size_t theirs = other.trials - other.not_applicable;
  if (mine == 0) {
    max_slack = other.max_slack;
    min_slack = other.min_slack;
  } else if (theirs > 0) {
    max_slack = std::max(max_slack, other.max_slack);
    min_slack = std::min(min_slack, other.min_slack);
  }
  trials += other.trials;
  not_applicable += other.not_applicable;
  violations += other.violations;
  max_violation = std::max(max_violation, other.max_violation);
}

Instance random_instance(Rng& rng, const InstanceLimits& limits) {
  if (limits.max_space < 2 || limits.max_students < 1 || limits.max_subgroups < 1) {
    throw std::invalid_argument("instance limits too small");
  }
  const std::size_t n = 2 + rng.uniform_index(limits.max_space - 1);
  const std::size_t n_students = 1 + rng.uniform_index(limits.max_students);
  const std::size_t n_groups = 1 + rng.uniform_index(std::min(limits.max_subgroups, n_students));

  auto space = make_space(n);
  Pmf ai = Pmf::random(space, rng);

  std::vector<StudentType> students;
  for (std::size_t s = 0; s < n_students; ++s) {
    Pmf own = Pmf::random(space, rng);
    Pmf pmf = own;
    if (rng.bernoulli(0.4)) {
      // Near-AI writer: mostly the AI pmf with a little of their own style.
      const double lambda = rng.uniform(0.0, 0.3);
      std::vector<Pmf> parts{own, ai};
      std::vector<double> w{lambda, 1.0 - lambda};
      pmf = mixture(parts, w);
    }
    const std::size_t g = s < n_groups ? s : rng.uniform_index(n_groups);
    students.push_back({"s" + std::to_string(s), std::move(pmf), "G" + std::to_string(g), "task"});
  }
  auto weights = rng.simplex(n_students);
  return {PopulationModel(std::move(students), std::move(weights)), std::move(ai)};
}

Detector random_test_detector(const PopulationModel& pop, const Pmf& ai, Rng& rng) {
  const double pick = rng.uniform01();
  const auto& space = pop.space_ptr();
  if (pick < 0.3) return random_detector(space, rng);
  if (pick < 0.5) {
    std::vector<double> accept(space->size());
    for (double& a : accept) a = rng.bernoulli(0.5) ? 1.0 : 0.0;
    return Detector(space, std::move(accept));
  }
  const auto& target = pop.students()[rng.uniform_index(pop.size())].pmf;
  Detector best = optimal_detector(target, ai);
  if (pick < 0.8) return best;
  return blend(rng.uniform01(), best, random_detector(space, rng));
}

std::vector<VerificationReport> run_random_suites(std::size_t trials, std::uint64_t seed,
                                                  const InstanceLimits& limits) {
  auto reports = empty_reports(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng inst_rng = trial_rng(seed, kTagInstance, t);
    const Instance inst = random_instance(inst_rng, limits);
    const auto& pop = inst.pop;
    const auto& ai = inst.ai;

    {
      Rng rng = trial_rng(seed, kTagTheorem1, t);
      const Detector phi = random_test_detector(pop, ai, rng);
      reports[0].record(check_theorem1(pop, ai, phi, draw_delta(pop, ai, rng)));
    }
    {
      Rng rng = trial_rng(seed, kTagTheorem2, t);
      const Detector raw = random_test_detector(pop, ai, rng);
      const double alpha0 = draw_alpha0(pop, raw, rng);
      reports[1].record(check_theorem2(pop, ai, enforce_size(pop, raw, alpha0), alpha0));
    }
    {
      Rng rng = trial_rng(seed, kTagTheorem3, t);
      const Detector phi = random_test_detector(pop, ai, rng);
      const auto groups = pop.subgroups();
      const auto& g = groups[rng.uniform_index(groups.size())];
      const SubgroupCheck c = check_theorem3(pop, ai, phi, g);
      reports[2].record(c.bound);
      reports[3].record(identity_result(c));
      reports[4].record(check_convexity(pop, ai, g));
    }
    {
      Rng rng = trial_rng(seed, kTagTightness, t);
      const auto& s = pop.students()[rng.uniform_index(pop.size())];
      reports[5].record(tightness_result(tightness_search(s.pmf, ai, 100, rng.next_u64())));
    }
  }
  return reports;
}

std::vector<VerificationReport> run_population_suites(const PopulationModel& pop, const Pmf& ai,
                                                      std::span<const Detector> detectors, std::size_t trials,
                                                      std::uint64_t seed) {
  require_same_space(pop.space(), ai.space(), "run_population_suites");
  auto reports = empty_reports(seed);
  const auto groups = pop.subgroups();
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = trial_rng(seed, kTagTheorem1, t);
    const Detector phi = t < detectors.size() ? detectors[t] : random_test_detector(pop, ai, rng);
    reports[0].record(check_theorem1(pop, ai, phi, draw_delta(pop, ai, rng)));
    const double alpha0 = draw_alpha0(pop, phi, rng);
    reports[1].record(check_theorem2(pop, ai, enforce_size(pop, phi, alpha0), alpha0));
    for (const auto& g : groups) {
      if (pop.subgroup_weight(g) <= 0.0) continue;
      const SubgroupCheck c = check_theorem3(pop, ai, phi, g);
      reports[2].record(c.bound);
      reports[3].record(identity_result(c));
    }
  }
  for (const auto& g : groups) {
    if (pop.subgroup_weight(g) <= 0.0) continue;
    reports[4].record(check_convexity(pop, ai, g));
  }
  for (std::size_t i = 0; i < pop.size(); ++i) {
    Rng rng = trial_rng(seed, kTagTightness, i);
    reports[5].record(tightness_result(tightness_search(pop.students()[i].pmf, ai, trials, rng.next_u64())));
  }
  return reports;
}

bool all_passed(std::span<const VerificationReport> reports) {
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.passed(); });
}

}  // namespace detlimits
