#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "detlimits/detectors.hpp"
#include "detlimits/distributions.hpp"

namespace detlimits {

inline constexpr double kViolationTolerance = 1e-12;

/// Outcome of evaluating one inequality on one instance. `slack` is the margin
/// by which it held (negative when violated).
struct CheckResult {
  bool applicable = true;
  bool pass = true;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
};

/// pass iff lhs >= rhs - tol.
CheckResult compare_ge(double lhs, double rhs, double tol = kViolationTolerance);
/// pass iff lhs <= rhs + tol.
CheckResult compare_le(double lhs, double rhs, double tol = kViolationTolerance);

/// Average-case trade-off: sum_theta pi_theta fpr(phi, p_theta) against
/// overlap_mass(delta) * (power(phi) - delta).
CheckResult check_theorem1(const PopulationModel& pop, const Pmf& ai, const Detector& phi, double delta);

/// Worst-case bound: when every student's fpr is at most alpha0 (within
/// tolerance), power <= alpha0 + delta_star. Not applicable otherwise.
CheckResult check_theorem2(const PopulationModel& pop, const Pmf& ai, const Detector& phi, double alpha0);

struct SubgroupCheck {
  CheckResult bound;  // subgroup average fpr >= power - TV(mixture, ai)
  double mixture_response = 0.0;  // E_{mixture}[phi]
  double average_fpr = 0.0;       // conditional-weighted average of member fprs
  double identity_error = 0.0;    // |mixture_response - average_fpr|
  bool pass() const { return bound.pass && identity_error <= kViolationTolerance; }
};

SubgroupCheck check_theorem3(const PopulationModel& pop, const Pmf& ai, const Detector& phi,
                             const std::string& subgroup);

/// TV(subgroup mixture, ai) <= conditional average of member TVs.
CheckResult check_convexity(const PopulationModel& pop, const Pmf& ai, const std::string& subgroup);

struct TightnessResult {
  double tv = 0.0;
  double optimal_gap = 0.0;      // power - fpr of optimal_detector
  double best_random_gap = 0.0;  // best power - fpr among random detectors
  double max_gap = 0.0;          // max over all candidates
  std::size_t exceeding = 0;     // random detectors with gap > tv + tol
};

/// Max of (power - fpr) over n_random random detectors plus optimal_detector.
TightnessResult tightness_search(const Pmf& student, const Pmf& ai, std::size_t n_random, std::uint64_t seed);

struct SimulationResult {
  std::uint64_t seed = 0;
  std::size_t n_students = 0;
  std::size_t n_docs_per_student = 0;
  std::size_t documents = 0;
  std::size_t accusations = 0;
  double observed_fpr = 0.0;
  double exact_fpr = 0.0;        // sum_theta pi_theta fpr(phi, p_theta)
  double standard_error = 0.0;   // of observed_fpr under the sampling scheme
  double expected_accusations = 0.0;
};

/// Draws n_students student types from the population weights, n_docs
/// documents from each student's pmf, and flags each document with
/// probability phi(x). Every document is human-written.
SimulationResult simulate_institution(const PopulationModel& pop, const Detector& phi, std::size_t n_students,
                                      std::size_t n_docs_per_student, std::uint64_t seed);

/// Aggregated outcome of many checks of one inequality.
struct VerificationReport {
  std::string theorem;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::size_t not_applicable = 0;
  std::size_t violations = 0;
  double max_slack = 0.0;
  double min_slack = 0.0;
  double max_violation = 0.0;

  void record(const CheckResult& r);
  void merge(const VerificationReport& other);
  bool passed() const { return violations == 0; }
};

struct InstanceLimits {
  std::size_t max_space = 20;
  std::size_t max_students = 10;
  std::size_t max_subgroups = 4;
};

struct Instance {
  PopulationModel pop;
  Pmf ai;
};

/// Random population and AI pmf within `limits`. Some students are drawn as
/// mixtures toward the AI pmf so overlap sets are regularly nonempty.
Instance random_instance(Rng& rng, const InstanceLimits& limits = {});

/// A detector drawn from a mix of families: uniform randomized, deterministic
/// 0/1, the optimal detector for a random student, and blends of these.
Detector random_test_detector(const PopulationModel& pop, const Pmf& ai, Rng& rng);

/// Suites over freshly generated random instances. Each trial t uses the
/// stream (seed, suite tag, t).
std::vector<VerificationReport> run_random_suites(std::size_t trials, std::uint64_t seed,
                                                  const InstanceLimits& limits = {});

/// Suites over a fixed population: each trial draws a detector (or uses the
/// supplied ones first), a delta, and an alpha0, and checks every subgroup.
std::vector<VerificationReport> run_population_suites(const PopulationModel& pop, const Pmf& ai,
                                                      std::span<const Detector> detectors, std::size_t trials,
                                                      std::uint64_t seed);

bool all_passed(std::span<const VerificationReport> reports);

}  // namespace detlimits
