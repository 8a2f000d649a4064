#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "detlimits/distributions.hpp"

namespace detlimits {

// The scalar bounds are templates so the same code can be evaluated on an
// exact rational type (decimal inputs such as 0.1 have no exact double form).

namespace detail {
template <typename T>
void require_unit_interval(const T& v, const char* name) {
  if (!(v >= T(0) && v <= T(1))) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  }
}
}  // namespace detail

/// Floor on the population-averaged false positive rate of any detector with
/// power beta0, when a fraction pi_star of students lies within TV distance
/// delta of the AI output: max(0, pi_star * (beta0 - delta)).
template <typename T = double>
T avg_case_fpr_lower_bound(const T& pi_star, const T& beta0, const T& delta) {
  detail::require_unit_interval(pi_star, "pi_star");
  detail::require_unit_interval(beta0, "beta0");
  detail::require_unit_interval(delta, "delta");
  T value = pi_star * (beta0 - delta);
  return value < T(0) ? T(0) : value;
}

template <typename T = double>
T expected_false_accusations(const T& bound, long long n_students) {
  if (n_students < 0) throw std::invalid_argument("n_students must be nonnegative");
  return bound * T(n_students);
}

/// Cap on power for a detector whose false positive rate is at most alpha0 for
/// every student: min(1, alpha0 + delta_star).
template <typename T = double>
T worst_case_power_cap(const T& alpha0, const T& delta_star) {
  detail::require_unit_interval(alpha0, "alpha0");
  detail::require_unit_interval(delta_star, "delta_star");
  T value = alpha0 + delta_star;
  return value > T(1) ? T(1) : value;
}

/// Floor on a subgroup's average false positive rate: max(0, beta - tv_mix).
template <typename T = double>
T subgroup_fpr_lower_bound(const T& beta, const T& tv_mix) {
  detail::require_unit_interval(beta, "beta");
  detail::require_unit_interval(tv_mix, "tv_mix");
  T value = beta - tv_mix;
  return value < T(0) ? T(0) : value;
}

/// Smallest TV distance from any student to the AI distribution.
double delta_star(const PopulationModel& pop, const Pmf& ai);

struct SubgroupTerm {
  std::string subgroup;
  double weight = 0.0;  // pi_k
  double tv = 0.0;      // TV(subgroup mixture, AI)
};

struct InstitutionBound {
  double literal = 0.0;  // sum_k pi_k * (beta - tv_k), may be negative
  double clipped = 0.0;  // sum_k pi_k * max(0, beta - tv_k)
  std::vector<SubgroupTerm> terms;
};

/// Institution-wide floor from per-subgroup weights and mixture TVs.
InstitutionBound institution_fpr_lower_bound(std::vector<SubgroupTerm> terms, double beta);
InstitutionBound institution_fpr_lower_bound(const PopulationModel& pop, const Pmf& ai, double beta);

struct BoundMapGrid {
  double beta0 = 0.0;
  std::vector<double> delta_axis;
  std::vector<double> pi_axis;
  std::vector<std::vector<double>> values;  // values[i][j] at (pi_axis[i], delta_axis[j])
};

/// Evenly spaced axis lo + (hi - lo) * i / steps, i = 0..steps.
std::vector<double> linear_axis(double lo, double hi, std::size_t steps);

BoundMapGrid bound_map(double beta0, std::span<const double> delta_axis, std::span<const double> pi_axis);

/// Default grid: pi in [0, 0.5], delta in [0, 0.4], step 0.005.
BoundMapGrid default_bound_map(double beta0 = 0.80);

/// CSV body: header `pi,delta,bound`, pi-major rows.
std::string bound_map_csv(const BoundMapGrid& grid);

}  // namespace detlimits
