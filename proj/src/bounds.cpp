#include "detlimits/bounds.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "detlimits/detectors.hpp"

namespace detlimits {

double delta_star(const PopulationModel& pop, const Pmf& ai) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : pop.students()) best = std::min(best, tv_distance(s.pmf, ai));
  return best;
}

InstitutionBound institution_fpr_lower_bound(std::vector<SubgroupTerm> terms, double beta) {
  if (terms.empty()) throw std::invalid_argument("institution bound needs at least one subgroup");
  detail::require_unit_interval(beta, "beta");
  InstitutionBound out;
  for (const auto& t : terms) {
    detail::require_unit_interval(t.weight, "subgroup weight");
    detail::require_unit_interval(t.tv, "subgroup tv");
    out.literal += t.weight * (beta - t.tv);
    out.clipped += t.weight * subgroup_fpr_lower_bound(beta, t.tv);
  }
  out.terms = std::move(terms);
  return out;
}

InstitutionBound institution_fpr_lower_bound(const PopulationModel& pop, const Pmf& ai, double beta) {
  std::vector<SubgroupTerm> terms;
  for (const auto& g : pop.subgroups()) {
    const double w = pop.subgroup_weight(g);
    if (w <= 0.0) continue;
    terms.push_back({g, std::min(1.0, w), tv_distance(subgroup_mixture(pop, g), ai)});
  }
  return institution_fpr_lower_bound(std::move(terms), beta);
}

std::vector<double> linear_axis(double lo, double hi, std::size_t steps) {
  if (!(lo <= hi)) throw std::invalid_argument("axis lower end exceeds upper end");
  if (steps == 0) return {lo};
  std::vector<double> axis(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    axis[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps);
  }
  axis.back() = hi;
  return axis;
}

BoundMapGrid bound_map(double beta0, std::span<const double> delta_axis, std::span<const double> pi_axis) {
  detail::require_unit_interval(beta0, "beta0");
  BoundMapGrid grid;
  grid.beta0 = beta0;
  grid.delta_axis.assign(delta_axis.begin(), delta_axis.end());
  grid.pi_axis.assign(pi_axis.begin(), pi_axis.end());
  grid.values.assign(pi_axis.size(), std::vector<double>(delta_axis.size(), 0.0));
  for (std::size_t i = 0; i < pi_axis.size(); ++i) {
    for (std::size_t j = 0; j < delta_axis.size(); ++j) {
      grid.values[i][j] = avg_case_fpr_lower_bound(pi_axis[i], beta0, delta_axis[j]);
    }
  }
  return grid;
}

BoundMapGrid default_bound_map(double beta0) {
  const auto delta = linear_axis(0.0, 0.4, 80);
  const auto pi = linear_axis(0.0, 0.5, 100);
  return bound_map(beta0, delta, pi);
}

std::string bound_map_csv(const BoundMapGrid& grid) {
  std::string out = "pi,delta,bound\n";
  out.reserve(out.size() + grid.pi_axis.size() * grid.delta_axis.size() * 24);
  for (std::size_t i = 0; i < grid.pi_axis.size(); ++i) {
    for (std::size_t j = 0; j < grid.delta_axis.size(); ++j) {
      fmt::format_to(std::back_inserter(out), "{:.12g},{:.12g},{:.12g}\n", grid.pi_axis[i], grid.delta_axis[j],
                     grid.values[i][j]);
    }
  }
  return out;
}

}  // namespace detlimits
