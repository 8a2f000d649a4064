#include "detlimits/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "detlimits/errors.hpp"
#include "detlimits/random.hpp"

namespace detlimits {

SampleSpace::SampleSpace(std::size_t size) : size_(size) {
  if (size == 0) throw std::invalid_argument("sample space must have at least one outcome");
}

SampleSpace::SampleSpace(std::vector<std::string> labels) : size_(labels.size()), labels_(std::move(labels)) {
  if (size_ == 0) throw std::invalid_argument("sample space must have at least one outcome");
  std::set<std::string> seen(labels_.begin(), labels_.end());
  if (seen.size() != labels_.size()) throw std::invalid_argument("sample space labels must be unique");
}

std::string SampleSpace::label(std::size_t outcome) const {
  if (outcome >= size_) throw std::out_of_range("outcome index out of range");
  return labels_.empty() ? std::to_string(outcome) : labels_[outcome];
}

std::optional<std::size_t> SampleSpace::find(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

SpacePtr make_space(std::size_t size) { return std::make_shared<const SampleSpace>(size); }

SpacePtr make_space(std::vector<std::string> labels) {
  return std::make_shared<const SampleSpace>(std::move(labels));
}

void require_same_space(const SampleSpace& a, const SampleSpace& b, const char* context) {
  if (&a == &b || a == b) return;
  throw SpaceMismatchError(fmt::format("{}: incomparable distributions over different sample spaces ({} vs {} outcomes)",
                                       context, a.size(), b.size()));
}

Pmf::Pmf(SpacePtr space, std::vector<double> mass) : space_(std::move(space)), mass_(std::move(mass)) {
  if (!space_) throw std::invalid_argument("pmf requires a sample space");
  if (mass_.size() != space_->size()) {
    throw std::invalid_argument(
        fmt::format("pmf has {} entries but the sample space has {} outcomes", mass_.size(), space_->size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < mass_.size(); ++i) {
    if (!std::isfinite(mass_[i]) || mass_[i] < 0.0) {
      throw std::invalid_argument(fmt::format("pmf entry {} is negative or not finite", i));
    }
    total += mass_[i];
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw std::invalid_argument(fmt::format("pmf entries sum to {:.17g}, not 1", total));
  }
  if (total != 1.0) {
    for (double& m : mass_) m /= total;
  }
}

Pmf Pmf::point_mass(SpacePtr space, std::size_t outcome) {
  if (!space || outcome >= space->size()) throw std::out_of_range("point mass outcome out of range");
  std::vector<double> mass(space->size(), 0.0);
  mass[outcome] = 1.0;
  return Pmf(std::move(space), std::move(mass));
}

Pmf Pmf::uniform(SpacePtr space) {
  const auto n = space->size();
  return Pmf(std::move(space), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Pmf Pmf::random(SpacePtr space, Rng& rng) {
  auto mass = rng.simplex(space->size());
  return Pmf(std::move(space), std::move(mass));
}

double Pmf::probability(std::span<const bool> event) const {
  if (event.size() != mass_.size()) throw std::invalid_argument("event mask size does not match sample space");
  double p = 0.0;
  for (std::size_t i = 0; i < mass_.size(); ++i) {
    if (event[i]) p += mass_[i];
  }
  return p;
}

double tv_distance(const Pmf& p, const Pmf& q) {
  require_same_space(p.space(), q.space(), "tv_distance");
  double l1 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) l1 += std::abs(p[i] - q[i]);
  return std::min(1.0, 0.5 * l1);
}

Pmf mixture(std::span<const Pmf> components, std::span<const double> weights) {
  if (components.empty()) throw std::invalid_argument("mixture needs at least one component");
  if (components.size() != weights.size()) throw std::invalid_argument("mixture weights and components differ in length");
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("mixture weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > Pmf::kNormTolerance) {
    throw std::invalid_argument(fmt::format("mixture weights sum to {:.17g}, not 1", total));
  }
  const auto& space = components.front().space_ptr();
  std::vector<double> mass(space->size(), 0.0);
  for (std::size_t c = 0; c < components.size(); ++c) {
    require_same_space(*space, components[c].space(), "mixture");
    for (std::size_t i = 0; i < mass.size(); ++i) mass[i] += weights[c] * components[c][i];
  }
  return Pmf(space, std::move(mass));
}

PopulationModel::PopulationModel(std::vector<StudentType> students, std::vector<double> weights)
    : students_(std::move(students)), weights_(std::move(weights)) {
  if (students_.empty()) throw std::invalid_argument("population needs at least one student");
  if (students_.size() != weights_.size()) throw std::invalid_argument("population weights and students differ in length");
  double total = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("population weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > Pmf::kNormTolerance) {
    throw std::invalid_argument(fmt::format("population weights sum to {:.17g}, not 1", total));
  }
  std::set<std::string> ids;
  const auto& space = students_.front().pmf.space();
  for (std::size_t i = 0; i < students_.size(); ++i) {
    const auto& s = students_[i];
    if (!ids.insert(s.id).second) throw std::invalid_argument("duplicate student id: " + s.id);
    require_same_space(space, s.pmf.space(), "population");
    partition_[s.subgroup].push_back(i);
  }
}

std::vector<std::string> PopulationModel::subgroups() const {
  std::vector<std::string> keys;
  for (const auto& [k, _] : partition_) keys.push_back(k);
  return keys;
}

const std::vector<std::size_t>& PopulationModel::members(const std::string& subgroup) const {
  auto it = partition_.find(subgroup);
  if (it == partition_.end()) throw std::invalid_argument("unknown subgroup: " + subgroup);
  return it->second;
}

double PopulationModel::subgroup_weight(const std::string& subgroup) const {
  double w = 0.0;
  for (auto i : members(subgroup)) w += weights_[i];
  return w;
}

std::vector<std::string> PopulationModel::tasks() const {
  std::set<std::string> keys;
  for (const auto& s : students_) keys.insert(s.task);
  return {keys.begin(), keys.end()};
}

PopulationModel PopulationModel::for_task(const std::string& task) const {
  std::vector<StudentType> kept;
  std::vector<double> w;
  double total = 0.0;
  for (std::size_t i = 0; i < students_.size(); ++i) {
    if (students_[i].task != task) continue;
    kept.push_back(students_[i]);
    w.push_back(weights_[i]);
    total += weights_[i];
  }
  if (kept.empty()) throw std::invalid_argument("no students for task: " + task);
  if (total <= 0.0) throw std::invalid_argument("students for task have zero total weight: " + task);
  for (double& x : w) x /= total;
  return PopulationModel(std::move(kept), std::move(w));
}

std::vector<double> conditional_weights(const PopulationModel& pop, const std::string& subgroup) {
  const auto& idx = pop.members(subgroup);
  double total = 0.0;
  for (auto i : idx) total += pop.weights()[i];
  if (total <= 0.0) throw std::invalid_argument("subgroup has zero total weight: " + subgroup);
  std::vector<double> w;
  w.reserve(idx.size());
  for (auto i : idx) w.push_back(pop.weights()[i] / total);
  return w;
}

Pmf subgroup_mixture(const PopulationModel& pop, const std::string& subgroup) {
  const auto& idx = pop.members(subgroup);
  const auto w = conditional_weights(pop, subgroup);
  std::vector<double> mass(pop.space().size(), 0.0);
  for (std::size_t m = 0; m < idx.size(); ++m) {
    const auto& p = pop.students()[idx[m]].pmf;
    for (std::size_t i = 0; i < mass.size(); ++i) mass[i] += w[m] * p[i];
  }
  return Pmf(pop.space_ptr(), std::move(mass));
}

std::vector<std::string> overlap_set(const PopulationModel& pop, const Pmf& ai, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be nonnegative");
  std::vector<std::string> ids;
  for (const auto& s : pop.students()) {
    if (tv_distance(s.pmf, ai) <= delta + kOverlapTolerance) ids.push_back(s.id);
  }
  return ids;
}

double overlap_mass(const PopulationModel& pop, const Pmf& ai, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be nonnegative");
  double mass = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (tv_distance(pop.students()[i].pmf, ai) <= delta + kOverlapTolerance) mass += pop.weights()[i];
  }
  return std::min(1.0, mass);
}

}  // namespace detlimits
