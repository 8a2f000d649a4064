#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace detlimits {

class Rng;

/// A finite outcome space. Outcomes are indexed 0..size-1; labels are optional
/// display names.
class SampleSpace {
 public:
  explicit SampleSpace(std::size_t size);
  explicit SampleSpace(std::vector<std::string> labels);

  std::size_t size() const { return size_; }
  bool has_labels() const { return !labels_.empty(); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::string label(std::size_t outcome) const;

  /// Index of a labelled outcome, if present.
  std::optional<std::size_t> find(const std::string& label) const;

  friend bool operator==(const SampleSpace& a, const SampleSpace& b) {
    return a.size_ == b.size_ && a.labels_ == b.labels_;
  }

 private:
  std::size_t size_;
  std::vector<std::string> labels_;
};

using SpacePtr = std::shared_ptr<const SampleSpace>;

SpacePtr make_space(std::size_t size);
SpacePtr make_space(std::vector<std::string> labels);

/// Throws SpaceMismatchError unless both spaces describe the same outcomes.
void require_same_space(const SampleSpace& a, const SampleSpace& b, const char* context);

/// Probability mass function over a SampleSpace (counting reference measure).
///
/// Construction rejects negative or non-finite entries and any total that
/// differs from 1 by more than kNormTolerance; totals inside the tolerance are
/// divided out so the stored masses sum to 1 up to rounding.
class Pmf {
 public:
  static constexpr double kNormTolerance = 1e-9;

  Pmf(SpacePtr space, std::vector<double> mass);

  static Pmf point_mass(SpacePtr space, std::size_t outcome);
  static Pmf uniform(SpacePtr space);
  /// Uniform draw from the simplex over `space`.
  static Pmf random(SpacePtr space, Rng& rng);

  const SampleSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  std::size_t size() const { return mass_.size(); }
  std::span<const double> mass() const { return mass_; }
  double operator[](std::size_t outcome) const { return mass_[outcome]; }

  /// Probability of an event given as an outcome-membership mask.
  double probability(std::span<const bool> event) const;

 private:
  SpacePtr space_;
  std::vector<double> mass_;
};

/// Total variation distance, computed as half the L1 distance.
double tv_distance(const Pmf& p, const Pmf& q);

/// Pointwise convex combination of pmfs on a shared space.
Pmf mixture(std::span<const Pmf> components, std::span<const double> weights);

/// One student type: a writing distribution tagged with subgroup and task.
struct StudentType {
  std::string id;
  Pmf pmf;
  std::string subgroup;
  std::string task;
};

/// Weighted family of student types (atomic mixing measure over types).
///
/// Invariants checked on construction: at least one student, unique ids,
/// nonnegative weights summing to 1 within Pmf::kNormTolerance, and a single
/// shared sample space.
class PopulationModel {
 public:
  PopulationModel(std::vector<StudentType> students, std::vector<double> weights);

  const std::vector<StudentType>& students() const { return students_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return students_.size(); }
  const SampleSpace& space() const { return students_.front().pmf.space(); }
  const SpacePtr& space_ptr() const { return students_.front().pmf.space_ptr(); }

  /// Subgroup keys in sorted order.
  std::vector<std::string> subgroups() const;
  /// Member indices of each subgroup.
  const std::map<std::string, std::vector<std::size_t>>& partition() const { return partition_; }
  const std::vector<std::size_t>& members(const std::string& subgroup) const;
  /// Total weight of a subgroup.
  double subgroup_weight(const std::string& subgroup) const;

  /// Task keys in sorted order.
  std::vector<std::string> tasks() const;
  /// Students carrying `task`, with weights renormalized within that task.
  PopulationModel for_task(const std::string& task) const;

 private:
  std::vector<StudentType> students_;
  std::vector<double> weights_;
  std::map<std::string, std::vector<std::size_t>> partition_;
};

/// Document distribution of a randomly chosen member of `subgroup`, i.e. the
/// mixture of member pmfs under the conditional weights.
Pmf subgroup_mixture(const PopulationModel& pop, const std::string& subgroup);

/// Conditional weights of the members of `subgroup`, in member order.
std::vector<double> conditional_weights(const PopulationModel& pop, const std::string& subgroup);

/// Rounding allowance for overlap-set membership: a TV that equals delta in
/// exact arithmetic may compute a few ulps above it.
inline constexpr double kOverlapTolerance = 1e-12;

/// Ids of students whose pmf is within TV distance `delta` of `ai`.
std::vector<std::string> overlap_set(const PopulationModel& pop, const Pmf& ai, double delta);

/// Total weight of the overlap set at `delta`.
double overlap_mass(const PopulationModel& pop, const Pmf& ai, double delta);

}  // namespace detlimits
