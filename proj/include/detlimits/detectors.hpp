#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "detlimits/distributions.hpp"

namespace detlimits {

/// A (possibly randomized) detector given extensionally: for each outcome, the
/// probability of declaring the document AI-generated. Entries lie in [0, 1].
class Detector {
 public:
  Detector(SpacePtr space, std::vector<double> accept);

  static Detector never(SpacePtr space);
  static Detector always(SpacePtr space);

  const SampleSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  std::size_t size() const { return accept_.size(); }
  std::span<const double> accept() const { return accept_; }
  double operator[](std::size_t outcome) const { return accept_[outcome]; }

  /// c * phi for c in [0, 1].
  Detector scaled(double c) const;

 private:
  SpacePtr space_;
  std::vector<double> accept_;
};

/// lambda * a + (1 - lambda) * b.
Detector blend(double lambda, const Detector& a, const Detector& b);

/// Expected detector response E_p[phi].
double expected_response(const Detector& phi, const Pmf& p);

/// False positive rate against one student's writing distribution.
inline double fpr(const Detector& phi, const Pmf& student) { return expected_response(phi, student); }

/// Power (true positive rate) against the AI output distribution.
inline double power(const Detector& phi, const Pmf& ai) { return expected_response(phi, ai); }

/// Indicator of {x : ai(x) > student(x)}. Its power minus false positive rate
/// equals tv_distance(student, ai). Ties are left out of the accept set.
Detector optimal_detector(const Pmf& student, const Pmf& ai);

/// Deterministic detector accepting outcomes with score >= threshold.
Detector threshold_detector(SpacePtr space, std::span<const double> scores, double threshold);

/// Entries i.i.d. uniform on [0, 1).
Detector random_detector(SpacePtr space, std::uint64_t seed);
Detector random_detector(SpacePtr space, Rng& rng);

}  // namespace detlimits
