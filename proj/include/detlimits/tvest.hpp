#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "detlimits/distributions.hpp"

namespace detlimits {

/// Accuracy of the exact Bayes rule between p and q under equal priors.
/// Outcomes where p(x) >= q(x) are assigned to p.
double bayes_accuracy(const Pmf& p, const Pmf& q);

/// The classifier route can only bound TV from below.
enum class DirectionNote { kLowerBoundOnly };

struct TvEstimate {
  double accuracy_hat = 0.0;    // balanced test accuracy
  double tv_lower_bound = 0.0;  // max(0, 2 * accuracy_hat - 1)
  bool clipped = false;         // 2 * accuracy_hat - 1 was negative
  std::size_t n_p_input = 0;    // sample counts before class balancing
  std::size_t n_q_input = 0;
  std::size_t n_train = 0;      // per class
  std::size_t n_test = 0;       // per class
  std::uint64_t seed = 0;
  DirectionNote direction_note = DirectionNote::kLowerBoundOnly;
};

/// Plug-in frequency classifier between two samples of outcome indices.
///
/// The larger sample is down-sampled (seeded) to the size of the smaller one,
/// each class is shuffled and split into `split` training / (1 - split) test
/// fractions, and each outcome is assigned to the class with the higher
/// training count (ties and unseen outcomes go to p). Throws if a class ends
/// up with no training or no test documents.
TvEstimate plugin_classifier_accuracy(std::span<const std::size_t> samples_p, std::span<const std::size_t> samples_q,
                                      double split, std::uint64_t seed);

enum class TvConclusion {
  kNoEvidenceOfSmallTv,     // accuracy at or below chance
  kWithinSamplingNoise,     // above chance by less than the noise half-width
  kLowerBoundOnly,          // informative lower bound, floor still positive
  kDetectionMayBeFeasible,  // TV lower bound >= power: the FPR floor is vacuous
};

struct TvAdvisory {
  TvConclusion conclusion = TvConclusion::kNoEvidenceOfSmallTv;
  double noise_halfwidth = 0.0;  // 3 / sqrt(n_test)
  double beta = 0.0;
  /// max(0, beta - tv_lower_bound). Plugging a TV lower bound into the
  /// subgroup floor does not give a valid FPR floor; this is reported only so
  /// it can be labelled as such.
  double fpr_floor_with_lower_tv = 0.0;
  bool floor_valid = false;  // always false for classifier-based estimates
  std::string message;
};

TvAdvisory direction_guard(const TvEstimate& estimate, double beta);

std::string to_string(TvConclusion c);
std::string to_string(DirectionNote n);

}  // namespace detlimits
