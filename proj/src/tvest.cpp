#include "detlimits/tvest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "detlimits/random.hpp"

namespace detlimits {

double bayes_accuracy(const Pmf& p, const Pmf& q) {
  require_same_space(p.space(), q.space(), "bayes_accuracy");
  double correct = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) correct += p[i] >= q[i] ? p[i] : q[i];
  return std::clamp(0.5 * correct, 0.5, 1.0);
}

TvEstimate plugin_classifier_accuracy(std::span<const std::size_t> samples_p, std::span<const std::size_t> samples_q,
                                      double split, std::uint64_t seed) {
  if (samples_p.empty() || samples_q.empty()) throw std::invalid_argument("both sample lists must be nonempty");
  if (!(split > 0.0 && split < 1.0)) throw std::invalid_argument("split must lie strictly between 0 and 1");

  Rng rng(seed);
  std::vector<std::size_t> p(samples_p.begin(), samples_p.end());
  std::vector<std::size_t> q(samples_q.begin(), samples_q.end());

  TvEstimate est;
  est.seed = seed;
  est.n_p_input = p.size();
  est.n_q_input = q.size();

  // Balance classes by down-sampling the larger one.
  const std::size_t n = std::min(p.size(), q.size());
  rng.shuffle(p);
  rng.shuffle(q);
  p.resize(n);
  q.resize(n);

  const auto n_train = static_cast<std::size_t>(std::floor(split * static_cast<double>(n)));
  const std::size_t n_test = n - n_train;
  if (n_train == 0 || n_test == 0) {
    throw std::invalid_argument(
        fmt::format("split {} of {} balanced samples leaves a class with no training or test documents", split, n));
  }
  est.n_train = n_train;
  est.n_test = n_test;

  std::size_t outcomes = 0;
  for (auto x : p) outcomes = std::max(outcomes, x + 1);
  for (auto x : q) outcomes = std::max(outcomes, x + 1);

  std::vector<std::size_t> count_p(outcomes, 0);
  std::vector<std::size_t> count_q(outcomes, 0);
  for (std::size_t i = 0; i < n_train; ++i) {
    ++count_p[p[i]];
    ++count_q[q[i]];
  }
  auto predicts_p = [&](std::size_t x) { return count_p[x] >= count_q[x]; };

  std::size_t correct_p = 0;
  std::size_t correct_q = 0;
  for (std::size_t i = n_train; i < n; ++i) {
    if (predicts_p(p[i])) ++correct_p;
    if (!predicts_p(q[i])) ++correct_q;
  }
  const double nt = static_cast<double>(n_test);
  est.accuracy_hat = 0.5 * (static_cast<double>(correct_p) / nt + static_cast<double>(correct_q) / nt);
  const double raw = 2.0 * est.accuracy_hat - 1.0;
  est.clipped = raw < 0.0;
  est.tv_lower_bound = std::clamp(raw, 0.0, 1.0);
  return est;
}

TvAdvisory direction_guard(const TvEstimate& estimate, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
  if (estimate.n_test == 0) throw std::invalid_argument("estimate has no test documents");

  TvAdvisory a;
  a.beta = beta;
  a.noise_halfwidth = 3.0 / std::sqrt(static_cast<double>(estimate.n_test));
  a.fpr_floor_with_lower_tv = std::max(0.0, beta - estimate.tv_lower_bound);
  a.floor_valid = false;

  const double excess = estimate.accuracy_hat - 0.5;
  if (excess <= 0.0) {
    a.conclusion = TvConclusion::kNoEvidenceOfSmallTv;
    a.message =
        "Classifier accuracy is at or below chance. This is not evidence that TV is small: a weak classifier "
        "says nothing unless it is near Bayes-optimal for these distributions.";
  } else if (excess <= a.noise_halfwidth) {
    a.conclusion = TvConclusion::kWithinSamplingNoise;
    a.message = fmt::format(
        "Accuracy exceeds chance by {:.4g}, inside the sampling-noise half-width {:.4g} (3/sqrt(n_test)); "
        "no conclusion about TV can be drawn at this sample size.",
        excess, a.noise_halfwidth);
  } else if (estimate.tv_lower_bound >= beta) {
    a.conclusion = TvConclusion::kDetectionMayBeFeasible;
    a.message = fmt::format(
        "TV >= {:.4g} >= power {:.4g}: the subgroup FPR floor is vacuous here, which identifies a subgroup where "
        "detection may be feasible.",
        estimate.tv_lower_bound, beta);
  } else {
    a.conclusion = TvConclusion::kLowerBoundOnly;
    a.message = fmt::format(
        "TV >= {:.4g}. This is a lower bound on TV; an FPR floor needs an upper bound on TV, so "
        "max(0, power - bound) = {:.4g} is NOT a valid FPR floor.",
        estimate.tv_lower_bound, a.fpr_floor_with_lower_tv);
  }
  return a;
}

std::string to_string(TvConclusion c) {
  switch (c) {
    case TvConclusion::kNoEvidenceOfSmallTv:
      return "no-evidence-of-small-tv";
    case TvConclusion::kWithinSamplingNoise:
      return "within-sampling-noise";
    case TvConclusion::kLowerBoundOnly:
      return "lower-bound-only";
    case TvConclusion::kDetectionMayBeFeasible:
      return "detection-may-be-feasible";
  }
  return "unknown";
}

std::string to_string(DirectionNote) { return "lower-bound-only"; }

}  // namespace detlimits
