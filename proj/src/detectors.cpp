#include "detlimits/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "detlimits/random.hpp"

namespace detlimits {

Detector::Detector(SpacePtr space, std::vector<double> accept) : space_(std::move(space)), accept_(std::move(accept)) {
  if (!space_) throw std::invalid_argument("detector requires a sample space");
  if (accept_.size() != space_->size()) {
    throw std::invalid_argument(
        fmt::format("detector has {} entries but the sample space has {} outcomes", accept_.size(), space_->size()));
  }
  for (std::size_t i = 0; i < accept_.size(); ++i) {
    if (!(accept_[i] >= 0.0 && accept_[i] <= 1.0)) {
      throw std::invalid_argument(fmt::format("detector entry {} is outside [0, 1]", i));
    }
  }
}

Detector Detector::never(SpacePtr space) {
  const auto n = space->size();
  return Detector(std::move(space), std::vector<double>(n, 0.0));
}

Detector Detector::always(SpacePtr space) {
  const auto n = space->size();
  return Detector(std::move(space), std::vector<double>(n, 1.0));
}

Detector Detector::scaled(double c) const {
  if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("detector scale must lie in [0, 1]");
  std::vector<double> out(accept_);
  for (double& a : out) a *= c;
  return Detector(space_, std::move(out));
}

Detector blend(double lambda, const Detector& a, const Detector& b) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("blend weight must lie in [0, 1]");
  require_same_space(a.space(), b.space(), "blend");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp(lambda * a[i] + (1.0 - lambda) * b[i], 0.0, 1.0);
  }
  return Detector(a.space_ptr(), std::move(out));
}

double expected_response(const Detector& phi, const Pmf& p) {
  require_same_space(phi.space(), p.space(), "expected_response");
  double e = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) e += p[i] * phi[i];
  return std::clamp(e, 0.0, 1.0);
}

Detector optimal_detector(const Pmf& student, const Pmf& ai) {
  require_same_space(student.space(), ai.space(), "optimal_detector");
  std::vector<double> accept(student.size(), 0.0);
  for (std::size_t i = 0; i < accept.size(); ++i) {
    if (ai[i] > student[i]) accept[i] = 1.0;
  }
  return Detector(student.space_ptr(), std::move(accept));
}

Detector threshold_detector(SpacePtr space, std::span<const double> scores, double threshold) {
  if (scores.size() != space->size()) throw std::invalid_argument("one score per outcome is required");
  std::vector<double> accept(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) accept[i] = scores[i] >= threshold ? 1.0 : 0.0;
  return Detector(std::move(space), std::move(accept));
}

Detector random_detector(SpacePtr space, Rng& rng) {
  std::vector<double> accept(space->size());
  for (double& a : accept) a = rng.uniform01();
  return Detector(std::move(space), std::move(accept));
}

Detector random_detector(SpacePtr space, std::uint64_t seed) {
  Rng rng(seed);
  return random_detector(std::move(space), rng);
}

}  // namespace detlimits
