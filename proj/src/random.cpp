#include "detlimits/random.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace detlimits {

namespace {
std::seed_seq make_seed_seq(std::uint64_t seed, std::uint64_t stream) {
  return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
}
}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  auto seq = make_seed_seq(seed, stream);
  engine_.seed(seq);
}

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = uniform01() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    acc += weights[i];
    if (u < acc) return i;
  }
  return last_positive;
}

std::vector<double> Rng::simplex(std::size_t n) {
  if (n == 0) throw std::invalid_argument("simplex: dimension must be positive");
  std::vector<double> cuts(n - 1);
  for (double& c : cuts) c = uniform01();
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> out(n);
  double prev = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    out[i] = cuts[i] - prev;
    prev = cuts[i];
  }
  out[n - 1] = 1.0 - prev;
  return out;
}

}  // namespace detlimits
