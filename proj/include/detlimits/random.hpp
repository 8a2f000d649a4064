#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace detlimits {

/// Seeded random stream. Every stream is identified by (seed, stream index) so
/// independent trials get independent generators and results can be replayed.
///
/// Only std::mt19937_64 and std::seed_seq are used from <random>; both are
/// fully specified by the standard, so a given (seed, stream) yields the same
/// numbers on every conforming platform. The distribution helpers below are
/// written against the raw engine output for the same reason.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  bool bernoulli(double p) { return uniform01() < p; }

  /// Draws an index with probability proportional to `weights` (inverse CDF).
  /// Weights are assumed nonnegative with a positive sum.
  std::size_t categorical(std::span<const double> weights);

  /// Uniform point on the probability simplex of dimension n, from the spacings
  /// of n-1 sorted uniforms.
  std::vector<double> simplex(std::size_t n);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace detlimits
