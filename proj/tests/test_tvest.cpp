#include <doctest.h>

#include <cmath>
#include <vector>

#include "detlimits/random.hpp"
#include "detlimits/tvest.hpp"
#include "oracles.hpp"

using namespace detlimits;

namespace {

std::vector<std::size_t> draw(const Pmf& p, std::size_t n, Rng& rng) {
  std::vector<std::size_t> out(n);
  for (auto& x : out) x = rng.categorical(p.mass());
  return out;
}

}  // namespace

TEST_CASE("bayes accuracy examples") {
  auto space = make_space(2);
  Pmf p(space, {0.5, 0.5});
  CHECK(bayes_accuracy(p, p) == 0.5);
  CHECK(bayes_accuracy(Pmf::point_mass(space, 0), Pmf::point_mass(space, 1)) == 1.0);
  CHECK(bayes_accuracy(p, Pmf(space, {0.9, 0.1})) == doctest::Approx(0.7));
}

TEST_CASE("bayes accuracy equals (1 + TV) / 2 and the best classifier") {
  Rng rng(8);
  for (int t = 0; t < 500; ++t) {
    auto space = make_space(1 + rng.uniform_index(12));
    const Pmf p = oracle::random_pmf(space, rng);
    const Pmf q = oracle::random_pmf(space, rng);
    const double acc = bayes_accuracy(p, q);
    CHECK(std::abs(acc - 0.5 * (1.0 + tv_distance(p, q))) <= 1e-12);
    CHECK(std::abs(acc - oracle::bayes_accuracy_by_enumeration(p, q)) <= 1e-12);
  }
}

TEST_CASE("plug-in classifier bookkeeping") {
  const std::vector<std::size_t> p(100, 0);
  const std::vector<std::size_t> q(60, 1);
  const auto est = plugin_classifier_accuracy(p, q, 0.5, 1);
  CHECK(est.n_p_input == 100);
  CHECK(est.n_q_input == 60);
  CHECK(est.n_train == 30);
  CHECK(est.n_test == 30);
  CHECK(est.accuracy_hat == 1.0);
  CHECK(est.tv_lower_bound == 1.0);
  CHECK_FALSE(est.clipped);
  CHECK(to_string(est.direction_note) == "lower-bound-only");

  CHECK_THROWS_AS(plugin_classifier_accuracy(std::vector<std::size_t>{}, q, 0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(plugin_classifier_accuracy(p, q, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(plugin_classifier_accuracy(std::vector<std::size_t>{0}, std::vector<std::size_t>{1}, 0.5, 1),
                  std::invalid_argument);
}

TEST_CASE("identical distributions give a clipped or near-zero bound") {
  auto space = make_space(5);
  Rng rng(9);
  const Pmf p = Pmf::random(space, rng);
  const auto a = draw(p, 2000, rng);
  const auto b = draw(p, 2000, rng);
  const auto est = plugin_classifier_accuracy(a, b, 0.5, 3);
  CHECK(est.tv_lower_bound <= 4.0 / std::sqrt(static_cast<double>(est.n_test)));
  CHECK(est.tv_lower_bound >= 0.0);
}

TEST_CASE("plug-in bound rarely exceeds TV by more than the noise allowance") {
  Rng rng(10);
  int fine = 0;
  const int runs = 200;
  for (int r = 0; r < runs; ++r) {
    auto space = make_space(2 + rng.uniform_index(8));
    const Pmf p = Pmf::random(space, rng);
    const Pmf q = Pmf::random(space, rng);
    const auto est = plugin_classifier_accuracy(draw(p, 1000, rng), draw(q, 1000, rng), 0.5, rng.next_u64());
    if (est.tv_lower_bound <= tv_distance(p, q) + 4.0 / std::sqrt(static_cast<double>(est.n_test))) ++fine;
  }
  CHECK(fine >= runs * 99 / 100);
}

TEST_CASE("plug-in estimate is reproducible") {
  Rng rng(12);
  auto space = make_space(6);
  const auto a = draw(Pmf::random(space, rng), 500, rng);
  const auto b = draw(Pmf::random(space, rng), 400, rng);
  const auto x = plugin_classifier_accuracy(a, b, 0.6, 77);
  const auto y = plugin_classifier_accuracy(a, b, 0.6, 77);
  CHECK(x.accuracy_hat == y.accuracy_hat);
  CHECK(x.n_train == 240);
  CHECK(x.n_test == 160);
}

TEST_CASE("direction guard") {
  TvEstimate e;
  e.n_test = 400;  // noise half-width 0.15
  e.accuracy_hat = 0.45;
  e.tv_lower_bound = 0.0;
  auto a = direction_guard(e, 0.8);
  CHECK(a.conclusion == TvConclusion::kNoEvidenceOfSmallTv);
  CHECK_FALSE(a.floor_valid);
  CHECK(a.noise_halfwidth == doctest::Approx(0.15));

  e.accuracy_hat = 0.6;
  e.tv_lower_bound = 0.2;
  CHECK(direction_guard(e, 0.8).conclusion == TvConclusion::kWithinSamplingNoise);

  e.accuracy_hat = 0.75;
  e.tv_lower_bound = 0.5;
  a = direction_guard(e, 0.8);
  CHECK(a.conclusion == TvConclusion::kLowerBoundOnly);
  CHECK(a.fpr_floor_with_lower_tv == doctest::Approx(0.3));
  CHECK_FALSE(a.floor_valid);
  CHECK(a.message.find("NOT a valid FPR floor") != std::string::npos);

  e.accuracy_hat = 0.95;
  e.tv_lower_bound = 0.9;
  a = direction_guard(e, 0.8);
  CHECK(a.conclusion == TvConclusion::kDetectionMayBeFeasible);
  CHECK(a.fpr_floor_with_lower_tv == 0.0);
  CHECK(to_string(a.conclusion) == "detection-may-be-feasible");
  CHECK_THROWS_AS(direction_guard(e, 1.5), std::invalid_argument);
}
