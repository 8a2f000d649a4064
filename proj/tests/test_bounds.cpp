#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "detlimits/bounds.hpp"
#include "detlimits/detectors.hpp"
#include "detlimits/random.hpp"

using namespace detlimits;
using Q = boost::rational<long long>;

TEST_CASE("average-case floor, worked example") {
  // pi = 0.10, beta0 = 0.80, delta = 0.05
  const Q exact = avg_case_fpr_lower_bound(Q(1, 10), Q(80, 100), Q(5, 100));
  CHECK(exact == Q(3, 40));
  CHECK(expected_false_accusations(exact, 10000) == Q(750));

  const double d = avg_case_fpr_lower_bound(0.10, 0.80, 0.05);
  CHECK(std::abs(d - 0.075) <= 2e-17);
  CHECK(std::round(expected_false_accusations(d, 10000)) == 750.0);
}

TEST_CASE("average-case floor, degenerate inputs") {
  CHECK(avg_case_fpr_lower_bound(0.0, 0.9, 0.1) == 0.0);
  CHECK(avg_case_fpr_lower_bound(0.5, 0.3, 0.3) == 0.0);
  CHECK(avg_case_fpr_lower_bound(0.5, 0.2, 0.4) == 0.0);  // clipped
  CHECK(avg_case_fpr_lower_bound(1.0, 1.0, 0.0) == 1.0);
  CHECK_THROWS_AS(avg_case_fpr_lower_bound(1.1, 0.5, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(avg_case_fpr_lower_bound(0.5, -0.1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(avg_case_fpr_lower_bound(0.5, 0.5, std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(expected_false_accusations(0.1, -1), std::invalid_argument);
}

TEST_CASE("worst-case power cap") {
  CHECK(worst_case_power_cap(Q(1, 100), Q(5, 100)) == Q(6, 100));
  CHECK(std::abs(worst_case_power_cap(0.01, 0.05) - 0.06) <= 1e-17);
  CHECK(worst_case_power_cap(0.0, 0.0) == 0.0);
  CHECK(worst_case_power_cap(0.7, 0.6) == 1.0);
  CHECK_THROWS_AS(worst_case_power_cap(0.1, 1.5), std::invalid_argument);
}

TEST_CASE("subgroup and institution floors") {
  CHECK(subgroup_fpr_lower_bound(0.8, 0.3) == doctest::Approx(0.5));
  CHECK(subgroup_fpr_lower_bound(0.2, 0.3) == 0.0);
  CHECK(subgroup_fpr_lower_bound(Q(4, 5), Q(3, 10)) == Q(1, 2));

  auto inst = institution_fpr_lower_bound({{"A", 0.5, 0.1}, {"B", 0.5, 0.9}}, 0.8);
  CHECK(inst.literal == doctest::Approx(0.5 * 0.7 + 0.5 * -0.1));
  CHECK(inst.clipped == doctest::Approx(0.35));
  CHECK(inst.clipped >= inst.literal);
  CHECK(inst.terms.size() == 2);
  CHECK_THROWS_AS(institution_fpr_lower_bound(std::vector<SubgroupTerm>{}, 0.8), std::invalid_argument);
}

TEST_CASE("delta_star and population institution bound") {
  auto space = make_space(2);
  Pmf ai(space, {0.6, 0.4});
  PopulationModel pop({{"a", Pmf(space, {0.62, 0.38}), "G1", "t"},
                       {"b", Pmf(space, {0.9, 0.1}), "G2", "t"}},
                      {0.5, 0.5});
  CHECK(delta_star(pop, ai) == doctest::Approx(0.02));
  auto inst = institution_fpr_lower_bound(pop, ai, 0.8);
  REQUIRE(inst.terms.size() == 2);
  CHECK(inst.terms[0].subgroup == "G1");
  CHECK(inst.terms[0].tv == doctest::Approx(0.02));
  CHECK(inst.clipped == doctest::Approx(0.5 * 0.78 + 0.5 * 0.5));
}

TEST_CASE("linear axis") {
  const auto axis = linear_axis(0.0, 0.4, 80);
  REQUIRE(axis.size() == 81);
  CHECK(axis.front() == 0.0);
  CHECK(axis.back() == 0.4);
  CHECK(axis[10] == 0.05);
  CHECK(linear_axis(0.3, 0.3, 0).size() == 1);
  CHECK_THROWS_AS(linear_axis(1.0, 0.0, 3), std::invalid_argument);
}

TEST_CASE("bound map grid") {
  const auto grid = default_bound_map();
  REQUIRE(grid.pi_axis.size() == 101);
  REQUIRE(grid.delta_axis.size() == 81);
  CHECK(grid.pi_axis[20] == 0.1);
  CHECK(grid.delta_axis[10] == 0.05);
  CHECK(std::abs(grid.values[20][10] - 0.075) <= 2e-17);

  for (std::size_t i = 0; i < grid.pi_axis.size(); ++i) {
    for (std::size_t j = 0; j < grid.delta_axis.size(); ++j) {
      const double v = grid.values[i][j];
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      if (i > 0) CHECK(v >= grid.values[i - 1][j]);
      if (j > 0) CHECK(v <= grid.values[i][j - 1]);
    }
  }
}

TEST_CASE("bound map csv") {
  const auto grid = default_bound_map();
  const std::string csv = bound_map_csv(grid);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "pi,delta,bound");
  std::size_t rows = 0;
  bool marked = false;
  while (std::getline(in, line)) {
    ++rows;
    marked = marked || line == "0.1,0.05,0.075";
  }
  CHECK(rows == 101 * 81);
  CHECK(marked);
  CHECK(bound_map_csv(grid) == csv);
}

TEST_CASE("floor is attained or exceeded by every detector on random instances") {
  // pi* (beta - delta) is a floor for any phi with power beta; check against
  // direct computation on small populations.
  Rng rng(31);
  for (int t = 0; t < 300; ++t) {
    auto space = make_space(2 + rng.uniform_index(8));
    Pmf ai = Pmf::random(space, rng);
    const std::size_t n = 1 + rng.uniform_index(5);
    std::vector<StudentType> s;
    for (std::size_t i = 0; i < n; ++i) s.push_back({"s" + std::to_string(i), Pmf::random(space, rng), "G", "t"});
    PopulationModel pop(std::move(s), rng.simplex(n));
    const Detector phi = random_detector(space, rng);
    const double delta = rng.uniform01() * 0.5;
    double avg = 0.0;
    for (std::size_t i = 0; i < n; ++i) avg += pop.weights()[i] * fpr(phi, pop.students()[i].pmf);
    const double floor = avg_case_fpr_lower_bound(overlap_mass(pop, ai, delta), power(phi, ai), delta);
    CHECK(avg >= floor - 1e-12);
  }
}
