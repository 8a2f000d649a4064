#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "detlimits/distributions.hpp"
#include "detlimits/errors.hpp"
#include "detlimits/random.hpp"
#include "oracles.hpp"

using namespace detlimits;

namespace {

PopulationModel three_students(const SpacePtr& space) {
  // TVs to ai = [0.6, 0.4] are 0.02, 0.05 and 0.30.
  std::vector<StudentType> s{
      {"near", Pmf(space, {0.62, 0.38}), "L2", "essay"},
      {"edge", Pmf(space, {0.65, 0.35}), "L2", "essay"},
      {"far", Pmf(space, {0.9, 0.1}), "L1", "essay"},
  };
  return PopulationModel(std::move(s), {0.2, 0.3, 0.5});
}

}  // namespace

TEST_SUITE("sample space and pmf") {
  TEST_CASE("space validation") {
    CHECK_THROWS_AS(SampleSpace(0), std::invalid_argument);
    CHECK_THROWS_AS(SampleSpace(std::vector<std::string>{"a", "a"}), std::invalid_argument);
    SampleSpace labelled({"a", "b", "c"});
    CHECK(labelled.size() == 3);
    CHECK(labelled.find("c") == 2u);
    CHECK_FALSE(labelled.find("z").has_value());
    CHECK(SampleSpace(3).label(1) == "1");
  }

  TEST_CASE("pmf construction rejects bad mass") {
    auto space = make_space(2);
    CHECK_THROWS_AS(Pmf(space, {0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(Pmf(space, {1.5, -0.5}), std::invalid_argument);
    CHECK_THROWS_AS(Pmf(space, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Pmf(space, {NAN, 1.0}), std::invalid_argument);
    // Within 1e-9 the total is divided out.
    Pmf near(space, {0.5 + 4e-10, 0.5});
    CHECK(near[0] + near[1] == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("random pmfs are valid") {
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
      auto space = make_space(1 + rng.uniform_index(20));
      Pmf p = Pmf::random(space, rng);
      double total = 0.0;
      for (double m : p.mass()) {
        CHECK(m >= 0.0);
        total += m;
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_SUITE("tv_distance") {
  TEST_CASE("examples") {
    auto space = make_space(2);
    Pmf p(space, {0.5, 0.5});
    CHECK(tv_distance(p, p) == 0.0);
    CHECK(tv_distance(Pmf::point_mass(space, 0), Pmf::point_mass(space, 1)) == 1.0);
    // 0.5 * (|0.5 - 0.9| + |0.5 - 0.1|) = 0.4
    CHECK(tv_distance(p, Pmf(space, {0.9, 0.1})) == doctest::Approx(0.4).epsilon(1e-15));
  }

  TEST_CASE("mismatched spaces are incomparable") {
    Pmf a = Pmf::uniform(make_space(2));
    Pmf b = Pmf::uniform(make_space(3));
    CHECK_THROWS_AS(tv_distance(a, b), SpaceMismatchError);
    Pmf c = Pmf::uniform(make_space(std::vector<std::string>{"x", "y"}));
    CHECK_THROWS_AS(tv_distance(a, c), SpaceMismatchError);
  }

  TEST_CASE("metric axioms on random triples") {
    Rng rng(11);
    for (int t = 0; t < 500; ++t) {
      auto space = make_space(2 + rng.uniform_index(19));
      Pmf p = oracle::random_pmf(space, rng);
      Pmf q = oracle::random_pmf(space, rng);
      Pmf r = oracle::random_pmf(space, rng);
      const double pq = tv_distance(p, q);
      CHECK(pq >= 0.0);
      CHECK(pq <= 1.0);
      CHECK(tv_distance(p, p) <= 1e-12);
      CHECK(pq == tv_distance(q, p));
      CHECK(pq <= tv_distance(p, r) + tv_distance(r, q) + 1e-12);
    }
  }

  TEST_CASE("half-L1 equals the supremum over events") {
    Rng rng(12);
    for (int t = 0; t < 300; ++t) {
      auto space = make_space(1 + rng.uniform_index(12));
      Pmf p = oracle::random_pmf(space, rng);
      Pmf q = oracle::random_pmf(space, rng);
      CHECK(std::abs(tv_distance(p, q) - oracle::tv_by_subsets(p, q)) <= 1e-12);
    }
  }
}

TEST_SUITE("mixture") {
  TEST_CASE("examples") {
    auto space = make_space(2);
    Pmf p(space, {0.3, 0.7});
    std::vector<Pmf> single{p};
    CHECK(tv_distance(mixture(single, std::vector<double>{1.0}), p) == 0.0);
    std::vector<Pmf> twice{p, p};
    CHECK(tv_distance(mixture(twice, std::vector<double>{0.3, 0.7}), p) <= 1e-15);
    std::vector<Pmf> corners{Pmf::point_mass(space, 0), Pmf::point_mass(space, 1)};
    Pmf m = mixture(corners, std::vector<double>{0.25, 0.75});
    CHECK(m[0] == 0.25);
    CHECK(m[1] == 0.75);
  }

  TEST_CASE("errors") {
    auto space = make_space(2);
    std::vector<Pmf> none;
    CHECK_THROWS_AS(mixture(none, std::vector<double>{}), std::invalid_argument);
    std::vector<Pmf> two{Pmf::uniform(space), Pmf::uniform(space)};
    CHECK_THROWS_AS(mixture(two, std::vector<double>{0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(mixture(two, std::vector<double>{1.5, -0.5}), std::invalid_argument);
    std::vector<Pmf> mixed{Pmf::uniform(space), Pmf::uniform(make_space(3))};
    CHECK_THROWS_AS(mixture(mixed, std::vector<double>{0.5, 0.5}), SpaceMismatchError);
  }
}

TEST_SUITE("population") {
  TEST_CASE("validation") {
    auto space = make_space(2);
    Pmf p = Pmf::uniform(space);
    CHECK_THROWS_AS(PopulationModel({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(PopulationModel({{"a", p, "g", "t"}}, {0.9}), std::invalid_argument);
    CHECK_THROWS_AS(PopulationModel({{"a", p, "g", "t"}, {"a", p, "g", "t"}}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(PopulationModel({{"a", p, "g", "t"}, {"b", Pmf::uniform(make_space(3)), "g", "t"}}, {0.5, 0.5}),
                    SpaceMismatchError);
  }

  TEST_CASE("subgroup mixture examples") {
    auto space = make_space(2);
    Pmf a = Pmf::point_mass(space, 0);
    Pmf b = Pmf::point_mass(space, 1);
    PopulationModel pop({{"a", a, "G1", "t"}, {"b", b, "G1", "t"}, {"c", Pmf(space, {0.3, 0.7}), "G2", "t"}},
                        {0.25, 0.25, 0.5});
    Pmf g1 = subgroup_mixture(pop, "G1");
    CHECK(g1[0] == 0.5);
    CHECK(g1[1] == 0.5);
    CHECK(tv_distance(subgroup_mixture(pop, "G2"), pop.students()[2].pmf) == 0.0);
    CHECK(pop.subgroup_weight("G1") == 0.5);
    CHECK_THROWS_AS(subgroup_mixture(pop, "nope"), std::invalid_argument);

    PopulationModel zero({{"a", a, "G1", "t"}, {"b", b, "G2", "t"}}, {1.0, 0.0});
    CHECK_THROWS_AS(subgroup_mixture(zero, "G2"), std::invalid_argument);

    Pmf same(space, {0.2, 0.8});
    PopulationModel identical({{"x", same, "G", "t"}, {"y", same, "G", "t"}, {"z", same, "G", "t"}},
                              {1.0 / 3, 1.0 / 3, 1.0 / 3});
    CHECK(tv_distance(subgroup_mixture(identical, "G"), same) <= 1e-15);
  }

  TEST_CASE("for_task renormalizes within the task") {
    auto space = make_space(2);
    Pmf p = Pmf::uniform(space);
    PopulationModel pop({{"a", p, "G", "essay"}, {"b", p, "G", "summary"}, {"c", p, "H", "essay"}}, {0.2, 0.5, 0.3});
    CHECK(pop.tasks() == std::vector<std::string>{"essay", "summary"});
    auto essay = pop.for_task("essay");
    CHECK(essay.size() == 2);
    CHECK(essay.weights()[0] == doctest::Approx(0.4));
    CHECK(essay.weights()[1] == doctest::Approx(0.6));
    CHECK_THROWS_AS(pop.for_task("exam"), std::invalid_argument);
  }
}

TEST_SUITE("overlap") {
  TEST_CASE("overlap set and mass examples") {
    auto space = make_space(2);
    const auto pop = three_students(space);
    Pmf ai(space, {0.6, 0.4});
    CHECK(overlap_set(pop, ai, 0.05) == std::vector<std::string>{"near", "edge"});
    CHECK(overlap_mass(pop, ai, 0.05) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(overlap_set(pop, ai, 1.0).size() == 3);
    CHECK(overlap_mass(pop, ai, 1.0) == doctest::Approx(1.0));
    CHECK(overlap_set(pop, ai, 0.0).empty());
    CHECK(overlap_mass(pop, ai, 0.0) == 0.0);
    CHECK_THROWS_AS(overlap_set(pop, ai, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(overlap_mass(pop, ai, -0.1), std::invalid_argument);
  }

  TEST_CASE("overlap mass is non-decreasing in delta") {
    Rng rng(21);
    for (int t = 0; t < 200; ++t) {
      auto space = make_space(2 + rng.uniform_index(10));
      const std::size_t n = 1 + rng.uniform_index(8);
      std::vector<StudentType> s;
      for (std::size_t i = 0; i < n; ++i) s.push_back({"s" + std::to_string(i), Pmf::random(space, rng), "G", "t"});
      PopulationModel pop(std::move(s), rng.simplex(n));
      Pmf ai = Pmf::random(space, rng);
      double prev_mass = -1.0;
      std::size_t prev_size = 0;
      for (double d = 0.0; d <= 1.0; d += 0.01) {
        const double m = overlap_mass(pop, ai, d);
        const auto ids = overlap_set(pop, ai, d);
        CHECK(m >= prev_mass);
        CHECK(ids.size() >= prev_size);
        prev_mass = m;
        prev_size = ids.size();
      }
    }
  }

  TEST_CASE("mixture TV is at most the average member TV") {
    Rng rng(22);
    for (int t = 0; t < 300; ++t) {
      auto space = make_space(2 + rng.uniform_index(15));
      const std::size_t n = 1 + rng.uniform_index(6);
      std::vector<StudentType> s;
      for (std::size_t i = 0; i < n; ++i) s.push_back({"s" + std::to_string(i), oracle::random_pmf(space, rng), "G", "t"});
      PopulationModel pop(std::move(s), rng.simplex(n));
      Pmf ai = oracle::random_pmf(space, rng);
      double avg = 0.0;
      for (std::size_t i = 0; i < n; ++i) avg += pop.weights()[i] * tv_distance(pop.students()[i].pmf, ai);
      CHECK(tv_distance(subgroup_mixture(pop, "G"), ai) <= avg + 1e-12);
    }
  }
}
