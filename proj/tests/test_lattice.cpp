#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dflow/lattice.hpp"
#include "dflow/random.hpp"

using namespace dflow;

namespace {

// Independent l2: centers from (k + 1/2) / N, summed over every cube.
double l2_by_summation(const Permutation& p, const Permutation& q) {
  const Tiling& t = p.tiling();
  double sum = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const CubeId a = t.coords(p(k)), b = t.coords(q(k));
    for (int i = 0; i < t.nu(); ++i) {
      const double d = (a[i] - b[i]) / static_cast<double>(t.n());
      sum += d * d;
    }
  }
  return std::sqrt(sum / std::pow(t.n(), t.nu()));
}

Permutation swap_of(const Tiling& t, const CubeId& a, const CubeId& b) {
  std::vector<std::int32_t> tab(t.size());
  std::iota(tab.begin(), tab.end(), 0);
  std::swap(tab[t.index(a)], tab[t.index(b)]);
  return Permutation(t, tab);
}

std::vector<Permutation> all_2x2() {
  const Tiling t(2, 2);
  std::vector<std::int32_t> tab = {0, 1, 2, 3};
  std::vector<Permutation> out;
  do out.emplace_back(t, tab);
  while (std::next_permutation(tab.begin(), tab.end()));
  return out;
}

}  // namespace

TEST_SUITE("lattice") {
  TEST_CASE("cube centers") {
    const Tiling t2(2, 2);
    CHECK(cube_center(t2, {0, 0}) == Point{0.25, 0.25});
    CHECK(cube_center(t2, {1, 1}) == Point{0.75, 0.75});
    const Tiling t3(3, 4);
    CHECK(cube_center(t3, {3, 0, 2}) == Point{0.875, 0.125, 0.625});
  }

  TEST_CASE("adjacency") {
    const Tiling t(2, 4);
    CHECK(are_adjacent(t, CubeId{0, 0}, CubeId{0, 1}));
    CHECK_FALSE(are_adjacent(t, CubeId{0, 0}, CubeId{1, 1}));
    CHECK_FALSE(are_adjacent(t, CubeId{0, 0}, CubeId{0, 0}));
  }

  TEST_CASE("index and coords round trip") {
    const Tiling t(3, 5);
    for (std::size_t k = 0; k < t.size(); ++k) CHECK(t.index(t.coords(k)) == k);
    CHECK_THROWS_AS(t.index({5, 0, 0}), InvalidCubeError);
  }

  TEST_CASE("l2 examples") {
    const Tiling t2(2, 2);
    CHECK(l2_distance(Permutation::identity(t2), Permutation::identity(t2)) == 0.0);
    CHECK(l2_to_identity(swap_of(t2, {0, 0}, {0, 1})) == doctest::Approx(std::sqrt(0.125)).epsilon(1e-14));
    const Tiling t4(2, 4);
    const Permutation far = swap_of(t4, {0, 0}, {0, 3});
    CHECK(l2_to_identity(far) == doctest::Approx(0.265165042944955).epsilon(1e-12));
    CHECK(l2_to_identity(far) == doctest::Approx(l2_by_summation(far, Permutation::identity(t4))).epsilon(1e-14));
  }

  TEST_CASE("l2 matches direct summation on random permutations") {
    CounterRng rng(3);
    for (int nu : {1, 2, 3}) {
      const Tiling t(nu, nu == 3 ? 4 : 6);
      for (int i = 0; i < 20; ++i) {
        const Permutation p = random_permutation(t, rng), q = random_permutation(t, rng);
        CHECK(l2_distance(p, q) == doctest::Approx(l2_by_summation(p, q)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("adjacent swap family scales as sqrt(2 N^(-nu-2))") {
    for (int n : {2, 4, 8, 16, 32}) {
      const Tiling t(2, n);
      const double expect = std::sqrt(2.0 * std::pow(n, -4.0));
      CHECK(l2_to_identity(swap_of(t, {0, 0}, {0, 1})) == doctest::Approx(expect).epsilon(1e-13));
    }
  }

  TEST_CASE("l2 is a left-invariant metric on the 2x2 tiling") {
    const auto perms = all_2x2();
    for (const auto& p : perms)
      for (const auto& q : perms) {
        const double d = l2_distance(p, q);
        CHECK(d == doctest::Approx(l2_distance(q, p)).epsilon(1e-15));
        CHECK(d == doctest::Approx(l2_distance(compose(p, invert(q)), Permutation::identity(p.tiling()))).epsilon(1e-14));
        CHECK((d == 0.0) == (p == q));
        for (const auto& r : perms) CHECK(d <= l2_distance(p, r) + l2_distance(r, q) + 1e-15);
      }
  }

  TEST_CASE("compose and invert") {
    const Tiling t(2, 4);
    CounterRng rng(9);
    const Permutation p = random_permutation(t, rng);
    CHECK(compose(Permutation::identity(t), p) == p);
    CHECK(compose(p, invert(p)).is_identity());
    const Permutation s1 = swap_of(t, {0, 0}, {0, 1}), s2 = swap_of(t, {2, 2}, {3, 2});
    CHECK(compose(s1, s2).moved_count() == 4);
  }

  TEST_CASE("bijection check agrees with a sort-based oracle") {
    CounterRng rng(5);
    for (int i = 0; i < 200; ++i) {
      std::vector<std::int32_t> tab(9);
      for (auto& x : tab) x = static_cast<std::int32_t>(rng.below(9));
      auto sorted = tab;
      std::sort(sorted.begin(), sorted.end());
      const bool distinct = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
      CHECK(bijection_violation(tab.size(), tab).empty() == distinct);
      if (distinct)
        CHECK_NOTHROW(Permutation(Tiling(2, 3), tab));
      else
        CHECK_THROWS(Permutation(Tiling(2, 3), tab));
    }
  }

  TEST_CASE("region enumeration") {
    const Tiling t(2, 4);
    CHECK(region_cubes(t, Box({1, 2}, {1, 2})).size() == 1);
    CHECK(region_cubes(t, Box({0, 0}, {3, 0})) == std::vector<CubeId>{{0, 0}, {1, 0}, {2, 0}, {3, 0}});
    CHECK(region_cubes(t, Box({0, 0}, {1, 1})) == std::vector<CubeId>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    CHECK(Box({0, 0}, {3, 0}).kind() == Box::Kind::Array);
  }

  TEST_CASE("permutation text round trip") {
    const Tiling t(3, 4);
    CounterRng rng(12);
    const Permutation p = random_permutation(t, rng);
    std::stringstream ss;
    write_permutation(ss, p);
    CHECK(read_permutation(ss) == p);
  }
}
