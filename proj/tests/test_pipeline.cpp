#include <doctest.h>

#include <cmath>
#include <numeric>

#include "dflow/pipeline.hpp"
#include "dflow/random.hpp"

using namespace dflow;

namespace {

Permutation transposition(const Tiling& t, const CubeId& a, const CubeId& b) {
  std::vector<std::int32_t> tab(t.size());
  std::iota(tab.begin(), tab.end(), 0);
  std::swap(tab[t.index(a)], tab[t.index(b)]);
  return Permutation(t, tab);
}

// Translates coarse cube A onto coarse cube B and back, fine structure untouched.
Permutation coarse_swap(const Tiling& t, int fine, const CubeId& a, const CubeId& b) {
  std::vector<std::int32_t> tab(t.size());
  std::iota(tab.begin(), tab.end(), 0);
  for (int i = 0; i < fine; ++i)
    for (int j = 0; j < fine; ++j) {
      const auto x = t.index({a[0] * fine + i, a[1] * fine + j});
      const auto y = t.index({b[0] * fine + i, b[1] * fine + j});
      tab[x] = static_cast<std::int32_t>(y);
      tab[y] = static_cast<std::int32_t>(x);
    }
  return Permutation(t, tab);
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("epsilon choice") {
    CHECK(choose_epsilon(2, 0.05) == doctest::Approx(2.0 / 7.0).epsilon(1e-15));
    CHECK(choose_epsilon(3, 0.05) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(choose_epsilon(5, 0.05) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  }

  TEST_CASE("coarse side is a dyadic divisor below delta^-eps") {
    CHECK(coarse_side(64, 0.05, 2.0 / 7.0) == 2);
    CHECK(coarse_side(64, 0.001, 0.5) == 16);
    CHECK(coarse_side(48, 0.0001, 0.5) == 16);
  }

  TEST_CASE("identity needs nothing") {
    const Tiling t(2, 16);
    const ConnectResult c = connect_to_identity(Permutation(t));
    CHECK(c.flow.empty());
    CHECK(c.cost == 0.0);
    const PipelineConfig cfg = make_config(t, 0.05);
    CHECK(step1_localize(Permutation(t), cfg).flow.empty());
    CHECK(step2_blockify(Permutation(t), cfg).flow.empty());
    CHECK(step3_finish(Permutation(t), cfg).flow.empty());
    const OrbitReport orb = compute_orbits(Permutation(t), cfg);
    CHECK(orb.orbits.empty());
    CHECK(orb.coloring.colored_count() == 0);
  }

  TEST_CASE("step 1 leaves short displacements alone and restores a far transposition") {
    const Tiling t(2, 64);
    const Permutation near = transposition(t, {5, 5}, {5, 6});
    CHECK(step1_localize(near, make_config(t, l2_to_identity(near), std::nullopt, 8)).flow.empty());

    const Permutation far = transposition(t, {0, 3}, {32, 3});
    const PipelineConfig cfg = make_config(t, l2_to_identity(far), 2.0 / 7.0, 8);
    const StepReport s = step1_localize(far, cfg);
    // both far cubes are back in their own coarse cube
    for (const CubeId& k : {CubeId{0, 3}, CubeId{32, 3}}) {
      const std::size_t i = t.index(k);
      CHECK(coarse_of(t, cfg.fine, s.result(i)) == coarse_of(t, cfg.fine, i));
    }
    CHECK(max_displacement(s.result) <= kConstants.displacement * cfg.scale());
    CHECK(s.stats.at("colored") == 2);
    CHECK(s.stats.at("colored") <= std::pow(cfg.delta, 2 - 2 * cfg.epsilon) * 64 * 64);
  }

  TEST_CASE("orbit of a swap across one slab boundary") {
    const Tiling t(2, 64);
    const PipelineConfig cfg = make_config(t, 0.01, 2.0 / 7.0, 8);
    const Permutation p = transposition(t, {3, 7}, {3, 8});
    const OrbitReport orb = compute_orbits(p, cfg);
    CHECK(orb.balanced);
    CHECK(orb.coloring.count(2) == 1);
    CHECK(orb.coloring.count(1) == 1);
    REQUIRE(orb.orbits.size() == 1);
    CHECK(orb.orbits[0].nbar == 1);
  }

  TEST_CASE("orbit balance on random local permutations") {
    const Tiling t(2, 32);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Permutation p = random_near_identity(t, 0.03, seed);
      const PipelineConfig cfg = make_config(t, l2_to_identity(p), std::nullopt, 4);
      const StepReport s1 = step1_localize(p, cfg);
      const OrbitReport orb = compute_orbits(s1.result, cfg);
      CHECK(orb.balanced);
      for (const auto& o : orb.orbits) CHECK(o.nbar >= 1);
    }
  }

  TEST_CASE("step 2 output is block constant") {
    const Tiling t(2, 64);
    const Permutation blocky = coarse_swap(t, 8, {0, 0}, {1, 0});
    const PipelineConfig cfg = make_config(t, l2_to_identity(blocky), std::nullopt, 8);
    CHECK(is_block_constant(blocky, 8));
    CHECK(step2_blockify(blocky, cfg).flow.empty());
    for (std::uint64_t seed = 20; seed < 25; ++seed) {
      const Permutation p = random_near_identity(t, 0.05, seed);
      const PipelineConfig forced = make_config(t, l2_to_identity(p), std::nullopt, 8);
      CHECK(is_block_constant(step2_blockify(step1_localize(p, forced).result, forced).result, 8));
      // the cost bound is stated for the natural coarse side
      const PipelineConfig c = make_config(t, l2_to_identity(p));
      const StepReport s2 = step2_blockify(step1_localize(p, c).result, c);
      CHECK(is_block_constant(s2.result, c.coarse));
      CHECK(s2.cost <= s2.bound);
    }
  }

  TEST_CASE("step 3 finishes a coarse swap and a within-block shuffle") {
    const Tiling t(2, 64);
    const Permutation blocky = coarse_swap(t, 8, {2, 3}, {2, 4});
    const PipelineConfig cfg = make_config(t, l2_to_identity(blocky), std::nullopt, 8);
    const StepReport s = step3_finish(blocky, cfg);
    CHECK(s.result.is_identity());
    CHECK_FALSE(s.flow.empty());

    CounterRng rng(6);
    std::vector<std::int32_t> tab(t.size());
    std::iota(tab.begin(), tab.end(), 0);
    for (int bx = 0; bx < 8; ++bx)
      for (int by = 0; by < 8; ++by) {
        std::vector<std::size_t> cubes;
        for (int i = 0; i < 8; ++i)
          for (int j = 0; j < 8; ++j) cubes.push_back(t.index({bx * 8 + i, by * 8 + j}));
        for (std::size_t k = cubes.size(); k > 1; --k) std::swap(tab[cubes[k - 1]], tab[cubes[rng.below(k)]]);
      }
    const Permutation inner(t, tab);
    const PipelineConfig c2 = make_config(t, l2_to_identity(inner), std::nullopt, 8);
    const StepReport s3 = step3_finish(inner, c2);
    CHECK(s3.result.is_identity());
    CHECK(s3.cost <= s3.bound);
  }

  TEST_CASE("single adjacent swap") {
    const Tiling t(2, 8);
    const Permutation p = transposition(t, {2, 2}, {2, 3});
    const ConnectResult c = connect_to_identity(p);
    CHECK(flow_apply_and_cost(p, c.flow).result.is_identity());
    CHECK(c.cost >= l2_to_identity(p) / std::sqrt(2.0));
  }

  TEST_CASE("end to end at N = 64") {
    const Tiling t(2, 64);
    const Permutation p = random_near_identity(t, 0.05, 7);
    CHECK(l2_to_identity(p) >= 0.045);
    CHECK(l2_to_identity(p) <= 0.055);
    const ConnectResult c = connect_to_identity(p);
    const auto out = flow_apply_and_cost(p, c.flow);
    CHECK(out.result.is_identity());
    CHECK(out.cost == doctest::Approx(c.cost).epsilon(1e-12));
    CHECK(c.cost >= c.l2);
    CHECK(c.cost <= kConstants.step3 * std::pow(c.l2, 2.0 / 7.0));
  }

  TEST_CASE("random near identity is deterministic and on target") {
    const Tiling t(3, 8);
    const Permutation a = random_near_identity(t, 0.03, 42), b = random_near_identity(t, 0.03, 42);
    CHECK(a == b);
    CHECK(std::abs(l2_to_identity(a) - 0.03) <= 0.003 + 1e-15);
    CHECK_THROWS_AS(random_near_identity(t, 0.0, 1), PreconditionError);
  }

  TEST_CASE("experiment table") {
    CHECK(exponent_experiment(2, {16}, {}, {1}).rows.empty());
    const ExperimentTable tab = exponent_experiment(2, {16, 32}, {0.03, 0.1}, {1, 2}, 2);
    CHECK(tab.rows.size() == 8);
    for (const auto& r : tab.rows) {
      CHECK(r.total >= r.l2);
      CHECK(r.total == doctest::Approx(r.cost[0] + r.cost[1] + r.cost[2]).epsilon(1e-12));
    }
    CHECK(tab.slope >= 0.0);
  }
}
