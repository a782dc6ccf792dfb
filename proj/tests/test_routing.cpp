#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dflow/random.hpp"
#include "dflow/routing.hpp"

using namespace dflow;

namespace {

Permutation from_row(const Tiling& t, const std::vector<std::int32_t>& row) {
  return Permutation(t, row);
}

std::vector<int> replay_colors(const Tiling& t, const Box& box, const DiscreteFlow& f, std::vector<int> colors,
                               bool* conserved) {
  const auto blacks = std::count(colors.begin(), colors.end(), 1);
  for (const auto& m : f.steps()) {
    for (const auto& [a, b] : transpositions(t, m)) std::swap(colors[box.rank_of(t, a)], colors[box.rank_of(t, b)]);
    if (std::count(colors.begin(), colors.end(), 1) != blacks) *conserved = false;
  }
  return colors;
}

}  // namespace

TEST_SUITE("routing") {
  TEST_CASE("array routing") {
    const Tiling t(1, 4);
    const Box a({0}, {3});
    CHECK(route_array(a, Permutation(t)).empty());
    const DiscreteFlow rev = route_array(a, from_row(t, {3, 2, 1, 0}));
    CHECK(rev.duration() == 4);
    CHECK(flow_apply_and_cost(from_row(t, {3, 2, 1, 0}), rev).result.is_identity());
  }

  TEST_CASE("array routing is exhaustive within length for l = 6") {
    const Tiling t(1, 6);
    const Box a({0}, {5});
    std::vector<std::int32_t> tab = {0, 1, 2, 3, 4, 5};
    int count = 0;
    do {
      const Permutation p(t, tab);
      const DiscreteFlow f = route_array(a, p);
      CHECK(f.duration() <= 6);
      CHECK(flow_apply_and_cost(p, f).result.is_identity());
      for (const auto& m : f.steps()) CHECK(validate_movement(t, m));
      ++count;
    } while (std::next_permutation(tab.begin(), tab.end()));
    CHECK(count == 720);
  }

  TEST_CASE("array routing inside a larger tiling leaves the rest alone") {
    const Tiling t(2, 5);
    CounterRng rng(4);
    const Box row({2, 0}, {2, 4});
    for (int i = 0; i < 20; ++i) {
      std::vector<std::int32_t> tab(t.size());
      std::iota(tab.begin(), tab.end(), 0);
      auto cubes = region_indices(t, row);
      for (std::size_t j = cubes.size(); j > 1; --j) std::swap(tab[cubes[j - 1]], tab[cubes[rng.below(j)]]);
      const Permutation p(t, tab);
      CHECK(flow_apply_and_cost(p, route_array(row, p)).result.is_identity());
    }
  }

  TEST_CASE("rectangle routing") {
    const Tiling t(2, 2);
    const Box whole = Box::whole(t);
    CHECK(route_rectangle(whole, Permutation(t)).empty());
    const Permutation cycle(t, {1, 3, 0, 2});
    const DiscreteFlow f = route_rectangle(whole, cycle);
    CHECK(f.duration() <= 4);
    CHECK(flow_apply_and_cost(cycle, f).result.is_identity());

    const Tiling t3(2, 3);
    CounterRng rng(100);
    for (int i = 0; i < 100; ++i) {
      const Permutation p = random_permutation(t3, rng);
      const DiscreteFlow g = route_rectangle(Box::whole(t3), p);
      CHECK(g.duration() <= kRouteDurationConstant * 6);
      CHECK(flow_apply_and_cost(p, g).result.is_identity());
    }
  }

  TEST_CASE("array coloring") {
    const Tiling t(2, 4);
    const Box a({0, 0}, {0, 3});
    const Coloring same(t, a, {0, 1, 0, 1});
    CHECK(color_array_flow(a, same, same).empty());
    const Coloring canon(t, a, {0, 0, 0, 1});
    CHECK(color_array_flow(a, canon, canon).empty());
    const Coloring first(t, a, {1, 0, 0, 0});
    const DiscreteFlow f = color_array_flow(a, first, canon);
    CHECK(f.duration() == 3);
    CHECK(f.total_cost() == doctest::Approx(3 * t.cost_unit()).epsilon(1e-14));
    for (const auto& m : f.steps()) CHECK(transpositions(t, m).size() == 1);
  }

  TEST_CASE("cube coloring, one black per line pushed to the far layer") {
    // lines run along axis 0, the push axis; the target is the layer at axis-0 coordinate 3
    const Tiling t(2, 4);
    const Box k = Box::whole(t);
    const Coloring from(t, k, {1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1});
    const Coloring to(t, k, {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1});
    CHECK(color_cube_flow(k, to, to).empty());
    const DiscreteFlow f = color_cube_flow(k, from, to);
    bool conserved = true;
    CHECK(replay_colors(t, k, f, from.colors(), &conserved) == to.colors());
    CHECK(conserved);
    for (const auto& m : f.steps())
      for (const auto& [a, b] : transpositions(t, m)) CHECK(t.coord(a, 1) == t.coord(b, 1));
  }

  TEST_CASE("cube coloring with a partial layer uses yellow cubes") {
    const Tiling t(2, 4);
    const Box k = Box::whole(t);
    const Coloring from(t, k, {1, 1, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 1, 0});
    const Coloring to(t, k, {0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 1, 1, 1, 1});
    ColoringStats stats;
    const DiscreteFlow f = color_cube_flow(k, from, to, &stats);
    CHECK(stats.yellow == 2);
    bool conserved = true;
    CHECK(replay_colors(t, k, f, from.colors(), &conserved) == to.colors());
    CHECK(conserved);
  }

  TEST_CASE("rectangle coloring corner to corner") {
    const Tiling t(2, 8);
    const Box r({0, 0}, {1, 3});
    std::vector<int> a(8, 0), b(8, 0);
    a.front() = 1;
    b.back() = 1;
    const Coloring from(t, r, a), to(t, r, b);
    CHECK(color_rect_flow(r, from, from).empty());
    const DiscreteFlow f = color_rect_flow(r, from, to);
    CHECK(f.total_cost() <= kBoxColoringConstant * 4 * t.cost_unit());
    bool conserved = true;
    CHECK(replay_colors(t, r, f, a, &conserved) == b);
    CHECK(conserved);
  }

  TEST_CASE("coloring exactness and conservation on random pairs") {
    CounterRng rng(55);
    for (int s : {4, 8}) {
      const Tiling t(2, s);
      const Box k = Box::whole(t);
      for (int i = 0; i < 30; ++i) {
        const std::size_t b = rng.below(k.volume() + 1);
        std::vector<int> x(k.volume(), 0), y(k.volume(), 0);
        std::fill(x.begin(), x.begin() + static_cast<long>(b), 1);
        std::fill(y.begin(), y.begin() + static_cast<long>(b), 1);
        for (std::size_t j = x.size(); j > 1; --j) {
          std::swap(x[j - 1], x[rng.below(j)]);
          std::swap(y[j - 1], y[rng.below(j)]);
        }
        const DiscreteFlow f = color_cube_flow(k, Coloring(t, k, x), Coloring(t, k, y));
        bool conserved = true;
        CHECK(replay_colors(t, k, f, x, &conserved) == y);
        CHECK(conserved);
        const double m = static_cast<double>(std::min(b, k.volume() - b));
        CHECK(f.total_cost() <= kBoxColoringConstant * s * t.cost_unit() * std::sqrt(m) + 1e-15);
      }
    }
  }
}
