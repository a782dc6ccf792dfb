#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

#include "dflow/oracle.hpp"
#include "dflow/routing.hpp"

using namespace dflow;

namespace {

using Table = std::vector<std::int32_t>;

// Plain Dijkstra over the 24 tables of the 2x2 tiling with the six S moves
// written out by hand: four single swaps and two double swaps.
double hand_dijkstra_2x2(const Table& start) {
  const double u = 0.25;
  const std::vector<std::pair<std::vector<std::pair<int, int>>, double>> moves = {
      {{{0, 1}}, u},          {{{2, 3}}, u},          {{{0, 2}}, u},         {{{1, 3}}, u},
      {{{0, 1}, {2, 3}}, u * std::sqrt(2.0)}, {{{0, 2}, {1, 3}}, u * std::sqrt(2.0)}};
  std::map<Table, double> dist;
  using Item = std::pair<double, Table>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[start] = 0.0;
  pq.push({0.0, start});
  const Table id = {0, 1, 2, 3};
  while (!pq.empty()) {
    auto [d, tab] = pq.top();
    pq.pop();
    if (d > dist[tab]) continue;
    if (tab == id) return d;
    for (const auto& [pairs, c] : moves) {
      // swap the contents of places: the cube at place x moves to place y
      Table next = tab;
      for (auto& v : next)
        for (const auto& [x, y] : pairs) {
          if (v == x) {
            v = y;
            break;
          }
          if (v == y) {
            v = x;
            break;
          }
        }
      const double nd = d + c;
      auto it = dist.find(next);
      if (it == dist.end() || nd < it->second) {
        dist[next] = nd;
        pq.push({nd, next});
      }
    }
  }
  return -1.0;
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("trivial distances") {
    const Tiling t(2, 2);
    CHECK(exact_distance(Permutation(t), Permutation(t), DistanceMode::S).distance == 0.0);
    const Permutation swap(t, {1, 0, 2, 3});
    CHECK(exact_distance(swap, Permutation(t), DistanceMode::S).distance == doctest::Approx(0.25).epsilon(1e-15));
  }

  TEST_CASE("4-cycles match the hand Dijkstra and their frozen values") {
    const Tiling t(2, 2);
    // rotation around the square: three single swaps
    const Table rotation = {1, 3, 0, 2};
    CHECK(hand_dijkstra_2x2(rotation) == doctest::Approx(0.75).epsilon(1e-15));
    const OracleResult r = exact_distance(Permutation(t, rotation), Permutation(t), DistanceMode::S);
    CHECK(r.distance == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(r.witness.duration() == 3);
    CHECK(flow_apply_and_cost(Permutation(t, rotation), r.witness).result.is_identity());
    // crossing cycle 0 -> 3 -> 1 -> 2: one double swap and one single swap
    const Table crossing = {3, 2, 0, 1};
    CHECK(hand_dijkstra_2x2(crossing) == doctest::Approx(0.25 * (1 + std::sqrt(2.0))).epsilon(1e-15));
    const OracleResult c = exact_distance(Permutation(t, crossing), Permutation(t), DistanceMode::S);
    CHECK(c.distance == doctest::Approx(0.25 * (1 + std::sqrt(2.0))).epsilon(1e-14));
    CHECK(c.witness.duration() == 2);
  }

  TEST_CASE("S distances agree with the hand Dijkstra on all of 2x2") {
    const Tiling t(2, 2);
    Table tab = {0, 1, 2, 3};
    do {
      const double d = exact_distance(Permutation(t, tab), Permutation(t), DistanceMode::S).distance;
      CHECK(d == doctest::Approx(hand_dijkstra_2x2(tab)).epsilon(1e-14));
    } while (std::next_permutation(tab.begin(), tab.end()));
  }

  TEST_CASE("symmetry and witness cost") {
    const Tiling t(2, 2);
    const auto perms = region_permutations(t, Box::whole(t));
    CHECK(perms.size() == 24);
    for (std::size_t i = 0; i < perms.size(); i += 5)
      for (std::size_t j = 0; j < perms.size(); j += 7)
        for (auto mode : {DistanceMode::S, DistanceMode::E}) {
          const OracleResult a = exact_distance(perms[i], perms[j], mode);
          const OracleResult b = exact_distance(perms[j], perms[i], mode);
          CHECK(a.distance == doctest::Approx(b.distance).epsilon(1e-13));
          CHECK(a.witness.total_cost() == a.distance);
          CHECK(flow_apply_and_cost(perms[i], a.witness).result == perms[j]);
        }
  }

  TEST_CASE("equivalence on the 2x2 tiling and the 1x4 array") {
    const Tiling t(2, 2);
    const EquivalenceReport two = equivalence_report(t, region_permutations(t, Box::whole(t)));
    CHECK(two.rows.size() == 24);
    CHECK(std::count_if(two.rows.begin(), two.rows.end(), [](const auto& r) { return r.skipped; }) == 1);
    CHECK(two.all_hold);
    CHECK(two.max_ratio == doctest::Approx(0.5));

    const Tiling t4(2, 4);
    OracleLimits lim;
    lim.region = Box({0, 0}, {0, 3});
    const EquivalenceReport row = equivalence_report(t4, region_permutations(t4, *lim.region), lim);
    CHECK(row.rows.size() == 24);
    CHECK(row.all_hold);
    CHECK(row.max_ratio == doctest::Approx(1.0));
    for (const auto& r : row.rows) {
      if (r.skipped) continue;
      CHECK(r.dist_e <= 2 * r.dist_s * (1 + 1e-12));
      CHECK(route_rectangle(*lim.region, r.p).total_cost() >= r.dist_s * (1 - 1e-12));
    }
  }

  TEST_CASE("end transposition of the 1x4 array") {
    const Tiling t(2, 4);
    OracleLimits lim;
    lim.region = Box({0, 0}, {0, 3});
    std::vector<std::int32_t> tab(16);
    for (int i = 0; i < 16; ++i) tab[i] = i;
    std::swap(tab[0], tab[3]);
    const Permutation p(t, tab);
    const double u = t.cost_unit();
    CHECK(exact_distance(p, Permutation(t), DistanceMode::E, lim).distance == doctest::Approx(4 * u).epsilon(1e-14));
    CHECK(exact_distance(p, Permutation(t), DistanceMode::S, lim).distance ==
          doctest::Approx((1 + 2 * std::sqrt(2.0)) * u).epsilon(1e-14));
    CHECK(l2_to_identity(p) == doctest::Approx(3 * std::sqrt(2.0) * u).epsilon(1e-14));
  }

  TEST_CASE("limits") {
    const Tiling t(2, 4);
    CHECK_THROWS_AS(exact_distance(Permutation(t), Permutation(t), DistanceMode::S), CapacityError);
    OracleLimits lim;
    lim.region = Box({0, 0}, {0, 3});
    std::vector<std::int32_t> tab(16);
    for (int i = 0; i < 16; ++i) tab[i] = i;
    std::swap(tab[5], tab[6]);
    CHECK_THROWS_AS(exact_distance(Permutation(t, tab), Permutation(t), DistanceMode::S, lim), PreconditionError);
  }
}
