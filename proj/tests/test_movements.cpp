#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dflow/flow_io.hpp"
#include "dflow/movements.hpp"
#include "dflow/random.hpp"

using namespace dflow;

namespace {

SMovement single_swap(const Tiling& t, const CubeId& a, const CubeId& b) { return {{{t.index(a), t.index(b)}}}; }

EMovement random_e_movement(const Tiling& t, CounterRng& rng) {
  // one sequence per row, random strictly increasing positions of even count
  EMovement e;
  for (int row = 0; row < t.n(); ++row) {
    CoupleSequence s{Box({row, 0}, {row, t.n() - 1}), {}};
    for (int i = 0; i < t.n(); ++i)
      if (rng.next() & 1) s.positions.push_back(i);
    if (s.positions.size() % 2) s.positions.pop_back();
    e.sequences.push_back(s);
  }
  return e;
}

}  // namespace

TEST_SUITE("movements") {
  TEST_CASE("validation") {
    const Tiling t(2, 2);
    CHECK(validate_movement(t, single_swap(t, {0, 0}, {0, 1})));
    SMovement bad{{{t.index({0, 0}), t.index({0, 1})}, {t.index({0, 1}), t.index({1, 1})}}};
    const auto rep = validate_movement(t, bad);
    CHECK_FALSE(rep);
    CHECK(rep.cubes == std::vector<CubeId>{{0, 1}});
    CHECK_FALSE(validate_movement(t, single_swap(t, {0, 0}, {1, 1})));

    const Tiling t5(2, 5);
    EMovement e{{CoupleSequence{Box({0, 0}, {0, 4}), {0, 1, 3, 4}}}};
    CHECK(validate_movement(t5, e));
    EMovement repeated{{CoupleSequence{Box({0, 0}, {0, 4}), {0, 1, 1, 4}}}};
    CHECK_FALSE(validate_movement(t5, repeated));
  }

  TEST_CASE("costs") {
    const Tiling t2(2, 2);
    CHECK(movement_cost(t2, single_swap(t2, {0, 0}, {0, 1})) == doctest::Approx(0.25).epsilon(1e-15));
    SMovement two{{{t2.index({0, 0}), t2.index({0, 1})}, {t2.index({1, 0}), t2.index({1, 1})}}};
    CHECK(movement_cost(t2, two) == doctest::Approx(0.25 * std::sqrt(2.0)).epsilon(1e-15));
    const Tiling t4(2, 4);
    EMovement e{{CoupleSequence{Box({0, 0}, {0, 3}), {0, 3}}}};
    CHECK(movement_cost(t4, e) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(movement_cost(t4, EMovement{{CoupleSequence{Box({0, 0}, {0, 3}), {}}}}) == 0.0);
  }

  TEST_CASE("S cost scales exactly with N") {
    for (int n : {4, 8, 16}) {
      const Tiling a(2, n), b(2, 2 * n);
      const double ca = movement_cost(a, single_swap(a, {0, 0}, {0, 1}));
      const double cb = movement_cost(b, single_swap(b, {0, 0}, {0, 1}));
      CHECK(cb / ca == doctest::Approx(std::pow(2.0, -2.0)).epsilon(1e-14));
    }
  }

  TEST_CASE("apply") {
    const Tiling t(2, 2);
    const Permutation id(t);
    const Permutation p = apply_movement(id, single_swap(t, {0, 0}, {1, 0}));
    CHECK(p.moved_count() == 2);
    CHECK(p(t.index({0, 0})) == t.index({1, 0}));
    CHECK(apply_movement(p, single_swap(t, {0, 0}, {1, 0})).is_identity());

    const Tiling t5(2, 5);
    EMovement e{{CoupleSequence{Box({0, 0}, {0, 4}), {0, 1, 3, 4}}}};
    const Permutation q = apply_movement(Permutation(t5), e);
    CHECK(q(t5.index({0, 0})) == t5.index({0, 4}));
    CHECK(q(t5.index({0, 4})) == t5.index({0, 0}));
    CHECK(q(t5.index({0, 1})) == t5.index({0, 3}));
    CHECK(q(t5.index({0, 3})) == t5.index({0, 1}));
    CHECK(q.moved_count() == 4);
  }

  TEST_CASE("involution on random movements") {
    const Tiling t(2, 6);
    CounterRng rng(21);
    for (int i = 0; i < 50; ++i) {
      const Permutation p = random_permutation(t, rng);
      const Movement s = random_s_movement(t, rng);
      const Movement e = random_e_movement(t, rng);
      CHECK(validate_movement(t, e));
      CHECK(apply_movement(apply_movement(p, s), s) == p);
      CHECK(apply_movement(apply_movement(p, e), e) == p);
    }
  }

  TEST_CASE("embedding S into E doubles the cost") {
    const Tiling t(2, 4);
    const SMovement one = single_swap(t, {1, 1}, {1, 2});
    const EMovement e1 = embed_s_as_e(t, one);
    CHECK(e1.sequences.size() == 1);
    CHECK(e1.sequences[0].array.volume() == 2);
    CHECK(movement_cost(t, e1) / movement_cost(t, one) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(embed_s_as_e(t, SMovement{}).sequences.empty());

    SMovement three{{{t.index({0, 0}), t.index({0, 1})}, {t.index({2, 0}), t.index({3, 0})}, {t.index({3, 3}), t.index({3, 2})}}};
    const EMovement e3 = embed_s_as_e(t, three);
    CHECK(e3.sequences.size() == 3);
    CHECK(apply_movement(Permutation(t), e3) == apply_movement(Permutation(t), three));
  }

  TEST_CASE("lowering E to S") {
    const Tiling t(2, 6);
    CHECK(lower_e_to_s(t, EMovement{}).empty());
    const Tiling t2(2, 2);
    const DiscreteFlow one = lower_e_to_s(t2, EMovement{{CoupleSequence{Box({0, 0}, {0, 1}), {0, 1}}}});
    CHECK(one.duration() == 1);
    CHECK(std::get<SMovement>(one.steps()[0]).swap_count() == 1);

    CounterRng rng(8);
    for (int i = 0; i < 40; ++i) {
      const EMovement e = random_e_movement(t, rng);
      const DiscreteFlow f = lower_e_to_s(t, e);
      for (const auto& m : f.steps()) CHECK(validate_movement(t, m));
      CHECK(f.duration() <= static_cast<std::size_t>(t.n()));
      CHECK(flow_apply_and_cost(Permutation(t), f).result == apply_movement(Permutation(t), e));
    }
  }

  TEST_CASE("lowered reversal applied to the canonical row reverses it") {
    const Tiling t(1, 8);
    const EMovement rev{{CoupleSequence{Box({0}, {7}), {0, 1, 2, 3, 4, 5, 6, 7}}}};
    const Permutation r = flow_apply_and_cost(Permutation(t), lower_e_to_s(t, rev)).result;
    for (std::size_t k = 0; k < 8; ++k) CHECK(r(k) == 7 - k);
  }

  TEST_CASE("flow application and cost") {
    const Tiling t(2, 2);
    const Permutation p(t);
    const auto empty = flow_apply_and_cost(p, DiscreteFlow(t));
    CHECK(empty.result == p);
    CHECK(empty.cost == 0.0);
    DiscreteFlow f(t);
    f.push(single_swap(t, {0, 0}, {0, 1}));
    f.push(single_swap(t, {0, 0}, {0, 1}));
    const auto out = flow_apply_and_cost(p, f);
    CHECK(out.result == p);
    CHECK(out.cost == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(e_cost(f) == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("flow text round trip and tamper detection") {
    const Tiling t(2, 5);
    DiscreteFlow f(t);
    f.push(single_swap(t, {0, 0}, {0, 1}));
    f.push(EMovement{{CoupleSequence{Box({0, 0}, {0, 4}), {0, 1, 3, 4}}}});
    std::stringstream ss;
    write_flow(ss, f);
    const std::string text = ss.str();
    const DiscreteFlow g = read_flow(ss);
    CHECK(g.duration() == 2);
    CHECK(g.total_cost() == f.total_cost());
    std::string tampered = text.substr(0, text.rfind("total:")) + "total: 1.5\n";
    std::stringstream bad(tampered);
    CHECK_THROWS_AS(read_flow(bad), FormatError);
  }
}
