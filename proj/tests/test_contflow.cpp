#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dflow/contflow.hpp"

using namespace dflow;

TEST_SUITE("contflow") {
  TEST_CASE("frame parameters") {
    const FrameParams a = make_frame(4, 3);
    CHECK(a.epsilon() == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(a.a() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(a.b() == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(std::abs(a.c()) < 1e-15);
    const FrameParams b = make_frame(8, 5);
    CHECK(b.epsilon() == doctest::Approx(1.0 / 32.0).epsilon(1e-15));
    CHECK(b.a() == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(b.b() == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(std::abs(b.c()) < 1e-15);
    CHECK_THROWS(make_frame(4, 1));
  }

  TEST_CASE("adjacent cubes still build") {
    const PiecewiseField f = build_swap_field(make_frame(4, 2));
    CHECK(f.phases.size() == 4);
    CHECK(f.phases[2].pieces.empty());
  }

  TEST_CASE("every affine piece is divergence free") {
    for (int n : {4, 8})
      for (int m = 2; m <= 6; ++m)
        for (const auto& ph : build_swap_field(make_frame(n, m)).phases)
          for (const auto& pc : ph.pieces) CHECK(pc.velocity.divergence() == 0.0);
  }

  TEST_CASE("pointwise values") {
    const FrameParams fp = make_frame(4, 3);
    const PiecewiseField f = build_swap_field(fp);
    const double h = fp.side(), a = fp.a(), b = fp.b();
    const double t1 = 0.5 * (f.phases[0].t0 + f.phases[0].t1);
    const Point2 inside_b{0.7, 0.125};
    const Velocity v = evaluate(f, t1, inside_b);
    CHECK(v.v.x == doctest::Approx(0.0));
    CHECK(v.v.y == doctest::Approx(f.phases[0].speed * (2 * a * inside_b.x + h - 2 * b)).epsilon(1e-14));

    const Velocity far = evaluate(f, t1, {0.375, 0.875});
    CHECK(far.v.x == 0.0);
    CHECK(far.v.y == 0.0);

    const double t2 = 0.5 * (f.phases[1].t0 + f.phases[1].t1);
    const Velocity center = evaluate(f, t2, {h / 2, h / 2});
    CHECK(std::abs(center.v.x) < 1e-14);
    CHECK(std::abs(center.v.y) < 1e-14);
  }

  TEST_CASE("time-1 map swaps the end cubes and fixes the rest") {
    for (int m : {2, 3, 5}) {
      const FrameParams fp = make_frame(4, m);
      const PiecewiseField f = build_swap_field(fp);
      const double h = fp.side(), shift = (m - 1) * h;
      const FlowTrace first = integrate_time1_map(f, {h / 2, h / 2}, 1e-4);
      CHECK(first.terminal.x == doctest::Approx(h / 2 + shift).epsilon(1e-9));
      CHECK(first.terminal.y == doctest::Approx(h / 2).epsilon(1e-9));
      const FlowTrace last = integrate_time1_map(f, {h / 2 + shift, h / 2}, 1e-4);
      CHECK(last.terminal.x == doctest::Approx(h / 2).epsilon(1e-9));
      const FlowTrace off = integrate_time1_map(f, {0.3 * h, 2.4 * h}, 1e-4);
      CHECK(std::hypot(off.terminal.x - 0.3 * h, off.terminal.y - 2.4 * h) < 1e-6);
      if (m > 2) {
        const Point2 mid{1.37 * h, 0.52 * h};
        const FlowTrace inner = integrate_time1_map(f, mid, 1e-4);
        CHECK(std::hypot(inner.terminal.x - mid.x, inner.terminal.y - mid.y) < 1e-3 * h);
      }
    }
  }

  TEST_CASE("norm") {
    const double n43 = l1l2_norm(build_swap_field(make_frame(4, 3)));
    CHECK(n43 > 0.0);
    CHECK(n43 <= 3.75);
    for (int m : {2, 4}) {
      const double coarse = l1l2_norm(build_swap_field(make_frame(8, m)));
      const double fine = l1l2_norm(build_swap_field(make_frame(16, m)));
      CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.05));
    }
    PiecewiseField zero = build_swap_field(make_frame(4, 3));
    for (auto& ph : zero.phases) ph.speed = 0.0;
    CHECK(l1l2_norm(zero) == 0.0);
  }

  TEST_CASE("weak divergence") {
    const FrameParams fp = make_frame(8, 4);
    const PiecewiseField f = build_swap_field(fp);
    const double h = fp.side();
    CHECK(weak_divergence_residual(f, {TestBump{{1.5 * h, 0.5 * h}, 0.1 * h}}) <= 1e-8);
    CHECK(weak_divergence_residual(f, {corner_bump(fp)}) <= 1e-6);
    CHECK(weak_divergence_residual(f, standard_bumps(fp)) <= 1e-6);
    CHECK(standard_bumps(fp).size() == 10);
    const FrameParams bad = make_frame(8, 4, 1.5 * fp.epsilon());
    CHECK(weak_divergence_residual(build_swap_field(bad), {corner_bump(bad)}) > 1e-3);
  }

  TEST_CASE("swap map verification") {
    const SwapMapReport r = verify_swap_map(make_frame(4, 3), 200, 1e-4);
    CHECK(r.ok);
    CHECK(r.max_error <= r.tolerance);
    CHECK(r.tolerance == doctest::Approx(1e-3 / 4));
    CHECK(r.samples >= 200 * 3);
    CHECK(r.min_volume_fraction == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(verify_swap_map(make_frame(4, 2), 50, 1e-4).ok);
  }

  TEST_CASE("discrete l2 and outputs") {
    const FrameParams fp = make_frame(4, 3);
    CHECK(discrete_swap_l2(fp) == doctest::Approx(std::sqrt(2.0) * 2 * 0.0625).epsilon(1e-15));
    const PiecewiseField f = build_swap_field(fp);
    std::ostringstream spec, trace;
    write_field_spec(spec, f);
    CHECK(spec.str().find("phase 1") != std::string::npos);
    write_trace_csv(trace, integrate_time1_map(f, {0.1, 0.1}, 1e-3, true));
    CHECK(trace.str().rfind("t,x,y\n", 0) == 0);
  }
}
