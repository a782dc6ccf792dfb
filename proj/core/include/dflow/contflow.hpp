#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dflow {

// Planar divergence-free field swapping the end cubes of a horizontal array
// [0, M/N] x [0, 1/N]. Two dimensions only.

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct FrameParams {
  int n = 4;
  int m = 2;
  std::optional<double> epsilon_override;

  double side() const { return 1.0 / n; }
  double epsilon() const;
  double a() const;
  double b() const;
  double c() const;
  // Thickness of the swept strips along the long sides.
  double strip() const { return side() / m; }
  double length() const { return m * side(); }
};

FrameParams make_frame(int n, int m, std::optional<double> epsilon = std::nullopt);

// v(p) = (axx*x + axy*y + cx, ayx*x + ayy*y + cy)
struct AffineVelocity {
  double axx = 0.0, axy = 0.0, cx = 0.0;
  double ayx = 0.0, ayy = 0.0, cy = 0.0;
  Point2 at(Point2 p) const { return {axx * p.x + axy * p.y + cx, ayx * p.x + ayy * p.y + cy}; }
  double divergence() const { return axx + ayy; }
};

// Convex polygon, counterclockwise.
struct FieldPiece {
  std::string name;
  std::vector<Point2> polygon;
  AffineVelocity velocity;
};

struct Phase {
  double t0 = 0.0;
  double t1 = 0.0;
  double speed = 1.0;
  std::vector<FieldPiece> pieces;
};

struct PiecewiseField {
  FrameParams params;
  std::vector<Phase> phases;
  // Pieces of each phase whose bounding box meets each column of width 1/N.
  std::vector<std::vector<std::vector<std::size_t>>> columns;

  int phase_at(double t) const;
  // Piece of `phase` whose interior contains p, or -1.
  int locate(int phase, Point2 p) const;
};

PiecewiseField build_swap_field(const FrameParams& params);

struct Velocity {
  Point2 v;
  bool boundary = false;  // p on a piece boundary: reported as zero
};

Velocity evaluate(const PiecewiseField& f, double t, Point2 p);

struct FlowTrace {
  Point2 initial;
  std::vector<double> times;
  std::vector<Point2> points;
  Point2 terminal;
  std::size_t steps = 0;
  std::size_t crossings = 0;
  double max_error_estimate = 0.0;
};

FlowTrace integrate_time1_map(const PiecewiseField& f, Point2 x0, double h, bool record = false);

// Time integral of the spatial L2 norm, midpoint rule with `resolution` cells per cube side.
double l1l2_norm(const PiecewiseField& f, int resolution = 64);

// Tensor polynomial bump (1 - s^2)^4 in each coordinate, supported on a square.
struct TestBump {
  Point2 center;
  double radius = 0.0;
};

std::vector<TestBump> standard_bumps(const FrameParams& params);
// Bump straddling the interface between the bottom and right pieces of the first phase.
TestBump corner_bump(const FrameParams& params);

// max over bumps and phases of |int v.grad(phi)| / int |v||grad(phi)|; phases
// with no overlap are skipped.
double weak_divergence_residual(const PiecewiseField& f, const std::vector<TestBump>& bumps);

struct SwapMapReport {
  bool ok = false;
  double tolerance = 0.0;
  double max_error = 0.0;
  Point2 worst;
  double min_volume_fraction = 1.0;
  std::size_t samples = 0;
  std::size_t excluded = 0;
  std::string describe() const;
};

SwapMapReport verify_swap_map(const FrameParams& params, int samples_per_cube, double h,
                              std::uint64_t seed = 1);

// l2 distance from the identity of the cube permutation exchanging the two end cubes.
double discrete_swap_l2(const FrameParams& params);

void write_trace_csv(std::ostream& os, const FlowTrace& trace);
void write_field_spec(std::ostream& os, const PiecewiseField& f);

}  // namespace dflow
