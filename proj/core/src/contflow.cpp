#include "dflow/contflow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <boost/math/quadrature/gauss.hpp>

#include "dflow/errors.hpp"
#include "dflow/random.hpp"

namespace dflow {

double FrameParams::epsilon() const {
  if (epsilon_override) return *epsilon_override;
  return side() / (m - 1);
}
double FrameParams::a() const { return epsilon() / (epsilon() + side()); }
double FrameParams::b() const { return a() * m * side(); }
double FrameParams::c() const { return side() - b(); }

FrameParams make_frame(int n, int m, std::optional<double> epsilon) {
  if (n < 1) throw PreconditionError("resolution must be positive");
  if (m < 2) throw PreconditionError("array length must be at least 2; adjacent cubes use the transposition flow");
  if (epsilon && !(*epsilon > 0.0)) throw PreconditionError("frame width must be positive");
  FrameParams p;
  p.n = n;
  p.m = m;
  p.epsilon_override = epsilon;
  return p;
}

namespace {

double cross(Point2 o, Point2 a, Point2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool inside(const std::vector<Point2>& poly, Point2 p) {
  for (std::size_t i = 0; i < poly.size(); ++i)
    if (!(cross(poly[i], poly[(i + 1) % poly.size()], p) > 0.0)) return false;
  return true;
}

bool in_closure(const std::vector<Point2>& poly, Point2 p, double tol) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 a = poly[i], b = poly[(i + 1) % poly.size()];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (cross(a, b, p) < -tol * len) return false;
  }
  return true;
}

// Keep the part with al*x + be*y <= ga.
std::vector<Point2> clip(const std::vector<Point2>& poly, double al, double be, double ga) {
  std::vector<Point2> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 p = poly[i], q = poly[(i + 1) % n];
    const double fp = al * p.x + be * p.y - ga, fq = al * q.x + be * q.y - ga;
    if (fp <= 0) out.push_back(p);
    if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) {
      const double s = fp / (fp - fq);
      out.push_back({p.x + s * (q.x - p.x), p.y + s * (q.y - p.y)});
    }
  }
  // drop repeated vertices
  std::vector<Point2> clean;
  for (const auto& p : out)
    if (clean.empty() || std::hypot(p.x - clean.back().x, p.y - clean.back().y) > 1e-15) clean.push_back(p);
  while (clean.size() > 1 && std::hypot(clean.front().x - clean.back().x, clean.front().y - clean.back().y) <= 1e-15)
    clean.pop_back();
  return clean;
}

double area(const std::vector<Point2>& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2 p = poly[i], q = poly[(i + 1) % poly.size()];
    s += p.x * q.y - q.x * p.y;
  }
  return 0.5 * s;
}

std::vector<Point2> box_polygon(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

// Rotation field of a rectangle: grad-perp of max{(H/W)(x-cx)^2, (W/H)(y-cy)^2}.
void add_rotation(std::vector<FieldPiece>& out, const std::string& name, double x0, double y0, double x1,
                  double y1) {
  const double w = x1 - x0, h = y1 - y0;
  if (!(w > 0.0) || !(h > 0.0)) return;
  const Point2 c{0.5 * (x0 + x1), 0.5 * (y0 + y1)};
  AffineVelocity vert;  // (0, 2H/W (x - cx))
  vert.ayx = 2.0 * h / w;
  vert.cy = -2.0 * h / w * c.x;
  AffineVelocity horiz;  // (-2W/H (y - cy), 0)
  horiz.axy = -2.0 * w / h;
  horiz.cx = 2.0 * w / h * c.y;
  out.push_back({name + ".right", {{x1, y0}, {x1, y1}, c}, vert});
  out.push_back({name + ".top", {{x1, y1}, {x0, y1}, c}, horiz});
  out.push_back({name + ".left", {{x0, y1}, {x0, y0}, c}, vert});
  out.push_back({name + ".bottom", {{x0, y0}, {x1, y0}, c}, horiz});
}

// Shear pieces of the first phase: the four mitred sides of the frame, cut at the strip thickness.
std::vector<FieldPiece> frame_pieces(const FrameParams& fp) {
  const double h = fp.side(), len = fp.length(), e = fp.epsilon(), a = fp.a(), b = fp.b(), c = fp.c();
  const double s = fp.strip();
  const double big = 4.0 * (len + h);
  const std::vector<Point2> plane = box_polygon(-big, -big, big, big);
  std::vector<FieldPiece> out;

  auto region = [&](std::vector<std::array<double, 3>> halfplanes) {
    auto poly = plane;
    for (const auto& hp : halfplanes) poly = clip(poly, hp[0], hp[1], hp[2]);
    return poly;
  };

  FieldPiece A{"frame.bottom",
               region({{0, -1, 0}, {0, 1, e}, {-1, 1 / a, 0}, {1, 1 / a, b / a}, {0, 1, s}}),
               {}};
  A.velocity.axy = -2.0 / a;
  A.velocity.cx = b / a;
  FieldPiece B{"frame.right",
               region({{-1, 0, -(len - h - e)}, {1, 0, len}, {-a, -1, -b}, {-a, 1, h - b}, {-1, 0, -(len - h)}}),
               {}};
  B.velocity.ayx = 2.0 * a;
  B.velocity.cy = h - 2.0 * b;
  FieldPiece C{"frame.top",
               region({{0, -1, -(h - e)}, {0, 1, h}, {-a, -1, -h}, {a, -1, -c}, {0, -1, -(h - s)}}),
               {}};
  C.velocity.axy = -2.0 / a;
  C.velocity.cx = (h + c) / a;
  FieldPiece D{"frame.left",
               region({{-1, 0, 0}, {1, 0, h + e}, {a, -1, 0}, {a, 1, h}, {1, 0, h}}),
               {}};
  D.velocity.ayx = 2.0 * a;
  D.velocity.cy = -h;
  for (auto* p : {&A, &B, &C, &D})
    if (p->polygon.size() >= 3 && area(p->polygon) > 0.0) out.push_back(std::move(*p));
  return out;
}

std::pair<double, double> bbox_x(const std::vector<Point2>& poly) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : poly) {
    lo = std::min(lo, p.x);
    hi = std::max(hi, p.x);
  }
  return {lo, hi};
}

}  // namespace

int PiecewiseField::phase_at(double t) const {
  if (!(t >= 0.0 && t < 1.0)) throw PreconditionError("time outside [0, 1)");
  for (std::size_t k = 0; k < phases.size(); ++k)
    if (t >= phases[k].t0 && t < phases[k].t1) return static_cast<int>(k);
  return static_cast<int>(phases.size()) - 1;
}

int PiecewiseField::locate(int phase, Point2 p) const {
  const double h = params.side();
  if (!(p.y > 0.0 && p.y < h && p.x > 0.0 && p.x < params.length())) return -1;
  const auto col = std::min(static_cast<std::size_t>(p.x / h), columns[phase].size() - 1);
  const auto& pieces = phases[phase].pieces;
  for (auto i : columns[phase][col])
    if (inside(pieces[i].polygon, p)) return static_cast<int>(i);
  return -1;
}

PiecewiseField build_swap_field(const FrameParams& params) {
  if (params.m < 2) throw PreconditionError("array length must be at least 2");
  PiecewiseField f;
  f.params = params;
  const double h = params.side(), len = params.length(), s = params.strip();
  const int m = params.m;

  Phase p1{0.0, 0.25, 8.0, frame_pieces(params)};

  Phase p2{0.25, 0.5, 8.0, {}};
  add_rotation(p2.pieces, "cube1", 0, 0, h, h);
  add_rotation(p2.pieces, "cubeM", len - h, 0, len, h);
  add_rotation(p2.pieces, "strip.bottom", h, 0, len - h, s);
  add_rotation(p2.pieces, "strip.top", h, h - s, len - h, h);

  Phase p3{0.5, 0.75, 8.0, {}};
  Phase p4{0.75, 1.0, 8.0, {}};
  for (int j = 2; j < m; ++j) {
    const double x0 = (j - 1) * h, x1 = j * h;
    const std::string name = "cube" + std::to_string(j);
    add_rotation(p3.pieces, name, x0, 0, x1, h);
    add_rotation(p4.pieces, name + ".bottom", x0, 0, x1, s);
    add_rotation(p4.pieces, name + ".middle", x0, s, x1, h - s);
    add_rotation(p4.pieces, name + ".top", x0, h - s, x1, h);
  }
  f.phases = {std::move(p1), std::move(p2), std::move(p3), std::move(p4)};

  f.columns.resize(f.phases.size());
  for (std::size_t k = 0; k < f.phases.size(); ++k) {
    f.columns[k].assign(static_cast<std::size_t>(m), {});
    const auto& pieces = f.phases[k].pieces;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const auto [lo, hi] = bbox_x(pieces[i].polygon);
      for (int col = 0; col < m; ++col)
        if (lo < (col + 1) * h && hi > col * h) f.columns[k][static_cast<std::size_t>(col)].push_back(i);
    }
  }
  return f;
}

namespace {

// Piece whose closure holds p and into whose interior its own field pushes p; -1 if none.
int locate_on_boundary(const PiecewiseField& f, int phase, Point2 p) {
  const auto& pieces = f.phases[phase].pieces;
  const double tol = 1e-12 * f.params.side();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (!in_closure(pieces[i].polygon, p, tol)) continue;
    const Point2 v = pieces[i].velocity.at(p);
    const double speed = std::hypot(v.x, v.y);
    if (speed == 0.0) continue;
    const double step = 1e-9 * f.params.side() / speed;
    if (inside(pieces[i].polygon, {p.x + step * v.x, p.y + step * v.y})) return static_cast<int>(i);
  }
  return -1;
}

Point2 rk4(const AffineVelocity& v, double speed, Point2 p, double dt) {
  auto f = [&](Point2 q) {
    const Point2 r = v.at(q);
    return Point2{speed * r.x, speed * r.y};
  };
  const Point2 k1 = f(p);
  const Point2 k2 = f({p.x + 0.5 * dt * k1.x, p.y + 0.5 * dt * k1.y});
  const Point2 k3 = f({p.x + 0.5 * dt * k2.x, p.y + 0.5 * dt * k2.y});
  const Point2 k4 = f({p.x + dt * k3.x, p.y + dt * k3.y});
  return {p.x + dt / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x), p.y + dt / 6.0 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y)};
}

Point2 midpoint_step(const AffineVelocity& v, double speed, Point2 p, double dt) {
  const Point2 k1 = v.at(p);
  const Point2 q{p.x + 0.5 * dt * speed * k1.x, p.y + 0.5 * dt * speed * k1.y};
  const Point2 k2 = v.at(q);
  return {p.x + dt * speed * k2.x, p.y + dt * speed * k2.y};
}

double field_sup(const PiecewiseField& f) {
  double m = 0.0;
  for (const auto& ph : f.phases)
    for (const auto& pc : ph.pieces)
      for (const auto& q : pc.polygon) {
        const Point2 v = pc.velocity.at(q);
        m = std::max(m, ph.speed * std::hypot(v.x, v.y));
      }
  return m;
}

}  // namespace

Velocity evaluate(const PiecewiseField& f, double t, Point2 p) {
  const int k = f.phase_at(t);
  const auto& ph = f.phases[static_cast<std::size_t>(k)];
  const int i = f.locate(k, p);
  if (i >= 0) {
    const Point2 v = ph.pieces[static_cast<std::size_t>(i)].velocity.at(p);
    return {{ph.speed * v.x, ph.speed * v.y}, false};
  }
  const double tol = 1e-12 * f.params.side();
  for (const auto& pc : ph.pieces)
    if (in_closure(pc.polygon, p, tol)) return {{0.0, 0.0}, true};
  return {{0.0, 0.0}, false};
}

FlowTrace integrate_time1_map(const PiecewiseField& f, Point2 x0, double h, bool record) {
  if (!(h > 0.0)) throw PreconditionError("step size must be positive");
  FlowTrace tr;
  tr.initial = x0;
  Point2 p = x0;
  double t = 0.0;
  if (record) {
    tr.times.push_back(t);
    tr.points.push_back(p);
  }
  const double slack = 10.0 * h * field_sup(f);
  const double xmax = std::max(1.0, f.params.length()), ymax = 1.0;

  for (std::size_t k = 0; k < f.phases.size(); ++k) {
    const auto& ph = f.phases[k];
    const int phase = static_cast<int>(k);
    const auto steps = std::max<long>(1, std::lround((ph.t1 - ph.t0) / h));
    const double dt = (ph.t1 - ph.t0) / static_cast<double>(steps);
    int cur = f.locate(phase, p);
    if (cur < 0) cur = locate_on_boundary(f, phase, p);
    for (long step = 0; step < steps; ++step) {
      const double t_end = ph.t0 + static_cast<double>(step + 1) * dt;
      double left = dt;
      while (left > 0.0) {
        if (cur < 0) {  // no field here
          t += left;
          break;
        }
        const auto& pc = ph.pieces[static_cast<std::size_t>(cur)];
        const Point2 q = rk4(pc.velocity, ph.speed, p, left);
        const Point2 r = midpoint_step(pc.velocity, ph.speed, p, left);
        tr.max_error_estimate = std::max(tr.max_error_estimate, std::hypot(q.x - r.x, q.y - r.y));
        if (inside(pc.polygon, q)) {
          p = q;
          t += left;
          break;
        }
        // bisect for the exit time
        double lo = 0.0, hi = left;
        while (hi - lo > 1e-12) {
          const double mid = 0.5 * (lo + hi);
          if (inside(pc.polygon, rk4(pc.velocity, ph.speed, p, mid)))
            lo = mid;
          else
            hi = mid;
        }
        p = rk4(pc.velocity, ph.speed, p, hi);
        t += hi;
        left -= hi;
        ++tr.crossings;
        cur = f.locate(phase, p);
        if (cur < 0) cur = locate_on_boundary(f, phase, p);
      }
      t = t_end;
      ++tr.steps;
      if (p.x < -slack || p.y < -slack || p.x > xmax + slack || p.y > ymax + slack)
        throw NumericalError("trajectory left the domain at t=" + std::to_string(t));
      if (record) {
        tr.times.push_back(t);
        tr.points.push_back(p);
      }
    }
  }
  tr.terminal = p;
  return tr;
}

double l1l2_norm(const PiecewiseField& f, int resolution) {
  if (resolution < 1) throw PreconditionError("resolution must be positive");
  const double h = f.params.side();
  const double cell = h / resolution;
  const int nx = f.params.m * resolution, ny = resolution;
  double total = 0.0;
  for (std::size_t k = 0; k < f.phases.size(); ++k) {
    const auto& ph = f.phases[k];
    const int phase = static_cast<int>(k);
    double sq = 0.0;
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < ny; ++j) {
        const Point2 p{(i + 0.5) * cell, (j + 0.5) * cell};
        int idx = f.locate(phase, p);
        if (idx < 0) {  // on a diagonal: any adjacent piece
          const double tol = 1e-12 * h;
          for (std::size_t c = 0; c < ph.pieces.size() && idx < 0; ++c)
            if (in_closure(ph.pieces[c].polygon, p, tol)) idx = static_cast<int>(c);
        }
        if (idx < 0) continue;
        const Point2 v = ph.pieces[static_cast<std::size_t>(idx)].velocity.at(p);
        sq += ph.speed * ph.speed * (v.x * v.x + v.y * v.y);
      }
    total += (ph.t1 - ph.t0) * std::sqrt(sq * cell * cell);
  }
  return total;
}

std::vector<TestBump> standard_bumps(const FrameParams& fp) {
  const double h = fp.side(), len = fp.length(), s = fp.strip(), r = 0.25 * h;
  return {
      {{len, 0.0}, r},
      {{len - 0.5 * h, 0.5 * s}, r},
      {{h, s}, r},
      {{len - h, h - s}, r},
      {{h, 0.5 * h}, r},
      {{0.5 * len, s}, r},
      {{0.5 * len, h - s}, r},
      {{len - 0.5 * h, 0.5 * h}, r},
      {{0.5 * h, h}, r},
      {{0.37 * len, 0.61 * h}, r},
  };
}

TestBump corner_bump(const FrameParams& fp) {
  return {{fp.length() - 0.5 * fp.side(), 0.5 * fp.strip()}, 0.25 * fp.side()};
}

namespace {

struct BumpEval {
  double num = 0.0;
  double den = 0.0;
};

double bump1(double s) {
  const double u = 1.0 - s * s;
  return u > 0.0 ? u * u * u * u : 0.0;
}
double bump1_d(double s) {
  const double u = 1.0 - s * s;
  return u > 0.0 ? -8.0 * s * u * u * u : 0.0;
}

// Integrates v.grad(phi) over a convex polygon by fan triangulation and collapsed Gauss rules.
void integrate_piece(const std::vector<Point2>& poly, const AffineVelocity& vel, const TestBump& bump,
                     BumpEval& acc) {
  using rule = boost::math::quadrature::gauss<double, 20>;
  const auto& nodes = rule::abscissa();
  const auto& weights = rule::weights();
  // full symmetric rule on [-1, 1]
  std::vector<std::pair<double, double>> gl;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    gl.emplace_back(nodes[i], weights[i]);
    if (nodes[i] != 0.0) gl.emplace_back(-nodes[i], weights[i]);
  }
  auto integrand = [&](Point2 p, double& num, double& den) {
    const double sx = (p.x - bump.center.x) / bump.radius, sy = (p.y - bump.center.y) / bump.radius;
    const double gx = bump1_d(sx) * bump1(sy) / bump.radius, gy = bump1(sx) * bump1_d(sy) / bump.radius;
    const Point2 v = vel.at(p);
    num = v.x * gx + v.y * gy;
    den = std::hypot(v.x, v.y) * std::hypot(gx, gy);
  };
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    const Point2 a = poly[0], b = poly[i], c = poly[i + 1];
    const double jac = std::abs(cross(a, b, c));
    // Duffy: (u, w) in [0,1]^2 -> a + u (b - a) + u w (c - b), jacobian u * |cross|
    for (const auto& [xu, wu] : gl) {
      const double u = 0.5 * (xu + 1.0);
      for (const auto& [xw, ww] : gl) {
        const double w = 0.5 * (xw + 1.0);
        const Point2 p{a.x + u * (b.x - a.x) + u * w * (c.x - b.x), a.y + u * (b.y - a.y) + u * w * (c.y - b.y)};
        double num, den;
        integrand(p, num, den);
        const double wt = 0.25 * wu * ww * u * jac;
        acc.num += wt * num;
        acc.den += wt * den;
      }
    }
  }
}

}  // namespace

double weak_divergence_residual(const PiecewiseField& f, const std::vector<TestBump>& bumps) {
  double worst = 0.0;
  for (const auto& bump : bumps) {
    const double r = bump.radius;
    for (const auto& ph : f.phases) {
      BumpEval acc;
      for (const auto& pc : ph.pieces) {
        auto poly = pc.polygon;
        poly = clip(poly, -1, 0, -(bump.center.x - r));
        poly = clip(poly, 1, 0, bump.center.x + r);
        poly = clip(poly, 0, -1, -(bump.center.y - r));
        poly = clip(poly, 0, 1, bump.center.y + r);
        if (poly.size() < 3 || area(poly) <= 0.0) continue;
        integrate_piece(poly, pc.velocity, bump, acc);
      }
      if (acc.den <= 1e-300) continue;
      worst = std::max(worst, std::abs(acc.num) / acc.den);
    }
  }
  return worst;
}

std::string SwapMapReport::describe() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s: max error %.3g (tol %.3g) at (%.6g, %.6g), min volume fraction %.6f, %zu samples, %zu excluded",
                ok ? "ok" : "FAILED", max_error, tolerance, worst.x, worst.y, min_volume_fraction, samples, excluded);
  return buf;
}

SwapMapReport verify_swap_map(const FrameParams& params, int samples_per_cube, double h, std::uint64_t seed) {
  const PiecewiseField f = build_swap_field(params);
  const double side = params.side();
  const int m = params.m;
  SwapMapReport rep;
  rep.tolerance = 1e-3 * side;
  CounterRng rng(seed);
  for (int j = 1; j <= m; ++j) {
    const double x0 = (j - 1) * side;
    const int target = j == 1 ? m : (j == m ? 1 : j);
    const double shift = (target - j) * side;
    int landed = 0, used = 0;
    for (int k = 0; k < samples_per_cube; ++k) {
      const Point2 p{x0 + side * rng.uniform(), side * rng.uniform()};
      bool on_boundary = false;
      for (double t : {0.0, 0.25, 0.5, 0.75})
        if (evaluate(f, t, p).boundary) on_boundary = true;
      if (on_boundary) {
        ++rep.excluded;
        continue;
      }
      const Point2 q = integrate_time1_map(f, p, h).terminal;
      const double err = std::hypot(q.x - (p.x + shift), q.y - p.y);
      ++used;
      ++rep.samples;
      if (err > rep.max_error) {
        rep.max_error = err;
        rep.worst = p;
      }
      const double tx0 = (target - 1) * side;
      if (q.x > tx0 && q.x < tx0 + side && q.y > 0.0 && q.y < side) ++landed;
    }
    if (used > 0) rep.min_volume_fraction = std::min(rep.min_volume_fraction, static_cast<double>(landed) / used);
  }
  rep.ok = rep.max_error <= rep.tolerance && rep.min_volume_fraction >= 1.0 - 1e-3;
  return rep;
}

double discrete_swap_l2(const FrameParams& params) {
  const double h = params.side();
  return std::sqrt(2.0) * (params.m - 1) * h * h;
}

void write_trace_csv(std::ostream& os, const FlowTrace& trace) {
  os << "t,x,y\n";
  char buf[96];
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.17g,%.17g\n", trace.times[i], trace.points[i].x, trace.points[i].y);
    os << buf;
  }
}

void write_field_spec(std::ostream& os, const PiecewiseField& f) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "frame N=%d M=%d eps=%.17g a=%.17g b=%.17g c=%.17g\n", f.params.n, f.params.m,
                f.params.epsilon(), f.params.a(), f.params.b(), f.params.c());
  os << buf;
  for (std::size_t k = 0; k < f.phases.size(); ++k) {
    const auto& ph = f.phases[k];
    std::snprintf(buf, sizeof buf, "phase %zu t=[%g,%g) speed=%g pieces=%zu\n", k + 1, ph.t0, ph.t1, ph.speed,
                  ph.pieces.size());
    os << buf;
    for (const auto& pc : ph.pieces) {
      os << "  " << pc.name << ":";
      for (const auto& q : pc.polygon) {
        std::snprintf(buf, sizeof buf, " (%.17g,%.17g)", q.x, q.y);
        os << buf;
      }
      const auto& v = pc.velocity;
      std::snprintf(buf, sizeof buf, " | v=(%.17g*x%+.17g*y%+.17g, %.17g*x%+.17g*y%+.17g)\n", v.axx, v.axy, v.cx,
                    v.ayx, v.ayy, v.cy);
      os << buf;
    }
  }
}

}  // namespace dflow
