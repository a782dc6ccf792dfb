#include "dflow/lattice.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace dflow {

Tiling::Tiling(int nu, int n) : nu_(nu), n_(n), size_(1) {
  if (nu < 1 || n < 1) throw DimensionError("tiling needs nu >= 1 and N >= 1");
  const std::size_t limit = static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max());
  for (int i = 0; i < nu; ++i) {
    if (size_ > limit / static_cast<std::size_t>(n)) throw DimensionError("tiling too large");
    size_ *= static_cast<std::size_t>(n);
  }
  strides_.assign(static_cast<std::size_t>(nu), 1);
  for (int a = nu - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * static_cast<std::size_t>(n);
}

double Tiling::cost_unit() const { return std::pow(static_cast<double>(n_), -1.0 - nu_ / 2.0); }

bool Tiling::contains(const CubeId& k) const {
  if (static_cast<int>(k.size()) != nu_) return false;
  return std::all_of(k.begin(), k.end(), [&](int c) { return c >= 0 && c < n_; });
}

std::size_t Tiling::index(const CubeId& k) const {
  if (!contains(k)) throw InvalidCubeError("cube " + format_cube(k) + " outside tiling");
  std::size_t idx = 0;
  for (int a = 0; a < nu_; ++a) idx += static_cast<std::size_t>(k[a]) * strides_[a];
  return idx;
}

CubeId Tiling::coords(std::size_t idx) const {
  if (idx >= size_) throw InvalidCubeError("cube index out of range");
  CubeId k(static_cast<std::size_t>(nu_));
  for (int a = 0; a < nu_; ++a) k[a] = coord(idx, a);
  return k;
}

Point cube_center(const Tiling& t, const CubeId& k) {
  if (!t.contains(k)) throw InvalidCubeError("cube " + format_cube(k) + " outside tiling");
  Point c(k.size());
  for (std::size_t a = 0; a < k.size(); ++a) c[a] = (k[a] + 0.5) / t.n();
  return c;
}

double center_distance_sq(const Tiling& t, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (int ax = 0; ax < t.nu(); ++ax) {
    const double d = static_cast<double>(t.coord(a, ax) - t.coord(b, ax)) / t.n();
    s += d * d;
  }
  return s;
}

double center_distance(const Tiling& t, std::size_t a, std::size_t b) {
  return std::sqrt(center_distance_sq(t, a, b));
}

bool are_adjacent(const Tiling& t, const CubeId& k1, const CubeId& k2) {
  return are_adjacent(t, t.index(k1), t.index(k2));
}

bool are_adjacent(const Tiling& t, std::size_t a, std::size_t b) {
  int differing = 0;
  for (int ax = 0; ax < t.nu(); ++ax) {
    const int d = std::abs(t.coord(a, ax) - t.coord(b, ax));
    if (d > 1) return false;
    differing += d;
  }
  return differing == 1;
}

Box::Box(CubeId lo, CubeId hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size() || lo_.empty()) throw DimensionError("box bounds differ in dimension");
  for (std::size_t a = 0; a < lo_.size(); ++a)
    if (lo_[a] > hi_[a]) throw InvalidCubeError("box with lo > hi on axis " + std::to_string(a));
}

Box Box::whole(const Tiling& t) {
  return Box(CubeId(static_cast<std::size_t>(t.nu()), 0), CubeId(static_cast<std::size_t>(t.nu()), t.n() - 1));
}

std::size_t Box::volume() const {
  std::size_t v = 1;
  for (int a = 0; a < dim(); ++a) v *= static_cast<std::size_t>(extent(a));
  return v;
}

Box::Kind Box::kind() const {
  int long_axes = 0;
  for (int a = 0; a < dim(); ++a) long_axes += extent(a) > 1 ? 1 : 0;
  return long_axes <= 1 ? Kind::Array : Kind::Rectangle;
}

int Box::array_axis() const {
  for (int a = 0; a < dim(); ++a)
    if (extent(a) > 1) return a;
  return 0;
}

int Box::max_extent() const {
  int m = 0;
  for (int a = 0; a < dim(); ++a) m = std::max(m, extent(a));
  return m;
}

int Box::extent_sum() const {
  int s = 0;
  for (int a = 0; a < dim(); ++a) s += extent(a);
  return s;
}

bool Box::contains(const CubeId& k) const {
  if (k.size() != lo_.size()) return false;
  for (std::size_t a = 0; a < k.size(); ++a)
    if (k[a] < lo_[a] || k[a] > hi_[a]) return false;
  return true;
}

bool Box::contains_index(const Tiling& t, std::size_t idx) const {
  for (int a = 0; a < dim(); ++a) {
    const int c = t.coord(idx, a);
    if (c < lo_[a] || c > hi_[a]) return false;
  }
  return true;
}

bool Box::within(const Tiling& t) const {
  return dim() == t.nu() && t.contains(lo_) && t.contains(hi_);
}

bool Box::intersects(const Box& o) const {
  for (int a = 0; a < dim(); ++a)
    if (hi_[a] < o.lo_[a] || o.hi_[a] < lo_[a]) return false;
  return true;
}

std::size_t Box::cube_at(const Tiling& t, std::size_t rank) const {
  std::size_t idx = 0;
  for (int a = dim() - 1; a >= 0; --a) {
    const auto e = static_cast<std::size_t>(extent(a));
    idx += (static_cast<std::size_t>(lo_[a]) + rank % e) * t.stride(a);
    rank /= e;
  }
  return idx;
}

std::size_t Box::rank_of(const Tiling& t, std::size_t idx) const {
  std::size_t rank = 0;
  for (int a = 0; a < dim(); ++a)
    rank = rank * static_cast<std::size_t>(extent(a)) + static_cast<std::size_t>(t.coord(idx, a) - lo_[a]);
  return rank;
}

std::vector<std::size_t> region_indices(const Tiling& t, const Box& r) {
  if (!r.within(t)) throw InvalidCubeError("region outside tiling");
  std::vector<std::size_t> out(r.volume());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = r.cube_at(t, i);
  return out;
}

std::vector<CubeId> region_cubes(const Tiling& t, const Box& r) {
  std::vector<CubeId> out;
  for (std::size_t idx : region_indices(t, r)) out.push_back(t.coords(idx));
  return out;
}

std::string bijection_violation(std::size_t size, const std::vector<std::int32_t>& target) {
  if (target.size() != size) return "table size " + std::to_string(target.size()) + " != " + std::to_string(size);
  std::vector<char> seen(size, 0);
  for (std::size_t k = 0; k < size; ++k) {
    const auto v = target[k];
    if (v < 0 || static_cast<std::size_t>(v) >= size) return "image of cube " + std::to_string(k) + " out of range";
    if (seen[v]) return "cube " + std::to_string(v) + " is the image of two cubes";
    seen[v] = 1;
  }
  return {};
}

Permutation::Permutation(const Tiling& t) : tiling_(t), target_(t.size()) {
  for (std::size_t k = 0; k < target_.size(); ++k) target_[k] = static_cast<std::int32_t>(k);
}

Permutation::Permutation(const Tiling& t, std::vector<std::int32_t> target)
    : tiling_(t), target_(std::move(target)) {
  const std::string why = bijection_violation(t.size(), target_);
  if (!why.empty()) throw ValidationError("not a permutation: " + why);
}

CubeId Permutation::operator()(const CubeId& k) const { return tiling_.coords((*this)(tiling_.index(k))); }

bool Permutation::is_identity() const { return moved_count() == 0; }

std::size_t Permutation::moved_count() const {
  std::size_t m = 0;
  for (std::size_t k = 0; k < target_.size(); ++k) m += static_cast<std::size_t>(target_[k]) != k ? 1 : 0;
  return m;
}

std::vector<std::int32_t> Permutation::inverse_table() const {
  std::vector<std::int32_t> inv(target_.size());
  for (std::size_t k = 0; k < target_.size(); ++k) inv[target_[k]] = static_cast<std::int32_t>(k);
  return inv;
}

Point Permutation::map_point(const Point& x) const {
  if (static_cast<int>(x.size()) != tiling_.nu()) throw DimensionError("point dimension mismatch");
  CubeId k(x.size());
  for (std::size_t a = 0; a < x.size(); ++a)
    k[a] = std::clamp(static_cast<int>(std::floor(x[a] * tiling_.n())), 0, tiling_.n() - 1);
  const std::size_t src = tiling_.index(k);
  const std::size_t dst = (*this)(src);
  Point y(x);
  for (int a = 0; a < tiling_.nu(); ++a)
    y[a] += static_cast<double>(tiling_.coord(dst, a) - tiling_.coord(src, a)) / tiling_.n();
  return y;
}

static void require_same(const Tiling& a, const Tiling& b) {
  if (a != b) throw DimensionError("permutations live on different tilings");
}

Permutation compose(const Permutation& p, const Permutation& q) {
  require_same(p.tiling(), q.tiling());
  std::vector<std::int32_t> t(q.target().size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = p.target()[q.target()[k]];
  return Permutation(p.tiling(), std::move(t));
}

Permutation invert(const Permutation& p) { return Permutation(p.tiling(), p.inverse_table()); }

double l2_distance(const Permutation& p, const Permutation& q) {
  require_same(p.tiling(), q.tiling());
  const Tiling& t = p.tiling();
  double s = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) s += center_distance_sq(t, p(k), q(k));
  return std::sqrt(s * std::pow(static_cast<double>(t.n()), -t.nu()));
}

double l2_to_identity(const Permutation& p) { return l2_distance(p, Permutation::identity(p.tiling())); }

double max_displacement(const Permutation& p) {
  double m = 0.0;
  for (std::size_t k = 0; k < p.tiling().size(); ++k) m = std::max(m, center_distance_sq(p.tiling(), k, p(k)));
  return std::sqrt(m);
}

Coloring::Coloring(const Tiling& t, const Box& region, std::vector<int> colors)
    : tiling_(t), region_(region), colors_(std::move(colors)) {
  if (!region_.within(t)) throw InvalidCubeError("coloring region outside tiling");
  if (colors_.size() != region_.volume()) throw DimensionError("coloring size does not match region");
  for (int c : colors_)
    if (c < 0) throw ValidationError("negative colour");
}

Coloring::Coloring(const Tiling& t, const Box& region) : Coloring(t, region, std::vector<int>(region.volume(), 0)) {}

int Coloring::at(std::size_t cube) const {
  if (!region_.contains_index(tiling_, cube)) throw InvalidCubeError("cube outside coloring region");
  return colors_[region_.rank_of(tiling_, cube)];
}

void Coloring::set(std::size_t cube, int color) {
  if (!region_.contains_index(tiling_, cube)) throw InvalidCubeError("cube outside coloring region");
  colors_[region_.rank_of(tiling_, cube)] = color;
}

std::size_t Coloring::count(int color) const {
  return static_cast<std::size_t>(std::count(colors_.begin(), colors_.end(), color));
}

std::size_t Coloring::colored_count() const { return colors_.size() - count(0); }

std::string format_cube(const CubeId& k) {
  std::string s;
  for (std::size_t a = 0; a < k.size(); ++a) {
    if (a) s += ',';
    s += std::to_string(k[a]);
  }
  return s;
}

CubeId parse_cube(const std::string& text) {
  CubeId k;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw FormatError("bad cube coordinate '" + item + "'");
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw FormatError("bad cube coordinate '" + item + "'");
    k.push_back(v);
  }
  if (k.empty()) throw FormatError("empty cube");
  return k;
}

Tiling parse_header(const std::string& line) {
  int nu = 0;
  int n = 0;
  char tail = 0;
  if (std::sscanf(line.c_str(), "nu=%d N=%d%c", &nu, &n, &tail) != 2)
    throw FormatError("expected header 'nu=<nu> N=<N>', got '" + line + "'");
  return Tiling(nu, n);
}

void write_permutation(std::ostream& os, const Permutation& p) {
  const Tiling& t = p.tiling();
  os << "nu=" << t.nu() << " N=" << t.n() << '\n';
  for (std::size_t k = 0; k < t.size(); ++k)
    if (p(k) != k) os << format_cube(t.coords(k)) << " -> " << format_cube(t.coords(p(k))) << '\n';
}

Permutation read_permutation(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("missing permutation header");
  const Tiling t = parse_header(line);
  std::vector<std::int32_t> target(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) target[k] = static_cast<std::int32_t>(k);
  std::vector<char> assigned(t.size(), 0);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto arrow = line.find("->");
    if (arrow == std::string::npos) throw FormatError("expected 'src -> dst', got '" + line + "'");
    const CubeId src = parse_cube(line.substr(0, arrow));
    const CubeId dst = parse_cube(line.substr(arrow + 2));
    const std::size_t s = t.index(src);
    if (assigned[s]) throw FormatError("cube " + format_cube(src) + " listed twice");
    assigned[s] = 1;
    target[s] = static_cast<std::int32_t>(t.index(dst));
  }
  const std::string why = bijection_violation(t.size(), target);
  if (!why.empty()) throw FormatError("not a permutation: " + why);
  return Permutation(t, std::move(target));
}

}  // namespace dflow
