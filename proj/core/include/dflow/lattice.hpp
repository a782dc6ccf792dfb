#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dflow/errors.hpp"

namespace dflow {

using CubeId = std::vector<int>;
using Point = std::vector<double>;

// Uniform grid of n^nu cubes of side 1/n on the unit cube. Cubes are stored
// in lexicographic order with axis 0 most significant.
class Tiling {
 public:
  Tiling(int nu, int n);

  int nu() const { return nu_; }
  int n() const { return n_; }
  std::size_t size() const { return size_; }
  double side() const { return 1.0 / n_; }

  // n^{-1-nu/2}, the per-swap scale shared by both movement costs.
  double cost_unit() const;

  std::size_t stride(int axis) const { return strides_[axis]; }
  bool contains(const CubeId& k) const;
  std::size_t index(const CubeId& k) const;
  CubeId coords(std::size_t idx) const;
  int coord(std::size_t idx, int axis) const {
    return static_cast<int>((idx / strides_[axis]) % static_cast<std::size_t>(n_));
  }

  bool operator==(const Tiling& o) const { return nu_ == o.nu_ && n_ == o.n_; }
  bool operator!=(const Tiling& o) const { return !(*this == o); }

 private:
  int nu_;
  int n_;
  std::size_t size_;
  std::vector<std::size_t> strides_;
};

Point cube_center(const Tiling& t, const CubeId& k);
double center_distance(const Tiling& t, std::size_t a, std::size_t b);
double center_distance_sq(const Tiling& t, std::size_t a, std::size_t b);
bool are_adjacent(const Tiling& t, const CubeId& k1, const CubeId& k2);
bool are_adjacent(const Tiling& t, std::size_t a, std::size_t b);

// Axis-aligned box of cubes with inclusive bounds.
class Box {
 public:
  enum class Kind { Rectangle, Array };

  Box() = default;
  Box(CubeId lo, CubeId hi);
  static Box whole(const Tiling& t);

  const CubeId& lo() const { return lo_; }
  const CubeId& hi() const { return hi_; }
  int dim() const { return static_cast<int>(lo_.size()); }
  int extent(int axis) const { return hi_[axis] - lo_[axis] + 1; }
  std::size_t volume() const;
  Kind kind() const;
  // Axis carrying the array; for a single cube returns 0.
  int array_axis() const;
  int max_extent() const;
  int extent_sum() const;

  bool contains(const CubeId& k) const;
  bool contains_index(const Tiling& t, std::size_t idx) const;
  bool within(const Tiling& t) const;
  bool intersects(const Box& o) const;

  // Cube at local lexicographic rank inside the box.
  std::size_t cube_at(const Tiling& t, std::size_t rank) const;
  std::size_t rank_of(const Tiling& t, std::size_t idx) const;

  bool operator==(const Box& o) const { return lo_ == o.lo_ && hi_ == o.hi_; }

 private:
  CubeId lo_;
  CubeId hi_;
};

using RegionSpec = Box;

std::vector<CubeId> region_cubes(const Tiling& t, const Box& r);
std::vector<std::size_t> region_indices(const Tiling& t, const Box& r);

// Cube-level bijection. target()[k] is the cube that cube k is translated to.
class Permutation {
 public:
  explicit Permutation(const Tiling& t);  // identity
  Permutation(const Tiling& t, std::vector<std::int32_t> target);

  static Permutation identity(const Tiling& t) { return Permutation(t); }

  const Tiling& tiling() const { return tiling_; }
  const std::vector<std::int32_t>& target() const { return target_; }
  std::size_t operator()(std::size_t k) const { return static_cast<std::size_t>(target_[k]); }
  CubeId operator()(const CubeId& k) const;

  bool is_identity() const;
  std::size_t moved_count() const;
  std::vector<std::int32_t> inverse_table() const;

  // Piecewise translation of a point lying in the interior of a cube.
  Point map_point(const Point& x) const;

  bool operator==(const Permutation& o) const {
    return tiling_ == o.tiling_ && target_ == o.target_;
  }
  bool operator!=(const Permutation& o) const { return !(*this == o); }

 private:
  Tiling tiling_;
  std::vector<std::int32_t> target_;
};

// Empty string when the table is a bijection, otherwise a description.
std::string bijection_violation(std::size_t size, const std::vector<std::int32_t>& target);

Permutation compose(const Permutation& p, const Permutation& q);  // p after q
Permutation invert(const Permutation& p);
double l2_distance(const Permutation& p, const Permutation& q);
double l2_to_identity(const Permutation& p);
double max_displacement(const Permutation& p);

// Colour per cube of a region, stored in region order. 0 is white.
class Coloring {
 public:
  Coloring(const Tiling& t, const Box& region, std::vector<int> colors);
  Coloring(const Tiling& t, const Box& region);  // all white

  const Tiling& tiling() const { return tiling_; }
  const Box& region() const { return region_; }
  const std::vector<int>& colors() const { return colors_; }
  int at_rank(std::size_t rank) const { return colors_[rank]; }
  int at(std::size_t cube) const;
  void set(std::size_t cube, int color);
  std::size_t count(int color) const;
  std::size_t colored_count() const;

  bool operator==(const Coloring& o) const {
    return tiling_ == o.tiling_ && region_ == o.region_ && colors_ == o.colors_;
  }

 private:
  Tiling tiling_;
  Box region_;
  std::vector<int> colors_;
};

std::string format_cube(const CubeId& k);
CubeId parse_cube(const std::string& text);

void write_permutation(std::ostream& os, const Permutation& p);
Permutation read_permutation(std::istream& is);
Tiling parse_header(const std::string& line);

}  // namespace dflow
