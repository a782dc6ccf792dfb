#pragma once

#include <cstddef>
#include <vector>

#include "dflow/movements.hpp"

namespace dflow {

// Duration of route_rectangle is at most this times the sum of the box sides.
inline constexpr double kRouteDurationConstant = 2.0;
// color_array_flow cost is at most this times l * unit * sqrt(min(b, l - b)).
inline constexpr double kArrayColoringConstant = 2.0;
// Measured bound for color_cube_flow / color_rect_flow:
// cost <= kBoxColoringConstant * max side * unit * sqrt(min(b, tot - b)).
inline constexpr double kBoxColoringConstant = 12.0;

DiscreteFlow route_array(const Box& a, const Permutation& p);
DiscreteFlow route_rectangle(const Box& r, const Permutation& p);

// Rounds that move the content of each box cube (by box rank) to the global
// cube dest[rank]; dest must be a bijection onto the box.
std::vector<SMovement> route_rounds(const Tiling& t, const Box& box, const std::vector<std::size_t>& dest);

struct ColoringStats {
  std::size_t yellow = 0;  // auxiliary cubes introduced at the top level
};

DiscreteFlow color_array_flow(const Box& a, const Coloring& from, const Coloring& to);
DiscreteFlow color_cube_flow(const Box& k, const Coloring& from, const Coloring& to, ColoringStats* stats = nullptr);
DiscreteFlow color_rect_flow(const Box& r, const Coloring& from, const Coloring& to, ColoringStats* stats = nullptr);

// E-movement rounds carrying the marked pattern `from` to `to` inside box;
// both are indexed by box rank and must hold the same number of marks.
std::vector<EMovement> arrange_marks(const Tiling& t, const Box& box, const std::vector<char>& from,
                                     const std::vector<char>& to, ColoringStats* stats = nullptr);

// Canonical marked pattern for b marks in box. With axis < 0 the longest axis is
// used (the pattern reached by arrange_marks); otherwise marks fill layers of the
// given axis starting from its high (or low) end.
std::vector<char> canonical_marks(const Tiling& t, const Box& box, std::size_t b, int axis = -1, bool toward_high = true);

// Rounds taking marks to canonical_marks(t, box, count, axis, toward_high); updates marks.
std::vector<EMovement> canonicalize_marks(const Tiling& t, const Box& box, std::vector<char>& marks, int axis,
                                          bool toward_high);

// One sequence per line along axis, sliding each line's marks to its high (or low) end.
EMovement push_marks(const Tiling& t, const Box& box, int axis, const std::vector<char>& marks, bool toward_high);

// Applies rounds to a box-local vector of values.
template <class T, class M>
void apply_local(const Tiling& t, const Box& box, const std::vector<M>& rounds, std::vector<T>& v) {
  for (const auto& m : rounds)
    for (const auto& [a, b] : transpositions(t, Movement(m))) {
      using std::swap;
      swap(v[box.rank_of(t, a)], v[box.rank_of(t, b)]);
    }
}

}  // namespace dflow
