#include "dflow/routing.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace dflow {

namespace {

using Rounds = std::vector<EMovement>;
using Marks = std::vector<char>;

Box fix_axis(const Box& b, int axis, int coord) {
  CubeId lo = b.lo(), hi = b.hi();
  lo[axis] = hi[axis] = coord;
  return Box(lo, hi);
}

Box axis_range(const Box& b, int axis, int from, int to) {
  CubeId lo = b.lo(), hi = b.hi();
  lo[axis] = from;
  hi[axis] = to;
  return Box(lo, hi);
}

int longest_axis(const Box& b) {
  int best = 0;
  for (int a = 1; a < b.dim(); ++a)
    if (b.extent(a) > b.extent(best)) best = a;
  return best;
}

int long_axis_count(const Box& b) {
  int c = 0;
  for (int a = 0; a < b.dim(); ++a) c += b.extent(a) > 1 ? 1 : 0;
  return c;
}

std::size_t count_marks(const Marks& m) {
  return static_cast<std::size_t>(std::count_if(m.begin(), m.end(), [](char c) { return c != 0; }));
}

// One sequence per line along axis: marked cubes go to the high end (or the low end).
EMovement push_lines(const Tiling& t, const Box& box, int axis, const std::function<bool(std::size_t)>& marked,
                     bool high) {
  EMovement e;
  const Box cross = fix_axis(box, axis, box.lo()[axis]);
  const int len = box.extent(axis);
  for (std::size_t r = 0; r < cross.volume(); ++r) {
    const std::size_t base = cross.cube_at(t, r);
    std::vector<char> mk(len);
    int k = 0;
    for (int j = 0; j < len; ++j) {
      mk[j] = marked(base + static_cast<std::size_t>(j) * t.stride(axis)) ? 1 : 0;
      k += mk[j];
    }
    const int zone = high ? len - k : k;
    std::vector<int> pos;
    for (int j = 0; j < len; ++j) {
      const bool before = j < zone;
      if (high ? (before && mk[j]) || (!before && !mk[j]) : (before && !mk[j]) || (!before && mk[j]))
        pos.push_back(j);
    }
    if (pos.empty()) continue;
    CubeId lo = t.coords(base), hi = lo;
    hi[axis] += len - 1;
    e.sequences.push_back({Box(lo, hi), std::move(pos)});
  }
  return e;
}

Rounds flow_between(const Tiling& t, const Box& box, const Marks& from, const Marks& to, std::size_t* yellow);

// Marked cubes (value 1, at most half the box) are brought to the canonical pattern.
// axis < 0 picks the longest axis and pushes toward its high end.
Rounds canon_core(const Tiling& t, const Box& box, Marks& w, std::size_t* yellow, int axis, bool high) {
  const std::size_t b = count_marks(w);
  if (b == 0 || w == canonical_marks(t, box, b, axis, high)) return {};
  Rounds out;
  auto record = [&](Rounds rs, Marks& state) {
    apply_local(t, box, rs, state);
    out.insert(out.end(), rs.begin(), rs.end());
  };

  if (axis < 0 && long_axis_count(box) <= 1) {
    const int a = box.array_axis();
    Rounds rs{push_lines(t, box, a, [&](std::size_t c) { return w[box.rank_of(t, c)] != 0; }, true)};
    record(std::move(rs), w);
    return out;
  }

  const int a = axis < 0 ? longest_axis(box) : axis;
  const int lo = box.lo()[a];
  const int len = box.extent(a);
  const Box cross = fix_axis(box, a, lo);
  const std::size_t m = cross.volume();
  std::size_t q = b / m;
  std::size_t r = b % m;

  Marks w2 = w;
  std::size_t y = 0;
  if (q >= 1 && r > 0) {
    // Extra marks make every line carry q+1; they are dropped again at the end.
    y = m * (q + 1) - b;
    std::size_t left = y;
    for (std::size_t i = 0; i < w2.size() && left > 0; ++i)
      if (w2[i] == 0) {
        w2[i] = 2;
        --left;
      }
    ++q;
    r = 0;
    if (yellow) *yellow = std::max(*yellow, y);
  }

  auto spread = [&](const Box& region, std::size_t start, const std::function<bool(char)>& is_mark) {
    std::vector<Rounds> parts;
    std::size_t ptr = start;
    for (int j = region.lo()[a]; j <= region.hi()[a]; ++j) {
      const Box slice = fix_axis(region, a, j);
      Marks sf(slice.volume()), st(slice.volume(), 0);
      for (std::size_t s = 0; s < sf.size(); ++s) sf[s] = is_mark(w2[box.rank_of(t, slice.cube_at(t, s))]) ? 1 : 0;
      const std::size_t k = count_marks(sf);
      for (std::size_t i = 0; i < k; ++i) st[(ptr + i) % m] = 1;
      ptr = (ptr + k) % m;
      parts.push_back(flow_between(t, slice, sf, st, nullptr));
    }
    return merge_rounds(parts);
  };

  // Lines already holding their final count need no spreading.
  bool balanced = true;
  for (std::size_t c = 0; c < m && balanced; ++c) {
    std::size_t k = 0;
    const std::size_t base = cross.cube_at(t, c);
    for (int j = 0; j < len; ++j) k += w2[box.rank_of(t, base + static_cast<std::size_t>(j) * t.stride(a))] != 0;
    balanced = k == q + (c >= m - r ? 1 : 0);
  }
  if (!balanced) record(spread(box, (m - r) % m, [](char c) { return c != 0; }), w2);

  Rounds push{push_lines(t, box, a, [&](std::size_t c) { return w2[box.rank_of(t, c)] != 0; }, high)};
  if (!push[0].sequences.empty()) record(std::move(push), w2);

  if (y > 0) {
    // The q layers at the pushed end are now full; walk the extra marks back to the first cells of that block.
    const int qi = static_cast<int>(q);
    const Box tail = high ? axis_range(box, a, lo + len - qi, lo + len - 1) : axis_range(box, a, lo, lo + qi - 1);
    record(spread(tail, 0, [](char c) { return c == 2; }), w2);
    Rounds back{push_lines(t, tail, a, [&](std::size_t c) { return w2[box.rank_of(t, c)] == 2; }, !high)};
    if (!back[0].sequences.empty()) record(std::move(back), w2);
    for (auto& c : w2)
      if (c == 2) c = 0;
  }
  w = std::move(w2);
  return out;
}

Rounds canon_any(const Tiling& t, const Box& box, Marks& w, std::size_t* yellow, int axis = -1, bool high = true) {
  const std::size_t b = count_marks(w);
  if (2 * b <= w.size()) return canon_core(t, box, w, yellow, axis, high);
  for (auto& c : w) c = c ? 0 : 1;
  Rounds out = canon_core(t, box, w, yellow, axis, axis < 0 ? high : !high);
  for (auto& c : w) c = c ? 0 : 1;
  return out;
}

Rounds flow_between(const Tiling& t, const Box& box, const Marks& from, const Marks& to, std::size_t* yellow) {
  if (from == to) return {};
  Marks f = from, g = to;
  Rounds out = canon_any(t, box, f, yellow);
  Rounds back = canon_any(t, box, g, yellow);
  if (f != g) throw std::logic_error("coloring: canonical forms differ");
  out.insert(out.end(), back.rbegin(), back.rend());
  return out;
}

Marks two_colour_marks(const Box& region, const Coloring& c, const char* which) {
  if (!(c.region() == region)) throw ValidationError(std::string(which) + " colouring is not defined on the region");
  Marks m(c.colors().size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const int v = c.colors()[i];
    if (v != 0 && v != 1) throw ValidationError("expected a black and white colouring");
    m[i] = static_cast<char>(v);
  }
  return m;
}

std::pair<Marks, Marks> checked_pair(const Box& region, const Coloring& from, const Coloring& to) {
  if (from.tiling() != to.tiling()) throw DimensionError("colourings on different tilings");
  Marks f = two_colour_marks(region, from, "source");
  Marks g = two_colour_marks(region, to, "target");
  if (count_marks(f) != count_marks(g))
    throw ValidationError("black counts differ: " + std::to_string(count_marks(f)) + " vs " +
                          std::to_string(count_marks(g)));
  return {std::move(f), std::move(g)};
}

}  // namespace

Marks canonical_marks(const Tiling& t, const Box& box, std::size_t b, int axis, bool high) {
  const std::size_t vol = box.volume();
  Marks out(vol, 0);
  if (2 * b > vol) {
    out = canonical_marks(t, box, vol - b, axis, axis < 0 ? high : !high);
    for (auto& c : out) c = c ? 0 : 1;
    return out;
  }
  if (axis < 0 && long_axis_count(box) <= 1) {
    for (std::size_t i = vol - b; i < vol; ++i) out[i] = 1;
    return out;
  }
  const int a = axis < 0 ? longest_axis(box) : axis;
  const int lo = box.lo()[a];
  const int len = box.extent(a);
  const Box cross = fix_axis(box, a, lo);
  const std::size_t m = cross.volume();
  const std::size_t q = b / m, r = b % m;
  for (std::size_t c = 0; c < m; ++c) {
    const std::size_t base = cross.cube_at(t, c);
    const std::size_t k = q + (c >= m - r ? 1 : 0);
    for (std::size_t j = 0; j < k; ++j) {
      const int off = high ? len - 1 - static_cast<int>(j) : static_cast<int>(j);
      out[box.rank_of(t, base + static_cast<std::size_t>(off) * t.stride(a))] = 1;
    }
  }
  return out;
}

std::vector<EMovement> canonicalize_marks(const Tiling& t, const Box& box, std::vector<char>& marks, int axis,
                                          bool toward_high) {
  if (marks.size() != box.volume()) throw DimensionError("mark vector size mismatch");
  return canon_any(t, box, marks, nullptr, axis, toward_high);
}

EMovement push_marks(const Tiling& t, const Box& box, int axis, const std::vector<char>& marks, bool toward_high) {
  return push_lines(t, box, axis, [&](std::size_t c) { return marks[box.rank_of(t, c)] != 0; }, toward_high);
}

std::vector<EMovement> arrange_marks(const Tiling& t, const Box& box, const std::vector<char>& from,
                                     const std::vector<char>& to, ColoringStats* stats) {
  if (from.size() != box.volume() || to.size() != box.volume()) throw DimensionError("mark vector size mismatch");
  if (count_marks(from) != count_marks(to)) throw ValidationError("mark counts differ");
  std::size_t y = 0;
  auto out = flow_between(t, box, from, to, &y);
  if (stats) stats->yellow = y;
  return out;
}

DiscreteFlow color_array_flow(const Box& a, const Coloring& from, const Coloring& to) {
  if (a.kind() != Box::Kind::Array) throw InvalidCubeError("color_array_flow needs an array region");
  const Tiling& t = from.tiling();
  const auto [f, g] = checked_pair(a, from, to);
  DiscreteFlow flow(t);
  if (f == g) return flow;
  const auto cubes = region_indices(t, a);
  auto rounds_for = [&](const Marks& m) { return odd_even_rounds(cubes, std::vector<long long>(m.begin(), m.end())); };
  for (auto& s : rounds_for(f)) flow.push(std::move(s));
  auto back = rounds_for(g);
  for (auto it = back.rbegin(); it != back.rend(); ++it) flow.push(*it);
  return flow;
}

DiscreteFlow color_rect_flow(const Box& r, const Coloring& from, const Coloring& to, ColoringStats* stats) {
  if (stats) *stats = {};
  if (r.kind() == Box::Kind::Array) return color_array_flow(r, from, to);
  const Tiling& t = from.tiling();
  const auto [f, g] = checked_pair(r, from, to);
  DiscreteFlow flow(t);
  for (auto& m : arrange_marks(t, r, f, g, stats)) flow.push(std::move(m));
  return flow;
}

DiscreteFlow color_cube_flow(const Box& k, const Coloring& from, const Coloring& to, ColoringStats* stats) {
  if (k.dim() != from.tiling().nu()) throw DimensionError("cube block dimension mismatch");
  for (int a = 1; a < k.dim(); ++a)
    if (k.extent(a) != k.extent(0)) throw ValidationError("color_cube_flow needs a cube block");
  if (stats) *stats = {};
  const Tiling& t = from.tiling();
  const auto [f, g] = checked_pair(k, from, to);
  DiscreteFlow flow(t);
  for (auto& m : arrange_marks(t, k, f, g, stats)) flow.push(std::move(m));
  return flow;
}

}  // namespace dflow
