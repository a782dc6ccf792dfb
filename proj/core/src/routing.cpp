#include "dflow/routing.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace dflow {

namespace {

// Minimum cost perfect assignment on a square matrix; returns the column of each row.
std::vector<int> min_cost_assignment(const std::vector<std::vector<long long>>& a) {
  const int n = static_cast<int>(a.size());
  const long long inf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<long long> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      long long delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const long long cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> col(n);
  for (int j = 1; j <= n; ++j) col[p[j] - 1] = j - 1;
  return col;
}

Box fix_axis(const Box& b, int axis, int coord) {
  CubeId lo = b.lo(), hi = b.hi();
  lo[axis] = hi[axis] = coord;
  return Box(lo, hi);
}

std::size_t shift(const Tiling& t, std::size_t cube, int axis, long long by) {
  return static_cast<std::size_t>(static_cast<long long>(cube) + by * static_cast<long long>(t.stride(axis)));
}

std::vector<SMovement> concat(std::vector<SMovement> a, const std::vector<SMovement>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

void check_confined(const Box& r, const Permutation& p) {
  const Tiling& t = p.tiling();
  if (!r.within(t)) throw InvalidCubeError("region outside tiling");
  for (std::size_t k = 0; k < t.size(); ++k) {
    const bool inside = r.contains_index(t, k);
    if ((!inside && p(k) != k) || (inside && !r.contains_index(t, p(k))))
      throw ValidationError("permutation moves cube " + format_cube(t.coords(k)) + " across the region boundary");
  }
}

DiscreteFlow route_region(const Box& r, const Permutation& p) {
  check_confined(r, p);
  const Tiling& t = p.tiling();
  const auto inv = p.inverse_table();
  std::vector<std::size_t> dest(r.volume());
  for (std::size_t i = 0; i < dest.size(); ++i) dest[i] = static_cast<std::size_t>(inv[r.cube_at(t, i)]);
  DiscreteFlow f(t);
  for (auto& m : route_rounds(t, r, dest)) f.push(std::move(m));
  return f;
}

}  // namespace

std::vector<SMovement> route_rounds(const Tiling& t, const Box& box, const std::vector<std::size_t>& dest) {
  std::vector<int> axes;
  for (int a = 0; a < box.dim(); ++a)
    if (box.extent(a) > 1) axes.push_back(a);
  if (axes.empty()) return {};
  const int a = axes[0];
  const int lo = box.lo()[a];
  const int w = box.extent(a);
  const std::size_t vol = box.volume();

  if (axes.size() == 1) {
    std::vector<std::size_t> cubes(vol);
    std::vector<long long> keys(vol);
    for (std::size_t i = 0; i < vol; ++i) {
      cubes[i] = box.cube_at(t, i);
      keys[i] = t.coord(dest[i], a) - lo;
    }
    return odd_even_rounds(cubes, keys);
  }

  // Lines run along axis a; a line is named by its cube in the cross-section.
  const Box cross = fix_axis(box, a, lo);
  const std::size_t m = cross.volume();
  auto line_of = [&](std::size_t cube) { return cross.rank_of(t, shift(t, cube, a, lo - t.coord(cube, a))); };
  auto line_cube = [&](std::size_t line, int layer) { return shift(t, cross.cube_at(t, line), a, layer); };

  std::vector<int> layer(vol), assigned(vol);
  std::vector<std::size_t> line(vol), dline(vol);
  for (std::size_t e = 0; e < vol; ++e) {
    const std::size_t cube = box.cube_at(t, e);
    layer[e] = t.coord(cube, a) - lo;
    line[e] = line_of(cube);
    dline[e] = line_of(dest[e]);
  }

  // Give every element a layer so that each layer holds one element per destination line.
  bool conflict = false;
  {
    std::vector<int> seen(static_cast<std::size_t>(w) * m, 0);
    for (std::size_t e = 0; e < vol && !conflict; ++e)
      conflict = seen[static_cast<std::size_t>(layer[e]) * m + dline[e]]++ > 0;
  }
  if (!conflict) {
    assigned = layer;
  } else {
    std::fill(assigned.begin(), assigned.end(), -1);
    std::vector<std::vector<std::size_t>> by_line(m);
    for (std::size_t e = 0; e < vol; ++e) by_line[line[e]].push_back(e);
    const long long forbidden = 2 * static_cast<long long>(m) + 2;
    for (int c = 0; c < w; ++c) {
      std::vector<std::vector<long long>> cost(m, std::vector<long long>(m, forbidden));
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t e : by_line[r])
          if (assigned[e] < 0) cost[r][dline[e]] = std::min<long long>(cost[r][dline[e]], layer[e] == c ? 0 : 1);
      const auto col = min_cost_assignment(cost);
      for (std::size_t r = 0; r < m; ++r) {
        long long pick = -1;
        for (std::size_t e : by_line[r]) {
          if (assigned[e] >= 0 || dline[e] != static_cast<std::size_t>(col[r])) continue;
          if (pick < 0 || layer[e] == c) pick = static_cast<long long>(e);
          if (layer[e] == c) break;
        }
        if (pick < 0) throw std::logic_error("routing: no perfect matching");
        assigned[static_cast<std::size_t>(pick)] = c;
      }
    }
  }

  auto line_sort = [&](const std::vector<std::size_t>& elem_at, const std::vector<long long>& key_of_elem) {
    std::vector<std::vector<SMovement>> parts;
    for (std::size_t r = 0; r < m; ++r) {
      std::vector<std::size_t> cubes(w);
      std::vector<long long> keys(w);
      for (int j = 0; j < w; ++j) {
        cubes[j] = line_cube(r, j);
        keys[j] = key_of_elem[elem_at[box.rank_of(t, cubes[j])]];
      }
      parts.push_back(odd_even_rounds(cubes, keys));
    }
    return merge_rounds(parts);
  };

  std::vector<std::size_t> identity(vol);
  for (std::size_t i = 0; i < vol; ++i) identity[i] = i;
  std::vector<long long> key1(assigned.begin(), assigned.end());
  auto phase1 = conflict ? line_sort(identity, key1) : std::vector<SMovement>{};

  // After phase 1 element e sits on its line at layer assigned[e].
  std::vector<std::size_t> cur(vol);
  for (std::size_t e = 0; e < vol; ++e) cur[box.rank_of(t, line_cube(line[e], assigned[e]))] = dest[e];

  std::vector<std::vector<SMovement>> parts;
  for (int c = 0; c < w; ++c) {
    const Box slice = fix_axis(box, a, lo + c);
    std::vector<std::size_t> sdest(slice.volume());
    for (std::size_t s = 0; s < sdest.size(); ++s) {
      const std::size_t d = cur[box.rank_of(t, slice.cube_at(t, s))];
      sdest[s] = shift(t, d, a, lo + c - t.coord(d, a));
    }
    parts.push_back(route_rounds(t, slice, sdest));
  }
  auto phase2 = merge_rounds(parts);

  // After phase 2 every element is on its destination line.
  std::vector<std::size_t> at(vol);
  std::vector<long long> key3(vol);
  for (std::size_t e = 0; e < vol; ++e) {
    const std::size_t place = box.rank_of(t, line_cube(dline[e], assigned[e]));
    at[place] = e;
    key3[e] = t.coord(dest[e], a) - lo;
  }
  auto phase3 = line_sort(at, key3);
  return concat(concat(std::move(phase1), phase2), phase3);
}

DiscreteFlow route_array(const Box& a, const Permutation& p) {
  if (a.kind() != Box::Kind::Array) throw InvalidCubeError("route_array needs an array region");
  return route_region(a, p);
}

DiscreteFlow route_rectangle(const Box& r, const Permutation& p) { return route_region(r, p); }

}  // namespace dflow
