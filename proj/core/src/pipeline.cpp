#include "dflow/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "dflow/random.hpp"
#include "dflow/routing.hpp"

namespace dflow {

double PipelineConfig::scale() const { return std::pow(delta, epsilon); }

double choose_epsilon(int nu, double /*delta*/) {
  if (nu < 1) throw DimensionError("dimension must be positive");
  return nu == 2 ? 2.0 / 7.0 : 1.0 / (nu + 1);
}

int coarse_side(int n, double delta, double epsilon) {
  const double limit = std::pow(delta, -epsilon);
  int s = 1;
  while (n % (2 * s) == 0 && 2.0 * s <= limit * (1 + 1e-12)) s *= 2;
  return s;
}

PipelineConfig make_config(const Tiling& t, double delta, std::optional<double> epsilon, std::optional<int> coarse) {
  if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("delta must lie in (0,1)");
  PipelineConfig c;
  c.nu = t.nu();
  c.n = t.n();
  c.delta = delta;
  c.epsilon = epsilon ? *epsilon : choose_epsilon(t.nu(), delta);
  if (!(c.epsilon > 0.0) || c.epsilon > 2.0 / (2.0 + t.nu()) + 1e-12)
    throw PreconditionError("epsilon must lie in (0, 2/(2+nu)]");
  c.coarse = coarse ? *coarse : coarse_side(t.n(), delta, c.epsilon);
  if (c.coarse < 1 || t.n() % c.coarse != 0) throw PreconditionError("coarse side must divide N");
  c.fine = t.n() / c.coarse;
  return c;
}

std::size_t coarse_of(const Tiling& t, int fine, std::size_t cube) {
  const int s = t.n() / fine;
  std::size_t idx = 0;
  for (int a = 0; a < t.nu(); ++a) idx = idx * static_cast<std::size_t>(s) + static_cast<std::size_t>(t.coord(cube, a) / fine);
  return idx;
}

bool is_block_constant(const Permutation& p, int coarse) {
  const Tiling& t = p.tiling();
  if (coarse < 1 || t.n() % coarse != 0) throw PreconditionError("coarse side must divide N");
  const int fine = t.n() / coarse;
  std::size_t cells = 1;
  for (int a = 0; a < t.nu(); ++a) cells *= static_cast<std::size_t>(coarse);
  std::vector<std::int64_t> image(cells, -1);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto from = coarse_of(t, fine, k);
    const auto to = static_cast<std::int64_t>(coarse_of(t, fine, p(k)));
    if (image[from] < 0) image[from] = to;
    else if (image[from] != to) return false;
  }
  return true;
}

namespace {

void check_config(const Tiling& t, const PipelineConfig& cfg) {
  if (cfg.nu != t.nu() || cfg.n != t.n() || cfg.coarse * cfg.fine != t.n())
    throw DimensionError("pipeline configuration does not match the tiling");
}

bool is_empty(const Movement& m) {
  if (const auto* s = std::get_if<SMovement>(&m)) return s->pairs.empty();
  for (const auto& q : std::get<EMovement>(m).sequences)
    if (!q.positions.empty()) return false;
  return true;
}

void emit(DiscreteFlow& f, Arrangement& arr, Movement m) {
  if (is_empty(m)) return;
  arr.apply(m);
  f.push(std::move(m));
}

template <class M>
void emit_all(DiscreteFlow& f, Arrangement& arr, const std::vector<M>& rounds) {
  for (const auto& m : rounds) emit(f, arr, m);
}

std::size_t shift(const Tiling& t, std::size_t cube, int axis, long long by) {
  return static_cast<std::size_t>(static_cast<long long>(cube) + by * static_cast<long long>(t.stride(axis)));
}

Box fix_axis(const Box& b, int axis, int coord) {
  CubeId lo = b.lo(), hi = b.hi();
  lo[axis] = hi[axis] = coord;
  return Box(lo, hi);
}

// Fine box of the cubes whose coarse coordinate equals fixed[a] on every axis with fixed[a] >= 0.
Box slab(const PipelineConfig& cfg, const std::vector<int>& fixed) {
  CubeId lo(static_cast<std::size_t>(cfg.nu)), hi(static_cast<std::size_t>(cfg.nu));
  for (int a = 0; a < cfg.nu; ++a) {
    lo[a] = fixed[a] >= 0 ? fixed[a] * cfg.fine : 0;
    hi[a] = fixed[a] >= 0 ? fixed[a] * cfg.fine + cfg.fine - 1 : cfg.n - 1;
  }
  return Box(lo, hi);
}

// All assignments of coarse coordinates to the listed axes; other axes get -1.
std::vector<std::vector<int>> coarse_assignments(const PipelineConfig& cfg, const std::vector<int>& axes) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(cfg.nu), -1);
  for (int a : axes) cur[a] = 0;
  while (true) {
    out.push_back(cur);
    std::size_t i = axes.size();
    while (i > 0) {
      const int a = axes[i - 1];
      if (++cur[a] < cfg.coarse) break;
      cur[a] = 0;
      --i;
    }
    if (i == 0) break;
  }
  return out;
}

StepReport make_report(DiscreteFlow flow, const Arrangement& arr, double bound) {
  Permutation result = arr.snapshot();
  StepReport r{std::move(flow), result, 0.0, bound, max_displacement(result), l2_to_identity(result), {}};
  r.cost = r.flow.total_cost();
  return r;
}

// Couples that swap the marked cells at offsets `from` of a line with cells at offsets `to`.
CoupleSequence line_sequence(const Tiling& t, std::size_t base, int axis, int length, std::vector<int> positions) {
  CubeId lo = t.coords(base), hi = lo;
  hi[axis] += length - 1;
  std::sort(positions.begin(), positions.end());
  return {Box(lo, hi), std::move(positions)};
}

}  // namespace

StepReport step1_localize(const Permutation& p, const PipelineConfig& cfg) {
  const Tiling& t = p.tiling();
  check_config(t, cfg);
  const double bound = kConstants.step1 * std::pow(cfg.delta, 1.0 - cfg.epsilon);
  Arrangement arr(p);
  DiscreteFlow flow(t);
  const double thr = cfg.scale();
  std::vector<char> colored(t.size(), 0);
  std::size_t count = 0;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (center_distance(t, k, p(k)) > thr) {
      colored[k] = 1;
      ++count;
    }
  auto finish = [&] {
    StepReport r = make_report(std::move(flow), arr, bound);
    r.stats["colored"] = static_cast<double>(count);
    r.stats["colored_bound"] = std::pow(cfg.delta, 2.0 - 2.0 * cfg.epsilon) * static_cast<double>(t.size());
    return r;
  };
  if (count == 0 || cfg.coarse == 1) return finish();

  const int k = cfg.fine, s = cfg.coarse, nu = cfg.nu;
  std::size_t capacity = 1;
  for (int a = 0; a < nu; ++a) capacity *= static_cast<std::size_t>(k);
  if (count > capacity)
    throw PreconditionError(std::to_string(count) + " far cubes exceed the coarse cube volume " +
                            std::to_string(capacity));
  auto col_at = [&](std::size_t place) { return colored[arr.occupant(place)] != 0; };
  std::vector<int> all_axes(static_cast<std::size_t>(nu));
  for (int a = 0; a < nu; ++a) all_axes[a] = a;

  // Gather every far cube into the coarse corner, one axis at a time.
  for (int a = 0; a < nu; ++a) {
    std::vector<int> others;
    for (int b = 0; b < nu; ++b)
      if (b != a) others.push_back(b);
    const auto rows = coarse_assignments(cfg, others);
    for (int j = 0; j + 1 < s; ++j) {
      std::vector<std::vector<EMovement>> packs;
      EMovement transfer;
      for (auto fixed : rows) {
        fixed[a] = j;
        const Box src = slab(cfg, fixed);
        fixed[a] = j + 1;
        const Box dst = slab(cfg, fixed);
        std::map<std::size_t, std::vector<int>> lines;
        std::vector<char> from(dst.volume(), 0), to;
        for (std::size_t r = 0; r < dst.volume(); ++r) from[r] = col_at(dst.cube_at(t, r)) ? 1 : 0;
        to = from;
        std::vector<char> blocked = from;
        std::size_t collisions = 0;
        for (std::size_t r = 0; r < src.volume(); ++r) {
          const std::size_t place = src.cube_at(t, r);
          if (!col_at(place)) continue;
          const int off = t.coord(place, a) - j * k;
          lines[shift(t, place, a, -off)].push_back(off);
          const std::size_t tr = dst.rank_of(t, shift(t, place, a, k));
          if (to[tr]) {
            to[tr] = 0;
            ++collisions;
          }
          blocked[tr] = 1;
        }
        if (lines.empty()) continue;
        for (std::size_t r = 0; r < to.size() && collisions > 0; ++r)
          if (!blocked[r]) {
            to[r] = 1;
            blocked[r] = 1;
            --collisions;
          }
        if (collisions > 0) throw PreconditionError("coarse cube too full to receive far cubes");
        if (from != to) packs.push_back(arrange_marks(t, dst, from, to));
        for (auto& [base, offs] : lines) {
          std::vector<int> pos = offs;
          for (int o : offs) pos.push_back(o + k);
          transfer.sequences.push_back(line_sequence(t, base, a, 2 * k, pos));
        }
      }
      emit_all(flow, arr, merge_rounds(packs));
      emit(flow, arr, transfer);
    }
  }

  // Carry each far cube back toward its home coarse cube, axis by axis.
  for (int a = 0; a < nu; ++a) {
    std::vector<int> others;
    for (int b = 0; b < nu; ++b)
      if (b != a) others.push_back(b);
    const auto rows = coarse_assignments(cfg, others);
    for (int j = s - 1; j >= 1; --j) {
      EMovement transfer;
      for (auto fixed : rows) {
        fixed[a] = j;
        const Box src = slab(cfg, fixed);
        std::map<std::size_t, std::vector<int>> lines;
        for (std::size_t r = 0; r < src.volume(); ++r) {
          const std::size_t place = src.cube_at(t, r);
          const std::size_t who = arr.occupant(place);
          if (!colored[who] || t.coord(who, a) / k >= j) continue;
          if (col_at(shift(t, place, a, -k))) throw std::logic_error("localization: target cube occupied");
          const int off = t.coord(place, a) - (j - 1) * k;
          lines[shift(t, place, a, -off)].push_back(off);
        }
        for (auto& [base, offs] : lines) {
          std::vector<int> pos = offs;
          for (int o : offs) pos.push_back(o - k);
          transfer.sequences.push_back(line_sequence(t, base, a, 2 * k, pos));
        }
      }
      emit(flow, arr, transfer);
    }
  }
  return finish();
}

namespace {

struct Exchange {
  std::vector<EMovement> arrange;
  EMovement swap;
};

// Slides the marked cubes of lower (reds) and upper (blacks) against their shared
// face in mirrored patterns. Returns the arrangement and the per-line marked counts.
Exchange plan_exchange(const Tiling& t, const Box& lower, const Box& upper, int a, const std::vector<std::size_t>& reds,
                       const std::vector<std::size_t>& blacks, bool lines_only) {
  std::vector<char> lo_marks(lower.volume(), 0), up_marks(upper.volume(), 0);
  for (auto x : reds) lo_marks[lower.rank_of(t, x)] = 1;
  for (auto x : blacks) up_marks[upper.rank_of(t, x)] = 1;
  Exchange ex;
  if (lines_only) {
    EMovement m = push_marks(t, lower, a, lo_marks, true);
    const EMovement mu = push_marks(t, upper, a, up_marks, false);
    m.sequences.insert(m.sequences.end(), mu.sequences.begin(), mu.sequences.end());
    if (!m.sequences.empty()) ex.arrange.push_back(std::move(m));
  } else {
    ex.arrange = merge_rounds(std::vector<std::vector<EMovement>>{canonicalize_marks(t, lower, lo_marks, a, true),
                                                                  canonicalize_marks(t, upper, up_marks, a, false)});
  }
  const Box cross_lo = fix_axis(lower, a, lower.hi()[a]);
  const Box cross_up = fix_axis(upper, a, upper.lo()[a]);
  std::vector<int> per_line(cross_lo.volume(), 0), per_line_up(cross_up.volume(), 0);
  for (auto x : reds) ++per_line[cross_lo.rank_of(t, shift(t, x, a, lower.hi()[a] - t.coord(x, a)))];
  for (auto x : blacks) ++per_line_up[cross_up.rank_of(t, shift(t, x, a, upper.lo()[a] - t.coord(x, a)))];
  if (!lines_only) {
    // canonical patterns: count per line after arranging
    std::fill(per_line.begin(), per_line.end(), 0);
    std::fill(per_line_up.begin(), per_line_up.end(), 0);
    for (std::size_t r = 0; r < lo_marks.size(); ++r)
      if (lo_marks[r]) {
        const auto x = lower.cube_at(t, r);
        ++per_line[cross_lo.rank_of(t, shift(t, x, a, lower.hi()[a] - t.coord(x, a)))];
      }
    for (std::size_t r = 0; r < up_marks.size(); ++r)
      if (up_marks[r]) {
        const auto x = upper.cube_at(t, r);
        ++per_line_up[cross_up.rank_of(t, shift(t, x, a, upper.lo()[a] - t.coord(x, a)))];
      }
  }
  if (per_line != per_line_up) throw std::logic_error("exchange: unmatched line counts");
  for (std::size_t x = 0; x < per_line.size(); ++x) {
    const int cx = per_line[x];
    if (cx == 0) continue;
    std::vector<int> pos(static_cast<std::size_t>(2 * cx));
    for (int i = 0; i < 2 * cx; ++i) pos[i] = i;
    ex.swap.sequences.push_back(line_sequence(t, shift(t, cross_lo.cube_at(t, x), a, -(cx - 1)), a, 2 * cx, pos));
  }
  return ex;
}

void emit_exchanges(DiscreteFlow& f, Arrangement& arr, const std::vector<Exchange>& plans) {
  std::vector<std::vector<EMovement>> fwd, back;
  EMovement swap;
  for (const auto& p : plans) {
    fwd.push_back(p.arrange);
    back.emplace_back(p.arrange.rbegin(), p.arrange.rend());
    swap.sequences.insert(swap.sequences.end(), p.swap.sequences.begin(), p.swap.sequences.end());
  }
  emit_all(f, arr, merge_rounds(fwd));
  emit(f, arr, swap);
  emit_all(f, arr, merge_rounds(back));
}

std::vector<int> axis_order(int nu) {
  std::vector<int> order;
  if (nu >= 2) order = {1, 0};
  else order = {0};
  for (int a = 2; a < nu; ++a) order.push_back(a);
  return order;
}

}  // namespace

StepReport step2_blockify(const Permutation& p, const PipelineConfig& cfg) {
  const Tiling& t = p.tiling();
  check_config(t, cfg);
  const double bound = kConstants.step2 * std::max(std::pow(cfg.delta, 0.5 - 0.75 * cfg.epsilon),
                                                   std::pow(cfg.delta, 1.0 / 6.0 + 7.0 * cfg.epsilon / 12.0));
  Arrangement arr(p);
  DiscreteFlow flow(t);
  if (is_block_constant(p, cfg.coarse)) return make_report(std::move(flow), arr, bound);
  if (cfg.epsilon > 1.0 / (cfg.nu + 1) + 1e-12) throw PreconditionError("blockification needs epsilon <= 1/(nu+1)");
  const double disp = max_displacement(p);
  if (disp > kConstants.displacement * cfg.scale() * (1 + 1e-12))
    throw PreconditionError("displacement " + std::to_string(disp) + " exceeds " +
                            std::to_string(kConstants.displacement * cfg.scale()));

  const int k = cfg.fine, s = cfg.coarse;
  std::size_t far_pairs = 0, near_pairs = 0;
  double l2_after_far = 0.0;
  std::vector<int> done;
  for (int a : axis_order(cfg.nu)) {
    const auto groups = coarse_assignments(cfg, done);
    auto key = [&](std::size_t particle) { return t.coord(particle, a) / k; };
    auto sorted = [&] {
      for (std::size_t x = 0; x < t.size(); ++x)
        if (key(arr.occupant(x)) != t.coord(x, a) / k) return false;
      return true;
    };
    for (int pass = 0; !sorted(); ++pass) {
      if (pass > 2 * s + 2) throw std::logic_error("blockification did not converge");
      std::vector<Exchange> far;
      std::vector<std::vector<Exchange>> levels(64);
      for (auto fixed : groups) {
        for (int j = pass % 2; j + 1 < s; j += 2) {
          fixed[a] = j;
          const Box lower = slab(cfg, fixed);
          fixed[a] = j + 1;
          const Box upper = slab(cfg, fixed);
          std::vector<std::pair<int, std::size_t>> lo_keys, up_keys;
          for (std::size_t r = 0; r < lower.volume(); ++r) {
            const auto x = lower.cube_at(t, r);
            lo_keys.emplace_back(key(arr.occupant(x)), x);
          }
          for (std::size_t r = 0; r < upper.volume(); ++r) {
            const auto x = upper.cube_at(t, r);
            up_keys.emplace_back(key(arr.occupant(x)), x);
          }
          // Highest keys first, nearest the face first among equal keys; mirrored above.
          std::sort(lo_keys.begin(), lo_keys.end(), [&](const auto& u, const auto& v) {
            if (u.first != v.first) return u.first > v.first;
            const int cu = t.coord(u.second, a), cv = t.coord(v.second, a);
            return cu != cv ? cu > cv : u.second < v.second;
          });
          std::sort(up_keys.begin(), up_keys.end(), [&](const auto& u, const auto& v) {
            if (u.first != v.first) return u.first < v.first;
            const int cu = t.coord(u.second, a), cv = t.coord(v.second, a);
            return cu != cv ? cu < cv : u.second < v.second;
          });
          std::size_t m = 0;
          while (m < lo_keys.size() && m < up_keys.size() && lo_keys[m].first > up_keys[m].first) ++m;
          if (m == 0) continue;
          std::vector<std::size_t> rs, bs;
          for (std::size_t i = 0; i < m; ++i) {
            rs.push_back(lo_keys[i].second);
            bs.push_back(up_keys[i].second);
          }
          // Pair inside ever wider blocks of fine lines around the face; leftovers cross at slab level.
          auto block_of = [&](std::size_t x, int w) {
            std::size_t id = 0;
            for (int b = 0; b < cfg.nu; ++b)
              if (b != a) id = id * static_cast<std::size_t>(cfg.n) + static_cast<std::size_t>(t.coord(x, b) / w);
            return id;
          };
          auto split = [&](int w, std::vector<std::size_t>& reds, std::vector<std::size_t>& blacks) {
            std::map<std::size_t, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> by;
            for (auto x : reds) by[block_of(x, w)].first.push_back(x);
            for (auto x : blacks) by[block_of(x, w)].second.push_back(x);
            std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> matched;
            reds.clear();
            blacks.clear();
            for (auto& [id, rb] : by) {
              const auto local = static_cast<long>(std::min(rb.first.size(), rb.second.size()));
              reds.insert(reds.end(), rb.first.begin() + local, rb.first.end());
              blacks.insert(blacks.end(), rb.second.begin() + local, rb.second.end());
              if (local > 0)
                matched.emplace_back(std::vector<std::size_t>(rb.first.begin(), rb.first.begin() + local),
                                     std::vector<std::size_t>(rb.second.begin(), rb.second.begin() + local));
            }
            return matched;
          };
          // Mirrored boxes around the face, w lines wide (0 = whole slab), as deep as the marks reach.
          auto boxes = [&](const std::vector<std::size_t>& r1, const std::vector<std::size_t>& b1, int w) {
            const int face = lower.hi()[a];
            int depth = 1;
            for (auto x : r1) depth = std::max(depth, face - t.coord(x, a) + 1);
            for (auto x : b1) depth = std::max(depth, t.coord(x, a) - face);
            CubeId lo = lower.lo(), hi = lower.hi();
            for (int b = 0; b < cfg.nu; ++b) {
              if (b == a || w == 0) continue;
              const int start = t.coord(r1[0], b) / w * w;
              lo[b] = std::max(lo[b], start);
              hi[b] = std::min(hi[b], start + w - 1);
            }
            lo[a] = face - depth + 1;
            hi[a] = face;
            CubeId ulo = lo, uhi = hi;
            ulo[a] = face + 1;
            uhi[a] = face + depth;
            return std::make_pair(Box(lo, hi), Box(ulo, uhi));
          };
          std::vector<int> widths;
          for (int w = 1; w < k; w *= 2) widths.push_back(w);
          widths.push_back(k);
          for (std::size_t li = 0; li < widths.size(); ++li) {
            for (auto& [r1, b1] : split(widths[li], rs, bs)) {
              const auto [bl, bu] = boxes(r1, b1, widths[li]);
              levels[li].push_back(plan_exchange(t, bl, bu, a, r1, b1, widths[li] == 1));
              near_pairs += r1.size();
            }
          }
          if (!rs.empty()) {
            const auto [bl, bu] = boxes(rs, bs, 0);
            far.push_back(plan_exchange(t, bl, bu, a, rs, bs, false));
            far_pairs += rs.size();
          }
        }
      }
      if (!far.empty()) {
        emit_exchanges(flow, arr, far);
        l2_after_far = std::max(l2_after_far, l2_to_identity(arr.snapshot()));
      }
      for (auto it = levels.rbegin(); it != levels.rend(); ++it) emit_exchanges(flow, arr, *it);
    }
    done.push_back(a);
  }
  StepReport r = make_report(std::move(flow), arr, bound);
  const double w = std::pow(static_cast<double>(t.n()), -t.nu());
  r.stats["far_pairs"] = static_cast<double>(far_pairs);
  r.stats["near_pairs"] = static_cast<double>(near_pairs);
  r.stats["colored_volume_after_far"] = 2.0 * static_cast<double>(near_pairs) * w;
  r.stats["l2_after_far"] = l2_after_far;
  return r;
}

StepReport step3_finish(const Permutation& p, const PipelineConfig& cfg) {
  const Tiling& t = p.tiling();
  check_config(t, cfg);
  if (!is_block_constant(p, cfg.coarse)) throw PreconditionError("finishing needs a block-constant permutation");
  const double bound = kConstants.step3 * cfg.scale();
  Arrangement arr(p);
  DiscreteFlow flow(t);
  const int k = cfg.fine, s = cfg.coarse;

  // Route whole coarse blocks; each coarse swap reverses the fine lines through both blocks.
  const Tiling coarse(t.nu(), s);
  std::vector<std::size_t> dest(coarse.size());
  for (std::size_t c = 0; c < coarse.size(); ++c) {
    CubeId cc = coarse.coords(c);
    for (auto& v : cc) v *= k;
    dest[c] = coarse_of(t, k, arr.occupant(t.index(cc)));
  }
  double coarse_cost = 0.0;
  for (const auto& round : route_rounds(coarse, Box::whole(coarse), dest)) {
    EMovement e;
    for (auto [u, v] : round.pairs) {
      if (u > v) std::swap(u, v);
      int a = 0;
      while (coarse.coord(u, a) == coarse.coord(v, a)) ++a;
      CubeId lo = coarse.coords(u);
      for (auto& x : lo) x *= k;
      CubeId hi = lo;
      for (int b = 0; b < t.nu(); ++b) hi[b] += b == a ? 0 : k - 1;
      const Box face(lo, hi);
      std::vector<int> pos(static_cast<std::size_t>(2 * k));
      for (int i = 0; i < 2 * k; ++i) pos[i] = i;
      for (std::size_t r = 0; r < face.volume(); ++r)
        e.sequences.push_back(line_sequence(t, face.cube_at(t, r), a, 2 * k, pos));
    }
    coarse_cost += movement_cost(t, e);
    emit(flow, arr, e);
  }

  std::vector<std::vector<SMovement>> parts;
  for (std::size_t c = 0; c < coarse.size(); ++c) {
    CubeId cc = coarse.coords(c);
    std::vector<int> fixed(cc.begin(), cc.end());
    const Box box = slab(cfg, fixed);
    std::vector<std::size_t> d(box.volume());
    for (std::size_t r = 0; r < d.size(); ++r) d[r] = arr.occupant(box.cube_at(t, r));
    parts.push_back(route_rounds(t, box, d));
  }
  // Inner swaps are charged as length-2 arrays, like every other step of the chain.
  for (const auto& round : merge_rounds(parts)) emit(flow, arr, embed_s_as_e(t, round));
  StepReport r = make_report(std::move(flow), arr, bound);
  r.stats["coarse_cost"] = coarse_cost;
  if (!r.result.is_identity()) throw std::logic_error("finishing did not reach the identity");
  return r;
}

OrbitReport compute_orbits(const Permutation& p, const PipelineConfig& cfg) {
  const Tiling& t = p.tiling();
  check_config(t, cfg);
  if (max_displacement(p) > cfg.scale() * (1 + 1e-12))
    throw PreconditionError("orbits need every displacement within delta^epsilon");
  const int axis = t.nu() >= 2 ? 1 : 0;
  const int k = cfg.fine;
  auto slab_of = [&](std::size_t cube) { return t.coord(cube, axis) / k; };
  std::vector<int> colour(t.size(), 0);
  std::vector<std::size_t> reds(static_cast<std::size_t>(cfg.coarse), 0), blacks(static_cast<std::size_t>(cfg.coarse), 0);
  for (std::size_t x = 0; x < t.size(); ++x) {
    const int d = slab_of(p(x)) - slab_of(x);
    if (d == -1) colour[x] = 1;
    if (d == 1) colour[x] = 2;
    if (d == -1) ++blacks[slab_of(x)];
    if (d == 1) ++reds[slab_of(x)];
  }
  OrbitReport rep{Coloring(t, Box::whole(t), colour), {}, true};
  for (int i = 0; i + 1 < cfg.coarse; ++i) rep.balanced = rep.balanced && reds[i] == blacks[i + 1];
  for (std::size_t x = 0; x < t.size(); ++x) {
    if (colour[x] != 2) continue;
    OrbitRecord rec;
    rec.seed = x;
    const int lower = slab_of(x) + 1;
    std::size_t y = p(x);
    while (y != x) {
      if (slab_of(y) == lower) {
        rec.orbit.push_back(y);
        if (colour[y] == 1) break;
      }
      y = p(y);
    }
    if (y == x) throw std::logic_error("orbit closed without reaching a black cube");
    rec.nbar = rec.orbit.size();
    rec.displacement = center_distance(t, x, rec.orbit.back());
    rep.orbits.push_back(std::move(rec));
  }
  return rep;
}

ConnectResult connect_to_identity(const Permutation& p, std::optional<double> epsilon) {
  const Tiling& t = p.tiling();
  const double l2 = l2_to_identity(p);
  ConnectResult res{PipelineConfig{}, DiscreteFlow(t), l2, 0.0, {}};
  if (p.is_identity()) {
    res.cfg.nu = t.nu();
    res.cfg.n = t.n();
    res.cfg.fine = t.n();
    return res;
  }
  res.cfg = make_config(t, std::min(l2, 0.999), epsilon);
  Permutation cur = p;
  for (int step = 0; step < 3; ++step) {
    StepReport r = step == 0 ? step1_localize(cur, res.cfg)
                 : step == 1 ? step2_blockify(cur, res.cfg)
                             : step3_finish(cur, res.cfg);
    res.flow.append(r.flow);
    cur = r.result;
    res.steps.push_back(std::move(r));
  }
  res.cost = res.flow.total_cost();
  return res;
}

ExperimentTable exponent_experiment(int nu, const std::vector<int>& n_list, const std::vector<double>& deltas,
                                    const std::vector<std::uint64_t>& seeds, unsigned threads) {
  struct Job {
    int n;
    double delta;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int n : n_list)
    for (double d : deltas)
      for (auto s : seeds) jobs.push_back({n, d, s});
  ExperimentTable table;
  table.rows.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const Job& j = jobs[i];
        const Tiling t(nu, j.n);
        const Permutation p = random_near_identity(t, j.delta, j.seed);
        const ConnectResult c = connect_to_identity(p);
        ExperimentRow& row = table.rows[i];
        row.nu = nu;
        row.n = j.n;
        row.seed = j.seed;
        row.delta = j.delta;
        row.epsilon = c.cfg.epsilon;
        row.l2 = c.l2;
        for (std::size_t s = 0; s < c.steps.size(); ++s) {
          row.cost[s] = c.steps[s].cost;
          row.bound[s] = c.steps[s].bound;
        }
        row.total = c.cost;
        row.alpha_ref = nu == 2 ? 2.0 / 7.0 : 1.0 / (nu + 1);
      } catch (...) {
        std::lock_guard<std::mutex> g(failure_lock);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned n_threads = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(std::max<std::size_t>(1, jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t cnt = 0;
  for (const auto& r : table.rows) {
    if (r.l2 <= 0 || r.total <= 0) continue;
    const double x = std::log(r.l2), y = std::log(r.total);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt >= 2 && cnt * sxx - sx * sx != 0) table.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  return table;
}

void write_csv(std::ostream& os, const ExperimentTable& table) {
  os << "nu,N,seed,delta,epsilon,l2,cost1,bound1,cost2,bound2,cost3,bound3,total,alpha_ref\n";
  char buf[512];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%llu,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  r.nu, r.n, static_cast<unsigned long long>(r.seed), r.delta, r.epsilon, r.l2, r.cost[0], r.bound[0],
                  r.cost[1], r.bound[1], r.cost[2], r.bound[2], r.total, r.alpha_ref);
    os << buf;
  }
}

}  // namespace dflow
