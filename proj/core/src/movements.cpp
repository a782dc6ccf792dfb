#include "dflow/movements.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dflow {

std::size_t EMovement::couple_count() const {
  std::size_t c = 0;
  for (const auto& s : sequences) c += s.couple_count();
  return c;
}

int EMovement::max_length() const {
  int m = 0;
  for (const auto& s : sequences)
    if (s.couple_count() > 0) m = std::max(m, s.array.max_extent());
  return m;
}

std::string ValidationReport::describe() const {
  if (ok) return "valid";
  std::string out = clause;
  if (!cubes.empty()) {
    out += " at";
    for (const auto& c : cubes) out += " " + format_cube(c);
  }
  return out;
}

namespace {

ValidationReport fail(std::string clause, std::vector<CubeId> cubes = {}) {
  ValidationReport r;
  r.ok = false;
  r.clause = std::move(clause);
  r.cubes = std::move(cubes);
  return r;
}

// First repeated value in a sorted copy, or size when all distinct.
std::size_t first_repeat(std::vector<std::size_t> v, std::size_t none) {
  std::sort(v.begin(), v.end());
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] == v[i - 1]) return v[i];
  return none;
}

}  // namespace

ValidationReport validate_movement(const Tiling& t, const SMovement& m) {
  std::vector<std::size_t> used;
  used.reserve(2 * m.pairs.size());
  for (const auto& [a, b] : m.pairs) {
    if (a >= t.size() || b >= t.size()) return fail("cube outside tiling");
    if (!are_adjacent(t, a, b)) return fail("pair is not adjacent", {t.coords(a), t.coords(b)});
    used.push_back(a);
    used.push_back(b);
  }
  const std::size_t dup = first_repeat(used, t.size());
  if (dup != t.size()) return fail("pairs are not disjoint", {t.coords(dup)});
  return {};
}

ValidationReport validate_movement(const Tiling& t, const EMovement& m) {
  std::vector<std::size_t> used;
  for (const auto& s : m.sequences) {
    const Box& b = s.array;
    if (!b.within(t)) return fail("array outside tiling", {b.lo(), b.hi()});
    if (b.kind() != Box::Kind::Array) return fail("region is not an array", {b.lo(), b.hi()});
    const int len = b.extent(b.array_axis());
    if (s.positions.size() % 2 != 0) return fail("odd number of couple positions", {b.lo()});
    for (std::size_t i = 0; i < s.positions.size(); ++i) {
      const int p = s.positions[i];
      if (p < 0 || p >= len) return fail("couple position outside array", {b.lo(), b.hi()});
      if (i > 0 && p <= s.positions[i - 1]) return fail("couple positions not strictly increasing", {b.lo()});
    }
    for (std::size_t r = 0; r < b.volume(); ++r) used.push_back(b.cube_at(t, r));
  }
  const std::size_t dup = first_repeat(used, t.size());
  if (dup != t.size()) return fail("arrays are not disjoint", {t.coords(dup)});
  return {};
}

ValidationReport validate_movement(const Tiling& t, const Movement& m) {
  return std::visit([&](const auto& x) { return validate_movement(t, x); }, m);
}

double movement_cost(const Tiling& t, const SMovement& m) {
  return t.cost_unit() * std::sqrt(static_cast<double>(m.pairs.size()));
}

double movement_cost(const Tiling& t, const EMovement& m) {
  const double h = static_cast<double>(m.couple_count());
  return static_cast<double>(m.max_length()) * t.cost_unit() * std::sqrt(h);
}

double movement_cost(const Tiling& t, const Movement& m) {
  return std::visit([&](const auto& x) { return movement_cost(t, x); }, m);
}

std::size_t array_cube(const Tiling& t, const CoupleSequence& s, int offset) {
  const int ax = s.array.array_axis();
  return t.index(s.array.lo()) + static_cast<std::size_t>(offset) * t.stride(ax);
}

std::vector<CubePair> transpositions(const Tiling& t, const Movement& m) {
  if (const auto* sm = std::get_if<SMovement>(&m)) return sm->pairs;
  std::vector<CubePair> out;
  for (const auto& s : std::get<EMovement>(m).sequences) {
    const std::size_t k = s.positions.size();
    for (std::size_t j = 0; j < k / 2; ++j)
      out.emplace_back(array_cube(t, s, s.positions[j]), array_cube(t, s, s.positions[k - 1 - j]));
  }
  return out;
}

Arrangement::Arrangement(const Permutation& p)
    : tiling_(p.tiling()), pos_(p.target()), occ_(p.inverse_table()) {}

void Arrangement::swap_places(std::size_t a, std::size_t b) {
  const auto ca = occ_[a];
  const auto cb = occ_[b];
  occ_[a] = cb;
  occ_[b] = ca;
  pos_[ca] = static_cast<std::int32_t>(b);
  pos_[cb] = static_cast<std::int32_t>(a);
}

void Arrangement::apply(const Movement& m) {
  for (const auto& [a, b] : transpositions(tiling_, m)) swap_places(a, b);
}

void Arrangement::apply(const DiscreteFlow& f) {
  for (const auto& m : f.steps()) apply(m);
}

Permutation apply_movement(const Permutation& p, const Movement& m) {
  const auto report = validate_movement(p.tiling(), m);
  if (!report) throw ValidationError("invalid movement: " + report.describe());
  Arrangement a(p);
  a.apply(m);
  return a.snapshot();
}

void DiscreteFlow::push(Movement m) {
  const auto report = validate_movement(tiling_, m);
  if (!report)
    throw ValidationError("step " + std::to_string(steps_.size()) + " invalid: " + report.describe());
  const double c = movement_cost(tiling_, m);
  steps_.push_back(std::move(m));
  costs_.push_back(c);
  total_ += c;
}

void DiscreteFlow::append(const DiscreteFlow& other) {
  if (other.tiling_ != tiling_) throw DimensionError("flows on different tilings");
  steps_.insert(steps_.end(), other.steps_.begin(), other.steps_.end());
  for (double c : other.costs_) {
    costs_.push_back(c);
    total_ += c;  // step by step, so a reloaded flow sums to the same bits
  }
}

DiscreteFlow DiscreteFlow::reversed() const {
  DiscreteFlow r(tiling_);
  r.steps_.assign(steps_.rbegin(), steps_.rend());
  r.costs_.assign(costs_.rbegin(), costs_.rend());
  for (double c : r.costs_) r.total_ += c;
  return r;
}

EMovement embed_s_as_e(const Tiling& t, const SMovement& s) {
  EMovement e;
  for (auto [a, b] : s.pairs) {
    if (a > b) std::swap(a, b);
    e.sequences.push_back({Box(t.coords(a), t.coords(b)), {0, 1}});
  }
  return e;
}

std::vector<SMovement> odd_even_rounds(const std::vector<std::size_t>& cubes, std::vector<long long> keys) {
  std::vector<SMovement> rounds;
  const std::size_t n = cubes.size();
  auto sorted = [&] { return std::is_sorted(keys.begin(), keys.end()); };
  for (std::size_t r = 0; !sorted(); ++r) {
    SMovement m;
    for (std::size_t i = r % 2; i + 1 < n; i += 2) {
      if (keys[i] > keys[i + 1]) {
        std::swap(keys[i], keys[i + 1]);
        m.pairs.emplace_back(cubes[i], cubes[i + 1]);
      }
    }
    if (!m.pairs.empty()) rounds.push_back(std::move(m));
  }
  return rounds;
}

std::vector<SMovement> merge_rounds(const std::vector<std::vector<SMovement>>& parts) {
  std::vector<SMovement> out;
  for (const auto& part : parts) {
    if (part.size() > out.size()) out.resize(part.size());
    for (std::size_t i = 0; i < part.size(); ++i)
      out[i].pairs.insert(out[i].pairs.end(), part[i].pairs.begin(), part[i].pairs.end());
  }
  return out;
}

std::vector<EMovement> merge_rounds(const std::vector<std::vector<EMovement>>& parts) {
  std::vector<EMovement> out;
  for (const auto& part : parts) {
    if (part.size() > out.size()) out.resize(part.size());
    for (std::size_t i = 0; i < part.size(); ++i)
      out[i].sequences.insert(out[i].sequences.end(), part[i].sequences.begin(), part[i].sequences.end());
  }
  return out;
}

DiscreteFlow lower_e_to_s(const Tiling& t, const EMovement& e) {
  const auto report = validate_movement(t, e);
  if (!report) throw ValidationError("invalid movement: " + report.describe());
  std::vector<std::vector<SMovement>> parts;
  for (const auto& s : e.sequences) {
    const std::size_t k = s.positions.size();
    if (k == 0) continue;
    const int first = s.positions.front();
    const int last = s.positions.back();
    // key of each offset = where its content must end up
    std::vector<long long> keys;
    std::vector<std::size_t> cubes;
    for (int p = first; p <= last; ++p) {
      keys.push_back(p);
      cubes.push_back(array_cube(t, s, p));
    }
    for (std::size_t j = 0; j < k; ++j) keys[s.positions[j] - first] = s.positions[k - 1 - j];
    parts.push_back(odd_even_rounds(cubes, keys));
  }
  DiscreteFlow f(t);
  for (auto& m : merge_rounds(parts)) f.push(std::move(m));
  return f;
}

FlowOutcome flow_apply_and_cost(const Permutation& p, const DiscreteFlow& f) {
  if (p.tiling() != f.tiling()) throw DimensionError("flow and permutation on different tilings");
  Arrangement a(p);
  a.apply(f);
  return {a.snapshot(), f.total_cost()};
}

double e_cost(const DiscreteFlow& f) {
  double c = 0.0;
  for (const auto& m : f.steps()) {
    if (const auto* s = std::get_if<SMovement>(&m))
      c += movement_cost(f.tiling(), embed_s_as_e(f.tiling(), *s));
    else
      c += movement_cost(f.tiling(), m);
  }
  return c;
}

}  // namespace dflow
