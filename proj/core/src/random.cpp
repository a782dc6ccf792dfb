#include "dflow/random.hpp"

#include <cmath>
#include <numeric>

namespace dflow {

namespace {

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::next() {
  ++counter_;
  return mix(mix(seed_ + 0x632be59bd9b4e019ULL) + counter_ * 0x9e3779b97f4a7c15ULL);
}

double CounterRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t CounterRng::below(std::uint64_t bound) {
  if (bound == 0) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do x = next();
  while (x >= limit);
  return x % bound;
}

CounterRng CounterRng::split(std::uint64_t stream) const { return CounterRng(mix(seed_ ^ mix(stream + 1))); }

SMovement random_s_movement(const Tiling& t, CounterRng& rng) {
  const int axis = static_cast<int>(rng.below(static_cast<std::uint64_t>(t.nu())));
  const int parity = static_cast<int>(rng.below(2));
  SMovement m;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const int c = t.coord(k, axis);
    if (c % 2 != parity || c + 1 >= t.n()) continue;
    if (rng.next() & 1) m.pairs.emplace_back(k, k + t.stride(axis));
  }
  return m;
}

Permutation random_permutation(const Tiling& t, CounterRng& rng) {
  std::vector<std::int32_t> tab(t.size());
  std::iota(tab.begin(), tab.end(), 0);
  for (std::size_t i = tab.size(); i > 1; --i) std::swap(tab[i - 1], tab[rng.below(i)]);
  return Permutation(t, std::move(tab));
}

Permutation random_near_identity(const Tiling& t, double delta, std::uint64_t seed) {
  if (!(delta > 0.0)) throw PreconditionError("target distance must be positive");
  const double lo = 0.9 * delta, hi = 1.1 * delta;
  const double weight = std::pow(static_cast<double>(t.n()), -t.nu());
  CounterRng rng(seed);
  Arrangement arr(Permutation::identity(t));
  double sq = 0.0;  // running sum of squared displacements
  auto swap_pair = [&](std::size_t a, std::size_t b) {
    const std::size_t ca = arr.occupant(a), cb = arr.occupant(b);
    sq -= center_distance_sq(t, ca, a) + center_distance_sq(t, cb, b);
    arr.swap_places(a, b);
    sq += center_distance_sq(t, ca, b) + center_distance_sq(t, cb, a);
  };
  auto dist = [&] { return std::sqrt(std::max(0.0, sq) * weight); };

  const std::size_t max_moves = 64 * t.size() + 1024;
  for (std::size_t step = 0; step < max_moves; ++step) {
    SMovement m = random_s_movement(t, rng);
    const Arrangement before = arr;
    const double before_sq = sq;
    for (const auto& [a, b] : m.pairs) swap_pair(a, b);
    if (dist() < lo) continue;
    if (dist() <= hi) return arr.snapshot();
    // Overshoot: replay this movement one pair at a time, in random order.
    for (std::size_t i = m.pairs.size(); i > 1; --i) std::swap(m.pairs[i - 1], m.pairs[rng.below(i)]);
    arr = before;
    sq = before_sq;
    for (const auto& [a, b] : m.pairs) {
      swap_pair(a, b);
      if (dist() >= lo && dist() <= hi) return arr.snapshot();
      if (dist() > hi) break;
    }
    throw PreconditionError("no permutation found within 10% of the requested distance");
  }
  throw PreconditionError("requested distance not reached by random movements");
}

}  // namespace dflow
