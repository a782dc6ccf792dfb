#pragma once

#include <cstdint>

#include "dflow/movements.hpp"

namespace dflow {

// Counter-based SplitMix64: value i of stream `seed` is a pure function of (seed, i).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0) : seed_(seed), counter_(counter) {}

  std::uint64_t next();
  double uniform();                           // [0, 1)
  std::uint64_t below(std::uint64_t bound);   // [0, bound)
  CounterRng split(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

// Random axis and parity; each eligible adjacent pair taken with probability 1/2.
SMovement random_s_movement(const Tiling& t, CounterRng& rng);

Permutation random_permutation(const Tiling& t, CounterRng& rng);

// Composes random S-movements, then single swaps of the last one, until the
// distance to the identity lands in [0.9 delta, 1.1 delta].
Permutation random_near_identity(const Tiling& t, double delta, std::uint64_t seed);

}  // namespace dflow
