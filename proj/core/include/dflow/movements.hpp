#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dflow/lattice.hpp"

namespace dflow {

using CubePair = std::pair<std::size_t, std::size_t>;

// Simultaneous swaps of disjoint adjacent cube pairs.
struct SMovement {
  std::vector<CubePair> pairs;
  std::size_t swap_count() const { return pairs.size(); }
};

// Couples inside one array: positions are strictly increasing offsets along the
// array, and couple j exchanges positions[j] with positions[size-1-j].
struct CoupleSequence {
  Box array;
  std::vector<int> positions;
  std::size_t couple_count() const { return positions.size() / 2; }
};

// Couple sequences acting at once on pairwise disjoint arrays.
struct EMovement {
  std::vector<CoupleSequence> sequences;
  std::size_t couple_count() const;
  int max_length() const;
};

using Movement = std::variant<SMovement, EMovement>;

struct ValidationReport {
  bool ok = true;
  std::string clause;
  std::vector<CubeId> cubes;
  explicit operator bool() const { return ok; }
  std::string describe() const;
};

ValidationReport validate_movement(const Tiling& t, const SMovement& m);
ValidationReport validate_movement(const Tiling& t, const EMovement& m);
ValidationReport validate_movement(const Tiling& t, const Movement& m);

double movement_cost(const Tiling& t, const SMovement& m);
double movement_cost(const Tiling& t, const EMovement& m);
double movement_cost(const Tiling& t, const Movement& m);

std::size_t array_cube(const Tiling& t, const CoupleSequence& s, int offset);
// The transpositions a movement performs, as pairs of cube indices.
std::vector<CubePair> transpositions(const Tiling& t, const Movement& m);

Permutation apply_movement(const Permutation& p, const Movement& m);

class DiscreteFlow {
 public:
  explicit DiscreteFlow(const Tiling& t) : tiling_(t) {}

  const Tiling& tiling() const { return tiling_; }
  const std::vector<Movement>& steps() const { return steps_; }
  const std::vector<double>& step_costs() const { return costs_; }
  std::size_t duration() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }
  double total_cost() const { return total_; }

  // Validates the step; throws ValidationError naming the step index.
  void push(Movement m);
  void append(const DiscreteFlow& other);
  // Same steps in reverse order; undoes this flow since every step is an involution.
  DiscreteFlow reversed() const;

 private:
  Tiling tiling_;
  std::vector<Movement> steps_;
  std::vector<double> costs_;
  double total_ = 0.0;
};

EMovement embed_s_as_e(const Tiling& t, const SMovement& s);
DiscreteFlow lower_e_to_s(const Tiling& t, const EMovement& e);

struct FlowOutcome {
  Permutation result;
  double cost;
};
FlowOutcome flow_apply_and_cost(const Permutation& p, const DiscreteFlow& f);

// Flow cost when every S step is charged as its embedded E movement.
double e_cost(const DiscreteFlow& f);

// Mutable permutation used while building flows: tracks where each cube
// currently sits and which cube occupies each place.
class Arrangement {
 public:
  explicit Arrangement(const Permutation& p);

  const Tiling& tiling() const { return tiling_; }
  std::size_t position(std::size_t cube) const { return static_cast<std::size_t>(pos_[cube]); }
  std::size_t occupant(std::size_t place) const { return static_cast<std::size_t>(occ_[place]); }
  void swap_places(std::size_t a, std::size_t b);
  void apply(const Movement& m);
  void apply(const DiscreteFlow& f);
  Permutation snapshot() const { return Permutation(tiling_, pos_); }

 private:
  Tiling tiling_;
  std::vector<std::int32_t> pos_;
  std::vector<std::int32_t> occ_;
};

// Round-wise union of flows acting on disjoint regions.
std::vector<SMovement> merge_rounds(const std::vector<std::vector<SMovement>>& parts);
std::vector<EMovement> merge_rounds(const std::vector<std::vector<EMovement>>& parts);

// Odd-even transposition sort of keys laid along cubes[0..n). Returns the
// non-empty rounds as adjacent pairs of cube indices.
std::vector<SMovement> odd_even_rounds(const std::vector<std::size_t>& cubes, std::vector<long long> keys);

}  // namespace dflow
