#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dflow/lattice.hpp"
#include "dflow/movements.hpp"

namespace dflow {

enum class DistanceMode { S, E };

struct OracleLimits {
  std::size_t max_states = 3628800;  // 10!
  int max_array = 0;                 // longest array used by E generators; 0 means no limit
  std::optional<Box> region;         // cubes allowed to move; the whole tiling when empty
};

struct OracleResult {
  double distance = 0.0;
  DiscreteFlow witness;
  std::size_t states_settled = 0;
};

// Exact weighted shortest path from p to q in the graph whose edges are single
// movements. Throws CapacityError when the state space exceeds the limit.
OracleResult exact_distance(const Permutation& p, const Permutation& q, DistanceMode mode,
                            const OracleLimits& limits = {});

// Every permutation moving only cubes of `region`, in lexicographic order of
// their restriction.
std::vector<Permutation> region_permutations(const Tiling& t, const Box& region);

struct EquivalenceRow {
  Permutation p;
  bool skipped = false;  // identity
  double dist_s = 0.0;
  double dist_e = 0.0;
  double l2 = 0.0;
  bool holds = true;  // dist_e <= 2 dist_s
};

struct EquivalenceReport {
  std::vector<EquivalenceRow> rows;
  bool all_hold = true;
  double max_ratio = 0.0;  // max dist_s / dist_e
};

EquivalenceReport equivalence_report(const Tiling& t, const std::vector<Permutation>& sample,
                                     const OracleLimits& limits = {});

}  // namespace dflow
