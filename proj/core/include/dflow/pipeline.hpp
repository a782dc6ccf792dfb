#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dflow/movements.hpp"

namespace dflow {

// Measured constants, calibrated on seeds disjoint from the tests, with margin.
struct PipelineConstants {
  double displacement = 1.5;   // max displacement after localization <= this * delta^eps
  double local_norm = 1.25;    // distance after localization <= this * delta^(1 - eps/2)
  double step1 = 2.0;          // localization cost <= this * delta^(1 - eps)
  double step2 = 2.25;         // blockification cost <= this * max(...)
  double step3 = 4.0;          // finishing cost <= this * delta^eps
};

inline const PipelineConstants kConstants{};

struct PipelineConfig {
  int nu = 2;
  int n = 1;
  double delta = 0.0;
  double epsilon = 0.0;
  int coarse = 1;  // coarse cubes per side
  int fine = 1;    // fine cubes per coarse side

  double scale() const;  // delta^epsilon
};

double choose_epsilon(int nu, double delta);
// Largest power of two dividing n that is at most delta^-epsilon.
int coarse_side(int n, double delta, double epsilon);
PipelineConfig make_config(const Tiling& t, double delta, std::optional<double> epsilon = std::nullopt,
                           std::optional<int> coarse = std::nullopt);

struct StepReport {
  DiscreteFlow flow;
  Permutation result;
  double cost = 0.0;
  double bound = 0.0;
  double max_displacement = 0.0;
  double l2 = 0.0;
  std::map<std::string, double> stats;
};

StepReport step1_localize(const Permutation& p, const PipelineConfig& cfg);
StepReport step2_blockify(const Permutation& p, const PipelineConfig& cfg);
StepReport step3_finish(const Permutation& p, const PipelineConfig& cfg);

bool is_block_constant(const Permutation& p, int coarse);
// Coarse cube index (on the coarse tiling) of a fine cube.
std::size_t coarse_of(const Tiling& t, int fine, std::size_t cube);

struct OrbitRecord {
  std::size_t seed = 0;             // red cube
  std::vector<std::size_t> orbit;   // reduced orbit P^1..P^nbar inside the lower stripe
  std::size_t nbar = 0;
  double displacement = 0.0;        // |seed - P^nbar(seed)|
};

struct OrbitReport {
  Coloring coloring;  // 0 white, 1 black, 2 red, on the whole tiling
  std::vector<OrbitRecord> orbits;
  bool balanced = true;  // reds in each slab == blacks in the next slab
};

// Slabs along axis 1 of width one coarse cube.
OrbitReport compute_orbits(const Permutation& p, const PipelineConfig& cfg);

struct ConnectResult {
  PipelineConfig cfg;
  DiscreteFlow flow;
  double l2 = 0.0;
  double cost = 0.0;
  std::vector<StepReport> steps;
};

ConnectResult connect_to_identity(const Permutation& p, std::optional<double> epsilon = std::nullopt);

struct ExperimentRow {
  int nu = 2;
  int n = 1;
  std::uint64_t seed = 0;
  double delta = 0.0;
  double epsilon = 0.0;
  double l2 = 0.0;
  double cost[3] = {0, 0, 0};
  double bound[3] = {0, 0, 0};
  double total = 0.0;
  double alpha_ref = 0.0;
};

struct ExperimentTable {
  std::vector<ExperimentRow> rows;
  double slope = 0.0;  // least squares slope of log cost against log l2
};

ExperimentTable exponent_experiment(int nu, const std::vector<int>& n_list, const std::vector<double>& deltas,
                                    const std::vector<std::uint64_t>& seeds, unsigned threads = 0);
void write_csv(std::ostream& os, const ExperimentTable& table);

}  // namespace dflow
