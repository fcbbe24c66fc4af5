#pragma once

#include <string>
#include <vector>

#include "graphflow/energy.hpp"
#include "graphflow/graph_dynamics.hpp"
#include "graphflow/graph_model.hpp"
#include "graphflow/local_dynamics.hpp"

namespace graphflow {

// Discrete 1-Wasserstein distance of two Lebesgue densities on a 1D grid:
// sum_k |F_a(k) - F_b(k)| h with F the cumulative cell masses. Throws
// ConfigError when the masses differ by more than 1e-8.
double w1_distance_1d(const NodeField& a, const NodeField& b, const SpatialGrid& grid);

// Half the L1 distance of two Lebesgue densities (total variation).
double total_variation_distance(const NodeField& a, const NodeField& b, const SpatialGrid& grid);

// Lebesgue density r mu~ of a graph state.
std::vector<NodeField> lebesgue_densities(const SpeciesState& state, const BaseMeasure& bm);
// Graph state r = rho / mu~ of a Lebesgue density.
SpeciesState graph_state_from_lebesgue(const LocalState& state, const BaseMeasure& bm);

// Per-species distance between a graph state and a local state on the same
// grid: W1 for d = 1, total variation for d = 2.
std::vector<double> compare_states(const SpeciesState& graph_state, const BaseMeasure& bm, const LocalState& local,
                                   const SpatialGrid& grid);

struct SweepConfig {
  SpatialGrid grid = SpatialGrid::line(0.0, 1.0, 64);
  DensityFunction density = [](const Vec2&) { return 1.0; };
  Connectivity connectivity;
  KernelSet kernels{1};
  PotentialSet potentials = zero_potentials(1);
  LocalState initial;  // Lebesgue densities of unit mass
  std::vector<double> epsilons;  // strictly decreasing
  IntegratorConfig graph_integrator;
  IntegratorConfig local_integrator;
  int tensor_resolution = 512;
  std::vector<Potential> test_fields;  // fields phi for the first-variation check
  bool record_runtime = true;
  std::size_t cache_bytes = InteractionOperator::kDefaultCacheBytes;
};

struct SweepRow {
  double epsilon = 0.0;
  std::size_t species = 0;  // 1-based
  double distance_T = 0.0;
  double tensor_err = 0.0;
  double degiorgi_graph = 0.0;
  double degiorgi_local = 0.0;
  double l_eps_err = 0.0;
  double runtime_s = 0.0;
  std::string error;  // empty when the row's runs succeeded
};

struct SweepReport {
  std::vector<SweepRow> rows;  // decreasing epsilon, then species
  LocalTrajectory local;

  // distance_T per epsilon for one species (0-based).
  std::vector<double> distances(std::size_t species) const;
};

SweepReport run_sweep(const SweepConfig& cfg);

}  // namespace graphflow
