#pragma once

#include <string>
#include <vector>

#include "graphflow/energy.hpp"
#include "graphflow/expression.hpp"
#include "graphflow/graph_dynamics.hpp"
#include "graphflow/graph_model.hpp"
#include "graphflow/limit_harness.hpp"
#include "graphflow/local_dynamics.hpp"
#include "graphflow/validation.hpp"

namespace graphflow {

enum class TensorSource { identity, from_connectivity, epsilon_graph };

struct RunConfig {
  SpatialGrid grid = SpatialGrid::line(0.0, 1.0, 64);
  DensityFunction density;
  BaseMeasure base = BaseMeasure::lebesgue(grid);
  double density_lower = 0.0;
  double density_upper = 0.0;
  Connectivity connectivity;
  double epsilon = 0.0;
  std::size_t species = 1;
  KernelSet kernels{1};
  PotentialSet potentials = zero_potentials(1);
  LocalState initial;  // Lebesgue densities normalized to unit mass
  IntegratorConfig integrator;
  IntegratorConfig local_integrator;
  TensorSource tensor_source = TensorSource::from_connectivity;
  int tensor_resolution = 512;
  std::vector<double> tensor_epsilons;
  std::vector<double> sweep_epsilons;
  std::vector<Potential> test_fields;
  bool record_runtime = true;
  std::size_t cache_bytes = InteractionOperator::kDefaultCacheBytes;
  std::string output_dir = "out";
  bool svg = false;
  std::vector<ValidationReport> reports;

  SpeciesState graph_initial() const { return graph_state_from_lebesgue(initial, base); }
  SweepConfig sweep_config() const;
};

// Kernel and potential presets ("zero", "quadratic(a)", "gaussian(a, s)")
// or expressions in x and y.
Kernel parse_kernel(const std::string& spec);
Potential parse_potential(const std::string& spec);
// "indicator_ball(c)", "identity", "gaussian_cutoff(s, R)", "ellipsoid(...)".
// Returns false if `spec` names no preset.
bool parse_connectivity_preset(const std::string& spec, int dim, BoundaryValue boundary, Connectivity& out);

RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

}  // namespace graphflow
