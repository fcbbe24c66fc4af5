#pragma once

#include <array>
#include <vector>

#include "graphflow/energy.hpp"
#include "graphflow/graph_dynamics.hpp"
#include "graphflow/grid.hpp"
#include "graphflow/tensor_field.hpp"

namespace graphflow {

// Cell-average densities with respect to Lebesgue measure, one field per species.
struct LocalState {
  std::vector<NodeField> rho;

  std::size_t species() const { return rho.size(); }
  std::size_t cells() const { return rho.empty() ? 0 : rho.front().size(); }
};

using VectorField = std::vector<Vec2>;

// Normal flux through the upper face of every cell, per species and axis:
// face[i][a][k] is the flux from cell k into its upper neighbour along a.
// Faces on the boundary of a bounded box carry zero.
struct InterfaceFlux {
  std::vector<std::array<NodeField, 2>> face;
};

std::vector<double> local_masses(const LocalState& state, const SpatialGrid& grid);

// -grad P^(i) - sum_j grad_x K^(ij) * rho^(j).
std::vector<VectorField> local_velocity(const KernelSet& ks, const PotentialSet& ps, const LocalState& state,
                                        const SpatialGrid& grid);

// Cell-centred flux vector, the mean of the two face fluxes along each axis.
std::vector<VectorField> cell_flux(const InterfaceFlux& flux, const SpatialGrid& grid);

// sum <v, T v> rho vol over species and cells.
double local_slope(const LocalState& state, const std::vector<VectorField>& velocity, const TensorField& tensor,
                   const SpatialGrid& grid);
double local_slope(const LocalState& state, const KernelSet& ks, const PotentialSet& ps, const TensorField& tensor,
                   const SpatialGrid& grid);

// sum <T^-1 j, j> / rho vol over cells with positive density. An empty cell
// makes the action +inf when its flux exceeds 1e-14 max density times the
// largest speed |j| / rho among cells above that density.
double local_action(const LocalState& state, const std::vector<VectorField>& flux, const TensorField& tensor,
                    const SpatialGrid& grid);

struct LocalStepRecord {
  double t = 0.0;
  double dt = 0.0;
  double energy = 0.0;
  double slope = 0.0;
  double action = 0.0;    // action of the realized flux over [t, t + dt]
  double power = 0.0;     // sum grad(phi) . j vol over [t, t + dt]
  double residual = 0.0;  // E(t + dt) - E(t) + dt * slope(t)
  std::vector<double> mass;
  std::vector<double> min_density;
  std::vector<double> variance;
};

struct LocalSnapshot {
  std::size_t step = 0;
  double t = 0.0;
  LocalState state;
};

struct LocalTrajectory {
  std::vector<LocalStepRecord> records;
  std::vector<LocalSnapshot> snapshots;
  LocalState final_state;

  std::size_t steps() const { return records.empty() ? 0 : records.size() - 1; }
  double final_time() const { return records.empty() ? 0.0 : records.back().t; }
};

class LocalFlow {
 public:
  LocalFlow(const SpatialGrid& grid, const KernelSet& ks, const PotentialSet& ps, TensorField tensor,
            std::size_t cache_bytes = InteractionOperator::kDefaultCacheBytes);

  const SpatialGrid& grid() const { return grid_; }
  const TensorField& tensor() const { return tensor_; }
  const InteractionOperator& interaction() const { return op_; }

  struct Evaluation {
    double energy = 0.0;
    std::vector<VectorField> velocity;        // v = -grad(phi)
    std::vector<std::array<NodeField, 2>> u;  // face velocities (T v averaged), upper faces
    std::vector<NodeField> rates;             // total outflow rate per cell
    double max_rate = 0.0;
  };
  Evaluation evaluate(const LocalState& state) const;

  LocalState euler_update(const LocalState& state, const Evaluation& ev, double dt, InterfaceFlux* flux) const;
  // One Euler step; throws CflError when dt exceeds the positivity bound.
  LocalState step(const LocalState& state, double dt, InterfaceFlux* flux = nullptr) const;
  LocalTrajectory evolve(const LocalState& initial, const IntegratorConfig& config) const;

 private:
  const SpatialGrid& grid_;
  InteractionOperator op_;
  TensorField tensor_;
  std::vector<SmallMatrix> tensor_inverse_;
};

LocalTrajectory evolve_local(const LocalState& initial, const KernelSet& ks, const PotentialSet& ps,
                             const TensorField& tensor, const SpatialGrid& grid, const IntegratorConfig& config);

// E(T) - E(0) + 1/2 sum dt (slope + action).
double local_de_giorgi_residual(const LocalTrajectory& traj);

// max over n of |E(t_n) - E(t_0) - sum_{m<n} dt_m power_m|.
double chain_rule_residual(const LocalTrajectory& traj);

void check_local_state(const LocalState& state, const SpatialGrid& grid, std::size_t species);

}  // namespace graphflow
