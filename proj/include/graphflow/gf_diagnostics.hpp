#pragma once

#include <vector>

#include "graphflow/energy.hpp"
#include "graphflow/graph_dynamics.hpp"

namespace graphflow {

// Upwind action sum over unordered edges of eta v^2 r_up m_k m_l, where the
// upwind node is the source of the velocity.
double action_density(const Graph& graph, const SpeciesState& state, const EdgeField& velocity);

// Action of a realized flux: sum of eta j^2 / (r_up m_k m_l), the upwind node
// being the source of the flux. +inf when mass leaves a node without density.
double action_from_flux(const Graph& graph, const SpeciesState& state, const EdgeField& flux);

double metric_slope(const Graph& graph, const SpeciesState& state, const KernelSet& ks, const PotentialSet& ps);

// E(T) - E(0) + 1/2 sum dt (slope + action), left sums on the step grid.
double de_giorgi_residual(const Trajectory& traj);

// Largest and summed |E(t + dt) - E(t) + dt slope(t)| over the steps.
double max_dissipation_residual(const Trajectory& traj);
double total_dissipation_residual(const Trajectory& traj);

// Upwind first-variation form with a = grad(phi), b = grad(psi):
// sum over edges of eta b (a+ r_k - a- r_l) m_k m_l, summed over species.
double first_variation_form(const Graph& graph, const SpeciesState& state, const std::vector<NodeField>& phi,
                            const std::vector<NodeField>& psi);

}  // namespace graphflow
