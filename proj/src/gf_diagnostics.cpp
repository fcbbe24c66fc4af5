#include "graphflow/gf_diagnostics.hpp"

#include <cmath>
#include <limits>

#include "graphflow/error.hpp"

namespace graphflow {

double action_density(const Graph& graph, const SpeciesState& state, const EdgeField& velocity) {
  const auto& edges = graph.edges();
  const auto& m = graph.base().weights;
  double total = 0.0;
  for (std::size_t i = 0; i < velocity.species(); ++i) {
    const auto& v = velocity.values[i];
    const auto& r = state.r[i];
    double s = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const Edge& ed = edges[e];
      if (v[e] == 0.0) continue;
      const double up = v[e] > 0.0 ? r[ed.k] : r[ed.l];
      s += ed.weight * v[e] * v[e] * up * m[ed.k] * m[ed.l];
    }
    total += s;
  }
  return total;
}

double action_from_flux(const Graph& graph, const SpeciesState& state, const EdgeField& flux) {
  const auto& edges = graph.edges();
  const auto& m = graph.base().weights;
  double total = 0.0;
  for (std::size_t i = 0; i < flux.species(); ++i) {
    const auto& j = flux.values[i];
    const auto& r = state.r[i];
    double s = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const Edge& ed = edges[e];
      if (j[e] == 0.0) continue;
      const double up = j[e] > 0.0 ? r[ed.k] : r[ed.l];
      if (!(up > 0.0)) return std::numeric_limits<double>::infinity();
      s += ed.weight * j[e] * j[e] / (up * m[ed.k] * m[ed.l]);
    }
    total += s;
  }
  return total;
}

double metric_slope(const Graph& graph, const SpeciesState& state, const KernelSet& ks, const PotentialSet& ps) {
  return action_density(graph, state, upwind_velocity(ks, ps, state, graph));
}

double de_giorgi_residual(const Trajectory& traj) {
  if (traj.records.empty()) return 0.0;
  double integral = 0.0;
  for (std::size_t n = 0; n + 1 < traj.records.size(); ++n) {
    const StepRecord& r = traj.records[n];
    integral += r.dt * (r.slope + r.action);
  }
  return traj.records.back().energy - traj.records.front().energy + 0.5 * integral;
}

double max_dissipation_residual(const Trajectory& traj) {
  double mx = 0.0;
  for (std::size_t n = 0; n + 1 < traj.records.size(); ++n) mx = std::max(mx, std::abs(traj.records[n].residual));
  return mx;
}

double total_dissipation_residual(const Trajectory& traj) {
  double s = 0.0;
  for (std::size_t n = 0; n + 1 < traj.records.size(); ++n) s += std::abs(traj.records[n].residual);
  return s;
}

double first_variation_form(const Graph& graph, const SpeciesState& state, const std::vector<NodeField>& phi,
                            const std::vector<NodeField>& psi) {
  if (phi.size() != state.species() || psi.size() != state.species())
    throw ConfigError("first variation needs one phi and one psi field per species");
  const auto& edges = graph.edges();
  const auto& m = graph.base().weights;
  double total = 0.0;
  for (std::size_t i = 0; i < state.species(); ++i) {
    const auto& r = state.r[i];
    double s = 0.0;
    for (const Edge& ed : edges) {
      const double a = phi[i][ed.l] - phi[i][ed.k];
      const double b = psi[i][ed.l] - psi[i][ed.k];
      s += ed.weight * b * (std::max(a, 0.0) * r[ed.k] - std::max(-a, 0.0) * r[ed.l]) * m[ed.k] * m[ed.l];
    }
    total += s;
  }
  return total;
}

}  // namespace graphflow
