#pragma once

#include <string>
#include <vector>

#include "graphflow/graph_dynamics.hpp"
#include "graphflow/limit_harness.hpp"
#include "graphflow/local_dynamics.hpp"
#include "graphflow/tensor_field.hpp"

namespace graphflow {

// Shortest round-trip decimal form ("%.17g").
std::string format_double(double x);

// One row per step, every `stride` steps plus the last one. Columns: step, t,
// dt, energy, energy_next, slope, action, residual, then mass_i,
// min_density_i, second_moment_i for every species (values at the start of
// the step).
std::string trajectory_csv(const Trajectory& traj, std::size_t stride = 1);
// Columns: step, t, dt, energy, energy_next, slope, action, power, residual,
// then mass_i, min_density_i, variance_i.
std::string local_trajectory_csv(const LocalTrajectory& traj, std::size_t stride = 1);
// Long format: step, t, node, x1[, x2], then one density column per species
// (densities with respect to mu for graph states, Lebesgue for local ones).
std::string graph_states_csv(const std::vector<GraphSnapshot>& snapshots, const SpatialGrid& grid);
std::string local_states_csv(const std::vector<LocalSnapshot>& snapshots, const SpatialGrid& grid);
// node, x1[, x2], T11[, T12, T22] for each field, columns prefixed by the label.
std::string tensor_csv(const SpatialGrid& grid, const std::vector<std::pair<std::string, const TensorField*>>& fields);
// epsilon, max_frobenius_error
std::string tensor_error_csv(const std::vector<double>& epsilons, const std::vector<double>& errors);
// epsilon, species, distance_T, tensor_err, degiorgi_graph, degiorgi_local, l_eps_err, runtime_s
std::string sweep_csv(const SweepReport& report);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Self-contained SVG line plot. Non-positive values are dropped on log axes.
std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series, bool log_x, bool log_y);

// Writes `content` to `path`; throws Error naming the path on failure.
void write_file(const std::string& path, const std::string& content);

}  // namespace graphflow
