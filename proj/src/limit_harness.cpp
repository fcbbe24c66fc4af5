#include "graphflow/limit_harness.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "graphflow/error.hpp"
#include "graphflow/gf_diagnostics.hpp"
#include "graphflow/tensor_field.hpp"

namespace graphflow {

double w1_distance_1d(const NodeField& a, const NodeField& b, const SpatialGrid& grid) {
  if (grid.dim() != 1) throw ConfigError("w1_distance_1d needs a one-dimensional grid");
  if (a.size() != grid.size() || b.size() != grid.size()) throw ConfigError("density size does not match the grid");
  const double h = grid.spacing(0);
  double ma = 0.0;
  double mb = 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ma += a[k] * h;
    mb += b[k] * h;
    sum += std::abs(ma - mb);
  }
  if (std::abs(ma - mb) > 1e-8) {
    std::ostringstream os;
    os.precision(12);
    os << "masses differ: " << ma << " vs " << mb;
    throw ConfigError(os.str());
  }
  return sum * h;
}

double total_variation_distance(const NodeField& a, const NodeField& b, const SpatialGrid& grid) {
  if (a.size() != grid.size() || b.size() != grid.size()) throw ConfigError("density size does not match the grid");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return 0.5 * s * grid.cell_volume();
}

std::vector<NodeField> lebesgue_densities(const SpeciesState& state, const BaseMeasure& bm) {
  std::vector<NodeField> out;
  for (const auto& r : state.r) {
    if (r.size() != bm.size()) throw ConfigError("graph state does not match the base measure");
    NodeField rho(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) rho[k] = r[k] * bm.density[k];
    out.push_back(std::move(rho));
  }
  return out;
}

SpeciesState graph_state_from_lebesgue(const LocalState& state, const BaseMeasure& bm) {
  SpeciesState out;
  for (const auto& rho : state.rho) {
    if (rho.size() != bm.size()) throw ConfigError("local state does not match the base measure");
    NodeField r(rho.size());
    for (std::size_t k = 0; k < rho.size(); ++k) r[k] = rho[k] / bm.density[k];
    out.r.push_back(std::move(r));
  }
  return out;
}

std::vector<double> compare_states(const SpeciesState& graph_state, const BaseMeasure& bm, const LocalState& local,
                                   const SpatialGrid& grid) {
  if (!bm.grid.same_layout(grid)) throw ConfigError("graph and local states live on different grids");
  if (graph_state.species() != local.species()) throw ConfigError("graph and local states differ in species count");
  const auto dens = lebesgue_densities(graph_state, bm);
  std::vector<double> out;
  for (std::size_t i = 0; i < dens.size(); ++i) {
    if (local.rho[i].size() != grid.size()) throw ConfigError("local state does not match the grid");
    out.push_back(grid.dim() == 1 ? w1_distance_1d(dens[i], local.rho[i], grid)
                                  : total_variation_distance(dens[i], local.rho[i], grid));
  }
  return out;
}

std::vector<double> SweepReport::distances(std::size_t species) const {
  std::vector<double> out;
  for (const auto& r : rows)
    if (r.species == species + 1) out.push_back(r.distance_T);
  return out;
}

SweepReport run_sweep(const SweepConfig& cfg) {
  if (cfg.epsilons.empty()) throw ConfigError("sweep needs at least one epsilon");
  for (std::size_t i = 1; i < cfg.epsilons.size(); ++i)
    if (!(cfg.epsilons[i] < cfg.epsilons[i - 1])) throw ConfigError("sweep epsilons must be strictly decreasing");
  const std::size_t n_species = cfg.kernels.species();
  check_local_state(cfg.initial, cfg.grid, n_species);

  const BaseMeasure bm = build_base_measure(cfg.grid, cfg.density);
  const TensorField limit = limit_tensor_field(bm, cfg.connectivity, cfg.tensor_resolution);

  SweepReport report;
  LocalFlow local_flow(cfg.grid, cfg.kernels, cfg.potentials, limit, cfg.cache_bytes);
  report.local = local_flow.evolve(cfg.initial, cfg.local_integrator);
  const double g_local = local_de_giorgi_residual(report.local);

  const SpeciesState initial_graph = graph_state_from_lebesgue(cfg.initial, bm);

  // Reference first-variation values sum_i int grad(phi) . T grad(phi) d rho_0.
  std::vector<double> l_reference;
  std::vector<std::vector<NodeField>> l_fields;
  for (const Potential& f : cfg.test_fields) {
    double ref = 0.0;
    NodeField values(cfg.grid.size());
    for (std::size_t k = 0; k < cfg.grid.size(); ++k) {
      const Vec2 x = cfg.grid.center(k);
      values[k] = f.value(x);
      const double q = limit[k].quadratic_form(f.gradient(x));
      for (std::size_t i = 0; i < n_species; ++i) ref += q * cfg.initial.rho[i][k] * cfg.grid.cell_volume();
    }
    l_reference.push_back(ref);
    l_fields.emplace_back(n_species, values);
  }

  for (double eps : cfg.epsilons) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<SweepRow> rows(n_species);
    for (std::size_t i = 0; i < n_species; ++i) {
      rows[i].epsilon = eps;
      rows[i].species = i + 1;
      rows[i].degiorgi_local = g_local;
    }
    try {
      const Graph graph = build_graph(bm, cfg.connectivity, eps);
      const TensorField teps = epsilon_tensor_field(graph);
      const double terr = max_tensor_error(teps, limit, interior_mask(cfg.grid, eps * cfg.connectivity.support_radius));
      double lerr = 0.0;
      for (std::size_t f = 0; f < l_fields.size(); ++f) {
        const double l = first_variation_form(graph, initial_graph, l_fields[f], l_fields[f]);
        lerr = std::max(lerr, std::abs(l - l_reference[f]));
      }
      GraphFlow flow(graph, cfg.kernels, cfg.potentials, cfg.cache_bytes);
      const Trajectory traj = flow.evolve(initial_graph, cfg.graph_integrator);
      const double g_graph = de_giorgi_residual(traj);
      const auto dist = compare_states(traj.final_state, bm, report.local.final_state, cfg.grid);
      for (std::size_t i = 0; i < n_species; ++i) {
        rows[i].distance_T = dist[i];
        rows[i].tensor_err = terr;
        rows[i].degiorgi_graph = g_graph;
        rows[i].l_eps_err = lerr;
      }
    } catch (const std::exception& e) {
      for (auto& r : rows) {
        r.error = e.what();
        r.distance_T = r.tensor_err = r.degiorgi_graph = r.l_eps_err = std::numeric_limits<double>::quiet_NaN();
      }
    }
    const double elapsed =
        cfg.record_runtime ? std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() : 0.0;
    for (auto& r : rows) {
      r.runtime_s = elapsed;
      report.rows.push_back(std::move(r));
    }
  }
  return report;
}

}  // namespace graphflow
