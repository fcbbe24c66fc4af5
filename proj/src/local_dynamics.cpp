#include "graphflow/local_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "graphflow/error.hpp"
#include "graphflow/parallel.hpp"

namespace graphflow {

namespace {

std::vector<NodeField> cell_masses(const LocalState& state, const SpatialGrid& grid) {
  std::vector<NodeField> out;
  for (const auto& rho : state.rho) {
    if (rho.size() != grid.size()) throw ConfigError("local state does not match the grid");
    NodeField w(rho.size());
    for (std::size_t k = 0; k < rho.size(); ++k) w[k] = rho[k] * grid.cell_volume();
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<VectorField> velocity_from(const InteractionOperator& op, const std::vector<NodeField>& masses) {
  auto grad = op.convolve_gradient(masses);
  for (std::size_t i = 0; i < grad.size(); ++i)
    for (std::size_t k = 0; k < grad[i].size(); ++k) grad[i][k] = -(grad[i][k] + op.potential_gradient(i)[k]);
  return grad;
}

}  // namespace

std::vector<double> local_masses(const LocalState& state, const SpatialGrid& grid) {
  std::vector<double> out;
  for (const auto& rho : state.rho) {
    double s = 0.0;
    for (double x : rho) s += x;
    out.push_back(s * grid.cell_volume());
  }
  return out;
}

std::vector<VectorField> local_velocity(const KernelSet& ks, const PotentialSet& ps, const LocalState& state,
                                        const SpatialGrid& grid) {
  InteractionOperator op(ks, ps, grid.centers(), 0);
  return velocity_from(op, cell_masses(state, grid));
}

std::vector<VectorField> cell_flux(const InterfaceFlux& flux, const SpatialGrid& grid) {
  std::vector<VectorField> out;
  for (const auto& f : flux.face) {
    VectorField j(grid.size(), Vec2{0.0, 0.0});
    for (int a = 0; a < grid.dim(); ++a) {
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const std::size_t lo = grid.lower_neighbor(k, a);
        const double below = lo == grid.size() ? 0.0 : f[a][lo];
        j[k][a] = 0.5 * (below + f[a][k]);
      }
    }
    out.push_back(std::move(j));
  }
  return out;
}

double local_slope(const LocalState& state, const std::vector<VectorField>& velocity, const TensorField& tensor,
                   const SpatialGrid& grid) {
  double total = 0.0;
  for (std::size_t i = 0; i < state.species(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (state.rho[i][k] == 0.0) continue;
      s += tensor[k].quadratic_form(velocity[i][k]) * state.rho[i][k];
    }
    total += s * grid.cell_volume();
  }
  return total;
}

double local_slope(const LocalState& state, const KernelSet& ks, const PotentialSet& ps, const TensorField& tensor,
                   const SpatialGrid& grid) {
  return local_slope(state, local_velocity(ks, ps, state, grid), tensor, grid);
}

double local_action(const LocalState& state, const std::vector<VectorField>& flux, const TensorField& tensor,
                    const SpatialGrid& grid) {
  double total = 0.0;
  for (std::size_t i = 0; i < state.species(); ++i) {
    const auto& rho = state.rho[i];
    const auto& j = flux[i];
    double rho_max = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) rho_max = std::max(rho_max, rho[k]);
    const double rho_cut = 1e-14 * rho_max;
    double speed = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k)
      if (rho[k] > rho_cut) speed = std::max(speed, norm(j[k]) / rho[k]);
    double s = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (rho[k] == 0.0) {
        if (norm(j[k]) > rho_cut * speed) return std::numeric_limits<double>::infinity();
        continue;
      }
      s += tensor[k].inverse().quadratic_form(j[k]) / rho[k];
    }
    total += s * grid.cell_volume();
  }
  return total;
}

LocalFlow::LocalFlow(const SpatialGrid& grid, const KernelSet& ks, const PotentialSet& ps, TensorField tensor,
                     std::size_t cache_bytes)
    : grid_(grid), op_(ks, ps, grid.centers(), cache_bytes), tensor_(std::move(tensor)) {
  if (tensor_.size() != grid_.size()) throw ConfigError("tensor field does not match the grid");
  for (std::size_t k = 0; k < tensor_.size(); ++k) {
    if (tensor_[k].dim() != grid_.dim() || !tensor_[k].is_positive_definite() ||
        tensor_[k].asymmetry() > 1e-12 * (1.0 + tensor_[k].frobenius())) {
      throw ConfigError("tensor at cell " + std::to_string(k) + " is not symmetric positive definite");
    }
    tensor_inverse_.push_back(tensor_[k].inverse());
  }
}

LocalFlow::Evaluation LocalFlow::evaluate(const LocalState& state) const {
  Evaluation ev;
  const auto masses = cell_masses(state, grid_);
  ev.energy = op_.energy(masses);
  ev.velocity = velocity_from(op_, masses);
  const std::size_t n = grid_.size();
  const int dim = grid_.dim();
  ev.u.resize(state.species());
  ev.rates.assign(state.species(), NodeField(n, 0.0));
  for (std::size_t i = 0; i < state.species(); ++i) {
    VectorField cell_u(n);
    for (std::size_t k = 0; k < n; ++k) cell_u[k] = tensor_[k].apply(ev.velocity[i][k]);
    for (int a = 0; a < dim; ++a) {
      NodeField& face = ev.u[i][a];
      face.assign(n, 0.0);
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t up = grid_.upper_neighbor(k, a);
        face[k] = up == n ? 0.0 : 0.5 * (cell_u[k][a] + cell_u[up][a]);
      }
    }
    auto& rate = ev.rates[i];
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (int a = 0; a < dim; ++a) {
        const std::size_t lo = grid_.lower_neighbor(k, a);
        const double u_low = lo == n ? 0.0 : ev.u[i][a][lo];
        s += (std::max(ev.u[i][a][k], 0.0) + std::max(-u_low, 0.0)) / grid_.spacing(a);
      }
      rate[k] = s;
      ev.max_rate = std::max(ev.max_rate, s);
    }
  }
  return ev;
}

LocalState LocalFlow::euler_update(const LocalState& state, const Evaluation& ev, double dt,
                                   InterfaceFlux* flux) const {
  const std::size_t n = grid_.size();
  const int dim = grid_.dim();
  LocalState next;
  next.rho.assign(state.species(), NodeField(n, 0.0));
  if (flux) flux->face.assign(state.species(), {});
  for (std::size_t i = 0; i < state.species(); ++i) {
    const auto& rho = state.rho[i];
    auto& out = next.rho[i];
    parallel_for(n, [&](std::size_t k) {
      double inflow = 0.0;
      for (int a = 0; a < dim; ++a) {
        const std::size_t lo = grid_.lower_neighbor(k, a);
        const std::size_t up = grid_.upper_neighbor(k, a);
        double in = 0.0;
        if (lo != n) in += std::max(ev.u[i][a][lo], 0.0) * rho[lo];
        if (up != n) in += std::max(-ev.u[i][a][k], 0.0) * rho[up];
        inflow += in / grid_.spacing(a);
      }
      out[k] = rho[k] * std::max(0.0, 1.0 - dt * ev.rates[i][k]) + dt * inflow;
    });
    if (flux) {
      for (int a = 0; a < dim; ++a) {
        NodeField& f = flux->face[i][a];
        f.assign(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
          const std::size_t up = grid_.upper_neighbor(k, a);
          if (up == n) continue;
          const double u = ev.u[i][a][k];
          f[k] = std::max(u, 0.0) * rho[k] - std::max(-u, 0.0) * rho[up];
        }
      }
    }
  }
  return next;
}

LocalState LocalFlow::step(const LocalState& state, double dt, InterfaceFlux* flux) const {
  check_local_state(state, grid_, op_.species());
  if (!(dt >= 0.0)) throw ConfigError("time step must be nonnegative");
  const Evaluation ev = evaluate(state);
  if (ev.max_rate > 0.0 && dt * ev.max_rate > 1.0 + 1e-12) {
    std::ostringstream os;
    os.precision(12);
    os << "time step " << dt << " exceeds the stable step " << 1.0 / ev.max_rate;
    throw CflError(os.str());
  }
  return euler_update(state, ev, dt, flux);
}

namespace {

void fill_local_stats(LocalStepRecord& rec, const LocalState& state, const SpatialGrid& grid) {
  const double vol = grid.cell_volume();
  const auto& c = grid.centers();
  for (const auto& rho : state.rho) {
    double mass = 0.0;
    Vec2 mean{0.0, 0.0};
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rho.size(); ++k) {
      mass += rho[k] * vol;
      mean += (rho[k] * vol) * c[k];
      mn = std::min(mn, rho[k]);
    }
    if (mass > 0.0) mean = (1.0 / mass) * mean;
    double var = 0.0;
    for (std::size_t k = 0; k < rho.size(); ++k) var += rho[k] * vol * norm_sq(c[k] - mean);
    rec.mass.push_back(mass);
    rec.min_density.push_back(mn);
    rec.variance.push_back(mass > 0.0 ? var / mass : 0.0);
  }
}

double flux_power(const std::vector<VectorField>& velocity, const std::vector<VectorField>& j, double vol) {
  double s = 0.0;
  for (std::size_t i = 0; i < j.size(); ++i)
    for (std::size_t k = 0; k < j[i].size(); ++k) s -= dot(velocity[i][k], j[i][k]);
  return s * vol;
}

}  // namespace

LocalTrajectory LocalFlow::evolve(const LocalState& initial, const IntegratorConfig& config) const {
  check_local_state(initial, grid_, op_.species());
  if (!(config.cfl_safety > 0.0) || config.cfl_safety > 1.0) throw ConfigError("cfl_safety must lie in (0, 1]");
  if (!(config.dt_max > 0.0)) throw ConfigError("dt_max must be positive");
  if (!(config.t_end >= 0.0)) throw ConfigError("t_end must be nonnegative");
  const std::size_t stride = std::max<std::size_t>(config.record_every, 1);
  std::vector<double> stops;
  for (double s : config.stop_times)
    if (s > 0.0 && s < config.t_end) stops.push_back(s);
  stops.push_back(config.t_end);
  std::sort(stops.begin(), stops.end());

  LocalTrajectory traj;
  LocalState state = initial;
  Evaluation ev = evaluate(state);
  double t = 0.0;
  std::size_t next_stop = 0;
  for (std::size_t n = 0;; ++n) {
    LocalStepRecord rec;
    rec.t = t;
    rec.energy = ev.energy;
    rec.slope = local_slope(state, ev.velocity, tensor_, grid_);
    fill_local_stats(rec, state, grid_);
    const bool done = next_stop >= stops.size();
    if (done || n % stride == 0) traj.snapshots.push_back(LocalSnapshot{n, t, state});
    if (done) {
      traj.records.push_back(std::move(rec));
      break;
    }
    if (n >= config.max_steps) throw Error("step limit reached before t_end");

    const double target = stops[next_stop];
    double dt = ev.max_rate > 0.0 ? std::min(config.cfl_safety / ev.max_rate, config.dt_max) : config.dt_max;
    bool lands = false;
    if (t + dt >= target * (1.0 - 1e-14)) {
      dt = target - t;
      lands = true;
    }
    InterfaceFlux flux;
    LocalState next;
    if (config.method == Integrator::euler) {
      next = euler_update(state, ev, dt, &flux);
    } else {
      for (;;) {
        LocalState s1 = euler_update(state, ev, dt, &flux);
        const Evaluation ev1 = evaluate(s1);
        if (ev1.max_rate > 0.0 && dt * ev1.max_rate > 1.0) {
          dt = config.cfl_safety / ev1.max_rate;
          lands = false;
          continue;
        }
        InterfaceFlux f1;
        LocalState s2 = euler_update(s1, ev1, dt, &f1);
        next = std::move(s1);
        for (std::size_t i = 0; i < next.species(); ++i) {
          for (std::size_t k = 0; k < next.rho[i].size(); ++k) next.rho[i][k] = 0.5 * (state.rho[i][k] + s2.rho[i][k]);
          for (int a = 0; a < grid_.dim(); ++a)
            for (std::size_t k = 0; k < flux.face[i][a].size(); ++k)
              flux.face[i][a][k] = 0.5 * (flux.face[i][a][k] + f1.face[i][a][k]);
        }
        break;
      }
    }
    const auto j = cell_flux(flux, grid_);
    rec.dt = dt;
    rec.action = local_action(state, j, tensor_, grid_);
    rec.power = flux_power(ev.velocity, j, grid_.cell_volume());
    Evaluation ev_next = evaluate(next);
    rec.residual = ev_next.energy - ev.energy + dt * rec.slope;
    traj.records.push_back(std::move(rec));
    state = std::move(next);
    ev = std::move(ev_next);
    if (lands) {
      t = target;
      ++next_stop;
    } else {
      t += dt;
    }
  }
  traj.final_state = std::move(state);
  return traj;
}

LocalTrajectory evolve_local(const LocalState& initial, const KernelSet& ks, const PotentialSet& ps,
                             const TensorField& tensor, const SpatialGrid& grid, const IntegratorConfig& config) {
  return LocalFlow(grid, ks, ps, tensor).evolve(initial, config);
}

double local_de_giorgi_residual(const LocalTrajectory& traj) {
  if (traj.records.empty()) return 0.0;
  double integral = 0.0;
  for (std::size_t n = 0; n + 1 < traj.records.size(); ++n)
    integral += traj.records[n].dt * (traj.records[n].slope + traj.records[n].action);
  return traj.records.back().energy - traj.records.front().energy + 0.5 * integral;
}

double chain_rule_residual(const LocalTrajectory& traj) {
  double worst = 0.0;
  double work = 0.0;
  for (std::size_t n = 1; n < traj.records.size(); ++n) {
    work += traj.records[n - 1].dt * traj.records[n - 1].power;
    worst = std::max(worst, std::abs(traj.records[n].energy - traj.records.front().energy - work));
  }
  return worst;
}

void check_local_state(const LocalState& state, const SpatialGrid& grid, std::size_t species) {
  if (state.species() != species) {
    throw ConfigError("local state has " + std::to_string(state.species()) + " species, expected " +
                      std::to_string(species));
  }
  for (std::size_t i = 0; i < species; ++i) {
    if (state.rho[i].size() != grid.size()) throw ConfigError("local state size does not match the grid");
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double x = state.rho[i][k];
      if (!std::isfinite(x) || x < 0.0)
        throw ConfigError("species " + std::to_string(i + 1) + " has an invalid density at cell " + std::to_string(k));
    }
  }
}

}  // namespace graphflow
