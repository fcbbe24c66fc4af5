#include "graphflow/graph_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "graphflow/error.hpp"
#include "graphflow/gf_diagnostics.hpp"
#include "graphflow/parallel.hpp"

namespace graphflow {

EdgeField nonlocal_gradient(const Graph& graph, const std::vector<NodeField>& fields) {
  const auto& edges = graph.edges();
  EdgeField out(fields.size(), edges.size());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    auto& o = out.values[i];
    const NodeField& f = fields[i];
    parallel_for(edges.size(), [&](std::size_t e) { o[e] = f[edges[e].l] - f[edges[e].k]; });
  }
  return out;
}

EdgeField upwind_velocity(const Graph& graph, const std::vector<NodeField>& phi) {
  EdgeField v = nonlocal_gradient(graph, phi);
  for (auto& vi : v.values)
    for (double& x : vi) x = -x;
  return v;
}

EdgeField upwind_velocity(const KernelSet& ks, const PotentialSet& ps, const SpeciesState& state, const Graph& graph) {
  InteractionOperator op(ks, ps, graph.grid().centers(), 0);
  return upwind_velocity(graph, op.variational_derivative(node_masses(state, graph.base())));
}

EdgeField upwind_flux(const SpeciesState& state, const EdgeField& velocity, const Graph& graph) {
  const auto& edges = graph.edges();
  const auto& m = graph.base().weights;
  EdgeField j(velocity.species(), edges.size());
  for (std::size_t i = 0; i < velocity.species(); ++i) {
    const auto& v = velocity.values[i];
    const auto& r = state.r[i];
    auto& o = j.values[i];
    parallel_for(edges.size(), [&](std::size_t e) {
      const Edge& ed = edges[e];
      const double vp = std::max(v[e], 0.0);
      const double vm = std::max(-v[e], 0.0);
      o[e] = (vp * r[ed.k] - vm * r[ed.l]) * m[ed.k] * m[ed.l];
    });
  }
  return j;
}

std::vector<NodeField> nonlocal_divergence(const EdgeField& flux, const Graph& graph) {
  const auto& edges = graph.edges();
  std::vector<NodeField> div(flux.species(), NodeField(graph.node_count(), 0.0));
  for (std::size_t i = 0; i < flux.species(); ++i) {
    auto& d = div[i];
    parallel_for(graph.node_count(), [&](std::size_t k) {
      double s = 0.0;
      for (std::uint32_t e : graph.incident(k)) s += edges[e].weight * flux.oriented(i, edges[e], e, k);
      d[k] = s;
    });
  }
  return div;
}

std::vector<NodeField> outflow_rates(const EdgeField& velocity, const Graph& graph) {
  const auto& edges = graph.edges();
  const auto& m = graph.base().weights;
  std::vector<NodeField> rates(velocity.species(), NodeField(graph.node_count(), 0.0));
  for (std::size_t i = 0; i < velocity.species(); ++i) {
    auto& rate = rates[i];
    parallel_for(graph.node_count(), [&](std::size_t k) {
      double s = 0.0;
      for (std::uint32_t e : graph.incident(k)) {
        const Edge& ed = edges[e];
        const double v = velocity.oriented(i, ed, e, k);
        if (v > 0.0) s += ed.weight * v * m[ed.k == k ? ed.l : ed.k];
      }
      rate[k] = s;
    });
  }
  return rates;
}

namespace {

double max_rate_of(const std::vector<NodeField>& rates) {
  double mx = 0.0;
  for (const auto& r : rates)
    for (double x : r) mx = std::max(mx, x);
  return mx;
}

double dt_from_rate(double max_rate, double safety, double dt_max) {
  if (!(max_rate > 0.0)) return dt_max;
  return std::min(safety / max_rate, dt_max);
}

}  // namespace

double stable_dt(const EdgeField& velocity, const Graph& graph, double safety, double dt_max) {
  if (!(safety > 0.0) || safety > 1.0) throw ConfigError("CFL safety factor must lie in (0, 1]");
  return dt_from_rate(max_rate_of(outflow_rates(velocity, graph)), safety, dt_max);
}

GraphFlow::GraphFlow(const Graph& graph, const KernelSet& ks, const PotentialSet& ps, std::size_t cache_bytes)
    : graph_(graph), op_(ks, ps, graph.grid().centers(), cache_bytes) {}

GraphFlow::Evaluation GraphFlow::evaluate(const SpeciesState& state) const {
  Evaluation ev;
  const auto masses = node_masses(state, graph_.base());
  const auto conv = op_.convolve(masses);
  ev.energy = op_.energy(masses, conv);
  ev.phi = conv;
  for (std::size_t i = 0; i < ev.phi.size(); ++i)
    for (std::size_t k = 0; k < ev.phi[i].size(); ++k) ev.phi[i][k] += op_.potential(i)[k];
  ev.velocity = upwind_velocity(graph_, ev.phi);
  ev.rates = outflow_rates(ev.velocity, graph_);
  ev.max_rate = max_rate_of(ev.rates);
  return ev;
}

SpeciesState GraphFlow::euler_update(const SpeciesState& state, const Evaluation& ev, double dt, EdgeField* flux) const {
  const auto& edges = graph_.edges();
  const auto& m = graph_.base().weights;
  SpeciesState next;
  next.r.assign(state.species(), NodeField(graph_.node_count(), 0.0));
  for (std::size_t i = 0; i < state.species(); ++i) {
    const auto& r = state.r[i];
    const auto& rate = ev.rates[i];
    auto& out = next.r[i];
    parallel_for(graph_.node_count(), [&](std::size_t k) {
      double inflow = 0.0;
      for (std::uint32_t e : graph_.incident(k)) {
        const Edge& ed = edges[e];
        const std::size_t l = ed.k == k ? ed.l : ed.k;
        const double v_in = -ev.velocity.oriented(i, ed, e, k);  // v(l, k)
        if (v_in > 0.0) inflow += ed.weight * v_in * r[l] * m[l];
      }
      out[k] = r[k] * std::max(0.0, 1.0 - dt * rate[k]) + dt * inflow;
    });
  }
  if (flux) *flux = upwind_flux(state, ev.velocity, graph_);
  return next;
}

StepResult GraphFlow::step(const SpeciesState& state, double dt) const {
  check_state(state, graph_.base(), op_.species());
  if (!(dt >= 0.0)) throw ConfigError("time step must be nonnegative");
  const Evaluation ev = evaluate(state);
  if (ev.max_rate > 0.0 && dt * ev.max_rate > 1.0 + 1e-12) {
    std::ostringstream os;
    os.precision(12);
    os << "time step " << dt << " exceeds the stable step " << 1.0 / ev.max_rate;
    throw CflError(os.str());
  }
  StepResult res;
  res.state = euler_update(state, ev, dt, &res.flux);
  res.velocity = ev.velocity;
  return res;
}

StepResult step(const SpeciesState& state, const KernelSet& ks, const PotentialSet& ps, const Graph& graph, double dt) {
  return GraphFlow(graph, ks, ps, 0).step(state, dt);
}

namespace {

void fill_state_stats(StepRecord& rec, const SpeciesState& state, const BaseMeasure& bm) {
  const auto& c = bm.grid.centers();
  for (const auto& r : state.r) {
    double mass = 0.0;
    double m2 = 0.0;
    double mn = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < r.size(); ++k) {
      mass += r[k] * bm.weights[k];
      m2 += r[k] * bm.weights[k] * norm_sq(c[k]);
      mn = std::min(mn, r[k]);
    }
    rec.mass.push_back(mass);
    rec.second_moment.push_back(m2);
    rec.min_density.push_back(mn);
  }
}

void add_scaled(EdgeField& a, const EdgeField& b, double s) {
  for (std::size_t i = 0; i < a.values.size(); ++i)
    for (std::size_t e = 0; e < a.values[i].size(); ++e) a.values[i][e] += s * b.values[i][e];
}

}  // namespace

Trajectory GraphFlow::evolve(const SpeciesState& initial, const IntegratorConfig& config) const {
  check_state(initial, graph_.base(), op_.species());
  if (!(config.cfl_safety > 0.0) || config.cfl_safety > 1.0) throw ConfigError("cfl_safety must lie in (0, 1]");
  if (!(config.dt_max > 0.0)) throw ConfigError("dt_max must be positive");
  if (!(config.t_end >= 0.0)) throw ConfigError("t_end must be nonnegative");
  const std::size_t stride = std::max<std::size_t>(config.record_every, 1);
  std::vector<double> stops;
  for (double s : config.stop_times)
    if (s > 0.0 && s < config.t_end) stops.push_back(s);
  stops.push_back(config.t_end);
  std::sort(stops.begin(), stops.end());

  Trajectory traj;
  SpeciesState state = initial;
  Evaluation ev = evaluate(state);
  double t = 0.0;
  std::size_t next_stop = 0;
  for (std::size_t n = 0;; ++n) {
    StepRecord rec;
    rec.t = t;
    rec.energy = ev.energy;
    rec.slope = action_density(graph_, state, ev.velocity);
    fill_state_stats(rec, state, graph_.base());
    const bool done = next_stop >= stops.size();
    if (done || n % stride == 0) {
      GraphSnapshot snap{n, t, state, {}, {}};
      if (config.keep_fields && !done) snap.velocity = ev.velocity;
      traj.snapshots.push_back(std::move(snap));
    }
    if (done) {
      traj.records.push_back(std::move(rec));
      break;
    }
    if (n >= config.max_steps) throw Error("step limit reached before t_end");

    const double target = stops[next_stop];
    double dt = dt_from_rate(ev.max_rate, config.cfl_safety, config.dt_max);
    bool lands = false;
    if (t + dt >= target * (1.0 - 1e-14)) {
      dt = target - t;
      lands = true;
    }
    EdgeField flux;
    SpeciesState next;
    if (config.method == Integrator::euler) {
      next = euler_update(state, ev, dt, &flux);
    } else {
      for (;;) {
        EdgeField f1;
        SpeciesState s1 = euler_update(state, ev, dt, &flux);
        const Evaluation ev1 = evaluate(s1);
        if (ev1.max_rate > 0.0 && dt * ev1.max_rate > 1.0) {
          dt = config.cfl_safety / ev1.max_rate;
          lands = false;
          continue;
        }
        SpeciesState s2 = euler_update(s1, ev1, dt, &f1);
        next = std::move(s1);
        for (std::size_t i = 0; i < next.species(); ++i)
          for (std::size_t k = 0; k < next.r[i].size(); ++k) next.r[i][k] = 0.5 * (state.r[i][k] + s2.r[i][k]);
        for (auto& fi : flux.values)
          for (double& x : fi) x *= 0.5;
        add_scaled(flux, f1, 0.5);
        break;
      }
    }
    rec.dt = dt;
    rec.action = action_from_flux(graph_, state, flux);
    if (config.keep_fields && !traj.snapshots.empty() && traj.snapshots.back().step == n)
      traj.snapshots.back().flux = flux;

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

Trajectory evolve(const SpeciesState& initial, const KernelSet& ks, const PotentialSet& ps, const Graph& graph,
                  const IntegratorConfig& config) {
  return GraphFlow(graph, ks, ps).evolve(initial, config);
}

void check_state(const SpeciesState& state, const BaseMeasure& bm, std::size_t species) {
  if (state.species() != species) {
    throw ConfigError("state has " + std::to_string(state.species()) + " species, expected " + std::to_string(species));
  }
  for (std::size_t i = 0; i < species; ++i) {
    if (state.r[i].size() != bm.size()) throw ConfigError("state field size does not match the node count");
    for (std::size_t k = 0; k < bm.size(); ++k) {
      const double x = state.r[i][k];
      if (!std::isfinite(x) || x < 0.0) {
        throw ConfigError("species " + std::to_string(i + 1) + " has an invalid density at node " + std::to_string(k));
      }
    }
  }
}

NodeField normalized_density(const NodeField& profile, const BaseMeasure& bm) {
  if (profile.size() != bm.size()) throw ConfigError("profile size does not match the node count");
  double mass = 0.0;
  for (std::size_t k = 0; k < profile.size(); ++k) {
    if (!std::isfinite(profile[k]) || profile[k] < 0.0)
      throw ConfigError("initial profile must be nonnegative and finite (node " + std::to_string(k) + ")");
    mass += profile[k] * bm.weights[k];
  }
  if (!(mass > 0.0)) throw ConfigError("initial profile has zero mass");
  NodeField r(profile.size());
  for (std::size_t k = 0; k < profile.size(); ++k) r[k] = profile[k] / mass;
  return r;
}

}  // namespace graphflow
