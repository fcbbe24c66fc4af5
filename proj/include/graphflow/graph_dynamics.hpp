#pragma once

#include <cstddef>
#include <vector>

#include "graphflow/energy.hpp"
#include "graphflow/graph_model.hpp"

namespace graphflow {

// Antisymmetric edge quantity, one value per species and stored edge. The
// stored value belongs to the orientation (edge.k, edge.l); the reverse
// orientation carries its negation.
struct EdgeField {
  std::vector<std::vector<double>> values;

  EdgeField() = default;
  EdgeField(std::size_t species, std::size_t edges) : values(species, std::vector<double>(edges, 0.0)) {}
  std::size_t species() const { return values.size(); }
  double oriented(std::size_t i, const Edge& edge, std::size_t e, std::size_t from) const {
    return from == edge.k ? values[i][e] : -values[i][e];
  }
};

// f(x_l) - f(x_k).
inline double nonlocal_gradient(const NodeField& f, std::size_t k, std::size_t l) { return f[l] - f[k]; }
EdgeField nonlocal_gradient(const Graph& graph, const std::vector<NodeField>& fields);

// v = -grad(phi) on every edge.
EdgeField upwind_velocity(const Graph& graph, const std::vector<NodeField>& phi);
EdgeField upwind_velocity(const KernelSet& ks, const PotentialSet& ps, const SpeciesState& state, const Graph& graph);

// j(k, l) = v+(k, l) r_k m_k m_l - v-(k, l) r_l m_l m_k.
EdgeField upwind_flux(const SpeciesState& state, const EdgeField& velocity, const Graph& graph);

// div(x_k) = sum_l eta(x_k, x_l) j(x_k, x_l); then dr_k/dt = -div(x_k) / m_k.
std::vector<NodeField> nonlocal_divergence(const EdgeField& flux, const Graph& graph);

// Total outflow rate sum_l eta(x_k, x_l) v+(x_k, x_l) m_l per species and node.
std::vector<NodeField> outflow_rates(const EdgeField& velocity, const Graph& graph);

// safety / max outflow rate, capped at dt_max (which is also the step used
// when nothing flows).
double stable_dt(const EdgeField& velocity, const Graph& graph, double safety, double dt_max);

struct StepResult {
  SpeciesState state;
  EdgeField flux;
  EdgeField velocity;
};

// One explicit upwind Euler step. Throws CflError if dt exceeds the stable
// step with safety 1.
StepResult step(const SpeciesState& state, const KernelSet& ks, const PotentialSet& ps, const Graph& graph, double dt);

enum class Integrator { euler, heun };

struct IntegratorConfig {
  Integrator method = Integrator::euler;
  double cfl_safety = 0.9;
  double dt_max = 1.0;
  double t_end = 1.0;
  std::size_t record_every = 1;     // snapshot stride in steps
  std::size_t max_steps = 50'000'000;
  std::vector<double> stop_times;   // steps are shortened to land on these
  bool keep_fields = false;         // store realized flux and velocity at snapshot steps
};

struct StepRecord {
  double t = 0.0;
  double dt = 0.0;  // 0 for the terminal record
  double energy = 0.0;
  double slope = 0.0;
  double action = 0.0;    // action of the realized flux over [t, t + dt]
  double residual = 0.0;  // E(t + dt) - E(t) + dt * slope(t)
  std::vector<double> mass;
  std::vector<double> min_density;
  std::vector<double> second_moment;
};

struct GraphSnapshot {
  std::size_t step = 0;
  double t = 0.0;
  SpeciesState state;
  EdgeField flux;      // filled when keep_fields
  EdgeField velocity;  // filled when keep_fields
};

struct Trajectory {
  std::vector<StepRecord> records;  // one per time node, the last one terminal
  std::vector<GraphSnapshot> snapshots;
  SpeciesState final_state;

  std::size_t steps() const { return records.empty() ? 0 : records.size() - 1; }
  double final_time() const { return records.empty() ? 0.0 : records.back().t; }
};

// Precomputed interaction data for repeated steps on one graph.
class GraphFlow {
 public:
  GraphFlow(const Graph& graph, const KernelSet& ks, const PotentialSet& ps,
            std::size_t cache_bytes = InteractionOperator::kDefaultCacheBytes);

  const Graph& graph() const { return graph_; }
  const InteractionOperator& interaction() const { return op_; }

  struct Evaluation {
    std::vector<NodeField> phi;
    double energy = 0.0;
    EdgeField velocity;
    std::vector<NodeField> rates;
    double max_rate = 0.0;
  };
  Evaluation evaluate(const SpeciesState& state) const;

  // Euler update with a known velocity; returns the new state and writes the
  // realized flux.
  SpeciesState euler_update(const SpeciesState& state, const Evaluation& ev, double dt, EdgeField* flux) const;
  StepResult step(const SpeciesState& state, double dt) const;
  Trajectory evolve(const SpeciesState& initial, const IntegratorConfig& config) const;

 private:
  const Graph& graph_;
  InteractionOperator op_;
};

Trajectory evolve(const SpeciesState& initial, const KernelSet& ks, const PotentialSet& ps, const Graph& graph,
                  const IntegratorConfig& config);

// Throws ConfigError unless the state has `species` nonnegative finite fields
// on the nodes of bm.
void check_state(const SpeciesState& state, const BaseMeasure& bm, std::size_t species);

// Probability density r = f / sum(f m), from a nonnegative node profile.
NodeField normalized_density(const NodeField& profile, const BaseMeasure& bm);

}  // namespace graphflow
