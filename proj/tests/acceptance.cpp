// Acceptance run: one PASS/FAIL line per criterion. Exit status 1 if any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "graphflow/config.hpp"
#include "graphflow/error.hpp"
#include "graphflow/gf_diagnostics.hpp"
#include "graphflow/graph_dynamics.hpp"
#include "graphflow/limit_harness.hpp"
#include "graphflow/local_dynamics.hpp"
#include "graphflow/tensor_field.hpp"

using namespace graphflow;

namespace {

// Tolerances.
constexpr double kMassDrift = 1e-10;
constexpr double kMinDissipationOrder = 1.8;
constexpr double kMinDeGiorgiRatio = 1.8;
constexpr double kLimitTensorTol = 1e-3;
constexpr double kEpsilonTensorTol = 2e-2;
constexpr double kEllipsoidTol = 1e-2;
constexpr double kFirstVariationTol = 5e-2;
constexpr double kVarianceRelTol = 0.05;
constexpr double kSweepSlack = 1.15;
constexpr double kSweepFinalTol = 2e-2;
constexpr double kRuntime1 = 60.0;
constexpr double kRuntime4 = 60.0;
constexpr double kRuntime7 = 600.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double bump(double x, double centre, double width) {
  const double r = (x - centre) / width;
  return std::abs(r) < 1.0 ? std::pow(1.0 - r * r, 3) : 0.0;
}

NodeField profile(const SpatialGrid& grid, const std::function<double(double)>& f) {
  NodeField out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) out[k] = f(grid.center(k)[0]);
  return out;
}

NodeField unit_mass(NodeField f, const SpatialGrid& grid) {
  double mass = 0.0;
  for (double x : f) mass += x * grid.cell_volume();
  for (double& x : f) x /= mass;
  return f;
}

double gaussian(double x, double centre, double sigma) { return std::exp(-(x - centre) * (x - centre) / (2 * sigma * sigma)); }

KernelSet cross_attraction(double a) {
  KernelSet ks(2);
  ks.set_symmetric(0, 1, Kernel::quadratic(a));
  return ks;
}

// Two-species torus fixture with compactly supported bumps.
SpeciesState bump_pair(const BaseMeasure& bm) {
  return SpeciesState{{normalized_density(profile(bm.grid, [](double x) { return bump(x, 0.4, 0.15); }), bm),
                       normalized_density(profile(bm.grid, [](double x) { return bump(x, 0.6, 0.1); }), bm)}};
}

struct FixedStepRun {
  std::vector<double> mass_drift;
  double min_density = INFINITY;
  double residual_sum = 0.0;
  double residual_max = 0.0;
  double seconds = 0.0;
};

// `steps` explicit Euler steps at dt = cfl / max outflow rate.
FixedStepRun fixed_step_run(const Graph& g, const KernelSet& ks, const SpeciesState& initial, double cfl,
                            std::size_t steps) {
  const auto start = std::chrono::steady_clock::now();
  const PotentialSet ps = zero_potentials(initial.species());
  const GraphFlow flow(g, ks, ps);
  const std::vector<double> m0 = species_masses(initial, g.base());
  FixedStepRun run;
  SpeciesState s = initial;
  GraphFlow::Evaluation ev = flow.evaluate(s);
  for (std::size_t n = 0; n < steps; ++n) {
    const double dt = cfl / ev.max_rate;
    const double slope = action_density(g, s, ev.velocity);
    s = flow.euler_update(s, ev, dt, nullptr);
    GraphFlow::Evaluation next = flow.evaluate(s);
    const double r = std::abs(next.energy - ev.energy + dt * slope);
    run.residual_sum += r;
    run.residual_max = std::max(run.residual_max, r);
    for (const auto& field : s.r)
      for (double x : field) run.min_density = std::min(run.min_density, x);
    ev = std::move(next);
  }
  const std::vector<double> m1 = species_masses(s, g.base());
  for (std::size_t i = 0; i < m0.size(); ++i) run.mass_drift.push_back(std::abs(m1[i] - m0[i]));
  run.seconds = seconds_since(start);
  return run;
}

struct Criterion1Fixture {
  BaseMeasure bm = BaseMeasure::lebesgue(SpatialGrid::line(0.0, 1.0, 512));
  Graph graph = build_graph(bm, indicator_ball(1, 3.0), 1.0 / 32.0);
  KernelSet ks = cross_attraction(1.0);
  SpeciesState initial = bump_pair(bm);
};

Outcome criterion1(const Criterion1Fixture& fx) {
  const FixedStepRun run = fixed_step_run(fx.graph, fx.ks, fx.initial, 0.9, 1000);
  const double drift = std::max(run.mass_drift[0], run.mass_drift[1]);
  Outcome o;
  o.pass = drift <= kMassDrift && run.min_density >= 0.0 && run.seconds <= kRuntime1;
  o.detail = "mass drift " + fmt("%.3g", drift) + ", min density " + fmt("%.3g", run.min_density) + ", runtime " +
             fmt("%.2f s", run.seconds);
  return o;
}

Outcome criterion2(const Criterion1Fixture& fx) {
  std::vector<FixedStepRun> runs;
  for (double cfl : {0.9, 0.45, 0.225}) runs.push_back(fixed_step_run(fx.graph, fx.ks, fx.initial, cfl, 1000));
  double order = INFINITY, step_order = INFINITY;
  std::string sums, orders, step_orders;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    sums += (i ? " " : "") + fmt("%.3e", runs[i].residual_sum);
    if (i == 0) continue;
    const double p = std::log2(runs[i - 1].residual_sum / runs[i].residual_sum);
    const double q = std::log2(runs[i - 1].residual_max / runs[i].residual_max);
    order = std::min(order, p);
    step_order = std::min(step_order, q);
    orders += (i > 1 ? " " : "") + fmt("%.2f", p);
    step_orders += (i > 1 ? " " : "") + fmt("%.2f", q);
  }
  Outcome o;
  o.pass = order >= kMinDissipationOrder;
  o.detail = "summed residual " + sums + ", observed order " + orders + " (need >= " + fmt("%.1f", kMinDissipationOrder) +
             "); per-step max residual order " + step_orders;
  return o;
}

Outcome criterion3() {
  std::vector<double> graph_g, local_g;
  const KernelSet ks = cross_attraction(1.0);
  const std::pair<std::size_t, double> ladder[] = {{128, 0.8}, {256, 0.4}, {512, 0.2}};
  for (const auto& [n, cfl] : ladder) {
    const BaseMeasure bm = BaseMeasure::lebesgue(SpatialGrid::line(0.0, 1.0, n));
    const Graph g = build_graph(bm, indicator_ball(1, 3.0), 1.0 / 8.0);
    IntegratorConfig cfg;
    cfg.cfl_safety = cfl;
    cfg.dt_max = 1.0;
    cfg.t_end = 0.25;
    graph_g.push_back(std::abs(de_giorgi_residual(evolve(bump_pair(bm), ks, zero_potentials(2), g, cfg))));
  }
  const KernelSet local_ks = cross_attraction(0.5);
  for (std::size_t n : {128, 256, 512, 1024}) {
    const SpatialGrid grid = SpatialGrid::line(0.0, 1.0, n);
    LocalState s;
    s.rho = {unit_mass(profile(grid, [](double x) { return gaussian(x, 0.4, 0.07); }), grid),
             unit_mass(profile(grid, [](double x) { return gaussian(x, 0.6, 0.06); }), grid)};
    IntegratorConfig cfg;
    cfg.cfl_safety = 0.9;
    cfg.dt_max = 1.0;
    cfg.t_end = 0.5;
    const TensorField id = TensorField::constant(1, grid.size(), SmallMatrix::identity(1));
    local_g.push_back(std::abs(local_de_giorgi_residual(evolve_local(s, local_ks, zero_potentials(2), id, grid, cfg))));
  }
  Outcome o;
  o.pass = true;
  std::string text;
  auto ratios = [&](const std::vector<double>& v, const char* name) {
    text += std::string(text.empty() ? "" : "; ") + name;
    for (std::size_t i = 1; i < v.size(); ++i) {
      const double r = v[i - 1] / v[i];
      o.pass = o.pass && r >= kMinDeGiorgiRatio;
      text += " " + fmt("%.2f", r);
    }
    text += " (G " + fmt("%.2e", v.front()) + " -> " + fmt("%.2e", v.back()) + ")";
  };
  ratios(graph_g, "graph ratios");
  ratios(local_g, "local ratios");
  o.detail = text;
  return o;
}

Outcome criterion4() {
  const auto start = std::chrono::steady_clock::now();
  const Connectivity flat3 = indicator_ball(1, 3.0);
  const double limit = limit_tensor(flat3, {0.5, 0.0}, 1.0, 2048)(0, 0);
  const BaseMeasure bm = BaseMeasure::lebesgue(SpatialGrid::line(0.0, 1.0, 4096));
  const TensorField eps_field = epsilon_tensor_field(build_graph(bm, flat3, 1.0 / 64.0));
  double eps_err = 0.0;
  for (const SmallMatrix& t : eps_field.values) eps_err = std::max(eps_err, std::abs(t(0, 0) - 1.0));

  const SmallMatrix d = SmallMatrix::diagonal(2, 2.0, 1.0);
  const SmallMatrix t = limit_tensor(ellipsoid_connectivity(d), {0.5, 0.5}, 1.0, 512);
  double frob = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) frob += (t(i, j) - d(i, j)) * (t(i, j) - d(i, j));
  frob = std::sqrt(frob);
  const double seconds = seconds_since(start);

  Outcome o;
  o.pass = std::abs(limit - 1.0) <= kLimitTensorTol && eps_err <= kEpsilonTensorTol && frob <= kEllipsoidTol &&
           seconds <= kRuntime4;
  o.detail = "|T - 1| " + fmt("%.2e", std::abs(limit - 1.0)) + ", max |T_eps - 1| " + fmt("%.2e", eps_err) +
             ", ellipsoid |T - D|_F " + fmt("%.2e", frob) + ", runtime " + fmt("%.2f s", seconds);
  return o;
}

Outcome criterion5() {
  const SpatialGrid grid = SpatialGrid::line(0.0, 1.0, 2048);
  const BaseMeasure bm = BaseMeasure::lebesgue(grid);
  const SpeciesState s{{NodeField(grid.size(), 1.0)}};
  const NodeField phi = profile(grid, [](double x) { return std::sin(2 * std::numbers::pi * x); });
  const double limit = 4 * std::numbers::pi * std::numbers::pi * 1.0 / 2;
  Outcome o;
  o.pass = true;
  double previous = INFINITY;
  o.detail = "errors";
  for (double eps : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    const double err = std::abs(first_variation_form(build_graph(bm, indicator_ball(1, 3.0), eps), s, {phi}, {phi}) - limit);
    o.pass = o.pass && err < previous;
    previous = err;
    o.detail += " " + fmt("%.3e", err);
  }
  o.pass = o.pass && previous <= kFirstVariationTol;
  return o;
}

Outcome criterion6() {
  const SpatialGrid grid = SpatialGrid::line(0.0, 1.0, 512);
  KernelSet ks(1);
  ks.set(0, 0, Kernel::quadratic(0.5));
  LocalState s;
  s.rho = {unit_mass(profile(grid, [](double x) { return bump(x, 0.5, 0.45); }), grid)};
  Outcome o;
  o.pass = true;
  // Same decay depth e^-2 for both tensors; the last case is reported only.
  const std::tuple<double, double, bool> cases[] = {{1.0, 1.0, true}, {4.0, 0.25, true}, {4.0, 1.0, false}};
  for (const auto& [scale, t_end, gating] : cases) {
    IntegratorConfig cfg;
    cfg.cfl_safety = 0.9;
    cfg.dt_max = 1.0;
    cfg.t_end = t_end;
    const TensorField tensor = TensorField::constant(1, grid.size(), SmallMatrix::diagonal(1, scale));
    const LocalTrajectory traj = evolve_local(s, ks, zero_potentials(1), tensor, grid, cfg);
    const double v0 = traj.records.front().variance[0];
    double worst = 0.0;
    for (const auto& r : traj.records) {
      const double exact = std::exp(-2.0 * scale * r.t);
      worst = std::max(worst, std::abs(r.variance[0] / v0 - exact) / exact);
    }
    if (gating) o.pass = o.pass && worst <= kVarianceRelTol;
    o.detail += std::string(o.detail.empty() ? "" : "; ") + (gating ? "" : "info ") + "T=" + fmt("%g", scale) +
                " on [0, " + fmt("%g", t_end) + "]: max rel err " + fmt("%.3f", worst);
  }
  return o;
}

Outcome criterion7() {
  const auto start = std::chrono::steady_clock::now();
  SweepConfig cfg;
  cfg.grid = SpatialGrid::line(0.0, 1.0, 1024);
  cfg.connectivity = indicator_ball(1, 3.0);
  cfg.kernels = cross_attraction(1.0);
  cfg.potentials = zero_potentials(2);
  cfg.initial.rho = {unit_mass(profile(cfg.grid, [](double x) { return gaussian(x, 0.4, 0.06); }), cfg.grid),
                     unit_mass(profile(cfg.grid, [](double x) { return gaussian(x, 0.6, 0.05); }), cfg.grid)};
  cfg.epsilons = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  for (IntegratorConfig* ic : {&cfg.graph_integrator, &cfg.local_integrator}) {
    ic->t_end = 0.5;
    ic->dt_max = 1e-2;
  }
  cfg.record_runtime = false;
  const SweepReport report = run_sweep(cfg);
  const double seconds = seconds_since(start);
  Outcome o;
  o.pass = seconds <= kRuntime7;
  for (const auto& row : report.rows)
    if (!row.error.empty()) {
      o.pass = false;
      o.detail += "row error at eps " + fmt("%g", row.epsilon) + ": " + row.error + "; ";
    }
  const double length = cfg.grid.length(0);
  for (std::size_t i = 0; i < 2; ++i) {
    const std::vector<double> d = report.distances(i);
    o.detail += "W1 species " + std::to_string(i + 1) + ":";
    for (std::size_t k = 0; k < d.size(); ++k) {
      o.detail += " " + fmt("%.3e", d[k]);
      if (k > 0 && !(d[k] <= kSweepSlack * d[k - 1])) o.pass = false;
    }
    if (!(d.back() <= kSweepFinalTol * length)) o.pass = false;
    o.detail += "; ";
  }
  o.detail += "runtime " + fmt("%.1f s", seconds);
  return o;
}

Outcome criterion8() {
  Outcome o;
  o.pass = true;
  const BaseMeasure pair = BaseMeasure::lebesgue(SpatialGrid::line(-0.5, 1.5, 2, false));
  const Graph g = build_graph(pair, indicator_ball(1, 3.0), 1.5);
  KernelSet ks(1);
  ks.set(0, 0, Kernel::quadratic(1.0));
  const PotentialSet ps = zero_potentials(1);
  const SpeciesState steady{{{1.0, 1.0}}};
  const EdgeField v = upwind_velocity(ks, ps, steady, g);
  for (double x : v.values[0]) o.pass = o.pass && x == 0.0;
  const double slope = metric_slope(g, steady, ks, ps);
  const StepResult next = step(steady, ks, ps, g, 0.1);
  const bool fixed = next.state.r == steady.r;
  o.pass = o.pass && slope == 0.0 && fixed;
  o.detail = "two-mass velocity 0, slope " + fmt("%g", slope) + (fixed ? ", step is the identity" : ", step moved the state");

  const SpatialGrid grid = SpatialGrid::line(0.0, 1.0, 64);
  const BaseMeasure bm = BaseMeasure::lebesgue(grid);
  const NodeField rho = unit_mass(profile(grid, [](double x) { return gaussian(x, 0.3, 0.1); }), grid);
  IntegratorConfig cfg;
  cfg.t_end = 1.0;
  cfg.dt_max = 0.05;
  cfg.record_every = 1;
  const SpeciesState gs{{normalized_density(rho, bm)}};
  const Trajectory gt = evolve(gs, KernelSet(1), ps, build_graph(bm, indicator_ball(1, 3.0), 0.125), cfg);
  bool graph_const = gt.final_state.r == gs.r;
  for (const auto& snap : gt.snapshots) graph_const = graph_const && snap.state.r == gs.r;
  LocalState ls;
  ls.rho = {rho};
  const LocalTrajectory lt =
      evolve_local(ls, KernelSet(1), ps, TensorField::constant(1, grid.size(), SmallMatrix::identity(1)), grid, cfg);
  bool local_const = lt.final_state.rho == ls.rho;
  for (const auto& snap : lt.snapshots) local_const = local_const && snap.state.rho == ls.rho;
  o.pass = o.pass && graph_const && local_const;
  o.detail += std::string(", zero landscape constant: graph ") + (graph_const ? "yes" : "no") + " (" +
              std::to_string(gt.steps()) + " steps), local " + (local_const ? "yes" : "no") + " (" +
              std::to_string(lt.steps()) + " steps)";
  return o;
}

Outcome criterion9() {
  Outcome o;
  o.pass = true;
  auto record = [&](const char* name, bool detected) {
    o.pass = o.pass && detected;
    o.detail += std::string(o.detail.empty() ? "" : ", ") + name + (detected ? " detected" : " MISSED");
  };

  Connectivity lopsided;
  lopsided.dim = 1;
  lopsided.support_radius = 1.0;
  lopsided.moment_bound = 2.0;
  lopsided.nondegeneracy = 0.1;
  lopsided.evaluate = [](const Vec2&, const Vec2& w) { return w[0] >= -0.5 && w[0] <= 1.0 ? 2.0 : 0.0; };
  const ValidationReport asym = validate_connectivity(lopsided, SamplePlan::for_connectivity(lopsided, {0, 0}, {1, 0}));
  record("asymmetric theta", asym.find("theta1") && !asym.find("theta1")->passed);

  KernelSet ks(2);
  ks.set(0, 1, Kernel::quadratic(1.0));
  ks.set(1, 0, Kernel::quadratic(2.0));
  const ValidationReport kr = validate_kernels(ks, kernel_sample_plan(1, {0, 0}, {1, 0}));
  bool load_rejected = false;
  try {
    parse_config("[grid]\ncells = [16]\n[species]\ncount = 2\n[kernels]\nK12 = \"quadratic(1)\"\nK21 = \"quadratic(2)\"\n"
                 "[initial]\nrho1 = \"uniform\"\nrho2 = \"uniform\"\n");
  } catch (const ConfigError& e) {
    load_rejected = std::string(e.what()).find("symmetry of the cross-interactions") != std::string::npos;
  }
  record("K12 != K21", kr.find("cross") && !kr.find("cross")->passed && load_rejected);

  bool zero_rejected = false;
  try {
    build_base_measure(SpatialGrid::line(0.0, 1.0, 4), [](const Vec2& x) { return std::abs(x[0] - 0.375); });
  } catch (const ConfigError&) {
    zero_rejected = true;
  }
  record("vanishing density", zero_rejected);

  Connectivity wide;
  wide.dim = 1;
  wide.support_radius = 1.0;
  wide.moment_bound = 3.0;
  wide.nondegeneracy = 0.1;
  wide.evaluate = [](const Vec2&, const Vec2& w) { return std::abs(w[0]) <= 1.2 ? 1.0 : 0.0; };
  const ValidationReport sr = validate_connectivity(wide, SamplePlan::for_connectivity(wide, {0, 0}, {1, 0}));
  record("support overflow", sr.find("theta3") && !sr.find("theta3")->passed);
  return o;
}

}  // namespace

int main() {
  const Criterion1Fixture fixture;
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, [&] { return criterion1(fixture); }},
      {2, [&] { return criterion2(fixture); }},
      {3, criterion3},
      {4, criterion4},
      {5, criterion5},
      {6, criterion6},
      {7, criterion7},
      {8, criterion8},
      {9, criterion9},
  };
  int failures = 0;
  for (const auto& [id, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::printf("criterion %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
