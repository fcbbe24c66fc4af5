#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "graphflow/config.hpp"
#include "graphflow/error.hpp"
#include "graphflow/gf_diagnostics.hpp"
#include "graphflow/output.hpp"
#include "graphflow/parallel.hpp"
#include "graphflow/tensor_field.hpp"

namespace fs = std::filesystem;
using namespace graphflow;

namespace {

struct Options {
  std::string config;
  std::string out;
  bool svg = false;
  std::size_t record_every = 0;
  int threads = 0;
};

std::string out_dir(const Options& opt, const RunConfig& cfg) {
  std::string dir = opt.out.empty() ? cfg.output_dir : opt.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

std::string join(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

RunConfig load(const Options& opt) {
  RunConfig cfg = load_config(opt.config);
  if (opt.record_every > 0) {
    cfg.integrator.record_every = opt.record_every;
    cfg.local_integrator.record_every = opt.record_every;
  }
  if (opt.svg) cfg.svg = true;
  return cfg;
}

void require_epsilon(const RunConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw ConfigError("[connectivity] epsilon must be set and positive");
}

TensorField local_tensor(const RunConfig& cfg) {
  switch (cfg.tensor_source) {
    case TensorSource::identity:
      return TensorField::constant(cfg.grid.dim(), cfg.grid.size(), SmallMatrix::identity(cfg.grid.dim()));
    case TensorSource::from_connectivity:
      return limit_tensor_field(cfg.base, cfg.connectivity, cfg.tensor_resolution);
    case TensorSource::epsilon_graph:
      require_epsilon(cfg);
      return epsilon_tensor_field(build_graph(cfg.base, cfg.connectivity, cfg.epsilon));
  }
  return {};
}

PlotSeries energy_series(const std::vector<double>& t, const std::vector<double>& e) { return {"energy", t, e}; }

int cmd_validate(const Options& opt) {
  RunConfig cfg = load(opt);
  bool clean = true;
  for (const auto& r : cfg.reports) {
    std::cout << r.summary();
    clean = clean && r.passed();
  }
  std::cout << (clean ? "all checks passed\n" : "soft check failures reported above\n");
  return 0;
}

int cmd_simulate(const Options& opt) {
  RunConfig cfg = load(opt);
  require_epsilon(cfg);
  const std::string dir = out_dir(opt, cfg);
  Graph graph = build_graph(cfg.base, cfg.connectivity, cfg.epsilon);
  GraphFlow flow(graph, cfg.kernels, cfg.potentials, cfg.cache_bytes);
  Trajectory traj = flow.evolve(cfg.graph_initial(), cfg.integrator);
  write_file(join(dir, "trajectory.csv"), trajectory_csv(traj, cfg.integrator.record_every));
  write_file(join(dir, "states.csv"), graph_states_csv(traj.snapshots, cfg.grid));
  if (cfg.svg) {
    std::vector<double> t, e;
    for (const auto& r : traj.records) t.push_back(r.t), e.push_back(r.energy);
    write_file(join(dir, "energy.svg"), line_plot_svg("graph flow energy", "t", "energy", {energy_series(t, e)},
                                                      false, false));
  }
  std::printf("steps %zu  t %.6g  energy %.12g  degiorgi %.6g\n", traj.steps(), traj.final_time(),
              traj.records.back().energy, de_giorgi_residual(traj));
  return 0;
}

int cmd_simulate_local(const Options& opt) {
  RunConfig cfg = load(opt);
  const std::string dir = out_dir(opt, cfg);
  LocalFlow flow(cfg.grid, cfg.kernels, cfg.potentials, local_tensor(cfg), cfg.cache_bytes);
  LocalTrajectory traj = flow.evolve(cfg.initial, cfg.local_integrator);
  write_file(join(dir, "local_trajectory.csv"), local_trajectory_csv(traj, cfg.local_integrator.record_every));
  write_file(join(dir, "local_states.csv"), local_states_csv(traj.snapshots, cfg.grid));
  if (cfg.svg) {
    std::vector<double> t, e;
    for (const auto& r : traj.records) t.push_back(r.t), e.push_back(r.energy);
    write_file(join(dir, "local_energy.svg"),
               line_plot_svg("local flow energy", "t", "energy", {energy_series(t, e)}, false, false));
  }
  std::printf("steps %zu  t %.6g  energy %.12g  degiorgi %.6g\n", traj.steps(), traj.final_time(),
              traj.records.back().energy, local_de_giorgi_residual(traj));
  return 0;
}

int cmd_tensor(const Options& opt) {
  RunConfig cfg = load(opt);
  const std::string dir = out_dir(opt, cfg);
  TensorField limit = limit_tensor_field(cfg.base, cfg.connectivity, cfg.tensor_resolution);
  std::vector<std::pair<std::string, const TensorField*>> fields{{"limit", &limit}};
  std::optional<TensorField> eps_field;
  if (cfg.epsilon > 0.0) {
    eps_field = epsilon_tensor_field(build_graph(cfg.base, cfg.connectivity, cfg.epsilon));
    fields.emplace_back("epsilon", &*eps_field);
  }
  write_file(join(dir, "tensor.csv"), tensor_csv(cfg.grid, fields));

  std::vector<double> errors;
  for (double eps : cfg.tensor_epsilons) {
    Graph g = build_graph(cfg.base, cfg.connectivity, eps);
    const auto mask = interior_mask(cfg.grid, eps * cfg.connectivity.support_radius);
    errors.push_back(max_tensor_error(epsilon_tensor_field(g), limit, mask));
    std::printf("epsilon %.6g  max |T_eps - T|_F %.6g\n", eps, errors.back());
  }
  if (!cfg.tensor_epsilons.empty()) {
    write_file(join(dir, "tensor_error.csv"), tensor_error_csv(cfg.tensor_epsilons, errors));
    if (cfg.svg)
      write_file(join(dir, "tensor_error.svg"),
                 line_plot_svg("tensor error", "epsilon", "max Frobenius error",
                               {{"|T_eps - T|", cfg.tensor_epsilons, errors}}, true, true));
  }
  return 0;
}

int cmd_sweep(const Options& opt) {
  RunConfig cfg = load(opt);
  if (cfg.sweep_epsilons.empty()) throw ConfigError("[sweep] epsilons is required for the sweep command");
  const std::string dir = out_dir(opt, cfg);
  SweepReport report = run_sweep(cfg.sweep_config());
  write_file(join(dir, "sweep.csv"), sweep_csv(report));
  int failures = 0;
  for (const auto& row : report.rows) {
    std::printf("epsilon %.6g  species %zu  W %.6g  tensor %.6g\n", row.epsilon, row.species, row.distance_T,
                row.tensor_err);
    if (!row.error.empty()) {
      std::fprintf(stderr, "epsilon %.6g: %s\n", row.epsilon, row.error.c_str());
      ++failures;
    }
  }
  if (cfg.svg) {
    std::vector<PlotSeries> series;
    for (std::size_t i = 0; i < cfg.species; ++i)
      series.push_back({"species " + std::to_string(i + 1), cfg.sweep_epsilons, report.distances(i)});
    write_file(join(dir, "sweep.svg"), line_plot_svg("graph vs local distance", "epsilon", "distance at T", series,
                                                     true, true));
  }
  return failures > 0 ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-based nonlocal interaction flows and their local limits"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool with_out) {
    sub->add_option("--config", opt.config, "Run configuration (TOML subset)")->required()->check(CLI::ExistingFile);
    if (with_out) sub->add_option("--out", opt.out, "Output directory (overrides [output] dir)");
    sub->add_flag("--svg", opt.svg, "Also write SVG plots");
    sub->add_option("--record-every", opt.record_every, "Snapshot and CSV row stride in steps")
        ->check(CLI::PositiveNumber);
    sub->add_option("--threads", opt.threads, "Worker threads (0 keeps the runtime default)")
        ->check(CLI::NonNegativeNumber);
  };
  CLI::App* validate = app.add_subcommand("validate", "Load a configuration and print validator reports");
  CLI::App* simulate = app.add_subcommand("simulate", "Run the graph flow");
  CLI::App* simulate_local = app.add_subcommand("simulate-local", "Run the local flow");
  CLI::App* tensor = app.add_subcommand("tensor", "Compute limit and epsilon tensors");
  CLI::App* sweep = app.add_subcommand("sweep", "Compare graph and local flows over epsilon");
  add_common(validate, false);
  for (CLI::App* sub : {simulate, simulate_local, tensor, sweep}) add_common(sub, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (opt.threads > 0) set_thread_count(opt.threads);
  try {
    if (*validate) return cmd_validate(opt);
    if (*simulate) return cmd_simulate(opt);
    if (*simulate_local) return cmd_simulate_local(opt);
    if (*tensor) return cmd_tensor(opt);
    if (*sweep) return cmd_sweep(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
