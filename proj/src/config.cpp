#include "graphflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "graphflow/error.hpp"
#include "graphflow/tensor_field.hpp"
#include "graphflow/toml_subset.hpp"

namespace graphflow {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string strip_spaces(const std::string& s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

// Matches "name(a, b, ...)" with constant arguments. Returns false if the
// spec does not start with `name(`.
bool match_call(const std::string& spec, const std::string& name, std::vector<double>& args) {
  const std::string s = trim(spec);
  if (s.compare(0, name.size(), name) != 0) return false;
  std::size_t p = name.size();
  while (p < s.size() && std::isspace(static_cast<unsigned char>(s[p]))) ++p;
  if (p >= s.size() || s[p] != '(' || s.back() != ')') return false;
  const std::string inner = s.substr(p + 1, s.size() - p - 2);
  args.clear();
  if (trim(inner).empty()) return true;
  int depth = 0;
  std::string cur;
  auto flush = [&] {
    try {
      args.push_back(Expression::parse(cur, 0).evaluate({}));
    } catch (const Error& e) {
      throw ConfigError("bad argument '" + trim(cur) + "' in " + s + ": " + e.what());
    }
    cur.clear();
  };
  for (char c : inner) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      flush();
      continue;
    }
    cur += c;
  }
  flush();
  return true;
}

void expect_args(const std::string& spec, const std::vector<double>& args, std::size_t n) {
  if (args.size() != n) {
    throw ConfigError("preset " + trim(spec) + " takes " + std::to_string(n) + " argument(s)");
  }
}

VarValues xy_values(const Vec2& x, const Vec2& y) { return {x[0], x[1], y[0], y[1], 0.0, 0.0, 0.0, 0.0}; }

}  // namespace

Kernel parse_kernel(const std::string& spec) {
  std::vector<double> args;
  const std::string s = trim(spec);
  if (s == "zero" || s == "0") return Kernel::zero();
  if (match_call(s, "quadratic", args)) {
    expect_args(s, args, 1);
    return Kernel::quadratic(args[0]);
  }
  if (match_call(s, "gaussian", args)) {
    expect_args(s, args, 2);
    return Kernel::gaussian(args[0], args[1]);
  }
  const Expression e = Expression::parse(s, kVarsXY);
  const Expression d1 = e.derivative(Var::x1);
  const Expression d2 = e.derivative(Var::x2);
  Kernel k;
  k.value = [e](const Vec2& x, const Vec2& y) { return e.evaluate(xy_values(x, y)); };
  k.gradient_x = [d1, d2](const Vec2& x, const Vec2& y) {
    const VarValues v = xy_values(x, y);
    return Vec2{d1.evaluate(v), d2.evaluate(v)};
  };
  k.name = s;
  k.is_zero = e.is_constant() && e.evaluate({}) == 0.0;
  return k;
}

Potential parse_potential(const std::string& spec) {
  std::vector<double> args;
  const std::string s = trim(spec);
  if (s == "zero" || s == "0") return Potential::zero();
  if (match_call(s, "quadratic", args)) {
    expect_args(s, args, 1);
    return Potential::quadratic(args[0]);
  }
  const Expression e = Expression::parse(s, kVarsX);
  const Expression d1 = e.derivative(Var::x1);
  const Expression d2 = e.derivative(Var::x2);
  Potential p;
  p.value = [e](const Vec2& x) { return e.evaluate({x[0], x[1], 0, 0, 0, 0, 0, 0}); };
  p.gradient = [d1, d2](const Vec2& x) {
    const VarValues v{x[0], x[1], 0, 0, 0, 0, 0, 0};
    return Vec2{d1.evaluate(v), d2.evaluate(v)};
  };
  p.name = s;
  p.is_zero = e.is_constant() && e.evaluate({}) == 0.0;
  return p;
}

bool parse_connectivity_preset(const std::string& spec, int dim, BoundaryValue boundary, Connectivity& out) {
  std::vector<double> args;
  const std::string s = trim(spec);
  if (s == "identity") {
    out = identity_connectivity(dim, boundary);
    return true;
  }
  if (match_call(s, "indicator_ball", args)) {
    expect_args(s, args, 1);
    out = indicator_ball(dim, args[0], boundary);
    return true;
  }
  if (match_call(s, "gaussian_cutoff", args)) {
    expect_args(s, args, 2);
    out = gaussian_cutoff(dim, args[0], args[1], boundary);
    return true;
  }
  if (match_call(s, "ellipsoid", args)) {
    SmallMatrix d(dim);
    if (dim == 1) {
      expect_args(s, args, 1);
      d(0, 0) = args[0];
    } else if (args.size() == 2) {
      d = SmallMatrix::diagonal(2, args[0], args[1]);
    } else {
      expect_args(s, args, 3);
      d(0, 0) = args[0];
      d(0, 1) = d(1, 0) = args[1];
      d(1, 1) = args[2];
    }
    out = ellipsoid_connectivity(d, boundary);
    return true;
  }
  return false;
}

SweepConfig RunConfig::sweep_config() const {
  SweepConfig s;
  s.grid = grid;
  s.density = density;
  s.connectivity = connectivity;
  s.kernels = kernels;
  s.potentials = potentials;
  s.initial = initial;
  s.epsilons = sweep_epsilons;
  s.graph_integrator = integrator;
  s.local_integrator = local_integrator;
  s.tensor_resolution = tensor_resolution;
  s.test_fields = test_fields;
  s.record_runtime = record_runtime;
  s.cache_bytes = cache_bytes;
  return s;
}

namespace {

Vec2 vec_from(const std::vector<double>& v, int dim, const std::string& what) {
  if (static_cast<int>(v.size()) != dim) {
    throw ConfigError("[grid] " + what + " needs " + std::to_string(dim) + " entries");
  }
  return Vec2{v[0], dim == 2 ? v[1] : 0.0};
}

IntegratorConfig read_integrator(const TomlDocument& doc, const std::string& section, IntegratorConfig base) {
  const std::string method = doc.get_string(section, "method", base.method == Integrator::heun ? "heun" : "euler");
  if (method == "euler") {
    base.method = Integrator::euler;
  } else if (method == "heun") {
    base.method = Integrator::heun;
  } else {
    throw ConfigError("[" + section + "] method must be \"euler\" or \"heun\"");
  }
  base.cfl_safety = doc.get_number(section, "cfl_safety", base.cfl_safety);
  base.dt_max = doc.get_number(section, "dt_max", base.dt_max);
  base.t_end = doc.get_number(section, "t_end", base.t_end);
  const long every = doc.get_integer(section, "record_every", static_cast<long>(base.record_every));
  const long max_steps = doc.get_integer(section, "max_steps", static_cast<long>(base.max_steps));
  if (every < 1) throw ConfigError("[" + section + "] record_every must be >= 1");
  if (max_steps < 1) throw ConfigError("[" + section + "] max_steps must be >= 1");
  base.record_every = static_cast<std::size_t>(every);
  base.max_steps = static_cast<std::size_t>(max_steps);
  base.stop_times = doc.get_numbers(section, "stop_times", base.stop_times);
  if (!(base.cfl_safety > 0.0) || base.cfl_safety > 1.0) throw ConfigError("[" + section + "] cfl_safety must lie in (0, 1]");
  if (!(base.dt_max > 0.0)) throw ConfigError("[" + section + "] dt_max must be positive");
  if (!(base.t_end >= 0.0)) throw ConfigError("[" + section + "] t_end must be nonnegative");
  return base;
}

void attach(RunConfig& cfg, ValidationReport report) {
  if (report.hard_failure()) throw ConfigError("validation failed\n" + report.summary());
  cfg.reports.push_back(std::move(report));
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  const TomlDocument doc = TomlDocument::parse(text, origin);
  RunConfig cfg;

  // [grid]
  if (!doc.has_section("grid")) throw ConfigError(origin + ": missing section [grid]");
  const std::vector<double> cells_v = doc.get_numbers("grid", "cells");
  const int dim = static_cast<int>(doc.get_integer("grid", "dim", static_cast<long>(cells_v.size())));
  if (dim != 1 && dim != 2) throw ConfigError("[grid] dim must be 1 or 2");
  if (static_cast<int>(cells_v.size()) != dim) throw ConfigError("[grid] cells needs one entry per axis");
  std::array<std::size_t, 2> cells{1, 1};
  for (int a = 0; a < dim; ++a) {
    if (!(cells_v[a] >= 1.0) || cells_v[a] != std::floor(cells_v[a])) throw ConfigError("[grid] cells must be positive integers");
    cells[a] = static_cast<std::size_t>(cells_v[a]);
  }
  const Vec2 lower = vec_from(doc.get_numbers("grid", "lower", std::vector<double>(dim, 0.0)), dim, "lower");
  const Vec2 upper = vec_from(doc.get_numbers("grid", "upper", std::vector<double>(dim, 1.0)), dim, "upper");
  cfg.grid = SpatialGrid(dim, lower, upper, cells, doc.get_bool("grid", "periodic", true));

  // [measure]
  const std::string density_spec = doc.get_string("measure", "density", "uniform");
  if (density_spec == "uniform") {
    cfg.density = [](const Vec2&) { return 1.0; };
  } else {
    const Expression e = Expression::parse(density_spec, kVarsX);
    cfg.density = [e](const Vec2& x) { return e.evaluate({x[0], x[1], 0, 0, 0, 0, 0, 0}); };
  }
  cfg.base = build_base_measure(cfg.grid, cfg.density);
  {
    const auto [lo, hi] = std::minmax_element(cfg.base.density.begin(), cfg.base.density.end());
    const std::vector<double> bounds = doc.get_numbers("measure", "bounds", {*lo, *hi});
    if (bounds.size() != 2 || !(bounds[0] > 0.0) || bounds[1] < bounds[0])
      throw ConfigError("[measure] bounds must be [c_mu, C_mu] with 0 < c_mu <= C_mu");
    cfg.density_lower = bounds[0];
    cfg.density_upper = bounds[1];
    const long pairs = doc.get_integer("measure", "sample_pairs", 256);
    attach(cfg, validate_base_measure(cfg.base, bounds[0], bounds[1], static_cast<std::size_t>(std::max(pairs, 1L))));
  }

  // [connectivity]
  {
    const std::string b = doc.get_string("connectivity", "boundary", "half");
    if (b != "half" && b != "closed") throw ConfigError("[connectivity] boundary must be \"half\" or \"closed\"");
    const BoundaryValue boundary = b == "half" ? BoundaryValue::half : BoundaryValue::closed;
    const std::string kind = doc.get_string("connectivity", "kind", "identity");
    if (!parse_connectivity_preset(kind, dim, boundary, cfg.connectivity)) {
      const Expression e = Expression::parse(kind, kVarsZW);
      Connectivity c;
      c.dim = dim;
      c.evaluate = [e](const Vec2& z, const Vec2& w) { return e.evaluate({0, 0, 0, 0, z[0], z[1], w[0], w[1]}); };
      c.support_radius = doc.get_number("connectivity", "support_radius");
      c.moment_bound = doc.get_number("connectivity", "moment_bound");
      c.nondegeneracy = doc.get_number("connectivity", "nondegeneracy");
      c.name = kind;
      cfg.connectivity = std::move(c);
    } else {
      Connectivity& c = cfg.connectivity;
      c.support_radius = doc.get_number("connectivity", "support_radius", c.support_radius);
      c.moment_bound = doc.get_number("connectivity", "moment_bound", c.moment_bound);
      c.nondegeneracy = doc.get_number("connectivity", "nondegeneracy", c.nondegeneracy);
    }
    if (!(cfg.connectivity.support_radius > 0.0)) throw ConfigError("[connectivity] support_radius must be positive");
    cfg.epsilon = doc.get_number("connectivity", "epsilon", 0.0);
    const int quad = static_cast<int>(doc.get_integer("connectivity", "quadrature", 128));
    const SamplePlan plan = SamplePlan::for_connectivity(cfg.connectivity, cfg.grid.lower(), cfg.grid.upper(), 5, 41,
                                                         6, std::max(quad, 8));
    attach(cfg, validate_connectivity(cfg.connectivity, plan));
  }

  // [species], [kernels], [potentials]
  const long n = doc.get_integer("species", "count", 1);
  if (n < 1 || n > 9) throw ConfigError("[species] count must lie in 1..9");
  cfg.species = static_cast<std::size_t>(n);
  cfg.kernels = KernelSet(cfg.species);
  for (std::size_t i = 0; i < cfg.species; ++i) {
    for (std::size_t k = i; k < cfg.species; ++k) {
      const std::string a = "K" + std::to_string(i + 1) + std::to_string(k + 1);
      const std::string b = "K" + std::to_string(k + 1) + std::to_string(i + 1);
      const bool has_a = doc.has("kernels", a);
      const bool has_b = doc.has("kernels", b);
      if (!has_a && !has_b) continue;
      const std::string sa = has_a ? doc.get_string("kernels", a) : doc.get_string("kernels", b);
      const std::string sb = has_b ? doc.get_string("kernels", b) : sa;
      if (strip_spaces(sa) != strip_spaces(sb)) {
        throw ConfigError(origin + ": " + a + " = \"" + sa + "\" differs from " + b + " = \"" + sb +
                          "\"; the model requires symmetry of the cross-interactions");
      }
      cfg.kernels.set_symmetric(i, k, parse_kernel(sa));
    }
  }
  cfg.kernels.growth_constant = doc.get_number("kernels", "growth_constant", 0.0);
  cfg.kernels.lipschitz = doc.get_number("kernels", "lipschitz", 0.0);
  cfg.cache_bytes = static_cast<std::size_t>(doc.get_number("kernels", "cache_mb", 512.0) * 1024.0 * 1024.0);
  for (const std::string& key : doc.keys("kernels")) {
    if (key.size() == 3 && key[0] == 'K') {
      const int i = key[1] - '0';
      const int k = key[2] - '0';
      if (i < 1 || k < 1 || i > n || k > n) throw ConfigError(origin + ": kernel " + key + " is outside the species range");
    }
  }
  attach(cfg, validate_kernels(cfg.kernels, kernel_sample_plan(dim, cfg.grid.lower(), cfg.grid.upper())));

  cfg.potentials = zero_potentials(cfg.species);
  for (std::size_t i = 0; i < cfg.species; ++i) {
    const std::string key = "P" + std::to_string(i + 1);
    if (doc.has("potentials", key)) cfg.potentials[i] = parse_potential(doc.get_string("potentials", key));
  }

  // [initial]: Lebesgue densities, normalized to unit mass.
  cfg.initial.rho.clear();
  for (std::size_t i = 0; i < cfg.species; ++i) {
    const std::string key = "rho" + std::to_string(i + 1);
    const std::string spec = doc.get_string("initial", key);
    NodeField rho(cfg.grid.size());
    if (spec == "uniform") {
      std::fill(rho.begin(), rho.end(), 1.0);
    } else {
      const Expression e = Expression::parse(spec, kVarsX);
      for (std::size_t k = 0; k < cfg.grid.size(); ++k) {
        const Vec2 x = cfg.grid.center(k);
        rho[k] = e.evaluate({x[0], x[1], 0, 0, 0, 0, 0, 0});
      }
    }
    double mass = 0.0;
    for (std::size_t k = 0; k < rho.size(); ++k) {
      if (rho[k] < 0.0) throw ConfigError("[initial] " + key + " is negative at cell " + std::to_string(k));
      mass += rho[k] * cfg.grid.cell_volume();
    }
    if (!(mass > 0.0)) throw ConfigError("[initial] " + key + " has zero mass");
    for (double& x : rho) x /= mass;
    cfg.initial.rho.push_back(std::move(rho));
  }

  // [integrator], [local]
  cfg.integrator = read_integrator(doc, "integrator", IntegratorConfig{});
  cfg.local_integrator = read_integrator(doc, "local", cfg.integrator);
  const std::string source = doc.get_string("local", "tensor", "from_connectivity");
  if (source == "identity") {
    cfg.tensor_source = TensorSource::identity;
  } else if (source == "from_connectivity") {
    cfg.tensor_source = TensorSource::from_connectivity;
  } else if (source == "epsilon_graph") {
    cfg.tensor_source = TensorSource::epsilon_graph;
  } else {
    throw ConfigError("[local] tensor must be identity, from_connectivity or epsilon_graph");
  }

  // [tensor], [sweep], [output]
  cfg.tensor_resolution = static_cast<int>(doc.get_integer("tensor", "quadrature", 512));
  if (cfg.tensor_resolution < 1) throw ConfigError("[tensor] quadrature must be positive");
  cfg.tensor_epsilons = doc.get_numbers("tensor", "epsilons", {});
  cfg.sweep_epsilons = doc.get_numbers("sweep", "epsilons", {});
  cfg.record_runtime = doc.get_bool("sweep", "record_runtime", true);
  if (doc.has("sweep", "test_field")) cfg.test_fields.push_back(parse_potential(doc.get_string("sweep", "test_field")));
  cfg.output_dir = doc.get_string("output", "dir", "out");
  cfg.svg = doc.get_bool("output", "svg", false);

  doc.reject_unused();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace graphflow
