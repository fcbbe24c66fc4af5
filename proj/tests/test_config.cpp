#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "graphflow/config.hpp"
#include "graphflow/error.hpp"
#include "graphflow/toml_subset.hpp"

using namespace graphflow;

namespace {

const std::string kMinimal = R"toml(
[grid]
cells = [32]

[kernels]
K11 = "quadratic(0.5)"

[initial]
rho1 = "uniform"
)toml";

const std::string kTwoSpecies = R"toml(
# comment line
[grid]
dim = 1
lower = [0.0]
upper = [2.0]
cells = [64]
periodic = true

[measure]
density = "1 + 0.25 * sin(pi * x1)"
bounds = [0.5, 1.5]

[connectivity]
kind = "indicator_ball(3)"
epsilon = 0.125

[species]
count = 2

[kernels]
K11 = "gaussian(1, 0.2)"
K12 = "(x1 - y1)^2"
K21 = "(x1-y1) ^ 2"

[potentials]
P2 = "0.5 * x^2"

[initial]
rho1 = "exp(-(x1 - 0.8)^2 / 0.02)"
rho2 = "uniform"

[integrator]
method = "heun"
cfl_safety = 0.5
t_end = 0.25
dt_max = 1e-2
record_every = 5
stop_times = [0.1, 0.2]

[local]
tensor = "identity"

[sweep]
epsilons = [0.25, 0.125]
record_runtime = false
test_field = "sin(pi * x1)"

[output]
dir = "somewhere"
svg = true
)toml";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal single-species config loads with defaults") {
  const RunConfig cfg = parse_config(kMinimal);
  CHECK(cfg.species == 1);
  CHECK(cfg.grid.size() == 32);
  CHECK(cfg.grid.periodic());
  CHECK(cfg.kernels.at(0, 0).name.find("quadratic") != std::string::npos);
  CHECK(cfg.initial.rho[0][5] == doctest::Approx(1.0));
  CHECK(cfg.integrator.method == Integrator::euler);
  CHECK(cfg.integrator.cfl_safety == 0.9);
  CHECK_FALSE(cfg.reports.empty());
}

TEST_CASE("full two-species config") {
  const RunConfig cfg = parse_config(kTwoSpecies);
  CHECK(cfg.species == 2);
  CHECK(cfg.grid.length(0) == 2.0);
  CHECK(cfg.epsilon == 0.125);
  CHECK(cfg.base.density[0] == doctest::Approx(1.0 + 0.25 * std::sin(M_PI * cfg.grid.center(0)[0])));
  CHECK(cfg.kernels.ptr(0, 1) == cfg.kernels.ptr(1, 0));
  CHECK(cfg.kernels.at(1, 1).is_zero);
  const Vec2 x{0.3, 0.0}, y{1.1, 0.0};
  CHECK(cfg.kernels.at(0, 1).value(x, y) == doctest::Approx(0.64));
  CHECK(cfg.kernels.at(0, 1).gradient_x(x, y)[0] == doctest::Approx(-1.6));
  CHECK(cfg.potentials[0].is_zero);
  CHECK(cfg.potentials[1].gradient(x)[0] == doctest::Approx(0.3));
  CHECK(cfg.integrator.method == Integrator::heun);
  CHECK(cfg.integrator.record_every == 5);
  CHECK(cfg.integrator.stop_times == std::vector<double>{0.1, 0.2});
  CHECK(cfg.tensor_source == TensorSource::identity);
  CHECK(cfg.output_dir == "somewhere");
  CHECK(cfg.svg);
  double mass = 0.0;
  for (double r : cfg.initial.rho[0]) mass += r * cfg.grid.cell_volume();
  CHECK(mass == doctest::Approx(1.0));
  const SweepConfig sweep = cfg.sweep_config();
  CHECK(sweep.epsilons == std::vector<double>{0.25, 0.125});
  CHECK_FALSE(sweep.record_runtime);
  CHECK(sweep.test_fields.size() == 1);
  const SpeciesState g = cfg.graph_initial();
  double gm = 0.0;
  for (std::size_t k = 0; k < g.nodes(); ++k) gm += g.r[0][k] * cfg.base.weights[k];
  CHECK(gm == doctest::Approx(1.0));
}

TEST_CASE("asymmetric cross kernels are rejected at load") {
  const std::string msg = error_of(replace(kTwoSpecies, "K21 = \"(x1-y1) ^ 2\"", "K21 = \"(x1 - y1)^2 + 1\""));
  CHECK(msg.find("symmetry of the cross-interactions") != std::string::npos);
}

TEST_CASE("connectivity support beyond the declared radius is rejected") {
  const std::string text = replace(kTwoSpecies, "kind = \"indicator_ball(3)\"",
                                   "kind = \"3 * indicator(abs(w1) <= 1.2)\"\nsupport_radius = 1\nmoment_bound = 5\n"
                                   "nondegeneracy = 1");
  CHECK(error_of(text).find("theta3") != std::string::npos);
}

TEST_CASE("density bounds and zeros are rejected") {
  CHECK(error_of(replace(kTwoSpecies, "bounds = [0.5, 1.5]", "bounds = [0.9, 1.1]")).find("mu2") != std::string::npos);
  CHECK_FALSE(error_of(replace(kTwoSpecies, "1 + 0.25 * sin(pi * x1)", "1 + sin(pi * x1)")).empty());
}

TEST_CASE("malformed configs produce precise errors") {
  CHECK(error_of(kMinimal + "\n[grid2]\nfoo = 1\n").find("foo") != std::string::npos);
  CHECK(error_of(replace(kMinimal, "cells = [32]", "cells = [32]\ncells = [16]")).find("cells") != std::string::npos);
  CHECK_FALSE(error_of(replace(kMinimal, "rho1 = \"uniform\"", "")).empty());
  CHECK_FALSE(error_of(replace(kMinimal, "quadratic(0.5)", "quadratic(0.5, 2)")).empty());
  CHECK_FALSE(error_of(replace(kMinimal, "quadratic(0.5)", "(x1 - y1")).empty());
  CHECK_FALSE(error_of(kMinimal + "\n[integrator]\nmethod = \"rk4\"\n").empty());
  CHECK_FALSE(error_of(replace(kTwoSpecies, "count = 2", "count = 1")).empty());
  CHECK_FALSE(error_of("[measure]\ndensity = \"uniform\"\n").empty());
  CHECK_FALSE(error_of(replace(kMinimal, "rho1 = \"uniform\"", "rho1 = \"x1 - 0.5\"")).empty());
}

TEST_CASE("parse errors report their position") {
  try {
    parse_config("[grid]\ncells = [32\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("toml subset values") {
  const TomlDocument doc = TomlDocument::parse(
      "top = 1\n[a]\ns = \"text # not a comment\"  # comment\nn = 1_000.5\nb = false\narr = [1, 2.5, -3e2]\n"
      "inf_value = inf\n",
      "test");
  CHECK(doc.get_number("", "top") == 1.0);
  CHECK(doc.get_string("a", "s") == "text # not a comment");
  CHECK(doc.get_number("a", "n") == 1000.5);
  CHECK_FALSE(doc.get_bool("a", "b", true));
  CHECK(doc.get_numbers("a", "arr") == std::vector<double>{1.0, 2.5, -300.0});
  CHECK(std::isinf(doc.get_number("a", "inf_value")));
  CHECK(doc.get_number("a", "missing", 7.0) == 7.0);
  CHECK_THROWS_AS(doc.get_number("a", "s"), ConfigError);
  CHECK_NOTHROW(doc.reject_unused());
  const TomlDocument partial = TomlDocument::parse("[a]\nx = 1\ny = 2\n", "test");
  partial.get_number("a", "x");
  CHECK_THROWS_AS(partial.reject_unused(), ConfigError);
  CHECK_THROWS_AS(TomlDocument::parse("[a]\n[a]\n", "test"), ConfigError);
}

TEST_CASE("load_config reads files and reports missing ones") {
  CHECK_THROWS_AS(load_config("/nonexistent/run.toml"), ConfigError);
  const std::string path = (std::filesystem::temp_directory_path() / "graphflow_test_config.toml").string();
  {
    std::ofstream out(path);
    out << kMinimal;
  }
  CHECK(load_config(path).grid.size() == 32);
  std::filesystem::remove(path);
}

TEST_CASE("connectivity presets") {
  Connectivity c;
  CHECK(parse_connectivity_preset("indicator_ball(3)", 1, BoundaryValue::half, c));
  CHECK(c({0, 0}, {0.5, 0}) == 3.0);
  CHECK(parse_connectivity_preset("gaussian_cutoff(0.5, 1)", 2, BoundaryValue::half, c));
  CHECK(c.support_radius == 1.0);
  CHECK(parse_connectivity_preset("ellipsoid(4, 1)", 2, BoundaryValue::half, c));
  CHECK(c.support_radius == doctest::Approx(2.0));
  CHECK_FALSE(parse_connectivity_preset("3 * indicator(abs(w1) <= 1)", 1, BoundaryValue::half, c));
  CHECK_THROWS_AS(parse_connectivity_preset("indicator_ball(1, 2)", 1, BoundaryValue::half, c), ConfigError);
}
