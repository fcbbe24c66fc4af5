#include <cmath>
#include <numbers>

#include "doctest.h"
#include "graphflow/error.hpp"
#include "graphflow/local_dynamics.hpp"
#include "graphflow/tensor_field.hpp"
#include "support.hpp"

using namespace graphflow;

namespace {

TensorField scalar_tensor(const SpatialGrid& grid, double value) {
  return TensorField::constant(grid.dim(), grid.size(), value * SmallMatrix::identity(grid.dim()));
}

LocalState normalized(const SpatialGrid& grid, std::vector<NodeField> fields) {
  LocalState s;
  for (auto& f : fields) {
    double mass = 0.0;
    for (double x : f) mass += x * grid.cell_volume();
    for (double& x : f) x /= mass;
    s.rho.push_back(std::move(f));
  }
  return s;
}

double mean(const NodeField& rho, const SpatialGrid& grid) {
  double m = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) m += grid.center(k)[0] * rho[k] * grid.cell_volume();
  return m;
}

double variance(const NodeField& rho, const SpatialGrid& grid) {
  const double m = mean(rho, grid);
  double v = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) v += std::pow(grid.center(k)[0] - m, 2) * rho[k] * grid.cell_volume();
  return v;
}

Kernel periodic_kernel() {
  Kernel k;
  k.value = [](const Vec2& x, const Vec2& y) { return -std::cos(2 * M_PI * (x[0] - y[0])); };
  k.gradient_x = [](const Vec2& x, const Vec2& y) { return Vec2{2 * M_PI * std::sin(2 * M_PI * (x[0] - y[0])), 0.0}; };
  k.name = "-cos";
  return k;
}

// Standard 1D upwind aggregation step on a torus, written out independently.
NodeField upwind_reference(const NodeField& rho, const VectorField& v, double h, double dt) {
  const std::size_t n = rho.size();
  NodeField face(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t r = (k + 1) % n;
    const double u = 0.5 * (v[k][0] + v[r][0]);
    face[k] = std::max(u, 0.0) * rho[k] - std::max(-u, 0.0) * rho[r];
  }
  NodeField out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = rho[k] - dt / h * (face[k] - face[(k + n - 1) % n]);
  return out;
}

KernelSet half_quadratic() {
  KernelSet ks(1);
  ks.set(0, 0, Kernel::quadratic(0.5));
  return ks;
}

}  // namespace

TEST_CASE("local velocity") {
  const SpatialGrid grid = SpatialGrid::line(0.0, 1.0, 50);
  const LocalState s = normalized(grid, {testing::gaussian_profile(grid, 0.4, 0.1)});
  SUBCASE("zero landscape") {
    const auto v = local_velocity(KernelSet(1), zero_potentials(1), s, grid);
    for (const Vec2& x : v[0]) CHECK(norm(x) == 0.0);
  }
  SUBCASE("half quadratic kernel pulls towards the mean") {
    const auto v = local_velocity(half_quadratic(), zero_potentials(1), s, grid);
    const double m = mean(s.rho[0], grid);
    for (std::size_t k = 0; k < grid.size(); ++k)
      CHECK(v[0][k][0] == doctest::Approx(-(grid.center(k)[0] - m)).epsilon(1e-12));
  }
  SUBCASE("translation on the torus shifts the velocity") {
    KernelSet ks(1);
    ks.set(0, 0, periodic_kernel());
    LocalState shifted = s;
    const std::size_t shift = 7;
    for (std::size_t k = 0; k < grid.size(); ++k) shifted.rho[0][(k + shift) % grid.size()] = s.rho[0][k];
    const auto a = local_velocity(ks, zero_potentials(1), s, grid);
    const auto b = local_velocity(ks, zero_potentials(1), shifted, grid);
    for (std::size_t k = 0; k < grid.size(); ++k)
      CHECK(b[0][(k + shift) % grid.size()][0] == doctest::Approx(a[0][k][0]).epsilon(1e-10));
  }
}

TEST_CASE("local slope") {
  const SpatialGrid grid = SpatialGrid::line(0.0, 1.0, 200);
  const LocalState s = normalized(grid, {testing::gaussian_profile(grid, 0.5, 0.08)});
  const double slope = local_slope(s, half_quadratic(), zero_potentials(1), scalar_tensor(grid, 1.0), grid);
  CHECK(slope == doctest::Approx(variance(s.rho[0], grid)).epsilon(1e-12));
  CHECK(local_slope(s, half_quadratic(), zero_potentials(1), scalar_tensor(grid, 2.0), grid) ==
        doctest::Approx(2.0 * slope).epsilon(1e-14));
  CHECK(local_slope(s, KernelSet(1), zero_potentials(1), scalar_tensor(grid, 1.0), grid) == 0.0);
}

TEST_CASE("local action identities") {
  const SpatialGrid grid(2, {0, 0}, {1, 1}, {20, 20}, true);
  NodeField profile(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) profile[k] = 1.0 + 0.5 * std::sin(2 * M_PI * grid.center(k)[0]);
  const LocalState s = normalized(grid, {profile});
  SmallMatrix t(2);
  t(0, 0) = 2.0;
  t(0, 1) = t(1, 0) = 0.3;
  t(1, 1) = 1.0;
  const TensorField tensor = TensorField::constant(2, grid.size(), t);
  KernelSet ks(1);
  ks.set(0, 0, Kernel::gaussian(1.0, 0.2));
  PotentialSet ps{Potential::linear({0.3, -0.7})};
  const auto v = local_velocity(ks, ps, s, grid);
  std::vector<VectorField> j(1, VectorField(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) j[0][k] = s.rho[0][k] * t.apply(v[0][k]);
  const double slope = local_slope(s, v, tensor, grid);
  CHECK(local_action(s, j, tensor, grid) == doctest::Approx(slope).epsilon(1e-12));
  std::vector<VectorField> j2 = j;
  for (Vec2& x : j2[0]) x = 2.0 * x;
  CHECK(local_action(s, j2, tensor, grid) == doctest::Approx(4.0 * slope).epsilon(1e-12));
  std::vector<VectorField> zero(1, VectorField(grid.size(), Vec2{0.0, 0.0}));
  CHECK(local_action(s, zero, tensor, grid) == 0.0);
}

TEST_CASE("local action is infinite for flux out of an empty cell") {
  const SpatialGrid grid = SpatialGrid::line(0.0, 1.0, 4);
  LocalState s{{{0.0, 2.0, 2.0, 0.0}}};
  std::vector<VectorField> j(1, VectorField(4, Vec2{0.0, 0.0}));
  j[0][1] = {0.5, 0.0};
  CHECK(std::isfinite(local_action(s, j, scalar_tensor(grid, 1.0), grid)));
  j[0][0] = {0.5, 0.0};
  CHECK(std::isinf(local_action(s, j, scalar_tensor(grid, 1.0), grid)));
}

TEST_CASE("two-cell step against the hand computation") {
  // Cells at 0.5 and 1.5 on a bounded box, P(x) = x, T = 1: the interior face
  // carries U = -1 and drains cell 1 into cell 0.
  const SpatialGrid grid = SpatialGrid::line(0.0, 2.0, 2, false);
  PotentialSet ps{Potential::linear({1.0, 0.0})};
  const LocalFlow flow(grid, KernelSet(1), ps, scalar_tensor(grid, 1.0));
  const LocalState s{{{0.25, 0.75}}};
  InterfaceFlux f;
  const LocalState next = flow.step(s, 0.5, &f);
  CHECK(next.rho[0][0] == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(next.rho[0][1] == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(f.face[0][0][0] == doctest::Approx(-0.75));
  CHECK(f.face[0][0][1] == 0.0);
  CHECK_THROWS_AS(flow.step(s, 1.5, nullptr), CflError);

  IntegratorConfig cfg;
  cfg.t_end = 0.5;
  cfg.dt_max = 0.5;
  const LocalTrajectory traj = flow.evolve(s, cfg);
  REQUIRE(traj.steps() == 1);
  const LocalStepRecord& r = traj.records[0];
  CHECK(r.energy == doctest::Approx(1.25));
  CHECK(traj.records[1].energy == doctest::Approx(0.875));
  CHECK(r.slope == doctest::Approx(1.0));
  CHECK(r.action == doctest::Approx(0.75));
  CHECK(r.power == doctest::Approx(-0.75));
  CHECK(r.residual == doctest::Approx(0.125));
  CHECK(local_de_giorgi_residual(traj) == doctest::Approx(0.0625));
  CHECK(chain_rule_residual(traj) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("identity tensor reproduces the standard upwind aggregation scheme") {
  const SpatialGrid grid = SpatialGrid::line(0.0, 1.0, 128);
  const LocalState s = normalized(grid, {testing::gaussian_profile(grid, 0.3, 0.1)});
  KernelSet ks(1);
  ks.set(0, 0, Kernel::gaussian(1.0, 0.2));
  const LocalFlow flow(grid, ks, zero_potentials(1), scalar_tensor(grid, 1.0));
  const auto ev = flow.evaluate(s);
  const double dt = 0.8 / ev.max_rate;
  const LocalState next = flow.step(s, dt);
  const NodeField ref = upwind_reference(s.rho[0], ev.velocity[0], grid.spacing(0), dt);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(std::abs(next.rho[0][k] - ref[k]) <= 1e-14 * (1.0 + ref[k]));
}

TEST_CASE("zero velocity keeps the local state constant") {
  const SpatialGrid grid = SpatialGrid::line(0.0, 1.0, 64);
  const LocalState s = normalized(grid, {testing::gaussian_profile(grid, 0.3, 0.1)});
  const LocalFlow flow(grid, KernelSet(1), zero_potentials(1), scalar_tensor(grid, 1.0));
  IntegratorConfig cfg;
  cfg.t_end = 1.0;
  cfg.dt_max = 0.25;
  const LocalTrajectory traj = flow.evolve(s, cfg);
  CHECK(traj.final_state.rho == s.rho);
  CHECK(local_de_giorgi_residual(traj) == 0.0);
  CHECK(chain_rule_residual(traj) == 0.0);
}

TEST_CASE("local flow conserves mass, keeps positivity and dissipates") {
  const SpatialGrid grid(2, {0, 0}, {1, 1}, {24, 24}, true);
  LocalState s = normalized(grid, {NodeField(grid.size()), NodeField(grid.size())});
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec2 x = grid.center(k);
    s.rho[0][k] = std::exp(-(std::pow(x[0] - 0.4, 2) + std::pow(x[1] - 0.5, 2)) / 0.02);
    s.rho[1][k] = std::exp(-(std::pow(x[0] - 0.6, 2) + std::pow(x[1] - 0.45, 2)) / 0.03);
  }
  s = normalized(grid, s.rho);
  KernelSet ks(2);
  ks.set_symmetric(0, 1, Kernel::gaussian(1.0, 0.3));
  ks.set(0, 0, Kernel::quadratic(0.2));
  SmallMatrix t(2);
  t(0, 0) = 1.5;
  t(0, 1) = t(1, 0) = 0.4;
  t(1, 1) = 0.8;
  const LocalFlow flow(grid, ks, zero_potentials(2), TensorField::constant(2, grid.size(), t));
  for (Integrator method : {Integrator::euler, Integrator::heun}) {
    IntegratorConfig cfg;
    cfg.method = method;
    cfg.t_end = 0.3;
    cfg.dt_max = 0.01;
    const LocalTrajectory traj = flow.evolve(s, cfg);
    for (std::size_t n = 0; n < traj.records.size(); ++n) {
      const auto& r = traj.records[n];
      for (std::size_t i = 0; i < 2; ++i) {
        CHECK(std::abs(r.mass[i] - 1.0) <= 1e-12);
        CHECK(r.min_density[i] >= 0.0);
      }
      if (n > 0) CHECK(r.energy <= traj.records[n - 1].energy + 1e-8 * (1.0 + std::abs(r.energy)));
    }
  }
}

TEST_CASE("local residuals shrink under joint refinement") {
  KernelSet ks(2);
  ks.set_symmetric(0, 1, Kernel::quadratic(0.5));
  double previous_g = 0.0, previous_c = 0.0;
  for (int level = 0; level < 3; ++level) {
    const SpatialGrid grid = SpatialGrid::line(0.0, 1.0, 128u << level);
    const LocalState s = normalized(grid, {testing::gaussian_profile(grid, 0.4, 0.07),
                                           testing::gaussian_profile(grid, 0.6, 0.06)});
    const LocalFlow flow(grid, ks, zero_potentials(2), scalar_tensor(grid, 1.0));
    IntegratorConfig cfg;
    cfg.t_end = 0.3;
    cfg.dt_max = 1.0;
    cfg.cfl_safety = 0.5;
    const LocalTrajectory traj = flow.evolve(s, cfg);
    const double g = std::abs(local_de_giorgi_residual(traj));
    const double c = chain_rule_residual(traj);
    if (level > 0) {
      CHECK(g < previous_g / 1.5);
      CHECK(c < previous_c / 1.5);
    }
    previous_g = g;
    previous_c = c;
  }
}

TEST_CASE("frozen local state accumulates half the slope") {
  LocalTrajectory traj;
  for (int n = 0; n <= 4; ++n) {
    LocalStepRecord r;
    r.t = 0.5 * n;
    r.dt = n < 4 ? 0.5 : 0.0;
    r.energy = 2.0;
    r.slope = 0.3;
    traj.records.push_back(r);
  }
  CHECK(local_de_giorgi_residual(traj) == doctest::Approx(0.5 * 2.0 * 0.3));
}

TEST_CASE("local solver rejects invalid inputs") {
  const SpatialGrid grid = SpatialGrid::line(0.0, 1.0, 8);
  CHECK_THROWS_AS(LocalFlow(grid, KernelSet(1), zero_potentials(1), scalar_tensor(grid, -1.0)), ConfigError);
  CHECK_THROWS_AS(LocalFlow(grid, KernelSet(1), zero_potentials(1), scalar_tensor(SpatialGrid::line(0, 1, 4), 1.0)),
                  ConfigError);
  CHECK_THROWS_AS(check_local_state(LocalState{{NodeField(8, -1.0)}}, grid, 1), ConfigError);
}
