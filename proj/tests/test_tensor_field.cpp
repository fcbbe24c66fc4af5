#include <cmath>
#include <numbers>

#include "doctest.h"
#include "graphflow/error.hpp"
#include "graphflow/tensor_field.hpp"
#include "support.hpp"

using namespace graphflow;

namespace {

SmallMatrix rotation(double angle) {
  SmallMatrix r(2);
  r(0, 0) = std::cos(angle);
  r(0, 1) = -std::sin(angle);
  r(1, 0) = std::sin(angle);
  r(1, 1) = std::cos(angle);
  return r;
}

SmallMatrix product(const SmallMatrix& a, const SmallMatrix& b) {
  SmallMatrix c(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j)
      for (int k = 0; k < a.dim(); ++k) c(i, j) += a(i, k) * b(k, j);
  return c;
}

SmallMatrix transpose(const SmallMatrix& a) {
  SmallMatrix t(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) t(i, j) = a(j, i);
  return t;
}

}  // namespace

TEST_CASE("epsilon tensor of an isolated node is zero") {
  const BaseMeasure bm = BaseMeasure::lebesgue(SpatialGrid::line(0.0, 1.0, 16));
  Connectivity zero = indicator_ball(1, 3.0);
  zero.evaluate = [](const Vec2&, const Vec2&) { return 0.0; };
  const Graph g = build_graph(bm, zero, 0.2);
  CHECK(epsilon_tensor(g, 3).frobenius() == 0.0);
}

TEST_CASE("epsilon tensor of the unit indicator tends to one") {
  const BaseMeasure bm = BaseMeasure::lebesgue(SpatialGrid::line(0.0, 1.0, 4096));
  const Graph g = build_graph(bm, indicator_ball(1, 3.0), 1.0 / 64.0);
  const TensorField t = epsilon_tensor_field(g);
  for (std::size_t k = 0; k < t.size(); k += 511) CHECK(t[k](0, 0) == doctest::Approx(1.0).epsilon(2e-2));
  // Half weight on the support boundary leaves 1 + 1 / (2 n^2) with n = eps / h.
  CHECK(t[0](0, 0) == doctest::Approx(1.0 + 1.0 / (2.0 * 64.0 * 64.0)).epsilon(1e-12));
}

TEST_CASE("epsilon tensors are symmetric and below the moment bound") {
  const SpatialGrid grid(2, {0, 0}, {1, 1}, {40, 40}, true);
  const double c_upper = 1.3;
  const BaseMeasure bm = build_base_measure(grid, [](const Vec2& x) { return 1.0 + 0.3 * std::sin(2 * M_PI * x[0]); });
  const Connectivity conn = gaussian_cutoff(2, 0.5, 1.0);
  const TensorField t = epsilon_tensor_field(build_graph(bm, conn, 0.15));
  const double bound = 0.5 * c_upper * conn.moment_bound * unit_ball_volume(2) * std::pow(conn.support_radius, 2);
  for (std::size_t k = 0; k < t.size(); ++k) {
    CHECK(t[k](0, 1) == t[k](1, 0));
    CHECK(t[k].symmetric_eigenvalues()[1] <= bound);
  }
}

TEST_CASE("limit tensor examples") {
  CHECK(limit_tensor(indicator_ball(1, 3.0), {0.3, 0.0}, 1.0, 2048)(0, 0) == doctest::Approx(1.0).epsilon(1e-3));
  Connectivity zero = indicator_ball(2, 1.0);
  zero.evaluate = [](const Vec2&, const Vec2&) { return 0.0; };
  CHECK(limit_tensor(zero, {0.0, 0.0}, 1.0, 64).frobenius() == 0.0);
  const SmallMatrix t = limit_tensor(ellipsoid_connectivity(SmallMatrix::diagonal(2, 2.0, 1.0)), {0.5, 0.5}, 1.0, 512);
  CHECK((t - SmallMatrix::diagonal(2, 2.0, 1.0)).frobenius() <= 1e-2);
  CHECK(limit_tensor(identity_connectivity(2), {0.0, 0.0}, 1.7, 512)(1, 1) == doctest::Approx(1.7).epsilon(1e-2));
}

TEST_CASE("ellipsoid connectivity constants and support") {
  CHECK(ellipsoid_constant(1) == doctest::Approx(2.0 / 3.0));
  CHECK(ellipsoid_constant(2) == doctest::Approx(std::numbers::pi / 4.0));
  const Connectivity id2 = ellipsoid_connectivity(SmallMatrix::identity(2));
  CHECK(id2({0.2, 0.2}, {0.3, 0.1}) == doctest::Approx(8.0 / std::numbers::pi));
  const Connectivity one = ellipsoid_connectivity(SmallMatrix::identity(1));
  CHECK(one({0.0, 0.0}, {0.7, 0.0}) == doctest::Approx(3.0));
  CHECK(one({0.0, 0.0}, {1.2, 0.0}) == 0.0);
  const Connectivity e = ellipsoid_connectivity(SmallMatrix::diagonal(2, 4.0, 1.0));
  CHECK(e.support_radius == doctest::Approx(2.0));
  CHECK(e({0, 0}, {1.99, 0.0}) > 0.0);
  CHECK(e({0, 0}, {2.01, 0.0}) == 0.0);
  CHECK(e({0, 0}, {0.0, 0.99}) > 0.0);
  CHECK(e({0, 0}, {0.0, 1.01}) == 0.0);
}

TEST_CASE("ellipsoid connectivity rejects non-SPD and out-of-bounds matrices") {
  SmallMatrix bad(2);
  bad(0, 0) = 1.0;
  bad(1, 1) = -1.0;
  CHECK_THROWS_AS(ellipsoid_connectivity(bad), ConfigError);
  CHECK_THROWS_AS(ellipsoid_connectivity(2, [](const Vec2&) { return SmallMatrix::diagonal(2, 3.0, 1.0); }, 0.5, 2.0,
                                         {{0.0, 0.0}, {0.5, 0.5}}),
                  ConfigError);
}

TEST_CASE("limit tensor is covariant under rotations") {
  const SmallMatrix d = SmallMatrix::diagonal(2, 2.0, 0.7);
  for (double angle : {0.3, 1.1, 2.5}) {
    const SmallMatrix r = rotation(angle);
    const SmallMatrix rd = product(product(r, d), transpose(r));
    const SmallMatrix t = limit_tensor(ellipsoid_connectivity(rd), {0.0, 0.0}, 1.0, 512);
    CHECK((t - rd).frobenius() <= 1e-2);
  }
  const SmallMatrix iso = limit_tensor(gaussian_cutoff(2, 0.4, 1.0), {0.0, 0.0}, 1.0, 512);
  for (double angle : {0.4, 1.3}) {
    const SmallMatrix r = rotation(angle);
    CHECK((product(product(r, iso), transpose(r)) - iso).frobenius() <= 1e-12);
  }
}

TEST_CASE("epsilon tensors converge to the limit tensor for a smooth density") {
  const SpatialGrid grid = SpatialGrid::line(0.0, 1.0, 4096);
  const BaseMeasure bm = build_base_measure(grid, [](const Vec2& x) { return 1.0 + 0.3 * std::sin(2 * M_PI * x[0]); });
  const Connectivity conn = gaussian_cutoff(1, 0.5, 1.0);
  const TensorField limit = limit_tensor_field(bm, conn, 1024);
  const std::vector<bool> all(grid.size(), true);
  double previous = INFINITY;
  for (double eps : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    const double err = max_tensor_error(epsilon_tensor_field(build_graph(bm, conn, eps)), limit, all);
    CHECK(err <= 1.1 * previous);
    previous = err;
  }
  CHECK(previous <= 5e-3);
}

TEST_CASE("interior mask keeps nodes away from the boundary") {
  const SpatialGrid box = SpatialGrid::line(0.0, 1.0, 10, false);
  const auto mask = interior_mask(box, 0.2);
  CHECK(std::count(mask.begin(), mask.end(), true) == 6);
  const auto torus = interior_mask(SpatialGrid::line(0.0, 1.0, 10), 0.2);
  CHECK(std::count(torus.begin(), torus.end(), true) == 10);
}

TEST_CASE("tensor certification") {
  const BaseMeasure bm = BaseMeasure::lebesgue(SpatialGrid(2, {0, 0}, {1, 1}, {16, 16}, true));
  const TensorField t = limit_tensor_field(bm, ellipsoid_connectivity(SmallMatrix::diagonal(2, 2.0, 1.0)), 128);
  CHECK(certify_tensor_field(t, 0.9, 2.1).passed());
  TensorField broken = t;
  broken.values[5] = SmallMatrix::diagonal(2, 1.0, -0.1);
  const ValidationReport r = certify_tensor_field(broken, 0.9, 2.1);
  CHECK(r.hard_failure());
  CHECK_FALSE(r.find("spd")->passed);
}
