#pragma once

#include <cmath>
#include <vector>

#include "graphflow/graph_dynamics.hpp"
#include "graphflow/graph_model.hpp"

namespace testing {

using namespace graphflow;

// Nodes at 0 and 1 with unit weights.
inline BaseMeasure two_nodes() { return BaseMeasure::lebesgue(SpatialGrid::line(-0.5, 1.5, 2, false)); }

// Connectivity equal to `value` everywhere inside |w| <= radius.
inline Connectivity flat(double value, double radius) {
  Connectivity c;
  c.dim = 1;
  c.support_radius = radius;
  c.moment_bound = value * radius * radius;
  c.evaluate = [value, radius](const Vec2&, const Vec2& w) { return std::abs(w[0]) <= radius ? value : 0.0; };
  c.name = "flat";
  return c;
}

inline Graph single_edge(double eta) {
  // |w| = 1 at epsilon 1, so the weight is theta itself.
  return build_graph(two_nodes(), flat(eta, 1.5), 1.0);
}

inline NodeField gaussian_profile(const SpatialGrid& grid, double center, double sigma) {
  NodeField f(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double d = grid.displacement(grid.center(k), {center, 0.0})[0];
    f[k] = std::exp(-d * d / (2.0 * sigma * sigma));
  }
  return f;
}

}  // namespace testing
