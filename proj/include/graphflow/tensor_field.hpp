#pragma once

#include <functional>
#include <vector>

#include "graphflow/graph_model.hpp"
#include "graphflow/linalg.hpp"
#include "graphflow/validation.hpp"

namespace graphflow {

// One d x d matrix per grid node.
struct TensorField {
  int dim = 1;
  std::vector<SmallMatrix> values;

  std::size_t size() const { return values.size(); }
  const SmallMatrix& operator[](std::size_t k) const { return values[k]; }

  static TensorField constant(int dim, std::size_t nodes, const SmallMatrix& m) {
    return TensorField{dim, std::vector<SmallMatrix>(nodes, m)};
  }
};

// 1/2 sum_l (x_k - x_l) (x_k - x_l)^T eta(x_k, x_l) m_l.
SmallMatrix epsilon_tensor(const Graph& graph, std::size_t node);
TensorField epsilon_tensor_field(const Graph& graph);

// 1/2 int w w^T density theta(x, w) dw, midpoint rule with `resolution`
// cells per axis on [-C_supp, C_supp]^d.
SmallMatrix limit_tensor(const Connectivity& conn, const Vec2& x, double density, int resolution);
TensorField limit_tensor_field(const BaseMeasure& bm, const Connectivity& conn, int resolution);

using MatrixFunction = std::function<SmallMatrix(const Vec2&)>;

// theta(z, w) = c(z) 1{<w, D(z)^-1 w> <= 1}, c(z) = 2 / (C_d sqrt(det D(z)))
// with C_d = pi^(d/2) / (2 Gamma(d/2 + 2)). Its limit tensor for unit base
// density is D. Throws ConfigError when a sampled D(z) is not symmetric
// positive definite or leaves [d_lower, d_upper].
Connectivity ellipsoid_connectivity(int dim, MatrixFunction d_field, double d_lower, double d_upper,
                                    const std::vector<Vec2>& sample_points,
                                    BoundaryValue boundary = BoundaryValue::half);
Connectivity ellipsoid_connectivity(const SmallMatrix& d_matrix, BoundaryValue boundary = BoundaryValue::half);

double ellipsoid_constant(int dim);

// Nodes at distance >= margin from the boundary of a bounded grid (all nodes
// on a torus).
std::vector<bool> interior_mask(const SpatialGrid& grid, double margin);

// max over masked nodes of ||a_k - b_k||_F.
double max_tensor_error(const TensorField& a, const TensorField& b, const std::vector<bool>& mask);

// Symmetry, Cholesky and eigenvalue bounds [lower, upper] at every node.
ValidationReport certify_tensor_field(const TensorField& field, double lower, double upper);

}  // namespace graphflow
