#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "graphflow/grid.hpp"
#include "graphflow/linalg.hpp"
#include "graphflow/validation.hpp"

namespace graphflow {

using DensityFunction = std::function<double(const Vec2&)>;

// Absolutely continuous base measure sampled at the grid nodes. Node k
// carries the midpoint-rule weight m_k = density(x_k) * cell volume.
struct BaseMeasure {
  SpatialGrid grid;
  std::vector<double> density;
  std::vector<double> weights;

  static BaseMeasure lebesgue(const SpatialGrid& grid);
  std::size_t size() const { return weights.size(); }
  double total_mass() const;
};

// Throws ConfigError naming the first node where the density is not a
// positive finite number.
BaseMeasure build_base_measure(const SpatialGrid& grid, const DensityFunction& density);

// Reports nodes outside [lower, upper] (hard failure) and the empirical
// modulus of continuity of the density on `sample_pairs` node pairs per
// distance level.
ValidationReport validate_base_measure(const BaseMeasure& bm, double lower, double upper, std::size_t sample_pairs,
                                       std::uint64_t seed = 0x5eed);

using ConnectivityFunction = std::function<double(const Vec2& z, const Vec2& w)>;

// Reference connectivity theta(z, w) together with the structural constants
// it is declared to satisfy.
struct Connectivity {
  int dim = 1;
  ConnectivityFunction evaluate;
  double support_radius = 1.0;  // theta(z, w) = 0 for |w| > support_radius
  double moment_bound = 1.0;    // |w|^2 theta(z, w) <= moment_bound
  double nondegeneracy = 0.0;   // int |w.xi|^2 theta(z, w) dw >= nondegeneracy |xi|^2
  std::string name;

  double operator()(const Vec2& z, const Vec2& w) const { return evaluate(z, w); }
};

// How an indicator-type connectivity is valued on the boundary of its
// support. Lattice graphs hit that boundary exactly whenever epsilon is a
// multiple of the grid spacing; `half` samples the jump at its midpoint,
// `closed` uses the full height there.
enum class BoundaryValue { half, closed };

double unit_ball_volume(int dim);

// height * 1{|w| <= 1}.
Connectivity indicator_ball(int dim, double height, BoundaryValue boundary = BoundaryValue::half);
// The indicator whose limit tensor is the identity: height 2 (d + 2) / |B_1|.
Connectivity identity_connectivity(int dim, BoundaryValue boundary = BoundaryValue::half);
// exp(-|w|^2 / (2 sigma^2)) 1{|w| <= radius}.
Connectivity gaussian_cutoff(int dim, double sigma, double radius, BoundaryValue boundary = BoundaryValue::half);

// Sample points for the assumption validators.
struct SamplePlan {
  std::vector<Vec2> points;         // positions z (or x, y for kernels)
  std::vector<Vec2> displacements;  // w samples, should reach beyond the declared support
  std::vector<Vec2> directions;     // unit vectors xi
  int quadrature_resolution = 256;  // cells per axis for moment quadratures
  std::vector<double> deltas;       // distance levels of the modulus table

  // Regular lattice of `points_per_axis` z-points on [lower, upper], w-lattice on
  // [-2 R, 2 R]^d with R the declared support radius, and `directions` unit
  // vectors spread over a half circle.
  static SamplePlan for_connectivity(const Connectivity& conn, const Vec2& lower, const Vec2& upper,
                                     int points_per_axis = 5, int w_per_axis = 41, int directions = 6,
                                     int quadrature_resolution = 256);
};

ValidationReport validate_connectivity(const Connectivity& conn, const SamplePlan& plan);

// eps^-(d+2) theta((x + y) / 2, (x - y) / eps). Throws for x == y.
double scaled_edge_weight(const Connectivity& conn, double epsilon, const Vec2& x, const Vec2& y);

struct Edge {
  std::uint32_t k;
  std::uint32_t l;  // k < l
  double weight;    // eta^eps(x_k, x_l) = eta^eps(x_l, x_k)
};

// Epsilon-scaled weighted graph on the nodes of a base measure. Each
// unordered pair is stored once; incidence lists give every node its edges
// in ascending edge order.
class Graph {
 public:
  Graph(BaseMeasure base, double epsilon, double support_radius, std::vector<Edge> edges);

  const BaseMeasure& base() const { return base_; }
  const SpatialGrid& grid() const { return base_.grid; }
  double epsilon() const { return epsilon_; }
  double support_radius() const { return support_radius_; }
  std::size_t node_count() const { return base_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const std::uint32_t> incident(std::size_t node) const {
    return {incident_.data() + offsets_[node], incident_.data() + offsets_[node + 1]};
  }
  // Weight of the pair (k, l), 0 when there is no edge.
  double weight(std::size_t k, std::size_t l) const;
  // x_k - x_l for the stored orientation of edge e.
  Vec2 edge_displacement(std::size_t e) const;

 private:
  BaseMeasure base_;
  double epsilon_;
  double support_radius_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> incident_;
};

// Throws ConfigError when eps * support_radius reaches half of a periodic
// axis (an edge could wrap twice).
Graph build_graph(const BaseMeasure& bm, const Connectivity& conn, double epsilon);

}  // namespace graphflow
