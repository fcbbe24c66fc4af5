#include "graphflow/tensor_field.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "graphflow/error.hpp"
#include "graphflow/parallel.hpp"

namespace graphflow {

SmallMatrix epsilon_tensor(const Graph& graph, std::size_t node) {
  const int dim = graph.grid().dim();
  const auto& edges = graph.edges();
  const auto& m = graph.base().weights;
  SmallMatrix t(dim);
  for (std::uint32_t e : graph.incident(node)) {
    const Edge& ed = edges[e];
    const Vec2 d = graph.edge_displacement(e);
    const std::size_t other = ed.k == node ? ed.l : ed.k;
    t += (0.5 * ed.weight * m[other]) * SmallMatrix::outer(dim, d, d);
  }
  return t;
}

TensorField epsilon_tensor_field(const Graph& graph) {
  TensorField f{graph.grid().dim(), std::vector<SmallMatrix>(graph.node_count())};
  parallel_for(graph.node_count(), [&](std::size_t k) { f.values[k] = epsilon_tensor(graph, k); });
  return f;
}

SmallMatrix limit_tensor(const Connectivity& conn, const Vec2& x, double density, int resolution) {
  if (resolution <= 0) throw ConfigError("quadrature resolution must be positive");
  const int dim = conn.dim;
  const double r = conn.support_radius;
  const double h = 2.0 * r / resolution;
  const int n1 = dim == 2 ? resolution : 1;
  SmallMatrix t(dim);
  for (int j = 0; j < n1; ++j) {
    SmallMatrix row(dim);
    for (int i = 0; i < resolution; ++i) {
      const Vec2 w{-r + (i + 0.5) * h, dim == 2 ? -r + (j + 0.5) * h : 0.0};
      const double v = conn(x, w);
      if (v != 0.0) row += v * SmallMatrix::outer(dim, w, w);
    }
    t += row;
  }
  const double cell = dim == 2 ? h * h : h;
  return (0.5 * density * cell) * t;
}

TensorField limit_tensor_field(const BaseMeasure& bm, const Connectivity& conn, int resolution) {
  TensorField f{bm.grid.dim(), std::vector<SmallMatrix>(bm.size())};
  parallel_for(bm.size(), [&](std::size_t k) {
    f.values[k] = limit_tensor(conn, bm.grid.center(k), bm.density[k], resolution);
  });
  return f;
}

double ellipsoid_constant(int dim) {
  return std::pow(std::numbers::pi, 0.5 * dim) / (2.0 * std::tgamma(0.5 * dim + 2.0));
}

namespace {

void check_spd(const SmallMatrix& d, double lower, double upper, const Vec2& z) {
  const auto ev = d.symmetric_eigenvalues();
  if (d.asymmetry() > 1e-12 * (1.0 + d.frobenius()) || !d.is_positive_definite() ||
      ev[0] < lower * (1.0 - 1e-12) || ev[1] > upper * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "ellipsoid matrix at (" << z[0] << ", " << z[1] << ") is not symmetric positive definite within ["
       << lower << ", " << upper << "], eigenvalues " << ev[0] << ", " << ev[1];
    throw ConfigError(os.str());
  }
}

double sphere_value(double q, BoundaryValue boundary) {
  if (q < 1.0 - 1e-12) return 1.0;
  if (q <= 1.0 + 1e-12) return boundary == BoundaryValue::half ? 0.5 : 1.0;
  return 0.0;
}

}  // namespace

Connectivity ellipsoid_connectivity(int dim, MatrixFunction d_field, double d_lower, double d_upper,
                                    const std::vector<Vec2>& sample_points, BoundaryValue boundary) {
  if (!(d_lower > 0.0) || d_upper < d_lower) throw ConfigError("ellipsoid bounds need 0 < D_* <= D^*");
  for (const Vec2& z : sample_points) {
    const SmallMatrix d = d_field(z);
    if (d.dim() != dim) throw ConfigError("ellipsoid matrix dimension does not match");
    check_spd(d, d_lower, d_upper, z);
  }
  const double cd = ellipsoid_constant(dim);
  Connectivity c;
  c.dim = dim;
  c.evaluate = [d_field, cd, boundary](const Vec2& z, const Vec2& w) {
    const SmallMatrix d = d_field(z);
    const double q = d.inverse().quadratic_form(w);
    const double height = 2.0 / (cd * std::sqrt(d.determinant()));
    return height * sphere_value(q, boundary);
  };
  const double height_max = 2.0 / (cd * std::pow(d_lower, 0.5 * dim));
  c.support_radius = std::sqrt(d_upper);
  c.moment_bound = height_max * d_upper;
  c.nondegeneracy = 2.0 * d_lower;
  c.name = "ellipsoid";
  return c;
}

Connectivity ellipsoid_connectivity(const SmallMatrix& d_matrix, BoundaryValue boundary) {
  const int dim = d_matrix.dim();
  const auto ev = d_matrix.symmetric_eigenvalues();
  check_spd(d_matrix, ev[0], ev[1], Vec2{0.0, 0.0});
  const SmallMatrix inv = d_matrix.inverse();
  const double height = 2.0 / (ellipsoid_constant(dim) * std::sqrt(d_matrix.determinant()));
  Connectivity c;
  c.dim = dim;
  c.evaluate = [inv, height, boundary](const Vec2&, const Vec2& w) {
    return height * sphere_value(inv.quadratic_form(w), boundary);
  };
  c.support_radius = std::sqrt(ev[1]);
  c.moment_bound = height * ev[1];
  c.nondegeneracy = 2.0 * ev[0];
  std::ostringstream os;
  os << "ellipsoid(" << d_matrix(0, 0);
  if (dim == 2) os << "," << d_matrix(0, 1) << "," << d_matrix(1, 1);
  os << ")";
  c.name = os.str();
  return c;
}

std::vector<bool> interior_mask(const SpatialGrid& grid, double margin) {
  std::vector<bool> mask(grid.size(), true);
  if (grid.periodic()) return mask;
  for (std::size_t k = 0; k < grid.size(); ++k) mask[k] = grid.boundary_distance(grid.center(k)) >= margin;
  return mask;
}

double max_tensor_error(const TensorField& a, const TensorField& b, const std::vector<bool>& mask) {
  if (a.size() != b.size() || mask.size() != a.size()) throw ConfigError("tensor fields differ in size");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (mask[k]) worst = std::max(worst, (a[k] - b[k]).frobenius());
  return worst;
}

ValidationReport certify_tensor_field(const TensorField& field, double lower, double upper) {
  ValidationReport report;
  report.subject = "tensor field";
  CheckResult sym("symmetric", "T_k symmetric to 1e-12");
  CheckResult spd("spd", "Cholesky succeeds at every node");
  CheckResult lo("lower", "smallest eigenvalue >= lower bound");
  CheckResult hi("upper", "largest eigenvalue <= upper bound");
  spd.hard = true;
  double asym = 0.0;
  double emin = std::numeric_limits<double>::infinity();
  double emax = -emin;
  std::size_t failures = 0;
  std::size_t first_failure = 0;
  for (std::size_t k = 0; k < field.size(); ++k) {
    const SmallMatrix& t = field[k];
    asym = std::max(asym, t.asymmetry() / (1.0 + t.frobenius()));
    const auto ev = t.symmetric_eigenvalues();
    emin = std::min(emin, ev[0]);
    emax = std::max(emax, ev[1]);
    if (!t.is_positive_definite()) {
      if (failures == 0) first_failure = k;
      ++failures;
    }
  }
  sym.worst = asym;
  sym.bound = 1e-12;
  sym.margin = 1e-12 - asym;
  sym.passed = asym <= 1e-12;
  spd.worst = static_cast<double>(failures);
  spd.passed = failures == 0;
  if (failures) spd.detail = std::to_string(failures) + " node(s), first " + std::to_string(first_failure);
  lo.worst = emin;
  lo.bound = lower;
  lo.margin = emin - lower;
  lo.passed = emin >= lower;
  hi.worst = emax;
  hi.bound = upper;
  hi.margin = upper - emax;
  hi.passed = emax <= upper;
  report.add(sym);
  report.add(spd);
  report.add(lo);
  report.add(hi);
  return report;
}

}  // namespace graphflow
