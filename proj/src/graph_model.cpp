#include "graphflow/graph_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "graphflow/error.hpp"
#include "graphflow/parallel.hpp"

namespace graphflow {

namespace {

constexpr double kBoundaryTolerance = 1e-12;

// Value of a jump at the unit sphere of the quadratic form q = |w|^2 (or
// <w, D^-1 w>): inside, on the sphere, outside.
double sphere_indicator(double q, BoundaryValue boundary) {
  if (q < 1.0 - kBoundaryTolerance) return 1.0;
  if (q <= 1.0 + kBoundaryTolerance) return boundary == BoundaryValue::half ? 0.5 : 1.0;
  return 0.0;
}

std::string boundary_suffix(BoundaryValue b) { return b == BoundaryValue::closed ? ",closed" : ""; }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

}  // namespace

BaseMeasure BaseMeasure::lebesgue(const SpatialGrid& grid) {
  return build_base_measure(grid, [](const Vec2&) { return 1.0; });
}

double BaseMeasure::total_mass() const {
  double s = 0.0;
  for (double m : weights) s += m;
  return s;
}

BaseMeasure build_base_measure(const SpatialGrid& grid, const DensityFunction& density) {
  BaseMeasure bm{grid, std::vector<double>(grid.size()), std::vector<double>(grid.size())};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double rho = density(grid.center(k));
    if (!std::isfinite(rho) || !(rho > 0.0)) {
      throw ConfigError("base measure density must be positive and finite; node " + std::to_string(k) +
                        " has value " + fmt(rho));
    }
    bm.density[k] = rho;
    bm.weights[k] = rho * grid.cell_volume();
  }
  return bm;
}

ValidationReport validate_base_measure(const BaseMeasure& bm, double lower, double upper, std::size_t sample_pairs,
                                       std::uint64_t seed) {
  ValidationReport report;
  report.subject = "base measure";

  CheckResult bounds{"mu2", "c_mu <= density <= C_mu"};
  bounds.hard = true;
  bounds.bound = lower;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::vector<std::size_t> bad;
  for (std::size_t k = 0; k < bm.size(); ++k) {
    lo = std::min(lo, bm.density[k]);
    hi = std::max(hi, bm.density[k]);
    if (bm.density[k] < lower || bm.density[k] > upper) bad.push_back(k);
  }
  bounds.worst = (lo - lower < upper - hi) ? lo : hi;
  bounds.bound = (lo - lower < upper - hi) ? lower : upper;
  bounds.margin = std::min(lo - lower, upper - hi);
  bounds.passed = bad.empty() && lower > 0.0;
  if (!bad.empty()) {
    std::ostringstream os;
    os << bad.size() << " node(s) out of bounds, first " << bad.front() << " (density " << bm.density[bad.front()]
       << ")";
    bounds.detail = os.str();
  }
  report.add(bounds);

  CheckResult positive{"mu_weights", "all node weights positive"};
  positive.hard = true;
  positive.worst = *std::min_element(bm.weights.begin(), bm.weights.end());
  positive.margin = positive.worst;
  positive.passed = positive.worst > 0.0;
  report.add(positive);

  // Empirical modulus on dyadic distance levels.
  const SpatialGrid& g = bm.grid;
  double h = g.spacing(0);
  double reach = g.length(0);
  for (int a = 1; a < g.dim(); ++a) {
    h = std::min(h, g.spacing(a));
    reach = std::max(reach, g.length(a));
  }
  if (g.periodic()) reach *= 0.5;
  std::mt19937_64 rng(seed);
  for (double delta = h; delta <= reach * (1.0 + 1e-12); delta *= 2.0) {
    double worst = 0.0;
    std::array<long, 2> window{0, 0};
    for (int a = 0; a < g.dim(); ++a) window[a] = static_cast<long>(std::floor(delta / g.spacing(a) + 1e-9));
    std::uniform_int_distribution<std::size_t> pick(0, bm.size() - 1);
    for (std::size_t s = 0; s < sample_pairs; ++s) {
      const std::size_t k = pick(rng);
      auto idx = g.multi_index(k);
      std::array<long, 2> target{0, 0};
      bool inside = true;
      for (int a = 0; a < g.dim(); ++a) {
        std::uniform_int_distribution<long> off(-window[a], window[a]);
        long t = static_cast<long>(idx[a]) + off(rng);
        const long n = static_cast<long>(g.cells(a));
        if (g.periodic()) {
          t = ((t % n) + n) % n;
        } else if (t < 0 || t >= n) {
          inside = false;
        }
        target[a] = t;
      }
      if (!inside) continue;
      const std::size_t l = g.flat_index(static_cast<std::size_t>(target[0]), static_cast<std::size_t>(target[1]));
      if (g.distance(g.center(k), g.center(l)) > delta * (1.0 + 1e-12)) continue;
      worst = std::max(worst, std::abs(bm.density[k] - bm.density[l]));
    }
    report.modulus.delta.push_back(delta);
    report.modulus.modulus.push_back(worst);
  }
  return report;
}

double unit_ball_volume(int dim) { return dim == 1 ? 2.0 : std::numbers::pi; }

Connectivity indicator_ball(int dim, double height, BoundaryValue boundary) {
  Connectivity c;
  c.dim = dim;
  c.evaluate = [height, boundary](const Vec2&, const Vec2& w) { return height * sphere_indicator(norm_sq(w), boundary); };
  c.support_radius = 1.0;
  c.moment_bound = height;
  c.nondegeneracy = height * unit_ball_volume(dim) / (dim + 2);
  c.name = "indicator_ball(" + fmt(height) + boundary_suffix(boundary) + ")";
  return c;
}

Connectivity identity_connectivity(int dim, BoundaryValue boundary) {
  return indicator_ball(dim, 2.0 * (dim + 2) / unit_ball_volume(dim), boundary);
}

Connectivity gaussian_cutoff(int dim, double sigma, double radius, BoundaryValue boundary) {
  if (!(sigma > 0.0) || !(radius > 0.0)) throw ConfigError("gaussian_cutoff needs sigma > 0 and radius > 0");
  Connectivity c;
  c.dim = dim;
  const double two_s2 = 2.0 * sigma * sigma;
  c.evaluate = [two_s2, radius, boundary](const Vec2&, const Vec2& w) {
    const double r2 = norm_sq(w);
    return std::exp(-r2 / two_s2) * sphere_indicator(r2 / (radius * radius), boundary);
  };
  c.support_radius = radius;
  c.moment_bound = radius * radius >= two_s2 ? two_s2 / std::numbers::e : radius * radius * std::exp(-radius * radius / two_s2);
  const double u = radius * radius / two_s2;
  if (dim == 1) {
    c.nondegeneracy = sigma * sigma * (std::sqrt(2.0 * std::numbers::pi) * sigma * std::erf(radius / (std::sqrt(2.0) * sigma)) -
                                       2.0 * radius * std::exp(-u));
  } else {
    c.nondegeneracy = 2.0 * std::numbers::pi * std::pow(sigma, 4) * (1.0 - std::exp(-u) * (1.0 + u));
  }
  c.name = "gaussian_cutoff(" + fmt(sigma) + "," + fmt(radius) + boundary_suffix(boundary) + ")";
  return c;
}

SamplePlan SamplePlan::for_connectivity(const Connectivity& conn, const Vec2& lower, const Vec2& upper,
                                        int points_per_axis, int w_per_axis, int directions,
                                        int quadrature_resolution) {
  SamplePlan plan;
  plan.quadrature_resolution = quadrature_resolution;
  const int dim = conn.dim;
  const int pz1 = dim == 2 ? points_per_axis : 1;
  for (int j = 0; j < pz1; ++j) {
    for (int i = 0; i < points_per_axis; ++i) {
      Vec2 z{0.0, 0.0};
      const double si = points_per_axis > 1 ? static_cast<double>(i) / (points_per_axis - 1) : 0.5;
      z[0] = lower[0] + si * (upper[0] - lower[0]);
      if (dim == 2) {
        const double sj = points_per_axis > 1 ? static_cast<double>(j) / (points_per_axis - 1) : 0.5;
        z[1] = lower[1] + sj * (upper[1] - lower[1]);
      }
      plan.points.push_back(z);
    }
  }
  const double reach = 2.0 * conn.support_radius;
  const int pw1 = dim == 2 ? w_per_axis : 1;
  for (int j = 0; j < pw1; ++j) {
    for (int i = 0; i < w_per_axis; ++i) {
      Vec2 w{-reach + 2.0 * reach * (i + 0.5) / w_per_axis, 0.0};
      if (dim == 2) w[1] = -reach + 2.0 * reach * (j + 0.5) / w_per_axis;
      plan.displacements.push_back(w);
    }
  }
  if (dim == 1) {
    plan.directions.push_back({1.0, 0.0});
  } else {
    for (int i = 0; i < directions; ++i) {
      const double a = std::numbers::pi * i / directions;
      plan.directions.push_back({std::cos(a), std::sin(a)});
    }
  }
  double span = upper[0] - lower[0];
  if (dim == 2) span = std::max(span, upper[1] - lower[1]);
  for (double d = span / 64.0; d <= span * (1.0 + 1e-12); d *= 2.0) plan.deltas.push_back(d);
  return plan;
}

namespace {

// Midpoint quadrature of int |w.xi|^2 theta(z, w) dw over [-R, R]^d.
double directional_moment(const Connectivity& conn, const Vec2& z, const Vec2& xi, int resolution) {
  const double r = conn.support_radius;
  const double dw = 2.0 * r / resolution;
  const int n1 = conn.dim == 2 ? resolution : 1;
  const double cell = conn.dim == 2 ? dw * dw : dw;
  double sum = 0.0;
  for (int j = 0; j < n1; ++j) {
    double row = 0.0;
    for (int i = 0; i < resolution; ++i) {
      Vec2 w{-r + (i + 0.5) * dw, conn.dim == 2 ? -r + (j + 0.5) * dw : 0.0};
      const double p = dot(w, xi);
      row += p * p * conn(z, w);
    }
    sum += row;
  }
  return sum * cell;
}

}  // namespace

ValidationReport validate_connectivity(const Connectivity& conn, const SamplePlan& plan) {
  ValidationReport report;
  report.subject = "connectivity " + conn.name;

  double max_value = 0.0;
  double asym = 0.0;
  double max_support = 0.0;
  double max_moment = 0.0;
  for (const Vec2& z : plan.points) {
    for (const Vec2& w : plan.displacements) {
      if (norm_sq(w) == 0.0) continue;
      const double v = conn(z, w);
      max_value = std::max(max_value, std::abs(v));
      asym = std::max(asym, std::abs(v - conn(z, -w)));
      if (v != 0.0) max_support = std::max(max_support, norm(w));
      max_moment = std::max(max_moment, norm_sq(w) * v);
    }
  }

  CheckResult sym{"theta1", "theta(z, w) = theta(z, -w)"};
  sym.worst = asym;
  sym.bound = 1e-12 * (1.0 + max_value);
  sym.margin = sym.bound - asym;
  sym.passed = asym <= sym.bound;
  report.add(sym);

  // Modulus of continuity in z, uniformly over the sampled w.
  for (double delta : plan.deltas) {
    double worst = 0.0;
    for (std::size_t a = 0; a < plan.points.size(); ++a) {
      for (std::size_t b = a + 1; b < plan.points.size(); ++b) {
        if (norm(plan.points[a] - plan.points[b]) > delta * (1.0 + 1e-12)) continue;
        for (const Vec2& w : plan.displacements) {
          if (norm_sq(w) == 0.0) continue;
          worst = std::max(worst, std::abs(conn(plan.points[a], w) - conn(plan.points[b], w)));
        }
      }
    }
    report.modulus.delta.push_back(delta);
    report.modulus.modulus.push_back(worst);
  }
  CheckResult cont{"theta2", "z-continuity (empirical modulus table)"};
  cont.worst = report.modulus.modulus.empty() ? 0.0 : report.modulus.modulus.front();
  cont.detail = "reported only";
  report.add(cont);

  CheckResult supp{"theta3", "supp theta(z, .) within B(C_supp)"};
  supp.hard = true;
  supp.worst = max_support;
  supp.bound = conn.support_radius;
  supp.margin = conn.support_radius - max_support;
  supp.passed = max_support <= conn.support_radius * (1.0 + 1e-12);
  report.add(supp);

  CheckResult mom{"theta4", "|w|^2 theta(z, w) <= C_mom"};
  mom.worst = max_moment;
  mom.bound = conn.moment_bound;
  mom.margin = conn.moment_bound - max_moment;
  mom.passed = max_moment <= conn.moment_bound * (1.0 + 1e-12);
  report.add(mom);

  // Directional second moment, Richardson-extrapolated from two resolutions;
  // the difference of the two serves as the quadrature error estimate.
  CheckResult nd{"theta5", "int |w.xi|^2 theta dw >= c_nd"};
  nd.bound = conn.nondegeneracy;
  double worst = std::numeric_limits<double>::infinity();
  double worst_tol = 0.0;
  for (const Vec2& z : plan.points) {
    for (const Vec2& xi : plan.directions) {
      const double coarse = directional_moment(conn, z, xi, plan.quadrature_resolution);
      const double fine = directional_moment(conn, z, xi, 2 * plan.quadrature_resolution);
      const double estimate = fine + (fine - coarse) / 3.0;
      const double tol = std::abs(fine - coarse) + 1e-12 * std::abs(fine);
      if (estimate - conn.nondegeneracy < worst - nd.bound) {
        worst = estimate;
        worst_tol = tol;
      }
    }
  }
  nd.worst = worst;
  nd.margin = worst - conn.nondegeneracy;
  nd.passed = nd.margin >= -worst_tol && conn.nondegeneracy > 0.0;
  nd.detail = "quadrature tolerance " + fmt(worst_tol);
  report.add(nd);
  return report;
}

double scaled_edge_weight(const Connectivity& conn, double epsilon, const Vec2& x, const Vec2& y) {
  if (x == y) throw ConfigError("edge weight is undefined on the diagonal x == y");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  const Vec2 w = (1.0 / epsilon) * (x - y);
  const Vec2 mid = 0.5 * (x + y);
  return std::pow(epsilon, -(conn.dim + 2)) * conn(mid, w);
}

Graph::Graph(BaseMeasure base, double epsilon, double support_radius, std::vector<Edge> edges)
    : base_(std::move(base)), epsilon_(epsilon), support_radius_(support_radius), edges_(std::move(edges)) {
  const std::size_t n = base_.size();
  offsets_.assign(n + 1, 0);
  for (const Edge& e : edges_) {
    ++offsets_[e.k + 1];
    ++offsets_[e.l + 1];
  }
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
  incident_.resize(offsets_[n]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    incident_[fill[edges_[e].k]++] = static_cast<std::uint32_t>(e);
    incident_[fill[edges_[e].l]++] = static_cast<std::uint32_t>(e);
  }
}

double Graph::weight(std::size_t k, std::size_t l) const {
  for (std::uint32_t e : incident(k)) {
    const Edge& edge = edges_[e];
    if ((edge.k == k && edge.l == l) || (edge.l == k && edge.k == l)) return edge.weight;
  }
  return 0.0;
}

Vec2 Graph::edge_displacement(std::size_t e) const {
  const Edge& edge = edges_[e];
  return grid().displacement(grid().center(edge.k), grid().center(edge.l));
}

Graph build_graph(const BaseMeasure& bm, const Connectivity& conn, double epsilon) {
  const SpatialGrid& g = bm.grid;
  if (conn.dim != g.dim()) throw ConfigError("connectivity dimension does not match the grid");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  const double radius = epsilon * conn.support_radius;
  if (g.periodic()) {
    for (int a = 0; a < g.dim(); ++a) {
      if (radius >= 0.5 * g.length(a)) {
        throw ConfigError("epsilon * C_supp = " + fmt(radius) + " reaches half of the periodic axis " +
                          std::to_string(a) + " (length " + fmt(g.length(a)) + ")");
      }
    }
  }

  // Offset window per axis; on a periodic axis each residue class appears once.
  std::array<long, 2> lo{0, 0};
  std::array<long, 2> hi{0, 0};
  for (int a = 0; a < g.dim(); ++a) {
    const long n = static_cast<long>(g.cells(a));
    const long w = static_cast<long>(std::ceil(radius / g.spacing(a) - 1e-9));
    lo[a] = -w;
    hi[a] = w;
    if (g.periodic() && 2 * w + 1 > n) {
      lo[a] = -((n - 1) / 2);
      hi[a] = n / 2;
    }
  }

  const double scale = std::pow(epsilon, -(g.dim() + 2));
  const double inv_eps = 1.0 / epsilon;
  const double radius_sq = radius * radius * (1.0 + 1e-12);
  std::vector<std::vector<Edge>> per_node(g.size());
  parallel_for(g.size(), [&](std::size_t k) {
    const auto idx = g.multi_index(k);
    const Vec2 xk = g.center(k);
    auto& out = per_node[k];
    for (long o1 = lo[1]; o1 <= hi[1]; ++o1) {
      for (long o0 = lo[0]; o0 <= hi[0]; ++o0) {
        std::array<long, 2> t{static_cast<long>(idx[0]) + o0, static_cast<long>(idx[1]) + o1};
        bool inside = true;
        for (int a = 0; a < g.dim(); ++a) {
          const long n = static_cast<long>(g.cells(a));
          if (g.periodic()) {
            t[a] = ((t[a] % n) + n) % n;
          } else if (t[a] < 0 || t[a] >= n) {
            inside = false;
          }
        }
        if (!inside) continue;
        const std::size_t l = g.flat_index(static_cast<std::size_t>(t[0]), static_cast<std::size_t>(t[1]));
        if (l <= k) continue;
        const Vec2 xl = g.center(l);
        const Vec2 d = g.displacement(xk, xl);
        if (norm_sq(d) > radius_sq) continue;
        const double w = scale * conn(g.wrap(xl + 0.5 * d), inv_eps * d);
        if (w > 0.0) out.push_back(Edge{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(l), w});
      }
    }
    std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) { return a.l < b.l; });
  });

  std::size_t total = 0;
  for (const auto& v : per_node) total += v.size();
  std::vector<Edge> edges;
  edges.reserve(total);
  for (auto& v : per_node) edges.insert(edges.end(), v.begin(), v.end());
  return Graph(bm, epsilon, conn.support_radius, std::move(edges));
}

}  // namespace graphflow
