#include "graphflow/energy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "graphflow/error.hpp"
#include "graphflow/parallel.hpp"

namespace graphflow {

Kernel Kernel::zero() {
  Kernel k;
  k.value = [](const Vec2&, const Vec2&) { return 0.0; };
  k.gradient_x = [](const Vec2&, const Vec2&) { return Vec2{0.0, 0.0}; };
  k.name = "zero";
  k.is_zero = true;
  return k;
}

Kernel Kernel::quadratic(double a) {
  Kernel k;
  k.value = [a](const Vec2& x, const Vec2& y) { return a * norm_sq(x - y); };
  k.gradient_x = [a](const Vec2& x, const Vec2& y) { return (2.0 * a) * (x - y); };
  k.name = "quadratic(" + std::to_string(a) + ")";
  k.is_zero = a == 0.0;
  k.growth_constant = 2.0 * std::abs(a);
  return k;
}

Kernel Kernel::gaussian(double a, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("gaussian kernel needs sigma > 0");
  Kernel k;
  const double s2 = sigma * sigma;
  k.value = [a, s2](const Vec2& x, const Vec2& y) { return -a * std::exp(-norm_sq(x - y) / (2.0 * s2)); };
  k.gradient_x = [a, s2](const Vec2& x, const Vec2& y) {
    const Vec2 u = x - y;
    return (a / s2 * std::exp(-norm_sq(u) / (2.0 * s2))) * u;
  };
  k.name = "gaussian(" + std::to_string(a) + "," + std::to_string(sigma) + ")";
  k.is_zero = a == 0.0;
  // max_u |u| exp(-u^2 / 2 s^2) = s exp(-1/2)
  k.growth_constant = std::abs(a) / sigma * std::exp(-0.5);
  return k;
}

Potential Potential::zero() {
  Potential p;
  p.value = [](const Vec2&) { return 0.0; };
  p.gradient = [](const Vec2&) { return Vec2{0.0, 0.0}; };
  p.name = "zero";
  p.is_zero = true;
  return p;
}

Potential Potential::quadratic(double a) {
  Potential p;
  p.value = [a](const Vec2& x) { return a * norm_sq(x); };
  p.gradient = [a](const Vec2& x) { return (2.0 * a) * x; };
  p.name = "quadratic(" + std::to_string(a) + ")";
  p.is_zero = a == 0.0;
  return p;
}

Potential Potential::linear(const Vec2& c) {
  Potential p;
  p.value = [c](const Vec2& x) { return dot(c, x); };
  p.gradient = [c](const Vec2&) { return c; };
  p.name = "linear";
  p.is_zero = c[0] == 0.0 && c[1] == 0.0;
  return p;
}

KernelSet::KernelSet(std::size_t species) : n_(species) {
  if (species == 0) throw ConfigError("at least one species is required");
  auto zero = std::make_shared<const Kernel>(Kernel::zero());
  entries_.assign(n_ * n_, zero);
}

void KernelSet::set(std::size_t i, std::size_t k, Kernel kernel) {
  if (i >= n_ || k >= n_) throw ConfigError("kernel index out of range");
  entries_[i * n_ + k] = std::make_shared<const Kernel>(std::move(kernel));
}

void KernelSet::set_symmetric(std::size_t i, std::size_t k, Kernel kernel) {
  if (i >= n_ || k >= n_) throw ConfigError("kernel index out of range");
  auto p = std::make_shared<const Kernel>(std::move(kernel));
  entries_[i * n_ + k] = p;
  entries_[k * n_ + i] = p;
}

bool KernelSet::all_zero() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const auto& p) { return p->is_zero; });
}

PotentialSet zero_potentials(std::size_t species) { return PotentialSet(species, Potential::zero()); }

std::vector<double> species_masses(const SpeciesState& state, const BaseMeasure& bm) {
  std::vector<double> out;
  for (const auto& r : state.r) {
    if (r.size() != bm.size()) throw ConfigError("species state does not match the node count");
    double s = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) s += r[k] * bm.weights[k];
    out.push_back(s);
  }
  return out;
}

std::vector<NodeField> node_masses(const SpeciesState& state, const BaseMeasure& bm) {
  std::vector<NodeField> out;
  for (const auto& r : state.r) {
    if (r.size() != bm.size()) throw ConfigError("species state does not match the node count");
    NodeField w(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) w[k] = r[k] * bm.weights[k];
    out.push_back(std::move(w));
  }
  return out;
}

InteractionOperator::InteractionOperator(const KernelSet& kernels, const PotentialSet& potentials,
                                         std::vector<Vec2> nodes, std::size_t cache_bytes)
    : kernels_(kernels), potentials_(potentials), nodes_(std::move(nodes)), cache_bytes_(cache_bytes) {
  const std::size_t n = kernels_.species();
  if (potentials_.size() != n) throw ConfigError("potential count does not match the species count");
  const std::size_t m = nodes_.size();
  potential_values_.assign(n, NodeField(m, 0.0));
  potential_gradients_.assign(n, std::vector<Vec2>(m, Vec2{0.0, 0.0}));
  for (std::size_t i = 0; i < n; ++i) {
    if (potentials_[i].is_zero) continue;
    for (std::size_t k = 0; k < m; ++k) {
      potential_values_[i][k] = potentials_[i].value(nodes_[k]);
      potential_gradients_[i][k] = potentials_[i].gradient(nodes_[k]);
    }
  }

  std::vector<const Kernel*> distinct;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Kernel* k = &kernels_.at(i, j);
      if (k->is_zero) continue;
      any_kernel_ = true;
      if (std::find(distinct.begin(), distinct.end(), k) == distinct.end()) distinct.push_back(k);
    }
  }
  const std::size_t table = m * m * sizeof(double);
  if (!distinct.empty() && table * distinct.size() <= cache_bytes_) {
    for (const Kernel* k : distinct) {
      std::vector<double> t(m * m);
      parallel_for(m, [&](std::size_t a) {
        for (std::size_t b = 0; b < m; ++b) t[a * m + b] = k->value(nodes_[a], nodes_[b]);
      });
      value_cache_.emplace(k, std::move(t));
    }
  }
}

const std::vector<double>* InteractionOperator::value_table(const Kernel* k) const {
  auto it = value_cache_.find(k);
  return it == value_cache_.end() ? nullptr : &it->second;
}

const std::vector<double>* InteractionOperator::gradient_table(const Kernel* k) const {
  if (!gradient_cache_tried_) {
    gradient_cache_tried_ = true;
    const std::size_t n = kernels_.species();
    const std::size_t m = nodes_.size();
    std::vector<const Kernel*> distinct;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const Kernel* p = &kernels_.at(i, j);
        if (!p->is_zero && std::find(distinct.begin(), distinct.end(), p) == distinct.end()) distinct.push_back(p);
      }
    const std::size_t used = value_cache_.size() * m * m * sizeof(double);
    if (!distinct.empty() && used + distinct.size() * 2 * m * m * sizeof(double) <= cache_bytes_) {
      for (const Kernel* p : distinct) {
        std::vector<double> t(2 * m * m);
        parallel_for(m, [&](std::size_t a) {
          for (std::size_t b = 0; b < m; ++b) {
            const Vec2 g = p->gradient_x(nodes_[a], nodes_[b]);
            t[2 * (a * m + b)] = g[0];
            t[2 * (a * m + b) + 1] = g[1];
          }
        });
        gradient_cache_.emplace(p, std::move(t));
      }
    }
  }
  auto it = gradient_cache_.find(k);
  return it == gradient_cache_.end() ? nullptr : &it->second;
}

std::vector<NodeField> InteractionOperator::convolve(const std::vector<NodeField>& masses) const {
  const std::size_t n = species();
  const std::size_t m = nodes();
  if (masses.size() != n) throw ConfigError("state species count does not match the kernel set");
  for (const auto& w : masses)
    if (w.size() != m) throw ConfigError("state node count does not match the interaction operator");
  std::vector<NodeField> out(n, NodeField(m, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Kernel& kern = kernels_.at(i, j);
      if (kern.is_zero) continue;
      const std::vector<double>* t = value_table(&kern);
      const NodeField& w = masses[j];
      NodeField& o = out[i];
      parallel_for(m, [&](std::size_t a) {
        double s = 0.0;
        if (t) {
          const double* row = t->data() + a * m;
          for (std::size_t b = 0; b < m; ++b) s += row[b] * w[b];
        } else {
          for (std::size_t b = 0; b < m; ++b)
            if (w[b] != 0.0) s += kern.value(nodes_[a], nodes_[b]) * w[b];
        }
        o[a] += s;
      });
    }
  }
  return out;
}

std::vector<std::vector<Vec2>> InteractionOperator::convolve_gradient(const std::vector<NodeField>& masses) const {
  const std::size_t n = species();
  const std::size_t m = nodes();
  if (masses.size() != n) throw ConfigError("state species count does not match the kernel set");
  std::vector<std::vector<Vec2>> out(n, std::vector<Vec2>(m, Vec2{0.0, 0.0}));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Kernel& kern = kernels_.at(i, j);
      if (kern.is_zero) continue;
      const std::vector<double>* t = gradient_table(&kern);
      const NodeField& w = masses[j];
      auto& o = out[i];
      parallel_for(m, [&](std::size_t a) {
        double s0 = 0.0;
        double s1 = 0.0;
        if (t) {
          const double* row = t->data() + 2 * a * m;
          for (std::size_t b = 0; b < m; ++b) {
            s0 += row[2 * b] * w[b];
            s1 += row[2 * b + 1] * w[b];
          }
        } else {
          for (std::size_t b = 0; b < m; ++b) {
            if (w[b] == 0.0) continue;
            const Vec2 g = kern.gradient_x(nodes_[a], nodes_[b]);
            s0 += g[0] * w[b];
            s1 += g[1] * w[b];
          }
        }
        o[a][0] += s0;
        o[a][1] += s1;
      });
    }
  }
  return out;
}

std::vector<NodeField> InteractionOperator::variational_derivative(const std::vector<NodeField>& masses) const {
  std::vector<NodeField> phi = convolve(masses);
  for (std::size_t i = 0; i < phi.size(); ++i)
    for (std::size_t k = 0; k < phi[i].size(); ++k) phi[i][k] += potential_values_[i][k];
  return phi;
}

double InteractionOperator::energy(const std::vector<NodeField>& masses, const std::vector<NodeField>& conv) const {
  double e = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < masses[i].size(); ++k)
      s += masses[i][k] * (potential_values_[i][k] + 0.5 * conv[i][k]);
    e += s;
  }
  return e;
}

double energy(const KernelSet& ks, const PotentialSet& ps, const SpeciesState& state, const BaseMeasure& bm) {
  InteractionOperator op(ks, ps, bm.grid.centers(), 0);
  return op.energy(node_masses(state, bm));
}

NodeField variational_derivative(const KernelSet& ks, const PotentialSet& ps, const SpeciesState& state,
                                 const BaseMeasure& bm, std::size_t species) {
  if (species >= ks.species()) throw ConfigError("species index " + std::to_string(species) + " out of range");
  InteractionOperator op(ks, ps, bm.grid.centers(), 0);
  return op.variational_derivative(node_masses(state, bm))[species];
}

SamplePlan kernel_sample_plan(int dim, const Vec2& lower, const Vec2& upper, int points_per_axis) {
  SamplePlan plan;
  const int p1 = dim == 2 ? points_per_axis : 1;
  for (int j = 0; j < p1; ++j)
    for (int i = 0; i < points_per_axis; ++i) {
      Vec2 x{lower[0] + (upper[0] - lower[0]) * i / std::max(1, points_per_axis - 1), 0.0};
      if (dim == 2) x[1] = lower[1] + (upper[1] - lower[1]) * j / std::max(1, points_per_axis - 1);
      plan.points.push_back(x);
    }
  plan.directions.push_back({1.0, 0.0});
  if (dim == 2) plan.directions.push_back({0.0, 1.0});
  return plan;
}

namespace {

std::string entry_label(std::size_t i, std::size_t k) {
  return "K" + std::to_string(i + 1) + std::to_string(k + 1);
}

}  // namespace

ValidationReport validate_kernels(const KernelSet& ks, const SamplePlan& plan) {
  ValidationReport report;
  report.subject = "interaction kernels";
  const std::size_t n = ks.species();
  const auto& pts = plan.points;
  if (pts.empty()) throw ConfigError("kernel validation needs sample points");
  Vec2 centre{0.0, 0.0};
  for (const Vec2& p : pts) centre += (1.0 / pts.size()) * p;

  // K2: exchange symmetry of every entry.
  {
    CheckResult c{"K2", "K(x, y) = K(y, x)"};
    double worst = 0.0;
    std::string where;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const Kernel& K = ks.at(i, k);
        for (const Vec2& x : pts)
          for (const Vec2& y : pts) {
            const double a = K.value(x, y);
            const double b = K.value(y, x);
            const double d = std::abs(a - b) / (1.0 + std::abs(a) + std::abs(b));
            if (d > worst) {
              worst = d;
              where = entry_label(i, k);
            }
          }
      }
    c.worst = worst;
    c.bound = 1e-12;
    c.margin = c.bound - worst;
    c.passed = worst <= c.bound;
    if (!c.passed) c.detail = "worst entry " + where;
    report.add(c);
  }

  // Symmetry of the cross-interactions K^(ik) = K^(ki).
  {
    CheckResult c{"cross", "K^(ik) = K^(ki) (symmetry of the cross-interactions)"};
    c.hard = true;
    double worst = 0.0;
    std::string where;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = i + 1; k < n; ++k) {
        const Kernel& A = ks.at(i, k);
        const Kernel& B = ks.at(k, i);
        if (&A == &B) continue;
        for (const Vec2& x : pts)
          for (const Vec2& y : pts) {
            const double a = A.value(x, y);
            const double b = B.value(x, y);
            const double d = std::abs(a - b) / (1.0 + std::abs(a) + std::abs(b));
            if (d > worst) {
              worst = d;
              where = entry_label(i, k) + " vs " + entry_label(k, i);
            }
          }
      }
    c.worst = worst;
    c.bound = 1e-12;
    c.margin = c.bound - worst;
    c.passed = worst <= c.bound;
    if (!c.passed) c.detail = where;
    report.add(c);
  }

  // K3: empirical constant of |dK| <= L (r v r^2) on random pairs of samples.
  {
    CheckResult c{"K3", "|K(x,y) - K(x',y')| <= L_K (r v r^2)"};
    std::mt19937_64 rng(0x4b33);
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const Kernel& K = ks.at(i, k);
        if (K.is_zero) continue;
        for (int s = 0; s < 4096; ++s) {
          const Vec2 x = pts[pick(rng)], y = pts[pick(rng)], x2 = pts[pick(rng)], y2 = pts[pick(rng)];
          const double r = std::sqrt(norm_sq(x - x2) + norm_sq(y - y2));
          if (r == 0.0) continue;
          worst = std::max(worst, std::abs(K.value(x, y) - K.value(x2, y2)) / std::max(r, r * r));
        }
      }
    c.worst = worst;
    c.bound = ks.lipschitz;
    if (ks.lipschitz > 0.0) {
      c.margin = ks.lipschitz - worst;
      c.passed = worst <= ks.lipschitz * (1.0 + 1e-9);
    } else {
      c.detail = "no L_K declared; empirical constant on the sample window";
    }
    report.add(c);
  }

  // K4: |grad K| <= C_K (1 + |x| + |y|), probed at growing scales.
  {
    CheckResult c{"K4", "|grad K(x,y)| <= C_K (1 + |x| + |y|)"};
    double worst_excess = -std::numeric_limits<double>::infinity();
    std::string where;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const Kernel& K = ks.at(i, k);
        if (K.is_zero) continue;
        std::array<double, 3> ratio{0.0, 0.0, 0.0};
        const std::array<double, 3> scales{1.0, 10.0, 100.0};
        for (int s = 0; s < 3; ++s)
          for (const Vec2& x0 : pts)
            for (const Vec2& y0 : pts) {
              const Vec2 x = centre + scales[s] * (x0 - centre);
              const Vec2 y = centre + scales[s] * (y0 - centre);
              ratio[s] = std::max(ratio[s], norm(K.gradient_x(x, y)) / (1.0 + norm(x) + norm(y)));
            }
        double bound = ks.growth_constant > 0.0 ? ks.growth_constant : K.growth_constant;
        if (!(bound > 0.0)) bound = 2.0 * ratio[0];
        const double top = *std::max_element(ratio.begin(), ratio.end());
        const double excess = top - bound * (1.0 + 1e-9);
        if (excess > worst_excess) {
          worst_excess = excess;
          c.worst = top;
          c.bound = bound;
          where = entry_label(i, k);
        }
      }
    if (worst_excess == -std::numeric_limits<double>::infinity()) worst_excess = 0.0;
    c.margin = c.bound - c.worst;
    c.passed = worst_excess <= 0.0;
    if (!c.passed) c.detail = "growth beyond linear in " + where;
    report.add(c);
  }

  // Supplied gradient against forward differences.
  {
    CheckResult c{"grad", "supplied grad_x K matches forward differences"};
    const double h = 1e-6;
    double worst = 0.0;
    std::string where;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const Kernel& K = ks.at(i, k);
        if (K.is_zero) continue;
        for (const Vec2& x : pts)
          for (const Vec2& y : pts) {
            const double k0 = K.value(x, y);
            const Vec2 g = K.gradient_x(x, y);
            for (std::size_t a = 0; a < plan.directions.size(); ++a) {
              const Vec2& e = plan.directions[a];
              const double fd = (K.value(x + h * e, y) - k0) / h;
              const double d = std::abs(fd - dot(g, e)) / (1.0 + std::abs(k0) + norm(g));
              if (d > worst) {
                worst = d;
                where = entry_label(i, k);
              }
            }
          }
      }
    c.worst = worst;
    c.bound = 1e-4;
    c.margin = c.bound - worst;
    c.passed = worst <= c.bound;
    if (!c.passed) c.detail = "worst entry " + where;
    report.add(c);
  }
  return report;
}

}  // namespace graphflow
