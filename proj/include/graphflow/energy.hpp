#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "graphflow/graph_model.hpp"
#include "graphflow/linalg.hpp"
#include "graphflow/validation.hpp"

namespace graphflow {

using NodeField = std::vector<double>;

// Interaction kernel K(x, y) with its x-gradient.
struct Kernel {
  std::function<double(const Vec2&, const Vec2&)> value;
  std::function<Vec2(const Vec2&, const Vec2&)> gradient_x;
  std::string name;
  bool is_zero = false;
  double growth_constant = 0.0;  // declared C_K for this entry, 0 if unknown

  static Kernel zero();
  // a |x - y|^2
  static Kernel quadratic(double a);
  // -a exp(-|x - y|^2 / (2 sigma^2))
  static Kernel gaussian(double a, double sigma);
};

struct Potential {
  std::function<double(const Vec2&)> value;
  std::function<Vec2(const Vec2&)> gradient;
  std::string name;
  bool is_zero = false;

  static Potential zero();
  // a |x|^2
  static Potential quadratic(double a);
  // <c, x>
  static Potential linear(const Vec2& c);
};

// N x N matrix of kernels. Entries are shared pointers so that a symmetric
// pair (i, k), (k, i) can refer to one object.
class KernelSet {
 public:
  explicit KernelSet(std::size_t species);

  std::size_t species() const { return n_; }
  const Kernel& at(std::size_t i, std::size_t k) const { return *entries_[i * n_ + k]; }
  std::shared_ptr<const Kernel> ptr(std::size_t i, std::size_t k) const { return entries_[i * n_ + k]; }
  void set(std::size_t i, std::size_t k, Kernel kernel);
  // Sets both (i, k) and (k, i) to the same object.
  void set_symmetric(std::size_t i, std::size_t k, Kernel kernel);
  bool all_zero() const;

  double growth_constant = 0.0;  // C_K; 0 means undeclared
  double lipschitz = 0.0;        // L_K; 0 means undeclared

 private:
  std::size_t n_;
  std::vector<std::shared_ptr<const Kernel>> entries_;
};

using PotentialSet = std::vector<Potential>;
PotentialSet zero_potentials(std::size_t species);

// Densities r^(i) with respect to the base measure, one field per species.
struct SpeciesState {
  std::vector<NodeField> r;

  std::size_t species() const { return r.size(); }
  std::size_t nodes() const { return r.empty() ? 0 : r.front().size(); }
};

std::vector<double> species_masses(const SpeciesState& state, const BaseMeasure& bm);
// r^(i) m, the node masses of each species.
std::vector<NodeField> node_masses(const SpeciesState& state, const BaseMeasure& bm);

// Kernel convolutions over a fixed node set. Kernel matrices K(x_a, x_b)
// (and their x-gradients) are tabulated once per distinct kernel object when
// they fit in `cache_bytes`; otherwise kernels are evaluated on the fly.
class InteractionOperator {
 public:
  static constexpr std::size_t kDefaultCacheBytes = std::size_t{512} << 20;

  InteractionOperator(const KernelSet& kernels, const PotentialSet& potentials, std::vector<Vec2> nodes,
                      std::size_t cache_bytes = kDefaultCacheBytes);

  std::size_t species() const { return kernels_.species(); }
  std::size_t nodes() const { return nodes_.size(); }
  const KernelSet& kernels() const { return kernels_; }
  const PotentialSet& potentials() const { return potentials_; }
  const NodeField& potential(std::size_t i) const { return potential_values_[i]; }
  const std::vector<Vec2>& potential_gradient(std::size_t i) const { return potential_gradients_[i]; }
  bool value_cache_active() const { return !value_cache_.empty() || !any_kernel_; }

  // (sum_j K^(ij) * w^j)(x_k) for every species i; w^j are node masses.
  std::vector<NodeField> convolve(const std::vector<NodeField>& masses) const;
  // (sum_j grad_x K^(ij) * w^j)(x_k).
  std::vector<std::vector<Vec2>> convolve_gradient(const std::vector<NodeField>& masses) const;

  // P^(i) + sum_j K^(ij) * w^j.
  std::vector<NodeField> variational_derivative(const std::vector<NodeField>& masses) const;
  // Energy from node masses and precomputed convolutions.
  double energy(const std::vector<NodeField>& masses, const std::vector<NodeField>& conv) const;
  double energy(const std::vector<NodeField>& masses) const { return energy(masses, convolve(masses)); }

 private:
  const std::vector<double>* value_table(const Kernel* k) const;
  const std::vector<double>* gradient_table(const Kernel* k) const;

  KernelSet kernels_;
  PotentialSet potentials_;
  std::vector<Vec2> nodes_;
  std::size_t cache_bytes_;
  bool any_kernel_ = false;
  std::vector<NodeField> potential_values_;
  std::vector<std::vector<Vec2>> potential_gradients_;
  std::unordered_map<const Kernel*, std::vector<double>> value_cache_;
  mutable std::unordered_map<const Kernel*, std::vector<double>> gradient_cache_;
  mutable bool gradient_cache_tried_ = false;
};

double energy(const KernelSet& ks, const PotentialSet& ps, const SpeciesState& state, const BaseMeasure& bm);
NodeField variational_derivative(const KernelSet& ks, const PotentialSet& ps, const SpeciesState& state,
                                 const BaseMeasure& bm, std::size_t species);

// Sample pairs for the kernel validators: `points_per_axis` lattice points on
// [lower, upper]; the growth check additionally probes the lattice scaled by
// 10 and 100 about the box centre.
SamplePlan kernel_sample_plan(int dim, const Vec2& lower, const Vec2& upper, int points_per_axis = 7);

ValidationReport validate_kernels(const KernelSet& ks, const SamplePlan& plan);

}  // namespace graphflow
