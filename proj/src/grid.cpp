#include "graphflow/grid.hpp"

#include <cmath>
#include <limits>

#include "graphflow/error.hpp"

namespace graphflow {

SpatialGrid::SpatialGrid(int dim, Vec2 lower, Vec2 upper, std::array<std::size_t, 2> cells, bool periodic)
    : dim_(dim), lower_(lower), upper_(upper), cells_(cells), periodic_(periodic) {
  if (dim != 1 && dim != 2) throw ConfigError("grid dimension must be 1 or 2");
  if (dim == 1) {
    cells_[1] = 1;
    lower_[1] = 0.0;
    upper_[1] = 0.0;
  }
  size_ = 1;
  cell_volume_ = 1.0;
  for (int a = 0; a < dim_; ++a) {
    if (cells_[a] == 0) throw ConfigError("grid needs at least one cell per axis");
    if (!(upper_[a] > lower_[a])) throw ConfigError("grid upper bound must exceed lower bound");
    spacing_[a] = (upper_[a] - lower_[a]) / static_cast<double>(cells_[a]);
    cell_volume_ *= spacing_[a];
    size_ *= cells_[a];
  }
  centers_.resize(size_);
  for (std::size_t k = 0; k < size_; ++k) {
    const auto idx = multi_index(k);
    Vec2 c{0.0, 0.0};
    for (int a = 0; a < dim_; ++a) c[a] = lower_[a] + (static_cast<double>(idx[a]) + 0.5) * spacing_[a];
    centers_[k] = c;
  }
}

Vec2 SpatialGrid::center(std::size_t k) const { return centers_[k]; }

std::size_t SpatialGrid::upper_neighbor(std::size_t k, int axis) const {
  auto idx = multi_index(k);
  if (idx[axis] + 1 < cells_[axis]) {
    ++idx[axis];
  } else {
    if (!periodic_) return size_;
    idx[axis] = 0;
  }
  return flat_index(idx[0], idx[1]);
}

std::size_t SpatialGrid::lower_neighbor(std::size_t k, int axis) const {
  auto idx = multi_index(k);
  if (idx[axis] > 0) {
    --idx[axis];
  } else {
    if (!periodic_) return size_;
    idx[axis] = cells_[axis] - 1;
  }
  return flat_index(idx[0], idx[1]);
}

Vec2 SpatialGrid::displacement(const Vec2& x, const Vec2& y) const {
  Vec2 d = x - y;
  if (periodic_) {
    for (int a = 0; a < dim_; ++a) {
      const double len = length(a);
      d[a] -= len * std::round(d[a] / len);
    }
  }
  return d;
}

Vec2 SpatialGrid::midpoint(const Vec2& x, const Vec2& y) const {
  const Vec2 d = displacement(x, y);
  return wrap(y + 0.5 * d);
}

Vec2 SpatialGrid::wrap(Vec2 x) const {
  if (!periodic_) return x;
  for (int a = 0; a < dim_; ++a) {
    const double len = length(a);
    x[a] = lower_[a] + (x[a] - lower_[a]) - len * std::floor((x[a] - lower_[a]) / len);
  }
  return x;
}

double SpatialGrid::boundary_distance(const Vec2& x) const {
  if (periodic_) return std::numeric_limits<double>::infinity();
  double d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim_; ++a) d = std::min({d, x[a] - lower_[a], upper_[a] - x[a]});
  return d;
}

double SpatialGrid::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= length(a);
  return v;
}

bool SpatialGrid::same_layout(const SpatialGrid& other) const {
  if (dim_ != other.dim_ || periodic_ != other.periodic_) return false;
  for (int a = 0; a < dim_; ++a) {
    if (cells_[a] != other.cells_[a] || lower_[a] != other.lower_[a] || upper_[a] != other.upper_[a]) return false;
  }
  return true;
}

}  // namespace graphflow
