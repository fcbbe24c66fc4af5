#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "graphflow/linalg.hpp"

namespace graphflow {

// Regular cell-centred grid on a box in R^d, d in {1, 2}. Node k is the
// centre of cell k; nodes are numbered with axis 0 fastest.
class SpatialGrid {
 public:
  SpatialGrid(int dim, Vec2 lower, Vec2 upper, std::array<std::size_t, 2> cells, bool periodic);

  static SpatialGrid line(double lower, double upper, std::size_t cells, bool periodic = true) {
    return SpatialGrid(1, {lower, 0.0}, {upper, 0.0}, {cells, 1}, periodic);
  }

  int dim() const { return dim_; }
  bool periodic() const { return periodic_; }
  const Vec2& lower() const { return lower_; }
  const Vec2& upper() const { return upper_; }
  std::size_t cells(int axis) const { return cells_[axis]; }
  double length(int axis) const { return upper_[axis] - lower_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  double cell_volume() const { return cell_volume_; }
  std::size_t size() const { return size_; }

  std::array<std::size_t, 2> multi_index(std::size_t k) const {
    return {k % cells_[0], k / cells_[0]};
  }
  std::size_t flat_index(std::size_t i0, std::size_t i1) const { return i0 + cells_[0] * i1; }

  Vec2 center(std::size_t k) const;
  const std::vector<Vec2>& centers() const { return centers_; }

  // Neighbour of cell k one step along +axis; wraps when periodic, returns
  // size() when the face is on the boundary of a bounded box.
  std::size_t upper_neighbor(std::size_t k, int axis) const;
  std::size_t lower_neighbor(std::size_t k, int axis) const;

  // x - y, minimum-image on a periodic grid.
  Vec2 displacement(const Vec2& x, const Vec2& y) const;
  double distance(const Vec2& x, const Vec2& y) const { return norm(displacement(x, y)); }
  // Midpoint of the shortest segment from y to x, mapped into the box.
  Vec2 midpoint(const Vec2& x, const Vec2& y) const;
  Vec2 wrap(Vec2 x) const;

  // Distance from x to the box boundary; +inf on a periodic grid.
  double boundary_distance(const Vec2& x) const;

  // Volume of the box.
  double volume() const;

  bool same_layout(const SpatialGrid& other) const;

 private:
  int dim_;
  Vec2 lower_;
  Vec2 upper_;
  std::array<std::size_t, 2> cells_;
  bool periodic_;
  Vec2 spacing_{1.0, 1.0};
  double cell_volume_ = 1.0;
  std::size_t size_ = 0;
  std::vector<Vec2> centers_;
};

}  // namespace graphflow
