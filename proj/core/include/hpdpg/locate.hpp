#pragma once

#include <array>
#include <vector>

#include "hpdpg/mesh.hpp"

namespace hpdpg {

/// Bucket grid over triangle bounding boxes for point-in-triangle queries.
class PointLocator {
 public:
  explicit PointLocator(const Triangulation& mesh);

  /// Triangle containing x (closed, with a small tolerance) or -1. When found and
  /// bary is given, it receives the barycentric coordinates in that triangle.
  int locate(const Vec2& x, std::array<double, 3>* bary = nullptr) const;
  /// Triangle containing x, falling back to the nearest barycenter.
  int locate_or_nearest(const Vec2& x) const;

 private:
  const Triangulation* mesh_;
  double x0_ = 0, y0_ = 0, hx_ = 1, hy_ = 1;
  int nx_ = 1, ny_ = 1;
  std::vector<int> offsets_;
  std::vector<int> items_;

  int cell(int i, int j) const { return j * nx_ + i; }
};

std::array<double, 3> barycentric(const std::array<Vec2, 3>& tri, const Vec2& x);

} // namespace hpdpg
