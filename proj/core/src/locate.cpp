#include "hpdpg/locate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hpdpg {

std::array<double, 3> barycentric(const std::array<Vec2, 3>& t, const Vec2& x) {
  const double det = cross(t[1] - t[0], t[2] - t[0]);
  const double l1 = cross(x - t[0], t[2] - t[0]) / det;
  const double l2 = cross(t[1] - t[0], x - t[0]) / det;
  return {1.0 - l1 - l2, l1, l2};
}

PointLocator::PointLocator(const Triangulation& mesh) : mesh_(&mesh) {
  const int nt = mesh.num_triangles();
  double x1 = -std::numeric_limits<double>::infinity(), y1 = x1;
  x0_ = y0_ = std::numeric_limits<double>::infinity();
  for (const auto& v : mesh.vertices()) {
    x0_ = std::min(x0_, v.x);
    y0_ = std::min(y0_, v.y);
    x1 = std::max(x1, v.x);
    y1 = std::max(y1, v.y);
  }
  const int n = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(std::max(nt, 1)))));
  nx_ = ny_ = n;
  hx_ = std::max(x1 - x0_, 1e-300) / nx_;
  hy_ = std::max(y1 - y0_, 1e-300) / ny_;
  std::vector<std::vector<int>> bins(static_cast<std::size_t>(nx_ * ny_));
  for (int k = 0; k < nt; ++k) {
    const auto c = mesh.corners(k);
    const double bx0 = std::min({c[0].x, c[1].x, c[2].x}), bx1 = std::max({c[0].x, c[1].x, c[2].x});
    const double by0 = std::min({c[0].y, c[1].y, c[2].y}), by1 = std::max({c[0].y, c[1].y, c[2].y});
    const int i0 = std::clamp(static_cast<int>((bx0 - x0_) / hx_), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((bx1 - x0_) / hx_), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((by0 - y0_) / hy_), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((by1 - y0_) / hy_), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) bins[static_cast<std::size_t>(cell(i, j))].push_back(k);
  }
  offsets_.assign(bins.size() + 1, 0);
  for (std::size_t b = 0; b < bins.size(); ++b) offsets_[b + 1] = offsets_[b] + static_cast<int>(bins[b].size());
  items_.reserve(static_cast<std::size_t>(offsets_.back()));
  for (const auto& b : bins) items_.insert(items_.end(), b.begin(), b.end());
}

int PointLocator::locate(const Vec2& x, std::array<double, 3>* bary) const {
  const int i = static_cast<int>(std::floor((x.x - x0_) / hx_));
  const int j = static_cast<int>(std::floor((x.y - y0_) / hy_));
  if (i < -1 || j < -1 || i > nx_ || j > ny_) return -1;
  const int ci = std::clamp(i, 0, nx_ - 1), cj = std::clamp(j, 0, ny_ - 1);
  int best = -1;
  double best_min = -std::numeric_limits<double>::infinity();
  std::array<double, 3> best_b{};
  const int c = cell(ci, cj);
  for (int q = offsets_[static_cast<std::size_t>(c)]; q < offsets_[static_cast<std::size_t>(c + 1)]; ++q) {
    const int k = items_[static_cast<std::size_t>(q)];
    const auto b = barycentric(mesh_->corners(k), x);
    const double m = std::min({b[0], b[1], b[2]});
    if (m > best_min) {
      best_min = m;
      best = k;
      best_b = b;
    }
  }
  if (best < 0 || best_min < -1e-10) return -1;
  if (bary) *bary = best_b;
  return best;
}

int PointLocator::locate_or_nearest(const Vec2& x) const {
  const int k = locate(x);
  if (k >= 0) return k;
  int best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (int t = 0; t < mesh_->num_triangles(); ++t) {
    const Vec2 d = mesh_->barycenter(t) - x;
    const double dd = dot(d, d);
    if (dd < bd) {
      bd = dd;
      best = t;
    }
  }
  return best;
}

} // namespace hpdpg
