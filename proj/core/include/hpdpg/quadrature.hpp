#pragma once

#include <array>
#include <vector>

#include "hpdpg/types.hpp"

namespace hpdpg {

/// Gauss-Legendre rule on [0, 1].
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;
};

/// Rule on the reference triangle (0,0),(1,0),(0,1); weights sum to 1/2.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return points.size(); }
  /// Barycentric coordinates (1-x-y, x, y) of point i.
  std::array<double, 3> barycentric(std::size_t i) const {
    return {1.0 - points[i].x - points[i].y, points[i].x, points[i].y};
  }
};

inline constexpr int kMaxQuadratureDegree = 40;

/// n-point Gauss-Legendre rule on [0,1], exact to degree 2n-1. Cached.
const LineRule& gauss_line(int npoints);
/// Line rule exact for the given polynomial degree.
const LineRule& line_rule(int degree);

/// Collapsed (Duffy) tensor Gauss rule, exact for total degree <= degree.
/// Supported degrees are 1..40; throws Error otherwise. Cached.
const QuadratureRule& quadrature_rule(int degree);

} // namespace hpdpg
