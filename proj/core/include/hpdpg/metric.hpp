#pragma once

#include <array>
#include <span>

#include "hpdpg/types.hpp"

namespace hpdpg {

/// Symmetric 2x2 metric tensor [[m11, m12], [m12, m22]].
struct MetricTensor {
  double m11 = 1.0;
  double m12 = 0.0;
  double m22 = 1.0;

  double det() const { return m11 * m22 - m12 * m12; }
  bool is_spd() const { return m11 > 0.0 && det() > 0.0 && std::isfinite(det()); }
  /// e^T M e
  double quad(const Vec2& e) const { return m11 * e.x * e.x + 2.0 * m12 * e.x * e.y + m22 * e.y * e.y; }
  /// sqrt(e^T M e): length of e measured in the metric.
  double length(const Vec2& e) const { return std::sqrt(quad(e)); }

  MetricTensor operator*(double s) const { return {m11 * s, m12 * s, m22 * s}; }
  MetricTensor operator+(const MetricTensor& o) const { return {m11 + o.m11, m12 + o.m12, m22 + o.m22}; }
  bool operator==(const MetricTensor&) const = default;
};

/// Geometric description of a metric: orientation of the long axis, aspect
/// ratio h1/h2 >= 1 and density 1/(h1*h2).
struct AnisotropyParams {
  double theta = 0.0;
  double beta = 1.0;
  double d = 1.0;
};

/// Eigen-decomposition of a symmetric 2x2 matrix, eigenvalues ascending.
struct SymEigen2 {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  /// Angle of the eigenvector of lambda_min in [0, pi).
  double angle_min = 0.0;
};

SymEigen2 sym_eigen(const MetricTensor& m);

/// Metric under which all three edges of the triangle have squared length c.
/// Throws GeometryError for a degenerate triangle or non-positive c.
MetricTensor element_metric(const std::array<Vec2, 3>& tri, double c);

AnisotropyParams metric_decompose(const MetricTensor& m);
MetricTensor metric_compose(const AnisotropyParams& params);

/// Normalizes an angle into [0, pi).
double normalize_angle_pi(double theta);
/// Distance between two orientations modulo pi, in [0, pi/2].
double angle_distance_pi(double a, double b);

MetricTensor metric_log(const MetricTensor& m);
MetricTensor metric_exp(const MetricTensor& m);

/// exp(sum_i w_i log(M_i)) with weights normalized to sum one.
MetricTensor log_euclidean_mean(std::span<const MetricTensor> metrics, std::span<const double> weights);
MetricTensor log_euclidean_mean(std::span<const MetricTensor> metrics);

/// Rotates the metric so that its ellipse turns counterclockwise by phi.
MetricTensor metric_rotate(const MetricTensor& m, double phi);

} // namespace hpdpg
