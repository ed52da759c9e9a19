#include "hpdpg/metric.hpp"

#include <algorithm>
#include <vector>

namespace hpdpg {

namespace {

MetricTensor from_spectrum(double angle_min, double lmin, double lmax) {
  const double c = std::cos(angle_min);
  const double s = std::sin(angle_min);
  // Q diag(lmin, lmax) Q^T with Q = [[c, -s], [s, c]].
  return {lmin * c * c + lmax * s * s, (lmin - lmax) * c * s, lmin * s * s + lmax * c * c};
}

} // namespace

double normalize_angle_pi(double theta) {
  double t = std::fmod(theta, kPi);
  if (t < 0.0) t += kPi;
  if (t >= kPi) t -= kPi;
  return t;
}

double angle_distance_pi(double a, double b) {
  const double d = normalize_angle_pi(a - b);
  return std::min(d, kPi - d);
}

SymEigen2 sym_eigen(const MetricTensor& m) {
  const double mean = 0.5 * (m.m11 + m.m22);
  const double half_diff = 0.5 * (m.m11 - m.m22);
  const double rad = std::hypot(half_diff, m.m12);
  SymEigen2 out;
  out.lambda_min = mean - rad;
  out.lambda_max = mean + rad;
  const double scale = std::abs(m.m11) + std::abs(m.m22) + std::abs(m.m12);
  if (rad <= 1e-14 * scale) {
    out.angle_min = 0.0;
    out.lambda_min = out.lambda_max = mean;
    return out;
  }
  // 0.5*atan2(2 m12, m11 - m22) is the direction of the largest eigenvalue.
  const double angle_max = 0.5 * std::atan2(2.0 * m.m12, m.m11 - m.m22);
  out.angle_min = normalize_angle_pi(angle_max + 0.5 * kPi);
  return out;
}

MetricTensor element_metric(const std::array<Vec2, 3>& tri, double c) {
  if (!(c > 0.0)) throw GeometryError("element_metric: constant must be positive");
  const std::array<Vec2, 3> e = {tri[1] - tri[0], tri[2] - tri[1], tri[0] - tri[2]};
  const double area2 = cross(e[0], tri[2] - tri[0]);
  const double scale = std::max({dot(e[0], e[0]), dot(e[1], e[1]), dot(e[2], e[2])});
  if (!(std::abs(area2) > 1e-13 * scale)) throw GeometryError("element_metric: degenerate triangle");
  // Rows (ex^2, 2 ex ey, ey^2) . (m11, m12, m22) = c, solved by Cramer's rule.
  double a[3][3];
  for (int i = 0; i < 3; ++i) {
    a[i][0] = e[i].x * e[i].x;
    a[i][1] = 2.0 * e[i].x * e[i].y;
    a[i][2] = e[i].y * e[i].y;
  }
  auto det3 = [](const double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const double det = det3(a);
  if (det == 0.0) throw GeometryError("element_metric: singular edge system");
  double sol[3];
  for (int col = 0; col < 3; ++col) {
    double b[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) b[i][j] = (j == col) ? c : a[i][j];
    sol[col] = det3(b) / det;
  }
  return {sol[0], sol[1], sol[2]};
}

AnisotropyParams metric_decompose(const MetricTensor& m) {
  if (!m.is_spd()) throw GeometryError("metric_decompose: metric is not SPD");
  const SymEigen2 eig = sym_eigen(m);
  if (!(eig.lambda_min > 0.0)) throw GeometryError("metric_decompose: metric is not SPD");
  AnisotropyParams p;
  p.theta = eig.angle_min;
  p.beta = std::sqrt(eig.lambda_max / eig.lambda_min);
  p.d = std::sqrt(eig.lambda_min * eig.lambda_max);
  return p;
}

MetricTensor metric_compose(const AnisotropyParams& params) {
  const double lmin = params.d / params.beta; // 1/h1^2
  const double lmax = params.d * params.beta; // 1/h2^2
  return from_spectrum(params.theta, lmin, lmax);
}

MetricTensor metric_log(const MetricTensor& m) {
  const SymEigen2 e = sym_eigen(m);
  if (!(e.lambda_min > 0.0)) throw GeometryError("metric_log: metric is not SPD");
  return from_spectrum(e.angle_min, std::log(e.lambda_min), std::log(e.lambda_max));
}

MetricTensor metric_exp(const MetricTensor& m) {
  const SymEigen2 e = sym_eigen(m);
  return from_spectrum(e.angle_min, std::exp(e.lambda_min), std::exp(e.lambda_max));
}

MetricTensor log_euclidean_mean(std::span<const MetricTensor> metrics, std::span<const double> weights) {
  if (metrics.empty() || metrics.size() != weights.size())
    throw GeometryError("log_euclidean_mean: metrics and weights must be non-empty and of equal size");
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (!(wsum > 0.0)) throw GeometryError("log_euclidean_mean: weights must have a positive sum");
  if (metrics.size() == 1) return metrics[0];
  MetricTensor acc{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < metrics.size(); ++i) acc = acc + metric_log(metrics[i]) * (weights[i] / wsum);
  return metric_exp(acc);
}

MetricTensor log_euclidean_mean(std::span<const MetricTensor> metrics) {
  std::vector<double> w(metrics.size(), 1.0);
  return log_euclidean_mean(metrics, w);
}

MetricTensor metric_rotate(const MetricTensor& m, double phi) {
  const SymEigen2 e = sym_eigen(m);
  return from_spectrum(e.angle_min + phi, e.lambda_min, e.lambda_max);
}

} // namespace hpdpg
