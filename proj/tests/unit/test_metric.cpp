#include <doctest.h>

#include <cmath>
#include <vector>

#include "hpdpg/metric.hpp"

using namespace hpdpg;

TEST_CASE("element metric gives unit length edges up to the constant") {
  const std::array<Vec2, 3> tri{Vec2{0.0, 0.0}, Vec2{2.0, 0.1}, Vec2{0.3, 0.5}};
  const double c = 3.0;
  const MetricTensor m = element_metric(tri, c);
  CHECK(m.is_spd());
  for (int i = 0; i < 3; ++i) {
    const Vec2 e = tri[(i + 1) % 3] - tri[i];
    CHECK(m.quad(e) == doctest::Approx(c));
  }
  CHECK_THROWS_AS(element_metric({Vec2{0, 0}, Vec2{1, 0}, Vec2{2, 0}}, c), GeometryError);
  CHECK_THROWS_AS(element_metric(tri, 0.0), GeometryError);
}

TEST_CASE("decompose and compose round trip") {
  for (double theta : {0.0, 0.3, 1.2, 2.9})
    for (double beta : {1.0, 2.5, 40.0}) {
      const AnisotropyParams a{theta, beta, 7.0};
      const MetricTensor m = metric_compose(a);
      CHECK(std::sqrt(m.det()) == doctest::Approx(7.0));
      const AnisotropyParams b = metric_decompose(m);
      CHECK(b.beta == doctest::Approx(beta));
      CHECK(b.d == doctest::Approx(7.0));
      if (beta > 1.0) CHECK(angle_distance_pi(a.theta, b.theta) < 1e-9);
      const MetricTensor m2 = metric_compose(b);
      CHECK(m2.m11 == doctest::Approx(m.m11));
      CHECK(m2.m12 == doctest::Approx(m.m12).epsilon(1e-9));
      CHECK(m2.m22 == doctest::Approx(m.m22));
    }
}

TEST_CASE("theta is the direction of the weakest eigenvalue") {
  const AnisotropyParams a{0.4, 5.0, 1.0};
  const MetricTensor m = metric_compose(a);
  const Vec2 dir{std::cos(0.4), std::sin(0.4)};
  const Vec2 ort{-std::sin(0.4), std::cos(0.4)};
  CHECK(m.quad(dir) < m.quad(ort));
  CHECK(m.quad(dir) == doctest::Approx(1.0 / 5.0));
}

TEST_CASE("log-Euclidean mean") {
  const MetricTensor a = metric_compose({0.2, 3.0, 2.0});
  const MetricTensor e = metric_exp(metric_log(a));
  CHECK(e.m11 == doctest::Approx(a.m11));
  CHECK(e.m12 == doctest::Approx(a.m12));
  CHECK(e.m22 == doctest::Approx(a.m22));
  const MetricTensor b = metric_compose({1.1, 1.5, 8.0});
  const MetricTensor mean = log_euclidean_mean(std::vector<MetricTensor>{a, b});
  // Determinant is the geometric mean.
  CHECK(mean.det() == doctest::Approx(std::sqrt(a.det() * b.det())));
  const MetricTensor same = log_euclidean_mean(std::vector<MetricTensor>{a, a, a});
  CHECK(same.m12 == doctest::Approx(a.m12));
}
