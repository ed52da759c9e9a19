#include "hpdpg/quadrature.hpp"

#include <algorithm>
#include <boost/math/special_functions/legendre.hpp>
#include <map>
#include <memory>
#include <mutex>

namespace hpdpg {

namespace {

LineRule make_gauss(int n) {
  // Zeros of P_n on [-1,1], nonnegative half from Boost.
  const std::vector<double> half = boost::math::legendre_p_zeros<double>(n);
  std::vector<double> x;
  for (double z : half) {
    x.push_back(z);
    if (z != 0.0) x.push_back(-z);
  }
  std::sort(x.begin(), x.end());
  LineRule r;
  r.degree = 2 * n - 1;
  for (double z : x) {
    const double dp = boost::math::legendre_p_prime(n, z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.points.push_back(0.5 * (z + 1.0));
    r.weights.push_back(0.5 * w);
  }
  return r;
}

QuadratureRule make_triangle(int degree) {
  // The Duffy map x = xi (1 - eta), y = eta carries a factor (1 - eta): the
  // integrand has degree <= degree in xi and <= degree + 1 in eta.
  const int n = (degree + 2 + 1) / 2;
  const LineRule& g = gauss_line(n);
  QuadratureRule q;
  q.degree = degree;
  for (std::size_t j = 0; j < g.points.size(); ++j) {
    const double eta = g.points[j];
    for (std::size_t i = 0; i < g.points.size(); ++i) {
      const double xi = g.points[i];
      q.points.push_back({xi * (1.0 - eta), eta});
      q.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - eta));
    }
  }
  return q;
}

template <class T, class F>
const T& cached(std::map<int, std::unique_ptr<T>>& cache, std::mutex& mu, int key, F make) {
  std::lock_guard lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<T>(make(key))).first;
  return *it->second;
}

} // namespace

const LineRule& gauss_line(int npoints) {
  if (npoints < 1 || npoints > 64) throw Error("gauss_line: unsupported number of points " + std::to_string(npoints));
  static std::map<int, std::unique_ptr<LineRule>> cache;
  static std::mutex mu;
  return cached(cache, mu, npoints, make_gauss);
}

const LineRule& line_rule(int degree) { return gauss_line(std::max(1, (degree + 2) / 2)); }

const QuadratureRule& quadrature_rule(int degree) {
  if (degree < 1 || degree > kMaxQuadratureDegree)
    throw Error("quadrature_rule: unsupported degree " + std::to_string(degree));
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  static std::mutex mu;
  return cached(cache, mu, degree, make_triangle);
}

} // namespace hpdpg
