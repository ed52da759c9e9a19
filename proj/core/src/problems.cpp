#include "hpdpg/problems.hpp"

#include <cmath>

#include "hpdpg/quadrature.hpp"

namespace hpdpg {

double layer_profile(double t, double eps) {
  // (e^{t/eps}-1)/(1-e^{1/eps}) rewritten without overflow.
  return t - (std::exp((t - 1.0) / eps) - std::exp(-1.0 / eps)) / (-std::expm1(-1.0 / eps));
}

double layer_profile_d1(double t, double eps) { return 1.0 - std::exp((t - 1.0) / eps) / (eps * -std::expm1(-1.0 / eps)); }

double layer_profile_d2(double t, double eps) { return -std::exp((t - 1.0) / eps) / (eps * eps * -std::expm1(-1.0 / eps)); }

namespace {

double value_or(double v, double fallback) { return std::isnan(v) ? fallback : v; }

/// int_a^b f by composite Gauss on n equal pieces.
template <class F>
double composite_gauss(F&& f, double a, double b, int n) {
  const auto& rule = gauss_line(20);
  const double h = (b - a) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (std::size_t q = 0; q < rule.points.size(); ++q) s += h * rule.weights[q] * f(a + h * (i + rule.points[q]));
  return s;
}

void set_boundary_layer(ProblemSpec& spec) {
  const double eps = spec.epsilon;
  auto& pde = spec.pde;
  pde.convection = {1.0, 1.0};
  pde.diffusion = eps;
  pde.exact = [eps](const Vec2& x) { return layer_profile(x.x, eps) * layer_profile(x.y, eps); };
  pde.exact_grad = [eps](const Vec2& x) {
    return Vec2{layer_profile_d1(x.x, eps) * layer_profile(x.y, eps), layer_profile(x.x, eps) * layer_profile_d1(x.y, eps)};
  };
  // X' - eps X'' = 1, so s = X(x) + X(y).
  pde.source = [eps](const Vec2& x) { return layer_profile(x.x, eps) + layer_profile(x.y, eps); };
  pde.dirichlet = {};
}

struct AtanProfile {
  double a;
  double v(double t) const { return std::atan(a * (t - 1.0 / 3.0)) + std::atan(a * (2.0 / 3.0 - t)); }
  double d1(double t) const {
    const double p = t - 1.0 / 3.0, q = 2.0 / 3.0 - t;
    return a / (1.0 + a * a * p * p) - a / (1.0 + a * a * q * q);
  }
  double d2(double t) const {
    const double p = t - 1.0 / 3.0, q = 2.0 / 3.0 - t;
    const double dp = 1.0 + a * a * p * p, dq = 1.0 + a * a * q * q;
    return -2.0 * a * a * a * p / (dp * dp) - 2.0 * a * a * a * q / (dq * dq);
  }
};

} // namespace

ProblemSpec make_problem(const std::string& name, const ProblemParams& params) {
  ProblemSpec spec;
  spec.name = name;
  if (name == "boundary_layer") {
    spec.epsilon = value_or(params.epsilon, 0.1);
    if (!(spec.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    set_boundary_layer(spec);
  } else if (name == "gaussian_peak") {
    spec.epsilon = value_or(params.epsilon, 0.01);
    spec.alpha = value_or(params.alpha, 1000.0);
    if (!(spec.epsilon > 0.0) || !(spec.alpha > 0.0)) throw ConfigError("epsilon and alpha must be positive");
    set_boundary_layer(spec);
    const double a = spec.alpha;
    const Vec2 c = params.center;
    TargetFunctional t;
    t.kind = TargetKind::Volume;
    t.volume_weight = [a, c](const Vec2& x) {
      const Vec2 d = x - c;
      return std::exp(-a * dot(d, d));
    };
    spec.target = t;
    // Separable: J = Ix * Iy with Ix = int_0^1 exp(-a (x - xc)^2) X(x) dx.
    const double eps = spec.epsilon;
    auto axis = [&](double center) {
      auto f = [&](double s) { return std::exp(-a * (s - center) * (s - center)) * layer_profile(s, eps); };
      const double split = std::max(0.0, 1.0 - 40.0 * eps);
      return (split > 0.0 ? composite_gauss(f, 0.0, split, 400) : 0.0) + composite_gauss(f, split, 1.0, 400);
    };
    spec.target_exact = axis(c.x) * axis(c.y);
  } else if (name == "atan_flux") {
    spec.epsilon = value_or(params.epsilon, 0.01);
    spec.alpha = value_or(params.alpha, 50.0);
    if (!(spec.epsilon > 0.0) || !(spec.alpha > 0.0)) throw ConfigError("epsilon and alpha must be positive");
    const double eps = spec.epsilon;
    const AtanProfile A{spec.alpha};
    auto& pde = spec.pde;
    pde.convection = {1.0, 1.0};
    pde.diffusion = eps;
    pde.exact = [A](const Vec2& x) { return A.v(x.x) * A.v(x.y); };
    pde.exact_grad = [A](const Vec2& x) { return Vec2{A.d1(x.x) * A.v(x.y), A.v(x.x) * A.d1(x.y)}; };
    pde.source = [A, eps](const Vec2& x) {
      return A.d1(x.x) * A.v(x.y) + A.v(x.x) * A.d1(x.y) - eps * (A.d2(x.x) * A.v(x.y) + A.v(x.x) * A.d2(x.y));
    };
    auto u = pde.exact;
    pde.dirichlet = [u](const Vec2& x, const Vec2&, int) { return u(x); };
    TargetFunctional t;
    t.kind = TargetKind::BoundaryFlux;
    t.boundary_weight = [](const Vec2&, const Vec2& n, int) { return n.x > 0.5 ? 1.0 : 0.0; };
    spec.target = t;
    spec.target_exact = A.d1(1.0) * composite_gauss([&](double s) { return A.v(s); }, 0.0, 1.0, 400);
  } else if (name == "lshape") {
    spec.domain = Domain::LShape;
    spec.epsilon = 1.0;
    auto& pde = spec.pde;
    pde.convection = {0.0, 0.0};
    pde.diffusion = 1.0;
    auto angle = [](const Vec2& x) {
      double th = std::atan2(x.y, x.x);
      if (th < 0.0) th += 2.0 * kPi;
      return th;
    };
    pde.exact = [angle](const Vec2& x) {
      const double r = norm(x);
      return std::pow(r, 2.0 / 3.0) * std::sin(2.0 * angle(x) / 3.0);
    };
    pde.exact_grad = [angle](const Vec2& x) {
      const double r = norm(x);
      if (r == 0.0) return Vec2{0.0, 0.0};
      const double th = angle(x);
      const double c = (2.0 / 3.0) * std::pow(r, -1.0 / 3.0);
      const double ur = c * std::sin(2.0 * th / 3.0), ut = c * std::cos(2.0 * th / 3.0);
      const Vec2 er{std::cos(th), std::sin(th)}, et{-std::sin(th), std::cos(th)};
      return er * ur + et * ut;
    };
    pde.source = {};
    auto u = pde.exact;
    pde.dirichlet = [u](const Vec2& x, const Vec2&, int) { return u(x); };
  } else if (name == "poisson_sine") {
    auto& pde = spec.pde;
    pde.convection = {0.0, 0.0};
    pde.diffusion = 1.0;
    pde.exact = [](const Vec2& x) { return std::sin(kPi * x.x) * std::sin(kPi * x.y); };
    pde.exact_grad = [](const Vec2& x) {
      return Vec2{kPi * std::cos(kPi * x.x) * std::sin(kPi * x.y), kPi * std::sin(kPi * x.x) * std::cos(kPi * x.y)};
    };
    pde.source = [](const Vec2& x) { return 2.0 * kPi * kPi * std::sin(kPi * x.x) * std::sin(kPi * x.y); };
  } else {
    throw ConfigError("unknown problem case '" + name + "'");
  }
  return spec;
}

Triangulation make_domain_mesh(Domain domain, int cells) {
  return domain == Domain::LShape ? make_lshape(cells) : make_unit_square(cells);
}

} // namespace hpdpg
