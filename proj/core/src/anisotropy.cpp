#include "hpdpg/anisotropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hpdpg/basis.hpp"
#include "hpdpg/metric.hpp"
#include "hpdpg/parallel.hpp"
#include "hpdpg/quadrature.hpp"

namespace hpdpg {

double Poly2::eval(double s, double t) const {
  double sp[64], tp[64];
  sp[0] = tp[0] = 1.0;
  for (int i = 1; i <= degree; ++i) {
    sp[i] = sp[i - 1] * s;
    tp[i] = tp[i - 1] * t;
  }
  double v = 0.0;
  std::size_t idx = 0;
  for (int n = 0; n <= degree; ++n)
    for (int j = 0; j <= n; ++j) v += coeffs[idx++] * sp[n - j] * tp[j];
  return v;
}

double LocalErrorModel::eval(const Vec2& x) const {
  const double s = (x.x - center.x) / scale, t = (x.y - center.y) / scale;
  double q = 0.0;
  for (const auto& f : components) {
    const double v = f.eval(s, t);
    q += v * v;
  }
  return q;
}

int LocalErrorModel::degree() const {
  int d = 0;
  for (const auto& f : components) d = std::max(d, 2 * f.degree);
  return d;
}

bool LocalErrorModel::is_zero() const {
  for (const auto& f : components)
    for (double c : f.coeffs)
      if (c != 0.0) return false;
  return true;
}

LocalErrorModel build_error_model(const GlobalSolution& sol, int k) {
  if (sol.reps.size() != static_cast<std::size_t>(sol.hp.mesh.num_triangles()))
    throw Error("build_error_model: error representations not computed");
  const ErrorRepresentation& rep = sol.reps[static_cast<std::size_t>(k)];
  const int p = sol.layout.elem_order[static_cast<std::size_t>(k)];
  const int q = sol.layout.test_order(k);
  const int nv = rep.nv;
  const auto g = element_geometry(sol.hp.mesh, k);

  LocalErrorModel m;
  m.element = k;
  m.center = sol.hp.mesh.barycenter(k);
  m.scale = std::sqrt(g.area);
  m.density = kAlpha / g.area;

  // Fit monomials in scaled local coordinates to the enriched part; the fit is
  // exact since both sides are polynomials of degree q.
  const auto& rule = quadrature_rule(std::min(kMaxQuadratureDegree, 2 * q));
  const int nmono = Poly2::size(q);
  const auto npts = static_cast<Eigen::Index>(rule.size());
  Eigen::MatrixXd V(npts, nmono);
  Eigen::MatrixXd F(npts, 3);
  std::vector<double> v(static_cast<std::size_t>(nv)), dx(static_cast<std::size_t>(nv)), dy(static_cast<std::size_t>(nv));
  for (Eigen::Index r = 0; r < npts; ++r) {
    const Vec2 ref = rule.points[static_cast<std::size_t>(r)];
    const Vec2 x = g.map(ref);
    const double s = (x.x - m.center.x) / m.scale, t = (x.y - m.center.y) / m.scale;
    int idx = 0;
    for (int n = 0; n <= q; ++n)
      for (int j = 0; j <= n; ++j) V(r, idx++) = std::pow(s, n - j) * std::pow(t, j);
    eval_dubiner(q, ref, v, dx, dy);
    double fv = 0.0, fx = 0.0, fy = 0.0;
    for (int i = 0; i < nv; ++i) {
      if (dubiner_degree(i) <= p) continue;
      const double b = v[static_cast<std::size_t>(i)];
      fv += rep.coeffs(i) * b;
      fx += rep.coeffs(nv + i) * b;
      fy += rep.coeffs(2 * nv + i) * b;
    }
    F(r, 0) = fv;
    F(r, 1) = fx;
    F(r, 2) = fy;
  }
  const Eigen::MatrixXd C = V.colPivHouseholderQr().solve(F);
  for (int c = 0; c < 3; ++c) {
    Poly2 f;
    f.degree = q;
    f.coeffs.resize(static_cast<std::size_t>(nmono));
    for (int i = 0; i < nmono; ++i) f.coeffs[static_cast<std::size_t>(i)] = C(i, c);
    m.components.push_back(std::move(f));
  }
  return m;
}

double anisotropy_bound(const LocalErrorModel& model, double beta, double theta) {
  const int deg = model.degree();
  // Polar rule on the unit disc: Gauss in r (integrand r * poly of degree deg),
  // trapezoid in the angle (exact for trigonometric degree <= deg).
  const LineRule& rr = gauss_line(deg / 2 + 2);
  const int nphi = deg + 2;
  const double h1 = std::sqrt(beta / model.density), h2 = std::sqrt(1.0 / (beta * model.density));
  const double c = std::cos(theta), s = std::sin(theta);
  double sum = 0.0;
  for (int a = 0; a < nphi; ++a) {
    const double phi = 2.0 * kPi * a / nphi;
    const double ex = h1 * std::cos(phi), ey = h2 * std::sin(phi);
    const Vec2 dir{c * ex - s * ey, s * ex + c * ey};
    for (std::size_t i = 0; i < rr.points.size(); ++i) {
      const double r = rr.points[i];
      sum += rr.weights[i] * r * model.eval(model.center + dir * r);
    }
  }
  return sum * (2.0 * kPi / nphi) * h1 * h2;
}

namespace {

constexpr double kGolden = 0.6180339887498949;

template <class F>
std::pair<double, double> golden_min(F&& f, double a, double b, int iters) {
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

} // namespace

AnisotropyResult optimize_anisotropy(const LocalErrorModel& model, const AnisotropyOptions& opt) {
  AnisotropyResult best;
  if (model.is_zero()) {
    best.skipped = true;
    return best;
  }
  best.bound = anisotropy_bound(model, 1.0, 0.0);
  const double log_bmax = std::log(opt.beta_max);

  auto theta_search = [&](double beta, double& theta, double& val) {
    int ib = 0;
    double fb = std::numeric_limits<double>::infinity();
    const double step = kPi / opt.theta_samples;
    for (int i = 0; i < opt.theta_samples; ++i) {
      const double f = anisotropy_bound(model, beta, i * step);
      if (f < fb) {
        fb = f;
        ib = i;
      }
    }
    auto [t, f] = golden_min([&](double th) { return anisotropy_bound(model, beta, th); }, (ib - 1) * step, (ib + 1) * step, 30);
    if (f < fb) {
      theta = normalize_angle_pi(t);
      val = f;
    } else {
      theta = ib * step;
      val = fb;
    }
  };
  auto beta_search = [&](double theta, double& beta, double& val) {
    int ib = 0;
    double fb = std::numeric_limits<double>::infinity();
    const int n = opt.beta_samples;
    for (int i = 0; i <= n; ++i) {
      const double f = anisotropy_bound(model, std::exp(log_bmax * i / n), theta);
      if (f < fb) {
        fb = f;
        ib = i;
      }
    }
    const double lo = log_bmax * std::max(0, ib - 1) / n, hi = log_bmax * std::min(n, ib + 1) / n;
    auto [lb, f] = golden_min([&](double l) { return anisotropy_bound(model, std::exp(l), theta); }, lo, hi, 30);
    if (f < fb) {
      beta = std::exp(lb);
      val = f;
    } else {
      beta = std::exp(log_bmax * ib / n);
      val = fb;
    }
  };

  // At beta = 1 the bound does not depend on theta; probe the direction with an
  // elongated ellipse first.
  double beta = std::min(4.0, opt.beta_max), theta = 0.0, val = 0.0;
  theta_search(beta, theta, val);
  double prev = val;
  for (int it = 0; it < opt.max_outer; ++it) {
    beta_search(theta, beta, val);
    if (val < best.bound) best = {beta, theta, val, false, false};
    theta_search(beta, theta, val);
    if (val < best.bound) best = {beta, theta, val, false, false};
    if (std::abs(prev - val) <= opt.rel_tol * std::abs(prev)) break;
    prev = val;
  }
  best.theta = normalize_angle_pi(best.theta);
  best.capped = best.beta >= opt.beta_max * (1.0 - 1e-9);
  return best;
}

std::vector<AnisotropyResult> compute_anisotropy(const GlobalSolution& sol, const AnisotropyOptions& opt, int threads) {
  const int nt = sol.hp.mesh.num_triangles();
  std::vector<AnisotropyResult> out(static_cast<std::size_t>(nt));
  const double eta_max = sol.eta.empty() ? 0.0 : *std::max_element(sol.eta.begin(), sol.eta.end());
  parallel_for(0, nt, threads, [&](int k) {
    if (!(sol.eta[static_cast<std::size_t>(k)] > 1e-14 * eta_max)) {
      out[static_cast<std::size_t>(k)].skipped = true;
      return;
    }
    out[static_cast<std::size_t>(k)] = optimize_anisotropy(build_error_model(sol, k), opt);
  });
  return out;
}

} // namespace hpdpg
