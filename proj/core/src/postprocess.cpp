#include "hpdpg/postprocess.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>

#include "hpdpg/basis.hpp"
#include "hpdpg/locate.hpp"
#include "hpdpg/quadrature.hpp"

namespace hpdpg {

namespace {

struct LocalEval {
  std::vector<double> v, dx, dy;
  explicit LocalEval(int n) : v(static_cast<std::size_t>(n)), dx(static_cast<std::size_t>(n)), dy(static_cast<std::size_t>(n)) {}
};

} // namespace

Vec2 eval_grad_u(const GlobalSolution& s, int k, const Vec2& ref) {
  const int p = s.layout.elem_order[static_cast<std::size_t>(k)];
  const int nu = dubiner_dim(p);
  LocalEval e(nu);
  eval_dubiner(p, ref, e.v, e.dx, e.dy);
  const int off = s.layout.field_offset[static_cast<std::size_t>(k)];
  double gx = 0.0, gy = 0.0;
  for (int i = 0; i < nu; ++i) {
    gx += s.x(off + i) * e.dx[static_cast<std::size_t>(i)];
    gy += s.x(off + i) * e.dy[static_cast<std::size_t>(i)];
  }
  const auto g = element_geometry(s.hp.mesh, k);
  return {g.inv_t(0, 0) * gx + g.inv_t(0, 1) * gy, g.inv_t(1, 0) * gx + g.inv_t(1, 1) * gy};
}

double eval_div_sigma(const GlobalSolution& s, int k, const Vec2& ref) {
  const int p = s.layout.elem_order[static_cast<std::size_t>(k)];
  const int nu = dubiner_dim(p);
  LocalEval e(nu);
  eval_dubiner(p, ref, e.v, e.dx, e.dy);
  const int off = s.layout.field_offset[static_cast<std::size_t>(k)];
  double ax = 0, ay = 0, bx = 0, by = 0;
  for (int i = 0; i < nu; ++i) {
    const double cx = s.x(off + nu + i), cy = s.x(off + 2 * nu + i);
    ax += cx * e.dx[static_cast<std::size_t>(i)];
    ay += cx * e.dy[static_cast<std::size_t>(i)];
    bx += cy * e.dx[static_cast<std::size_t>(i)];
    by += cy * e.dy[static_cast<std::size_t>(i)];
  }
  const auto g = element_geometry(s.hp.mesh, k);
  // d/dx = K(0,0) d/dxi + K(0,1) d/deta
  return g.inv_t(0, 0) * ax + g.inv_t(0, 1) * ay + g.inv_t(1, 0) * bx + g.inv_t(1, 1) * by;
}

FieldErrors field_errors(const GlobalSolution& s, int extra_degree) {
  if (!s.problem.exact) throw Error("field_errors: problem has no exact solution");
  FieldErrors fe;
  double l2 = 0.0, h1 = 0.0, ex = 0.0;
  const Triangulation& m = s.hp.mesh;
  for (int k = 0; k < m.num_triangles(); ++k) {
    const int p = s.layout.elem_order[static_cast<std::size_t>(k)];
    const auto& rule = quadrature_rule(std::min(kMaxQuadratureDegree, 2 * p + extra_degree));
    const auto g = element_geometry(m, k);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 x = g.map(rule.points[q]);
      const double w = rule.weights[q] * g.det;
      const double u = s.problem.exact(x);
      const double e = s.eval_u(k, rule.points[q]) - u;
      l2 += w * e * e;
      ex += w * u * u;
      fe.linf = std::max(fe.linf, std::abs(e));
      if (s.problem.exact_grad) {
        const Vec2 d = eval_grad_u(s, k, rule.points[q]) - s.problem.exact_grad(x);
        h1 += w * dot(d, d);
      }
    }
  }
  fe.l2 = std::sqrt(l2);
  fe.l2_exact = std::sqrt(ex);
  fe.h1_semi = std::sqrt(h1);
  fe.h1 = std::sqrt(l2 + h1);
  return fe;
}

void write_element_csv(std::ostream& out, const GlobalSolution& s) {
  out << "element,p,area,eta\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int k = 0; k < s.hp.mesh.num_triangles(); ++k)
    out << k << ',' << s.hp.p[static_cast<std::size_t>(k)] << ',' << s.hp.mesh.area(k) << ','
        << (s.eta.empty() ? 0.0 : s.eta[static_cast<std::size_t>(k)]) << '\n';
}

void write_solution_raster(std::ostream& out, const GlobalSolution& s, int nx, int ny) {
  const Triangulation& m = s.hp.mesh;
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  for (const auto& v : m.vertices()) {
    x0 = std::min(x0, v.x);
    y0 = std::min(y0, v.y);
    x1 = std::max(x1, v.x);
    y1 = std::max(y1, v.y);
  }
  const PointLocator loc(m);
  out << "x,y,u\n" << std::setprecision(12);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Vec2 x{x0 + (x1 - x0) * (nx > 1 ? double(i) / (nx - 1) : 0.5), y0 + (y1 - y0) * (ny > 1 ? double(j) / (ny - 1) : 0.5)};
      const int k = loc.locate(x);
      if (k < 0) continue;
      const auto g = element_geometry(m, k);
      out << x.x << ',' << x.y << ',' << s.eval_u(k, g.to_reference(x)) << '\n';
    }
}

} // namespace hpdpg
