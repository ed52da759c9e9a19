#include "hpdpg/dpg_star.hpp"

#include <algorithm>
#include <cmath>

#include "hpdpg/parallel.hpp"
#include "hpdpg/postprocess.hpp"
#include "hpdpg/quadrature.hpp"

namespace hpdpg {

UltraWeakProblem make_dual_problem(const UltraWeakProblem& primal, const TargetFunctional& target) {
  UltraWeakProblem d;
  d.convection = primal.convection * -1.0;
  d.diffusion = primal.diffusion;
  if (target.kind == TargetKind::Volume) {
    if (!target.volume_weight) throw ConfigError("volume target without weight");
    d.source = target.volume_weight;
    d.dirichlet = target.boundary_weight;
  } else if (target.kind == TargetKind::BoundaryFlux) {
    if (!target.boundary_weight) throw ConfigError("flux target without boundary weight");
    d.source = target.volume_weight;
    d.dirichlet = target.boundary_weight;
  } else {
    throw ConfigError("unsupported target kind");
  }
  return d;
}

DualFieldView dual_field_view(const GlobalSolution& dual) {
  DualFieldView f;
  const GlobalSolution* s = &dual;
  auto ref = [s](int k, const Vec2& x) { return element_geometry(s->hp.mesh, k).to_reference(x); };
  f.v = [s, ref](int k, const Vec2& x) { return s->eval_u(k, ref(k, x)); };
  f.grad_v = [s, ref](int k, const Vec2& x) { return eval_grad_u(*s, k, ref(k, x)); };
  f.tau = [s, ref](int k, const Vec2& x) { return s->eval_sigma(k, ref(k, x)); };
  f.div_tau = [s, ref](int k, const Vec2& x) { return eval_div_sigma(*s, k, ref(k, x)); };
  return f;
}

double star_indicator(const Triangulation& m, int k, const DualFieldView& f, const UltraWeakProblem& dual, int degree) {
  const auto g = element_geometry(m, k);
  const auto& rule = quadrature_rule(std::clamp(degree, 1, kMaxQuadratureDegree));
  double vol = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vec2 x = g.map(rule.points[q]);
    const Vec2 gv = f.grad_v(k, x);
    const Vec2 r1 = f.tau(k, x) - gv;
    const double r2 = dot(dual.convection, gv) - dual.diffusion * f.div_tau(k, x) - dual.eval_source(x);
    vol += rule.weights[q] * g.det * (dot(r1, r1) + r2 * r2);
  }
  const auto& line = line_rule(std::clamp(degree, 1, 2 * kMaxQuadratureDegree));
  double edges = 0.0;
  for (int i = 0; i < 3; ++i) {
    const int e = m.triangle_edges(k)[static_cast<std::size_t>(i)];
    const Edge& ed = m.edge(e);
    const Vec2 a = m.vertex(ed.v[0]), b = m.vertex(ed.v[1]);
    const double h = norm(b - a);
    const Vec2 n = m.outward_normal(k, i);
    const int nb = m.neighbor(k, i);
    double jt = 0.0, jv = 0.0;
    for (std::size_t q = 0; q < line.points.size(); ++q) {
      const Vec2 x = a + (b - a) * line.points[q];
      const double vk = f.v(k, x);
      if (nb >= 0) {
        const double dt = dot(f.tau(k, x) - f.tau(nb, x), n);
        const double dv = vk - f.v(nb, x);
        jt += line.weights[q] * dt * dt;
        jv += line.weights[q] * dv * dv;
      } else {
        const double dv = vk - dual.eval_dirichlet(x, n, ed.tag);
        jv += line.weights[q] * dv * dv;
      }
    }
    // int_e (.) ds = h * sum w (.)
    edges += h * h * jt + jv;
  }
  return std::sqrt(vol + edges);
}

DualSolution solve_dual(const HpMesh& hp, const UltraWeakProblem& primal, const TargetFunctional& target,
                        const SolveOptions& options) {
  DualSolution d;
  const UltraWeakProblem dual = make_dual_problem(primal, target);
  d.solution = solve_global(hp, dual, options);
  const DualFieldView view = dual_field_view(d.solution);
  const int nt = hp.mesh.num_triangles();
  d.star.assign(static_cast<std::size_t>(nt), 0.0);
  parallel_for(0, nt, options.threads, [&](int k) {
    const int p = hp.p[static_cast<std::size_t>(k)];
    d.star[static_cast<std::size_t>(k)] = star_indicator(hp.mesh, k, view, dual, 2 * p + 10);
  });
  return d;
}

std::vector<double> goal_indicators(const std::vector<double>& star, const std::vector<double>& eta) {
  if (star.size() != eta.size()) throw Error("goal_indicators: size mismatch");
  std::vector<double> g(star.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = star[i] * eta[i];
  return g;
}

double dwr_estimate(const std::vector<double>& goal) {
  double s = 0.0;
  for (double v : goal) s += v;
  return s;
}

namespace {

/// Adaptive integration of f over the sub-triangle (a,b,c) of the reference element.
template <class F>
double adaptive_triangle(const F& f, const Vec2& a, const Vec2& b, const Vec2& c, const QuadratureRule& rule, double whole,
                         int depth) {
  auto integrate = [&](const Vec2& p0, const Vec2& p1, const Vec2& p2) {
    const double det = std::abs(cross(p1 - p0, p2 - p0));
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q)
      s += rule.weights[q] * f(p0 + (p1 - p0) * rule.points[q].x + (p2 - p0) * rule.points[q].y);
    return s * det;
  };
  const Vec2 ab = (a + b) * 0.5, bc = (b + c) * 0.5, ca = (c + a) * 0.5;
  const double i0 = integrate(a, ab, ca), i1 = integrate(ab, b, bc), i2 = integrate(ca, bc, c), i3 = integrate(ab, bc, ca);
  const double fine = i0 + i1 + i2 + i3;
  if (depth <= 0 || std::abs(fine - whole) <= 1e-15 * std::max(1.0, std::abs(fine))) return fine;
  return adaptive_triangle(f, a, ab, ca, rule, i0, depth - 1) + adaptive_triangle(f, ab, b, bc, rule, i1, depth - 1) +
         adaptive_triangle(f, ca, bc, c, rule, i2, depth - 1) + adaptive_triangle(f, ab, bc, ca, rule, i3, depth - 1);
}

} // namespace

double evaluate_target(const GlobalSolution& s, const TargetFunctional& t) {
  const Triangulation& m = s.hp.mesh;
  double J = 0.0;
  if (t.volume_weight) {
    for (int k = 0; k < m.num_triangles(); ++k) {
      const auto g = element_geometry(m, k);
      const int p = s.hp.p[static_cast<std::size_t>(k)];
      const auto& rule = quadrature_rule(std::min(kMaxQuadratureDegree, 2 * p + 20));
      auto f = [&](const Vec2& ref) { return t.volume_weight(g.map(ref)) * s.eval_u(k, ref); };
      double whole = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q) whole += rule.weights[q] * f(rule.points[q]);
      J += g.det * adaptive_triangle(f, {0, 0}, {1, 0}, {0, 1}, rule, whole, 4);
    }
  }
  if (t.kind == TargetKind::BoundaryFlux && t.boundary_weight) {
    const auto& line = line_rule(40);
    const double eps = s.problem.diffusion;
    for (int e = 0; e < m.num_edges(); ++e) {
      const Edge& ed = m.edge(e);
      if (!ed.boundary) continue;
      const Vec2 a = m.vertex(ed.v[0]), b = m.vertex(ed.v[1]);
      const Vec2 n = m.outward_normal(ed.tri[0], ed.local[0]);
      const double h = norm(b - a);
      for (std::size_t q = 0; q < line.points.size(); ++q) {
        const Vec2 x = a + (b - a) * line.points[q];
        const double w = t.boundary_weight(x, n, ed.tag);
        if (w == 0.0) continue;
        const double gradn = (dot(s.problem.convection, n) * s.eval_trace(e, x) - s.eval_flux(e, x)) / eps;
        J += h * line.weights[q] * w * gradn;
      }
    }
  }
  return J;
}

} // namespace hpdpg
