#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hpdpg/hp_model.hpp"
#include "hpdpg/problems.hpp"

using namespace hpdpg;

namespace {

constexpr double kGeomAlpha = 3.0 * std::numbers::sqrt3 / 4.0;

ContinuousModel uniform_model(int ne, double area, int p, double abar, double n) {
  ContinuousModel m;
  m.abar.assign(static_cast<std::size_t>(ne), abar);
  m.area.assign(static_cast<std::size_t>(ne), area);
  m.p.assign(static_cast<std::size_t>(ne), p);
  m.n_target = n;
  return m;
}

double density_cost(const ContinuousModel& m, const DensityField& d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d.density.size(); ++k) s += m.area[k] * density_weight(m.p[k]) * d.density[k];
  return s;
}

} // namespace

TEST_CASE("density weight reproduces the scalar dof count") {
  for (int p = 0; p <= 10; ++p) CHECK(kGeomAlpha * density_weight(p) == doctest::Approx(scalar_dofs(p)));
  CHECK(scalar_dofs(2) * 32 == 192);
  CHECK(scalar_dofs(1) == 3);
}

TEST_CASE("order selection criterion") {
  const std::array<bool, 3> all{true, true, true};
  // Equal errors everywhere: the cheapest order wins.
  auto flat = select_order(3, {1e-3, 1e-3, 1e-3}, all);
  CHECK(flat.p_opt == 2);
  CHECK(flat.m[1] == doctest::Approx(scalar_dofs(3)));
  CHECK(flat.m[0] == doctest::Approx(scalar_dofs(2)));

  // (1e-2)^(2/5) * 10 = 1.585 < 6.
  auto up = select_order(2, {1e-2, 1e-3, 1e-5}, {false, true, true});
  CHECK(up.m[2] == doctest::Approx(std::pow(1e-2, 0.4) * 10.0));
  CHECK(up.m[1] == doctest::Approx(6.0));
  CHECK(up.p_opt == 3);
  CHECK(up.energy_opt == doctest::Approx(1e-5));

  // Unavailable orders are never chosen.
  auto capped = select_order(2, {1e-2, 1e-3, 1e-9}, {true, true, false});
  CHECK(capped.p_opt != 3);
}

TEST_CASE("abar scaling") {
  CHECK(compute_abar(AdaptMode::Energy, 0.0, 0.0, 0.3, 2) == 0.0);
  CHECK(compute_abar(AdaptMode::Energy, 1e-3, 0.0, 0.01, 1) == doctest::Approx(1.0));
  CHECK(compute_abar(AdaptMode::Goal, 2e-3, 3e-2, 0.01, 1) == doctest::Approx(6e-5 / 1e-6));
  // Predicted eta^2 = abar |k|^{p+2}: halving |k| divides it by 2^{p+2}.
  const double abar = 0.7;
  for (int p = 1; p <= 4; ++p) {
    const double e1 = abar * std::pow(0.02, p + 2), e2 = abar * std::pow(0.01, p + 2);
    CHECK(e1 / e2 == doctest::Approx(std::pow(2.0, p + 2)));
    CHECK(compute_abar(AdaptMode::Energy, std::sqrt(e1), 0.0, 0.02, p) == doctest::Approx(abar));
  }
}

TEST_CASE("bisection matches the uniform closed form") {
  for (int p : {1, 2, 5}) {
    const double abar = 3.7e-4, n = 3072.0;
    const int ne = 50;
    const double area = 1.0 / ne;
    const auto m = uniform_model(ne, area, p, abar, n);
    const double w = density_weight(p);
    const double closed = std::pow(w * std::pow((p + 1) * abar * std::pow(kGeomAlpha, p + 1) / w, 1.0 / (p + 2)) / n, p + 2);
    const double c = bisect_const(m);
    CHECK(std::abs(c - closed) / closed < 1e-6);
    const auto d = compute_density(m);
    for (double dk : d.density) CHECK(dk == doctest::Approx(n / w));
    CHECK(density_cost(m, d) == doctest::Approx(n));
  }
  // Larger budgets give a smaller constant.
  CHECK(bisect_const(uniform_model(10, 0.1, 2, 1.0, 2000.0)) < bisect_const(uniform_model(10, 0.1, 2, 1.0, 1000.0)));
  // Single element, p = 1, abar = 1, N = 3.
  const auto one = uniform_model(1, 0.5, 1, 1.0, 3.0);
  const double c1 = bisect_const(one);
  CHECK(std::abs(model_complexity(one, c1) - 3.0) < 1e-10);
  CHECK_THROWS(bisect_const(uniform_model(4, 0.25, 2, 0.0, 100.0)));
}

TEST_CASE("density responds to the error level and meets the budget") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> pdist(1, 6);
  ContinuousModel m;
  for (int k = 0; k < 64; ++k) {
    m.area.push_back(0.001 + 0.05 * u01(rng));
    m.p.push_back(pdist(rng));
    m.abar.push_back(std::pow(10.0, -8.0 * u01(rng)));
  }
  m.n_target = 5000.0;
  const auto d = compute_density(m);
  CHECK(std::abs(density_cost(m, d) - m.n_target) / m.n_target < 0.005);
  for (double dk : d.density) CHECK(dk > 0.0);

  auto doubled = m;
  doubled.abar[7] *= 2.0;
  const auto dd = optimal_density(doubled, d.constant);
  CHECK(dd.density[7] > d.density[7]);
}

TEST_CASE("vertex metrics") {
  const Triangulation mesh = make_unit_square(3);
  const int nt = mesh.num_triangles();
  const MetricTensor iso = metric_compose({0.0, 1.0, 5.0});
  const auto uni = vertex_metrics(mesh, std::vector<MetricTensor>(static_cast<std::size_t>(nt), iso));
  for (const auto& v : uni) {
    CHECK(v.m11 == doctest::Approx(iso.m11));
    CHECK(std::abs(v.m12) < 1e-12);
    CHECK(v.m22 == doctest::Approx(iso.m22));
  }

  const Triangulation single({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {});
  const MetricTensor a = metric_compose({0.7, 4.0, 2.0});
  for (const auto& v : vertex_metrics(single, {a})) {
    CHECK(v.m11 == doctest::Approx(a.m11));
    CHECK(v.m12 == doctest::Approx(a.m12));
    CHECK(v.m22 == doctest::Approx(a.m22));
  }

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<MetricTensor> el;
  for (int k = 0; k < nt; ++k)
    el.push_back(metric_compose({u01(rng) * 3.14, 1.0 + 20.0 * u01(rng), std::pow(10.0, 3.0 * u01(rng))}));
  const auto vm = vertex_metrics(mesh, el);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    double lo = 1e300, hi = 0.0;
    for (int k : mesh.vertex_triangles(v)) {
      const auto e = sym_eigen(el[static_cast<std::size_t>(k)]);
      lo = std::min(lo, e.lambda_min);
      hi = std::max(hi, e.lambda_max);
    }
    const auto e = sym_eigen(vm[static_cast<std::size_t>(v)]);
    CHECK(e.lambda_min >= lo * (1.0 - 1e-12));
    CHECK(e.lambda_max <= hi * (1.0 + 1e-12));
  }
}

TEST_CASE("patch energies on smooth and polynomial problems") {
  auto spec = make_problem("poisson_sine");
  HpMesh hp(make_unit_square(4), 2);
  SolveOptions opt;
  auto sol = solve_global(hp, spec.pde, opt);
  const Patch patch = build_patch(hp, 13);
  CHECK(patch.members.size() == 4);
  const double e1 = solve_patch_at_order(sol, patch, 1, opt);
  const double e2 = solve_patch_at_order(sol, patch, 2, opt);
  const double e3 = solve_patch_at_order(sol, patch, 3, opt);
  CHECK(e1 > e2);
  CHECK(e2 > e3);

  // The patch problem is solved afresh: its order-p energy is not the global eta.
  estimate_errors(sol);
  CHECK(e2 != sol.eta[13]);

  UltraWeakProblem quad;
  quad.diffusion = 1.0;
  quad.exact = [](const Vec2& x) { return x.x * x.x - x.y * x.y + x.x * x.y; };
  quad.dirichlet = [f = quad.exact](const Vec2& x, const Vec2&, int) { return f(x); };
  auto qs = solve_global(hp, quad, opt);
  CHECK(solve_patch_at_order(qs, patch, 2, opt) < 1e-9);
}

TEST_CASE("select_orders respects the order bounds") {
  auto spec = make_problem("poisson_sine");
  HpMesh hp(make_unit_square(2), 1);
  auto sol = solve_global(hp, spec.pde, {});
  const auto sel = select_orders(sol, {}, 1, 2);
  REQUIRE(sel.size() == 8);
  for (const auto& s : sel) {
    CHECK_FALSE(s.available[0]);
    CHECK(s.p_opt >= 1);
    CHECK(s.p_opt <= 2);
  }
}

TEST_CASE("error model bound integrals") {
  LocalErrorModel one;
  one.components.push_back(Poly2{0, {1.0}});
  for (double beta : {1.0, 3.0, 40.0})
    for (double th : {0.0, 1.0}) {
      one.density = 2.0;
      CHECK(anisotropy_bound(one, beta, th) == doctest::Approx(std::numbers::pi / 2.0));
    }

  // q = x^2 with unit density: pi/4 h1^3 h2 = pi/4 beta.
  LocalErrorModel xx;
  xx.components.push_back(Poly2{1, {0.0, 1.0, 0.0}});
  for (double beta : {1.0, 2.0, 9.0}) CHECK(anisotropy_bound(xx, beta, 0.0) == doctest::Approx(std::numbers::pi / 4.0 * beta));

  // Rotating q by phi equals shifting theta by phi.
  const double phi = 0.6;
  LocalErrorModel rot;
  rot.components.push_back(Poly2{1, {0.0, std::cos(phi), std::sin(phi)}});
  for (double th : {0.1, 0.9, 2.0})
    CHECK(anisotropy_bound(rot, 4.0, th + phi) == doctest::Approx(anisotropy_bound(xx, 4.0, th)));
}

TEST_CASE("anisotropy optimizer") {
  LocalErrorModel radial;
  radial.components.push_back(Poly2{1, {0.0, 1.0, 0.0}});
  radial.components.push_back(Poly2{1, {0.0, 0.0, 1.0}});
  CHECK(optimize_anisotropy(radial).beta == doctest::Approx(1.0).epsilon(1e-3));

  LocalErrorModel xx;
  xx.components.push_back(Poly2{1, {0.0, 1.0, 0.0}});
  const auto r = optimize_anisotropy(xx);
  CHECK(angle_distance_pi(r.theta, std::numbers::pi / 2.0) < 1e-3);
  CHECK(r.beta > 10.0);

  LocalErrorModel zero;
  zero.components.push_back(Poly2{1, {0.0, 0.0, 0.0}});
  CHECK(zero.is_zero());
  CHECK(optimize_anisotropy(zero).beta == 1.0);
}
