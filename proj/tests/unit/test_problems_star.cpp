#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hpdpg/postprocess.hpp"
#include "hpdpg/problems.hpp"

using namespace hpdpg;

namespace {

bool in_domain(Domain d, const Vec2& x) {
  if (d == Domain::UnitSquare) return x.x > 0.0 && x.x < 1.0 && x.y > 0.0 && x.y < 1.0;
  return x.x > -1.0 && x.x < 1.0 && x.y > -1.0 && x.y < 1.0 && !(x.x >= 0.0 && x.y <= 0.0);
}

// Central differences of the exact solution reproduce gradient and source.
void check_manufactured(const ProblemSpec& spec, double scale) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto& pde = spec.pde;
  int checked = 0;
  while (checked < 100) {
    const Vec2 x{u(rng), u(rng)};
    if (!in_domain(spec.domain, x) || norm(x) < 0.1) continue;
    const double h = 1e-5 * scale;
    const Vec2 ex{h, 0.0}, ey{0.0, h};
    const Vec2 g = pde.exact_grad(x);
    const double gx = (pde.exact(x + ex) - pde.exact(x - ex)) / (2 * h);
    const double gy = (pde.exact(x + ey) - pde.exact(x - ey)) / (2 * h);
    CHECK(std::abs(gx - g.x) <= 1e-4 * (1.0 + std::abs(g.x)));
    CHECK(std::abs(gy - g.y) <= 1e-4 * (1.0 + std::abs(g.y)));
    const double lap = (pde.exact_grad(x + ex).x - pde.exact_grad(x - ex).x + pde.exact_grad(x + ey).y -
                        pde.exact_grad(x - ey).y) /
                       (2 * h);
    const double s = dot(pde.convection, g) - pde.diffusion * lap;
    CHECK(std::abs(s - pde.eval_source(x)) <= 1e-4 * (1.0 + std::abs(s)));
    ++checked;
  }
}

} // namespace

TEST_CASE("manufactured sources match the exact solutions") {
  check_manufactured(make_problem("boundary_layer"), 0.1);
  check_manufactured(make_problem("boundary_layer", {0.02}), 0.02);
  check_manufactured(make_problem("gaussian_peak"), 0.01);
  check_manufactured(make_problem("atan_flux"), 0.01);
  check_manufactured(make_problem("lshape"), 1.0);
  check_manufactured(make_problem("poisson_sine"), 1.0);
}

TEST_CASE("case values and defaults") {
  const auto bl = make_problem("boundary_layer");
  CHECK(bl.pde.exact({1.0, 1.0}) == doctest::Approx(0.0));
  for (double t : {0.0, 0.3, 0.7, 1.0}) {
    CHECK(std::abs(bl.pde.exact({t, 0.0})) < 1e-14);
    CHECK(std::abs(bl.pde.exact({0.0, t})) < 1e-14);
    CHECK(std::abs(bl.pde.exact({1.0, t})) < 1e-12);
  }
  const auto ls = make_problem("lshape");
  CHECK(ls.domain == Domain::LShape);
  CHECK(ls.pde.exact({0.0, 1.0}) == doctest::Approx(std::sqrt(3.0) / 2.0));
  CHECK(std::abs(ls.pde.exact({1.0, 0.0})) < 1e-14);

  const auto gp = make_problem("gaussian_peak");
  CHECK(gp.alpha == 1000.0);
  REQUIRE(gp.target);
  CHECK(gp.target->volume_weight({0.99, 0.5}) == doctest::Approx(1.0));
  CHECK(gp.target->volume_weight({0.89, 0.5}) == doctest::Approx(std::exp(-10.0)));
  CHECK(gp.target->volume_weight({0.99, 0.4}) == doctest::Approx(4.54e-5).epsilon(1e-3));

  const auto af = make_problem("atan_flux");
  CHECK(af.alpha == 50.0);
  CHECK(af.epsilon == 0.01);
  REQUIRE(af.target);
  CHECK(af.target->kind == TargetKind::BoundaryFlux);
  CHECK(af.target->boundary_weight({1.0, 0.3}, {1.0, 0.0}, 2) == 1.0);
  CHECK(af.target->boundary_weight({0.3, 1.0}, {0.0, 1.0}, 3) == 0.0);

  CHECK_THROWS_AS(make_problem("nonsense"), ConfigError);
  CHECK_THROWS_AS(make_problem("boundary_layer", {-1.0}), ConfigError);
}

TEST_CASE("dual problem data") {
  const auto gp = make_problem("gaussian_peak");
  const auto dual = make_dual_problem(gp.pde, *gp.target);
  CHECK(dual.convection.x == doctest::Approx(-gp.pde.convection.x));
  CHECK(dual.convection.y == doctest::Approx(-gp.pde.convection.y));
  CHECK(dual.eval_source({0.99, 0.5}) == doctest::Approx(1.0));
  CHECK(dual.eval_dirichlet({1.0, 0.5}, {1.0, 0.0}, 2) == 0.0);

  const auto af = make_problem("atan_flux");
  const auto fd = make_dual_problem(af.pde, *af.target);
  CHECK(fd.eval_source({0.4, 0.6}) == 0.0);
  CHECK(fd.eval_dirichlet({1.0, 0.5}, {1.0, 0.0}, 2) == 1.0);
  CHECK(fd.eval_dirichlet({0.5, 0.0}, {0.0, -1.0}, 1) == 0.0);

  // Zero target data gives a zero dual.
  TargetFunctional none;
  none.volume_weight = [](const Vec2&) { return 0.0; };
  HpMesh hp(make_unit_square(2), 2);
  const auto z = solve_dual(hp, gp.pde, none, {});
  CHECK(z.solution.x.lpNorm<Eigen::Infinity>() < 1e-13);
  for (double s : z.star) CHECK(s < 1e-13);
  std::vector<double> eta(z.star.size(), 1.0);
  for (double g : goal_indicators(z.star, eta)) CHECK(g == 0.0);
  CHECK(dwr_estimate(goal_indicators({0.5, 2.0}, {0.1, 0.25})) == doctest::Approx(0.55));
}

TEST_CASE("star indicator of exact and discontinuous fields") {
  const Triangulation mesh = make_unit_square(1);
  REQUIRE(mesh.num_triangles() == 2);
  UltraWeakProblem dual;
  dual.diffusion = 1.0;
  // z = x + 2y is harmonic; tau = grad z.
  dual.dirichlet = [](const Vec2& x, const Vec2&, int) { return x.x + 2.0 * x.y; };
  DualFieldView smooth;
  smooth.v = [](int, const Vec2& x) { return x.x + 2.0 * x.y; };
  smooth.grad_v = [](int, const Vec2&) { return Vec2{1.0, 2.0}; };
  smooth.tau = smooth.grad_v;
  smooth.div_tau = [](int, const Vec2&) { return 0.0; };
  for (int k = 0; k < 2; ++k) CHECK(star_indicator(mesh, k, smooth, dual, 4) < 1e-13);

  // v = 1 on element 0, 0 on element 1, boundary data consistent with each side.
  auto owner = [&mesh](const Vec2& x) {
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 3; ++i) {
        const Edge& e = mesh.edge(mesh.triangle_edges(k)[static_cast<std::size_t>(i)]);
        if (!e.boundary) continue;
        const Vec2 a = mesh.vertex(e.v[0]), b = mesh.vertex(e.v[1]);
        const Vec2 d = b - a, r = x - a;
        if (std::abs(d.x * r.y - d.y * r.x) < 1e-12) return k;
      }
    return -1;
  };
  UltraWeakProblem jump;
  jump.diffusion = 1.0;
  jump.dirichlet = [owner](const Vec2& x, const Vec2&, int) { return owner(x) == 0 ? 1.0 : 0.0; };
  DualFieldView pc;
  pc.v = [](int k, const Vec2&) { return k == 0 ? 1.0 : 0.0; };
  pc.grad_v = [](int, const Vec2&) { return Vec2{0.0, 0.0}; };
  pc.tau = pc.grad_v;
  pc.div_tau = [](int, const Vec2&) { return 0.0; };
  for (int k = 0; k < 2; ++k) {
    const double s = star_indicator(mesh, k, pc, jump, 4);
    CHECK(s * s == doctest::Approx(1.0));
  }
}

TEST_CASE("gaussian dual indicator decreases under uniform refinement") {
  const auto gp = make_problem("gaussian_peak");
  double prev = 1e300;
  for (int n : {4, 8, 16}) {
    HpMesh hp(make_unit_square(n), 2);
    const auto d = solve_dual(hp, gp.pde, *gp.target, {});
    double s2 = 0.0;
    for (double s : d.star) s2 += s * s;
    CHECK(std::sqrt(s2) < prev);
    prev = std::sqrt(s2);
  }
}

TEST_CASE("flux target indicators sit below the diagonal") {
  const auto af = make_problem("atan_flux");
  HpMesh hp(make_unit_square(6), 2);
  auto primal = solve_global(hp, af.pde, {});
  estimate_errors(primal);
  const auto d = solve_dual(hp, af.pde, *af.target, {});
  const auto g = goal_indicators(d.star, primal.eta);
  std::size_t kmax = 0;
  for (std::size_t k = 1; k < g.size(); ++k)
    if (g[k] > g[kmax]) kmax = k;
  const Vec2 c = hp.mesh.barycenter(static_cast<int>(kmax));
  CHECK(c.y < c.x);
  CHECK(dwr_estimate(g) > 0.0);
}

TEST_CASE("volume target of an exact polynomial solution") {
  UltraWeakProblem pde;
  pde.diffusion = 1.0;
  pde.exact = [](const Vec2& x) { return x.x * x.y; };
  pde.dirichlet = [](const Vec2& x, const Vec2&, int) { return x.x * x.y; };
  TargetFunctional t;
  t.volume_weight = [](const Vec2& x) { return x.x; };
  auto s = solve_global(HpMesh(make_unit_square(2), 2), pde, {});
  // int x * xy over the unit square = 1/6.
  CHECK(evaluate_target(s, t) == doctest::Approx(1.0 / 6.0).epsilon(1e-10));
}
