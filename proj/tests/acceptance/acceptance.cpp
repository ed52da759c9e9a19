// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion names as
// arguments to run a subset. Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hpdpg/driver.hpp"
#include "hpdpg/postprocess.hpp"

using namespace hpdpg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path work_root() {
  static const fs::path root = [] {
    fs::path p = fs::current_path() / "acceptance_runs";
    fs::create_directories(p);
    return p;
  }();
  return root;
}

AdaptConfig base_config(const std::string& name) {
  AdaptConfig c;
  c.out_dir = (work_root() / name).string();
  c.raster = 0;
  fs::remove_all(c.out_dir);
  return c;
}

// Random polynomial of total degree p with its gradient and Laplacian.
struct Polynomial {
  int degree = 0;
  std::vector<std::array<double, 3>> terms; // coefficient, i, j

  double value(const Vec2& x) const {
    double s = 0.0;
    for (const auto& t : terms) s += t[0] * std::pow(x.x, t[1]) * std::pow(x.y, t[2]);
    return s;
  }
  Vec2 grad(const Vec2& x) const {
    Vec2 g{0.0, 0.0};
    for (const auto& t : terms) {
      if (t[1] > 0) g.x += t[0] * t[1] * std::pow(x.x, t[1] - 1) * std::pow(x.y, t[2]);
      if (t[2] > 0) g.y += t[0] * t[2] * std::pow(x.x, t[1]) * std::pow(x.y, t[2] - 1);
    }
    return g;
  }
  double laplacian(const Vec2& x) const {
    double s = 0.0;
    for (const auto& t : terms) {
      if (t[1] > 1) s += t[0] * t[1] * (t[1] - 1) * std::pow(x.x, t[1] - 2) * std::pow(x.y, t[2]);
      if (t[2] > 1) s += t[0] * t[2] * (t[2] - 1) * std::pow(x.x, t[1]) * std::pow(x.y, t[2] - 2);
    }
    return s;
  }
};

Polynomial random_polynomial(int p, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Polynomial poly;
  poly.degree = p;
  for (int d = 0; d <= p; ++d)
    for (int j = 0; j <= d; ++j) poly.terms.push_back({u(rng), static_cast<double>(d - j), static_cast<double>(j)});
  return poly;
}

UltraWeakProblem polynomial_problem(const Polynomial& poly, Vec2 beta, double eps) {
  UltraWeakProblem pb;
  pb.convection = beta;
  pb.diffusion = eps;
  pb.exact = [poly](const Vec2& x) { return poly.value(x); };
  pb.exact_grad = [poly](const Vec2& x) { return poly.grad(x); };
  pb.source = [poly, beta, eps](const Vec2& x) { return dot(beta, poly.grad(x)) - eps * poly.laplacian(x); };
  pb.dirichlet = [poly](const Vec2& x, const Vec2&, int) { return poly.value(x); };
  return pb;
}

Outcome exactness() {
  std::mt19937 rng(2024);
  double worst_l2 = 0.0, worst_eta = 0.0;
  for (int p = 1; p <= 4; ++p)
    for (int cells : {1, 2, 4, 8}) // 2, 8, 32, 128 elements
      for (const auto& [beta, eps] : {std::pair{Vec2{0.0, 0.0}, 1.0}, std::pair{Vec2{1.0, 0.5}, 0.05}}) {
        const auto poly = random_polynomial(p, rng);
        auto sol = solve_global(HpMesh(make_unit_square(cells), p), polynomial_problem(poly, beta, eps), {});
        estimate_errors(sol);
        const auto fe = field_errors(sol);
        worst_l2 = std::max(worst_l2, fe.l2 / fe.l2_exact);
        worst_eta = std::max(worst_eta, energy_error(sol).total);
      }
  return {worst_l2 < 1e-9 && worst_eta < 1e-8,
          fmt("max relative L2 %.2e (< 1e-9), max eta %.2e (< 1e-8), p = 1..4 on 2..128 elements", worst_l2, worst_eta)};
}

double slope(const std::vector<double>& h, const std::vector<double>& e) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome rates() {
  const auto spec = make_problem("poisson_sine");
  bool ok_l2 = true, ok_eta = true;
  std::string d;
  for (int p = 1; p <= 3; ++p) {
    std::vector<double> h, l2, eta;
    for (int n : {4, 8, 16}) {
      auto sol = solve_global(HpMesh(make_unit_square(n), p), spec.pde, {});
      estimate_errors(sol);
      h.push_back(1.0 / n);
      l2.push_back(field_errors(sol).l2);
      eta.push_back(energy_error(sol).total);
    }
    const double sl = slope(h, l2), se = slope(h, eta);
    ok_l2 = ok_l2 && std::abs(sl - (p + 1)) <= 0.2;
    ok_eta = ok_eta && std::abs(se - (p + 1)) <= 0.3;
    d += fmt("p=%d L2 %.2f eta %.2f; ", p, sl, se);
  }
  d += fmt("L2 slopes %s (p+1 +- 0.2), energy slopes %s (p+1 +- 0.3)", ok_l2 ? "ok" : "off", ok_eta ? "ok" : "off");
  return {ok_l2 && ok_eta, d};
}

Outcome estimator_algebra() {
  // 8 x 4 cells on the unit square, 64 elements.
  std::vector<Vec2> v;
  std::vector<std::array<int, 3>> t;
  const int nx = 8, ny = 4;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) v.push_back({static_cast<double>(i) / nx, static_cast<double>(j) / ny});
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = j * (nx + 1) + i, b = a + 1, c = b + nx + 1, e = a + nx + 1;
      t.push_back({a, b, c});
      t.push_back({a, c, e});
    }
  HpMesh hp(Triangulation(v, t, {}), 3);
  const auto spec = make_problem("boundary_layer");
  auto sol = solve_global(hp, spec.pde, {});
  estimate_errors(sol);
  double worst = 0.0;
  for (int k = 0; k < hp.num_elements(); ++k) {
    const auto& rep = sol.reps[static_cast<std::size_t>(k)];
    const LocalSystem ls = assemble_local(sol.hp.mesh, k, sol.problem, sol.layout);
    const double cgc = rep.coeffs.dot(ls.gram * rep.coeffs);
    const double rc = rep.residual.dot(rep.coeffs);
    worst = std::max(worst, std::abs(cgc - rc) / cgc);
  }
  return {worst <= 1e-12 && hp.num_elements() == 64,
          fmt("max |c^T G c - r^T c| / c^T G c = %.2e over %d elements (<= 1e-12)", worst, hp.num_elements())};
}

Outcome lshape() {
  auto c = base_config("lshape");
  c.case_name = "lshape";
  c.fixed_complexity = 3072;
  c.max_adapt = 10;
  const auto r = run_adaptation(c).records;
  const auto& a = r.front();
  const auto& b = r.back();
  const double dl2 = a.l2_error / b.l2_error, de = a.energy_error / b.energy_error;
  bool mono = true;
  std::string ps;
  for (std::size_t i = 0; i < r.size(); ++i) {
    ps += fmt("%.2f ", r[i].p_avg);
    if (i >= 3 && r[i].p_avg < r[i - 1].p_avg) mono = false;
  }
  return {r.size() == 11 && dl2 >= 100.0 && de >= 100.0 && mono,
          fmt("L2 %.2e -> %.2e (x%.0f), energy %.2e -> %.2e (x%.0f), p_avg %s(%s after iteration 2)", a.l2_error,
              b.l2_error, dl2, a.energy_error, b.energy_error, de, ps.c_str(), mono ? "monotone" : "not monotone")};
}

Outcome exponential() {
  auto c = base_config("exponential");
  c.case_name = "boundary_layer";
  c.epsilon = 0.1;
  c.growth = 1.30;
  c.max_adapt = 12;
  const auto r = run_adaptation(c).records;
  std::vector<double> x, e;
  for (const auto& rec : r) {
    x.push_back(rec.cbrt_ndof);
    e.push_back(rec.energy_error);
  }
  const auto fit = exponential_fit(x, e);
  return {fit.b > 0.0 && fit.r2 > 0.9,
          fmt("energy %.2e -> %.2e over cbrt(ndof) %.1f -> %.1f, b = %.3f, R^2 = %.4f (b > 0, R^2 > 0.9)",
              e.front(), e.back(), x.front(), x.back(), fit.b, fit.r2)};
}

// Both runs use the same fixed budget, so their final ndof match up to the
// remesher's calibration tolerance.
Outcome robustness() {
  std::vector<ConvergenceRecord> last;
  for (int cells : {4, 8}) { // 32 and 128 elements
    auto c = base_config("robustness_" + std::to_string(cells));
    c.case_name = "boundary_layer";
    c.epsilon = 0.1;
    c.fixed_complexity = 3072;
    c.max_adapt = 10;
    c.init_cells = cells;
    last.push_back(run_adaptation(c).records.back());
  }
  const double ratio = std::max(last[0].energy_error, last[1].energy_error) /
                       std::min(last[0].energy_error, last[1].energy_error);
  const double ndof_gap = std::abs(last[0].ndof - last[1].ndof) / static_cast<double>(std::min(last[0].ndof, last[1].ndof));
  return {ratio <= 3.0 && ndof_gap <= 0.1,
          fmt("fixed budget 3072, 10 adaptations: energy %.3e (32 elements, ndof %d) vs %.3e (128 elements, ndof %d), "
              "ratio %.2f (<= 3)",
              last[0].energy_error, last[0].ndof, last[1].energy_error, last[1].ndof, ratio)};
}

Outcome goal() {
  auto c = base_config("gaussian_goal");
  c.case_name = "gaussian_peak";
  c.mode = AdaptMode::Goal;
  c.fixed_complexity = 3072;
  c.max_adapt = 10;
  const auto r = run_adaptation(c).records;
  double best = r.front().target_error;
  int at = 0;
  for (const auto& rec : r)
    if (rec.target_error < best) {
      best = rec.target_error;
      at = rec.iteration;
    }
  return {best <= 1e-8, fmt("|J(u) - J(u_h)| %.2e -> best %.2e at adaptation %d, final %.2e (<= 1e-8 within 10)",
                            r.front().target_error, best, at, r.back().target_error)};
}

Outcome density() {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> pd(1, 8);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    ContinuousModel m;
    for (int k = 0; k < 64; ++k) {
      m.area.push_back(1e-4 + 0.03 * u01(rng));
      m.p.push_back(pd(rng));
      m.abar.push_back(std::pow(10.0, 4.0 - 12.0 * u01(rng)));
    }
    m.n_target = 500.0 + 10000.0 * u01(rng);
    const auto d = compute_density(m);
    double cost = 0.0;
    for (std::size_t k = 0; k < 64; ++k) cost += m.area[k] * density_weight(m.p[k]) * d.density[k];
    worst = std::max(worst, std::abs(cost - m.n_target) / m.n_target);
  }
  const double alpha = 3.0 * std::numbers::sqrt3 / 4.0;
  double worst_c = 0.0;
  for (int p = 1; p <= 8; ++p) {
    ContinuousModel m;
    m.area.assign(40, 1.0 / 40.0);
    m.p.assign(40, p);
    m.abar.assign(40, 2.5e-3);
    m.n_target = 3072.0;
    const double w = density_weight(p);
    const double closed =
        std::pow(w * std::pow((p + 1) * 2.5e-3 * std::pow(alpha, p + 1) / w, 1.0 / (p + 2)) / m.n_target, p + 2);
    worst_c = std::max(worst_c, std::abs(bisect_const(m) - closed) / closed);
  }
  return {worst <= 0.005 && worst_c <= 1e-6,
          fmt("complexity deviation %.2e on 20 random 64-element fields (<= 0.5%%), closed form deviation %.2e (<= 1e-6)",
              worst, worst_c)};
}

Outcome anisotropy() {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> pd(1, 4);
  const AnisotropyOptions opt;
  // The 1 degree grid cannot resolve the optimum of thin ellipses (beta up to
  // 100), so the search is compared at grid resolution: it must not be worse
  // than the grid minimum, and its point snapped to the nearest grid node must
  // reproduce that minimum.
  double worst_b = 0.0, worst_snap = 0.0, raw_gain = 0.0, worst_t = 0.0, worst_perp = 0.0;
  const auto grid_beta = [&](int j) { return std::pow(opt.beta_max, j / 49.0); };
  for (int s = 0; s < 50; ++s) {
    const double phi = std::numbers::pi * u01(rng);
    const int p = pd(rng);
    const int n = p + 1;
    // (s cos phi + t sin phi)^{p+1}, squared by the model.
    Poly2 f{n, std::vector<double>(static_cast<std::size_t>(Poly2::size(n)), 0.0)};
    for (int i = 0; i <= n; ++i) {
      const double binom = std::tgamma(n + 1.0) / (std::tgamma(i + 1.0) * std::tgamma(n - i + 1.0));
      f.coeffs[static_cast<std::size_t>(Poly2::index(i, n - i))] =
          binom * std::pow(std::cos(phi), i) * std::pow(std::sin(phi), n - i);
    }
    LocalErrorModel q;
    q.density = std::pow(10.0, 4.0 * u01(rng));
    q.components.push_back(f);
    const auto r = optimize_anisotropy(q, opt);
    double gb = 1e300, gt = 0.0;
    for (int i = 0; i < 180; ++i)
      for (int j = 0; j < 50; ++j) {
        const double th = std::numbers::pi * i / 180.0;
        const double b = anisotropy_bound(q, grid_beta(j), th);
        if (b < gb) {
          gb = b;
          gt = th;
        }
      }
    const int si = static_cast<int>(std::lround(normalize_angle_pi(r.theta) * 180.0 / std::numbers::pi)) % 180;
    const int sj = static_cast<int>(std::lround(49.0 * std::log(r.beta) / std::log(opt.beta_max)));
    const double snapped = anisotropy_bound(q, grid_beta(sj), std::numbers::pi * si / 180.0);
    worst_b = std::max(worst_b, (r.bound - gb) / gb);
    worst_snap = std::max(worst_snap, std::abs(snapped - gb) / gb);
    raw_gain = std::max(raw_gain, (gb - r.bound) / gb);
    worst_t = std::max(worst_t, angle_distance_pi(r.theta, gt) * 180.0 / std::numbers::pi);
    worst_perp = std::max(worst_perp, angle_distance_pi(r.theta, phi + std::numbers::pi / 2) * 180.0 / std::numbers::pi);
  }
  return {worst_b <= 0.01 && worst_snap <= 0.01 && worst_t <= 2.0 && worst_perp <= 2.0,
          fmt("50 surrogates: search worse than grid by at most %.2e, snapped search point vs grid minimum %.2e "
              "(both <= 1%%; the search undercuts the grid by up to %.0f%% between nodes), theta deviation %.2f deg "
              "from grid and %.2f deg from perpendicular (<= 2 deg)",
              std::max(0.0, worst_b), worst_snap, 100.0 * raw_gain, worst_t, worst_perp)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  std::vector<std::string> csv;
  for (int threads : {1, 1, 3}) {
    auto c = base_config("determinism_" + std::to_string(csv.size()));
    c.case_name = "boundary_layer";
    c.max_adapt = 4;
    c.threads = threads;
    c.seed = 1234;
    run_adaptation(c);
    csv.push_back(slurp(fs::path(c.out_dir) / "convergence.csv"));
  }
  const bool same = !csv[0].empty() && csv[0] == csv[1] && csv[0] == csv[2];
  return {same, fmt("convergence.csv of runs with 1, 1 and 3 threads: %s (%zu bytes)", same ? "byte-identical" : "differ",
                    csv[0].size())};
}

} // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exactness", exactness},
      {"a_priori_rates", rates},
      {"estimator_algebra", estimator_algebra},
      {"lshape_hp", lshape},
      {"exponential_convergence", exponential},
      {"goal_mode", goal},
      {"density_optimizer", density},
      {"anisotropy_optimizer", anisotropy},
      {"robustness", robustness},
      {"determinism", determinism},
  };
  std::vector<std::string> only(argv + 1, argv + argc);
  int failed = 0, ran = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), dt);
    ++ran;
    if (!o.pass) ++failed;
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
