#include "hpdpg/driver.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hpdpg/anisotropy.hpp"
#include "hpdpg/dpg_star.hpp"
#include "hpdpg/postprocess.hpp"
#include "hpdpg/remesh.hpp"

namespace fs = std::filesystem;

namespace hpdpg {

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

double parse_num(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("bad number '" + s + "' in convergence table", 0);
  return x;
}

int initial_cells(const AdaptConfig& cfg, Domain domain) {
  if (cfg.init_cells > 0) return cfg.init_cells;
  if (cfg.fixed_complexity <= 0.0) return domain == Domain::LShape ? 2 : 4;
  // Fixed complexity: pick the uniform mesh whose complexity is closest to N.
  const double per_cell = (domain == Domain::LShape ? 6.0 : 2.0) * scalar_dofs(cfg.p_init);
  return std::max(1, static_cast<int>(std::lround(std::sqrt(cfg.fixed_complexity / per_cell))));
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw Error("cannot write " + p.string());
  f << std::setprecision(std::numeric_limits<double>::max_digits10);
  return f;
}

nlohmann::json record_json(const ConvergenceRecord& r) {
  nlohmann::json j;
  j["iteration"] = r.iteration;
  j["ne"] = r.ne;
  j["ndof"] = r.ndof;
  j["cbrt_ndof"] = r.cbrt_ndof;
  j["complexity"] = r.complexity;
  j["p_avg"] = r.p_avg;
  j["l2_error"] = r.l2_error;
  j["energy_error"] = r.energy_error;
  j["linf_error"] = r.linf_error;
  j["h1_semi_error"] = r.h1_semi_error;
  j["h1_error"] = r.h1_error;
  // JSON has no NaN; absent values become null.
  j["target_error"] = std::isnan(r.target_error) ? nlohmann::json() : nlohmann::json(r.target_error);
  j["dwr"] = std::isnan(r.dwr) ? nlohmann::json() : nlohmann::json(r.dwr);
  return j;
}

struct Sink {
  const AdaptConfig& cfg;
  fs::path dir;
  nlohmann::json manifest;

  void flush(const std::vector<ConvergenceRecord>& records) {
    if (!cfg.write_files) return;
    {
      auto f = open_out(dir / "convergence.csv");
      write_convergence_csv(f, records);
    }
    manifest["records"] = nlohmann::json::array();
    manifest["cbrt_ndof"] = nlohmann::json::array();
    for (const auto& r : records) {
      manifest["records"].push_back(record_json(r));
      manifest["cbrt_ndof"].push_back(r.cbrt_ndof);
    }
    auto f = open_out(dir / "manifest.json");
    f << manifest.dump(2) << '\n';
  }
};

} // namespace

// ---------------------------------------------------------------- records

const std::vector<std::string>& convergence_columns() {
  static const std::vector<std::string> c{"iteration",    "ne",           "ndof",          "cbrt_ndof", "complexity",
                                          "p_avg",        "l2_error",     "energy_error",  "linf_error",
                                          "h1_semi_error", "h1_error",    "target_error",  "dwr"};
  return c;
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records) {
  const auto& cols = convergence_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : records) {
    out << r.iteration << ',' << r.ne << ',' << r.ndof << ',' << num(r.cbrt_ndof) << ',' << num(r.complexity) << ','
        << num(r.p_avg) << ',' << num(r.l2_error) << ',' << num(r.energy_error) << ',' << num(r.linf_error) << ','
        << num(r.h1_semi_error) << ',' << num(r.h1_error) << ',' << num(r.target_error) << ',' << num(r.dwr) << '\n';
  }
}

std::vector<ConvergenceRecord> read_convergence_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty convergence table", 1);
  std::string expect;
  for (const auto& c : convergence_columns()) expect += (expect.empty() ? "" : ",") + c;
  if (line != expect) throw ParseError("convergence table header does not match the expected columns", 1);
  std::vector<ConvergenceRecord> out;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != convergence_columns().size()) throw ParseError("wrong number of columns", n);
    try {
      ConvergenceRecord r;
      r.iteration = static_cast<int>(parse_num(f[0]));
      r.ne = static_cast<int>(parse_num(f[1]));
      r.ndof = static_cast<int>(parse_num(f[2]));
      r.cbrt_ndof = parse_num(f[3]);
      r.complexity = parse_num(f[4]);
      r.p_avg = parse_num(f[5]);
      r.l2_error = parse_num(f[6]);
      r.energy_error = parse_num(f[7]);
      r.linf_error = parse_num(f[8]);
      r.h1_semi_error = parse_num(f[9]);
      r.h1_error = parse_num(f[10]);
      r.target_error = parse_num(f[11]);
      r.dwr = parse_num(f[12]);
      out.push_back(r);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), n);
    }
  }
  return out;
}

ExponentialFit exponential_fit(const std::vector<double>& x, const std::vector<double>& err) {
  if (x.size() != err.size() || x.size() < 2) throw Error("exponential_fit needs at least two matching samples");
  const double n = static_cast<double>(x.size());
  std::vector<double> y(err.size());
  for (std::size_t i = 0; i < err.size(); ++i) {
    if (!(err[i] > 0.0)) throw Error("exponential_fit needs positive errors");
    y[i] = std::log(err[i]);
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  ExponentialFit f;
  const double slope = sxy / sxx;
  f.b = -slope;
  f.log_c = my - slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

// ---------------------------------------------------------------- loop

RunResult run_adaptation(const AdaptConfig& cfg, const ExternalMesher& external) {
  cfg.validate();
  const ProblemSpec spec = make_problem(cfg.case_name, {cfg.epsilon, cfg.alpha, cfg.center});
  if (cfg.mode == AdaptMode::Goal && !spec.target)
    throw ConfigError("case '" + cfg.case_name + "' has no target functional, goal mode is unavailable");
  if (cfg.remesher == "external" && !external) throw ConfigError("remesher = external needs a mesher command");

  Sink sink{cfg, fs::path(cfg.out_dir), {}};
  if (cfg.write_files) {
    std::error_code ec;
    fs::create_directories(sink.dir, ec);
    if (ec) throw Error("cannot create output directory " + cfg.out_dir + ": " + ec.message());
  }
  nlohmann::json echo;
  for (const auto& [k, v] : cfg.to_map()) echo[k] = v;
  sink.manifest["config"] = echo;
  sink.manifest["case"] = spec.name;
  sink.manifest["epsilon"] = spec.epsilon;
  sink.manifest["alpha"] = spec.alpha;
  sink.manifest["columns"] = convergence_columns();
  sink.manifest["target_exact"] = std::isnan(spec.target_exact) ? nlohmann::json() : nlohmann::json(spec.target_exact);
  sink.manifest["iterations"] = nlohmann::json::array();

  Triangulation mesh0 = cfg.mesh_in.empty() ? make_domain_mesh(spec.domain, initial_cells(cfg, spec.domain)) : load_mesh(cfg.mesh_in);
  HpMesh hp(std::move(mesh0), cfg.p_init);
  const bool fixed = cfg.fixed_complexity > 0.0;
  double target = fixed ? cfg.fixed_complexity : mesh_complexity(hp);

  SolveOptions so;
  so.delta_p = cfg.delta_p;
  so.condense = cfg.condense;
  so.solver = cfg.solver;
  so.cg_tolerance = cfg.cg_tolerance;
  so.threads = cfg.threads;
  AnisotropyOptions ao;
  ao.beta_max = cfg.beta_max;

  RunResult result;
  auto& records = result.records;
  for (int it = 0;; ++it) {
    const int ne = hp.num_elements();
    GlobalSolution sol = solve_global(hp, spec.pde, so);
    estimate_errors(sol, cfg.threads);

    ConvergenceRecord rec;
    rec.iteration = it;
    rec.ne = ne;
    rec.ndof = sol.num_scalar_dofs();
    rec.cbrt_ndof = std::cbrt(static_cast<double>(rec.ndof));
    rec.complexity = it == 0 && !fixed ? mesh_complexity(hp) : target;
    rec.p_avg = std::accumulate(hp.p.begin(), hp.p.end(), 0.0) / ne;
    rec.energy_error = energy_error(sol).total;
    if (spec.pde.exact) {
      const FieldErrors fe = field_errors(sol);
      rec.l2_error = fe.l2;
      rec.linf_error = fe.linf;
      rec.h1_semi_error = fe.h1_semi;
      rec.h1_error = fe.h1;
    }
    if (spec.target && !std::isnan(spec.target_exact))
      rec.target_error = std::abs(evaluate_target(sol, *spec.target) - spec.target_exact);

    std::vector<double> star(static_cast<std::size_t>(ne), 0.0), goal(static_cast<std::size_t>(ne), 0.0);
    if (cfg.mode == AdaptMode::Goal) {
      const DualSolution dual = solve_dual(hp, spec.pde, *spec.target, so);
      star = dual.star;
      goal = goal_indicators(star, sol.eta);
      rec.dwr = dwr_estimate(goal);
    }
    records.push_back(rec);

    nlohmann::json info;
    info["iteration"] = it;
    const std::string tag = std::to_string(it);
    if (cfg.write_files) {
      {
        auto f = open_out(sink.dir / ("mesh_" + tag + ".mesh"));
        write_bamg_mesh(f, hp.mesh);
      }
      {
        auto f = open_out(sink.dir / ("pdist_" + tag + ".csv"));
        f << "element,p,x,y\n";
        for (int k = 0; k < ne; ++k) {
          const Vec2 c = hp.mesh.barycenter(k);
          f << k << ',' << hp.p[static_cast<std::size_t>(k)] << ',' << c.x << ',' << c.y << '\n';
        }
      }
      {
        auto f = open_out(sink.dir / ("solution_" + tag + ".csv"));
        write_element_csv(f, sol);
      }
      {
        auto f = open_out(sink.dir / ("indicators_" + tag + ".csv"));
        f << "element,eta,eta_star,eta_goal\n";
        for (int k = 0; k < ne; ++k)
          f << k << ',' << sol.eta[static_cast<std::size_t>(k)] << ',' << star[static_cast<std::size_t>(k)] << ','
            << goal[static_cast<std::size_t>(k)] << '\n';
      }
      info["mesh"] = "mesh_" + tag + ".mesh";
      info["pdist"] = "pdist_" + tag + ".csv";
      info["solution"] = "solution_" + tag + ".csv";
      info["indicators"] = "indicators_" + tag + ".csv";
    }

    const double err = cfg.mode == AdaptMode::Goal && !std::isnan(rec.target_error) ? rec.target_error : rec.energy_error;
    const bool last = it >= cfg.max_adapt || err < 1e-14;
    if (last) {
      if (cfg.write_files && cfg.raster > 0) {
        auto f = open_out(sink.dir / "raster_final.csv");
        write_solution_raster(f, sol, cfg.raster, cfg.raster);
        info["raster"] = "raster_final.csv";
      }
      sink.manifest["iterations"].push_back(info);
      sink.flush(records);
      result.final_mesh = hp;
      break;
    }

    // Order selection from local patch problems.
    std::vector<OrderSelection> sel;
    if (cfg.hp) {
      sel = select_orders(sol, so, cfg.p_min, cfg.p_max, cfg.patch);
    } else {
      sel.resize(static_cast<std::size_t>(ne));
      for (int k = 0; k < ne; ++k) {
        auto& s = sel[static_cast<std::size_t>(k)];
        s.element = k;
        s.p_old = s.p_opt = hp.p[static_cast<std::size_t>(k)];
        s.energy_opt = sol.eta[static_cast<std::size_t>(k)];
      }
    }
    if (!fixed) target *= cfg.growth;

    ContinuousModel model;
    model.n_target = target;
    for (int k = 0; k < ne; ++k) {
      const auto& s = sel[static_cast<std::size_t>(k)];
      const double area = hp.mesh.area(k);
      model.area.push_back(area);
      model.p.push_back(s.p_opt);
      model.abar.push_back(compute_abar(cfg.mode, s.energy_opt, star[static_cast<std::size_t>(k)], area, s.p_opt));
    }
    std::vector<AnisotropyResult> aniso(static_cast<std::size_t>(ne));
    if (cfg.anisotropic) aniso = compute_anisotropy(sol, ao, cfg.threads);
    const DensityField dens = compute_density(model);
    const auto em = element_metrics(dens.density, aniso);
    auto vm = vertex_metrics(hp.mesh, em);
    // A unit-edge equilateral triangle under M/3 has the area alpha/d.
    for (auto& m : vm) m = m * (1.0 / 3.0);

    if (cfg.write_files) {
      {
        auto f = open_out(sink.dir / ("diagnostics_" + tag + ".csv"));
        f << "element,p_old,p_opt,E_pm1,E_p,E_pp1,m_pm1,m_p,m_pp1,abar,density\n";
        for (int k = 0; k < ne; ++k) {
          const auto& s = sel[static_cast<std::size_t>(k)];
          f << k << ',' << s.p_old << ',' << s.p_opt;
          for (int i = 0; i < 3; ++i) f << ',' << (s.available[static_cast<std::size_t>(i)] ? num(s.energy[static_cast<std::size_t>(i)]) : "nan");
          for (int i = 0; i < 3; ++i) f << ',' << (s.available[static_cast<std::size_t>(i)] ? num(s.m[static_cast<std::size_t>(i)]) : "nan");
          f << ',' << model.abar[static_cast<std::size_t>(k)] << ',' << dens.density[static_cast<std::size_t>(k)] << '\n';
        }
      }
      {
        auto f = open_out(sink.dir / ("anisotropy_" + tag + ".csv"));
        f << "element,beta,theta,bound\n";
        for (int k = 0; k < ne; ++k) {
          const auto& a = aniso[static_cast<std::size_t>(k)];
          f << k << ',' << a.beta << ',' << a.theta << ',' << a.bound << '\n';
        }
      }
      info["diagnostics"] = "diagnostics_" + tag + ".csv";
      info["anisotropy"] = "anisotropy_" + tag + ".csv";
    }
    info["complexity_target"] = target;
    info["density_constant"] = dens.constant;

    std::vector<int> p_opt(static_cast<std::size_t>(ne));
    for (int k = 0; k < ne; ++k) p_opt[static_cast<std::size_t>(k)] = sel[static_cast<std::size_t>(k)].p_opt;

    struct Candidate {
      Triangulation mesh;
      std::vector<int> p;
      double complexity = 0.0;
    };
    auto build = [&](double scale, int attempt) {
      std::vector<MetricTensor> m = vm;
      for (auto& x : m) x = x * scale;
      Candidate c;
      if (cfg.remesher == "internal") {
        RemeshReport rep;
        c.mesh = remesh_internal(hp.mesh, m, {}, &rep);
        info["remesh"] = {{"sweeps", rep.sweeps},
                          {"fraction_in_band", rep.fraction_in_band},
                          {"converged", rep.converged},
                          {"splits", rep.splits},
                          {"collapses", rep.collapses},
                          {"flips", rep.flips},
                          {"quality_min", rep.quality_min},
                          {"quality_mean", rep.quality_mean},
                          {"quality_low", rep.quality_low}};
        if (!rep.converged)
          std::clog << "warning: remesher stopped after " << rep.sweeps << " sweeps with " << rep.fraction_in_band
                    << " of edges in the length band\n";
      } else {
        const std::string suffix = tag + (attempt ? "_" + std::to_string(attempt) : std::string());
        const fs::path in_prefix = sink.dir / ("remesh_in_" + suffix);
        const fs::path out_prefix = sink.dir / ("remesh_out_" + suffix);
        try {
          interchange_write(in_prefix.string(), hp.mesh, m);
          external(in_prefix.string(), out_prefix.string());
          c.mesh = interchange_read(out_prefix.string());
        } catch (const Error& e) {
          throw RemeshError(std::string("external mesher failed: ") + e.what());
        }
      }
      c.p = transfer_orders(hp.mesh, p_opt, c.mesh);
      for (int q : c.p) c.complexity += scalar_dofs(q);
      return c;
    };
    // Meshers only approximate the requested density and p transfer adds its
    // own bias, so the metric is rescaled until the new mesh meets the target.
    double scale = 1.0;
    Candidate best = build(scale, 0);
    nlohmann::json attempts = nlohmann::json::array({{{"scale", scale}, {"complexity", best.complexity}}});
    for (int attempt = 1; cfg.calibrate && attempt < 4; ++attempt) {
      const double ratio = target / attempts.back()["complexity"].get<double>();
      if (std::abs(ratio - 1.0) <= 0.05) break;
      scale *= ratio;
      Candidate c = build(scale, attempt);
      attempts.push_back({{"scale", scale}, {"complexity", c.complexity}});
      if (std::abs(std::log(c.complexity / target)) < std::abs(std::log(best.complexity / target))) best = std::move(c);
    }
    info["calibration"] = attempts;
    sink.manifest["iterations"].push_back(info);
    sink.flush(records);
    hp = HpMesh(std::move(best.mesh), std::move(best.p), cfg.p_max);
  }
  return result;
}

// ---------------------------------------------------------------- verify

std::vector<VerifyItem> verify_invariants(int threads) {
  std::vector<VerifyItem> out;
  auto add = [&](std::string name, bool pass, double value) {
    out.push_back({std::move(name), pass, "value " + num(value)});
  };

  // Quadratic solution of a convection-diffusion problem is reproduced at p = 2.
  UltraWeakProblem pde;
  pde.convection = {1.0, 0.5};
  pde.diffusion = 0.3;
  pde.exact = [](const Vec2& x) { return x.x * x.x + x.x * x.y - 0.5 * x.y; };
  pde.exact_grad = [](const Vec2& x) { return Vec2{2.0 * x.x + x.y, x.x - 0.5}; };
  pde.source = [](const Vec2& x) { return (2.0 * x.x + x.y) + 0.5 * (x.x - 0.5) - 0.3 * 2.0; };
  pde.dirichlet = [pde](const Vec2& x, const Vec2&, int) { return pde.exact(x); };
  SolveOptions so;
  so.threads = threads;
  GlobalSolution s = solve_global(HpMesh(make_unit_square(3), 2), pde, so);
  estimate_errors(s, threads);
  const FieldErrors fe = field_errors(s);
  add("exactness: relative L2 error of a quadratic at p = 2", fe.l2 / fe.l2_exact < 1e-9, fe.l2 / fe.l2_exact);
  add("exactness: energy estimate of a quadratic at p = 2", energy_error(s).total < 1e-8, energy_error(s).total);

  // Estimator identity c^T G c = r^T c.
  const ProblemSpec bl = make_problem("boundary_layer");
  GlobalSolution b = solve_global(HpMesh(make_unit_square(4), 2), bl.pde, so);
  estimate_errors(b, threads);
  double worst = 0.0;
  for (const auto& r : b.reps) {
    const double rc = r.residual.dot(r.coeffs);
    worst = std::max(worst, std::abs(r.energy_sq - rc) / std::max(std::abs(rc), 1e-300));
  }
  add("estimator identity on 32 boundary-layer elements", worst < 1e-12, worst);

  // Interchange round trip.
  const Triangulation m = make_lshape(2);
  std::stringstream ss;
  write_bamg_mesh(ss, m);
  const Triangulation r = read_bamg_mesh(ss);
  bool same = r.num_vertices() == m.num_vertices() && r.num_triangles() == m.num_triangles();
  for (int v = 0; same && v < m.num_vertices(); ++v) same = r.vertex(v).x == m.vertex(v).x && r.vertex(v).y == m.vertex(v).y;
  add("mesh interchange round trip", same, same ? 0.0 : 1.0);

  // Density optimizer meets the complexity target.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  ContinuousModel model;
  for (int k = 0; k < 64; ++k) {
    model.area.push_back(0.01 + 0.02 * U(rng));
    model.p.push_back(1 + static_cast<int>(U(rng) * 5));
    model.abar.push_back(std::pow(10.0, -6.0 + 6.0 * U(rng)));
  }
  model.n_target = 5000.0;
  const DensityField d = compute_density(model);
  const double rel = std::abs(d.complexity - model.n_target) / model.n_target;
  add("density optimizer complexity within 0.5%", rel < 5e-3, rel);
  return out;
}

} // namespace hpdpg
