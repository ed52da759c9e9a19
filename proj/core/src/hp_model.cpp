#include "hpdpg/hp_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "hpdpg/parallel.hpp"

namespace hpdpg {

double density_weight(int p) { return 2.0 * (p + 1) * (p + 2) / (3.0 * std::sqrt(3.0)); }

double solve_patch_at_order(const GlobalSolution& global, const Patch& patch, int q, const SolveOptions& options) {
  const Triangulation& gm = global.hp.mesh;
  std::unordered_map<int, int> vmap;
  std::vector<Vec2> verts;
  std::vector<std::array<int, 3>> tris;
  for (int k : patch.members) {
    std::array<int, 3> t{};
    for (int i = 0; i < 3; ++i) {
      const int v = gm.triangle(k)[static_cast<std::size_t>(i)];
      auto [it, inserted] = vmap.emplace(v, static_cast<int>(verts.size()));
      if (inserted) verts.push_back(gm.vertex(v));
      t[static_cast<std::size_t>(i)] = it->second;
    }
    tris.push_back(t);
  }
  Triangulation local(std::move(verts), std::move(tris), {});
  // Local edge -> global edge through the owning triangle and local index.
  std::vector<int> gedge(static_cast<std::size_t>(local.num_edges()));
  for (int e = 0; e < local.num_edges(); ++e) {
    const Edge& ed = local.edge(e);
    const int gk = patch.members[static_cast<std::size_t>(ed.tri[0])];
    gedge[static_cast<std::size_t>(e)] = gm.triangle_edges(gk)[static_cast<std::size_t>(ed.local[0])];
  }
  const UltraWeakProblem& pb = global.problem;
  TraceSource traces = [&](int e, const Vec2& x) {
    const int ge = gedge[static_cast<std::size_t>(e)];
    const Edge& ged = gm.edge(ge);
    if (ged.boundary && global.layout.dirichlet_edge[static_cast<std::size_t>(ge)])
      return pb.eval_dirichlet(x, gm.outward_normal(ged.tri[0], ged.local[0]), ged.tag);
    return global.eval_trace(ge, x);
  };
  SolveOptions opt = options;
  opt.threads = 1;
  opt.condense = false;
  GlobalSolution s = solve_global(HpMesh(std::move(local), q), pb, opt, traces);
  return std::sqrt(error_representation(s, 0).energy_sq);
}

OrderSelection select_order(int p, const std::array<double, 3>& energy, const std::array<bool, 3>& available) {
  OrderSelection sel;
  sel.p_old = p;
  sel.energy = energy;
  sel.available = available;
  for (int i = 0; i < 3; ++i) {
    const int q = p + i - 1;
    sel.orders[static_cast<std::size_t>(i)] = q;
    sel.cost[static_cast<std::size_t>(i)] = 0.5 * (q + 1) * (q + 2);
  }
  sel.p_opt = p;
  sel.energy_opt = energy[1];
  const double ep = energy[1];
  if (!available[1] || !(ep > 0.0)) {
    sel.m.fill(std::numeric_limits<double>::quiet_NaN());
    sel.m[1] = sel.cost[1];
    return sel;
  }
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const auto si = static_cast<std::size_t>(i);
    if (!available[si]) {
      sel.m[si] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const int s = sel.orders[si] + 1;
    sel.m[si] = i == 1 ? sel.cost[si] : std::pow(energy[si] / ep, 2.0 / (s + 1)) * sel.cost[si];
    if (sel.m[si] < best) {
      best = sel.m[si];
      sel.p_opt = sel.orders[si];
      sel.energy_opt = energy[si];
    }
  }
  return sel;
}

std::vector<OrderSelection> select_orders(const GlobalSolution& global, const SolveOptions& options, int p_min, int p_max,
                                          PatchAdjacency adjacency) {
  const int nt = global.hp.mesh.num_triangles();
  std::vector<OrderSelection> out(static_cast<std::size_t>(nt));
  parallel_for(0, nt, options.threads, [&](int k) {
    const int p = global.hp.p[static_cast<std::size_t>(k)];
    const Patch patch = build_patch(global.hp, k, adjacency);
    std::array<double, 3> energy{};
    std::array<bool, 3> avail{};
    for (int i = 0; i < 3; ++i) {
      const int q = p + i - 1;
      if (q < p_min || q > p_max) continue;
      try {
        energy[static_cast<std::size_t>(i)] = solve_patch_at_order(global, patch, q, options);
        avail[static_cast<std::size_t>(i)] = true;
      } catch (const SolverError&) {
      } catch (const GeometryError&) {
      }
    }
    if (!avail[1]) {
      // Fall back to the global estimate at the current order.
      energy[1] = global.eta.empty() ? 0.0 : global.eta[static_cast<std::size_t>(k)];
      avail[1] = true;
    }
    OrderSelection sel = select_order(p, energy, avail);
    sel.element = k;
    out[static_cast<std::size_t>(k)] = sel;
  });
  return out;
}

double compute_abar(AdaptMode mode, double energy, double star, double area, int p) {
  const double num = mode == AdaptMode::Energy ? energy * energy : star * energy;
  return num / std::pow(area, p + 2);
}

double model_complexity(const ContinuousModel& m, double c) {
  double n = 0.0;
  for (std::size_t k = 0; k < m.abar.size(); ++k) {
    if (!(m.abar[k] > 0.0)) continue;
    const int p = m.p[k];
    const double w = density_weight(p);
    const double e = 1.0 / (p + 2);
    n += m.area[k] * w * std::pow((p + 1) * m.abar[k] * std::pow(kAlpha, p + 1) / w, e) * std::pow(c, -e);
  }
  return n;
}

namespace {

double fixed_cost(const ContinuousModel& m) {
  double n = 0.0;
  for (std::size_t k = 0; k < m.abar.size(); ++k)
    if (!(m.abar[k] > 0.0)) n += 0.5 * (m.p[k] + 1) * (m.p[k] + 2);
  return n;
}

} // namespace

double bisect_const(const ContinuousModel& m) {
  if (m.abar.size() != m.area.size() || m.abar.size() != m.p.size()) throw Error("bisect_const: inconsistent model sizes");
  if (std::none_of(m.abar.begin(), m.abar.end(), [](double a) { return a > 0.0; }))
    throw Error("bisect_const: all error densities are zero");
  const double target = m.n_target - fixed_cost(m);
  if (!(target > 0.0)) throw Error("bisect_const: target complexity below the cost of zero-error elements");
  // model_complexity is decreasing in c; bisect in log c.
  double lo = std::log(1e-20), hi = std::log(1e20);
  while (model_complexity(m, std::exp(lo)) < target && lo > -2000.0) lo -= 20.0;
  while (model_complexity(m, std::exp(hi)) > target && hi < 2000.0) hi += 20.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (model_complexity(m, std::exp(mid)) > target) lo = mid;
    else hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

DensityField optimal_density(const ContinuousModel& m, double c) {
  DensityField f;
  f.constant = c;
  f.density.resize(m.abar.size());
  for (std::size_t k = 0; k < m.abar.size(); ++k) {
    const int p = m.p[k];
    const double w = density_weight(p);
    if (m.abar[k] > 0.0) {
      const double e = 1.0 / (p + 2);
      f.density[k] = std::pow((p + 1) * m.abar[k] * std::pow(kAlpha, p + 1) / w, e) * std::pow(c, -e);
    } else {
      f.density[k] = kAlpha / m.area[k];
    }
    f.complexity += w * f.density[k] * m.area[k];
  }
  return f;
}

DensityField compute_density(const ContinuousModel& m) { return optimal_density(m, bisect_const(m)); }

std::vector<MetricTensor> element_metrics(const std::vector<double>& density, const std::vector<AnisotropyResult>& aniso) {
  std::vector<MetricTensor> out(density.size());
  for (std::size_t k = 0; k < density.size(); ++k) {
    const AnisotropyResult a = k < aniso.size() ? aniso[k] : AnisotropyResult{};
    out[k] = metric_compose({a.theta, a.beta, density[k]});
  }
  return out;
}

std::vector<MetricTensor> vertex_metrics(const Triangulation& mesh, const std::vector<MetricTensor>& element) {
  std::vector<MetricTensor> out(static_cast<std::size_t>(mesh.num_vertices()));
  std::vector<MetricTensor> buf;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    buf.clear();
    for (int k : mesh.vertex_triangles(v)) buf.push_back(element[static_cast<std::size_t>(k)]);
    out[static_cast<std::size_t>(v)] = buf.empty() ? MetricTensor{} : log_euclidean_mean(buf);
  }
  return out;
}

} // namespace hpdpg
