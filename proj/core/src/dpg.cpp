#include "hpdpg/dpg.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>
#include <algorithm>

#include "hpdpg/basis.hpp"
#include "hpdpg/parallel.hpp"
#include "hpdpg/quadrature.hpp"

namespace hpdpg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Vec2 ElementGeometry::map(const Vec2& ref) const {
  return {corners[0].x + jac(0, 0) * ref.x + jac(0, 1) * ref.y, corners[0].y + jac(1, 0) * ref.x + jac(1, 1) * ref.y};
}

Vec2 ElementGeometry::to_reference(const Vec2& x) const {
  const Vec2 d = x - corners[0];
  // J^{-1} = K^T
  return {inv_t(0, 0) * d.x + inv_t(1, 0) * d.y, inv_t(0, 1) * d.x + inv_t(1, 1) * d.y};
}

ElementGeometry element_geometry(const Triangulation& mesh, int k) {
  ElementGeometry g;
  g.corners = mesh.corners(k);
  const Vec2 a = g.corners[1] - g.corners[0];
  const Vec2 b = g.corners[2] - g.corners[0];
  g.jac << a.x, b.x, a.y, b.y;
  g.det = g.jac.determinant();
  if (!(g.det > 0.0)) throw GeometryError("element " + std::to_string(k) + " is degenerate or inverted");
  g.area = 0.5 * g.det;
  g.inv_t = g.jac.inverse().transpose();
  for (int i = 0; i < 3; ++i) {
    const Vec2 d = g.corners[static_cast<std::size_t>((i + 2) % 3)] - g.corners[static_cast<std::size_t>((i + 1) % 3)];
    const double len = norm(d);
    g.edge_len[static_cast<std::size_t>(i)] = len;
    g.normal[static_cast<std::size_t>(i)] = {d.y / len, -d.x / len};
  }
  return g;
}

namespace {

struct PhysicalBlocks {
  MatrixXd sxx, sxy, syy, cx, cy;
};

PhysicalBlocks physical_blocks(const ElementGeometry& g, const ReferenceTables& tab) {
  const auto& K = g.inv_t;
  PhysicalBlocks p;
  auto s = [&](int a, int b) {
    MatrixXd m = MatrixXd::Zero(tab.nv, tab.nv);
    for (int c = 0; c < 2; ++c)
      for (int d = 0; d < 2; ++d) {
        const double f = K(a, c) * K(b, d);
        if (f != 0.0) m.noalias() += f * tab.stiff[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)];
      }
    return MatrixXd(g.det * m);
  };
  p.sxx = s(0, 0);
  p.sxy = s(0, 1);
  p.syy = s(1, 1);
  p.cx = g.det * (K(0, 0) * tab.conv[0] + K(0, 1) * tab.conv[1]);
  p.cy = g.det * (K(1, 0) * tab.conv[0] + K(1, 1) * tab.conv[1]);
  return p;
}

MatrixXd gram_from_blocks(const ElementGeometry& g, const PhysicalBlocks& p, int nv) {
  const double w = std::sqrt(g.area);
  MatrixXd G = MatrixXd::Zero(3 * nv, 3 * nv);
  const MatrixXd mass = g.det * MatrixXd::Identity(nv, nv);
  G.block(0, 0, nv, nv) = mass + w * (p.sxx + p.syy);
  G.block(nv, nv, nv, nv) = mass + w * p.sxx;
  G.block(2 * nv, 2 * nv, nv, nv) = mass + w * p.syy;
  G.block(nv, 2 * nv, nv, nv) = w * p.sxy;
  G.block(2 * nv, nv, nv, nv) = w * p.sxy.transpose();
  return G;
}

/// Lower Cholesky factor of the block-diagonal Gram (v block, tau block).
struct GramFactor {
  int nv = 0;
  Eigen::LLT<MatrixXd> v;
  Eigen::LLT<MatrixXd> tau;

  explicit GramFactor(const MatrixXd& G, int nv_) : nv(nv_) {
    v.compute(G.topLeftCorner(nv, nv));
    tau.compute(G.bottomRightCorner(2 * nv, 2 * nv));
    if (v.info() != Eigen::Success || tau.info() != Eigen::Success)
      throw SolverError("Gram matrix is not positive definite");
  }
  /// L^{-1} X, row-blocked.
  template <class M>
  MatrixXd half_solve(const M& X) const {
    MatrixXd out(X.rows(), X.cols());
    out.topRows(nv) = v.matrixL().solve(X.topRows(nv));
    out.bottomRows(2 * nv) = tau.matrixL().solve(X.bottomRows(2 * nv));
    return out;
  }
  VectorXd solve(const VectorXd& r) const {
    VectorXd out(r.size());
    out.head(nv) = v.solve(r.head(nv));
    out.tail(2 * nv) = tau.solve(r.tail(2 * nv));
    return out;
  }
};

int vertex_at(int local_edge, int orientation, int end) {
  const int a = (local_edge + 1) % 3;
  const int b = (local_edge + 2) % 3;
  const int first = orientation == 0 ? a : b;
  const int second = orientation == 0 ? b : a;
  return end == 0 ? first : second;
}

} // namespace

MatrixXd gram_scaled_vnorm(const Triangulation& mesh, int k, int q) {
  const ElementGeometry g = element_geometry(mesh, k);
  const ReferenceTables& tab = reference_tables(q);
  return gram_from_blocks(g, physical_blocks(g, tab), tab.nv);
}

LocalSystem assemble_local(const Triangulation& mesh, int k, const UltraWeakProblem& problem, const SpaceLayout& layout) {
  const ElementGeometry g = element_geometry(mesh, k);
  const int q = layout.test_order(k);
  const ReferenceTables& tab = reference_tables(q);
  const int nv = tab.nv;
  const PhysicalBlocks pb = physical_blocks(g, tab);

  LocalSystem ls;
  ls.nv = nv;
  ls.dofs = element_dofs(mesh, layout, k);
  const ElementDofs& d = ls.dofs;
  const int nu = d.nu;
  ls.gram = gram_from_blocks(g, pb, nv);
  ls.b = MatrixXd::Zero(3 * nv, d.n_local);
  auto& B = ls.b;
  const double bx = problem.convection.x, by = problem.convection.y, eps = problem.diffusion;

  // u: (u, div tau) - (beta u, grad v)
  B.block(0, 0, nv, nu) = -(bx * pb.cx.leftCols(nu) + by * pb.cy.leftCols(nu));
  B.block(nv, 0, nv, nu) = pb.cx.leftCols(nu);
  B.block(2 * nv, 0, nv, nu) = pb.cy.leftCols(nu);
  // sigma: (sigma, tau) + eps (sigma, grad v)
  B.block(0, nu, nv, nu) = eps * pb.cx.leftCols(nu);
  B.block(0, 2 * nu, nv, nu) = eps * pb.cy.leftCols(nu);
  for (int j = 0; j < nu; ++j) {
    B(nv + j, nu + j) = g.det;
    B(2 * nv + j, 2 * nu + j) = g.det;
  }
  // Skeleton: -<u_hat, tau.n> and <sigma_hat_n, v>.
  for (int i = 0; i < 3; ++i) {
    const auto si = static_cast<std::size_t>(i);
    const int o = d.orientation[si];
    const double len = g.edge_len[si];
    const Vec2 n = g.normal[si];
    const MatrixXd& T = tab.trace[si][static_cast<std::size_t>(o)];
    const MatrixXd& F = tab.flux[si][static_cast<std::size_t>(o)];
    for (int end = 0; end < 2; ++end) {
      const int col = 3 * nu + vertex_at(i, o, end);
      B.block(nv, col, nv, 1) += -len * n.x * T.col(end);
      B.block(2 * nv, col, nv, 1) += -len * n.y * T.col(end);
    }
    const int nb = d.trace_order[si] - 1;
    for (int j = 0; j < nb; ++j) {
      const int col = d.bubble_start[si] + j;
      B.block(nv, col, nv, 1) = -len * n.x * T.col(2 + j);
      B.block(2 * nv, col, nv, 1) = -len * n.y * T.col(2 + j);
    }
    const int nf = flux_dim(d.flux_order[si]);
    for (int j = 0; j < nf; ++j) B.block(0, d.flux_start[si] + j, nv, 1) = len * F.col(j);
  }

  ls.load = VectorXd::Zero(3 * nv);
  if (problem.source) {
    const PointTable& pt = point_table(q, std::min(kMaxQuadratureDegree, 2 * q + 2));
    const auto nq = static_cast<Eigen::Index>(pt.rule->size());
    VectorXd f(nq);
    for (Eigen::Index m = 0; m < nq; ++m)
      f(m) = pt.rule->weights[static_cast<std::size_t>(m)] * g.det * problem.source(g.map(pt.rule->points[static_cast<std::size_t>(m)]));
    ls.load.head(nv) = pt.value.transpose() * f;
  }
  return ls;
}

std::vector<double> interpolate_trace(const std::function<double(double)>& gfun, int order) {
  std::vector<double> c(static_cast<std::size_t>(order + 1), 0.0);
  c[0] = gfun(0.0);
  c[1] = gfun(1.0);
  const int nb = order - 1;
  if (nb <= 0) return c;
  const LineRule& rule = line_rule(2 * order + 12);
  MatrixXd M = MatrixXd::Zero(nb, nb);
  VectorXd rhs = VectorXd::Zero(nb);
  std::vector<double> phi(static_cast<std::size_t>(order + 1));
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const double t = rule.points[q];
    eval_trace_basis(order, t, phi);
    const double h = gfun(t) - c[0] * (1.0 - t) - c[1] * t;
    for (int a = 0; a < nb; ++a) {
      rhs(a) += rule.weights[q] * h * phi[static_cast<std::size_t>(2 + a)];
      for (int b = 0; b < nb; ++b)
        M(a, b) += rule.weights[q] * phi[static_cast<std::size_t>(2 + a)] * phi[static_cast<std::size_t>(2 + b)];
    }
  }
  const VectorXd sol = M.llt().solve(rhs);
  for (int a = 0; a < nb; ++a) c[static_cast<std::size_t>(2 + a)] = sol(a);
  return c;
}

namespace {

struct ElementContribution {
  std::vector<int> rows;     // free global index per retained local dof
  std::vector<double> sign;
  MatrixXd a;                // in retained local dofs
  VectorXd b;
  // Static condensation recovery: x_F = y - X x_T.
  MatrixXd recover_x;
  VectorXd recover_y;
  std::vector<int> trace_local; // local dof index for each retained dof
};

struct NormalPieces {
  MatrixXd a; // B^T G^-1 B
  VectorXd b; // B^T G^-1 l
};

NormalPieces normal_pieces(const LocalSystem& ls) {
  const GramFactor fac(ls.gram, ls.nv);
  const MatrixXd Y = fac.half_solve(ls.b);
  const MatrixXd z = fac.half_solve(ls.load);
  NormalPieces np;
  np.a = MatrixXd::Zero(Y.cols(), Y.cols());
  np.a.selfadjointView<Eigen::Lower>().rankUpdate(Y.transpose());
  np.a = np.a.selfadjointView<Eigen::Lower>();
  np.b = Y.transpose() * z.col(0);
  return np;
}

} // namespace

Eigen::VectorXd GlobalSolution::local_coeffs(int k) const {
  const ElementDofs d = element_dofs(hp.mesh, layout, k);
  VectorXd out(d.n_local);
  for (int i = 0; i < d.n_local; ++i)
    out(i) = d.sign[static_cast<std::size_t>(i)] * x(d.global[static_cast<std::size_t>(i)]);
  return out;
}

double GlobalSolution::eval_u(int k, const Vec2& ref) const {
  const int p = layout.elem_order[static_cast<std::size_t>(k)];
  const int nu = dubiner_dim(p);
  std::vector<double> v(static_cast<std::size_t>(nu)), dx(static_cast<std::size_t>(nu)), dy(static_cast<std::size_t>(nu));
  eval_dubiner(p, ref, v, dx, dy);
  const int off = layout.field_offset[static_cast<std::size_t>(k)];
  double s = 0.0;
  for (int i = 0; i < nu; ++i) s += x(off + i) * v[static_cast<std::size_t>(i)];
  return s;
}

Vec2 GlobalSolution::eval_sigma(int k, const Vec2& ref) const {
  const int p = layout.elem_order[static_cast<std::size_t>(k)];
  const int nu = dubiner_dim(p);
  std::vector<double> v(static_cast<std::size_t>(nu)), dx(static_cast<std::size_t>(nu)), dy(static_cast<std::size_t>(nu));
  eval_dubiner(p, ref, v, dx, dy);
  const int off = layout.field_offset[static_cast<std::size_t>(k)];
  Vec2 s;
  for (int i = 0; i < nu; ++i) {
    s.x += x(off + nu + i) * v[static_cast<std::size_t>(i)];
    s.y += x(off + 2 * nu + i) * v[static_cast<std::size_t>(i)];
  }
  return s;
}

double GlobalSolution::eval_trace(int e, const Vec2& pt) const {
  const Edge& ed = hp.mesh.edge(e);
  const Vec2 a = hp.mesh.vertex(ed.v[0]);
  const Vec2 b = hp.mesh.vertex(ed.v[1]);
  const double t = std::clamp(dot(pt - a, b - a) / dot(b - a, b - a), 0.0, 1.0);
  const int r = layout.trace_order(e);
  std::vector<double> phi(static_cast<std::size_t>(r + 1));
  eval_trace_basis(r, t, phi);
  double s = x(layout.vertex_offset[static_cast<std::size_t>(ed.v[0])]) * phi[0] +
             x(layout.vertex_offset[static_cast<std::size_t>(ed.v[1])]) * phi[1];
  for (int j = 0; j < r - 1; ++j) s += x(layout.bubble_offset[static_cast<std::size_t>(e)] + j) * phi[static_cast<std::size_t>(2 + j)];
  return s;
}

double GlobalSolution::eval_flux(int e, const Vec2& pt) const {
  const Edge& ed = hp.mesh.edge(e);
  const Vec2 a = hp.mesh.vertex(ed.v[0]);
  const Vec2 b = hp.mesh.vertex(ed.v[1]);
  const double t = std::clamp(dot(pt - a, b - a) / dot(b - a, b - a), 0.0, 1.0);
  const int r = layout.flux_order(e);
  std::vector<double> phi(static_cast<std::size_t>(r + 1));
  eval_flux_basis(r, t, phi);
  double s = 0.0;
  for (int j = 0; j <= r; ++j) s += x(layout.flux_offset[static_cast<std::size_t>(e)] + j) * phi[static_cast<std::size_t>(j)];
  return s;
}

namespace {

VectorXd dirichlet_values(const HpMesh& hp, const SpaceLayout& L, const UltraWeakProblem& problem, const TraceSource& traces) {
  const Triangulation& m = hp.mesh;
  VectorXd x = VectorXd::Zero(L.num_dofs);
  std::vector<char> vertex_set(static_cast<std::size_t>(m.num_vertices()), 0);
  for (int e = 0; e < m.num_edges(); ++e) {
    if (!L.dirichlet_edge[static_cast<std::size_t>(e)]) continue;
    const Edge& ed = m.edge(e);
    const Vec2 a = m.vertex(ed.v[0]);
    const Vec2 b = m.vertex(ed.v[1]);
    const Vec2 n = m.outward_normal(ed.tri[0], ed.local[0]);
    std::function<double(double)> g;
    if (traces) g = [&](double t) { return traces(e, a + (b - a) * t); };
    else g = [&](double t) { return problem.eval_dirichlet(a + (b - a) * t, n, ed.tag); };
    const auto c = interpolate_trace(g, L.trace_order(e));
    for (int end = 0; end < 2; ++end) {
      const int v = ed.v[static_cast<std::size_t>(end)];
      if (!vertex_set[static_cast<std::size_t>(v)]) {
        x(L.vertex_offset[static_cast<std::size_t>(v)]) = c[static_cast<std::size_t>(end)];
        vertex_set[static_cast<std::size_t>(v)] = 1;
      }
    }
    for (int j = 0; j < L.num_bubbles(e); ++j) x(L.bubble_offset[static_cast<std::size_t>(e)] + j) = c[static_cast<std::size_t>(2 + j)];
  }
  return x;
}

ElementContribution contribution(const Triangulation& m, const SpaceLayout& L, const UltraWeakProblem& problem, int k,
                                 const VectorXd& xd, const std::vector<int>& free_index, bool condense) {
  const LocalSystem ls = assemble_local(m, k, problem, L);
  NormalPieces np = normal_pieces(ls);
  const ElementDofs& d = ls.dofs;
  const int n = d.n_local;
  // Move known Dirichlet values to the right-hand side.
  VectorXd xloc_d = VectorXd::Zero(n);
  std::vector<char> fixed(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const int gi = d.global[static_cast<std::size_t>(i)];
    if (L.dirichlet_dof[static_cast<std::size_t>(gi)]) {
      fixed[static_cast<std::size_t>(i)] = 1;
      xloc_d(i) = d.sign[static_cast<std::size_t>(i)] * xd(gi);
    }
  }
  VectorXd b = np.b - np.a * xloc_d;

  ElementContribution c;
  std::vector<int> keep;
  const int nfield = 3 * d.nu;
  for (int i = condense ? nfield : 0; i < n; ++i)
    if (!fixed[static_cast<std::size_t>(i)]) keep.push_back(i);
  const auto nk = static_cast<Eigen::Index>(keep.size());

  if (condense) {
    const MatrixXd Aff = np.a.topLeftCorner(nfield, nfield);
    MatrixXd Aft(nfield, nk);
    for (Eigen::Index j = 0; j < nk; ++j) Aft.col(j) = np.a.block(0, keep[static_cast<std::size_t>(j)], nfield, 1);
    Eigen::LLT<MatrixXd> llt(Aff);
    if (llt.info() != Eigen::Success) throw SolverError("element " + std::to_string(k) + ": field block is singular");
    c.recover_x = llt.solve(Aft);
    c.recover_y = llt.solve(b.head(nfield));
    c.a.resize(nk, nk);
    c.b.resize(nk);
    for (Eigen::Index i = 0; i < nk; ++i) {
      c.b(i) = b(keep[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < nk; ++j) c.a(i, j) = np.a(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
    }
    c.a.noalias() -= Aft.transpose() * c.recover_x;
    c.b.noalias() -= Aft.transpose() * c.recover_y;
    c.a = 0.5 * (c.a + c.a.transpose()).eval();
  } else {
    c.a.resize(nk, nk);
    c.b.resize(nk);
    for (Eigen::Index i = 0; i < nk; ++i) {
      c.b(i) = b(keep[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < nk; ++j) c.a(i, j) = np.a(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
    }
  }
  c.trace_local = keep;
  for (int i : keep) {
    const int gi = d.global[static_cast<std::size_t>(i)];
    c.rows.push_back(free_index[static_cast<std::size_t>(gi)]);
    c.sign.push_back(d.sign[static_cast<std::size_t>(i)]);
  }
  return c;
}

} // namespace

GlobalSolution solve_global(const HpMesh& hp, const UltraWeakProblem& problem, const SolveOptions& options,
                            const TraceSource& traces, const std::function<bool(const Edge&)>& is_dirichlet) {
  problem.validate();
  GlobalSolution sol;
  sol.hp = hp;
  sol.problem = problem;
  sol.layout = build_layout(hp, options.delta_p, options.orders, is_dirichlet);
  const SpaceLayout& L = sol.layout;
  const Triangulation& m = hp.mesh;
  VectorXd x = dirichlet_values(hp, L, problem, traces);

  std::vector<int> free_index(static_cast<std::size_t>(L.num_dofs), -1);
  int nfree = 0;
  for (int i = options.condense ? L.num_field_dofs : 0; i < L.num_dofs; ++i)
    if (!L.dirichlet_dof[static_cast<std::size_t>(i)]) free_index[static_cast<std::size_t>(i)] = nfree++;

  const int nt = m.num_triangles();
  std::vector<Eigen::Triplet<double>> trip;
  VectorXd rhs = VectorXd::Zero(nfree);
  std::vector<MatrixXd> rec_x;
  std::vector<VectorXd> rec_y;
  std::vector<std::vector<int>> rec_cols;
  if (options.condense) {
    rec_x.resize(static_cast<std::size_t>(nt));
    rec_y.resize(static_cast<std::size_t>(nt));
    rec_cols.resize(static_cast<std::size_t>(nt));
  }
  constexpr int kChunk = 256;
  for (int lo = 0; lo < nt; lo += kChunk) {
    const int hi = std::min(nt, lo + kChunk);
    std::vector<ElementContribution> parts(static_cast<std::size_t>(hi - lo));
    parallel_for(lo, hi, options.threads, [&](int k) {
      parts[static_cast<std::size_t>(k - lo)] = contribution(m, L, problem, k, x, free_index, options.condense);
    });
    for (int k = lo; k < hi; ++k) {
      ElementContribution& c = parts[static_cast<std::size_t>(k - lo)];
      const auto n = c.rows.size();
      for (std::size_t i = 0; i < n; ++i) {
        rhs(c.rows[i]) += c.sign[i] * c.b(static_cast<Eigen::Index>(i));
        for (std::size_t j = 0; j < n; ++j)
          trip.emplace_back(c.rows[i], c.rows[j], c.sign[i] * c.sign[j] * c.a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
      if (options.condense) {
        rec_x[static_cast<std::size_t>(k)] = std::move(c.recover_x);
        rec_y[static_cast<std::size_t>(k)] = std::move(c.recover_y);
        rec_cols[static_cast<std::size_t>(k)] = std::move(c.trace_local);
      }
    }
  }

  Eigen::SparseMatrix<double> K(nfree, nfree);
  K.setFromTriplets(trip.begin(), trip.end());
  trip.clear();
  trip.shrink_to_fit();
  VectorXd y(nfree);
  if (nfree > 0) {
    if (options.solver == LinearSolver::SparseCholesky) {
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
      ldlt.compute(K);
      if (ldlt.info() != Eigen::Success) throw SolverError("global system factorization failed");
      const VectorXd D = ldlt.vectorD();
      if (!(D.minCoeff() > 1e-15 * D.cwiseAbs().maxCoeff()))
        throw SolverError("global system is singular (check boundary conditions)");
      y = ldlt.solve(rhs);
    } else {
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
      cg.setTolerance(options.cg_tolerance);
      cg.setMaxIterations(std::max(1000, 20 * nfree));
      cg.compute(K);
      y = cg.solve(rhs);
      if (cg.info() != Eigen::Success) throw SolverError("conjugate gradient did not converge");
    }
    if (!y.allFinite()) throw SolverError("global solve produced non-finite values");
    const double rn = (K * y - rhs).norm();
    if (rn > 1e-6 * std::max(rhs.norm(), 1e-300) && rhs.norm() > 0.0)
      throw SolverError("global system is singular (residual " + std::to_string(rn) + ")");
  }
  for (int i = 0; i < L.num_dofs; ++i)
    if (free_index[static_cast<std::size_t>(i)] >= 0) x(i) = y(free_index[static_cast<std::size_t>(i)]);

  if (options.condense) {
    for (int k = 0; k < nt; ++k) {
      const ElementDofs d = element_dofs(m, L, k);
      const auto& cols = rec_cols[static_cast<std::size_t>(k)];
      VectorXd xt(static_cast<Eigen::Index>(cols.size()));
      for (std::size_t j = 0; j < cols.size(); ++j) {
        const int li = cols[j];
        xt(static_cast<Eigen::Index>(j)) = d.sign[static_cast<std::size_t>(li)] * x(d.global[static_cast<std::size_t>(li)]);
      }
      const VectorXd xf = rec_y[static_cast<std::size_t>(k)] - rec_x[static_cast<std::size_t>(k)] * xt;
      for (int i = 0; i < 3 * d.nu; ++i) x(d.global[static_cast<std::size_t>(i)]) = xf(i);
    }
  }
  sol.x = std::move(x);
  return sol;
}

ErrorRepresentation error_representation(const GlobalSolution& sol, int k) {
  const LocalSystem ls = assemble_local(sol.hp.mesh, k, sol.problem, sol.layout);
  const GramFactor fac(ls.gram, ls.nv);
  ErrorRepresentation rep;
  rep.element = k;
  rep.nv = ls.nv;
  rep.residual = ls.b * sol.local_coeffs(k) - ls.load;
  rep.coeffs = fac.solve(rep.residual);
  rep.energy_sq = std::max(0.0, rep.residual.dot(rep.coeffs));
  return rep;
}

void estimate_errors(GlobalSolution& sol, int threads) {
  const int nt = sol.hp.mesh.num_triangles();
  sol.reps.assign(static_cast<std::size_t>(nt), {});
  sol.eta.assign(static_cast<std::size_t>(nt), 0.0);
  parallel_for(0, nt, threads, [&](int k) {
    sol.reps[static_cast<std::size_t>(k)] = error_representation(sol, k);
    sol.eta[static_cast<std::size_t>(k)] = std::sqrt(sol.reps[static_cast<std::size_t>(k)].energy_sq);
  });
}

EnergyError energy_error(const GlobalSolution& sol) {
  if (sol.eta.size() != static_cast<std::size_t>(sol.hp.mesh.num_triangles()))
    throw Error("energy_error: error representations not computed");
  EnergyError e;
  e.per_element = sol.eta;
  double s = 0.0;
  for (double v : sol.eta) s += v * v;
  e.total = std::sqrt(s);
  return e;
}

MatrixXd assemble_normal_matrix_dense(const HpMesh& hp, const UltraWeakProblem& problem, const SolveOptions& options) {
  const SpaceLayout L = build_layout(hp, options.delta_p, options.orders);
  std::vector<int> free_index(static_cast<std::size_t>(L.num_dofs), -1);
  int nfree = 0;
  for (int i = 0; i < L.num_dofs; ++i)
    if (!L.dirichlet_dof[static_cast<std::size_t>(i)]) free_index[static_cast<std::size_t>(i)] = nfree++;
  MatrixXd A = MatrixXd::Zero(nfree, nfree);
  const VectorXd xd = VectorXd::Zero(L.num_dofs);
  for (int k = 0; k < hp.mesh.num_triangles(); ++k) {
    const ElementContribution c = contribution(hp.mesh, L, problem, k, xd, free_index, false);
    for (std::size_t i = 0; i < c.rows.size(); ++i)
      for (std::size_t j = 0; j < c.rows.size(); ++j)
        A(c.rows[i], c.rows[j]) += c.sign[i] * c.sign[j] * c.a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return A;
}

} // namespace hpdpg
