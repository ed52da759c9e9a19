#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "hpdpg/layout.hpp"
#include "hpdpg/mesh.hpp"
#include "hpdpg/problem.hpp"

namespace hpdpg {

/// Affine element map x = P0 + J xi with K = J^{-T}.
struct ElementGeometry {
  std::array<Vec2, 3> corners{};
  Eigen::Matrix2d jac;
  Eigen::Matrix2d inv_t;
  double det = 0.0; // 2 |k|
  double area = 0.0;
  std::array<double, 3> edge_len{};
  std::array<Vec2, 3> normal{};

  Vec2 map(const Vec2& ref) const;
  Vec2 to_reference(const Vec2& x) const;
};

ElementGeometry element_geometry(const Triangulation& mesh, int k);

/// Dirichlet data for the trace on edge `edge` of the mesh being solved, as a
/// function of the physical point.
using TraceSource = std::function<double(int edge, const Vec2& x)>;

enum class LinearSolver { SparseCholesky, ConjugateGradient };

struct SolveOptions {
  /// Test enrichment. With the flux at order p, delta_p = 1 leaves a flux
  /// kernel for odd p, so 2 is the default.
  int delta_p = 2;
  TrialOrders orders;
  bool condense = false;
  LinearSolver solver = LinearSolver::SparseCholesky;
  double cg_tolerance = 1e-12;
  int threads = 1;
};

/// Element-local DPG data: Gram of the enriched test space, trial-to-test
/// matrix and load. Test rows are ordered [v | tau_x | tau_y].
struct LocalSystem {
  int nv = 0; // scalar test dimension
  Eigen::MatrixXd gram;
  Eigen::MatrixXd b;
  Eigen::VectorXd load;
  ElementDofs dofs;
};

/// Gram matrix of the scaled V-norm on element k for test order q.
Eigen::MatrixXd gram_scaled_vnorm(const Triangulation& mesh, int k, int q);

LocalSystem assemble_local(const Triangulation& mesh, int k, const UltraWeakProblem& problem, const SpaceLayout& layout);

struct ErrorRepresentation {
  int element = -1;
  int nv = 0;
  /// phi_h = sum_j c_j psi_j over the test basis [v | tau_x | tau_y].
  Eigen::VectorXd coeffs;
  Eigen::VectorXd residual;
  /// c^T G c, equal to r^T c up to round-off.
  double energy_sq = 0.0;

  auto scalar_part() const { return coeffs.head(nv); }
  auto vector_x_part() const { return coeffs.segment(nv, nv); }
  auto vector_y_part() const { return coeffs.tail(nv); }
};

struct GlobalSolution {
  HpMesh hp;
  UltraWeakProblem problem;
  SpaceLayout layout;
  Eigen::VectorXd x;
  std::vector<ErrorRepresentation> reps; // filled by estimate_errors
  std::vector<double> eta;               // per element energy error

  /// Local coefficients of element k including flux signs.
  Eigen::VectorXd local_coeffs(int k) const;
  double eval_u(int k, const Vec2& ref) const;
  Vec2 eval_sigma(int k, const Vec2& ref) const;
  /// Global trace u-hat on edge e at physical point x (projected onto the edge).
  double eval_trace(int e, const Vec2& x) const;
  /// Normal flux sigma-hat on edge e with respect to the normal of edge.tri[0].
  double eval_flux(int e, const Vec2& x) const;
  int num_scalar_dofs() const { return layout.num_scalar_dofs(); }
};

/// Coefficients of the Dirichlet trace interpolant on one edge: vertex values
/// plus L2-projected bubbles (trace order r).
std::vector<double> interpolate_trace(const std::function<double(double)>& g, int order);

/// Minimum residual solve of the normal equations sum B^T G^-1 B x = sum B^T G^-1 l.
/// Throws SolverError when the assembled system is singular.
GlobalSolution solve_global(const HpMesh& mesh, const UltraWeakProblem& problem, const SolveOptions& options,
                            const TraceSource& traces = {},
                            const std::function<bool(const Edge&)>& is_dirichlet = {});

/// Riesz representative of the element residual: G c = B x_k - l.
ErrorRepresentation error_representation(const GlobalSolution& solution, int k);

/// Fills solution.reps and solution.eta for all elements.
void estimate_errors(GlobalSolution& solution, int threads = 1);

struct EnergyError {
  std::vector<double> per_element;
  double total = 0.0;
};

EnergyError energy_error(const GlobalSolution& solution);

/// The assembled normal-equation matrix over all non-Dirichlet dofs (no
/// condensation). Intended for verification of symmetry and definiteness.
Eigen::MatrixXd assemble_normal_matrix_dense(const HpMesh& mesh, const UltraWeakProblem& problem, const SolveOptions& options);

} // namespace hpdpg
