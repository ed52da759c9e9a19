#pragma once

#include <functional>
#include <vector>

#include "hpdpg/dpg.hpp"

namespace hpdpg {

enum class TargetKind { Volume, BoundaryFlux };

/// J(u) = int j_Omega u dx  (Volume)  or  int j_dOmega grad u . n ds  (BoundaryFlux).
struct TargetFunctional {
  TargetKind kind = TargetKind::Volume;
  ScalarField volume_weight;
  BoundaryField boundary_weight;
};

/// Dual problem -beta.grad z - eps lap z = j_Omega, z = j_dOmega on the boundary.
UltraWeakProblem make_dual_problem(const UltraWeakProblem& primal, const TargetFunctional& target);

/// Element-wise evaluation of (possibly discontinuous) dual fields at physical points.
struct DualFieldView {
  std::function<double(int k, const Vec2& x)> v;
  std::function<Vec2(int k, const Vec2& x)> grad_v;
  std::function<Vec2(int k, const Vec2& x)> tau;
  std::function<double(int k, const Vec2& x)> div_tau;
};

DualFieldView dual_field_view(const GlobalSolution& dual);

/// DPG-star indicator of element k for the dual problem `dual` (its convection is
/// already reversed, its source is j_Omega and its Dirichlet data j_dOmega).
double star_indicator(const Triangulation& mesh, int k, const DualFieldView& fields, const UltraWeakProblem& dual,
                      int degree);

struct DualSolution {
  GlobalSolution solution;
  std::vector<double> star; // eta*_k
};

DualSolution solve_dual(const HpMesh& mesh, const UltraWeakProblem& primal, const TargetFunctional& target,
                        const SolveOptions& options);

/// eta*_k times the primal energy error per element.
std::vector<double> goal_indicators(const std::vector<double>& star, const std::vector<double>& eta);
double dwr_estimate(const std::vector<double>& goal);

/// J(u_h). Volume targets integrate the field u_h; flux targets use the
/// discrete flux trace on the boundary, converted to grad u . n.
double evaluate_target(const GlobalSolution& solution, const TargetFunctional& target);

} // namespace hpdpg
