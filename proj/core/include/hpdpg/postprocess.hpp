#pragma once

#include <iosfwd>

#include "hpdpg/dpg.hpp"

namespace hpdpg {

/// Errors of the field variables against the exact solution. The H1 seminorm
/// uses the broken gradient of u_h.
struct FieldErrors {
  double l2 = 0.0;
  double linf = 0.0;
  double h1_semi = 0.0;
  double h1 = 0.0;
  double l2_exact = 0.0; // ||u||_L2, for relative errors
};

/// Requires problem.exact; gradients are used when problem.exact_grad is set.
FieldErrors field_errors(const GlobalSolution& solution, int extra_degree = 6);

/// Physical gradient of u_h on element k at a reference point.
Vec2 eval_grad_u(const GlobalSolution& solution, int k, const Vec2& ref);
/// Divergence of sigma_h on element k at a reference point.
double eval_div_sigma(const GlobalSolution& solution, int k, const Vec2& ref);

/// Rows: element, p, area, eta.
void write_element_csv(std::ostream& out, const GlobalSolution& solution);

/// Samples u_h on an nx-by-ny raster over the bounding box; points outside
/// the mesh are skipped. Rows: x, y, u.
void write_solution_raster(std::ostream& out, const GlobalSolution& solution, int nx, int ny);

} // namespace hpdpg
