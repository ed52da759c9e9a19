#pragma once

#include <limits>
#include <optional>
#include <string>

#include "hpdpg/dpg_star.hpp"
#include "hpdpg/mesh.hpp"

namespace hpdpg {

enum class Domain { UnitSquare, LShape };

struct ProblemParams {
  double epsilon = std::numeric_limits<double>::quiet_NaN(); // NaN selects the case default
  double alpha = std::numeric_limits<double>::quiet_NaN();
  Vec2 center{0.99, 0.5};
};

struct ProblemSpec {
  std::string name;
  Domain domain = Domain::UnitSquare;
  double epsilon = 1.0;
  double alpha = 0.0;
  UltraWeakProblem pde;
  std::optional<TargetFunctional> target;
  double target_exact = std::numeric_limits<double>::quiet_NaN();
};

/// Cases: boundary_layer, gaussian_peak, atan_flux, lshape, poisson_sine.
/// Throws ConfigError for unknown cases or invalid parameters.
ProblemSpec make_problem(const std::string& name, const ProblemParams& params = {});

/// Uniform starting mesh of the problem's domain.
Triangulation make_domain_mesh(Domain domain, int cells);

/// Boundary layer profile t + (e^{t/eps}-1)/(1-e^{1/eps}) and its derivatives.
double layer_profile(double t, double eps);
double layer_profile_d1(double t, double eps);
double layer_profile_d2(double t, double eps);

} // namespace hpdpg
