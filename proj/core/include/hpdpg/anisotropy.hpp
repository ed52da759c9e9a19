#pragma once

#include <vector>

#include "hpdpg/dpg.hpp"

namespace hpdpg {

/// Bivariate polynomial sum c_ij s^i t^j over i + j <= degree, stored by total
/// degree: (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
struct Poly2 {
  int degree = 0;
  std::vector<double> coeffs;

  static int size(int degree) { return (degree + 1) * (degree + 2) / 2; }
  static int index(int i, int j) { return (i + j) * (i + j + 1) / 2 + j; }
  double eval(double s, double t) const;
};

/// Directional error surrogate q(x) = sum_c f_c(s)^2 with s = (x - center)/scale.
struct LocalErrorModel {
  int element = -1;
  Vec2 center;
  double scale = 1.0;
  double density = 1.0; // current d, fixes the ellipse area pi/d
  std::vector<Poly2> components;

  double eval(const Vec2& x) const;
  int degree() const;
  bool is_zero() const;
};

/// Builds q from the enriched (degree > p) part of the error representation of
/// element k: the scalar part and both vector components.
LocalErrorModel build_error_model(const GlobalSolution& solution, int k);

/// int over the ellipse centered at the model center with long axis at angle
/// theta, semi-axes sqrt(beta/d) and sqrt(1/(beta d)).
double anisotropy_bound(const LocalErrorModel& model, double beta, double theta);

struct AnisotropyOptions {
  double beta_max = 100.0;
  int theta_samples = 32;
  int beta_samples = 16;
  int max_outer = 10;
  double rel_tol = 1e-3;
};

struct AnisotropyResult {
  double beta = 1.0;
  double theta = 0.0;
  double bound = 0.0;
  bool capped = false;  // beta reached beta_max
  bool skipped = false; // isotropic without search
};

AnisotropyResult optimize_anisotropy(const LocalErrorModel& model, const AnisotropyOptions& options = {});

/// Per-element optimization; elements with eta_k below 1e-14 max eta stay isotropic.
std::vector<AnisotropyResult> compute_anisotropy(const GlobalSolution& solution, const AnisotropyOptions& options = {},
                                                 int threads = 1);

} // namespace hpdpg
