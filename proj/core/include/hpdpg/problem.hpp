#pragma once

#include <functional>
#include <optional>

#include "hpdpg/types.hpp"

namespace hpdpg {

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;
/// Boundary data g(x) on an edge with outward unit normal n and boundary tag.
using BoundaryField = std::function<double(const Vec2& x, const Vec2& normal, int tag)>;

/// beta . grad u - eps lap u = s with Dirichlet data, written as the first
/// order system sigma = grad u, div(beta u - eps sigma) = s.
struct UltraWeakProblem {
  Vec2 convection{0.0, 0.0};
  double diffusion = 1.0;
  ScalarField source;       // empty means s = 0
  BoundaryField dirichlet;  // empty means g = 0
  ScalarField exact;        // optional, for error reporting
  VectorField exact_grad;   // optional

  double eval_source(const Vec2& x) const { return source ? source(x) : 0.0; }
  double eval_dirichlet(const Vec2& x, const Vec2& n, int tag) const { return dirichlet ? dirichlet(x, n, tag) : 0.0; }
  void validate() const {
    if (!(diffusion > 0.0)) throw ConfigError("diffusion must be positive");
  }
};

} // namespace hpdpg
