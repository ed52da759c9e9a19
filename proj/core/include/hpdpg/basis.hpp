#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <vector>

#include "hpdpg/quadrature.hpp"
#include "hpdpg/types.hpp"

namespace hpdpg {

// Field and test spaces use the orthonormal Dubiner basis of the reference
// triangle, enumerated by total degree: index i belongs to degree
// dubiner_degree(i), and the first dubiner_dim(p) functions span P_p. The
// reference mass matrix is the identity.

int dubiner_dim(int p);
int dubiner_degree(int index);

/// Values and reference gradients of all Dubiner functions up to order p at a
/// reference point. The point may lie outside the triangle (plain polynomial
/// evaluation); out spans must hold dubiner_dim(p) entries.
void eval_dubiner(int p, const Vec2& ref, std::span<double> value, std::span<double> d_xi, std::span<double> d_eta);

/// Edge basis on t in [0,1]. Trace (continuous, order r): entry 0 is 1-t, entry 1
/// is t, then r-1 bubbles. Flux (discontinuous, order r): Legendre P_0..P_r.
void eval_trace_basis(int order, double t, std::span<double> out);
void eval_flux_basis(int order, double t, std::span<double> out);
inline int trace_dim(int order) { return order + 1; }
inline int flux_dim(int order) { return order + 1; }

enum class BasisKind { FieldScalar, FieldVector, Trace, Flux, TestH1, TestHdiv };

/// Basis description with evaluation tables at the points of a quadrature rule.
struct ReferenceBasis {
  int order = 0;
  BasisKind kind = BasisKind::FieldScalar;
  /// Number of scalar generating functions; vector kinds have 2*size() functions.
  int size() const;
  int components() const { return (kind == BasisKind::FieldVector || kind == BasisKind::TestHdiv) ? 2 : 1; }

  /// Tables (rows = quadrature points, columns = generating functions). For
  /// edge kinds the rule's x coordinate is the edge parameter.
  Eigen::MatrixXd value;
  Eigen::MatrixXd d_xi;
  Eigen::MatrixXd d_eta;
};

ReferenceBasis make_reference_basis(BasisKind kind, int order, const QuadratureRule& rule);

struct BasisValues {
  std::vector<double> value;
  std::vector<Vec2> grad;
};

/// Evaluates the generating functions of a 2D basis at a barycentric point of
/// the closed reference triangle. Throws Error when the point lies outside.
BasisValues eval_basis(const ReferenceBasis& basis, const std::array<double, 3>& barycentric);

/// Upper bound on trace orders the precomputed edge tables support.
inline constexpr int kMaxTraceOrder = 16;

/// Precomputed reference integrals for a test order q.
struct ReferenceTables {
  int q = 0;
  int nv = 0;
  /// stiff[a][b](i,j) = int d_a phi_i d_b phi_j over the reference triangle.
  std::array<std::array<Eigen::MatrixXd, 2>, 2> stiff;
  /// conv[a](i,j) = int d_a phi_i phi_j.
  std::array<Eigen::MatrixXd, 2> conv;
  /// Edge integrals int_0^1 phi_i(x(t)) chi_m(t) dt for reference edge e and
  /// orientation o (o = 0: t runs from local vertex (e+1)%3 to (e+2)%3).
  std::array<std::array<Eigen::MatrixXd, 2>, 3> trace;
  std::array<std::array<Eigen::MatrixXd, 2>, 3> flux;
};

const ReferenceTables& reference_tables(int q);

/// Dubiner values and reference derivatives at the points of a rule; cached.
struct PointTable {
  int q = 0;
  const QuadratureRule* rule = nullptr;
  Eigen::MatrixXd value;
  Eigen::MatrixXd d_xi;
  Eigen::MatrixXd d_eta;
};

const PointTable& point_table(int q, int degree);

/// Reference coordinates of the point at parameter t on local edge e with
/// orientation o.
Vec2 reference_edge_point(int local_edge, int orientation, double t);

} // namespace hpdpg
