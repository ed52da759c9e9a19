#pragma once

#include <functional>
#include <vector>

#include "hpdpg/mesh.hpp"

namespace hpdpg {

/// Orders of the skeleton unknowns relative to the edge order
/// p_e = max(p over adjacent elements): trace u-hat at p_e + trace_offset,
/// normal flux sigma-hat at p_e + flux_offset.
struct TrialOrders {
  int trace_offset = 1;
  int flux_offset = 0;
};

/// Dof bookkeeping of the ultra-weak trial space and the enriched test space.
///
/// Global numbering: all element field blocks [u | sigma_x | sigma_y] first,
/// then one trace dof per vertex, then per edge the trace bubbles followed by
/// the flux coefficients.
struct SpaceLayout {
  int delta_p = 1;
  TrialOrders orders;

  std::vector<int> elem_order;     // p_k
  std::vector<int> field_offset;   // start of [u|sx|sy] of element k
  std::vector<int> vertex_offset;  // trace dof of vertex v
  std::vector<int> edge_order;     // p_e
  std::vector<int> bubble_offset;  // first trace bubble of edge e
  std::vector<int> flux_offset;    // first flux dof of edge e
  std::vector<char> dirichlet_edge;
  std::vector<char> dirichlet_dof;
  int num_field_dofs = 0;
  int num_dofs = 0;

  int trace_order(int e) const { return edge_order[static_cast<std::size_t>(e)] + orders.trace_offset; }
  int flux_order(int e) const { return edge_order[static_cast<std::size_t>(e)] + orders.flux_offset; }
  int num_bubbles(int e) const { return trace_order(e) - 1; }
  int test_order(int k) const { return elem_order[static_cast<std::size_t>(k)] + delta_p; }
  /// Enriched test dimension: H1 part plus both Hdiv components.
  int test_dim(int k) const;
  int num_trace_dofs() const { return num_dofs - num_field_dofs; }
  /// Number of scalar field (u) dofs, the ndof reported by the driver.
  int num_scalar_dofs() const;
};

/// Local numbering of element k's trial dofs with their global ids and signs.
struct ElementDofs {
  int nu = 0;                       // scalar field size
  int n_local = 0;
  std::array<int, 3> bubble_start{}; // local index of first bubble of local edge i
  std::array<int, 3> flux_start{};
  std::array<int, 3> orientation{};  // 0: edge parameter runs from local vertex (i+1)%3 to (i+2)%3
  std::array<int, 3> trace_order{};
  std::array<int, 3> flux_order{};
  std::vector<int> global;
  std::vector<double> sign;
};

ElementDofs element_dofs(const Triangulation& mesh, const SpaceLayout& layout, int k);

/// Builds the layout. Edges for which is_dirichlet(edge) holds get their trace
/// dofs fixed; by default every boundary edge is Dirichlet. Throws GeometryError
/// naming the element when the enriched test space is smaller than the trial
/// dofs attributed to that element (shared skeleton dofs split among owners,
/// fixed Dirichlet dofs excluded).
SpaceLayout build_layout(const HpMesh& mesh, int delta_p, TrialOrders orders = {},
                         const std::function<bool(const Edge&)>& is_dirichlet = {});

} // namespace hpdpg
