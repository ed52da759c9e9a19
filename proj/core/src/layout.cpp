#include "hpdpg/layout.hpp"

#include <algorithm>

#include "hpdpg/basis.hpp"

namespace hpdpg {

int SpaceLayout::test_dim(int k) const { return 3 * dubiner_dim(test_order(k)); }

int SpaceLayout::num_scalar_dofs() const {
  int n = 0;
  for (int p : elem_order) n += dubiner_dim(p);
  return n;
}

SpaceLayout build_layout(const HpMesh& hp, int delta_p, TrialOrders orders,
                         const std::function<bool(const Edge&)>& is_dirichlet) {
  if (delta_p < 1) throw GeometryError("build_layout: delta_p must be at least 1");
  const Triangulation& m = hp.mesh;
  SpaceLayout L;
  L.delta_p = delta_p;
  L.orders = orders;
  L.elem_order = hp.p;
  const int nt = m.num_triangles();
  const int nv = m.num_vertices();
  const int ne = m.num_edges();

  int next = 0;
  L.field_offset.resize(static_cast<std::size_t>(nt));
  for (int k = 0; k < nt; ++k) {
    L.field_offset[static_cast<std::size_t>(k)] = next;
    next += 3 * dubiner_dim(hp.p[static_cast<std::size_t>(k)]);
  }
  L.num_field_dofs = next;
  L.vertex_offset.resize(static_cast<std::size_t>(nv));
  for (int v = 0; v < nv; ++v) L.vertex_offset[static_cast<std::size_t>(v)] = next++;

  L.edge_order.resize(static_cast<std::size_t>(ne));
  L.bubble_offset.resize(static_cast<std::size_t>(ne));
  L.flux_offset.resize(static_cast<std::size_t>(ne));
  L.dirichlet_edge.assign(static_cast<std::size_t>(ne), 0);
  for (int e = 0; e < ne; ++e) {
    const Edge& ed = m.edge(e);
    int pe = hp.p[static_cast<std::size_t>(ed.tri[0])];
    if (ed.tri[1] >= 0) pe = std::max(pe, hp.p[static_cast<std::size_t>(ed.tri[1])]);
    L.edge_order[static_cast<std::size_t>(e)] = pe;
    if (L.trace_order(e) < 1 || L.trace_order(e) > kMaxTraceOrder || L.flux_order(e) < 0 ||
        L.flux_order(e) > kMaxTraceOrder)
      throw GeometryError("build_layout: skeleton order of edge " + std::to_string(e) + " unsupported");
    L.bubble_offset[static_cast<std::size_t>(e)] = next;
    next += L.num_bubbles(e);
    L.flux_offset[static_cast<std::size_t>(e)] = next;
    next += flux_dim(L.flux_order(e));
    const bool dir = is_dirichlet ? is_dirichlet(ed) : ed.boundary;
    L.dirichlet_edge[static_cast<std::size_t>(e)] = dir ? 1 : 0;
  }
  L.num_dofs = next;
  L.dirichlet_dof.assign(static_cast<std::size_t>(next), 0);
  for (int e = 0; e < ne; ++e) {
    if (!L.dirichlet_edge[static_cast<std::size_t>(e)]) continue;
    const Edge& ed = m.edge(e);
    for (int v : ed.v) L.dirichlet_dof[static_cast<std::size_t>(L.vertex_offset[static_cast<std::size_t>(v)])] = 1;
    for (int b = 0; b < L.num_bubbles(e); ++b)
      L.dirichlet_dof[static_cast<std::size_t>(L.bubble_offset[static_cast<std::size_t>(e)] + b)] = 1;
  }

  // Test space size check against the trial dofs attributed to each element.
  std::vector<int> vertex_valence(static_cast<std::size_t>(nv), 0);
  for (const auto& t : m.triangles())
    for (int v : t) ++vertex_valence[static_cast<std::size_t>(v)];
  for (int k = 0; k < nt; ++k) {
    double n = 3.0 * dubiner_dim(hp.p[static_cast<std::size_t>(k)]);
    for (int v : m.triangle(k))
      if (!L.dirichlet_dof[static_cast<std::size_t>(L.vertex_offset[static_cast<std::size_t>(v)])])
        n += 1.0 / vertex_valence[static_cast<std::size_t>(v)];
    for (int e : m.triangle_edges(k)) {
      const Edge& ed = m.edge(e);
      const double share = ed.boundary ? 1.0 : 0.5;
      double free = flux_dim(L.flux_order(e));
      if (!L.dirichlet_edge[static_cast<std::size_t>(e)]) free += L.num_bubbles(e);
      n += share * free;
    }
    if (static_cast<double>(L.test_dim(k)) < n - 1e-9)
      throw GeometryError("build_layout: test space of element " + std::to_string(k) + " (dim " +
                          std::to_string(L.test_dim(k)) + ") smaller than its trial share " + std::to_string(n));
  }
  return L;
}

ElementDofs element_dofs(const Triangulation& m, const SpaceLayout& L, int k) {
  ElementDofs d;
  const int p = L.elem_order[static_cast<std::size_t>(k)];
  d.nu = dubiner_dim(p);
  const auto& tri = m.triangle(k);
  const auto& edges = m.triangle_edges(k);
  const int f0 = L.field_offset[static_cast<std::size_t>(k)];
  for (int i = 0; i < 3 * d.nu; ++i) {
    d.global.push_back(f0 + i);
    d.sign.push_back(1.0);
  }
  for (int v : tri) {
    d.global.push_back(L.vertex_offset[static_cast<std::size_t>(v)]);
    d.sign.push_back(1.0);
  }
  for (int i = 0; i < 3; ++i) {
    const int e = edges[static_cast<std::size_t>(i)];
    const int a = tri[static_cast<std::size_t>((i + 1) % 3)];
    const int b = tri[static_cast<std::size_t>((i + 2) % 3)];
    d.orientation[static_cast<std::size_t>(i)] = a < b ? 0 : 1;
    d.trace_order[static_cast<std::size_t>(i)] = L.trace_order(e);
    d.flux_order[static_cast<std::size_t>(i)] = L.flux_order(e);
    d.bubble_start[static_cast<std::size_t>(i)] = static_cast<int>(d.global.size());
    for (int j = 0; j < L.num_bubbles(e); ++j) {
      d.global.push_back(L.bubble_offset[static_cast<std::size_t>(e)] + j);
      d.sign.push_back(1.0);
    }
  }
  for (int i = 0; i < 3; ++i) {
    const int e = edges[static_cast<std::size_t>(i)];
    const double s = (m.edge(e).tri[0] == k) ? 1.0 : -1.0;
    d.flux_start[static_cast<std::size_t>(i)] = static_cast<int>(d.global.size());
    for (int j = 0; j < flux_dim(L.flux_order(e)); ++j) {
      d.global.push_back(L.flux_offset[static_cast<std::size_t>(e)] + j);
      d.sign.push_back(s);
    }
  }
  d.n_local = static_cast<int>(d.global.size());
  return d;
}

} // namespace hpdpg
