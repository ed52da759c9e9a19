#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "hpdpg/types.hpp"

namespace hpdpg {

/// Boundary edge as supplied by a mesh file: endpoints plus boundary tag.
struct BoundarySegment {
  int v0 = 0;
  int v1 = 0;
  int tag = 0;
};

/// Mesh skeleton entry. Endpoints are stored with v[0] < v[1]; this ordering
/// also fixes the parametrization direction of edge-based trace spaces.
struct Edge {
  std::array<int, 2> v{};
  /// Adjacent triangles; tri[1] == -1 on the boundary. tri[0] < tri[1] otherwise.
  std::array<int, 2> tri{-1, -1};
  /// Local edge index (0..2) of this edge inside tri[0] / tri[1].
  std::array<int, 2> local{-1, -1};
  bool boundary = false;
  int tag = 0;
};

/// Counterclockwise triangulation with derived edge connectivity.
/// Local edge i of a triangle is opposite local vertex i, i.e. it runs from
/// vertex (i+1)%3 to (i+2)%3.
class Triangulation {
 public:
  Triangulation() = default;
  /// Validates and derives connectivity. Throws GeometryError on invalid input.
  Triangulation(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                std::vector<BoundarySegment> boundary, std::vector<int> triangle_tags = {});

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<int>& triangle_tags() const { return tri_tags_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Vec2& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
  const std::array<int, 3>& triangle(int k) const { return triangles_[static_cast<std::size_t>(k)]; }
  const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }
  /// Edge ids of triangle k, indexed by local edge.
  const std::array<int, 3>& triangle_edges(int k) const { return tri_edges_[static_cast<std::size_t>(k)]; }
  /// Triangles incident to vertex v.
  std::vector<int> vertex_triangles(int v) const;
  /// Boundary segments, one per boundary edge, in edge order.
  std::vector<BoundarySegment> boundary_segments() const;

  std::array<Vec2, 3> corners(int k) const;
  double area(int k) const;
  Vec2 barycenter(int k) const;
  double edge_length(int e) const;
  /// Outward unit normal of local edge i of triangle k.
  Vec2 outward_normal(int k, int local_edge) const;
  /// Neighbor across local edge i, or -1.
  int neighbor(int k, int local_edge) const;
  double total_area() const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<int> tri_tags_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<int> vt_offsets_;
  std::vector<int> vt_list_;
};

/// Triangulation plus per-element polynomial order.
struct HpMesh {
  Triangulation mesh;
  std::vector<int> p;

  HpMesh() = default;
  HpMesh(Triangulation m, std::vector<int> orders, int p_max = 64);
  HpMesh(Triangulation m, int uniform_p);
  int num_elements() const { return mesh.num_triangles(); }
};

enum class PatchAdjacency { Edge, Vertex };

struct PatchEdge {
  int edge = -1;
  /// True when the edge lies on the physical boundary (Dirichlet data from
  /// the problem), false when its data comes from the global trace.
  bool physical = false;
};

struct Patch {
  int center = -1;
  std::vector<int> members;
  std::vector<PatchEdge> boundary_edges;
};

Patch build_patch(const HpMesh& mesh, int k, PatchAdjacency adjacency = PatchAdjacency::Edge);

/// Complexity weight w(p) = 2 (p+1)(p+2) / (3 sqrt 3).
double complexity_weight(int p);
/// Scalar-field dof count of an order-p element, alpha * w(p).
int scalar_dofs(int p);
/// sum_k alpha w(p_k).
double mesh_complexity(const HpMesh& mesh);

/// Structured meshes used by the built-in benchmark problems.
Triangulation make_unit_square(int cells_per_side);
Triangulation make_lshape(int cells_per_unit);

/// Native text format: "nv nt nbe", vertex lines "x y", triangle lines
/// "v1 v2 v3 tag", boundary lines "v1 v2 tag"; indices are 1-based.
Triangulation read_native_mesh(std::istream& in);
void write_native_mesh(std::ostream& out, const Triangulation& mesh);

} // namespace hpdpg
