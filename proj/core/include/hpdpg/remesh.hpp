#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hpdpg/mesh.hpp"
#include "hpdpg/metric.hpp"

namespace hpdpg {

// BAMG-compatible ASCII interchange: `.mesh` with Vertices/Triangles/Edges
// sections (1-based), `.mtr` with a `nv 3` header and `m11 m12 m22` rows.
void write_bamg_mesh(std::ostream& out, const Triangulation& mesh);
Triangulation read_bamg_mesh(std::istream& in);
void write_bamg_metric(std::ostream& out, const std::vector<MetricTensor>& metrics);
std::vector<MetricTensor> read_bamg_metric(std::istream& in);

/// Writes prefix.mesh and prefix.mtr.
void interchange_write(const std::string& prefix, const Triangulation& mesh, const std::vector<MetricTensor>& metrics);
/// Reads prefix.mesh (the mesher's output).
Triangulation interchange_read(const std::string& prefix);

/// Reads a mesh file, BAMG dialect for `.mesh`, native format otherwise.
Triangulation load_mesh(const std::string& path);

/// Metric length of segment a->b by 2-point Gauss with log-Euclidean
/// interpolation between the endpoint metrics.
double metric_edge_length(const MetricTensor& ma, const MetricTensor& mb, const Vec2& a, const Vec2& b);

struct RemeshOptions {
  int max_sweeps = 20;
  double target_fraction = 0.9; // share of edges with length in [1/sqrt2, sqrt2]
};

struct RemeshReport {
  int sweeps = 0;
  double fraction_in_band = 0.0;
  bool converged = false;
  int splits = 0;
  int collapses = 0;
  int flips = 0;
  double quality_min = 0.0;  // metric quality, 1 for equilateral under the metric
  double quality_mean = 0.0;
  double quality_low = 0.0;  // share of elements with quality below 0.5
};

/// Adapts the mesh to the unit-edge metric given at its vertices by edge
/// splits, collapses, flips and metric-weighted smoothing. Boundary vertices
/// stay on the boundary polyline, corners are kept and tags are preserved.
Triangulation remesh_internal(const Triangulation& mesh, const std::vector<MetricTensor>& vertex_metric,
                              const RemeshOptions& options = {}, RemeshReport* report = nullptr);

/// Fraction of edges with metric length in [1/sqrt2, sqrt2].
double edge_length_fraction(const Triangulation& mesh, const std::vector<MetricTensor>& vertex_metric);

/// Each new element takes the order of the old element containing its barycenter.
std::vector<int> transfer_orders(const Triangulation& old_mesh, const std::vector<int>& p, const Triangulation& new_mesh);

} // namespace hpdpg
