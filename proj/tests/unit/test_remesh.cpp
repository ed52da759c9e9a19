#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "hpdpg/remesh.hpp"

using namespace hpdpg;

namespace {

Triangulation two_triangle_square() {
  return Triangulation({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}},
                       {{0, 1, 1}, {1, 2, 2}, {2, 3, 3}, {3, 0, 4}});
}

std::vector<MetricTensor> uniform_metric(const Triangulation& m, const MetricTensor& M) {
  return std::vector<MetricTensor>(static_cast<std::size_t>(m.num_vertices()), M);
}

double element_aspect(const Triangulation& m, int k) {
  const SymEigen2 e = sym_eigen(element_metric(m.corners(k), 1.0));
  return std::sqrt(e.lambda_max / e.lambda_min);
}

void check_boundary_preserved(const Triangulation& m) {
  CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-12));
  std::set<int> tags;
  for (const auto& s : m.boundary_segments()) {
    tags.insert(s.tag);
    const Vec2 a = m.vertex(s.v0), b = m.vertex(s.v1);
    const bool on = (a.x == 0 && b.x == 0) || (a.x == 1 && b.x == 1) || (a.y == 0 && b.y == 0) || (a.y == 1 && b.y == 1);
    CHECK(on);
  }
  CHECK(tags.size() == 4);
}

} // namespace

TEST_CASE("bamg mesh writer for two triangles") {
  std::ostringstream os;
  write_bamg_mesh(os, two_triangle_square());
  const std::string s = os.str();
  CHECK(s.find("Vertices\n4\n") != std::string::npos);
  CHECK(s.find("Triangles\n2\n") != std::string::npos);
  CHECK(s.find("Edges\n4\n") != std::string::npos);
  CHECK(s.find("End") != std::string::npos);

  std::istringstream is(s);
  const Triangulation back = read_bamg_mesh(is);
  CHECK(back.num_vertices() == 4);
  CHECK(back.num_triangles() == 2);
  CHECK(back.boundary_segments().size() == 4);
}

TEST_CASE("bamg round trip is exact") {
  const Triangulation m = make_lshape(3);
  std::ostringstream os;
  write_bamg_mesh(os, m);
  std::istringstream is(os.str());
  const Triangulation b = read_bamg_mesh(is);
  REQUIRE(b.num_vertices() == m.num_vertices());
  REQUIRE(b.num_triangles() == m.num_triangles());
  for (int v = 0; v < m.num_vertices(); ++v) {
    CHECK(b.vertex(v).x == m.vertex(v).x);
    CHECK(b.vertex(v).y == m.vertex(v).y);
  }
  for (int k = 0; k < m.num_triangles(); ++k) CHECK(b.triangle(k) == m.triangle(k));
}

TEST_CASE("metric file format") {
  std::ostringstream os;
  write_bamg_metric(os, {MetricTensor{}, MetricTensor{2.0, 0.5, 3.0}});
  CHECK(os.str().rfind("2 3\n1 0 1\n", 0) == 0);
  std::istringstream is(os.str());
  const auto back = read_bamg_metric(is);
  REQUIRE(back.size() == 2);
  CHECK(back[1] == MetricTensor{2.0, 0.5, 3.0});

  std::istringstream bad("1 3\n1 2 1\n");
  CHECK_THROWS_AS(read_bamg_metric(bad), ParseError);
  std::istringstream trunc("MeshVersionFormatted 0\nDimension 2\nVertices\n2\n0 0 0\n");
  CHECK_THROWS_AS(read_bamg_mesh(trunc), ParseError);
}

TEST_CASE("metric edge length") {
  const MetricTensor m{4.0, 0.0, 1.0};
  CHECK(metric_edge_length(m, m, {0, 0}, {1, 0}) == doctest::Approx(2.0));
  CHECK(metric_edge_length(m, m, {0, 0}, {0, 3}) == doctest::Approx(3.0));
  // Scalar metrics a^2 I and b^2 I: the log-Euclidean path gives the
  // integral of a^(1-t) b^t, i.e. (b - a) / ln(b / a).
  const double a = 1.0, b = 4.0;
  CHECK(metric_edge_length(MetricTensor{a * a, 0, a * a}, MetricTensor{b * b, 0, b * b}, {0, 0}, {1, 0}) ==
        doctest::Approx((b - a) / std::log(b / a)).epsilon(0.01));
}

TEST_CASE("uniform metric keeps the element count") {
  const Triangulation m = make_unit_square(8);
  const double n0 = m.num_triangles();
  const double h2 = 4.0 / (std::sqrt(3.0) * n0);
  const auto vm = uniform_metric(m, MetricTensor{1.0 / h2, 0.0, 1.0 / h2});
  RemeshReport rep;
  const Triangulation r = remesh_internal(m, vm, {}, &rep);
  CHECK(r.num_triangles() >= 0.8 * n0);
  CHECK(r.num_triangles() <= 1.2 * n0);
  CHECK(rep.fraction_in_band >= 0.9);
  check_boundary_preserved(r);
}

TEST_CASE("four times the density gives about four times the elements") {
  const Triangulation m = make_unit_square(8);
  const double n0 = m.num_triangles();
  const double h2 = 4.0 / (std::sqrt(3.0) * n0);
  const Triangulation r1 = remesh_internal(m, uniform_metric(m, MetricTensor{1.0 / h2, 0.0, 1.0 / h2}));
  const Triangulation r4 = remesh_internal(m, uniform_metric(m, MetricTensor{4.0 / h2, 0.0, 4.0 / h2}));
  const double ratio = static_cast<double>(r4.num_triangles()) / r1.num_triangles();
  CHECK(ratio >= 4.0 * 0.7);
  CHECK(ratio <= 4.0 * 1.3);
  check_boundary_preserved(r4);
}

TEST_CASE("anisotropic metric stretches elements") {
  const Triangulation m = make_unit_square(8);
  const MetricTensor M = metric_compose({0.0, 10.0, 400.0}) * (1.0 / 3.0);
  RemeshReport rep;
  const Triangulation r = remesh_internal(m, uniform_metric(m, M), {}, &rep);
  std::vector<double> ar;
  for (int k = 0; k < r.num_triangles(); ++k) ar.push_back(element_aspect(r, k));
  std::nth_element(ar.begin(), ar.begin() + static_cast<long>(ar.size() / 2), ar.end());
  CHECK(ar[ar.size() / 2] >= 3.0);
  check_boundary_preserved(r);
  CHECK(edge_length_fraction(r, uniform_metric(r, M)) == doctest::Approx(rep.fraction_in_band));
}

TEST_CASE("graded metric refines towards one side") {
  const Triangulation m = make_unit_square(6);
  std::vector<MetricTensor> vm;
  for (const auto& v : m.vertices()) {
    const double h = 0.02 + 0.2 * v.x;
    vm.push_back(MetricTensor{1.0 / (h * h), 0.0, 1.0 / (h * h)});
  }
  const Triangulation r = remesh_internal(m, vm);
  int left = 0, right = 0;
  for (int k = 0; k < r.num_triangles(); ++k) (r.barycenter(k).x < 0.5 ? left : right)++;
  CHECK(left > 3 * right);
  check_boundary_preserved(r);
}

TEST_CASE("order transfer by containment") {
  const Triangulation old = make_unit_square(2);
  std::vector<int> p(static_cast<std::size_t>(old.num_triangles()));
  for (int k = 0; k < old.num_triangles(); ++k) p[static_cast<std::size_t>(k)] = old.barycenter(k).x < 0.5 ? 2 : 5;
  const Triangulation fine = make_unit_square(8);
  const auto q = transfer_orders(old, p, fine);
  for (int k = 0; k < fine.num_triangles(); ++k) CHECK(q[static_cast<std::size_t>(k)] == (fine.barycenter(k).x < 0.5 ? 2 : 5));
}
