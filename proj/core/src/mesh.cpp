#include "hpdpg/mesh.hpp"

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace hpdpg {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) { return 0.5 * cross(b - a, c - a); }

} // namespace

Triangulation::Triangulation(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                             std::vector<BoundarySegment> boundary, std::vector<int> triangle_tags)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), tri_tags_(std::move(triangle_tags)) {
  const int nv = num_vertices();
  const int nt = num_triangles();
  if (tri_tags_.empty()) tri_tags_.assign(static_cast<std::size_t>(nt), 0);
  if (static_cast<int>(tri_tags_.size()) != nt) throw GeometryError("triangle tag count does not match triangles");

  for (int k = 0; k < nt; ++k) {
    const auto& t = triangles_[static_cast<std::size_t>(k)];
    for (int v : t)
      if (v < 0 || v >= nv) throw GeometryError("triangle " + std::to_string(k) + " has vertex index out of range");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw GeometryError("triangle " + std::to_string(k) + " repeats a vertex");
    const Vec2& a = vertices_[static_cast<std::size_t>(t[0])];
    const Vec2& b = vertices_[static_cast<std::size_t>(t[1])];
    const Vec2& c = vertices_[static_cast<std::size_t>(t[2])];
    const double scale = std::max({dot(b - a, b - a), dot(c - b, c - b), dot(a - c, a - c)});
    if (!(signed_area(a, b, c) > 1e-14 * scale))
      throw GeometryError("triangle " + std::to_string(k) + " has non-positive signed area");
  }

  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(static_cast<std::size_t>(3 * nt));
  tri_edges_.assign(static_cast<std::size_t>(nt), {-1, -1, -1});
  for (int k = 0; k < nt; ++k) {
    const auto& t = triangles_[static_cast<std::size_t>(k)];
    for (int i = 0; i < 3; ++i) {
      const int a = t[static_cast<std::size_t>((i + 1) % 3)];
      const int b = t[static_cast<std::size_t>((i + 2) % 3)];
      const auto key = edge_key(a, b);
      auto it = lookup.find(key);
      if (it == lookup.end()) {
        Edge e;
        e.v = {std::min(a, b), std::max(a, b)};
        e.tri[0] = k;
        e.local[0] = i;
        lookup.emplace(key, num_edges());
        tri_edges_[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = num_edges();
        edges_.push_back(e);
      } else {
        Edge& e = edges_[static_cast<std::size_t>(it->second)];
        if (e.tri[1] != -1)
          throw GeometryError("edge (" + std::to_string(a) + "," + std::to_string(b) + ") has more than two triangles");
        e.tri[1] = k;
        e.local[1] = i;
        tri_edges_[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = it->second;
      }
    }
  }
  for (auto& e : edges_) e.boundary = (e.tri[1] == -1);
  for (const auto& s : boundary) {
    auto it = lookup.find(edge_key(s.v0, s.v1));
    if (it == lookup.end() || !edges_[static_cast<std::size_t>(it->second)].boundary)
      throw GeometryError("boundary segment (" + std::to_string(s.v0 + 1) + "," + std::to_string(s.v1 + 1) +
                          ") is not a boundary edge of the triangulation");
    edges_[static_cast<std::size_t>(it->second)].tag = s.tag;
  }

  vt_offsets_.assign(static_cast<std::size_t>(nv + 1), 0);
  for (const auto& t : triangles_)
    for (int v : t) ++vt_offsets_[static_cast<std::size_t>(v + 1)];
  for (int v = 0; v < nv; ++v) vt_offsets_[static_cast<std::size_t>(v + 1)] += vt_offsets_[static_cast<std::size_t>(v)];
  vt_list_.assign(static_cast<std::size_t>(vt_offsets_.back()), 0);
  std::vector<int> fill(vt_offsets_.begin(), vt_offsets_.end() - 1);
  for (int k = 0; k < nt; ++k)
    for (int v : triangles_[static_cast<std::size_t>(k)]) vt_list_[static_cast<std::size_t>(fill[static_cast<std::size_t>(v)]++)] = k;
}

std::vector<int> Triangulation::vertex_triangles(int v) const {
  return {vt_list_.begin() + vt_offsets_[static_cast<std::size_t>(v)],
          vt_list_.begin() + vt_offsets_[static_cast<std::size_t>(v + 1)]};
}

std::vector<BoundarySegment> Triangulation::boundary_segments() const {
  std::vector<BoundarySegment> out;
  for (const auto& e : edges_) {
    if (!e.boundary) continue;
    // Keep the counterclockwise orientation of the owning triangle.
    const auto& t = triangle(e.tri[0]);
    const int a = t[static_cast<std::size_t>((e.local[0] + 1) % 3)];
    const int b = t[static_cast<std::size_t>((e.local[0] + 2) % 3)];
    out.push_back({a, b, e.tag});
  }
  return out;
}

std::array<Vec2, 3> Triangulation::corners(int k) const {
  const auto& t = triangle(k);
  return {vertex(t[0]), vertex(t[1]), vertex(t[2])};
}

double Triangulation::area(int k) const {
  const auto c = corners(k);
  return signed_area(c[0], c[1], c[2]);
}

Vec2 Triangulation::barycenter(int k) const {
  const auto c = corners(k);
  return (c[0] + c[1] + c[2]) * (1.0 / 3.0);
}

double Triangulation::edge_length(int e) const {
  const auto& ed = edge(e);
  return norm(vertex(ed.v[1]) - vertex(ed.v[0]));
}

Vec2 Triangulation::outward_normal(int k, int local_edge) const {
  const auto c = corners(k);
  const Vec2 d = c[static_cast<std::size_t>((local_edge + 2) % 3)] - c[static_cast<std::size_t>((local_edge + 1) % 3)];
  const double len = norm(d);
  return {d.y / len, -d.x / len};
}

int Triangulation::neighbor(int k, int local_edge) const {
  const Edge& e = edge(tri_edges_[static_cast<std::size_t>(k)][static_cast<std::size_t>(local_edge)]);
  if (e.boundary) return -1;
  return e.tri[0] == k ? e.tri[1] : e.tri[0];
}

double Triangulation::total_area() const {
  double a = 0.0;
  for (int k = 0; k < num_triangles(); ++k) a += area(k);
  return a;
}

HpMesh::HpMesh(Triangulation m, std::vector<int> orders, int p_max) : mesh(std::move(m)), p(std::move(orders)) {
  if (static_cast<int>(p.size()) != mesh.num_triangles())
    throw GeometryError("order vector length " + std::to_string(p.size()) + " does not match " +
                        std::to_string(mesh.num_triangles()) + " elements");
  for (int q : p)
    if (q < 1 || q > p_max) throw GeometryError("polynomial order " + std::to_string(q) + " outside [1, p_max]");
}

HpMesh::HpMesh(Triangulation m, int uniform_p) : mesh(std::move(m)) {
  if (uniform_p < 1) throw GeometryError("polynomial order must be positive");
  p.assign(static_cast<std::size_t>(mesh.num_triangles()), uniform_p);
}

Patch build_patch(const HpMesh& hp, int k, PatchAdjacency adjacency) {
  const Triangulation& m = hp.mesh;
  if (k < 0 || k >= m.num_triangles()) throw GeometryError("build_patch: element id out of range");
  Patch patch;
  patch.center = k;
  patch.members.push_back(k);
  if (adjacency == PatchAdjacency::Edge) {
    for (int i = 0; i < 3; ++i) {
      const int nb = m.neighbor(k, i);
      if (nb >= 0) patch.members.push_back(nb);
    }
  } else {
    std::vector<int> cand;
    for (int v : m.triangle(k))
      for (int t : m.vertex_triangles(v))
        if (t != k) cand.push_back(t);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    patch.members.insert(patch.members.end(), cand.begin(), cand.end());
  }
  std::vector<int> sorted = patch.members;
  std::sort(sorted.begin(), sorted.end());
  auto in_patch = [&](int t) { return t >= 0 && std::binary_search(sorted.begin(), sorted.end(), t); };
  std::vector<int> seen;
  for (int t : patch.members) {
    for (int i = 0; i < 3; ++i) {
      const int e = m.triangle_edges(t)[static_cast<std::size_t>(i)];
      const Edge& ed = m.edge(e);
      const bool exterior = ed.boundary || !in_patch(ed.tri[0]) || !in_patch(ed.tri[1]);
      if (!exterior) continue;
      if (std::find(seen.begin(), seen.end(), e) != seen.end()) continue;
      seen.push_back(e);
      patch.boundary_edges.push_back({e, ed.boundary});
    }
  }
  return patch;
}

double complexity_weight(int p) { return 2.0 * (p + 1) * (p + 2) / (3.0 * std::sqrt(3.0)); }

int scalar_dofs(int p) { return (p + 1) * (p + 2) / 2; }

double mesh_complexity(const HpMesh& mesh) {
  double n = 0.0;
  for (int q : mesh.p) n += kAlpha * complexity_weight(q);
  return n;
}

Triangulation make_unit_square(int n) {
  if (n < 1) throw GeometryError("make_unit_square: need at least one cell");
  std::vector<Vec2> v;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) v.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::array<int, 3>> t;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      t.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      t.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  std::vector<BoundarySegment> b;
  for (int i = 0; i < n; ++i) {
    b.push_back({id(i, 0), id(i + 1, 0), 1});
    b.push_back({id(n, i), id(n, i + 1), 2});
    b.push_back({id(i + 1, n), id(i, n), 3});
    b.push_back({id(0, i + 1), id(0, i), 4});
  }
  return Triangulation(std::move(v), std::move(t), std::move(b));
}

Triangulation make_lshape(int n) {
  if (n < 1) throw GeometryError("make_lshape: need at least one cell per unit");
  const int m = 2 * n;
  auto coord = [n](int i) { return static_cast<double>(i - n) / n; };
  std::vector<int> index(static_cast<std::size_t>((m + 1) * (m + 1)), -1);
  std::vector<Vec2> v;
  std::vector<std::array<int, 3>> t;
  auto vid = [&](int i, int j) {
    int& slot = index[static_cast<std::size_t>(j * (m + 1) + i)];
    if (slot < 0) {
      slot = static_cast<int>(v.size());
      v.push_back({coord(i), coord(j)});
    }
    return slot;
  };
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      if (i >= n && j < n) continue; // removed quadrant [0,1]x[-1,0]
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      t.push_back({a, b, c});
      t.push_back({a, c, d});
    }
  Triangulation raw(v, t, {});
  std::vector<BoundarySegment> b;
  for (const auto& s : raw.boundary_segments()) {
    const Vec2 p = (raw.vertex(s.v0) + raw.vertex(s.v1)) * 0.5;
    int tag = 0;
    constexpr double tol = 1e-12;
    if (std::abs(p.y + 1.0) < tol) tag = 1;
    else if (std::abs(p.x) < tol && p.y < 0.0) tag = 2;
    else if (std::abs(p.y) < tol && p.x > 0.0) tag = 3;
    else if (std::abs(p.x - 1.0) < tol) tag = 4;
    else if (std::abs(p.y - 1.0) < tol) tag = 5;
    else if (std::abs(p.x + 1.0) < tol) tag = 6;
    b.push_back({s.v0, s.v1, tag});
  }
  return Triangulation(std::move(v), std::move(t), std::move(b));
}

namespace {

struct LineReader {
  std::istream& in;
  int line = 0;
  std::string buf;

  bool next(std::istringstream& ss) {
    while (std::getline(in, buf)) {
      ++line;
      const auto pos = buf.find_first_not_of(" \t\r");
      if (pos == std::string::npos || buf[pos] == '#') continue;
      ss.clear();
      ss.str(buf);
      return true;
    }
    return false;
  }
};

} // namespace

Triangulation read_native_mesh(std::istream& in) {
  LineReader r{in, 0, {}};
  std::istringstream ss;
  if (!r.next(ss)) throw ParseError("empty mesh file", 0);
  long nv = -1, nt = -1, nb = -1;
  if (!(ss >> nv >> nt >> nb) || nv < 3 || nt < 1 || nb < 0) throw ParseError("bad header, expected 'nv nt nbe'", r.line);
  std::vector<Vec2> v(static_cast<std::size_t>(nv));
  for (auto& p : v) {
    if (!r.next(ss) || !(ss >> p.x >> p.y)) throw ParseError("bad vertex line", r.line);
  }
  std::vector<std::array<int, 3>> t(static_cast<std::size_t>(nt));
  std::vector<int> tags(static_cast<std::size_t>(nt));
  for (std::size_t k = 0; k < t.size(); ++k) {
    int a, b, c, tag = 0;
    if (!r.next(ss) || !(ss >> a >> b >> c)) throw ParseError("bad triangle line", r.line);
    ss >> tag;
    for (int idx : {a, b, c})
      if (idx < 1 || idx > nv) throw ParseError("triangle vertex index out of range", r.line);
    t[k] = {a - 1, b - 1, c - 1};
    if (cross(v[static_cast<std::size_t>(b - 1)] - v[static_cast<std::size_t>(a - 1)],
              v[static_cast<std::size_t>(c - 1)] - v[static_cast<std::size_t>(a - 1)]) < 0.0)
      std::swap(t[k][1], t[k][2]);
    tags[k] = tag;
  }
  std::vector<BoundarySegment> bs(static_cast<std::size_t>(nb));
  for (auto& s : bs) {
    int a, b, tag;
    if (!r.next(ss) || !(ss >> a >> b >> tag)) throw ParseError("bad boundary edge line", r.line);
    if (a < 1 || a > nv || b < 1 || b > nv) throw ParseError("boundary vertex index out of range", r.line);
    s = {a - 1, b - 1, tag};
  }
  return Triangulation(std::move(v), std::move(t), std::move(bs), std::move(tags));
}

void write_native_mesh(std::ostream& out, const Triangulation& mesh) {
  const auto segs = mesh.boundary_segments();
  out << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << segs.size() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& p : mesh.vertices()) out << p.x << ' ' << p.y << '\n';
  for (int k = 0; k < mesh.num_triangles(); ++k) {
    const auto& t = mesh.triangle(k);
    out << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << ' ' << mesh.triangle_tags()[static_cast<std::size_t>(k)] << '\n';
  }
  for (const auto& s : segs) out << s.v0 + 1 << ' ' << s.v1 + 1 << ' ' << s.tag << '\n';
}

} // namespace hpdpg
