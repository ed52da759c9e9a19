#include "hpdpg/remesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "hpdpg/locate.hpp"

namespace hpdpg {

// ---------------------------------------------------------------- interchange

void write_bamg_mesh(std::ostream& out, const Triangulation& m) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "MeshVersionFormatted 0\nDimension 2\n";
  out << "Vertices\n" << m.num_vertices() << '\n';
  for (const auto& v : m.vertices()) out << v.x << ' ' << v.y << " 0\n";
  out << "Triangles\n" << m.num_triangles() << '\n';
  for (int k = 0; k < m.num_triangles(); ++k) {
    const auto& t = m.triangle(k);
    out << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << ' ' << m.triangle_tags()[static_cast<std::size_t>(k)] << '\n';
  }
  const auto segs = m.boundary_segments();
  out << "Edges\n" << segs.size() << '\n';
  for (const auto& s : segs) out << s.v0 + 1 << ' ' << s.v1 + 1 << ' ' << s.tag << '\n';
  out << "End\n";
}

namespace {

class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  bool next(std::string& tok) {
    while (!(ss_ >> tok)) {
      std::string line;
      if (!std::getline(in_, line)) return false;
      ++line_;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      ss_.clear();
      ss_.str(line);
    }
    return true;
  }
  template <class T>
  T number(const char* what) {
    std::string tok;
    if (!next(tok)) throw ParseError(std::string("unexpected end of file while reading ") + what, line_);
    std::istringstream is(tok);
    T v{};
    if (!(is >> v) || !is.eof()) throw ParseError(std::string("expected ") + what + ", got '" + tok + "'", line_);
    return v;
  }
  int line() const { return line_; }

 private:
  std::istream& in_;
  std::istringstream ss_;
  int line_ = 0;
};

} // namespace

Triangulation read_bamg_mesh(std::istream& in) {
  TokenReader r(in);
  std::vector<Vec2> verts;
  std::vector<std::array<int, 3>> tris;
  std::vector<int> tags;
  std::vector<BoundarySegment> segs;
  bool have_v = false, have_t = false;
  std::string tok;
  auto index = [&](int nv, const char* what) {
    const int i = r.number<int>(what);
    if (i < 1 || i > nv) throw ParseError(std::string(what) + " index out of range", r.line());
    return i - 1;
  };
  while (r.next(tok)) {
    if (tok == "MeshVersionFormatted") {
      r.number<int>("version");
    } else if (tok == "Dimension") {
      if (r.number<int>("dimension") != 2) throw ParseError("only 2D meshes are supported", r.line());
    } else if (tok == "Vertices") {
      const int n = r.number<int>("vertex count");
      if (n < 0) throw ParseError("negative vertex count", r.line());
      verts.resize(static_cast<std::size_t>(n));
      for (auto& v : verts) {
        v.x = r.number<double>("x coordinate");
        v.y = r.number<double>("y coordinate");
        r.number<int>("vertex reference");
      }
      have_v = true;
    } else if (tok == "Triangles") {
      if (!have_v) throw ParseError("Triangles before Vertices", r.line());
      const int n = r.number<int>("triangle count");
      if (n < 0) throw ParseError("negative triangle count", r.line());
      for (int k = 0; k < n; ++k) {
        std::array<int, 3> t{};
        for (auto& v : t) v = index(static_cast<int>(verts.size()), "triangle vertex");
        tris.push_back(t);
        tags.push_back(r.number<int>("triangle reference"));
      }
      have_t = true;
    } else if (tok == "Edges") {
      if (!have_v) throw ParseError("Edges before Vertices", r.line());
      const int n = r.number<int>("edge count");
      if (n < 0) throw ParseError("negative edge count", r.line());
      for (int k = 0; k < n; ++k) {
        BoundarySegment s;
        s.v0 = index(static_cast<int>(verts.size()), "edge vertex");
        s.v1 = index(static_cast<int>(verts.size()), "edge vertex");
        s.tag = r.number<int>("edge reference");
        segs.push_back(s);
      }
    } else if (tok == "End") {
      break;
    } else {
      throw ParseError("unknown section '" + tok + "'", r.line());
    }
  }
  if (!have_v || !have_t) throw ParseError("mesh file lacks Vertices or Triangles", r.line());
  // Mesh generators may emit clockwise triangles.
  for (auto& t : tris) {
    const Vec2 a = verts[static_cast<std::size_t>(t[0])], b = verts[static_cast<std::size_t>(t[1])], c = verts[static_cast<std::size_t>(t[2])];
    if (cross(b - a, c - a) < 0.0) std::swap(t[1], t[2]);
  }
  return Triangulation(std::move(verts), std::move(tris), std::move(segs), std::move(tags));
}

void write_bamg_metric(std::ostream& out, const std::vector<MetricTensor>& metrics) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << metrics.size() << " 3\n";
  for (const auto& m : metrics) {
    if (!m.is_spd()) throw GeometryError("metric is not symmetric positive definite");
    out << m.m11 << ' ' << m.m12 << ' ' << m.m22 << '\n';
  }
}

std::vector<MetricTensor> read_bamg_metric(std::istream& in) {
  TokenReader r(in);
  const int n = r.number<int>("metric count");
  const int ncomp = r.number<int>("component count");
  if (n < 0) throw ParseError("negative metric count", r.line());
  if (ncomp != 3) throw ParseError("expected 3 metric components per vertex", r.line());
  std::vector<MetricTensor> out(static_cast<std::size_t>(n));
  for (auto& m : out) {
    m.m11 = r.number<double>("m11");
    m.m12 = r.number<double>("m12");
    m.m22 = r.number<double>("m22");
    if (!m.is_spd()) throw ParseError("metric row is not symmetric positive definite", r.line());
  }
  return out;
}

void interchange_write(const std::string& prefix, const Triangulation& mesh, const std::vector<MetricTensor>& metrics) {
  if (metrics.size() != static_cast<std::size_t>(mesh.num_vertices()))
    throw GeometryError("metric count does not match vertex count");
  std::ofstream fm(prefix + ".mesh"), ft(prefix + ".mtr");
  if (!fm || !ft) throw Error("cannot write interchange files with prefix " + prefix);
  write_bamg_mesh(fm, mesh);
  write_bamg_metric(ft, metrics);
}

Triangulation interchange_read(const std::string& prefix) { return load_mesh(prefix + ".mesh"); }

Triangulation load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file " + path);
  const bool bamg = path.size() >= 5 && path.compare(path.size() - 5, 5, ".mesh") == 0;
  return bamg ? read_bamg_mesh(in) : read_native_mesh(in);
}

// ---------------------------------------------------------------- lengths

namespace {

constexpr double kLmax = 1.4142135623730951;
constexpr double kLmin = 0.7071067811865476;

MetricTensor lerp(const MetricTensor& a, const MetricTensor& b, double t) { return a * (1.0 - t) + b * t; }

/// Length with log-metrics la, lb at the endpoints.
double length_log(const MetricTensor& la, const MetricTensor& lb, const Vec2& e) {
  constexpr double g = 0.21132486540518713; // 1/2 - 1/(2 sqrt 3)
  return 0.5 * (metric_exp(lerp(la, lb, g)).length(e) + metric_exp(lerp(la, lb, 1.0 - g)).length(e));
}

std::uint64_t key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) { return 0.5 * cross(b - a, c - a); }

/// 1 for an equilateral triangle under m, 0 when degenerate.
double quality(const MetricTensor& m, const Vec2& a, const Vec2& b, const Vec2& c) {
  const double area = signed_area(a, b, c) * std::sqrt(m.det());
  const double s = m.quad(b - a) + m.quad(c - b) + m.quad(a - c);
  return 4.0 * std::sqrt(3.0) * area / s;
}

} // namespace

double metric_edge_length(const MetricTensor& ma, const MetricTensor& mb, const Vec2& a, const Vec2& b) {
  return length_log(metric_log(ma), metric_log(mb), b - a);
}

double edge_length_fraction(const Triangulation& m, const std::vector<MetricTensor>& vm) {
  if (m.num_edges() == 0) return 1.0;
  std::vector<MetricTensor> logs(vm.size());
  for (std::size_t i = 0; i < vm.size(); ++i) logs[i] = metric_log(vm[i]);
  int in = 0;
  for (const auto& e : m.edges()) {
    const double l = length_log(logs[static_cast<std::size_t>(e.v[0])], logs[static_cast<std::size_t>(e.v[1])],
                                m.vertex(e.v[1]) - m.vertex(e.v[0]));
    if (l >= kLmin && l <= kLmax) ++in;
  }
  return static_cast<double>(in) / m.num_edges();
}

// ---------------------------------------------------------------- remesher

namespace {

class Background {
 public:
  Background(const Triangulation& m, const std::vector<MetricTensor>& vm) : mesh_(m), loc_(m) {
    logs_.reserve(vm.size());
    for (const auto& x : vm) logs_.push_back(metric_log(x));
  }
  MetricTensor log_at(const Vec2& x) const {
    std::array<double, 3> b{};
    int k = loc_.locate(x, &b);
    if (k < 0) {
      k = loc_.locate_or_nearest(x);
      b = barycentric(mesh_.corners(k), x);
      double s = 0.0;
      for (auto& v : b) s += (v = std::max(v, 0.0));
      for (auto& v : b) v /= s;
    }
    const auto& t = mesh_.triangle(k);
    MetricTensor l{0.0, 0.0, 0.0};
    for (int i = 0; i < 3; ++i) l = l + logs_[static_cast<std::size_t>(t[static_cast<std::size_t>(i)])] * b[static_cast<std::size_t>(i)];
    return l;
  }
  const MetricTensor& vertex_log(int v) const { return logs_[static_cast<std::size_t>(v)]; }

 private:
  const Triangulation& mesh_;
  PointLocator loc_;
  std::vector<MetricTensor> logs_;
};

struct EdgeRec {
  int a = -1, b = -1;
  int t[2] = {-1, -1};
};

class WorkMesh {
 public:
  WorkMesh(const Triangulation& m, const Background& bg) : bg_(bg) {
    P = m.vertices();
    for (int v = 0; v < m.num_vertices(); ++v) L.push_back(bg.vertex_log(v));
    T = m.triangles();
    tag = m.triangle_tags();
    tdead.assign(T.size(), 0);
    vdead.assign(P.size(), 0);
    for (const auto& e : m.edges())
      if (e.boundary) btag[key(e.v[0], e.v[1])] = e.tag;
    // Corners: tag change, a kink, or not exactly two boundary edges.
    std::vector<std::vector<std::pair<int, int>>> inc(P.size());
    for (const auto& [k, t] : btag) {
      const int a = static_cast<int>(k >> 32), b = static_cast<int>(k & 0xffffffffu);
      inc[static_cast<std::size_t>(a)].push_back({b, t});
      inc[static_cast<std::size_t>(b)].push_back({a, t});
    }
    corner.assign(P.size(), 0);
    for (std::size_t v = 0; v < P.size(); ++v) {
      const auto& I = inc[v];
      if (I.empty()) continue;
      if (I.size() != 2 || I[0].second != I[1].second) {
        corner[v] = 1;
        continue;
      }
      const Vec2 d0 = P[static_cast<std::size_t>(I[0].first)] - P[v], d1 = P[static_cast<std::size_t>(I[1].first)] - P[v];
      if (std::abs(cross(d0, d1)) > 1e-10 * norm(d0) * norm(d1) || dot(d0, d1) > 0.0) corner[v] = 1;
    }
  }

  std::vector<Vec2> P;
  std::vector<MetricTensor> L;
  std::vector<std::array<int, 3>> T;
  std::vector<int> tag;
  std::vector<char> tdead, vdead, corner;
  std::unordered_map<std::uint64_t, int> btag;

  // Adjacency, rebuilt by refresh().
  std::vector<EdgeRec> edges;
  std::unordered_map<std::uint64_t, int> edge_index;
  std::vector<std::vector<int>> vtris;
  std::vector<char> on_boundary;

  void refresh() {
    edges.clear();
    edge_index.clear();
    vtris.assign(P.size(), {});
    for (int k = 0; k < static_cast<int>(T.size()); ++k) {
      if (tdead[static_cast<std::size_t>(k)]) continue;
      const auto& t = T[static_cast<std::size_t>(k)];
      for (int i = 0; i < 3; ++i) {
        vtris[static_cast<std::size_t>(t[static_cast<std::size_t>(i)])].push_back(k);
        const int a = t[static_cast<std::size_t>((i + 1) % 3)], b = t[static_cast<std::size_t>((i + 2) % 3)];
        auto [it, ins] = edge_index.emplace(key(a, b), static_cast<int>(edges.size()));
        if (ins) {
          EdgeRec r;
          r.a = std::min(a, b);
          r.b = std::max(a, b);
          r.t[0] = k;
          edges.push_back(r);
        } else {
          edges[static_cast<std::size_t>(it->second)].t[1] = k;
        }
      }
    }
    on_boundary.assign(P.size(), 0);
    for (const auto& [k, t] : btag) {
      on_boundary[static_cast<std::size_t>(k >> 32)] = 1;
      on_boundary[static_cast<std::size_t>(k & 0xffffffffu)] = 1;
    }
  }

  double length(int a, int b) const {
    return length_log(L[static_cast<std::size_t>(a)], L[static_cast<std::size_t>(b)], P[static_cast<std::size_t>(b)] - P[static_cast<std::size_t>(a)]);
  }
  MetricTensor mean_metric(std::initializer_list<int> vs) const {
    MetricTensor l{0.0, 0.0, 0.0};
    for (int v : vs) l = l + L[static_cast<std::size_t>(v)];
    return metric_exp(l * (1.0 / static_cast<double>(vs.size())));
  }
  double tri_quality(int a, int b, int c) const {
    return quality(mean_metric({a, b, c}), P[static_cast<std::size_t>(a)], P[static_cast<std::size_t>(b)], P[static_cast<std::size_t>(c)]);
  }
  double tri_quality(const std::array<int, 3>& t) const { return tri_quality(t[0], t[1], t[2]); }

  int add_vertex(const Vec2& x) {
    P.push_back(x);
    L.push_back(bg_.log_at(x));
    vdead.push_back(0);
    corner.push_back(0);
    return static_cast<int>(P.size()) - 1;
  }

  // ---- operations

  int split_pass() {
    refresh();
    std::vector<std::pair<double, int>> cand;
    for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
      const double l = length(edges[static_cast<std::size_t>(e)].a, edges[static_cast<std::size_t>(e)].b);
      if (l > kLmax) cand.push_back({-l, e});
    }
    std::sort(cand.begin(), cand.end());
    std::vector<char> touched(T.size(), 0);
    int n = 0;
    for (const auto& [negl, e] : cand) {
      const EdgeRec r = edges[static_cast<std::size_t>(e)];
      if (touched[static_cast<std::size_t>(r.t[0])] || (r.t[1] >= 0 && touched[static_cast<std::size_t>(r.t[1])])) continue;
      const int m = add_vertex((P[static_cast<std::size_t>(r.a)] + P[static_cast<std::size_t>(r.b)]) * 0.5);
      for (int side = 0; side < 2; ++side) {
        const int k = r.t[side];
        if (k < 0) continue;
        const auto t = T[static_cast<std::size_t>(k)];
        int i = 0;
        while (t[static_cast<std::size_t>(i)] == r.a || t[static_cast<std::size_t>(i)] == r.b) ++i;
        const int o = t[static_cast<std::size_t>(i)], u = t[static_cast<std::size_t>((i + 1) % 3)], w = t[static_cast<std::size_t>((i + 2) % 3)];
        T[static_cast<std::size_t>(k)] = {o, u, m};
        T.push_back({o, m, w});
        tag.push_back(tag[static_cast<std::size_t>(k)]);
        tdead.push_back(0);
        touched[static_cast<std::size_t>(k)] = 1;
      }
      auto bt = btag.find(key(r.a, r.b));
      if (bt != btag.end()) {
        const int tg = bt->second;
        btag.erase(bt);
        btag[key(r.a, m)] = tg;
        btag[key(m, r.b)] = tg;
      }
      ++n;
    }
    return n;
  }

  bool try_collapse(int v, int keep, const EdgeRec& r, std::vector<char>& vtouched) {
    if (corner[static_cast<std::size_t>(v)]) return false;
    const bool bedge = btag.count(key(v, keep)) > 0;
    if (on_boundary[static_cast<std::size_t>(v)] && !bedge) return false;
    // Link condition: common neighbours are exactly the opposite vertices.
    std::unordered_set<int> nv, nk;
    for (int k : vtris[static_cast<std::size_t>(v)])
      for (int x : T[static_cast<std::size_t>(k)])
        if (x != v) nv.insert(x);
    for (int k : vtris[static_cast<std::size_t>(keep)])
      for (int x : T[static_cast<std::size_t>(k)])
        if (x != keep) nk.insert(x);
    int common = 0;
    for (int x : nv)
      if (x != keep && nk.count(x)) ++common;
    if (common != (r.t[1] >= 0 ? 2 : 1)) return false;
    for (int x : nv)
      if (vtouched[static_cast<std::size_t>(x)]) return false;
    double old_q = std::numeric_limits<double>::infinity();
    for (int k : vtris[static_cast<std::size_t>(v)]) old_q = std::min(old_q, tri_quality(T[static_cast<std::size_t>(k)]));
    for (int k : vtris[static_cast<std::size_t>(v)]) {
      auto t = T[static_cast<std::size_t>(k)];
      if (std::find(t.begin(), t.end(), keep) != t.end()) continue;
      const Vec2 a0 = P[static_cast<std::size_t>(t[0])], b0 = P[static_cast<std::size_t>(t[1])], c0 = P[static_cast<std::size_t>(t[2])];
      const double scale = std::max({dot(b0 - a0, b0 - a0), dot(c0 - b0, c0 - b0), dot(a0 - c0, a0 - c0)});
      for (auto& x : t)
        if (x == v) x = keep;
      const Vec2 a = P[static_cast<std::size_t>(t[0])], b = P[static_cast<std::size_t>(t[1])], c = P[static_cast<std::size_t>(t[2])];
      if (!(signed_area(a, b, c) > 1e-10 * scale)) return false;
      if (tri_quality(t) < std::min(0.1, old_q)) return false;
    }
    for (int x : nv)
      if (x != keep && length(keep, x) > kLmax) return false;

    for (int k : vtris[static_cast<std::size_t>(v)]) {
      auto& t = T[static_cast<std::size_t>(k)];
      if (std::find(t.begin(), t.end(), keep) != t.end()) {
        tdead[static_cast<std::size_t>(k)] = 1;
        continue;
      }
      for (auto& x : t)
        if (x == v) x = keep;
    }
    if (bedge) {
      int other = -1, tg = 0;
      for (int x : nv)
        if (x != keep) {
          auto it = btag.find(key(v, x));
          if (it != btag.end()) {
            other = x;
            tg = it->second;
          }
        }
      btag.erase(key(v, keep));
      if (other >= 0) {
        btag.erase(key(v, other));
        btag[key(keep, other)] = tg;
      }
    }
    vdead[static_cast<std::size_t>(v)] = 1;
    vtouched[static_cast<std::size_t>(v)] = 1;
    vtouched[static_cast<std::size_t>(keep)] = 1;
    for (int x : nv) vtouched[static_cast<std::size_t>(x)] = 1;
    return true;
  }

  int collapse_pass() {
    refresh();
    std::vector<std::pair<double, int>> cand;
    for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
      const double l = length(edges[static_cast<std::size_t>(e)].a, edges[static_cast<std::size_t>(e)].b);
      if (l < kLmin) cand.push_back({l, e});
    }
    std::sort(cand.begin(), cand.end());
    std::vector<char> vtouched(P.size(), 0);
    int n = 0;
    for (const auto& [l, e] : cand) {
      const EdgeRec r = edges[static_cast<std::size_t>(e)];
      if (vtouched[static_cast<std::size_t>(r.a)] || vtouched[static_cast<std::size_t>(r.b)]) continue;
      if (try_collapse(r.a, r.b, r, vtouched) || try_collapse(r.b, r.a, r, vtouched)) ++n;
    }
    return n;
  }

  int flip_pass() {
    refresh();
    std::vector<char> touched(T.size(), 0);
    int n = 0;
    for (const auto& r : edges) {
      if (r.t[1] < 0) continue;
      const int k0 = r.t[0], k1 = r.t[1];
      if (touched[static_cast<std::size_t>(k0)] || touched[static_cast<std::size_t>(k1)]) continue;
      const auto t0 = T[static_cast<std::size_t>(k0)];
      int i = 0;
      while (t0[static_cast<std::size_t>(i)] == r.a || t0[static_cast<std::size_t>(i)] == r.b) ++i;
      const int o0 = t0[static_cast<std::size_t>(i)], u = t0[static_cast<std::size_t>((i + 1) % 3)], w = t0[static_cast<std::size_t>((i + 2) % 3)];
      const auto t1 = T[static_cast<std::size_t>(k1)];
      int o1 = -1;
      for (int x : t1)
        if (x != r.a && x != r.b) o1 = x;
      if (edge_index.count(key(o0, o1))) continue;
      const std::array<int, 3> n0{o0, u, o1}, n1{o0, o1, w};
      const Vec2 pu = P[static_cast<std::size_t>(u)], pw = P[static_cast<std::size_t>(w)];
      const Vec2 p0 = P[static_cast<std::size_t>(o0)], p1 = P[static_cast<std::size_t>(o1)];
      const double scale = dot(pw - pu, pw - pu) + dot(p1 - p0, p1 - p0);
      if (!(signed_area(p0, pu, p1) > 1e-10 * scale) || !(signed_area(p0, p1, pw) > 1e-10 * scale)) continue;
      const MetricTensor m = mean_metric({o0, u, o1, w});
      const double qold = std::min(quality(m, p0, pu, pw), quality(m, p1, pw, pu));
      const double qnew = std::min(quality(m, p0, pu, p1), quality(m, p0, p1, pw));
      if (qnew <= qold + 1e-4) continue;
      T[static_cast<std::size_t>(k0)] = n0;
      T[static_cast<std::size_t>(k1)] = n1;
      touched[static_cast<std::size_t>(k0)] = touched[static_cast<std::size_t>(k1)] = 1;
      edge_index[key(o0, o1)] = -1;
      ++n;
    }
    return n;
  }

  void smooth_pass() {
    refresh();
    for (int v = 0; v < static_cast<int>(P.size()); ++v) {
      if (vdead[static_cast<std::size_t>(v)] || on_boundary[static_cast<std::size_t>(v)]) continue;
      const auto& ball = vtris[static_cast<std::size_t>(v)];
      if (ball.empty()) continue;
      std::vector<int> nbr;
      for (int k : ball)
        for (int x : T[static_cast<std::size_t>(k)])
          if (x != v && std::find(nbr.begin(), nbr.end(), x) == nbr.end()) nbr.push_back(x);
      const Vec2 x0 = P[static_cast<std::size_t>(v)];
      Vec2 target{0.0, 0.0};
      for (int j : nbr) {
        const Vec2 xj = P[static_cast<std::size_t>(j)];
        const double l = std::max(length(v, j), 1e-12);
        target = target + xj + (x0 - xj) * (1.0 / l);
      }
      target = target * (1.0 / static_cast<double>(nbr.size()));
      double old_q = std::numeric_limits<double>::infinity();
      for (int k : ball) old_q = std::min(old_q, tri_quality(T[static_cast<std::size_t>(k)]));
      const MetricTensor l0 = L[static_cast<std::size_t>(v)];
      for (double step : {0.5, 0.25}) {
        const Vec2 xn = x0 + (target - x0) * step;
        P[static_cast<std::size_t>(v)] = xn;
        L[static_cast<std::size_t>(v)] = bg_.log_at(xn);
        bool ok = true;
        double new_q = std::numeric_limits<double>::infinity();
        for (int k : ball) {
          const auto& t = T[static_cast<std::size_t>(k)];
          const Vec2 a = P[static_cast<std::size_t>(t[0])], b = P[static_cast<std::size_t>(t[1])], c = P[static_cast<std::size_t>(t[2])];
          const double scale = std::max({dot(b - a, b - a), dot(c - b, c - b), dot(a - c, a - c)});
          if (!(signed_area(a, b, c) > 1e-10 * scale)) {
            ok = false;
            break;
          }
          new_q = std::min(new_q, tri_quality(t));
        }
        if (ok && new_q >= old_q) goto accepted;
      }
      P[static_cast<std::size_t>(v)] = x0;
      L[static_cast<std::size_t>(v)] = l0;
    accepted:;
    }
  }

  double band_fraction() {
    refresh();
    if (edges.empty()) return 1.0;
    int in = 0;
    for (const auto& r : edges) {
      const double l = length(r.a, r.b);
      if (l >= kLmin && l <= kLmax) ++in;
    }
    return static_cast<double>(in) / static_cast<double>(edges.size());
  }

  Triangulation compact() const {
    std::vector<int> map(P.size(), -1);
    std::vector<Vec2> verts;
    std::vector<std::array<int, 3>> tris;
    std::vector<int> tags;
    for (std::size_t k = 0; k < T.size(); ++k) {
      if (tdead[k]) continue;
      std::array<int, 3> t{};
      for (int i = 0; i < 3; ++i) {
        const int v = T[k][static_cast<std::size_t>(i)];
        if (map[static_cast<std::size_t>(v)] < 0) {
          map[static_cast<std::size_t>(v)] = static_cast<int>(verts.size());
          verts.push_back(P[static_cast<std::size_t>(v)]);
        }
        t[static_cast<std::size_t>(i)] = map[static_cast<std::size_t>(v)];
      }
      tris.push_back(t);
      tags.push_back(tag[k]);
    }
    std::vector<std::pair<std::uint64_t, int>> sorted(btag.begin(), btag.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<BoundarySegment> segs;
    for (const auto& [k, tg] : sorted) {
      const int a = map[static_cast<std::size_t>(k >> 32)], b = map[static_cast<std::size_t>(k & 0xffffffffu)];
      if (a < 0 || b < 0) throw RemeshError("remesher lost a boundary vertex");
      segs.push_back({a, b, tg});
    }
    return Triangulation(std::move(verts), std::move(tris), std::move(segs), std::move(tags));
  }

 private:
  const Background& bg_;
};

} // namespace

Triangulation remesh_internal(const Triangulation& mesh, const std::vector<MetricTensor>& vm, const RemeshOptions& opt,
                              RemeshReport* report) {
  if (vm.size() != static_cast<std::size_t>(mesh.num_vertices())) throw RemeshError("metric count does not match vertex count");
  for (const auto& m : vm)
    if (!m.is_spd()) throw RemeshError("metric field is not symmetric positive definite");
  const Background bg(mesh, vm);
  WorkMesh w(mesh, bg);
  RemeshReport rep;
  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    rep.sweeps = sweep;
    for (int i = 0; i < 12; ++i) {
      const int n = w.split_pass();
      rep.splits += n;
      if (n == 0) break;
    }
    for (int i = 0; i < 12; ++i) {
      const int n = w.collapse_pass();
      rep.collapses += n;
      if (n == 0) break;
    }
    for (int i = 0; i < 4; ++i) {
      const int n = w.flip_pass();
      rep.flips += n;
      if (n == 0) break;
    }
    for (int i = 0; i < 2; ++i) w.smooth_pass();
    for (int i = 0; i < 2; ++i) {
      const int n = w.flip_pass();
      rep.flips += n;
      if (n == 0) break;
    }
    rep.fraction_in_band = w.band_fraction();
    if (rep.fraction_in_band >= opt.target_fraction) {
      rep.converged = true;
      break;
    }
  }
  {
    rep.quality_min = 1.0;
    int n = 0, low = 0;
    for (std::size_t k = 0; k < w.T.size(); ++k) {
      if (w.tdead[k]) continue;
      const double q = w.tri_quality(w.T[k]);
      rep.quality_min = std::min(rep.quality_min, q);
      rep.quality_mean += q;
      low += q < 0.5;
      ++n;
    }
    rep.quality_mean /= std::max(n, 1);
    rep.quality_low = static_cast<double>(low) / std::max(n, 1);
  }
  Triangulation out;
  try {
    out = w.compact();
  } catch (const GeometryError& e) {
    throw RemeshError(std::string("remesher produced an invalid mesh: ") + e.what());
  }
  if (report) *report = rep;
  return out;
}

std::vector<int> transfer_orders(const Triangulation& old_mesh, const std::vector<int>& p, const Triangulation& new_mesh) {
  if (p.size() != static_cast<std::size_t>(old_mesh.num_triangles())) throw Error("transfer_orders: order vector size mismatch");
  const PointLocator loc(old_mesh);
  std::vector<int> out(static_cast<std::size_t>(new_mesh.num_triangles()));
  for (int k = 0; k < new_mesh.num_triangles(); ++k)
    out[static_cast<std::size_t>(k)] = p[static_cast<std::size_t>(loc.locate_or_nearest(new_mesh.barycenter(k)))];
  return out;
}

} // namespace hpdpg
