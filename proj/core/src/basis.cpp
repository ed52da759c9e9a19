#include "hpdpg/basis.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace hpdpg {

namespace {

/// P_n^{(a,0)}(z) and derivative for n = 0..nmax.
void jacobi(int nmax, double a, double z, double* val, double* der) {
  val[0] = 1.0;
  der[0] = 0.0;
  if (nmax == 0) return;
  val[1] = 0.5 * (a + (a + 2.0) * z);
  der[1] = 0.5 * (a + 2.0);
  for (int n = 2; n <= nmax; ++n) {
    const double a1 = 2.0 * n * (n + a) * (2.0 * n + a - 2.0);
    const double a2 = (2.0 * n + a - 1.0) * a * a;
    const double a3 = (2.0 * n + a - 2.0) * (2.0 * n + a - 1.0) * (2.0 * n + a);
    const double a4 = 2.0 * (n + a - 1.0) * (n - 1.0) * (2.0 * n + a);
    val[n] = ((a2 + a3 * z) * val[n - 1] - a4 * val[n - 2]) / a1;
    der[n] = ((a2 + a3 * z) * der[n - 1] + a3 * val[n - 1] - a4 * der[n - 2]) / a1;
  }
}

constexpr std::array<Vec2, 3> kRefVertices = {Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};

} // namespace

int dubiner_dim(int p) { return p < 0 ? 0 : (p + 1) * (p + 2) / 2; }

int dubiner_degree(int index) {
  int n = 0;
  while (dubiner_dim(n) <= index) ++n;
  return n;
}

void eval_dubiner(int p, const Vec2& ref, std::span<double> value, std::span<double> d_xi, std::span<double> d_eta) {
  const double s = 2.0 * ref.x + ref.y - 1.0;
  const double t = 1.0 - ref.y;
  const double z = 2.0 * ref.y - 1.0;
  // Homogenized Legendre Q_i(s,t) = t^i P_i(s/t) with partial derivatives.
  double q[64], qs[64], qt[64];
  q[0] = 1.0;
  qs[0] = 0.0;
  qt[0] = 0.0;
  if (p >= 1) {
    q[1] = s;
    qs[1] = 1.0;
    qt[1] = 0.0;
  }
  for (int n = 1; n < p; ++n) {
    const double c1 = (2.0 * n + 1.0) / (n + 1.0);
    const double c2 = static_cast<double>(n) / (n + 1.0);
    q[n + 1] = c1 * s * q[n] - c2 * t * t * q[n - 1];
    qs[n + 1] = c1 * (q[n] + s * qs[n]) - c2 * t * t * qs[n - 1];
    qt[n + 1] = c1 * s * qt[n] - c2 * (2.0 * t * q[n - 1] + t * t * qt[n - 1]);
  }
  double jv[64], jd[64];
  int idx = 0;
  for (int n = 0; n <= p; ++n) {
    for (int i = 0; i <= n; ++i) {
      const int j = n - i;
      jacobi(j, 2.0 * i + 1.0, z, jv, jd);
      const double scale = std::sqrt((2.0 * i + 1.0) * (2.0 * i + 2.0 * j + 2.0));
      const double qi = q[i], dqs = qs[i], dqt = qt[i];
      value[static_cast<std::size_t>(idx)] = scale * qi * jv[j];
      d_xi[static_cast<std::size_t>(idx)] = scale * 2.0 * dqs * jv[j];
      d_eta[static_cast<std::size_t>(idx)] = scale * ((dqs - dqt) * jv[j] + 2.0 * qi * jd[j]);
      ++idx;
    }
  }
}

void eval_trace_basis(int order, double t, std::span<double> out) {
  out[0] = 1.0 - t;
  if (order < 1) return;
  out[1] = t;
  if (order < 2) return;
  double lv[64], ld[64];
  jacobi(order, 0.0, 2.0 * t - 1.0, lv, ld);
  for (int j = 0; j + 2 <= order; ++j) out[static_cast<std::size_t>(2 + j)] = lv[j + 2] - lv[j];
}

void eval_flux_basis(int order, double t, std::span<double> out) {
  double lv[64], ld[64];
  jacobi(order, 0.0, 2.0 * t - 1.0, lv, ld);
  for (int j = 0; j <= order; ++j) out[static_cast<std::size_t>(j)] = lv[j];
}

int ReferenceBasis::size() const {
  switch (kind) {
    case BasisKind::Trace: return trace_dim(order);
    case BasisKind::Flux: return flux_dim(order);
    default: return dubiner_dim(order);
  }
}

ReferenceBasis make_reference_basis(BasisKind kind, int order, const QuadratureRule& rule) {
  ReferenceBasis b;
  b.kind = kind;
  b.order = order;
  const int n = b.size();
  const auto nq = static_cast<Eigen::Index>(rule.size());
  b.value.resize(nq, n);
  b.d_xi.resize(nq, n);
  b.d_eta.resize(nq, n);
  std::vector<double> v(static_cast<std::size_t>(n)), dx(static_cast<std::size_t>(n)), dy(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < nq; ++k) {
    const Vec2& pt = rule.points[static_cast<std::size_t>(k)];
    if (kind == BasisKind::Trace || kind == BasisKind::Flux) {
      if (kind == BasisKind::Trace) eval_trace_basis(order, pt.x, v);
      else eval_flux_basis(order, pt.x, v);
      std::fill(dx.begin(), dx.end(), 0.0);
      std::fill(dy.begin(), dy.end(), 0.0);
    } else {
      eval_dubiner(order, pt, v, dx, dy);
    }
    for (int i = 0; i < n; ++i) {
      b.value(k, i) = v[static_cast<std::size_t>(i)];
      b.d_xi(k, i) = dx[static_cast<std::size_t>(i)];
      b.d_eta(k, i) = dy[static_cast<std::size_t>(i)];
    }
  }
  return b;
}

BasisValues eval_basis(const ReferenceBasis& basis, const std::array<double, 3>& bary) {
  constexpr double tol = 1e-12;
  const double sum = bary[0] + bary[1] + bary[2];
  if (bary[0] < -tol || bary[1] < -tol || bary[2] < -tol || std::abs(sum - 1.0) > tol)
    throw Error("eval_basis: point outside the reference triangle");
  if (basis.kind == BasisKind::Trace || basis.kind == BasisKind::Flux)
    throw Error("eval_basis: edge bases are evaluated with eval_trace_basis/eval_flux_basis");
  const int n = basis.size();
  BasisValues out;
  out.value.resize(static_cast<std::size_t>(n));
  std::vector<double> dx(static_cast<std::size_t>(n)), dy(static_cast<std::size_t>(n));
  eval_dubiner(basis.order, {bary[1], bary[2]}, out.value, dx, dy);
  out.grad.resize(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] = {dx[i], dy[i]};
  return out;
}

Vec2 reference_edge_point(int local_edge, int orientation, double t) {
  Vec2 a = kRefVertices[static_cast<std::size_t>((local_edge + 1) % 3)];
  Vec2 b = kRefVertices[static_cast<std::size_t>((local_edge + 2) % 3)];
  if (orientation != 0) std::swap(a, b);
  return a + (b - a) * t;
}

namespace {

ReferenceTables make_tables(int q) {
  ReferenceTables tab;
  tab.q = q;
  tab.nv = dubiner_dim(q);
  const int nv = tab.nv;
  const QuadratureRule& rule = quadrature_rule(std::max(1, 2 * q));
  const auto nq = static_cast<Eigen::Index>(rule.size());
  Eigen::MatrixXd v(nq, nv), dx(nq, nv), dy(nq, nv);
  std::vector<double> bv(static_cast<std::size_t>(nv)), bx(static_cast<std::size_t>(nv)), by(static_cast<std::size_t>(nv));
  for (Eigen::Index k = 0; k < nq; ++k) {
    eval_dubiner(q, rule.points[static_cast<std::size_t>(k)], bv, bx, by);
    for (int i = 0; i < nv; ++i) {
      v(k, i) = bv[static_cast<std::size_t>(i)];
      dx(k, i) = bx[static_cast<std::size_t>(i)];
      dy(k, i) = by[static_cast<std::size_t>(i)];
    }
  }
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), nq);
  const std::array<const Eigen::MatrixXd*, 2> d = {&dx, &dy};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) tab.stiff[a][b] = d[a]->transpose() * w.asDiagonal() * (*d[b]);
    tab.conv[a] = d[a]->transpose() * w.asDiagonal() * v;
  }
  const int nt = trace_dim(kMaxTraceOrder);
  const int nf = flux_dim(kMaxTraceOrder);
  const LineRule& line = line_rule(q + kMaxTraceOrder + 2);
  std::vector<double> tv(static_cast<std::size_t>(nt)), fv(static_cast<std::size_t>(nf));
  for (int e = 0; e < 3; ++e)
    for (int o = 0; o < 2; ++o) {
      Eigen::MatrixXd& tr = tab.trace[static_cast<std::size_t>(e)][static_cast<std::size_t>(o)];
      Eigen::MatrixXd& fl = tab.flux[static_cast<std::size_t>(e)][static_cast<std::size_t>(o)];
      tr = Eigen::MatrixXd::Zero(nv, nt);
      fl = Eigen::MatrixXd::Zero(nv, nf);
      for (std::size_t g = 0; g < line.points.size(); ++g) {
        const double t = line.points[g];
        eval_dubiner(q, reference_edge_point(e, o, t), bv, bx, by);
        eval_trace_basis(kMaxTraceOrder, t, tv);
        eval_flux_basis(kMaxTraceOrder, t, fv);
        for (int i = 0; i < nv; ++i) {
          const double wi = line.weights[g] * bv[static_cast<std::size_t>(i)];
          for (int m = 0; m < nt; ++m) tr(i, m) += wi * tv[static_cast<std::size_t>(m)];
          for (int m = 0; m < nf; ++m) fl(i, m) += wi * fv[static_cast<std::size_t>(m)];
        }
      }
    }
  return tab;
}

PointTable make_point_table(int q, int degree) {
  PointTable t;
  t.q = q;
  t.rule = &quadrature_rule(degree);
  const int nv = dubiner_dim(q);
  const auto nq = static_cast<Eigen::Index>(t.rule->size());
  t.value.resize(nq, nv);
  t.d_xi.resize(nq, nv);
  t.d_eta.resize(nq, nv);
  std::vector<double> bv(static_cast<std::size_t>(nv)), bx(static_cast<std::size_t>(nv)), by(static_cast<std::size_t>(nv));
  for (Eigen::Index k = 0; k < nq; ++k) {
    eval_dubiner(q, t.rule->points[static_cast<std::size_t>(k)], bv, bx, by);
    for (int i = 0; i < nv; ++i) {
      t.value(k, i) = bv[static_cast<std::size_t>(i)];
      t.d_xi(k, i) = bx[static_cast<std::size_t>(i)];
      t.d_eta(k, i) = by[static_cast<std::size_t>(i)];
    }
  }
  return t;
}

} // namespace

const ReferenceTables& reference_tables(int q) {
  if (q < 0 || q > 30) throw Error("reference_tables: unsupported order " + std::to_string(q));
  static std::map<int, std::unique_ptr<ReferenceTables>> cache;
  static std::mutex mu;
  std::lock_guard lock(mu);
  auto it = cache.find(q);
  if (it == cache.end()) it = cache.emplace(q, std::make_unique<ReferenceTables>(make_tables(q))).first;
  return *it->second;
}

const PointTable& point_table(int q, int degree) {
  static std::map<std::pair<int, int>, std::unique_ptr<PointTable>> cache;
  static std::mutex mu;
  std::lock_guard lock(mu);
  const auto key = std::make_pair(q, degree);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<PointTable>(make_point_table(q, degree))).first;
  return *it->second;
}

} // namespace hpdpg
