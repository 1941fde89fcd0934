#include "hardyfem/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hardyfem {

namespace {

// Golub-Welsch nodes/weights for the Jacobi weight (1-x)^alpha on [-1,1],
// recurrence coefficients from the standard three-term relations.
void gauss_jacobi_sym(int n, double alpha, std::vector<double>& nodes,
                      std::vector<double>& weights) {
  if (n < 1 || n > 256) throw std::invalid_argument("gauss_jacobi: bad point count");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    J(k, k) = k == 0 ? -alpha / (alpha + 2.0)
                     : -alpha * alpha / ((2.0 * k + alpha) * (2.0 * k + alpha + 2.0));
  }
  for (int k = 1; k < n; ++k) {
    double b2;
    if (k == 1)
      b2 = 4.0 * (1.0 + alpha) / ((2.0 + alpha) * (2.0 + alpha) * (3.0 + alpha));
    else
      b2 = 4.0 * k * k * (k + alpha) * (k + alpha) /
           ((2.0 * k + alpha) * (2.0 * k + alpha) * (2.0 * k + alpha + 1.0) *
            (2.0 * k + alpha - 1.0));
    J(k, k - 1) = J(k - 1, k) = std::sqrt(b2);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::pow(2.0, alpha + 1.0) / (alpha + 1.0);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = mu0 * v0 * v0;
  }
}

struct Panel1D {
  std::vector<double> nodes, weights;
};

const Panel1D& gl_cached(int n) {
  static thread_local std::vector<Panel1D> cache;
  if (n >= static_cast<int>(cache.size())) cache.resize(n + 1);
  if (cache[n].nodes.empty()) gauss_legendre_01(n, cache[n].nodes, cache[n].weights);
  return cache[n];
}

// Degree-5 positive rule on the reference triangle {u,v >= 0, u+v <= 1},
// built as a conical product (weights sum to 1/2).
struct TriRule {
  std::vector<double> u, v, w;
};

const TriRule& tri_rule() {
  static const TriRule rule = [] {
    TriRule r;
    std::vector<double> xu, wu, xv, wv;
    gauss_jacobi_01(3, 1.0, xu, wu);  // weight (1-u)
    gauss_legendre_01(3, xv, wv);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        r.u.push_back(xu[i]);
        r.v.push_back(xv[j] * (1.0 - xu[i]));
        r.w.push_back(wu[i] * wv[j]);
      }
    return r;
  }();
  return rule;
}

QuadRule conical_tet_rule(int n, int degree) {
  QuadRule rule;
  rule.dim = 3;
  rule.degree = degree;
  std::vector<double> xi, wxi, eta, weta, zeta, wzeta;
  gauss_jacobi_01(n, 2.0, xi, wxi);
  gauss_jacobi_01(n, 1.0, eta, weta);
  gauss_legendre_01(n, zeta, wzeta);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double x = xi[i];
        const double y = eta[j] * (1.0 - xi[i]);
        const double z = zeta[k] * (1.0 - xi[i]) * (1.0 - eta[j]);
        rule.points.push_back({1.0 - x - y - z, x, y, z});
        rule.weights.push_back(wxi[i] * weta[j] * wzeta[k]);
      }
  return rule;
}

Vec3 ref_point(const QuadRule& rule, int q) {
  const auto& b = rule.points[q];
  if (rule.dim == 1) return Vec3(b[1], 0.0, 0.0);
  return Vec3(b[1], b[2], b[3]);
}

int origin_vertex_of_cell(const AffineCellMap& cell) {
  for (int i = 0; i <= cell.dim; ++i)
    if (cell.vertex(i).norm() <= 1e-14) return i;
  return -1;
}

using FnSpan = std::span<const std::function<double(const Vec3&)>>;

// ---------------------------------------------------------------------------
// Duffy-type cone integration for cells with the origin as a vertex.
// The cell is written as {t*y : t in [0,1], y on the opposite facet}; the
// Jacobian contributes t^(dim-1), which tames the |x|^-2 singularity for
// dim = 3.  The t-axis is integrated with geometrically graded panels, the
// facet with an adaptive degree-5 triangle rule.
// ---------------------------------------------------------------------------

struct ManyAccum {
  std::vector<double> value;
  std::vector<double> error;
};

void facet_integrand(const SingularWeight& w, FnSpan fs, double t, const Vec3& q1,
                     const Vec3& q2, const Vec3& q3, double u, double v,
                     std::vector<double>& out) {
  const Vec3 y = u * q1 + v * q2 + (1.0 - u - v) * q3;
  const double wv = w.value(t * y.norm());
  const Vec3 x = t * y;
  for (size_t k = 0; k < fs.size(); ++k) out[k] = wv * fs[k](x);
}

// Sub-triangle of the facet parameter domain: points (au + s*d*u, av + s*d*v)
// for (u,v) in the unit reference triangle; s = -1 marks inverted triangles
// produced by uniform refinement.
struct Tri {
  double au, av, s, d;
};

void tri_rule_apply(const SingularWeight& w, FnSpan fs, double t, const Vec3& q1,
                    const Vec3& q2, const Vec3& q3, const Tri& tri,
                    std::vector<double>& out, std::vector<double>& tmp) {
  const TriRule& rule = tri_rule();
  std::fill(out.begin(), out.end(), 0.0);
  const double af = tri.d * tri.d;
  for (size_t q = 0; q < rule.w.size(); ++q) {
    facet_integrand(w, fs, t, q1, q2, q3, tri.au + tri.s * tri.d * rule.u[q],
                    tri.av + tri.s * tri.d * rule.v[q], tmp);
    for (size_t k = 0; k < fs.size(); ++k) out[k] += af * rule.w[q] * tmp[k];
  }
}

// Adaptive integral over a facet sub-triangle at fixed t; all entries of fs
// share quadrature points.
void adaptive_facet(const SingularWeight& w, FnSpan fs, double t, const Vec3& q1,
                    const Vec3& q2, const Vec3& q3, const Tri& tri, int depth,
                    double rel_tol, const std::vector<double>& floors,
                    std::vector<double>& acc, int& budget) {
  const size_t m = fs.size();
  std::vector<double> coarse(m), fine(m, 0.0), val(m), tmp(m);
  tri_rule_apply(w, fs, t, q1, q2, q3, tri, coarse, tmp);

  const double dh = 0.5 * tri.d;
  const Tri children[4] = {
      {tri.au, tri.av, tri.s, dh},
      {tri.au + tri.s * dh, tri.av, tri.s, dh},
      {tri.au, tri.av + tri.s * dh, tri.s, dh},
      {tri.au + tri.s * dh, tri.av + tri.s * dh, -tri.s, dh},
  };
  for (const Tri& c : children) {
    tri_rule_apply(w, fs, t, q1, q2, q3, c, val, tmp);
    for (size_t k = 0; k < m; ++k) fine[k] += val[k];
  }
  budget -= 5 * static_cast<int>(tri_rule().w.size());

  constexpr double kRichardson = 15.0;  // degree-5 base rule, kept conservative
  bool ok = true;
  for (size_t k = 0; k < m; ++k)
    if (std::abs(fine[k] - coarse[k]) / kRichardson >
        rel_tol * (std::abs(fine[k]) + floors[k]))
      ok = false;
  if (ok || depth >= 10 || budget <= 0) {
    for (size_t k = 0; k < m; ++k) acc[k] += fine[k];
    return;
  }
  for (const Tri& c : children)
    adaptive_facet(w, fs, t, q1, q2, q3, c, depth + 1, rel_tol, floors, acc, budget);
}

ManyAccum duffy_cone(const AffineCellMap& cell, const SingularWeight& w, FnSpan fs,
                     double tol) {
  const size_t m = fs.size();
  const int apex = origin_vertex_of_cell(cell);
  ManyAccum out{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};

  if (cell.dim == 1) {
    // x = t*b with b the far endpoint; dx = |b| dt.
    const Vec3 far = cell.vertex(apex == 0 ? 1 : 0);
    const double b = std::abs(far.x());
    std::vector<double> prev_panel(m, 0.0);
    const Panel1D& gl = gl_cached(8);
    double hi = 1.0;
    std::vector<double> floors(m, 0.0);
    for (int j = 0; j < 220; ++j) {
      const double lo = hi * 0.5;
      std::vector<double> panel(m, 0.0);
      for (size_t q = 0; q < gl.nodes.size(); ++q) {
        const double t = lo + (hi - lo) * gl.nodes[q];
        const double wt = (hi - lo) * gl.weights[q] * b * w.value(t * b);
        const Vec3 x(t * far.x(), 0.0, 0.0);
        for (size_t k = 0; k < m; ++k) panel[k] += wt * fs[k](x);
      }
      double scale = 0.0;
      for (size_t k = 0; k < m; ++k) {
        out.value[k] += panel[k];
        scale = std::max(scale, std::abs(out.value[k]));
      }
      for (size_t k = 0; k < m; ++k) floors[k] = 1e-6 * scale;
      bool done = j > 3;
      for (size_t k = 0; k < m && done; ++k) {
        const double q_ratio =
            std::abs(prev_panel[k]) > 0 ? std::abs(panel[k]) / std::abs(prev_panel[k]) : 0.0;
        const double tail = q_ratio < 0.9 ? std::abs(panel[k]) * q_ratio / (1.0 - q_ratio)
                                          : std::abs(panel[k]) * 10.0;
        out.error[k] = tail + std::abs(panel[k]) * 1e-3;
        if (tail > tol * (std::abs(out.value[k]) + floors[k])) done = false;
      }
      if (done) return out;
      prev_panel = panel;
      hi = lo;
    }
    for (size_t k = 0; k < m; ++k) out.error[k] = std::abs(prev_panel[k]);
    return out;
  }

  // dim == 3: gather the three non-apex vertices.
  Vec3 q[3];
  int qi = 0;
  for (int i = 0; i <= 3; ++i)
    if (i != apex) q[qi++] = cell.vertex(i);
  Mat3 Bq;
  for (int i = 0; i < 3; ++i) Bq.col(i) = q[i];
  const double J = std::abs(Bq.determinant());

  const Panel1D& gl = gl_cached(6);
  std::vector<double> prev_panel(m, 0.0), floors(m, 0.0);
  double hi = 1.0;
  bool have_prev = false;
  for (int j = 0; j < 220; ++j) {
    const double lo = hi * 0.5;
    std::vector<double> panel(m, 0.0);
    for (size_t tq = 0; tq < gl.nodes.size(); ++tq) {
      const double t = lo + (hi - lo) * gl.nodes[tq];
      std::vector<double> facet(m, 0.0);
      int budget = 40000;
      adaptive_facet(w, fs, t, q[0], q[1], q[2], Tri{0.0, 0.0, 1.0, 1.0}, 0, 0.25 * tol,
                     floors, facet, budget);
      const double wt = (hi - lo) * gl.weights[tq] * J * t * t;
      for (size_t k = 0; k < m; ++k) panel[k] += wt * facet[k];
    }
    double scale = 0.0;
    for (size_t k = 0; k < m; ++k) {
      out.value[k] += panel[k];
      scale = std::max(scale, std::abs(out.value[k]));
    }
    for (size_t k = 0; k < m; ++k) floors[k] = 1e-6 * scale;

    if (have_prev && j > 3) {
      bool done = true;
      for (size_t k = 0; k < m; ++k) {
        const double q_ratio =
            std::abs(prev_panel[k]) > 0 ? std::abs(panel[k]) / std::abs(prev_panel[k]) : 0.0;
        const double tail = q_ratio < 0.9 ? std::abs(panel[k]) * q_ratio / (1.0 - q_ratio)
                                          : std::abs(panel[k]) * 10.0;
        out.error[k] = tail + std::abs(panel[k]) * 1e-3;
        if (tail > tol * (std::abs(out.value[k]) + floors[k])) done = false;
      }
      if (done) return out;
    }
    prev_panel = panel;
    have_prev = true;
    hi = lo;
  }
  for (size_t k = 0; k < m; ++k)
    out.error[k] = std::max(out.error[k], std::abs(prev_panel[k]));
  return out;
}

// ---------------------------------------------------------------------------
// Adaptive subdivision with a smooth rule for cells away from the origin.
// ---------------------------------------------------------------------------

struct Simplex {
  Vec3 p[4];
};

void rule_on_simplex(const QuadRule& rule, const SingularWeight& w, FnSpan fs,
                     const Simplex& s, int dim, std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  double vol;
  if (dim == 1) {
    vol = std::abs(s.p[1].x() - s.p[0].x());
  } else {
    Mat3 d;
    for (int i = 0; i < 3; ++i) d.col(i) = s.p[i + 1] - s.p[0];
    vol = std::abs(d.determinant()) / 6.0;
  }
  const double ref_vol = dim == 1 ? 1.0 : 1.0 / 6.0;
  for (int q = 0; q < rule.size(); ++q) {
    Vec3 x = Vec3::Zero();
    for (int i = 0; i <= dim; ++i) x += rule.points[q][i] * s.p[i];
    const double wt = rule.weights[q] / ref_vol * vol * w.value(x.norm());
    for (size_t k = 0; k < fs.size(); ++k) out[k] += wt * fs[k](x);
  }
}

void split_simplex(const Simplex& s, int dim, std::vector<Simplex>& children) {
  children.clear();
  if (dim == 1) {
    const Vec3 mid = 0.5 * (s.p[0] + s.p[1]);
    children.push_back({{s.p[0], mid, Vec3::Zero(), Vec3::Zero()}});
    children.push_back({{mid, s.p[1], Vec3::Zero(), Vec3::Zero()}});
    return;
  }
  Vec3 m01 = 0.5 * (s.p[0] + s.p[1]), m02 = 0.5 * (s.p[0] + s.p[2]);
  Vec3 m03 = 0.5 * (s.p[0] + s.p[3]), m12 = 0.5 * (s.p[1] + s.p[2]);
  Vec3 m13 = 0.5 * (s.p[1] + s.p[3]), m23 = 0.5 * (s.p[2] + s.p[3]);
  children.push_back({{s.p[0], m01, m02, m03}});
  children.push_back({{s.p[1], m01, m12, m13}});
  children.push_back({{s.p[2], m02, m12, m23}});
  children.push_back({{s.p[3], m03, m13, m23}});
  // interior octahedron, shortest diagonal
  const double d1 = (m01 - m23).squaredNorm();
  const double d2 = (m02 - m13).squaredNorm();
  const double d3 = (m03 - m12).squaredNorm();
  if (d2 <= d1 && d2 <= d3) {
    children.push_back({{m02, m13, m01, m03}});
    children.push_back({{m02, m13, m03, m23}});
    children.push_back({{m02, m13, m23, m12}});
    children.push_back({{m02, m13, m12, m01}});
  } else if (d1 <= d3) {
    children.push_back({{m01, m23, m02, m03}});
    children.push_back({{m01, m23, m03, m13}});
    children.push_back({{m01, m23, m13, m12}});
    children.push_back({{m01, m23, m12, m02}});
  } else {
    children.push_back({{m03, m12, m01, m02}});
    children.push_back({{m03, m12, m02, m23}});
    children.push_back({{m03, m12, m23, m13}});
    children.push_back({{m03, m12, m13, m01}});
  }
}

// Accepts a leaf when its Richardson estimate fits the volume-proportional
// share of the absolute error budget (or the local relative tolerance).
void adaptive_smooth(const QuadRule& rule, const SingularWeight& w, FnSpan fs,
                     const Simplex& s, int dim, int depth, double rel_tol,
                     double vol_frac, const std::vector<double>& abs_budget,
                     ManyAccum& acc, int& budget, bool& converged) {
  const size_t m = fs.size();
  std::vector<double> coarse(m), fine(m, 0.0), tmp(m);
  rule_on_simplex(rule, w, fs, s, dim, coarse);
  std::vector<Simplex> children;
  split_simplex(s, dim, children);
  for (const auto& c : children) {
    rule_on_simplex(rule, w, fs, c, dim, tmp);
    for (size_t k = 0; k < m; ++k) fine[k] += tmp[k];
  }
  budget -= static_cast<int>(children.size() + 1) * rule.size();

  // Richardson: the refined value is far more accurate than the difference
  // to the coarse one; a conservative divisor (h^5-equivalent instead of the
  // rule's full order) guards integrands with reduced smoothness.
  constexpr double kRichardson = 31.0;
  bool ok = true;
  for (size_t k = 0; k < m; ++k) {
    const double err = std::abs(fine[k] - coarse[k]) / kRichardson;
    if (err > std::max(rel_tol * std::abs(fine[k]), abs_budget[k] * vol_frac)) ok = false;
  }

  if (ok || depth >= 24 || budget <= 0) {
    if (!ok) converged = false;
    for (size_t k = 0; k < m; ++k) {
      acc.value[k] += fine[k];
      acc.error[k] += std::abs(fine[k] - coarse[k]) / kRichardson;
    }
    return;
  }
  const double child_frac = vol_frac / static_cast<double>(children.size());
  for (const auto& c : children)
    adaptive_smooth(rule, w, fs, c, dim, depth + 1, rel_tol, child_frac, abs_budget, acc,
                    budget, converged);
}

}  // namespace

void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  gauss_jacobi_01(n, 0.0, nodes, weights);
}

void gauss_jacobi_01(int n, double alpha, std::vector<double>& nodes,
                     std::vector<double>& weights) {
  gauss_jacobi_sym(n, alpha, nodes, weights);
  const double scale = std::pow(2.0, -(alpha + 1.0));
  for (int i = 0; i < n; ++i) {
    nodes[i] = 0.5 * (1.0 + nodes[i]);
    weights[i] *= scale;
  }
}

QuadRule simplex_rule(int dim, int degree) {
  if (degree < 1 || degree > 5)
    throw std::invalid_argument("simplex_rule: degree must be in 1..5");
  if (dim == 1) {
    QuadRule rule;
    rule.dim = 1;
    rule.degree = degree;
    std::vector<double> x, w;
    gauss_legendre_01((degree + 2) / 2, x, w);
    for (size_t i = 0; i < x.size(); ++i) {
      rule.points.push_back({1.0 - x[i], x[i], 0.0, 0.0});
      rule.weights.push_back(w[i]);
    }
    return rule;
  }
  if (dim != 3) throw std::invalid_argument("simplex_rule: dim must be 1 or 3");

  QuadRule rule;
  rule.dim = 3;
  rule.degree = degree;
  if (degree == 1) {
    rule.points.push_back({0.25, 0.25, 0.25, 0.25});
    rule.weights.push_back(1.0 / 6.0);
    return rule;
  }
  if (degree == 2) {
    const double a = (5.0 + 3.0 * std::sqrt(5.0)) / 20.0;
    const double b = (5.0 - std::sqrt(5.0)) / 20.0;
    for (int i = 0; i < 4; ++i) {
      std::array<double, 4> bary{b, b, b, b};
      bary[i] = a;
      rule.points.push_back(bary);
      rule.weights.push_back(1.0 / 24.0);
    }
    return rule;
  }
  return conical_tet_rule((degree + 2) / 2, degree);
}

double SingularWeight::value(double r) const {
  switch (kind) {
    case SingularKind::inv_sq:
      return 1.0 / (r * r);
    case SingularKind::inv_sq_logsq: {
      const double L = std::log(R / r);
      return 1.0 / (r * r * L * L);
    }
    case SingularKind::logsq_inv: {
      const double L = std::log(R / r);
      return 1.0 / (L * L);
    }
    case SingularKind::mu_weight:
      return std::pow(r, -(N - 2));
  }
  return 0.0;
}

SingularWeight make_weight(SingularKind kind, double R, int N) {
  if (R < 1.0)
    throw std::invalid_argument("SingularWeight: R must be >= 1 on the unit ball");
  if (N < 2) throw std::invalid_argument("SingularWeight: N must be >= 2");
  return SingularWeight{kind, R, N};
}

double integrate_smooth(const AffineCellMap& cell,
                        const std::function<double(const Vec3&)>& f, int degree) {
  const QuadRule rule = simplex_rule(cell.dim, degree);
  double acc = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    const Vec3 x = cell.map(ref_point(rule, q));
    acc += rule.weights[q] * f(x);
  }
  return acc * cell.det_abs;
}

std::vector<SingularIntegral> integrate_singular_many(const AffineCellMap& cell,
                                                      const SingularWeight& w, FnSpan fs,
                                                      double tol) {
  const size_t m = fs.size();
  std::vector<SingularIntegral> result(m);
  if (m == 0) return result;

  if (origin_vertex_of_cell(cell) >= 0) {
    ManyAccum acc = duffy_cone(cell, w, fs, tol);
    for (size_t k = 0; k < m; ++k) {
      result[k].value = acc.value[k];
      result[k].error = acc.error[k];
      result[k].converged =
          acc.error[k] <= 10.0 * tol * (std::abs(acc.value[k]) + 1e-300) + 1e-290;
    }
    return result;
  }

  // Origin must not lie inside the cell (guaranteed by the mesh module for
  // generated meshes); barycentric check catches misuse.
  if (cell.dim == 3) {
    Eigen::Matrix4d M;
    for (int i = 0; i < 4; ++i) {
      M.block<3, 1>(0, i) = cell.vertex(i);
      M(3, i) = 1.0;
    }
    const Eigen::Vector4d bary = M.fullPivLu().solve(Eigen::Vector4d(0, 0, 0, 1));
    if (bary.minCoeff() > 1e-12)
      throw std::invalid_argument(
          "integrate_singular: origin lies inside a cell without being a vertex");
  }

  Simplex s;
  for (int i = 0; i <= cell.dim; ++i) s.p[i] = cell.vertex(i);
  // Degree-7 base rule: each subdivision level gains ~2^8, so per-entry
  // tolerances of 1e-10 stay reachable near the singular region.
  static const QuadRule rule3 = conical_tet_rule(4, 7);
  static const QuadRule rule1 = [] {
    QuadRule r;
    r.dim = 1;
    r.degree = 11;
    std::vector<double> x, wq;
    gauss_legendre_01(6, x, wq);
    for (size_t i = 0; i < x.size(); ++i) {
      r.points.push_back({1.0 - x[i], x[i], 0.0, 0.0});
      r.weights.push_back(wq[i]);
    }
    return r;
  }();
  const QuadRule& rule = cell.dim == 1 ? rule1 : rule3;
  ManyAccum acc{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};

  // Absolute error budgets from a first coarse sweep; near-zero entries get
  // a floor tied to the dominant entry so they cannot force unbounded
  // refinement.
  std::vector<double> coarse(m);
  rule_on_simplex(rule, w, fs, s, cell.dim, coarse);
  double scale = 0.0;
  for (double c : coarse) scale = std::max(scale, std::abs(c));
  std::vector<double> abs_budget(m);
  for (size_t k = 0; k < m; ++k)
    abs_budget[k] = tol * (std::abs(coarse[k]) + 1e-6 * scale) + 1e-300;

  int budget = 2000000;
  bool converged = true;
  adaptive_smooth(rule, w, fs, s, cell.dim, 0, tol, 1.0, abs_budget, acc, budget, converged);
  for (size_t k = 0; k < m; ++k) {
    result[k].value = acc.value[k];
    result[k].error = acc.error[k];
    result[k].converged = converged;
  }
  return result;
}

SingularIntegral integrate_singular_info(const AffineCellMap& cell,
                                         const SingularWeight& w,
                                         const std::function<double(const Vec3&)>& f,
                                         double tol) {
  const std::function<double(const Vec3&)> fs[1] = {f};
  return integrate_singular_many(cell, w, FnSpan(fs, 1), tol)[0];
}

double integrate_singular(const AffineCellMap& cell, const SingularWeight& w,
                          const std::function<double(const Vec3&)>& f, double tol) {
  SingularIntegral r = integrate_singular_info(cell, w, f, tol);
  if (!r.converged)
    throw QuadratureError("integrate_singular: adaptive subdivision budget exhausted",
                          r.value, r.error);
  return r.value;
}

namespace {

double adaptive_gauss_1d(const std::function<double(double)>& f, double a, double b,
                         double rel_tol, double floor_abs, int depth, int& budget) {
  const Panel1D& gl = gl_cached(10);
  auto apply = [&](double lo, double hi, double& l1) {
    double s = 0.0;
    for (size_t q = 0; q < gl.nodes.size(); ++q) {
      const double term = (hi - lo) * gl.weights[q] * f(lo + (hi - lo) * gl.nodes[q]);
      s += term;
      l1 += std::abs(term);
    }
    return s;
  };
  double l1 = 0.0;
  const double whole = apply(a, b, l1);
  const double mid = 0.5 * (a + b);
  const double split = apply(a, mid, l1) + apply(mid, b, l1);
  budget -= 30;
  // Evaluating f itself carries roundoff (e.g. hat functions on tiny cells
  // cancel in (b - r)); below that noise floor refinement cannot help.
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * l1;
  if (std::abs(split - whole) <= std::max(rel_tol * (std::abs(split) + floor_abs), noise) ||
      depth >= 24 || budget <= 0)
    return split;
  return adaptive_gauss_1d(f, a, mid, rel_tol, floor_abs, depth + 1, budget) +
         adaptive_gauss_1d(f, mid, b, rel_tol, floor_abs, depth + 1, budget);
}

}  // namespace

double integrate_adaptive(const AffineCellMap& cell,
                          const std::function<double(const Vec3&)>& f, double tol) {
  // mu_weight with N = 2 has exponent zero, i.e. the unit weight.
  const std::function<double(const Vec3&)> fs[1] = {f};
  const auto r = integrate_singular_many(cell, make_weight(SingularKind::mu_weight, 1.0, 2),
                                         FnSpan(fs, 1), tol);
  return r[0].value;
}

double radial_integrate(const std::function<double(double)>& g, double a, double b,
                        double weight_exponent, double tol) {
  if (!(a >= 0.0 && a < b && b <= 1.0 + 1e-12))
    throw std::invalid_argument("radial_integrate: need 0 <= a < b <= 1");
  const double k = weight_exponent;
  int budget = 4000000;

  if (a > 0.0) {
    auto f = [&](double r) { return g(r) * std::pow(r, k); };
    return adaptive_gauss_1d(f, a, b, tol, 0.0, 0, budget);
  }

  // Substitute r = b e^{-u}:  integral = b^{k+1} int_0^inf e^{-(k+1)u} g(b e^{-u}) du.
  // The u-panels are geometric panels in r, graded toward the origin.
  auto G = [&](double u) { return std::exp(-(k + 1.0) * u) * g(b * std::exp(-u)); };
  const double front = std::pow(b, k + 1.0);

  double acc = 0.0, u_lo = 0.0;
  double width = 2.0;
  double prev_panel = 0.0;
  int grow_count = 0;
  double panel = 0.0;
  for (int j = 0; j < 400; ++j) {
    const double u_hi = u_lo + width;
    panel = adaptive_gauss_1d(G, u_lo, u_hi, 0.1 * tol, std::abs(acc) * tol * 1e-3 + 1e-300,
                              0, budget);
    acc += panel;

    if (j > 2 && std::abs(panel) > 1.02 * std::abs(prev_panel) &&
        std::abs(panel) > 1e3 * tol * std::abs(acc)) {
      if (++grow_count >= 5)
        throw QuadratureError("radial_integrate: nonintegrable endpoint (diverging panels)",
                              front * acc, front * std::abs(panel));
    } else {
      grow_count = 0;
    }

    const double q_ratio = std::abs(prev_panel) > 0 ? std::abs(panel) / std::abs(prev_panel) : 1.0;
    if (j > 2 && q_ratio < 0.9) {
      const double tail = std::abs(panel) * q_ratio / (1.0 - q_ratio);
      if (tail <= tol * std::abs(acc)) return front * (acc + std::copysign(tail, panel));
    }
    if (u_hi >= 600.0) {
      // Algebraic tail: fit G ~ A u^{-p} from two samples near the cutoff.
      const double g1 = std::abs(G(0.8 * u_hi)), g2 = std::abs(G(u_hi));
      if (g2 > 0.0 && g1 > g2) {
        const double p = std::log(g1 / g2) / std::log(1.0 / 0.8);
        if (p > 1.0 + 1e-6) {
          const double tail = g2 * u_hi / (p - 1.0);
          return front * (acc + std::copysign(tail, panel));
        }
      }
      return front * acc;
    }
    prev_panel = panel;
    u_lo = u_hi;
    width = std::min(width * 1.4, 50.0);
  }
  return front * acc;
}

}  // namespace hardyfem
