#pragma once

// Shared test helpers: independent oracles kept separate from the library
// code paths they check.

#include "hardyfem/assembly.hpp"

#include <Eigen/Dense>

namespace hardyfem::testing {

/// Full dense generalized eigensolve (Q x = lambda B x, B SPD); smallest
/// eigenvalue.  Independent of the shift-invert iteration in the library.
inline double dense_smallest_eig(const SparseSym& Q, const SparseSym& B) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Q.dense(), B.dense());
  return es.eigenvalues()(0);
}

/// Brute-force angular-grid value of the integral of |x|^-2 over the
/// octahedron |x1|+|x2|+|x3| <= s: radially exact, 2D Gauss grid over the
/// first-octant sphere patch (the integrand is smooth there), times 8.
inline double octahedron_inv_sq_integral(double s, int n_grid = 96) {
  std::vector<double> x, w;
  gauss_legendre_01(n_grid, x, w);
  const double pi = 3.14159265358979323846;
  double acc = 0.0;
  for (int i = 0; i < n_grid; ++i) {
    const double theta = 0.5 * pi * x[i];  // polar angle in (0, pi/2)
    for (int j = 0; j < n_grid; ++j) {
      const double phi = 0.5 * pi * x[j];
      const double sx = std::sin(theta) * std::cos(phi);
      const double sy = std::sin(theta) * std::sin(phi);
      const double sz = std::cos(theta);
      const double radius = s / (sx + sy + sz);
      acc += w[i] * w[j] * radius * std::sin(theta);
    }
  }
  return 8.0 * 0.25 * pi * pi * acc;
}

/// Max inscribed-ball radius of a tetrahedron by brute-force grid search
/// over interior points (distance to the four face planes).
inline double brute_force_insphere(const Vec3& p0, const Vec3& p1, const Vec3& p2,
                                   const Vec3& p3, int n_grid = 60) {
  struct Plane {
    Vec3 n;
    double d;
  };
  auto make_plane = [](const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& inside) {
    Vec3 n = (b - a).cross(c - a).normalized();
    double d = n.dot(a);
    if (n.dot(inside) - d < 0) {
      n = -n;
      d = -d;
    }
    return Plane{n, d};
  };
  const Vec3 centroid = 0.25 * (p0 + p1 + p2 + p3);
  const Plane planes[4] = {make_plane(p1, p2, p3, centroid), make_plane(p0, p2, p3, centroid),
                           make_plane(p0, p1, p3, centroid), make_plane(p0, p1, p2, centroid)};
  double best = 0.0;
  for (int i = 1; i < n_grid; ++i)
    for (int j = 1; j < n_grid - i; ++j)
      for (int k = 1; k < n_grid - i - j; ++k) {
        const double l1 = double(i) / n_grid, l2 = double(j) / n_grid, l3 = double(k) / n_grid;
        const Vec3 p = (1 - l1 - l2 - l3) * p0 + l1 * p1 + l2 * p2 + l3 * p3;
        double dist = std::numeric_limits<double>::infinity();
        for (const auto& pl : planes) dist = std::min(dist, pl.n.dot(p) - pl.d);
        best = std::max(best, dist);
      }
  return best;
}

}  // namespace hardyfem::testing
