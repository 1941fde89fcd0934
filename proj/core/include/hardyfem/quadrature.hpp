#pragma once

// Numerical integration on simplices, including weights that are singular at
// the origin: |x|^-2, |x|^-2 log^-2(R/|x|), log^-2(R/|x|), |x|^-(N-2).
// Cells that have the origin as a vertex are handled by a radial (Duffy-type)
// substitution mapping them to a cone over the opposite facet; all other
// cells use adaptive subdivision with a smooth rule and a Richardson error
// estimate.

#include "hardyfem/mesh.hpp"

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace hardyfem {

struct QuadRule {
  int dim = 0;
  std::vector<std::array<double, 4>> points;  // barycentric, dim+1 entries used
  std::vector<double> weights;                // sum to the reference volume
  int degree = 0;                             // polynomial exactness

  int size() const { return static_cast<int>(weights.size()); }
};

/// Rule exact for all polynomials of total degree <= degree on the reference
/// simplex.  dim in {1,3}, degree in 1..5.  All weights are positive.
QuadRule simplex_rule(int dim, int degree);

/// n-point Gauss-Legendre nodes/weights on [0,1].
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// n-point Gauss-Jacobi rule on [0,1] for the weight (1-t)^alpha.
void gauss_jacobi_01(int n, double alpha, std::vector<double>& nodes,
                     std::vector<double>& weights);

enum class SingularKind { inv_sq, inv_sq_logsq, logsq_inv, mu_weight };

struct SingularWeight {
  SingularKind kind = SingularKind::inv_sq;
  double R = 1.0;  // log normalization radius, log(R/|x|) > 0 on the open unit ball
  int N = 3;       // ambient dimension for the mu_weight exponent N-2

  double value(double r) const;
};

SingularWeight make_weight(SingularKind kind, double R = 1.0, int N = 3);

/// Mapped-rule integral over one cell; exact for polynomial f of total
/// degree <= degree.
double integrate_smooth(const AffineCellMap& cell,
                        const std::function<double(const Vec3&)>& f, int degree);

struct SingularIntegral {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  bool converged = true;
};

/// Integral of w(|x|) * f(x) over the cell to the requested relative
/// tolerance.  The origin must not lie in the open cell unless it is a
/// vertex of the cell.  Throws QuadratureError on nonconvergence; the
/// _info variant reports the achieved estimate instead.
double integrate_singular(const AffineCellMap& cell, const SingularWeight& w,
                          const std::function<double(const Vec3&)>& f, double tol);
SingularIntegral integrate_singular_info(const AffineCellMap& cell,
                                         const SingularWeight& w,
                                         const std::function<double(const Vec3&)>& f,
                                         double tol);

/// Shared-point variant: integrates several integrands against the same
/// weight in one sweep (used to build local element matrices).
std::vector<SingularIntegral> integrate_singular_many(
    const AffineCellMap& cell, const SingularWeight& w,
    std::span<const std::function<double(const Vec3&)>> fs, double tol);

/// Adaptive integral of g(r) * r^k over [a,b], 0 <= a < b <= 1, with
/// geometric grading toward a = 0.  Throws QuadratureError when the endpoint
/// is detected to be nonintegrable.
double radial_integrate(const std::function<double(double)>& g, double a, double b,
                        double weight_exponent, double tol);

/// Adaptive integral of a smooth function over one cell (subdivision with
/// Richardson control; no singular weight).
double integrate_adaptive(const AffineCellMap& cell,
                          const std::function<double(const Vec3&)>& f, double tol);

struct QuadratureError : std::runtime_error {
  QuadratureError(const std::string& msg, double estimate, double error)
      : std::runtime_error(msg), estimate(estimate), error(error) {}
  double estimate;
  double error;
};

}  // namespace hardyfem
