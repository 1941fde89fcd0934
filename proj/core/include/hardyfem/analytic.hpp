#pragma once

// Closed-form and semi-analytic reference quantities: the sharp constant
// (N-2)^2/4, Bessel functions of real order with their first zeros, the
// explicit radial eigenfunctions r^{-N/2+1} J_m(j_{m,1} r), the cutoff
// minimizing sequence u_eps, and the quantitative estimates attached to it.

#include "hardyfem/mesh.hpp"
#include "hardyfem/quadrature.hpp"

#include <functional>

namespace hardyfem {

/// (N-2)^2/4 for N >= 3; the two-dimensional case is critical and rejected.
double hardy_const(int N);

/// Surface area of the unit sphere S^{N-1}: 2 pi^{N/2} / Gamma(N/2).
double unit_sphere_area(int N);

/// J_m(x) for real order m in [0,20] and x in [0,100]; ascending series for
/// small x, Steed continued fractions beyond.
double bessel_j(double m, double x);

/// d/dx J_m(x) = (m/x) J_m(x) - J_{m+1}(x), x > 0.
double bessel_j_derivative(double m, double x);

/// First positive zero j_{m,1}, bracketing scan plus bisection and a Newton
/// polish, to 1e-12.
double bessel_first_zero(double m);

/// First eigenfunction phi_1(r) = r^{-N/2+1} J_m(z r) with z = j_{m,1} and
/// lambda_1 = z^2; m = sqrt(Lambda_N - Lambda) in the subcritical range,
/// m = 0 in the critical case.
struct RadialEigenfunction {
  int N = 3;
  double m = 0.0;
  double z = 0.0;
  double lambda = 0.0;

  double value(double r) const;
  double derivative(double r) const;
};

RadialEigenfunction phi1_subcritical(int N, double Lambda);
RadialEigenfunction phi1_critical(int N);

/// Parameters of the truncated singular profile
/// u_eps(r) = r^{-N/2+1} (log 1/r)^alpha * eta_eps(r) * psi(r).
struct CutoffParams {
  double eps = 0.0;    // in (0, 1/4)
  double mu = 0.25;    // plateau width of the profile xi, in (0, 1/2)
  double alpha = 0.0;  // log exponent, >= 0
  int N = 3;
};

void validate(const CutoffParams& p);

/// Quintic smoothstep 6t^5 - 15t^4 + 10t^3, clamped to [0,1].
double smoothstep_quintic(double t);
double smoothstep_quintic_derivative(double t);

/// Logarithmically scaled cutoff: 0 for r <= eps^2, 1 for r >= eps, and
/// xi(log(r/eps^2)/log(1/eps)) in between, where xi rises on [mu, 1-mu].
double cutoff_eta(const CutoffParams& p, double r);
double cutoff_eta_derivative(const CutoffParams& p, double r);

/// Outer cutoff psi: 1 for r <= 1/4, 0 for r >= 1/2, C^2 in between.
double outer_cutoff_psi(double r);
double outer_cutoff_psi_derivative(double r);

double u_eps(const CutoffParams& p, double r);
double u_eps_derivative(const CutoffParams& p, double r);

struct MinSeqReport {
  double A_eps = 0.0;  // Hardy-deficit energy of u_eps
  double B_eps = 0.0;  // int u_eps^2 / |x|^2
  double ratio = 0.0;  // A_eps / B_eps
  double quadrature_tol = 0.0;
};

/// A_eps = omega_{N-1} int (u'^2 - Lambda_N u^2/r^2) r^{N-1} dr and
/// B_eps = omega_{N-1} int u^2 r^{N-3} dr, with u' in closed form.
MinSeqReport minseq_report(const CutoffParams& p, double tol);

/// The same deficit through the ground-state substitution
/// u = r^{-(N-2)/2} theta:  A_eps = omega_{N-1} int r theta'^2 dr.
/// Independent route used for cross-checks.
double minseq_deficit_ground_state(const CutoffParams& p, double tol);

struct LogIntegral {
  double value = 0.0;
  double predictor = 0.0;  // h^{a+1}/|log h|^2 for a > -1, 1/|log h| for a = -1
};

/// int_0^h r^alpha / log^2 r dr together with its asymptotic predictor.
LogIntegral log_integral(double alpha, double h, double tol);

/// min over constant vectors A of int_T |Du - A|^p dx.  For p = 2 the
/// minimizer is the mean gradient; other p in (1, inf) use gradient descent
/// with deterministic restarts.
double best_affine_gradient_error(const AffineCellMap& cell,
                                  const std::function<Vec3(const Vec3&)>& grad_u,
                                  double p_norm, double quad_tol = 1e-9);

}  // namespace hardyfem
