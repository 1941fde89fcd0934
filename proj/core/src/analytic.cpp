#include "hardyfem/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hardyfem {

namespace {

constexpr double kPi = 3.14159265358979323846;

double bessel_series(double m, double x) {
  // Ascending series; safe for x up to ~9 where the alternating-term
  // cancellation still leaves ~13 digits.
  const double q = -0.25 * x * x;
  double term = std::pow(0.5 * x, m) / std::tgamma(m + 1.0);
  double sum = term;
  for (int k = 1; k <= 200; ++k) {
    term *= q / (k * (m + k));
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum) + 1e-300) break;
  }
  return sum;
}

// Steed's continued-fraction evaluation of J_nu for x beyond the series
// range: CF1 for J'/J at order nu, stable downward recurrence to an order
// mu <= x, CF2 for the Hankel-ratio at mu, and the Wronskian
// J Y' - Y J' = 2/(pi x) to set the scale.
double bessel_cf(double nu, double x) {
  constexpr int kMaxIt = 30000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-290;

  const int nl = std::max(0, static_cast<int>(nu - x + 1.5));
  const double xmu = nu - nl;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;
  const double wron = xi2 / kPi;

  // CF1: h = J'_nu / J_nu, isign tracks the sign of J_nu.
  int isign = 1;
  double h = std::max(nu * xi, kTiny);
  double b = xi2 * nu;
  double d = 0.0;
  double c = h;
  int i = 1;
  for (; i <= kMaxIt; ++i) {
    b += xi2;
    d = b - d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b - 1.0 / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = c * d;
    h *= del;
    if (d < 0.0) isign = -isign;
    if (std::abs(del - 1.0) < kEps) break;
  }
  if (i > kMaxIt) throw std::runtime_error("bessel_j: CF1 did not converge");

  double rjl = isign * kTiny;
  double rjpl = h * rjl;
  const double rj_nu = rjl;  // unnormalized J_nu
  double fact = nu * xi;
  for (int l = nl; l >= 1; --l) {
    const double rjtemp = fact * rjl + rjpl;
    fact -= xi;
    rjpl = fact * rjtemp - rjl;
    rjl = rjtemp;
  }
  if (rjl == 0.0) rjl = kEps;
  const double f = rjpl / rjl;  // J'_mu / J_mu

  // CF2 (complex Lentz): p + i q = (J' - i Y') / (J - i Y) at order mu.
  double a = 0.25 - xmu * xmu;
  double p = -0.5 * xi;
  double q = 1.0;
  const double br = 2.0 * x;
  double bi = 2.0;
  double factor = a * xi / (p * p + q * q);
  double cr = br + q * factor;
  double ci = bi + p * factor;
  double den = br * br + bi * bi;
  double dr = br / den;
  double di = -bi / den;
  double dlr = cr * dr - ci * di;
  double dli = cr * di + ci * dr;
  double temp = p * dlr - q * dli;
  q = p * dli + q * dlr;
  p = temp;
  for (i = 2; i <= kMaxIt; ++i) {
    a += 2 * (i - 1);
    bi += 2.0;
    dr = a * dr + br;
    di = a * di + bi;
    if (std::abs(dr) + std::abs(di) < kTiny) dr = kTiny;
    factor = a / (cr * cr + ci * ci);
    cr = br + cr * factor;
    ci = bi - ci * factor;
    if (std::abs(cr) + std::abs(ci) < kTiny) cr = kTiny;
    den = dr * dr + di * di;
    dr /= den;
    di = -di / den;
    dlr = cr * dr - ci * di;
    dli = cr * di + ci * dr;
    temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    if (std::abs(dlr - 1.0) + std::abs(dli) < kEps) break;
  }
  if (i > kMaxIt) throw std::runtime_error("bessel_j: CF2 did not converge");

  const double gam = (p - f) / q;
  double rjmu = std::sqrt(wron / ((p - f) * gam + q));
  rjmu = std::copysign(rjmu, rjl);
  return rj_nu * (rjmu / rjl);
}

void check_bessel_domain(double m, double x) {
  if (!(m >= 0.0 && m <= 20.0))
    throw std::invalid_argument("bessel_j: order must be in [0, 20]");
  if (!(x >= 0.0 && x <= 100.0))
    throw std::invalid_argument("bessel_j: argument must be in [0, 100]");
}

}  // namespace

double hardy_const(int N) {
  if (N <= 2)
    throw std::invalid_argument("hardy_const: N must be >= 3 (N = 2 is critical)");
  const double d = N - 2;
  return 0.25 * d * d;
}

double unit_sphere_area(int N) {
  return 2.0 * std::pow(kPi, 0.5 * N) / std::tgamma(0.5 * N);
}

double bessel_j(double m, double x) {
  check_bessel_domain(m, x);
  if (x == 0.0) return m == 0.0 ? 1.0 : 0.0;
  if (x < 9.0) return bessel_series(m, x);
  return bessel_cf(m, x);
}

double bessel_j_derivative(double m, double x) {
  check_bessel_domain(m, x);
  if (x == 0.0)
    throw std::invalid_argument("bessel_j_derivative: x must be positive");
  return (m / x) * bessel_j(m, x) - bessel_j(m + 1.0, x);
}

double bessel_first_zero(double m) {
  if (!(m >= 0.0 && m <= 20.0))
    throw std::invalid_argument("bessel_first_zero: order must be in [0, 20]");
  // J_m is positive on (0, j_{m,1}); scan for the first sign change.
  double lo = std::max(1e-3, m);
  double flo = bessel_j(m, lo);
  double hi = lo;
  bool bracketed = false;
  for (int k = 0; k < 500; ++k) {
    hi = lo + 0.25;
    if (hi > 99.9) break;
    const double fhi = bessel_j(m, hi);
    if (flo > 0.0 && fhi <= 0.0) {
      bracketed = true;
      break;
    }
    lo = hi;
    flo = fhi;
  }
  if (!bracketed) throw std::runtime_error("bessel_first_zero: bracketing failed");

  for (int k = 0; k < 80; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (bessel_j(m, mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  double z = 0.5 * (lo + hi);
  for (int k = 0; k < 4; ++k) {
    const double fz = bessel_j(m, z);
    const double dz = bessel_j_derivative(m, z);
    if (dz == 0.0) break;
    z -= fz / dz;
  }
  return z;
}

double RadialEigenfunction::value(double r) const {
  if (!(r > 0.0 && r <= 1.0))
    throw std::invalid_argument("RadialEigenfunction: r must be in (0, 1]");
  return std::pow(r, 1.0 - 0.5 * N) * bessel_j(m, z * r);
}

double RadialEigenfunction::derivative(double r) const {
  if (!(r > 0.0 && r <= 1.0))
    throw std::invalid_argument("RadialEigenfunction: r must be in (0, 1]");
  const double a = 1.0 - 0.5 * N;
  return a * std::pow(r, a - 1.0) * bessel_j(m, z * r) +
         std::pow(r, a) * z * bessel_j_derivative(m, z * r);
}

RadialEigenfunction phi1_subcritical(int N, double Lambda) {
  const double LN = hardy_const(N);
  if (!(Lambda >= 0.0 && Lambda <= LN))
    throw std::invalid_argument("phi1_subcritical: Lambda must be in [0, Lambda_N]");
  RadialEigenfunction phi;
  phi.N = N;
  phi.m = std::sqrt(LN - Lambda);
  phi.z = bessel_first_zero(phi.m);
  phi.lambda = phi.z * phi.z;
  return phi;
}

RadialEigenfunction phi1_critical(int N) { return phi1_subcritical(N, hardy_const(N)); }

void validate(const CutoffParams& p) {
  if (!(p.eps > 0.0 && p.eps < 0.25))
    throw std::invalid_argument("CutoffParams: eps must be in (0, 1/4)");
  if (!(p.mu > 0.0 && p.mu < 0.5))
    throw std::invalid_argument("CutoffParams: mu must be in (0, 1/2)");
  if (!(p.alpha >= 0.0)) throw std::invalid_argument("CutoffParams: alpha must be >= 0");
  if (p.N < 3) throw std::invalid_argument("CutoffParams: N must be >= 3");
}

double smoothstep_quintic(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double smoothstep_quintic_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double u = t * (1.0 - t);
  return 30.0 * u * u;
}

namespace {

double xi_profile(double mu, double s) {
  return smoothstep_quintic((s - mu) / (1.0 - 2.0 * mu));
}

double xi_profile_derivative(double mu, double s) {
  return smoothstep_quintic_derivative((s - mu) / (1.0 - 2.0 * mu)) / (1.0 - 2.0 * mu);
}

}  // namespace

double cutoff_eta(const CutoffParams& p, double r) {
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("cutoff_eta: r must be in (0, 1]");
  const double e2 = p.eps * p.eps;
  if (r <= e2) return 0.0;
  if (r >= p.eps) return 1.0;
  const double s = std::log(r / e2) / std::log(1.0 / p.eps);
  return xi_profile(p.mu, s);
}

double cutoff_eta_derivative(const CutoffParams& p, double r) {
  if (!(r > 0.0 && r <= 1.0))
    throw std::invalid_argument("cutoff_eta_derivative: r must be in (0, 1]");
  const double e2 = p.eps * p.eps;
  if (r <= e2 || r >= p.eps) return 0.0;
  const double logeps = std::log(1.0 / p.eps);
  const double s = std::log(r / e2) / logeps;
  return xi_profile_derivative(p.mu, s) / (r * logeps);
}

double outer_cutoff_psi(double r) {
  return 1.0 - smoothstep_quintic((r - 0.25) / 0.25);
}

double outer_cutoff_psi_derivative(double r) {
  return -smoothstep_quintic_derivative((r - 0.25) / 0.25) / 0.25;
}

double u_eps(const CutoffParams& p, double r) {
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("u_eps: r must be in (0, 1]");
  if (r >= 0.5) return 0.0;
  const double eta = cutoff_eta(p, r);
  if (eta == 0.0) return 0.0;
  const double L = std::log(1.0 / r);
  return std::pow(r, 1.0 - 0.5 * p.N) * std::pow(L, p.alpha) * eta * outer_cutoff_psi(r);
}

double u_eps_derivative(const CutoffParams& p, double r) {
  if (!(r > 0.0 && r <= 1.0))
    throw std::invalid_argument("u_eps_derivative: r must be in (0, 1]");
  if (r >= 0.5) return 0.0;
  const double eta = cutoff_eta(p, r);
  const double deta = cutoff_eta_derivative(p, r);
  if (eta == 0.0 && deta == 0.0) return 0.0;
  const double a = 1.0 - 0.5 * p.N;
  const double L = std::log(1.0 / r);
  const double La = std::pow(L, p.alpha);
  const double u2 = std::pow(r, a) * La;
  // d/dr [r^a L^alpha] = r^{a-1} (a L^alpha - alpha L^{alpha-1})
  const double du2 =
      std::pow(r, a - 1.0) * (a * La - (p.alpha == 0.0 ? 0.0 : p.alpha * std::pow(L, p.alpha - 1.0)));
  const double psi = outer_cutoff_psi(r);
  const double dpsi = outer_cutoff_psi_derivative(r);
  return du2 * eta * psi + u2 * deta * psi + u2 * eta * dpsi;
}

MinSeqReport minseq_report(const CutoffParams& p, double tol) {
  validate(p);
  const double LN = hardy_const(p.N);
  const double omega = unit_sphere_area(p.N);
  const double support_lo = std::pow(p.eps, 2.0 - p.mu);  // eta vanishes below
  const double e2 = p.eps * p.eps;

  // Integrate piecewise between the junctions of the two cutoffs.
  std::vector<double> pts = {e2,   support_lo, std::pow(p.eps, 1.0 + p.mu),
                             p.eps, 0.25,      0.5};
  std::sort(pts.begin(), pts.end());

  auto b_integrand = [&](double r) {
    const double u = u_eps(p, r);
    return u * u * std::pow(r, p.N - 3.0);
  };
  auto a_integrand = [&](double r) {
    const double u = u_eps(p, r);
    const double du = u_eps_derivative(p, r);
    return du * du * std::pow(r, p.N - 1.0) - LN * u * u * std::pow(r, p.N - 3.0);
  };

  MinSeqReport rep;
  rep.quadrature_tol = tol;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i], b = pts[i + 1];
    if (!(b > a)) continue;
    rep.B_eps += radial_integrate(b_integrand, a, b, 0.0, tol);
    rep.A_eps += radial_integrate(a_integrand, a, b, 0.0, tol);
  }
  rep.A_eps *= omega;
  rep.B_eps *= omega;
  rep.ratio = rep.A_eps / rep.B_eps;
  return rep;
}

double minseq_deficit_ground_state(const CutoffParams& p, double tol) {
  validate(p);
  const double omega = unit_sphere_area(p.N);
  auto theta_prime = [&](double r) {
    const double L = std::log(1.0 / r);
    const double La = std::pow(L, p.alpha);
    const double dLa = p.alpha == 0.0 ? 0.0 : -p.alpha * std::pow(L, p.alpha - 1.0) / r;
    const double eta = cutoff_eta(p, r);
    const double psi = outer_cutoff_psi(r);
    return dLa * eta * psi + La * cutoff_eta_derivative(p, r) * psi +
           La * eta * outer_cutoff_psi_derivative(r);
  };
  auto integrand = [&](double r) {
    const double t = theta_prime(r);
    return r * t * t;
  };
  const double support_lo = std::pow(p.eps, 2.0 - p.mu);
  std::vector<double> pts = {p.eps * p.eps, support_lo, std::pow(p.eps, 1.0 + p.mu),
                             p.eps,          0.25,       0.5};
  std::sort(pts.begin(), pts.end());
  double acc = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    if (pts[i + 1] > pts[i])
      acc += radial_integrate(integrand, pts[i], pts[i + 1], 0.0, tol);
  return omega * acc;
}

LogIntegral log_integral(double alpha, double h, double tol) {
  if (alpha < -1.0) throw std::invalid_argument("log_integral: divergent for alpha < -1");
  if (!(h > 0.0 && h <= 0.5))
    throw std::invalid_argument("log_integral: h must be in (0, 1/2]");
  LogIntegral out;
  auto g = [](double r) {
    const double L = std::log(r);
    return 1.0 / (L * L);
  };
  out.value = radial_integrate(g, 0.0, h, alpha, tol);
  const double logh = std::abs(std::log(h));
  out.predictor = alpha == -1.0 ? 1.0 / logh : std::pow(h, alpha + 1.0) / (logh * logh);
  return out;
}

double best_affine_gradient_error(const AffineCellMap& cell,
                                  const std::function<Vec3(const Vec3&)>& grad_u,
                                  double p_norm, double quad_tol) {
  if (!(p_norm > 1.0)) throw std::invalid_argument("best_affine_gradient_error: p must be > 1");

  const double vol = cell.det_abs * (cell.dim == 1 ? 1.0 : 1.0 / 6.0);
  Vec3 mean = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    mean[k] = integrate_adaptive(
                  cell, [&](const Vec3& x) { return grad_u(x)[k]; }, quad_tol) /
              vol;
  }

  if (p_norm == 2.0) {
    return integrate_adaptive(
        cell, [&](const Vec3& x) { return (grad_u(x) - mean).squaredNorm(); }, quad_tol);
  }

  // General p: convex in A, gradient descent with deterministic restarts.
  auto objective = [&](const Vec3& A) {
    return integrate_adaptive(
        cell, [&](const Vec3& x) { return std::pow((grad_u(x) - A).norm(), p_norm); },
        std::max(quad_tol, 1e-8));
  };
  auto gradient = [&](const Vec3& A) {
    Vec3 g = Vec3::Zero();
    for (int k = 0; k < 3; ++k)
      g[k] = integrate_adaptive(
          cell,
          [&](const Vec3& x) {
            const Vec3 d = grad_u(x) - A;
            const double nd = d.norm();
            return nd == 0.0 ? 0.0 : -p_norm * std::pow(nd, p_norm - 2.0) * d[k];
          },
          std::max(quad_tol, 1e-8));
    return g;
  };

  double diam = 0.0;
  for (int i = 0; i <= cell.dim; ++i)
    for (int j = i + 1; j <= cell.dim; ++j)
      diam = std::max(diam, (cell.vertex(i) - cell.vertex(j)).norm());

  const Vec3 starts[3] = {mean, Vec3::Zero(), mean + Vec3(0.1 * diam, -0.07 * diam, 0.05 * diam)};
  double best = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  for (const Vec3& start : starts) {
    Vec3 A = start;
    double f = objective(A);
    double step = std::max(1.0, A.norm());
    for (int it = 0; it < 400; ++it) {
      const Vec3 g = gradient(A);
      const double gn = g.norm();
      if (gn * diam <= 1e-9 * (std::abs(f) + 1e-30)) {
        any_converged = true;
        break;
      }
      bool moved = false;
      for (int bt = 0; bt < 40; ++bt) {
        const Vec3 trial = A - (step / gn) * g;
        const double ft = objective(trial);
        if (ft < f) {
          A = trial;
          f = ft;
          step *= 1.5;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) {
        any_converged = true;  // no descent direction left at line-search scale
        break;
      }
    }
    best = std::min(best, f);
  }
  if (!any_converged)
    throw std::runtime_error("best_affine_gradient_error: descent did not converge");
  return best;
}

}  // namespace hardyfem
