#pragma once

// One-dimensional weighted P1 FEM for radial functions on the unit ball in
// dimension N (measure r^{N-1} dr, surface factors omitted since they cancel
// in every Rayleigh quotient).  The r=0 vertex is an unconstrained dof: for
// N >= 3 the weighted integrals are finite and no condition is needed there.

#include "hardyfem/assembly.hpp"
#include "hardyfem/eigensolve.hpp"
#include "hardyfem/mesh.hpp"

namespace hardyfem {

enum class RadialKind { hardy, critical, subcritical, weighted_mu, log_hardy };

struct RadialProblem {
  int N = 3;
  double lambda_amp = 0.0;  // potential amplitude, used by `subcritical`
  RadialKind kind = RadialKind::hardy;
  double log_R = 2.718281828459045;  // log normalization radius for log_hardy

  static RadialProblem hardy(int N) { return {N, 0.0, RadialKind::hardy, kDefaultR}; }
  static RadialProblem critical(int N) { return {N, 0.0, RadialKind::critical, kDefaultR}; }
  static RadialProblem subcritical(int N, double lambda) {
    return {N, lambda, RadialKind::subcritical, kDefaultR};
  }
  static RadialProblem weighted_mu(int N) {
    return {N, 0.0, RadialKind::weighted_mu, kDefaultR};
  }
  static RadialProblem log_hardy(int N, double R = kDefaultR) {
    return {N, 0.0, RadialKind::log_hardy, R};
  }

  static constexpr double kDefaultR = 2.718281828459045;
};

void validate(const RadialProblem& p);

/// Individual radial forms over interior dofs (boundary only at r=1).
SparseSym radial_stiffness(const SimplicialMesh& mesh, int N);   // int r^{N-1} u' v'
SparseSym radial_mass(const SimplicialMesh& mesh, int N);        // int r^{N-1} u v
SparseSym radial_hardy_mass(const SimplicialMesh& mesh, int N);  // int r^{N-3} u v
SparseSym radial_log_hardy_mass(const SimplicialMesh& mesh, int N, double R);
SparseSym radial_log_stiffness(const SimplicialMesh& mesh, int N, double R);
/// Weighted pair with density r^{-(N-2)}: (int r u' v', int r u v).
std::pair<SparseSym, SparseSym> radial_mu_weighted(const SimplicialMesh& mesh, int N);

/// Pencil (Q, B) of the requested Rayleigh quotient.
std::pair<SparseSym, SparseSym> radial_assemble(const RadialProblem& problem,
                                                const SimplicialMesh& mesh);

EigSolution radial_solve(const RadialProblem& problem, int n_cells, double grading = 1.0,
                         double tol = 1e-10, int max_iterations = 50000);

struct RatePoint {
  int n_cells = 0;
  double h = 0.0;
  int dofs = 0;
  double value = 0.0;
};

std::vector<RatePoint> radial_rate_study(const RadialProblem& problem,
                                         const std::vector<int>& levels,
                                         double tol = 1e-10);

/// Target for best-approximation distances, with the derivative in closed
/// form (quadrature of the energy inner products needs it).
struct RadialTarget {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

enum class ErrorNorm { energy, hardy_energy };

/// inf over V_h of || f - v_h || in the chosen norm, via the normal
/// equations of the projection.  `norm_sq_hint` overrides the direct
/// quadrature of ||f||^2 (needed when f has infinite H^1 seminorm but
/// finite Hardy-deficit norm).
double radial_best_approx_error(const SimplicialMesh& mesh, int N, const RadialTarget& f,
                                ErrorNorm norm, double norm_sq_hint = -1.0,
                                double tol = 1e-12);

}  // namespace hardyfem
