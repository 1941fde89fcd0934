#include "hardyfem/eigensolve.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hardyfem {

namespace {

void fix_sign(Eigen::VectorXd& v) {
  for (int i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace

EigSolution smallest_genevp(const SparseSym& Q, const SparseSym& B, double tol,
                            int max_iterations) {
  const int n = Q.n();
  if (B.n() != n) throw std::invalid_argument("smallest_genevp: dimension mismatch");
  if (n == 0) throw std::invalid_argument("smallest_genevp: empty pencil");

  const Eigen::SparseMatrix<double> Qf = Q.full();
  const Eigen::SparseMatrix<double> Bf = B.full();

  {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> bcheck(Bf);
    if (bcheck.info() != Eigen::Success || bcheck.vectorD().minCoeff() <= 0.0)
      throw std::runtime_error("smallest_genevp: B is not positive definite");
  }

  const double sigma0 = 1e-8 * B.trace() / n;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> fac;
  fac.compute(Qf + sigma0 * Bf);
  if (fac.info() != Eigen::Success)
    throw std::runtime_error("smallest_genevp: factorization of Q + sigma B failed");

  EigSolution sol;
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  {
    const double bn = std::sqrt(x.dot(B.apply(x)));
    x /= bn;
  }
  double lambda = x.dot(Q.apply(x));
  double lambda_prev = lambda;
  double current_shift = -sigma0;  // factor holds Q - current_shift * B

  for (int it = 1; it <= max_iterations; ++it) {
    Eigen::VectorXd y = fac.solve(B.apply(x));
    Eigen::VectorXd by = B.apply(y);
    const double ynorm = std::sqrt(y.dot(by));
    if (!(ynorm > 0.0) || !std::isfinite(ynorm))
      throw std::runtime_error("smallest_genevp: breakdown in inverse iteration");
    y /= ynorm;
    by /= ynorm;
    const Eigen::VectorXd qy = Q.apply(y);
    const double lambda_new = y.dot(qy);
    const double residual = (qy - lambda_new * by).norm() / by.norm();

    // The computed residual cannot drop below the roundoff of the two
    // matrix-vector products; accept that floor once the value stagnates.
    const double floor = std::numeric_limits<double>::epsilon() *
                         (Q.apply_abs(y).norm() + std::abs(lambda_new) * B.apply_abs(y).norm()) /
                         by.norm();

    const bool stagnated = std::abs(lambda_new - lambda) <= 1e-13 * std::abs(lambda_new) +
                                                               1e-300;
    x = y;
    sol.value = lambda_new;
    sol.residual = residual;
    sol.iterations = it;
    if (residual <= std::max(tol, 8.0 * floor) && stagnated) {
      sol.converged = true;
      break;
    }
    lambda_prev = lambda;
    lambda = lambda_new;

    // Rayleigh-quotient acceleration: when plain iteration with the fixed
    // tiny shift converges slowly (clustered spectrum), refactor just below
    // the current estimate.  The shift stays deterministic in the iterates.
    if (it % 10 == 0 && residual > tol) {
      const double delta =
          std::max({4.0 * std::abs(lambda - lambda_prev), 1e-12 * std::abs(lambda), 1e-300});
      double trial = lambda - delta;
      for (int attempt = 0; attempt < 3; ++attempt) {
        if (std::abs(trial - current_shift) <=
            1e-12 * (std::abs(trial) + std::abs(current_shift)))
          break;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> trial_fac;
        trial_fac.compute(Qf - trial * Bf);
        if (trial_fac.info() == Eigen::Success &&
            std::isfinite(trial_fac.vectorD().minCoeff())) {
          fac.compute(Qf - trial * Bf);
          current_shift = trial;
          break;
        }
        trial = lambda - delta * std::pow(10.0, attempt + 1);
      }
    }
  }

  fix_sign(x);
  sol.vector = x;
  return sol;
}

}  // namespace hardyfem
