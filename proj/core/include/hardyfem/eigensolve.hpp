#pragma once

// Smallest eigenvalue of a symmetric generalized pencil (Q, B) with B
// positive definite: shift-invert inverse iteration on a sparse symmetric
// factorization of (Q + sigma*B), sigma = 1e-8 * trace(B)/n, with
// Rayleigh-quotient acceleration.  Deterministic start vector: B-normalized
// all-ones.

#include "hardyfem/assembly.hpp"

namespace hardyfem {

struct EigSolution {
  double value = 0.0;
  Eigen::VectorXd vector;  // B-normalized, first nonzero component positive
  double residual = 0.0;   // ||Q x - value B x||_2 / ||B x||_2
  int iterations = 0;
  bool converged = false;
};

/// Q symmetric positive semi-definite, B symmetric positive definite.
/// Convergence requires both the relative residual below tol and eigenvalue
/// stagnation below 1e-13 relative; on iteration exhaustion the best
/// estimate is returned with converged=false.
EigSolution smallest_genevp(const SparseSym& Q, const SparseSym& B, double tol = 1e-10,
                            int max_iterations = 50000);

}  // namespace hardyfem
