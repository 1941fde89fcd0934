#pragma once

// The three spectral quantities of the singular quotients: the discrete
// Hardy constant Lambda_h (pencil (A, W)), the critical eigenvalue mu_1h
// (pencil (A - Lambda_N W, M)), and the subcritical eigenvalue lambda_1h
// (pencil (A - Lambda W, M)), plus best-approximation distances to V_h.
// 3D meshes use the volume assembly; 1D meshes route through the radial
// oracle with the dimension from the options.

#include "hardyfem/assembly.hpp"
#include "hardyfem/eigensolve.hpp"
#include "hardyfem/radial_oracle.hpp"

namespace hardyfem {

struct SpectralOptions {
  int N = 3;  // ambient dimension for radial (dim-1) meshes
  double tol = 1e-10;
  int max_iterations = 50000;
  double assembly_tol = kAssemblyTol;
};

/// Lambda_h: smallest eigenvalue of (A, W); >= Lambda_N - 1e-9 on every mesh.
EigSolution hardy_constant(const SimplicialMesh& mesh, const SpectralOptions& opts = {});

/// mu_1h: smallest eigenvalue of (A - Lambda_N W, M).  A Rayleigh quotient
/// below -1e-9 indicates an assembly error and aborts.
EigSolution critical_eigen(const SimplicialMesh& mesh, const SpectralOptions& opts = {});

/// lambda_1h for amplitude 0 <= Lambda < Lambda_N; Lambda = Lambda_N must use
/// critical_eigen, larger amplitudes make the quotient unbounded below.
EigSolution subcritical_eigen(const SimplicialMesh& mesh, double Lambda,
                              const SpectralOptions& opts = {});

struct Target3D {
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> gradient;
};

/// inf over V_h of ||f - v_h|| in the chosen norm on a 3D mesh, through the
/// normal equations of the projection.
double best_approx_error(const SimplicialMesh& mesh, const Target3D& f, ErrorNorm norm,
                         const SpectralOptions& opts = {});

}  // namespace hardyfem
