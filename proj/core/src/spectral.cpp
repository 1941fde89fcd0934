#include "hardyfem/spectral.hpp"

#include "hardyfem/analytic.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>

namespace hardyfem {

namespace {

void check_dim(const SimplicialMesh& mesh) {
  if (mesh.dim != 1 && mesh.dim != 3)
    throw std::invalid_argument("spectral: mesh dimension must be 1 or 3");
}

}  // namespace

EigSolution hardy_constant(const SimplicialMesh& mesh, const SpectralOptions& opts) {
  check_dim(mesh);
  if (mesh.dim == 1) {
    auto [Q, B] = radial_assemble(RadialProblem::hardy(opts.N), mesh);
    return smallest_genevp(Q, B, opts.tol, opts.max_iterations);
  }
  const SparseSym A = assemble_stiffness(mesh);
  const SparseSym W = assemble_hardy_mass(mesh, opts.assembly_tol);
  return smallest_genevp(A, W, opts.tol, opts.max_iterations);
}

EigSolution critical_eigen(const SimplicialMesh& mesh, const SpectralOptions& opts) {
  check_dim(mesh);
  EigSolution sol;
  if (mesh.dim == 1) {
    auto [Q, B] = radial_assemble(RadialProblem::critical(opts.N), mesh);
    sol = smallest_genevp(Q, B, opts.tol, opts.max_iterations);
  } else {
    const double LN = hardy_const(3);
    const SparseSym Q =
        assemble_stiffness(mesh).add_scaled(-LN, assemble_hardy_mass(mesh, opts.assembly_tol));
    sol = smallest_genevp(Q, assemble_mass(mesh), opts.tol, opts.max_iterations);
  }
  if (sol.value < -1e-9)
    throw std::runtime_error(
        "critical_eigen: negative Rayleigh quotient beyond -1e-9 indicates an assembly "
        "error (discrete Hardy inequality violated)");
  return sol;
}

EigSolution subcritical_eigen(const SimplicialMesh& mesh, double Lambda,
                              const SpectralOptions& opts) {
  check_dim(mesh);
  const int N = mesh.dim == 1 ? opts.N : 3;
  const double LN = hardy_const(N);
  if (!(Lambda >= 0.0 && Lambda < LN))
    throw std::invalid_argument(
        "subcritical_eigen: amplitude must satisfy 0 <= Lambda < Lambda_N (use "
        "critical_eigen at Lambda_N; beyond it the quotient is unbounded below)");
  if (mesh.dim == 1) {
    auto [Q, B] = radial_assemble(RadialProblem::subcritical(N, Lambda), mesh);
    return smallest_genevp(Q, B, opts.tol, opts.max_iterations);
  }
  const SparseSym Q =
      assemble_stiffness(mesh).add_scaled(-Lambda, assemble_hardy_mass(mesh, opts.assembly_tol));
  return smallest_genevp(Q, assemble_mass(mesh), opts.tol, opts.max_iterations);
}

double best_approx_error(const SimplicialMesh& mesh, const Target3D& f, ErrorNorm norm,
                         const SpectralOptions& opts) {
  if (mesh.dim != 3)
    throw std::invalid_argument("best_approx_error: 3D meshes (radial targets use "
                                "radial_best_approx_error)");
  const double LN = hardy_const(3);
  const DofMap dofs = make_dof_map(mesh);

  SparseSym Q = assemble_stiffness(mesh);
  if (norm == ErrorNorm::hardy_energy)
    Q = Q.add_scaled(-LN, assemble_hardy_mass(mesh, opts.assembly_tol));

  const SingularWeight invsq = make_weight(SingularKind::inv_sq);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dofs.n_dofs);
  double f_norm_sq = 0.0;

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const AffineCellMap map = cell_map(mesh, c);
    const auto& cell = mesh.cells[c];

    // Per-cell P1 gradients (constant) and barycentric forms.
    Eigen::Matrix4d M;
    for (int i = 0; i < 4; ++i) {
      M.block<3, 1>(0, i) = mesh.vertices[cell[i]];
      M(3, i) = 1.0;
    }
    const Eigen::Matrix4d Minv = M.inverse();

    f_norm_sq += integrate_adaptive(
        map, [&](const Vec3& x) { return f.gradient(x).squaredNorm(); }, opts.assembly_tol);
    if (norm == ErrorNorm::hardy_energy) {
      f_norm_sq -= LN * integrate_singular(
                            map, invsq,
                            [&](const Vec3& x) {
                              const double v = f.value(x);
                              return v * v;
                            },
                            opts.assembly_tol);
    }

    for (int v = 0; v < 4; ++v) {
      const int d = dofs.interior_index[cell[v]];
      if (d < 0) continue;
      const Vec3 grad = Minv.block<1, 3>(v, 0).transpose();
      double entry = integrate_adaptive(
          map, [&](const Vec3& x) { return f.gradient(x).dot(grad); }, opts.assembly_tol);
      if (norm == ErrorNorm::hardy_energy) {
        const double off = Minv(v, 3);
        entry -= LN * integrate_singular(
                          map, invsq,
                          [&](const Vec3& x) { return f.value(x) * (grad.dot(x) + off); },
                          opts.assembly_tol);
      }
      rhs[d] += entry;
    }
  }

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> fac(Q.full());
  if (fac.info() != Eigen::Success)
    throw std::runtime_error("best_approx_error: projection solve failed");
  const Eigen::VectorXd coef = fac.solve(rhs);
  return std::sqrt(std::max(0.0, f_norm_sq - rhs.dot(coef)));
}

}  // namespace hardyfem
