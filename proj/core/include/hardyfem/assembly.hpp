#pragma once

// P1 Galerkin matrices over interior degrees of freedom for the bilinear
// forms of the singular Rayleigh quotients: stiffness, mass, Hardy mass
// u*v/|x|^2, the log-corrected variants, and the |x|^-(N-2)-weighted pair.
// Homogeneous Dirichlet conditions are imposed by excluding boundary
// vertices from the dof map.

#include "hardyfem/mesh.hpp"
#include "hardyfem/quadrature.hpp"

#include <Eigen/Sparse>

#include <iosfwd>
#include <utility>

namespace hardyfem {

struct DofMap {
  std::vector<int> interior_index;  // vertex index -> dense dof index, -1 on boundary
  std::vector<int> dof_to_vertex;
  int n_dofs = 0;
};

DofMap make_dof_map(const SimplicialMesh& mesh);

/// Symmetric sparse operator, lower triangle stored.
class SparseSym {
 public:
  SparseSym() = default;
  static SparseSym from_triplets(int n, std::vector<Eigen::Triplet<double>> triplets);

  int n() const { return static_cast<int>(lower_.rows()); }
  int nnz() const { return static_cast<int>(lower_.nonZeros()); }
  double trace() const;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  /// |Q| |x| componentwise; bounds the roundoff in apply().
  Eigen::VectorXd apply_abs(const Eigen::VectorXd& x) const;
  /// this + alpha * other
  SparseSym add_scaled(double alpha, const SparseSym& other) const;

  /// Full symmetric matrix (both triangles), for factorizations.
  Eigen::SparseMatrix<double> full() const;
  Eigen::MatrixXd dense() const;
  const Eigen::SparseMatrix<double>& lower() const { return lower_; }

  // Coordinate text format: "n nnz" header, then "i j value" lines for the
  // lower triangle at 17 significant digits.
  void write_coord(std::ostream& os) const;
  static SparseSym read_coord(std::istream& is);

 private:
  Eigen::SparseMatrix<double> lower_;
};

/// Default relative tolerance for singular matrix entries; below the
/// discretization error at every target mesh size.
inline constexpr double kAssemblyTol = 1e-10;

SparseSym assemble_stiffness(const SimplicialMesh& mesh);          // int grad u . grad v
SparseSym assemble_mass(const SimplicialMesh& mesh);               // int u v
SparseSym assemble_hardy_mass(const SimplicialMesh& mesh,          // int u v / |x|^2
                              double tol = kAssemblyTol);
SparseSym assemble_log_hardy_mass(const SimplicialMesh& mesh, double R,
                                  double tol = kAssemblyTol);      // u v/(|x|^2 log^2(R/|x|))
SparseSym assemble_log_stiffness(const SimplicialMesh& mesh, double R,
                                 double tol = kAssemblyTol);       // grad.grad log^-2(R/|x|)
std::pair<SparseSym, SparseSym> assemble_mu_weighted(const SimplicialMesh& mesh, int N,
                                                     double tol = kAssemblyTol);

/// Vertex values of f at interior dofs (boundary values are dropped; the
/// caller is responsible for f respecting homogeneous boundary values).
Eigen::VectorXd interpolate(const SimplicialMesh& mesh,
                            const std::function<double(const Vec3&)>& f);

/// x^T Q x with exact symmetric accumulation.
double quadratic_form(const SparseSym& Q, const Eigen::VectorXd& x);

}  // namespace hardyfem
