#include "hardyfem/assembly.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace hardyfem {

namespace {

// Barycentric coordinate functions of one cell as affine forms
// lambda_i(x) = g_i . x + c_i; P1 gradients are the g_i.
struct CellBasis {
  int nv = 0;
  Vec3 grad[4];
  double offset[4];
  double volume = 0.0;

  double lambda(int i, const Vec3& x) const { return grad[i].dot(x) + offset[i]; }
};

CellBasis cell_basis(const SimplicialMesh& mesh, int c) {
  CellBasis basis;
  basis.nv = mesh.verts_per_cell();
  const auto& cell = mesh.cells[c];
  if (mesh.dim == 1) {
    const double a = mesh.vertices[cell[0]].x();
    const double b = mesh.vertices[cell[1]].x();
    const double len = b - a;
    if (len <= 0.0) throw std::runtime_error("assembly: degenerate cell " + std::to_string(c));
    basis.volume = len;
    basis.grad[0] = Vec3(-1.0 / len, 0, 0);
    basis.offset[0] = b / len;
    basis.grad[1] = Vec3(1.0 / len, 0, 0);
    basis.offset[1] = -a / len;
    return basis;
  }
  Eigen::Matrix4d M;
  for (int i = 0; i < 4; ++i) {
    M.block<3, 1>(0, i) = mesh.vertices[cell[i]];
    M(3, i) = 1.0;
  }
  const double det = M.determinant();
  if (std::abs(det) < 1e-300)
    throw std::runtime_error("assembly: degenerate cell " + std::to_string(c));
  const Eigen::Matrix4d Minv = M.inverse();
  basis.volume = cell_volume(mesh, c);
  for (int i = 0; i < 4; ++i) {
    basis.grad[i] = Minv.block<1, 3>(i, 0).transpose();
    basis.offset[i] = Minv(i, 3);
  }
  return basis;
}

using Triplets = std::vector<Eigen::Triplet<double>>;

void scatter_lower(const DofMap& dofs, const std::array<int, 4>& cell, int nv,
                   const double* local, Triplets& out) {
  // local is a packed (i<=j) upper-index list over the cell vertices
  int idx = 0;
  for (int i = 0; i < nv; ++i)
    for (int j = i; j < nv; ++j, ++idx) {
      const int di = dofs.interior_index[cell[i]];
      const int dj = dofs.interior_index[cell[j]];
      if (di < 0 || dj < 0) continue;
      const int r = std::max(di, dj);
      const int cidx = std::min(di, dj);
      out.emplace_back(r, cidx, local[idx]);
    }
}

SparseSym assemble_singular_form(const SimplicialMesh& mesh, const SingularWeight& w,
                                 bool gradient_form, double tol) {
  if (mesh.dim != 3)
    throw std::invalid_argument(
        "assembly: singular forms are 3D; radial meshes use the radial oracle");
  const DofMap dofs = make_dof_map(mesh);
  Triplets triplets;
  triplets.reserve(mesh.n_cells() * 10);

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellBasis basis = cell_basis(mesh, c);
    const AffineCellMap map = cell_map(mesh, c);
    const auto& cell = mesh.cells[c];
    const int nv = basis.nv;

    if (gradient_form) {
      // P1 gradients are constant per cell, so the weighted stiffness entry
      // factorizes into (grad_i . grad_j) * int_T w.
      const std::function<double(const Vec3&)> one = [](const Vec3&) { return 1.0; };
      const double wint = integrate_singular(map, w, one, tol);
      double local[10];
      int idx = 0;
      for (int i = 0; i < nv; ++i)
        for (int j = i; j < nv; ++j, ++idx)
          local[idx] = basis.grad[i].dot(basis.grad[j]) * wint;
      scatter_lower(dofs, cell, nv, local, triplets);
      continue;
    }

    // Weighted mass: integrate all interior basis products in one sweep.
    std::vector<std::function<double(const Vec3&)>> fs;
    std::vector<int> slot(10, -1);
    int idx = 0;
    for (int i = 0; i < nv; ++i)
      for (int j = i; j < nv; ++j, ++idx) {
        if (dofs.interior_index[cell[i]] < 0 || dofs.interior_index[cell[j]] < 0) continue;
        slot[idx] = static_cast<int>(fs.size());
        fs.push_back([&basis, i, j](const Vec3& x) {
          return basis.lambda(i, x) * basis.lambda(j, x);
        });
      }
    if (fs.empty()) continue;
    const auto vals = integrate_singular_many(map, w, fs, tol);
    for (const auto& v : vals)
      if (!v.converged)
        throw QuadratureError("assembly: singular entry did not converge on cell " +
                                  std::to_string(c),
                              v.value, v.error);
    double local[10];
    idx = 0;
    for (int i = 0; i < nv; ++i)
      for (int j = i; j < nv; ++j, ++idx)
        local[idx] = slot[idx] >= 0 ? vals[slot[idx]].value : 0.0;
    scatter_lower(dofs, cell, nv, local, triplets);
  }
  return SparseSym::from_triplets(dofs.n_dofs, std::move(triplets));
}

}  // namespace

DofMap make_dof_map(const SimplicialMesh& mesh) {
  DofMap dofs;
  dofs.interior_index.assign(mesh.n_vertices(), -1);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (mesh.boundary_vertex[v]) continue;
    dofs.interior_index[v] = dofs.n_dofs++;
    dofs.dof_to_vertex.push_back(v);
  }
  return dofs;
}

SparseSym SparseSym::from_triplets(int n, std::vector<Eigen::Triplet<double>> triplets) {
  SparseSym s;
  s.lower_.resize(n, n);
  s.lower_.setFromTriplets(triplets.begin(), triplets.end());
  s.lower_.prune([](const Eigen::Index&, const Eigen::Index&, const double& v) {
    return std::abs(v) > 1e-300;
  });
  s.lower_.makeCompressed();
  return s;
}

double SparseSym::trace() const {
  double t = 0.0;
  for (int i = 0; i < n(); ++i) t += lower_.coeff(i, i);
  return t;
}

Eigen::VectorXd SparseSym::apply(const Eigen::VectorXd& x) const {
  if (x.size() != n()) throw std::invalid_argument("SparseSym::apply: dimension mismatch");
  return lower_.selfadjointView<Eigen::Lower>() * x;
}

Eigen::VectorXd SparseSym::apply_abs(const Eigen::VectorXd& x) const {
  if (x.size() != n()) throw std::invalid_argument("SparseSym::apply_abs: dimension mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n());
  for (int k = 0; k < lower_.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(lower_, k); it; ++it) {
      const double v = std::abs(it.value());
      out[it.row()] += v * std::abs(x[it.col()]);
      if (it.row() != it.col()) out[it.col()] += v * std::abs(x[it.row()]);
    }
  return out;
}

SparseSym SparseSym::add_scaled(double alpha, const SparseSym& other) const {
  if (other.n() != n()) throw std::invalid_argument("SparseSym: dimension mismatch");
  SparseSym s;
  s.lower_ = lower_ + alpha * other.lower_;
  s.lower_.prune([](const Eigen::Index&, const Eigen::Index&, const double& v) {
    return std::abs(v) > 1e-300;
  });
  s.lower_.makeCompressed();
  return s;
}

Eigen::SparseMatrix<double> SparseSym::full() const {
  Eigen::SparseMatrix<double> f = lower_.selfadjointView<Eigen::Lower>();
  return f;
}

Eigen::MatrixXd SparseSym::dense() const {
  return Eigen::MatrixXd(full());
}

void SparseSym::write_coord(std::ostream& os) const {
  os << n() << ' ' << nnz() << '\n';
  char buf[64];
  for (int k = 0; k < lower_.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(lower_, k); it; ++it) {
      std::snprintf(buf, sizeof(buf), "%.17g", it.value());
      os << it.row() << ' ' << it.col() << ' ' << buf << '\n';
    }
}

SparseSym SparseSym::read_coord(std::istream& is) {
  int n = 0, nnz = 0;
  if (!(is >> n >> nnz)) throw std::runtime_error("SparseSym: bad coordinate header");
  Triplets triplets;
  triplets.reserve(nnz);
  for (int k = 0; k < nnz; ++k) {
    int i = 0, j = 0;
    double v = 0.0;
    if (!(is >> i >> j >> v)) throw std::runtime_error("SparseSym: bad coordinate entry");
    if (j > i) throw std::runtime_error("SparseSym: entry above the diagonal");
    triplets.emplace_back(i, j, v);
  }
  return from_triplets(n, std::move(triplets));
}

SparseSym assemble_stiffness(const SimplicialMesh& mesh) {
  const DofMap dofs = make_dof_map(mesh);
  Triplets triplets;
  triplets.reserve(mesh.n_cells() * 10);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellBasis basis = cell_basis(mesh, c);
    const int nv = basis.nv;
    double local[10];
    int idx = 0;
    for (int i = 0; i < nv; ++i)
      for (int j = i; j < nv; ++j, ++idx)
        local[idx] = basis.volume * basis.grad[i].dot(basis.grad[j]);
    scatter_lower(dofs, mesh.cells[c], nv, local, triplets);
  }
  return SparseSym::from_triplets(dofs.n_dofs, std::move(triplets));
}

SparseSym assemble_mass(const SimplicialMesh& mesh) {
  const DofMap dofs = make_dof_map(mesh);
  const int d = mesh.dim;
  const double denom = (d + 1) * (d + 2);
  Triplets triplets;
  triplets.reserve(mesh.n_cells() * 10);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double vol = cell_volume(mesh, c);
    if (vol <= 0.0) throw std::runtime_error("assembly: degenerate cell " + std::to_string(c));
    const int nv = d + 1;
    double local[10];
    int idx = 0;
    for (int i = 0; i < nv; ++i)
      for (int j = i; j < nv; ++j, ++idx)
        local[idx] = vol * (i == j ? 2.0 : 1.0) / denom;
    scatter_lower(dofs, mesh.cells[c], nv, local, triplets);
  }
  return SparseSym::from_triplets(dofs.n_dofs, std::move(triplets));
}

SparseSym assemble_hardy_mass(const SimplicialMesh& mesh, double tol) {
  return assemble_singular_form(mesh, make_weight(SingularKind::inv_sq), false, tol);
}

SparseSym assemble_log_hardy_mass(const SimplicialMesh& mesh, double R, double tol) {
  return assemble_singular_form(mesh, make_weight(SingularKind::inv_sq_logsq, R), false, tol);
}

SparseSym assemble_log_stiffness(const SimplicialMesh& mesh, double R, double tol) {
  return assemble_singular_form(mesh, make_weight(SingularKind::logsq_inv, R), true, tol);
}

std::pair<SparseSym, SparseSym> assemble_mu_weighted(const SimplicialMesh& mesh, int N,
                                                     double tol) {
  if (N < 2) throw std::invalid_argument("assemble_mu_weighted: N must be >= 2");
  if (N == 2) return {assemble_stiffness(mesh), assemble_mass(mesh)};
  const SingularWeight w = make_weight(SingularKind::mu_weight, 1.0, N);
  return {assemble_singular_form(mesh, w, true, tol),
          assemble_singular_form(mesh, w, false, tol)};
}

Eigen::VectorXd interpolate(const SimplicialMesh& mesh,
                            const std::function<double(const Vec3&)>& f) {
  const DofMap dofs = make_dof_map(mesh);
  Eigen::VectorXd x(dofs.n_dofs);
  for (int d = 0; d < dofs.n_dofs; ++d) {
    const double v = f(mesh.vertices[dofs.dof_to_vertex[d]]);
    if (!std::isfinite(v))
      throw std::invalid_argument("interpolate: non-finite value at vertex " +
                                  std::to_string(dofs.dof_to_vertex[d]));
    x[d] = v;
  }
  return x;
}

double quadratic_form(const SparseSym& Q, const Eigen::VectorXd& x) {
  if (x.size() != Q.n()) throw std::invalid_argument("quadratic_form: dimension mismatch");
  const auto& L = Q.lower();
  double acc = 0.0;
  for (int k = 0; k < L.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(L, k); it; ++it) {
      const double term = it.value() * x[it.row()] * x[it.col()];
      acc += it.row() == it.col() ? term : 2.0 * term;
    }
  return acc;
}

}  // namespace hardyfem
