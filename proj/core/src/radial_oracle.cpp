#include "hardyfem/radial_oracle.hpp"

#include "hardyfem/analytic.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>

namespace hardyfem {

namespace {

void check_radial_mesh(const SimplicialMesh& mesh) {
  if (mesh.dim != 1)
    throw std::invalid_argument("radial_oracle: 1D mesh required");
  if (mesh.boundary_vertex.empty() || !mesh.boundary_vertex[mesh.n_vertices() - 1])
    throw std::invalid_argument("radial_oracle: boundary flag required at r=1");
  if (mesh.boundary_vertex[0])
    throw std::invalid_argument("radial_oracle: r=0 must be an unconstrained dof");
}

// Generic weighted assembly: entries int g_w(r) * s_i(r) * s_j(r) * r^k dr
// where s is either the hat function or its derivative.
SparseSym assemble_radial(const SimplicialMesh& mesh, double k,
                          const std::function<double(double)>& g_w, bool gradient_form,
                          double tol) {
  check_radial_mesh(mesh);
  const DofMap dofs = make_dof_map(mesh);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.n_cells() * 3);

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& cell = mesh.cells[c];
    const double a = mesh.vertices[cell[0]].x();
    const double b = mesh.vertices[cell[1]].x();
    const double len = b - a;
    if (len <= 0.0)
      throw std::runtime_error("radial_oracle: degenerate cell " + std::to_string(c));

    double local[3];  // (0,0), (0,1), (1,1)
    if (gradient_form) {
      const double gprod = 1.0 / (len * len);
      const double wint = radial_integrate(g_w, a, b, k, tol);
      local[0] = gprod * wint;
      local[1] = -gprod * wint;
      local[2] = gprod * wint;
    } else {
      auto hat_l = [&](double r) { return (b - r) / len; };
      auto hat_r = [&](double r) { return (r - a) / len; };
      local[0] = radial_integrate([&](double r) { return g_w(r) * hat_l(r) * hat_l(r); },
                                  a, b, k, tol);
      local[1] = radial_integrate([&](double r) { return g_w(r) * hat_l(r) * hat_r(r); },
                                  a, b, k, tol);
      local[2] = radial_integrate([&](double r) { return g_w(r) * hat_r(r) * hat_r(r); },
                                  a, b, k, tol);
    }

    const int d0 = dofs.interior_index[cell[0]];
    const int d1 = dofs.interior_index[cell[1]];
    if (d0 >= 0) triplets.emplace_back(d0, d0, local[0]);
    if (d0 >= 0 && d1 >= 0)
      triplets.emplace_back(std::max(d0, d1), std::min(d0, d1), local[1]);
    if (d1 >= 0) triplets.emplace_back(d1, d1, local[2]);
  }
  return SparseSym::from_triplets(dofs.n_dofs, std::move(triplets));
}

constexpr double kEntryTol = 1e-12;

const std::function<double(double)> kUnit = [](double) { return 1.0; };

}  // namespace

void validate(const RadialProblem& p) {
  if (p.N < 3) throw std::invalid_argument("RadialProblem: N must be >= 3");
  const double LN = hardy_const(p.N);
  if (p.kind == RadialKind::subcritical) {
    if (!(p.lambda_amp >= 0.0 && p.lambda_amp < LN))
      throw std::invalid_argument(
          "RadialProblem: subcritical amplitude must satisfy 0 <= Lambda < Lambda_N");
  }
  if (p.kind == RadialKind::log_hardy && p.log_R < 1.0)
    throw std::invalid_argument("RadialProblem: log_R must be >= 1");
}

SparseSym radial_stiffness(const SimplicialMesh& mesh, int N) {
  return assemble_radial(mesh, N - 1.0, kUnit, true, kEntryTol);
}

SparseSym radial_mass(const SimplicialMesh& mesh, int N) {
  return assemble_radial(mesh, N - 1.0, kUnit, false, kEntryTol);
}

SparseSym radial_hardy_mass(const SimplicialMesh& mesh, int N) {
  if (N < 3) throw std::invalid_argument("radial_hardy_mass: N must be >= 3");
  return assemble_radial(mesh, N - 3.0, kUnit, false, kEntryTol);
}

SparseSym radial_log_hardy_mass(const SimplicialMesh& mesh, int N, double R) {
  if (N < 3) throw std::invalid_argument("radial_log_hardy_mass: N must be >= 3");
  auto w = [R](double r) {
    const double L = std::log(R / r);
    return 1.0 / (L * L);
  };
  return assemble_radial(mesh, N - 3.0, w, false, kEntryTol);
}

SparseSym radial_log_stiffness(const SimplicialMesh& mesh, int N, double R) {
  auto w = [R](double r) {
    const double L = std::log(R / r);
    return 1.0 / (L * L);
  };
  return assemble_radial(mesh, N - 1.0, w, true, kEntryTol);
}

std::pair<SparseSym, SparseSym> radial_mu_weighted(const SimplicialMesh& mesh, int N) {
  if (N < 3) throw std::invalid_argument("radial_mu_weighted: N must be >= 3");
  // density r^{-(N-2)} against measure r^{N-1} dr leaves weight r for any N
  return {assemble_radial(mesh, 1.0, kUnit, true, kEntryTol),
          assemble_radial(mesh, 1.0, kUnit, false, kEntryTol)};
}

std::pair<SparseSym, SparseSym> radial_assemble(const RadialProblem& problem,
                                                const SimplicialMesh& mesh) {
  validate(problem);
  const double LN = hardy_const(problem.N);
  switch (problem.kind) {
    case RadialKind::hardy:
      return {radial_stiffness(mesh, problem.N), radial_hardy_mass(mesh, problem.N)};
    case RadialKind::critical: {
      SparseSym Q = radial_stiffness(mesh, problem.N)
                        .add_scaled(-LN, radial_hardy_mass(mesh, problem.N));
      return {std::move(Q), radial_mass(mesh, problem.N)};
    }
    case RadialKind::subcritical: {
      SparseSym Q = radial_stiffness(mesh, problem.N)
                        .add_scaled(-problem.lambda_amp, radial_hardy_mass(mesh, problem.N));
      return {std::move(Q), radial_mass(mesh, problem.N)};
    }
    case RadialKind::weighted_mu:
      return radial_mu_weighted(mesh, problem.N);
    case RadialKind::log_hardy: {
      SparseSym Q = radial_stiffness(mesh, problem.N)
                        .add_scaled(-LN, radial_hardy_mass(mesh, problem.N));
      return {std::move(Q), radial_log_hardy_mass(mesh, problem.N, problem.log_R)};
    }
  }
  throw std::logic_error("radial_assemble: unreachable");
}

EigSolution radial_solve(const RadialProblem& problem, int n_cells, double grading,
                         double tol, int max_iterations) {
  const SimplicialMesh mesh = build_interval_mesh(n_cells, grading);
  auto [Q, B] = radial_assemble(problem, mesh);
  return smallest_genevp(Q, B, tol, max_iterations);
}

std::vector<RatePoint> radial_rate_study(const RadialProblem& problem,
                                         const std::vector<int>& levels, double tol) {
  if (levels.size() < 2) throw std::invalid_argument("radial_rate_study: need >= 2 levels");
  for (size_t i = 1; i < levels.size(); ++i)
    if (levels[i] <= levels[i - 1])
      throw std::invalid_argument("radial_rate_study: levels must be increasing");
  std::vector<RatePoint> out;
  out.reserve(levels.size());
  for (int n : levels) {
    RatePoint pt;
    pt.n_cells = n;
    pt.h = 1.0 / n;
    pt.dofs = n;  // vertices 0..n, only r=1 constrained
    pt.value = radial_solve(problem, n, 1.0, tol).value;
    out.push_back(pt);
  }
  return out;
}

double radial_best_approx_error(const SimplicialMesh& mesh, int N, const RadialTarget& f,
                                ErrorNorm norm, double norm_sq_hint, double tol) {
  check_radial_mesh(mesh);
  if (N < 3) throw std::invalid_argument("radial_best_approx_error: N must be >= 3");
  const double LN = hardy_const(N);
  const DofMap dofs = make_dof_map(mesh);

  SparseSym Q = radial_stiffness(mesh, N);
  if (norm == ErrorNorm::hardy_energy)
    Q = Q.add_scaled(-LN, radial_hardy_mass(mesh, N));

  // Right-hand side b_i = a(f, phi_i), cellwise.
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dofs.n_dofs);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& cell = mesh.cells[c];
    const double a = mesh.vertices[cell[0]].x();
    const double b = mesh.vertices[cell[1]].x();
    const double len = b - a;
    const double grad[2] = {-1.0 / len, 1.0 / len};
    for (int v = 0; v < 2; ++v) {
      const int d = dofs.interior_index[cell[v]];
      if (d < 0) continue;
      double entry = radial_integrate(
          [&](double r) { return f.derivative(r) * grad[v]; }, a, b, N - 1.0, tol);
      if (norm == ErrorNorm::hardy_energy) {
        auto hat = [&](double r) { return v == 0 ? (b - r) / len : (r - a) / len; };
        entry -= LN * radial_integrate([&](double r) { return f.value(r) * hat(r); }, a, b,
                                       N - 3.0, tol);
      }
      rhs[d] += entry;
    }
  }

  double f_norm_sq = norm_sq_hint;
  if (f_norm_sq < 0.0) {
    auto energy = [&](double r) {
      const double d = f.derivative(r);
      return d * d;
    };
    f_norm_sq = radial_integrate(energy, 0.0, 1.0, N - 1.0, tol);
    if (norm == ErrorNorm::hardy_energy) {
      auto mass = [&](double r) {
        const double v = f.value(r);
        return v * v;
      };
      f_norm_sq -= LN * radial_integrate(mass, 0.0, 1.0, N - 3.0, tol);
    }
  }

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> fac(Q.full());
  if (fac.info() != Eigen::Success)
    throw std::runtime_error("radial_best_approx_error: projection solve failed");
  const Eigen::VectorXd coef = fac.solve(rhs);
  const double err_sq = f_norm_sq - rhs.dot(coef);
  return std::sqrt(std::max(0.0, err_sq));
}

}  // namespace hardyfem
