#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hardyfem/assembly.hpp"
#include "hardyfem/eigensolve.hpp"
#include "support.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

using namespace hardyfem;

namespace {

// Interval with homogeneous Dirichlet conditions at both ends (the radial
// builder leaves r=0 free, which is not what the plain 1D Laplacian wants).
SimplicialMesh dirichlet_interval(int n) {
  SimplicialMesh m = build_interval_mesh(n, 1.0);
  m.boundary_vertex.front() = 1;
  return m;
}

// Single reference tetrahedron with every vertex treated as a dof.
SimplicialMesh free_reference_tet() {
  SimplicialMesh m;
  m.dim = 3;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  m.cells = {{0, 1, 2, 3}};
  m.boundary_vertex = {0, 0, 0, 0};
  return m;
}

}  // namespace

TEST_CASE("stiffness: interval n=2 with Dirichlet ends is [4]") {
  const auto m = dirichlet_interval(2);
  const SparseSym A = assemble_stiffness(m);
  REQUIRE(A.n() == 1);
  CHECK(A.dense()(0, 0) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("mass: interval n=2 with Dirichlet ends is [1/3]") {
  const auto m = dirichlet_interval(2);
  const SparseSym M = assemble_mass(m);
  REQUIRE(M.n() == 1);
  CHECK(M.dense()(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("stiffness: rows of fully interior vertices sum to zero") {
  const auto mesh = build_ball_mesh(2, BoundaryRule::polyhedral);
  const DofMap dofs = make_dof_map(mesh);
  const SparseSym A = assemble_stiffness(mesh);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(A.n());
  const Eigen::VectorXd row_sums = A.apply(ones);

  // vertices all of whose mesh neighbors are interior
  std::vector<std::set<int>> nbrs(mesh.n_vertices());
  for (const auto& cell : mesh.cells)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) nbrs[cell[i]].insert(cell[j]);
  int tested = 0;
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const int d = dofs.interior_index[v];
    if (d < 0) continue;
    bool all_interior = true;
    for (int u : nbrs[v]) all_interior = all_interior && !mesh.boundary_vertex[u];
    if (!all_interior) continue;
    CHECK(std::abs(row_sums[d]) < 1e-12);
    ++tested;
  }
  CHECK(tested > 0);
}

TEST_CASE("stiffness and mass: reference tetrahedron entries") {
  SimplicialMesh m = free_reference_tet();
  m.boundary_vertex = {0, 1, 1, 1};  // keep only the origin hat
  const SparseSym A = assemble_stiffness(m);
  REQUIRE(A.n() == 1);
  CHECK(A.dense()(0, 0) == doctest::Approx(0.5).epsilon(1e-14));  // (1/6)*|(-1,-1,-1)|^2
  const SparseSym M = assemble_mass(m);
  CHECK(M.dense()(0, 0) == doctest::Approx(1.0 / 60.0).epsilon(1e-14));  // |T|/10
}

TEST_CASE("mass: partition of unity gives the patch volume") {
  const auto m = free_reference_tet();
  const SparseSym M = assemble_mass(m);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(4);
  CHECK(ones.dot(M.apply(ones)) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("hardy mass: far-cell entries obey the pointwise weight bound") {
  SimplicialMesh m = free_reference_tet();
  for (auto& v : m.vertices) v += Vec3(1.0, 0.2, 0.1);  // move the cell away from 0
  double min_r = 1e9;
  const auto mp = cell_map(m, 0);
  for (int i = 0; i < 4; ++i) min_r = std::min(min_r, mp.vertex(i).norm());
  const SparseSym W = assemble_hardy_mass(m, 1e-11);
  const SparseSym M = assemble_mass(m);
  const Eigen::MatrixXd Wd = W.dense(), Md = M.dense();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(Wd(i, j) <= Md(i, j) / (min_r * min_r) * (1.0 + 1e-10));
}

TEST_CASE("hardy mass: rejects non-3D meshes") {
  CHECK_THROWS_AS(assemble_hardy_mass(build_interval_mesh(4, 1.0)), std::invalid_argument);
}

TEST_CASE("log hardy mass: entrywise below the plain Hardy mass for R = e") {
  const auto mesh = build_ball_mesh(1, BoundaryRule::polyhedral);
  const SparseSym W = assemble_hardy_mass(mesh, 1e-9);
  const SparseSym LW = assemble_log_hardy_mass(mesh, 2.718281828459045, 1e-9);
  const Eigen::MatrixXd Wd = W.dense(), Ld = LW.dense();
  for (int i = 0; i < W.n(); ++i)
    for (int j = 0; j < W.n(); ++j)
      CHECK(Ld(i, j) <= Wd(i, j) * (1.0 + 1e-8) + 1e-15);
}

TEST_CASE("log stiffness: single-cell factorization and global bound") {
  const double R = 2.718281828459045;
  SimplicialMesh m = free_reference_tet();
  m.vertices = {Vec3(0.3, 0.1, 0.1), Vec3(0.6, 0.1, 0.1), Vec3(0.3, 0.5, 0.1),
                Vec3(0.3, 0.1, 0.4)};
  const SparseSym L = assemble_log_stiffness(m, R, 1e-11);
  const double wint = integrate_singular(cell_map(m, 0), make_weight(SingularKind::logsq_inv, R),
                                          [](const Vec3&) { return 1.0; }, 1e-12);
  // gradient of the hat at vertex 1 is (1/0.3, 0, 0)
  const double g = 1.0 / 0.3;
  CHECK(L.dense()(1, 1) == doctest::Approx(g * g * wint).epsilon(1e-9));

  const auto ball = build_ball_mesh(1, BoundaryRule::polyhedral);
  const SparseSym A = assemble_stiffness(ball);
  const SparseSym Lb = assemble_log_stiffness(ball, R, 1e-9);
  // log(R/|x|) >= 1 inside the unit ball, so the weighted form is dominated
  const Eigen::MatrixXd Ad = A.dense(), Lbd = Lb.dense();
  for (int i = 0; i < A.n(); ++i) CHECK(Lbd(i, i) <= Ad(i, i) * (1.0 + 1e-9));
}

TEST_CASE("mu-weighted forms: N=2 reduces to the plain pair") {
  const auto mesh = build_ball_mesh(1, BoundaryRule::polyhedral);
  const auto [K, B] = assemble_mu_weighted(mesh, 2);
  CHECK((K.dense() - assemble_stiffness(mesh).dense()).norm() == doctest::Approx(0.0));
  CHECK((B.dense() - assemble_mass(mesh).dense()).norm() == doctest::Approx(0.0));
}

TEST_CASE("mu-weighted forms: SPD for N=3 on the ball") {
  const auto mesh = build_ball_mesh(1, BoundaryRule::projected);
  const auto [K, B] = assemble_mu_weighted(mesh, 3, 1e-9);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ek(K.dense()), eb(B.dense());
  CHECK(ek.eigenvalues()(0) > 0.0);
  CHECK(eb.eigenvalues()(0) > 0.0);
}

TEST_CASE("interpolate: affine reproduction and error paths") {
  const auto m = dirichlet_interval(4);
  auto f = [](const Vec3& x) { return std::min(x[0], 1.0 - x[0]); };
  const Eigen::VectorXd v = interpolate(m, f);
  REQUIRE(v.size() == 3);
  CHECK(v[0] == doctest::Approx(0.25));
  CHECK(v[1] == doctest::Approx(0.5));
  CHECK(v[2] == doctest::Approx(0.25));

  CHECK(interpolate(m, [](const Vec3&) { return 0.0; }).norm() == 0.0);
  CHECK_THROWS_AS(
      interpolate(m, [](const Vec3& x) { return 1.0 / (x[0] - 0.5); }),
      std::invalid_argument);
}

TEST_CASE("quadratic_form: zero vector, diagonal matrices, dimension mismatch") {
  std::vector<Eigen::Triplet<double>> trips = {{0, 0, 2.0}, {1, 1, 3.0}, {2, 2, 4.0}};
  const SparseSym D = SparseSym::from_triplets(3, trips);
  CHECK(quadratic_form(D, Eigen::VectorXd::Zero(3)) == 0.0);
  Eigen::VectorXd x(3);
  x << 1.0, -2.0, 0.5;
  CHECK(quadratic_form(D, x) == doctest::Approx(2.0 + 12.0 + 1.0).epsilon(1e-15));
  CHECK_THROWS_AS(quadratic_form(D, Eigen::VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("discrete Hardy inequality: random-vector sweep on the deficit form") {
  const auto mesh = build_ball_mesh(1, BoundaryRule::projected);
  const SparseSym A = assemble_stiffness(mesh);
  const SparseSym W = assemble_hardy_mass(mesh, 1e-10);
  const SparseSym Q = A.add_scaled(-0.25, W);
  std::mt19937 rng(20250810);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd x(Q.n());
    for (int i = 0; i < x.size(); ++i) x[i] = gauss(rng);
    CHECK(quadratic_form(Q, x) >= -1e-9 * x.squaredNorm());
  }
}

TEST_CASE("Galerkin consistency: assembled form equals direct quadrature") {
  const auto mesh = build_ball_mesh(1, BoundaryRule::polyhedral);
  const DofMap dofs = make_dof_map(mesh);
  const SparseSym A = assemble_stiffness(mesh);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::VectorXd x(A.n());
  for (int i = 0; i < x.size(); ++i) x[i] = unif(rng);

  // direct per-cell quadrature of |grad u_h|^2 for the P1 function with dof
  // values x (zero on the boundary)
  double direct = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& cell = mesh.cells[c];
    Eigen::Matrix4d M;
    for (int i = 0; i < 4; ++i) {
      M.block<3, 1>(0, i) = mesh.vertices[cell[i]];
      M(3, i) = 1.0;
    }
    const Eigen::Matrix4d Minv = M.inverse();
    Vec3 grad = Vec3::Zero();
    for (int i = 0; i < 4; ++i) {
      const int d = dofs.interior_index[cell[i]];
      if (d >= 0) grad += x[d] * Vec3(Minv.block<1, 3>(i, 0).transpose());
    }
    direct += cell_volume(mesh, c) * grad.squaredNorm();
  }
  CHECK(quadratic_form(A, x) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("assembled operators are symmetric positive definite") {
  const auto mesh = build_ball_mesh(1, BoundaryRule::projected);
  for (const SparseSym& Q :
       {assemble_stiffness(mesh), assemble_mass(mesh), assemble_hardy_mass(mesh, 1e-9),
        assemble_log_hardy_mass(mesh, 2.718281828459045, 1e-9),
        assemble_log_stiffness(mesh, 2.718281828459045, 1e-9)}) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Q.full());
    REQUIRE(ldlt.info() == Eigen::Success);
    CHECK(ldlt.vectorD().minCoeff() > 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q.dense());
    CHECK(es.eigenvalues()(0) > 0.0);
  }
}

TEST_CASE("discrete improved Hardy: deficit dominates the log-weighted energy") {
  const double R = 2.718281828459045;
  std::vector<double> cs;
  for (int level : {1, 2}) {
    const auto mesh = build_ball_mesh(level, BoundaryRule::polyhedral);
    const SparseSym Q =
        assemble_stiffness(mesh).add_scaled(-0.25, assemble_hardy_mass(mesh, 1e-9));
    const SparseSym L = assemble_log_stiffness(mesh, R, 1e-9);
    cs.push_back(testing::dense_smallest_eig(Q, L));
    CHECK(cs.back() > 0.0);
  }
  CHECK(std::max(cs[0], cs[1]) <= 2.0 * std::min(cs[0], cs[1]));
}

TEST_CASE("nested-space monotonicity of the Hardy pencil") {
  double prev = std::numeric_limits<double>::infinity();
  for (int level : {0, 1, 2}) {
    const auto mesh = build_ball_mesh(level, BoundaryRule::polyhedral);
    const double v = testing::dense_smallest_eig(assemble_stiffness(mesh),
                                                 assemble_hardy_mass(mesh, 1e-10));
    CHECK(v <= prev + 1e-12);
    CHECK(v >= 0.25 - 1e-9);
    prev = v;
  }
}

TEST_CASE("matrix coordinate format round-trips") {
  const auto mesh = build_ball_mesh(1, BoundaryRule::polyhedral);
  const SparseSym A = assemble_stiffness(mesh);
  std::stringstream ss;
  A.write_coord(ss);
  const SparseSym B = SparseSym::read_coord(ss);
  CHECK(B.n() == A.n());
  CHECK(B.nnz() == A.nnz());
  CHECK((B.dense() - A.dense()).norm() == 0.0);

  std::stringstream ss2, ss3;
  A.write_coord(ss2);
  B.write_coord(ss3);
  CHECK(ss2.str() == ss3.str());
}

TEST_CASE("dof map: bijection onto interior vertices, origin included") {
  const auto mesh = build_ball_mesh(1, BoundaryRule::projected);
  const DofMap dofs = make_dof_map(mesh);
  int interior = 0;
  for (int v = 0; v < mesh.n_vertices(); ++v)
    if (!mesh.boundary_vertex[v]) ++interior;
  CHECK(dofs.n_dofs == interior);
  for (int d = 0; d < dofs.n_dofs; ++d)
    CHECK(dofs.interior_index[dofs.dof_to_vertex[d]] == d);
  CHECK(dofs.interior_index[origin_vertex(mesh)] >= 0);
}
