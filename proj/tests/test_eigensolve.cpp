#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hardyfem/eigensolve.hpp"
#include "hardyfem/radial_oracle.hpp"
#include "hardyfem/spectral.hpp"
#include "support.hpp"

#include <cmath>

using namespace hardyfem;

namespace {

SparseSym identity_like(int n, double scale = 1.0) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < n; ++i) trips.emplace_back(i, i, scale);
  return SparseSym::from_triplets(n, std::move(trips));
}

SimplicialMesh dirichlet_interval(int n) {
  SimplicialMesh m = build_interval_mesh(n, 1.0);
  m.boundary_vertex.front() = 1;
  return m;
}

}  // namespace

TEST_CASE("smallest_genevp: Q = B converges immediately to 1") {
  const SparseSym I3 = identity_like(3);
  const EigSolution sol = smallest_genevp(I3, I3, 1e-12, 100);
  CHECK(sol.converged);
  CHECK(sol.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.iterations == 1);
}

TEST_CASE("smallest_genevp: diagonal pencil picks the smallest entry") {
  std::vector<Eigen::Triplet<double>> trips = {{0, 0, 1.0}, {1, 1, 2.0}, {2, 2, 3.0}};
  const SparseSym Q = SparseSym::from_triplets(3, trips);
  const EigSolution sol = smallest_genevp(Q, identity_like(3), 1e-12, 1000);
  CHECK(sol.converged);
  CHECK(sol.value == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(sol.vector[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(sol.vector[1]) < 1e-6);
  CHECK(std::abs(sol.vector[2]) < 1e-6);
}

TEST_CASE("smallest_genevp: 1D Dirichlet Laplacian reaches pi^2") {
  const auto mesh = dirichlet_interval(64);
  const SparseSym A = assemble_stiffness(mesh);
  const SparseSym M = assemble_mass(mesh);
  const EigSolution sol = smallest_genevp(A, M, 1e-12, 10000);
  REQUIRE(sol.converged);
  const double pi2 = 9.869604401089358;
  CHECK(std::abs(sol.value - pi2) / pi2 < 1e-3);
  // independent dense cross-check at the same n
  CHECK(sol.value ==
        doctest::Approx(testing::dense_smallest_eig(A, M)).epsilon(1e-10));
}

TEST_CASE("smallest_genevp: value is the Rayleigh quotient of the vector") {
  const auto mesh = build_interval_mesh(128, 1.0);
  auto [Q, B] = radial_assemble(RadialProblem::hardy(3), mesh);
  const EigSolution sol = smallest_genevp(Q, B, 1e-10, 20000);
  REQUIRE(sol.converged);
  const double rq = quadratic_form(Q, sol.vector) / quadratic_form(B, sol.vector);
  CHECK(sol.value == doctest::Approx(rq).epsilon(1e-12));
  // B-normalization and the sign rule
  CHECK(quadratic_form(B, sol.vector) == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 0; i < sol.vector.size(); ++i) {
    if (sol.vector[i] != 0.0) {
      CHECK(sol.vector[i] > 0.0);
      break;
    }
  }
}

TEST_CASE("smallest_genevp: brute-force equivalence for small pencils") {
  // radial pencils at n = 128 (128 dofs) and the level-1 ball Hardy pencil
  const auto mesh = build_interval_mesh(128, 1.0);
  for (const RadialProblem problem :
       {RadialProblem::hardy(3), RadialProblem::critical(3),
        RadialProblem::subcritical(3, 3.0 / 16.0), RadialProblem::weighted_mu(3),
        RadialProblem::log_hardy(3)}) {
    auto [Q, B] = radial_assemble(problem, mesh);
    const EigSolution sol = smallest_genevp(Q, B, 1e-11, 50000);
    REQUIRE(sol.converged);
    const double dense = testing::dense_smallest_eig(Q, B);
    CHECK(sol.value == doctest::Approx(dense).epsilon(1e-10));
  }

  const auto ball = build_ball_mesh(1, BoundaryRule::projected);
  const SparseSym A = assemble_stiffness(ball);
  const SparseSym W = assemble_hardy_mass(ball, 1e-11);
  const EigSolution sol = smallest_genevp(A, W, 1e-11, 50000);
  REQUIRE(sol.converged);
  CHECK(sol.value == doctest::Approx(testing::dense_smallest_eig(A, W)).epsilon(1e-10));
}

TEST_CASE("smallest_genevp: deterministic across repeated runs") {
  const auto mesh = build_interval_mesh(256, 1.0);
  auto [Q, B] = radial_assemble(RadialProblem::hardy(3), mesh);
  const EigSolution a = smallest_genevp(Q, B, 1e-10, 20000);
  const EigSolution b = smallest_genevp(Q, B, 1e-10, 20000);
  CHECK(a.value == b.value);
  CHECK(a.iterations == b.iterations);
  CHECK((a.vector - b.vector).norm() == 0.0);
}

TEST_CASE("smallest_genevp: error paths") {
  // indefinite B
  std::vector<Eigen::Triplet<double>> trips = {{0, 0, 1.0}, {1, 1, -1.0}};
  const SparseSym Bbad = SparseSym::from_triplets(2, trips);
  CHECK_THROWS_AS(smallest_genevp(identity_like(2), Bbad, 1e-10, 100), std::runtime_error);
  // dimension mismatch
  CHECK_THROWS_AS(smallest_genevp(identity_like(2), identity_like(3), 1e-10, 100),
                  std::invalid_argument);
  // iteration budget exhausted -> best estimate, converged = false
  const auto mesh = build_interval_mesh(64, 1.0);
  auto [Q, B] = radial_assemble(RadialProblem::hardy(3), mesh);
  const EigSolution sol = smallest_genevp(Q, B, 1e-12, 2);
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations == 2);
  CHECK(sol.value > 0.0);
}

TEST_CASE("hardy_constant: lower bound and nested monotonicity") {
  double prev = std::numeric_limits<double>::infinity();
  for (int level : {0, 1, 2}) {
    const auto mesh = build_ball_mesh(level, BoundaryRule::polyhedral);
    const EigSolution sol = hardy_constant(mesh);
    REQUIRE(sol.converged);
    CHECK(sol.value >= 0.25 - 1e-9);
    CHECK(sol.value <= prev + 1e-12);
    prev = sol.value;
  }
}

TEST_CASE("critical_eigen: above the continuous eigenvalue on ball meshes") {
  const auto mesh = build_ball_mesh(1, BoundaryRule::projected);
  const EigSolution sol = critical_eigen(mesh);
  REQUIRE(sol.converged);
  CHECK(sol.value >= 5.783185962947 - 1e-9);
}

TEST_CASE("subcritical_eigen: amplitude validation") {
  const auto mesh = build_ball_mesh(0, BoundaryRule::projected);
  CHECK_THROWS_AS(subcritical_eigen(mesh, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(subcritical_eigen(mesh, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(subcritical_eigen(mesh, 0.4), std::invalid_argument);
  const EigSolution sol = subcritical_eigen(mesh, 0.0);
  CHECK(sol.converged);
  CHECK(sol.value >= 9.869604401089358 - 1e-9);
}

TEST_CASE("radial best-approximation: members of V_h have zero distance") {
  const auto mesh = build_interval_mesh(16, 1.0);
  // P1 function on the mesh itself: the hat at r = 0.5
  RadialTarget hat;
  hat.value = [](double r) { return std::max(0.0, 1.0 - 16.0 * std::abs(r - 0.5)); };
  hat.derivative = [](double r) {
    if (std::abs(r - 0.5) >= 1.0 / 16.0) return 0.0;
    return r < 0.5 ? 16.0 : -16.0;
  };
  const double err = radial_best_approx_error(mesh, 3, hat, ErrorNorm::energy);
  CHECK(err < 1e-5);
}

TEST_CASE("radial best-approximation: O(h) energy decay for a smooth target") {
  RadialTarget f;
  f.value = [](double r) { return std::sin(3.14159265358979323846 * r) ; };
  f.derivative = [](double r) {
    const double pi = 3.14159265358979323846;
    return pi * std::cos(pi * r);
  };
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {16, 32, 64, 128}) {
    const auto mesh = build_interval_mesh(n, 1.0);
    const double err = radial_best_approx_error(mesh, 3, f, ErrorNorm::energy);
    if (prev < std::numeric_limits<double>::infinity())
      CHECK(err == doctest::Approx(0.5 * prev).epsilon(0.1));  // first-order decay
    prev = err;
  }
}
