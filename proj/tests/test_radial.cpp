#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hardyfem/analytic.hpp"
#include "hardyfem/radial_oracle.hpp"
#include "support.hpp"

#include <cmath>

using namespace hardyfem;

TEST_CASE("radial assembly: hand-checked entries at n = 2, N = 3") {
  const auto mesh = build_interval_mesh(2, 1.0);

  // Hardy mass, origin hat: int_0^{1/2} (1-2r)^2 dr = 1/6  (weight r^{N-3} = 1)
  const SparseSym W = radial_hardy_mass(mesh, 3);
  CHECK(W.dense()(0, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

  // stiffness diagonal of the r=1/2 hat: 4 * int_0^1 r^2 dr = 4/3
  const SparseSym A = radial_stiffness(mesh, 3);
  CHECK(A.dense()(1, 1) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("radial stiffness: rows of interior-patch vertices sum to zero") {
  const auto mesh = build_interval_mesh(8, 1.0);
  const SparseSym A = radial_stiffness(mesh, 3);
  const Eigen::VectorXd sums = A.apply(Eigen::VectorXd::Ones(A.n()));
  // vertices 1..6 have all neighbors interior (vertex 7 touches the boundary)
  for (int d = 1; d <= 6; ++d) CHECK(std::abs(sums[d]) < 1e-12);
}

TEST_CASE("radial hardy mass: partition of unity reproduces int r^{N-3}") {
  // The interior hats sum to 1 on [0, r_{n-1}] and ramp down linearly on the
  // last cell, so 1^T W 1 = int_0^{r_{n-1}} r^{N-3} dr + the ramp integral.
  for (int N : {3, 4, 5}) {
    const auto mesh = build_interval_mesh(16, 1.0);
    const SparseSym W = radial_hardy_mass(mesh, N);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(W.n());
    const double plateau =
        radial_integrate([](double) { return 1.0; }, 0.0, 15.0 / 16.0, N - 3.0, 1e-13);
    const double ramp = radial_integrate(
        [](double r) {
          const double s = (1.0 - r) * 16.0;
          return s * s;
        },
        15.0 / 16.0, 1.0, N - 3.0, 1e-13);
    CHECK(ones.dot(W.apply(ones)) == doctest::Approx(plateau + ramp).epsilon(1e-10));
  }
}

TEST_CASE("radial_solve: subcritical Lambda = 0 reaches pi^2 at n = 4096") {
  const EigSolution sol = radial_solve(RadialProblem::subcritical(3, 0.0), 4096, 1.0, 1e-11);
  REQUIRE(sol.converged);
  const double pi2 = 9.869604401089358;
  CHECK(std::abs(sol.value - pi2) / pi2 < 1e-5);
}

TEST_CASE("radial_solve: weighted pencil reaches z01^2 fast; critical is log-slow") {
  const double mu1 = phi1_critical(3).lambda;
  const EigSolution weighted = radial_solve(RadialProblem::weighted_mu(3), 4096, 1.0, 1e-11);
  REQUIRE(weighted.converged);
  CHECK(std::abs(weighted.value - mu1) / mu1 < 1e-4);
  CHECK(weighted.value >= mu1 - 1e-9);

  // The plain critical pencil sees the r^{-1/2}-type singular eigenfunction
  // and converges only like 1/|log h|; at n = 4096 the gap is order 1/2.
  const EigSolution critical = radial_solve(RadialProblem::critical(3), 4096, 1.0, 1e-10);
  REQUIRE(critical.converged);
  CHECK(critical.value >= mu1 - 1e-9);
  const double scaled_gap = (critical.value - mu1) * std::abs(std::log(1.0 / 4096.0));
  CHECK(scaled_gap > 3.0);
  CHECK(scaled_gap < 7.0);
  // the two discretizations of the same continuous eigenvalue differ by the
  // slow pencil's gap, not by solver tolerance
  CHECK(std::abs(weighted.value - critical.value) <
        (critical.value - mu1) * (1.0 + 1e-6) + 1e-8);
}

TEST_CASE("radial_solve: hardy values decrease with refinement, stay above 1/4") {
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 6; k <= 16; k += 2) {
    const EigSolution sol = radial_solve(RadialProblem::hardy(3), 1 << k, 1.0, 1e-10);
    REQUIRE(sol.converged);
    CHECK(sol.value > 0.25);
    CHECK(sol.value < prev);
    prev = sol.value;
  }
}

TEST_CASE("radial: dense brute-force agreement at n = 128") {
  const auto mesh = build_interval_mesh(128, 1.0);
  for (const RadialProblem problem :
       {RadialProblem::hardy(3), RadialProblem::hardy(4), RadialProblem::hardy(5),
        RadialProblem::critical(3), RadialProblem::subcritical(3, 0.1)}) {
    auto [Q, B] = radial_assemble(problem, mesh);
    const EigSolution sol = smallest_genevp(Q, B, 1e-11, 50000);
    REQUIRE(sol.converged);
    CHECK(sol.value ==
          doctest::Approx(testing::dense_smallest_eig(Q, B)).epsilon(1e-10));
  }
}

TEST_CASE("radial_rate_study: level table and basic shape") {
  const auto pts = radial_rate_study(RadialProblem::hardy(3), {64, 128, 256});
  REQUIRE(pts.size() == 3);
  for (size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i].h == doctest::Approx(1.0 / pts[i].n_cells));
    CHECK(pts[i].dofs == pts[i].n_cells);
    CHECK(pts[i].value > 0.25);
    if (i > 0) CHECK(pts[i].value < pts[i - 1].value);
  }
  CHECK_THROWS_AS(radial_rate_study(RadialProblem::hardy(3), {64, 64}),
                  std::invalid_argument);
}

TEST_CASE("radial problem validation") {
  CHECK_THROWS_AS(validate(RadialProblem::hardy(2)), std::invalid_argument);
  CHECK_THROWS_AS(validate(RadialProblem::subcritical(3, 0.25)), std::invalid_argument);
  CHECK_THROWS_AS(validate(RadialProblem::subcritical(3, -0.01)), std::invalid_argument);
  CHECK_THROWS_AS(radial_assemble(RadialProblem::hardy(3), build_ball_mesh(0, BoundaryRule::projected)),
                  std::invalid_argument);
}

TEST_CASE("radial log-hardy pencil: decreasing toward 1/4 from above") {
  double prev = std::numeric_limits<double>::infinity();
  for (int k : {6, 8, 10}) {
    const EigSolution sol = radial_solve(RadialProblem::log_hardy(3), 1 << k, 1.0, 1e-10);
    REQUIRE(sol.converged);
    CHECK(sol.value >= 0.25 - 1e-9);
    CHECK(sol.value < prev);
    prev = sol.value;
  }
}

TEST_CASE("lifted radial functions: 3D energy approaches the weighted 1D energy") {
  // v(r) = 1 - r^2 lifted to the ball mesh by vertex interpolation; the 3D
  // Dirichlet energy of the lift tends to omega * int r^2 v'(r)^2 dr as the
  // angular resolution improves.
  auto v = [](double r) { return 1.0 - r * r; };
  const double exact =
      unit_sphere_area(3) *
      radial_integrate([](double r) { return 4.0 * r * r; }, 0.0, 1.0, 2.0, 1e-12);
  double prev_gap = std::numeric_limits<double>::infinity();
  for (int level : {1, 2, 3}) {
    const auto mesh = build_ball_mesh(level, BoundaryRule::projected);
    const SparseSym A = assemble_stiffness(mesh);
    const DofMap dofs = make_dof_map(mesh);
    Eigen::VectorXd x(dofs.n_dofs);
    for (int d = 0; d < dofs.n_dofs; ++d)
      x[d] = v(mesh.vertices[dofs.dof_to_vertex[d]].norm());
    const double energy = quadratic_form(A, x);
    const double gap = std::abs(energy / exact - 1.0);
    CHECK(gap < prev_gap);
    if (level == 3) CHECK(gap < 0.1);
    prev_gap = gap;
  }
}

TEST_CASE("grading: graded meshes refine toward the origin and solve correctly") {
  const EigSolution uniform = radial_solve(RadialProblem::hardy(3), 512, 1.0, 1e-10);
  const EigSolution graded = radial_solve(RadialProblem::hardy(3), 512, 2.0, 1e-10);
  REQUIRE(uniform.converged);
  REQUIRE(graded.converged);
  CHECK(graded.value > 0.25);
  // grading toward the singularity can only help the minimizing profile
  CHECK(graded.value < uniform.value);
}
