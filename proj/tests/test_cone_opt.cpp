#include <gtest/gtest.h>

#include <random>

#include "bijmap/certify.hpp"
#include "bijmap/cone_opt.hpp"
#include "bijmap/fixtures.hpp"
#include "oracles.hpp"

using namespace bijmap;

namespace {

Eigen::Matrix2d rotation(double th) {
  Eigen::Matrix2d R;
  R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  return R;
}

JacobianExpr constant(const Eigen::Matrix2d& A) { return {A(0, 0), A(0, 1), A(1, 0), A(1, 1)}; }

/// scalar - |vec| of a constraint with constant entries
double constraint_slack(const SocConstraint& c) {
  const Eigen::VectorXd none;
  double n2 = 0;
  for (const auto& e : c.vec) n2 += std::pow(e.eval(none), 2);
  return c.scalar.eval(none) - std::sqrt(n2);
}

struct Solved {
  fixtures::Instance in;
  BDParams params;
  SolveTrace feas;
};

Solved feasibility(const fixtures::Instance& in, double K = 15) {
  const BoundaryAssignment A(*in.mesh, in.polygon, in.assignment);
  const BDParams p = BDParams::make(K, in.mesh->num_faces(), 1e-9 * in.polygon.diameter());
  return {in, p, feasibility_phase(in.mesh, in.polygon, A, p)};
}

}  // namespace

TEST(MuFromK, Values) {
  EXPECT_DOUBLE_EQ(mu_from_K(15), 0.875);
  EXPECT_DOUBLE_EQ(mu_from_K(5), 2.0 / 3.0);
  EXPECT_LT(mu_from_K(1 + 1e-9), 1e-9);
  EXPECT_THROW(mu_from_K(1.0), ParameterError);
  EXPECT_THROW(mu_from_K(0.5), ParameterError);
}

TEST(ClosestRotation, Examples) {
  EXPECT_LT((closest_rotation(Eigen::Matrix2d::Identity()) - Eigen::Matrix2d::Identity()).norm(), 1e-15);
  Eigen::Matrix2d B;
  B << 0, -2, 2, 0;
  Eigen::Matrix2d R;
  R << 0, -1, 1, 0;
  EXPECT_LT((closest_rotation(B) - R).norm(), 1e-15);
  for (double th : {0.3, -2.0, 3.0}) {
    EXPECT_LT((closest_rotation(3.0 * rotation(th)) - rotation(th)).norm(), 1e-14);
  }
  EXPECT_THROW(closest_rotation(Eigen::Matrix2d::Zero()), DegenerateFrameError);
}

TEST(BDConstraint, RotationIsStrictlyFeasible) {
  const double mu = 0.875;
  for (double th : {0.0, 0.7, -2.5}) {
    const Eigen::Matrix2d R = rotation(th);
    const auto c = bd_constraint(0, constant(R), R, mu, 1e-9);
    EXPECT_NEAR(constraint_slack(c), mu * std::sqrt(2.0) - 1e-9, 1e-12);
    EXPECT_EQ(c.label, "bd[0]");
  }
}

TEST(BDConstraint, StretchByTwo) {
  Eigen::Matrix2d A;
  A << 2, 0, 0, 1;
  const auto c = bd_constraint(3, constant(A), Eigen::Matrix2d::Identity(), 0.875, 0.0);
  double n2 = 0;
  for (const auto& e : c.vec) n2 += std::pow(e.eval(Eigen::VectorXd()), 2);
  EXPECT_NEAR(std::sqrt(n2), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(c.scalar.eval(Eigen::VectorXd()), 0.875 * 3 / std::sqrt(2.0), 1e-15);
  EXPECT_GT(constraint_slack(c), 0);
  EXPECT_NEAR(bd_slack(A, Eigen::Matrix2d::Identity(), 0.875), constraint_slack(c), 1e-15);
}

TEST(BDConstraint, StretchByTwentyViolatesK15) {
  Eigen::Matrix2d A;
  A << 20, 0, 0, 1;
  const auto c = bd_constraint(0, constant(A), Eigen::Matrix2d::Identity(), mu_from_K(15), 0.0);
  // |C| = 9.5 sqrt(2) = 13.435, rhs = 0.875 * 21 / sqrt(2) = 12.99
  EXPECT_NEAR(constraint_slack(c), 0.875 * 21 / std::sqrt(2.0) - 9.5 * std::sqrt(2.0), 1e-12);
  EXPECT_LT(constraint_slack(c), 0);
}

TEST(BDConstraint, TimesVariableAddsSlack) {
  ConeProgram p;
  const int t = p.add_variable("t");
  Eigen::Matrix2d A;
  A << 20, 0, 0, 1;
  const auto c = bd_constraint(0, constant(A), Eigen::Matrix2d::Identity(), 0.875, 0.0, t);
  Eigen::VectorXd x(1);
  x << 0.5;
  double n2 = 0;
  for (const auto& e : c.vec) n2 += std::pow(e.eval(x), 2);
  EXPECT_NEAR(c.scalar.eval(x) - std::sqrt(n2), bd_slack(A, Eigen::Matrix2d::Identity(), 0.875) + 0.5, 1e-12);
}

TEST(BDConstraintProperty, ConeImpliesPositiveDeterminantAndBoundedCondition) {
  std::mt19937 rng(51);
  std::uniform_real_distribution<double> U(-2, 2);
  int inside = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    Eigen::Matrix2d A;
    A << U(rng), U(rng), U(rng), U(rng);
    const double K = 1.5 + 20 * (trial % 7) / 7.0;
    const double mu = mu_from_K(K);
    const Eigen::Matrix2d R = rotation(U(rng) * 2);
    if (bd_slack(A, R, mu) <= 0) continue;
    ++inside;
    const auto [s1, s2] = oracle::singular_values(A);
    EXPECT_GT(A.determinant(), 0);
    EXPECT_LE(s1 / s2, K * (1 + 1e-9));
  }
  EXPECT_GT(inside, 500);
}

TEST(BDConstraintProperty, ScaledRotationsStayFeasible) {
  for (double th : {0.0, 1.0, -2.0}) {
    for (double s : {0.01, 1.0, 100.0}) {
      const Eigen::Matrix2d R = rotation(th);
      EXPECT_GT(bd_slack(s * R, R, 0.875), 0);
      EXPECT_NEAR(bd_slack(s * R, R, 0.875), s * 0.875 * std::sqrt(2.0), 1e-12 * s);
    }
  }
}

TEST(BDParams, Validation) {
  BDParams p = BDParams::make(15, 3, 0.0);
  EXPECT_NO_THROW(p.validate(3));
  EXPECT_THROW(p.validate(4), ParameterError);
  p.rotations[1] << 1, 0, 0, -1;
  EXPECT_THROW(p.validate(3), ParameterError);
}

TEST(Feasibility, GridDiskToSquareFirstSolve) {
  const Solved s = feasibility(fixtures::disk_to_square(5));
  ASSERT_TRUE(s.feas.success) << s.feas.message;
  EXPECT_EQ(s.feas.outer_iterations(), 1);
  EXPECT_LT(s.feas.iterations.back().value, 0);
  for (double d : orientation_report(*s.feas.final_map).determinants) EXPECT_GT(d, 0);
}

TEST(Feasibility, LShapeWithinThreeOuterIterations) {
  const Solved s = feasibility(fixtures::l_to_l(3));
  ASSERT_TRUE(s.feas.success) << s.feas.message;
  EXPECT_LE(s.feas.outer_iterations(), 3);
  const BoundaryAssignment A(*s.in.mesh, s.in.polygon, s.in.assignment);
  EXPECT_TRUE(certify_T2(*s.feas.final_map, s.in.polygon, A).certified());
}

TEST(Feasibility, TooTightBoundStallsAndReports) {
  // the L-to-L stretch is not reachable with near-similarities; the loop stops once t stops dropping
  const Solved s = feasibility(fixtures::l_to_l(2), 1.05);
  EXPECT_FALSE(s.feas.success);
  EXPECT_LT(s.feas.outer_iterations(), 10);
  EXPECT_NE(s.feas.message.find("stalled"), std::string::npos) << s.feas.message;
  for (const auto& e : s.feas.iterations) EXPECT_GT(e.value, 0);
  ASSERT_TRUE(s.feas.final_map);
  const Solved loose = feasibility(fixtures::l_to_l(2), 2.0);
  EXPECT_TRUE(loose.feas.success);
}

TEST(Feasibility, InfeasibleAssignmentIsAPrecondition) {
  auto in = fixtures::disk_to_square(3);
  std::vector<int> a(in.assignment.size(), 0);
  a.back() = 3;
  const BoundaryAssignment A(*in.mesh, in.polygon, a);
  EXPECT_THROW(feasibility_phase(in.mesh, in.polygon, A, BDParams::make(15, in.mesh->num_faces(), 0)),
               PreconditionError);
}

TEST(Energy, IdentityOnSquareIsAlreadyOptimal) {
  auto m = fixtures::grid_square(4);
  const Polytope2 sq = fixtures::unit_square();
  const BoundaryAssignment A(*m, sq, fixtures::grid_square_assignment(*m, 4));
  const BDParams p = BDParams::make(15, m->num_faces(), 1e-9);
  const SimplicialMap id(m, m->vertices());
  const SolveTrace t = energy_phase(m, sq, A, p, id);
  ASSERT_TRUE(t.success) << t.message;
  EXPECT_EQ(t.outer_iterations(), 1);
  EXPECT_NEAR(dirichlet_energy(*t.final_map), 2.0, 1e-6);
}

TEST(Energy, MonotoneTraceAndCertifiedResult) {
  const Solved s = feasibility(fixtures::l_to_l(3));
  ASSERT_TRUE(s.feas.success);
  const BoundaryAssignment A(*s.in.mesh, s.in.polygon, s.in.assignment);
  BDParams p = s.params;
  p.rotations = s.feas.rotations;
  const SolveTrace t = energy_phase(s.in.mesh, s.in.polygon, A, p, *s.feas.final_map);
  ASSERT_TRUE(t.success) << t.message;
  EXPECT_LE(t.outer_iterations(), 5);
  double prev = dirichlet_energy(*s.feas.final_map);
  for (const auto& e : t.iterations) {
    EXPECT_EQ(e.solver_status, SolveStatus::optimal);
    if (!e.accepted) continue;
    EXPECT_LE(e.value, prev);
    prev = e.value;
  }
  const Certificate c = certify_T2(*t.final_map, s.in.polygon, A);
  EXPECT_TRUE(c.certified()) << describe(c);
  for (int j = 0; j < s.in.mesh->num_faces(); ++j) {
    const Eigen::Matrix2d J = face_affine_map(*t.final_map, j).linear_part;
    EXPECT_GT(J.determinant(), 0);
    EXPECT_LE(condition_number(J), 15 * (1 + 1e-6));
  }
}

TEST(Energy, NeedsStrictlyFeasibleStart) {
  auto m = fixtures::grid_square(2);
  const Polytope2 sq = fixtures::unit_square();
  const BoundaryAssignment A(*m, sq, fixtures::grid_square_assignment(*m, 2));
  Eigen::MatrixXd u = m->vertices();
  u.col(1) *= -1;
  EXPECT_THROW(energy_phase(m, sq, A, BDParams::make(15, m->num_faces(), 0), SimplicialMap(m, u)),
               PreconditionError);
}

TEST(FixedBoundary, UniformPlacementIsCertifiedByT1) {
  const auto in = fixtures::disk_to_square(5);
  const BoundaryAssignment A(*in.mesh, in.polygon, in.assignment);
  const auto pos = uniform_boundary_positions(*in.mesh, in.polygon, A);
  const FixedBoundaryResult r = fixed_boundary_variant(in.mesh, in.polygon, pos);
  ASSERT_TRUE(r.feasibility.success);
  ASSERT_TRUE(r.energy.success);
  const Certificate c = certify_T1(*r.energy.final_map, in.polygon);
  EXPECT_TRUE(c.certified()) << describe(c);
  const auto& loop = A.loop();
  for (std::size_t i = 0; i < loop.size(); ++i) {
    EXPECT_LT((r.energy.final_map->image(loop[i]) - Eigen::VectorXd(pos[i])).norm(), 1e-12);
  }
}

TEST(FixedBoundary, CrossedPlacementIsAnInputError) {
  const auto in = fixtures::disk_to_square(4);
  const BoundaryAssignment A(*in.mesh, in.polygon, in.assignment);
  auto pos = uniform_boundary_positions(*in.mesh, in.polygon, A);
  std::swap(pos[1], pos[2]);
  EXPECT_THROW(fixed_boundary_variant(in.mesh, in.polygon, pos), InputError);
}

TEST(FixedBoundary, FreeBoundaryEnergyIsNoLarger) {
  const auto in = fixtures::disk_to_square(5);
  const BoundaryAssignment A(*in.mesh, in.polygon, in.assignment);
  const Solved s = feasibility(in);
  BDParams p = s.params;
  p.rotations = s.feas.rotations;
  const SolveTrace free_run = energy_phase(in.mesh, in.polygon, A, p, *s.feas.final_map);
  const FixedBoundaryResult fixed =
      fixed_boundary_variant(in.mesh, in.polygon, uniform_boundary_positions(*in.mesh, in.polygon, A));
  ASSERT_TRUE(free_run.success && fixed.energy.success);
  EXPECT_LE(dirichlet_energy(*free_run.final_map), dirichlet_energy(*fixed.energy.final_map) + 1e-9);
}

TEST(UniformPositions, ArcLengthSpacing) {
  const auto in = fixtures::l_to_l(2);
  const BoundaryAssignment A(*in.mesh, in.polygon, in.assignment);
  const auto pos = uniform_boundary_positions(*in.mesh, in.polygon, A);
  // run lengths 4,2,2,2,2,4 on edges of length 3,1,2,1.5,1,2.5
  EXPECT_LT((pos[1] - Eigen::Vector2d(0.75, 0)).norm(), 1e-15);
  EXPECT_LT((pos[5] - Eigen::Vector2d(3, 0.5)).norm(), 1e-15);
  EXPECT_TRUE(boundary_placement_bijective(in.polygon, pos, 1e-12));
}
