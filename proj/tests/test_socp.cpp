#include <gtest/gtest.h>

#include <random>

#include "bijmap/socp.hpp"

using namespace bijmap;

namespace {

bool usable(const SolveResult& r) { return r.status == SolveStatus::optimal; }

}  // namespace

TEST(ConeProgram, VariablesAndValidation) {
  ConeProgram p;
  EXPECT_EQ(p.add_variable("a"), 0);
  EXPECT_EQ(p.add_variables("x", 3), 1);
  EXPECT_EQ(p.variable("x[2]"), 3);
  EXPECT_EQ(p.variable_name(1), "x[0]");
  EXPECT_THROW(p.add_variable("a"), InputError);
  EXPECT_THROW(p.variable("nope"), InputError);
  p.add_cone({AffineExpr::var(7)}, AffineExpr(1.0));
  EXPECT_THROW(p.validate(), InputError);
}

TEST(ConeProgram, MaxViolation) {
  ConeProgram p;
  const int x = p.add_variable("x"), y = p.add_variable("y");
  p.add_cone({AffineExpr::var(x), AffineExpr::var(y)}, AffineExpr(1.0));
  p.add_equality(AffineExpr::var(x) - AffineExpr(0.5));
  EXPECT_NEAR(p.max_violation(Eigen::Vector2d(0.5, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(p.max_violation(Eigen::Vector2d(3.0, 4.0)), 4.0, 1e-15);
}

TEST(Socp, BallAnalyticOptimum) {
  // min c.x s.t. |x - 0.5| <= 2 has optimum 0.5 sum(c) - 2 |c|
  std::mt19937 rng(41);
  std::normal_distribution<double> N;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 6;
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) c(i) = N(rng);
    ConeProgram p;
    const int x0 = p.add_variables("x", n);
    std::vector<AffineExpr> v;
    AffineExpr obj;
    for (int i = 0; i < n; ++i) {
      v.push_back(AffineExpr::var(x0 + i) - AffineExpr(0.5));
      obj += c(i) * AffineExpr::var(x0 + i);
    }
    p.add_cone(v, AffineExpr(2.0));
    p.set_objective(obj);
    const SolveResult r = solve(p);
    ASSERT_TRUE(usable(r)) << to_string(r.status);
    const double want = 0.5 * c.sum() - 2 * c.norm();
    EXPECT_NEAR(r.primal_objective, want, 1e-6 * std::max(1.0, std::abs(want)));
    const Eigen::VectorXd xs = Eigen::VectorXd::Constant(n, 0.5) - 2 * c / c.norm();
    EXPECT_LT((r.x - xs).norm(), 1e-5);
  }
}

TEST(Socp, LinearProgramWithEquality) {
  // min x + y s.t. x + 2y = 2, x >= 0, y >= 0: optimum (0, 1)
  ConeProgram p;
  const int x = p.add_variable("x"), y = p.add_variable("y");
  p.add_equality(AffineExpr::var(x) + 2.0 * AffineExpr::var(y) - AffineExpr(2.0));
  p.add_nonnegative(AffineExpr::var(x));
  p.add_nonnegative(AffineExpr::var(y));
  p.set_objective(AffineExpr::var(x) + AffineExpr::var(y));
  const SolveResult r = solve(p);
  ASSERT_TRUE(usable(r));
  EXPECT_NEAR(r.x(x), 0.0, 1e-6);
  EXPECT_NEAR(r.x(y), 1.0, 1e-6);
  EXPECT_NEAR(r.primal_objective, 1.0, 1e-7);
}

TEST(Socp, EpigraphOfDistance) {
  // min s s.t. |(x - 3, y + 1, 1)| <= s: optimum s = 1 at (3, -1)
  ConeProgram p;
  const int x = p.add_variable("x"), y = p.add_variable("y"), s = p.add_variable("s");
  p.add_cone({AffineExpr::var(x) - AffineExpr(3.0), AffineExpr::var(y) + AffineExpr(1.0), AffineExpr(1.0)},
             AffineExpr::var(s));
  p.set_objective(AffineExpr::var(s));
  const SolveResult r = solve(p);
  ASSERT_TRUE(usable(r));
  EXPECT_NEAR(r.x(s), 1.0, 1e-6);
  EXPECT_NEAR(r.x(x), 3.0, 1e-3);
  EXPECT_NEAR(r.x(y), -1.0, 1e-3);
}

TEST(Socp, SeveralConesAgreeWithProjection) {
  // min |x - p| over the intersection of two unit balls centred at (0,0) and (1,0):
  // for p = (0.5, 3) the answer is the top intersection point (0.5, sqrt(3)/2)
  ConeProgram prog;
  const int x = prog.add_variable("x"), y = prog.add_variable("y"), s = prog.add_variable("s");
  prog.add_cone({AffineExpr::var(x), AffineExpr::var(y)}, AffineExpr(1.0));
  prog.add_cone({AffineExpr::var(x) - AffineExpr(1.0), AffineExpr::var(y)}, AffineExpr(1.0));
  prog.add_cone({AffineExpr::var(x) - AffineExpr(0.5), AffineExpr::var(y) - AffineExpr(3.0)}, AffineExpr::var(s));
  prog.set_objective(AffineExpr::var(s));
  const SolveResult r = solve(prog);
  ASSERT_TRUE(usable(r));
  EXPECT_NEAR(r.x(x), 0.5, 1e-5);
  EXPECT_NEAR(r.x(y), std::sqrt(3.0) / 2, 1e-5);
  EXPECT_NEAR(r.x(s), 3.0 - std::sqrt(3.0) / 2, 1e-6);
}

TEST(Socp, LargeConeAndManySmallCones) {
  // min sum x_i s.t. |x|_2 <= 1 (one big cone) and x_i >= -0.5: optimum is -sqrt(n) capped by the bounds
  const int n = 40;
  ConeProgram p;
  const int x0 = p.add_variables("x", n);
  std::vector<AffineExpr> v;
  AffineExpr obj;
  for (int i = 0; i < n; ++i) {
    v.push_back(AffineExpr::var(x0 + i));
    obj += AffineExpr::var(x0 + i);
    p.add_nonnegative(AffineExpr::var(x0 + i) + AffineExpr(0.5));
  }
  p.add_cone(v, AffineExpr(1.0));
  p.set_objective(obj);
  const SolveResult r = solve(p);
  ASSERT_TRUE(usable(r));
  // with n = 40 the ball is the binding constraint: x_i = -1/sqrt(n) > -0.5
  EXPECT_NEAR(r.primal_objective, -std::sqrt(double(n)), 1e-6);
}
