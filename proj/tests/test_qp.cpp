#include "platoon_mpc/qp.hpp"

#include <gtest/gtest.h>

#include "platoon_mpc/checks.hpp"
#include "platoon_mpc/costfn.hpp"
#include "platoon_mpc/dynamics.hpp"
#include "support.hpp"

using namespace platoon_mpc;
using test_support::Rng;

namespace {

/// Random strictly convex QP with a guaranteed-feasible region: constraints
/// are anchored at a random interior point, a share of them tight.
QpProblem random_feasible_qp(Rng& rng, Index n, Index m) {
  QpProblem p;
  p.hessian = rng.spd(n);
  p.linear = rng.vector(n, -2.0, 2.0);
  p.c_mat.resize(m, n);
  p.c_vec.resize(m);
  const Vec z0 = rng.vector(n, -1.0, 1.0);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) p.c_mat(i, j) = rng.uniform(-1.0, 1.0);
    const double slack = rng.uniform(0.0, 1.0) < 0.3 ? 0.0 : rng.uniform(0.05, 2.0);
    p.c_vec(i) = p.c_mat.row(i).dot(z0) + slack;
  }
  return p;
}

/// Largest KKT violation at (z, active_set): stationarity with least-squares
/// multipliers, dual feasibility and primal feasibility.
double kkt_violation(const QpProblem& p, const QpSolution& sol) {
  double worst = (p.c_mat.rows() > 0 && p.c_vec.size() > 0)
                     ? std::max(0.0, (p.c_mat * sol.z - p.c_vec).maxCoeff())
                     : 0.0;
  const Vec grad = p.hessian * sol.z + p.linear;
  if (sol.active_set.empty()) return std::max(worst, grad.cwiseAbs().maxCoeff());

  Mat active(static_cast<Index>(sol.active_set.size()), p.n());
  for (size_t i = 0; i < sol.active_set.size(); ++i)
    active.row(static_cast<Index>(i)) = p.c_mat.row(sol.active_set[i]);
  const Vec mu = (active * active.transpose())
                     .ldlt()
                     .solve(active * (-grad));
  worst = std::max(worst, (grad + active.transpose() * mu).cwiseAbs().maxCoeff());
  worst = std::max(worst, std::max(0.0, -mu.minCoeff()));
  return worst;
}

} // namespace

TEST(SolveQp, UnconstrainedReturnsNewtonPoint) {
  Rng rng(3);
  const Index n = 4;
  QpProblem p;
  p.hessian = rng.spd(n);
  p.linear = rng.vector(n, -2.0, 2.0);
  p.c_mat.resize(0, n);
  p.c_vec.resize(0);

  const QpSolution sol = solve_qp(p);
  EXPECT_EQ(sol.status, QpStatus::optimal);
  EXPECT_TRUE(sol.active_set.empty());
  const Vec expected = -p.hessian.llt().solve(p.linear);
  EXPECT_LE((sol.z - expected).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SolveQp, SatisfiesKktConditionsOnRandomProblems) {
  Rng rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const Index n = rng.integer(1, 6);
    const Index m = rng.integer(0, 10);
    const QpProblem p = random_feasible_qp(rng, n, m);
    const QpSolution sol = solve_qp(p);
    ASSERT_EQ(sol.status, QpStatus::optimal) << "trial " << trial;
    EXPECT_LE(kkt_violation(p, sol), 1e-6) << "trial " << trial;
  }
}

TEST(SolveQp, MatchesEnumerationOracle) {
  Rng rng(7);
  for (int trial = 0; trial < 80; ++trial) {
    const Index n = rng.integer(1, 5);
    const Index m = rng.integer(0, 9);
    const QpProblem p = random_feasible_qp(rng, n, m);
    const QpSolution sol = solve_qp(p);
    const EnumeratedQp oracle = solve_qp_by_enumeration(p);
    ASSERT_TRUE(oracle.feasible);
    ASSERT_EQ(sol.status, QpStatus::optimal);
    EXPECT_LE((sol.z - oracle.z).norm(), 1e-7) << "trial " << trial;
    EXPECT_LE(std::abs(sol.objective - oracle.objective), 1e-9) << "trial " << trial;
  }
}

TEST(SolveQp, DetectsInfeasibleConstraints) {
  QpProblem p;
  p.hessian = Mat::Identity(2, 2);
  p.linear = Vec::Zero(2);
  p.c_mat.resize(2, 2);
  p.c_vec.resize(2);
  p.c_mat << 1, 0, -1, 0; // z0 <= -1 and -z0 <= -1: contradiction
  p.c_vec << -1, -1;

  const QpSolution sol = solve_qp(p);
  EXPECT_EQ(sol.status, QpStatus::infeasible);
  const EnumeratedQp oracle = solve_qp_by_enumeration(p);
  EXPECT_FALSE(oracle.feasible);
}

TEST(SolveQp, WarmStartReproducesColdSolution) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const QpProblem p = random_feasible_qp(rng, 4, 8);
    const QpSolution cold = solve_qp(p);
    ASSERT_EQ(cold.status, QpStatus::optimal);

    QpWarmStart warm;
    warm.z = cold.z;
    warm.active_set = cold.active_set;
    const QpSolution hot = solve_qp(p, {}, warm);
    ASSERT_EQ(hot.status, QpStatus::optimal);
    EXPECT_LE((hot.z - cold.z).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(hot.iterations, cold.iterations);
  }
}

TEST(SolveQp, ToleratesDuplicatedRows) {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    QpProblem p = random_feasible_qp(rng, 3, 5);
    // Duplicate every row: any active constraint now has a linearly
    // dependent twin the working-set management must reject.
    QpProblem doubled = p;
    doubled.c_mat.resize(10, 3);
    doubled.c_vec.resize(10);
    doubled.c_mat << p.c_mat, p.c_mat;
    doubled.c_vec << p.c_vec, p.c_vec;

    const QpSolution base = solve_qp(p);
    const QpSolution dup = solve_qp(doubled);
    ASSERT_EQ(base.status, QpStatus::optimal);
    ASSERT_EQ(dup.status, QpStatus::optimal);
    EXPECT_LE((base.z - dup.z).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(SolveQp, ReportsIterationCapAsStatusNotThrow) {
  Rng rng(17);
  const QpProblem p = random_feasible_qp(rng, 5, 10);
  QpOptions opt;
  opt.max_iter_factor = 0; // zero-iteration budget
  const QpSolution sol = solve_qp(p, opt);
  EXPECT_EQ(sol.status, QpStatus::max_iterations);
}

TEST(SolveQp, RejectsBadHessians) {
  QpProblem p;
  p.hessian.resize(2, 2);
  p.hessian << 1.0, 0.5, -0.5, 1.0; // asymmetric
  p.linear = Vec::Zero(2);
  p.c_mat.resize(0, 2);
  p.c_vec.resize(0);
  EXPECT_THROW(solve_qp(p), InvalidInput);

  p.hessian << 1.0, 2.0, 2.0, 1.0; // symmetric indefinite
  EXPECT_THROW(solve_qp(p), InvalidInput);
}

TEST(EqualityKkt, SolvesStationarityAndConstraints) {
  Rng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = rng.integer(2, 6);
    const Index k = rng.integer(1, n);
    const Mat h = rng.spd(n);
    const Vec f = rng.vector(n, -2.0, 2.0);
    Mat c(k, n);
    for (Index i = 0; i < k; ++i)
      for (Index j = 0; j < n; ++j) c(i, j) = rng.uniform(-1.0, 1.0);
    const Vec rhs = rng.vector(k, -1.0, 1.0);

    const KktSolution sol = solve_equality_kkt(h, f, c, rhs);
    EXPECT_LE((c * sol.z - rhs).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((h * sol.z + f + c.transpose() * sol.mu).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(EqualityKkt, RejectsRankDeficientRows) {
  const Mat h = Mat::Identity(3, 3);
  const Vec f = Vec::Zero(3);
  Mat c(2, 3);
  c << 1, 0, 0, 1, 0, 0; // duplicated row
  Vec rhs(2);
  rhs << 1, 1;
  EXPECT_THROW(solve_equality_kkt(h, f, c, rhs), NumericalError);
}

TEST(SolveDare, ScalarMatchesClosedFormRoot) {
  // a=0.5, b=1, q=r=1 reduces the fixed-point equation to
  // 4p^2 - p - 4 = 0, whose positive root is (1 + sqrt(65)) / 8.
  Mat a(1, 1), b(1, 1), q(1, 1), r(1, 1);
  a << 0.5;
  b << 1.0;
  q << 1.0;
  r << 1.0;
  const DareSolution sol = solve_dare(a, b, q, r);
  const double expected = (1.0 + std::sqrt(65.0)) / 8.0;
  EXPECT_NEAR(sol.p(0, 0), expected, 1e-12);
  EXPECT_LE(sol.residual, 1e-12);
}

TEST(SolveDare, NoInputReducesToLyapunovSeries) {
  // With b = 0 the recursion is p <- a' p a + q; for |a| < 1 the scalar limit
  // is q / (1 - a^2).
  Mat a(1, 1), b(1, 1), q(1, 1), r(1, 1);
  a << 0.8;
  b << 0.0;
  q << 1.0;
  r << 1.0;
  const DareSolution sol = solve_dare(a, b, q, r);
  EXPECT_NEAR(sol.p(0, 0), 1.0 / 0.36, 1e-8);
}

TEST(SolveDare, HighwayPlatoonConfigurationConverges) {
  const auto vehicles = test_support::highway_vehicles();
  const auto headways = test_support::headways_of(vehicles);
  const PlatoonModel model = build_platoon_model(vehicles, 0.5);
  const Mat q = stage_penalty({1, 1, 1, 1, 2}, headways);
  const Mat r = 2.0 * Mat::Identity(model.m, model.m);

  const DareSolution sol = solve_dare(model.a_m, model.b_m, q, r);
  EXPECT_LE(sol.residual, 1e-8);
  EXPECT_LE((sol.p - sol.p.transpose()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(SolveDare, ThrowsWhenIterationBudgetTooSmall) {
  Mat a(1, 1), b(1, 1), q(1, 1), r(1, 1);
  a << 0.99;
  b << 0.01;
  q << 1.0;
  r << 1.0;
  DareOptions opt;
  opt.max_iter = 2;
  EXPECT_THROW(solve_dare(a, b, q, r, opt), NumericalError);
}

TEST(SolveDare, RejectsDimensionMismatches) {
  EXPECT_THROW(solve_dare(Mat::Identity(2, 3), Mat::Identity(2, 1),
                          Mat::Identity(2, 2), Mat::Identity(1, 1)),
               InvalidParameter);
  EXPECT_THROW(solve_dare(Mat::Identity(2, 2), Mat::Identity(2, 1),
                          Mat::Identity(3, 3), Mat::Identity(1, 1)),
               InvalidParameter);
}
