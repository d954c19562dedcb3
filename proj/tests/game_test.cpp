#include <gtest/gtest.h>

#include "support.hpp"

namespace qgame {
namespace {

using testing::random_psd;
using testing::random_psd_game;
using testing::relative_gap;

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }
Vector vec1(double v) { return Vector::Constant(1, v); }

PartitionedQuadratic unit_game(double d1 = 0.0, double d2 = 0.0) {
  return {scalar(1), scalar(1), scalar(1), vec1(d1), vec1(d2)};
}

TEST(Saddle, BilinearExample) {
  const PartitionedQuadratic pq(scalar(0), scalar(1), scalar(0), vec1(2.0), vec1(-3.0));
  const auto s = solve_saddle(pq);
  ASSERT_TRUE(s);
  EXPECT_NEAR(s->u_star()(0), 3.0, 1e-12);
  EXPECT_NEAR(s->w_star()(0), -2.0, 1e-12);
  EXPECT_NEAR(s->value, 6.0, 1e-12);
  EXPECT_TRUE(verify_saddle(pq, s->u_star(), s->w_star(), 1000, 1));
  EXPECT_FALSE(verify_saddle(pq, s->u_star() + vec1(1.0), s->w_star(), 1000, 1));
}

TEST(Saddle, DecoupledExamples) {
  const auto a = solve_saddle({Matrix::Identity(2, 2), Matrix::Zero(2, 2), -Matrix::Identity(2, 2)});
  ASSERT_TRUE(a);
  EXPECT_TRUE(a->joint.particular.isZero(1e-15));
  EXPECT_EQ(a->value, 0.0);

  const auto b = solve_saddle({scalar(1), scalar(0), scalar(-1), vec1(1), vec1(1)});
  ASSERT_TRUE(b);
  EXPECT_NEAR(b->u_star()(0), -1.0, 1e-15);
  EXPECT_NEAR(b->w_star()(0), 1.0, 1e-15);
  EXPECT_NEAR(b->value, 0.0, 1e-15);  // -1/2 + 1/2
}

TEST(Saddle, ZeroGameAcceptsAnyPoint) {
  const PartitionedQuadratic pq(Matrix::Zero(2, 2), Matrix::Zero(2, 1), Matrix::Zero(1, 1));
  EXPECT_TRUE(verify_saddle(pq, Vector{{3.0, -1.0}}, vec1(7.0), 200, 3));
}

TEST(Saddle, SignConditionsAreEnforced) {
  EXPECT_THROW(solve_saddle({scalar(-1), scalar(0), scalar(-1)}), PreconditionError);
  EXPECT_THROW(solve_saddle({scalar(1), scalar(0), scalar(1)}), PreconditionError);
}

TEST(Saddle, NoSolutionWhenLinearTermLeavesTheRange) {
  const PartitionedQuadratic pq(Matrix{{1.0, 0.0}, {0.0, 0.0}}, Matrix::Zero(2, 1), scalar(-1),
                                Vector{{0.0, 1.0}}, vec1(0.0));
  EXPECT_FALSE(solve_saddle(pq));
}

// M11 >= 0, M22 <= 0, with d in R(M) by construction.
PartitionedQuadratic random_convex_concave(CounterRng& rng, Index m, Index n) {
  const Matrix m11 = random_psd(rng, m);
  const Matrix m22 = -random_psd(rng, n);
  const Matrix m12 = rng.normal_matrix(m, n);
  const Matrix full = assemble(m11, m12, m22);
  const Vector d = full * rng.normal_vector(m + n);
  return {m11, m12, m22, d.head(m), d.tail(n)};
}

TEST(Saddle, RandomInstancesAreStationaryAndVerified) {
  CounterRng rng(66);
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = 1 + static_cast<Index>(rng.next_u64() % 3);
    const Index n = 1 + static_cast<Index>(rng.next_u64() % 3);
    const PartitionedQuadratic pq = random_convex_concave(rng, m, n);
    const auto s = solve_saddle(pq);
    ASSERT_TRUE(s);
    const Vector z = s->joint.particular;
    const double scale = 1.0 + pq.linear_term().norm();
    EXPECT_LE((pq.assembled() * z + pq.linear_term()).norm(), 1e-8 * scale);
    EXPECT_NEAR(pq.value(s->u_star(), s->w_star()), s->value, 1e-8 * (1.0 + std::abs(s->value)));
    // w* lies in the response set of u*.
    EXPECT_LE((pq.m22() * s->w_star() + pq.m12().transpose() * s->u_star() + pq.d2()).norm(),
              1e-8 * scale);
    EXPECT_TRUE(verify_saddle(pq, s->u_star(), s->w_star(), 200, 1000 + trial));
  }
}

TEST(Saddle, NestedBoxSearchReproducesTheValue) {
  CounterRng rng(77);
  OracleConfig cfg;
  cfg.grid_points = 400;
  for (Index dim = 1; dim <= 2; ++dim) {
    for (int trial = 0; trial < 50; ++trial) {
      const PartitionedQuadratic pq = random_convex_concave(rng, dim, dim);
      const auto s = solve_saddle(pq);
      ASSERT_TRUE(s);
      const double grid = box_minmax(pq, cfg, Direction::MinMax);
      EXPECT_NEAR(grid, s->value, 2e-2) << "dim " << dim << " trial " << trial;
    }
  }
}

TEST(Lagrangian, MinmaxExamples) {
  const LambdaSolve a = minmax_at_lambda(unit_game(), 1.0);
  ASSERT_TRUE(a.finite());
  EXPECT_NEAR(a.value(), 0.5, 1e-12);

  EXPECT_EQ(minmax_at_lambda(unit_game(), 0.5).status, LambdaStatus::Infinite);

  const PartitionedQuadratic sep(scalar(1), scalar(0), scalar(0), vec1(1), vec1(2));
  const LambdaSolve c = minmax_at_lambda(sep, 2.0);
  ASSERT_TRUE(c.finite());
  EXPECT_NEAR(c.value(), 1.5, 1e-12);
}

TEST(Lagrangian, HomogeneousValueIsHalfLambdaAtTheThreshold) {
  CounterRng rng(88);
  for (int trial = 0; trial < 50; ++trial) {
    const PartitionedQuadratic pq = random_psd_game(rng, 2, 2, false);
    const double up = minmax_threshold(pq);
    const double down = maxmin_threshold(pq);
    const LambdaSolve a = minmax_at_lambda(pq, up);
    const LambdaSolve b = maxmin_at_lambda(pq, down);
    ASSERT_TRUE(a.finite());
    ASSERT_TRUE(b.finite());
    EXPECT_NEAR(a.value(), 0.5 * up, 1e-12 * (1.0 + up));
    EXPECT_NEAR(b.value(), 0.5 * down, 1e-12 * (1.0 + down));
    // The u-set at the threshold is N(S22(lambda)) for d = 0.
    const Matrix s22 = schur_complements(pq.m11(), pq.m12(), pq.m22(), up).schur22;
    EXPECT_LE((s22 * a.optimum->u_set.particular).norm(), 1e-9);
  }
}

TEST(Lagrangian, MaxminExamples) {
  const LambdaSolve a = maxmin_at_lambda(unit_game(), 0.5);
  ASSERT_TRUE(a.finite());
  EXPECT_NEAR(a.value(), 0.25, 1e-12);
  EXPECT_EQ(maxmin_at_lambda(unit_game(), -0.1).status, LambdaStatus::Infinite);
}

TEST(Lagrangian, RequiresPsdGame) {
  const PartitionedQuadratic bad(Matrix{{1.0, 0.0}, {0.0, 0.0}}, Matrix::Identity(2, 2),
                                 Matrix::Identity(2, 2));
  EXPECT_THROW(minmax_at_lambda(bad, 2.0), PreconditionError);
  EXPECT_THROW(maxmin_at_lambda(bad, 2.0), PreconditionError);
}

TEST(Lagrangian, UnboundedBelowWhenD1LeavesRangeOfM11) {
  const PartitionedQuadratic pq(Matrix{{1.0, 0.0}, {0.0, 0.0}}, Matrix::Zero(2, 1), scalar(1),
                                Vector{{0.0, 1.0}}, vec1(0.0));
  EXPECT_EQ(minmax_at_lambda(pq, 2.0).status, LambdaStatus::UnboundedBelow);
  EXPECT_EQ(maxmin_at_lambda(pq, 2.0).status, LambdaStatus::UnboundedBelow);
}

TEST(Duality, Examples) {
  const DualityReport a = duality_report(unit_game(), 1.5);
  EXPECT_EQ(a.kind, DualityKind::StrongDuality);
  EXPECT_NEAR(*a.value, 0.75, 1e-12);
  EXPECT_EQ(duality_report(unit_game(), 0.5).kind, DualityKind::InfiniteGap);
  EXPECT_EQ(duality_report(unit_game(), -1.0).kind, DualityKind::BothInfinite);
}

TEST(Duality, WeakAndStrongDualityOnRandomGames) {
  CounterRng rng(99);
  int strong = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index m = 1 + static_cast<Index>(rng.next_u64() % 3);
    const Index n = 1 + static_cast<Index>(rng.next_u64() % 3);
    const PartitionedQuadratic pq = random_psd_game(rng, m, n);
    const double up = minmax_threshold(pq);
    const double down = maxmin_threshold(pq);
    EXPECT_LE(down, up + 1e-9);
    for (double lambda : {down, 0.5 * (up + down), up, up + 1e-9 + 0.3, up + 2.0}) {
      const DualityReport r = duality_report(pq, lambda);
      if (r.minmax.finite() && r.maxmin.finite()) {
        // Values near a singular M(lambda) reach 1e5; the slack scales with them.
        EXPECT_LE(r.maxmin.value(), r.minmax.value() + 1e-9 * std::max(1.0, std::abs(r.minmax.value())));
        if (lambda >= up + 1e-9) {
          ++strong;
          EXPECT_LE(relative_gap(r.maxmin.value(), r.minmax.value()), 1e-8);
        }
      }
    }
  }
  EXPECT_GE(strong, 300);
}

TEST(Duality, SaddleOfLagrangianAboveThreshold) {
  // For lambda >= ||M22|| the minmax sets form saddle points of L(., ., lambda).
  CounterRng rng(111);
  for (int trial = 0; trial < 50; ++trial) {
    const PartitionedQuadratic pq = random_psd_game(rng, 2, 2);
    const double lambda = minmax_threshold(pq) + 0.5 + rng.uniform();
    const LambdaSolve s = minmax_at_lambda(pq, lambda);
    ASSERT_TRUE(s.finite());
    const PartitionedQuadratic shifted(pq.m11(), pq.m12(),
                                       pq.m22() - lambda * Matrix::Identity(2, 2), pq.d1(), pq.d2());
    EXPECT_TRUE(verify_saddle(shifted, s.optimum->u_set.particular, s.optimum->w_set.particular,
                              200, 5000 + trial));
    EXPECT_NEAR(pq.lagrangian(s.optimum->u_set.particular, s.optimum->w_set.particular, lambda),
                s.value(), 1e-8 * (1.0 + std::abs(s.value())));
  }
}

TEST(Curve, UnitGameRegions) {
  const auto curve = lambda_curve(unit_game(), -1.0, 2.0, 13);
  ASSERT_EQ(curve.size(), 13u);
  for (const auto& row : curve) {
    EXPECT_EQ(row.maxmin_status == LambdaStatus::Finite, row.lambda >= 0.0) << row.lambda;
    EXPECT_EQ(row.minmax_status == LambdaStatus::Finite, row.lambda >= 1.0) << row.lambda;
    if (row.minmax_status == LambdaStatus::Finite) { EXPECT_NEAR(row.minmax, 0.5 * row.lambda, 1e-12); }
    if (row.maxmin_status == LambdaStatus::Finite) { EXPECT_NEAR(row.maxmin, 0.5 * row.lambda, 1e-12); }
  }
}

TEST(Curve, HomogeneousCurvesAreHalfLambdaAboveThreshold) {
  CounterRng rng(121);
  const PartitionedQuadratic pq = random_psd_game(rng, 2, 2, false);
  const double t = minmax_threshold(pq);
  for (const auto& row : lambda_curve(pq, t, t + 1.0, 11)) {
    ASSERT_EQ(row.minmax_status, LambdaStatus::Finite);
    EXPECT_NEAR(row.minmax, 0.5 * row.lambda, 1e-9);
  }
}

TEST(Curve, EqualThresholdsBecomeFiniteTogether) {
  // PSD game with ||M22|| = ||M22 - M12' M11^+ M12|| = 3.
  const Matrix m11 = Matrix::Identity(2, 2);
  const Matrix m12 = Matrix{{1.0, 0.0}, {0.0, 0.0}};
  const Matrix m22 = Matrix{{2.0, 0.0}, {0.0, 3.0}};
  const PartitionedQuadratic pq(m11, m12, m22);
  EXPECT_NEAR(minmax_threshold(pq), maxmin_threshold(pq), 1e-12);
  for (const auto& row : lambda_curve(pq, 2.0, 4.0, 21)) {
    const bool above = row.lambda >= 3.0;
    EXPECT_EQ(row.minmax_status == LambdaStatus::Finite, above) << row.lambda;
    EXPECT_EQ(row.maxmin_status == LambdaStatus::Finite, above) << row.lambda;
  }
}

TEST(Curve, BadRangeThrows) {
  EXPECT_THROW(lambda_curve(unit_game(), 1.0, 1.0, 5), std::invalid_argument);
  EXPECT_THROW(lambda_curve(unit_game(), 0.0, 1.0, 1), std::invalid_argument);
}

TEST(Thresholds, EqualNormsCounterexample) {
  const PartitionedQuadratic pq(Matrix{{1.0, 0.0}, {0.0, 0.0}}, Matrix::Identity(2, 2),
                                Matrix::Identity(2, 2));
  EXPECT_NEAR(minmax_threshold(pq), 1.0, 1e-12);
  EXPECT_NEAR(maxmin_threshold(pq), 1.0, 1e-12);
  const SchurPair s = schur_complements(pq.m11(), pq.m12(), pq.m22());
  EXPECT_LE((s.schur11 - Matrix{{0.0, 0.0}, {0.0, 1.0}}).norm(), 1e-12);
  // Its assembled matrix is indefinite, so the PSD-checked solvers refuse it.
  EXPECT_FALSE(is_psd(pq.assembled()));
}

}  // namespace
}  // namespace qgame
