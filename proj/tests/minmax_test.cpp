#include <gtest/gtest.h>

#include "support.hpp"

namespace qgame {
namespace {

using testing::random_psd;
using testing::random_psd_game;
using testing::relative_gap;

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }
Vector vec1(double v) { return Vector::Constant(1, v); }

// max over W of V(u, .) for the returned u, which must reproduce the game value.
double best_response_value(const PartitionedQuadratic& pq, const Vector& u) {
  const Vector linear = pq.m12().transpose() * u + pq.d2();
  const double constant = 0.5 * u.dot(pq.m11() * u) + u.dot(pq.d1());
  return constant + solve_trust_region(pq.m22(), linear).value;
}

TEST(Homogeneous, Examples) {
  const PartitionedQuadratic decoupled(scalar(1), scalar(0), scalar(1));
  EXPECT_NEAR(solve_homogeneous(decoupled, Direction::MinMax).value, 0.5, 1e-12);
  EXPECT_NEAR(solve_homogeneous(decoupled, Direction::MaxMin).value, 0.5, 1e-12);

  const PartitionedQuadratic coupled(scalar(1), scalar(1), scalar(1));
  const ConstrainedGameSolution up = solve_homogeneous(coupled, Direction::MinMax);
  const ConstrainedGameSolution down = solve_homogeneous(coupled, Direction::MaxMin);
  EXPECT_NEAR(up.value, 0.5, 1e-12);
  EXPECT_NEAR(up.lambda0, 1.0, 1e-12);
  EXPECT_NEAR(down.value, 0.0, 1e-12);
  EXPECT_NEAR(down.lambda0, 0.0, 1e-12);
  EXPECT_NEAR(std::abs(up.w()(0)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(down.w()(0)), 1.0, 1e-12);
  EXPECT_NEAR(down.u()(0), -down.w()(0), 1e-12);
}

TEST(Homogeneous, EqualNormsCounterexampleIsRejectedAsIndefinite) {
  const PartitionedQuadratic pq(Matrix{{1.0, 0.0}, {0.0, 0.0}}, Matrix::Identity(2, 2),
                                Matrix::Identity(2, 2));
  EXPECT_THROW(solve_homogeneous(pq, Direction::MinMax), PreconditionError);
  EXPECT_THROW(solve_homogeneous(pq, Direction::MaxMin), PreconditionError);
}

TEST(Homogeneous, EqualThresholdsGiveEqualValues) {
  const PartitionedQuadratic pq(Matrix::Identity(2, 2), Matrix{{1.0, 0.0}, {0.0, 0.0}},
                                Matrix{{2.0, 0.0}, {0.0, 3.0}});
  const ConstrainedGameSolution up = solve_homogeneous(pq, Direction::MinMax);
  const ConstrainedGameSolution down = solve_homogeneous(pq, Direction::MaxMin);
  EXPECT_NEAR(up.value, 1.5, 1e-12);
  EXPECT_NEAR(down.value, 1.5, 1e-12);
  EXPECT_NEAR(up.lambda0, down.lambda0, 1e-12);
}

TEST(Homogeneous, RejectsLinearTerm) {
  EXPECT_THROW(solve_homogeneous({scalar(1), scalar(0), scalar(1), vec1(1), vec1(0)}, Direction::MinMax),
               PreconditionError);
}

TEST(Homogeneous, RandomGamesOrderAndFeasibility) {
  CounterRng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = 1 + static_cast<Index>(rng.next_u64() % 3);
    const Index n = 1 + static_cast<Index>(rng.next_u64() % 3);
    const PartitionedQuadratic pq = random_psd_game(rng, m, n, false);
    const ConstrainedGameSolution up = solve_homogeneous(pq, Direction::MinMax);
    const ConstrainedGameSolution down = solve_homogeneous(pq, Direction::MaxMin);
    EXPECT_LE(down.value, up.value + 1e-9);
    EXPECT_NEAR(up.w().norm(), 1.0, 1e-9);
    EXPECT_NEAR(down.w().norm(), 1.0, 1e-9);
    // The minmax u attains the value against its best sphere response.
    EXPECT_NEAR(best_response_value(pq, up.u()), up.value, 1e-8 * (1.0 + up.value));
    // The maxmin w attains the value against its best u response.
    EXPECT_NEAR(pq.value(down.u(), down.w()), down.value, 1e-8 * (1.0 + down.value));
  }
}

TEST(LinearTerm, SeparableExample) {
  const PartitionedQuadratic pq(scalar(1), scalar(0), scalar(0), vec1(1), vec1(2));
  const auto s = solve_linear_term(pq, Direction::MinMax);
  ASSERT_TRUE(s);
  EXPECT_NEAR(s->lambda0, 2.0, 1e-8);
  EXPECT_NEAR(s->value, 1.5, 1e-8);
  EXPECT_NEAR(s->u()(0), -1.0, 1e-8);
  EXPECT_NEAR(s->w()(0), 1.0, 1e-8);

  const LambdaSearchResult search = lambda_search(pq, minmax_threshold(pq));
  EXPECT_NEAR(search.lambda0, 2.0, 1e-8);
  const LambdaSolve at = minmax_at_lambda(pq, search.lambda0);
  EXPECT_NEAR(at.optimum->w_set.particular.norm(), 1.0, 1e-8);
}

TEST(LinearTerm, HomogeneousReduction) {
  const PartitionedQuadratic pq(scalar(1), scalar(1), scalar(1));
  const auto s = solve_linear_term(pq, Direction::MaxMin);
  ASSERT_TRUE(s);
  EXPECT_NEAR(s->lambda0, 0.0, 1e-12);
  EXPECT_NEAR(s->value, 0.0, 1e-12);
  EXPECT_EQ(lambda_search(pq, 1.0).lambda0, 1.0);
}

TEST(LinearTerm, ConsistentWithHomogeneousOnRandomGames) {
  CounterRng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const PartitionedQuadratic pq = random_psd_game(rng, 2, 2, false);
    for (Direction dir : {Direction::MinMax, Direction::MaxMin}) {
      const ConstrainedGameSolution h = solve_homogeneous(pq, dir);
      const auto l = solve_linear_term(pq, dir);
      ASSERT_TRUE(l);
      EXPECT_NEAR(l->value, h.value, 1e-9);
      EXPECT_NEAR(l->lambda0, h.lambda0, 1e-8);
      // The search alone lands on the threshold too.
      EXPECT_NEAR(lambda_search(pq, threshold(pq, dir), dir).lambda0, h.lambda0, 1e-8);
    }
  }
}

TEST(LinearTerm, UnboundedWhenD1LeavesRangeOfM11) {
  const PartitionedQuadratic pq(Matrix{{1.0, 0.0}, {0.0, 0.0}}, Matrix::Zero(2, 1), scalar(1),
                                Vector{{0.0, 1.0}}, vec1(0.0));
  EXPECT_FALSE(solve_linear_term(pq, Direction::MinMax));
  EXPECT_FALSE(solve_linear_term(pq, Direction::MaxMin));
}

TEST(LinearTerm, RandomGamesCertificates) {
  CounterRng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = 1 + static_cast<Index>(rng.next_u64() % 3);
    const Index n = 1 + static_cast<Index>(rng.next_u64() % 3);
    const PartitionedQuadratic pq = random_psd_game(rng, m, n);
    const auto up = solve_linear_term(pq, Direction::MinMax);
    const auto down = solve_linear_term(pq, Direction::MaxMin);
    ASSERT_TRUE(up && down);
    EXPECT_GE(up->lambda0, minmax_threshold(pq) - 1e-9);
    EXPECT_GE(down->lambda0, maxmin_threshold(pq) - 1e-9);
    EXPECT_LE(down->value, up->value + 1e-9);
    EXPECT_NEAR(up->w().norm(), 1.0, 1e-9);
    EXPECT_NEAR(down->w().norm(), 1.0, 1e-9);
    EXPECT_FALSE(up->diagnostics.golden_fallback);
    EXPECT_FALSE(down->diagnostics.golden_fallback);
    const double scale = 1e-7 * (1.0 + std::abs(up->value));
    EXPECT_NEAR(best_response_value(pq, up->u()), up->value, scale);
    EXPECT_NEAR(pq.value(up->u(), up->w()), up->value, scale);
    EXPECT_NEAR(pq.value(down->u(), down->w()), down->value, 1e-7 * (1.0 + std::abs(down->value)));
    // Stationary multipliers put the w-response on the sphere.
    for (const auto* s : {&*up, &*down}) {
      if (s->diagnostics.at_threshold) continue;
      EXPECT_LE(std::abs(s->diagnostics.residual), 1e-8);
    }
  }
}

TEST(LinearTerm, LambdaMinimizesTheDualFunction) {
  CounterRng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const PartitionedQuadratic pq = random_psd_game(rng, 2, 2);
    for (Direction dir : {Direction::MinMax, Direction::MaxMin}) {
      const auto s = solve_linear_term(pq, dir);
      ASSERT_TRUE(s);
      auto L = [&](double lambda) {
        const LambdaSolve r = dir == Direction::MinMax ? minmax_at_lambda(pq, lambda)
                                                       : maxmin_at_lambda(pq, lambda);
        return r.value();
      };
      for (double step : {1e-4, 1e-2, 0.3, 2.0}) {
        EXPECT_GE(L(s->lambda0 + step), s->value - 1e-9 * (1.0 + std::abs(s->value)));
        const double left = s->lambda0 - step;
        if (left >= threshold(pq, dir)) {
          EXPECT_GE(L(left), s->value - 1e-9 * (1.0 + std::abs(s->value)));
        }
      }
    }
  }
}

TEST(LinearTerm, DerivativeIdentity) {
  CounterRng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const PartitionedQuadratic pq = random_psd_game(rng, 2, 2, true, true);
    const double lambda = minmax_threshold(pq) + 0.5 + 2.0 * rng.uniform();
    auto L = [&](double x) { return minmax_at_lambda(pq, x).value(); };
    const double fd = fd_derivative(L, lambda, 1e-6 * (1.0 + lambda));
    const Vector z = -pq.assembled(lambda).fullPivLu().solve(pq.linear_term());
    const double analytic = 0.5 * (1.0 - z.tail(2).squaredNorm());
    EXPECT_LE(std::abs(fd - analytic), 1e-5 * std::max(std::abs(analytic), 1e-6));
  }
}

TEST(Embedding, EmptyUMatchesTrustRegion) {
  CounterRng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.next_u64() % 4);
    const Matrix D = random_psd(rng, n);
    const Vector d = rng.normal_vector(n);
    const PartitionedQuadratic pq(Matrix(0, 0), Matrix(0, n), D, Vector(0), d);
    const auto s = solve_linear_term(pq, Direction::MinMax);
    ASSERT_TRUE(s);
    const TrustRegionSolution t = solve_trust_region(D, d);
    EXPECT_LE(std::abs(s->lambda0 - t.lambda_p), 1e-8 * std::abs(t.lambda_p));
    EXPECT_NEAR(s->value, t.value, 1e-8 * (1.0 + std::abs(t.value)));
  }
}

TEST(OracleAgreement, ScalarPlayers) {
  CounterRng rng(14);
  OracleConfig cfg;
  for (int trial = 0; trial < 50; ++trial) {
    const PartitionedQuadratic pq = random_psd_game(rng, 1, 1, trial % 5 != 0);
    for (Direction dir : {Direction::MinMax, Direction::MaxMin}) {
      const auto s = solve_constrained(pq, dir);
      ASSERT_TRUE(s);
      EXPECT_NEAR(grid_minmax(pq, cfg, dir), s->value, 1e-3) << to_string(dir) << " " << trial;
    }
  }
}

TEST(OracleAgreement, TwoDimensionalPlayers) {
  CounterRng rng(15);
  OracleConfig cfg;
  cfg.samples = 10000;
  for (int trial = 0; trial < 20; ++trial) {
    const PartitionedQuadratic pq = random_psd_game(rng, 2, 2, trial % 4 != 0);
    for (Direction dir : {Direction::MinMax, Direction::MaxMin}) {
      const auto s = solve_constrained(pq, dir);
      ASSERT_TRUE(s);
      EXPECT_NEAR(grid_minmax(pq, cfg, dir), s->value, 5e-3) << to_string(dir) << " " << trial;
    }
  }
}

TEST(Search, RejectsEmptySphere) {
  const PartitionedQuadratic pq(scalar(1), Matrix(1, 0), Matrix(0, 0));
  EXPECT_THROW(solve_linear_term(pq, Direction::MinMax), DimensionError);
}

}  // namespace
}  // namespace qgame
