#include <gtest/gtest.h>

#include <cmath>

#include "oracle.hpp"
#include "paoi/optimizer.hpp"
#include "support.hpp"

using namespace paoi;

namespace {

// Brute-force minimum of the oracle zeta over a fine grid.
std::pair<double, double> oracle_minimum(const oracle::Law& law, double lo, double hi, int n) {
  double best_t = lo, best_z = INFINITY;
  for (int i = 0; i <= n; ++i) {
    const double t = lo + (hi - lo) * i / n;
    const double z = oracle::fixed_threshold(law, t).zeta;
    if (z < best_z) {
      best_z = z;
      best_t = t;
    }
  }
  return {best_t, best_z};
}

TEST(Window, DefaultSitsAboveSupport) {
  for (const auto& d : support::catalog()) {
    const ThresholdWindow w = default_window(d);
    EXPECT_GT(w.theta_min, support_min(d));
    EXPECT_GT(w.theta_max, w.theta_min);
  }
}

TEST(Window, Validation) {
  const auto d = ServiceDistribution::pareto(1, 2);
  EXPECT_THROW(validate_window(d, {0.5, 2}), InvalidWindow);
  EXPECT_THROW(validate_window(d, {2, 2}), InvalidWindow);
  EXPECT_THROW(validate_window(d, {2, INFINITY}), InvalidWindow);
  EXPECT_NO_THROW(validate_window(d, {1, 2}));
}

TEST(Grid, LogSpacedForWideWindows) {
  const auto g = threshold_grid({1e-3, 10}, 5);
  EXPECT_DOUBLE_EQ(g.front(), 1e-3);
  EXPECT_DOUBLE_EQ(g.back(), 10);
  EXPECT_NEAR(g[1] / g[0], g[2] / g[1], 1e-9);
  const auto lin = threshold_grid({1, 3}, 3);
  EXPECT_DOUBLE_EQ(lin[1], 2.0);
}

TEST(OptimalThreshold, ErlangTwoMatchesBruteForce) {
  const auto d = ServiceDistribution::erlang(2, 1.0);
  const auto [t_ref, z_ref] = oracle_minimum(oracle::erlang(2, 1.0), 0.5, 5.0, 4500);
  const ThresholdSearch s = optimal_threshold(d, {0.5, 5.0});
  EXPECT_NEAR(s.theta, t_ref, 2e-3);
  EXPECT_LE(s.zeta.value(), z_ref + 1e-12);
  EXPECT_NEAR(s.zeta.value(), z_ref, 1e-6);
  EXPECT_LE(s.zeta.value(), s.grid_zeta.value());
}

TEST(OptimalThreshold, ParetoInteriorMinimum) {
  const auto d = ServiceDistribution::pareto(1.0, 3.0);
  const ThresholdSearch s = optimal_threshold(d, {1.0001, 20.0});
  EXPECT_NEAR(s.theta, 2.14, 0.02);
  EXPECT_NEAR(s.zeta.value(), 2.855, 0.01);
}

TEST(OptimalThreshold, ExponentialPicksLeftEndpoint) {
  const ThresholdSearch s = optimal_threshold(ServiceDistribution::exponential(1), {0.1, 4});
  EXPECT_DOUBLE_EQ(s.theta, 0.1);
}

TEST(OptimalThreshold, FlatFunctionTiesToSmallestTheta) {
  const ThresholdSearch s = optimal_threshold(ServiceDistribution::deterministic(1), {1, 5});
  EXPECT_DOUBLE_EQ(s.theta, 1.0);
  EXPECT_DOUBLE_EQ(s.zeta.value(), 2.0);
}

TEST(MinAchievable, TwoPointWinnerIsXMin) {
  const auto d = ServiceDistribution::two_point(1, 3, 0.5);
  for (const ThresholdWindow w : {ThresholdWindow{1, 3}, default_window(d)}) {
    const OptimizationResult r = min_achievable_paoi(d, w);
    EXPECT_EQ(r.winner, Winner::XMinThreshold);
    EXPECT_DOUBLE_EQ(r.zeta_star.value(), 3.0);
  }
}

TEST(MinAchievable, HeavyTailWinnerIsFixed) {
  const OptimizationResult r = min_achievable_paoi(ServiceDistribution::pareto(1, 0.5),
                                                   default_window(ServiceDistribution::pareto(1, 0.5)));
  EXPECT_EQ(r.winner, Winner::FixedThreshold);
  EXPECT_TRUE(r.zeta_star.is_finite());
  EXPECT_TRUE(r.zeta_zero_wait.is_infinite());
}

TEST(MinAchievable, DeterministicIsTwo) {
  const OptimizationResult r = min_achievable_paoi(ServiceDistribution::deterministic(1), {1, 5});
  EXPECT_DOUBLE_EQ(r.zeta_star.value(), 2.0);
}

TEST(MinAchievable, NeverAboveZeroWait) {
  for (const auto& d : support::catalog()) {
    const OptimizationResult r = min_achievable_paoi(d, default_window(d), -1, 400);
    EXPECT_LE(r.zeta_star, r.zeta_zero_wait) << describe(d);
    EXPECT_LE(r.zeta_star, r.zeta_at_theta_dagger);
  }
}

TEST(Bellman, OperatorIsMonotoneAndContracting) {
  const auto d = ServiceDistribution::erlang(3, 1);
  const BellmanOperator op(d, threshold_grid({0.5, 8}, 300));
  const double q = op.modulus();
  EXPECT_NEAR(q, survival(d, 0.5), 1e-15);
  for (double u : {0.0, 1.0, 5.0}) {
    EXPECT_LE(op(u), op(u + 1.0));
    EXPECT_LE(std::abs(op(u + 1.0) - op(u)), q * 1.0 + 1e-12);
  }
}

TEST(Bellman, FixedPointEqualsGridMinimum) {
  const auto d = ServiceDistribution::pareto(1, 2);
  const ThresholdWindow w{1.01, 30};
  const auto grid = threshold_grid(w, 500);
  double grid_min = INFINITY;
  for (double t : grid) grid_min = std::min(grid_min, paoi_fixed_threshold(d, t).zeta.value());
  const BellmanResult from_zero = bellman_fixed_point(d, w, 1e-12, 500);
  const BellmanResult from_above = bellman_fixed_point(d, w, 1e-12, 500, 10'000'000, 100.0);
  EXPECT_NEAR(from_zero.fixed_point, grid_min, 1e-8 * grid_min);
  EXPECT_NEAR(from_above.fixed_point, grid_min, 1e-8 * grid_min);
}

TEST(Bellman, RejectsNonContraction) {
  // P(X > theta_min) = 1 at the support minimum of a continuous law.
  EXPECT_THROW(bellman_fixed_point(ServiceDistribution::pareto(1, 2), {1.0, 3.0}), NoContraction);
}

TEST(Preemption, TwoPointCriticalValue) {
  EXPECT_DOUBLE_EQ(twopoint_benefit_threshold(0.5, 1.0), 2.0);
  // The closed form agrees with comparing x_min against zero-wait directly.
  for (double p : {0.2, 0.5, 0.8}) {
    const double t2 = twopoint_benefit_threshold(p, 1.0);
    const auto above = ServiceDistribution::two_point(1.0, t2 * 1.01, p);
    const auto below = ServiceDistribution::two_point(1.0, std::max(1.001, t2 * 0.99), p);
    EXPECT_LT(paoi_xmin(above), paoi_zero_wait(above));
    if (t2 * 0.99 > 1.001) {
      EXPECT_GT(paoi_xmin(below), paoi_zero_wait(below));
    }
  }
}

TEST(Preemption, Verdicts) {
  EXPECT_FALSE(preemption_beneficial(ServiceDistribution::deterministic(1)).beneficial);
  EXPECT_FALSE(preemption_beneficial(ServiceDistribution::two_point(1, 1.9, 0.5)).beneficial);
  EXPECT_TRUE(preemption_beneficial(ServiceDistribution::erlang(3, 1)).beneficial);
  EXPECT_TRUE(preemption_beneficial(ServiceDistribution::pareto(1, 2)).beneficial);
  const PreemptionVerdict heavy = preemption_beneficial(ServiceDistribution::pareto(1, 0.7));
  EXPECT_TRUE(heavy.beneficial);
  EXPECT_TRUE(std::isinf(heavy.margin));
}

TEST(Preemption, SufficientConditionsImplyBenefit) {
  const auto d = ServiceDistribution::hyperexponential({10, 1}, {0.5, 0.5});
  const auto grid = threshold_grid(default_window(d), 2000);
  const PreemptionVerdict weak = residual_exceeds_mean(d, grid);
  const PreemptionVerdict half = half_threshold_sufficient(d, grid);
  ASSERT_TRUE(weak.beneficial);
  ASSERT_TRUE(half.beneficial);
  EXPECT_LE(*half.witness_theta, *weak.witness_theta);
  EXPECT_TRUE(preemption_beneficial(d).beneficial);
}

TEST(Preemption, ErlangNeverHasLongResidual) {
  for (int k = 2; k <= 6; ++k) {
    const auto d = ServiceDistribution::erlang(k, 1);
    EXPECT_FALSE(residual_exceeds_mean(d, threshold_grid(default_window(d), 2000)).beneficial) << k;
  }
}

}  // namespace
