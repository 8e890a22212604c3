#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace gbd::testing {
namespace {

TEST(SolvePrimalTest, ScalarClosedForm) {
  const Config c = Config::uniform(1, 1, 1, 1, 1.0, 0.1);
  Channels h(c);
  h(0, 0, 0)(0, 0) = 1.0;
  const Strategy x{{{Mat::Constant(1, 1, 1.0)}}};
  const auto sol = solve_primal(c, h, x);
  EXPECT_NEAR(sol.y(0, 0)(0, 0).real(), 10.0, 1e-12);
  EXPECT_NEAR(sol.gamma(0, 0)(0, 0).real(), kBitsPerNat<double>, 1e-12);
  EXPECT_NEAR(sol.value, 3.4594316186372973, 1e-12);
}

TEST(SolvePrimalTest, RejectsInfeasible) {
  const Config c = Config::uniform(1, 1, 1, 1, 1.0, 0.1);
  const auto h = generate_channels(c, 1);
  EXPECT_THROW(solve_primal(c, h, Strategy{{{Mat::Constant(1, 1, 3.0)}}}), std::invalid_argument);
}

class PrimalProperty : public ::testing::TestWithParam<int> {
 protected:
  std::mt19937_64 rng{std::uint64_t(500 + GetParam())};
  Config c = random_config(rng);
  Channels h = generate_channels(c, std::uint64_t(GetParam()));
  Strategy x = sample_random_strategy(c, std::uint64_t(GetParam()) + 3);
};

TEST_P(PrimalProperty, ValueIsWeightedSumRate) {
  EXPECT_NEAR(solve_primal(c, h, x).value, weighted_sum_rate(c, h, x), 1e-8);
  EXPECT_TRUE(primal_value_matches_rates(c, h, x));
}

TEST_P(PrimalProperty, KktWitness) {
  const auto sol = solve_primal(c, h, x);
  const auto cov = CovarianceSnapshot<double>(c, h, x);
  const auto g = grad(GradientKind::lagrangian, c, h, x, sol.y, sol.y, sol.gamma);
  EXPECT_LE(std::sqrt(squared_norm(g.dY)), 1e-8);
  for (int k = 0; k < c.num_cells(); ++k)
    for (int i = 0; i < c.num_users(k); ++i) {
      const UserIndex u{k, i};
      EXPECT_GE(EigenDecomposition<double>(sol.gamma(u)).min_eigenvalue(), -1e-9);
      const Mat slack = Mat::Identity(c.rx(u), c.rx(u)) - cov.Z(u) * sol.y(u);
      EXPECT_LE(std::abs((sol.gamma(u) * slack).trace()), 1e-10);
      // Gamma = s w I under the unscaled trace convention.
      EXPECT_LE((sol.gamma(u) - c.weight(u) * kBitsPerNat<double> * Mat::Identity(c.rx(u), c.rx(u))).norm(), 1e-8);
    }
  EXPECT_NEAR(lagrangian(c, h, x, sol.y, sol.gamma), sol.value, 1e-9);
}

TEST_P(PrimalProperty, MaximizesOverFeasibleY) {
  // Any Y with Z Y <= I gives a weighted lower-bound sum no larger than v(X).
  const auto sol = solve_primal(c, h, x);
  const auto cov = CovarianceSnapshot<double>(c, h, x);
  for (int trial = 0; trial < 5; ++trial) {
    double total = 0;
    for (int k = 0; k < c.num_cells(); ++k)
      for (int i = 0; i < c.num_users(k); ++i)
        total += c.weight({k, i}) * lower_bound_rate(c, h, x, random_below_inverse(rng, cov.Z({k, i})), {k, i});
    EXPECT_LE(total, sol.value + 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Instances, PrimalProperty, ::testing::Range(0, 20));

}  // namespace
}  // namespace gbd::testing
