#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace gbd::testing {
namespace {

Config siso(int cells, double sigma2) { return Config::uniform(cells, 1, 1, 1, 1.0, sigma2); }

Strategy scalar_strategy(std::vector<double> powers) {
  std::vector<std::vector<Mat>> m;
  for (double p : powers) m.push_back({Mat::Constant(1, 1, p)});
  return Strategy(std::move(m));
}

TEST(ConfigTest, ValidateNamesField) {
  Config c = Config::uniform(2, 1, 2, 2, 1.0, 0.1);
  EXPECT_NO_THROW(c.validate());
  c.power[1] = -1;
  try {
    c.validate();
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("power"), std::string::npos);
  }
  c = Config::uniform(1, 2, 1, 1, 1.0, 0.1);
  c.weights = {{0.0, 0.0}};
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(GenerateChannelsTest, DeterministicInSeed) {
  const Config c = Config::uniform(3, 2, 2, 3, 1.0, 0.1);
  EXPECT_EQ(generate_channels(c, 7), generate_channels(c, 7));
  EXPECT_FALSE(generate_channels(c, 7) == generate_channels(c, 8));
}

TEST(GenerateChannelsTest, ShapeContract) {
  Config c = Config::uniform(2, 1, 3, 2, 1.0, 0.1);
  const auto h = generate_channels(c, 1);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) {
      EXPECT_EQ(h(j, k, 0).rows(), 2);
      EXPECT_EQ(h(j, k, 0).cols(), 3);
    }
  EXPECT_TRUE(h.all_finite());
}

TEST(GenerateChannelsTest, UnitVariance) {
  // 10 x 10 entries per matrix, 10 x 10 x 10 links: 1e5 draws.
  const Config c = Config::uniform(10, 10, 10, 10, 1.0, 0.1);
  const auto h = generate_channels(c, 3);
  double sum = 0;
  double mean_re = 0;
  int count = 0;
  for (int j = 0; j < 10; ++j)
    for (int k = 0; k < 10; ++k)
      for (int i = 0; i < 10; ++i) {
        sum += h(j, k, i).squaredNorm();
        mean_re += h(j, k, i).real().sum();
        count += int(h(j, k, i).size());
      }
  EXPECT_EQ(count, 100000);
  EXPECT_NEAR(sum / count, 1.0, 0.02);
  EXPECT_NEAR(mean_re / count, 0.0, 0.01);
}

TEST(InterferenceCovarianceTest, SingleUserIsNoise) {
  const Config c = Config::uniform(1, 1, 3, 2, 1.0, 0.3);
  const auto h = generate_channels(c, 2);
  const Mat z = interference_covariance(c, h, uniform_strategy(c), {0, 0});
  EXPECT_LE((z - 0.3 * Mat::Identity(2, 2)).norm(), 1e-15);
}

TEST(InterferenceCovarianceTest, ZeroCovariancesGiveNoise) {
  const Config c = Config::uniform(3, 2, 2, 2, 1.0, 0.1);
  const auto h = generate_channels(c, 2);
  const Mat z = interference_covariance(c, h, zero_strategy(c), {1, 1});
  EXPECT_LE((z - 0.1 * Mat::Identity(2, 2)).norm(), 1e-15);
}

TEST(InterferenceCovarianceTest, TwoCellSisoHandValue) {
  // Cross channel from cell 2 to the user of cell 1 is 1, X_21 = 0.5, sigma^2 = 0.1.
  const Config c = siso(2, 0.1);
  Channels h(c);
  h(0, 0, 0)(0, 0) = 1.0;
  h(1, 0, 0)(0, 0) = 1.0;
  h(0, 1, 0)(0, 0) = 0.3;
  h(1, 1, 0)(0, 0) = 1.0;
  const Mat z = interference_covariance(c, h, scalar_strategy({0.7, 0.5}), {0, 0});
  EXPECT_NEAR(z(0, 0).real(), 0.6, 1e-15);
}

TEST(InterferenceCovarianceTest, OutOfRange) {
  const Config c = siso(2, 0.1);
  const auto h = generate_channels(c, 1);
  EXPECT_THROW(interference_covariance(c, h, uniform_strategy(c), {2, 0}), std::out_of_range);
  EXPECT_THROW(achievable_rate(c, h, uniform_strategy(c), {0, 1}), std::out_of_range);
}

TEST(AchievableRateTest, SisoTenDb) {
  const Config c = siso(1, 0.1);
  Channels h(c);
  h(0, 0, 0)(0, 0) = 1.0;
  EXPECT_NEAR(achievable_rate(c, h, scalar_strategy({1.0}), {0, 0}), 3.4594316186372973, 1e-12);
}

TEST(AchievableRateTest, ZeroOwnCovariance) {
  const Config c = Config::uniform(2, 2, 2, 2, 1.0, 0.1);
  const auto h = generate_channels(c, 4);
  Strategy x = uniform_strategy(c);
  x(1, 0).setZero();
  EXPECT_NEAR(achievable_rate(c, h, x, {1, 0}), 0.0, 1e-14);
}

TEST(AchievableRateTest, MatchesEigenvalueOracle) {
  std::mt19937_64 rng(11);
  const Config c = Config::uniform(2, 1, 2, 2, 1.0, 0.1);
  const auto h = generate_channels(c, 11);
  const auto x = sample_random_strategy(c, 5);
  for (int k = 0; k < 2; ++k) {
    // Oracle: rate from the eigenvalues of Z^{-1} H X H^H, built without the library's covariance helpers.
    Mat z = 0.1 * Mat::Identity(2, 2);
    const int j = 1 - k;
    z += h(j, k, 0) * x(j, 0) * h(j, k, 0).adjoint();
    const Mat s = h(k, k, 0) * x(k, 0) * h(k, k, 0).adjoint();
    Eigen::ComplexEigenSolver<Mat> es(Mat(z.inverse() * s));
    double expected = 0;
    for (int i = 0; i < 2; ++i) expected += std::log2(1.0 + es.eigenvalues()(i).real());
    EXPECT_NEAR(achievable_rate(c, h, x, {k, 0}), expected, 1e-10);
  }
}

TEST(WeightedSumRateTest, SelectorWeights) {
  Config c = Config::uniform(2, 2, 2, 2, 1.0, 0.1);
  const auto h = generate_channels(c, 9);
  const auto x = uniform_strategy(c);
  c.weights = {{1.0, 0.0}, {0.0, 0.0}};
  EXPECT_DOUBLE_EQ(weighted_sum_rate(c, h, x), achievable_rate(c, h, x, {0, 0}));
}

TEST(WeightedSumRateTest, SingleUserEqualsRate) {
  const Config c = Config::uniform(1, 1, 3, 2, 2.0, 0.1);
  const auto h = generate_channels(c, 9);
  const auto x = uniform_strategy(c);
  EXPECT_DOUBLE_EQ(weighted_sum_rate(c, h, x), achievable_rate(c, h, x, {0, 0}));
}

TEST(WeightedSumRateTest, TwoSisoUsersHandComputed) {
  Config c = siso(2, 0.1);
  c.weights = {{0.3}, {0.7}};
  Channels h(c);
  h(0, 0, 0)(0, 0) = 1.0;
  h(1, 1, 0)(0, 0) = 2.0;
  h(1, 0, 0)(0, 0) = 0.5;
  h(0, 1, 0)(0, 0) = 1.0;
  const auto x = scalar_strategy({1.0, 0.5});
  EXPECT_NEAR(achievable_rate(c, h, x, {0, 0}), 2.4447848426728958, 1e-12);
  EXPECT_NEAR(achievable_rate(c, h, x, {1, 0}), 1.494764691749578, 1e-12);
  EXPECT_NEAR(weighted_sum_rate(c, h, x), 1.7797707370265734, 1e-12);
}

TEST(IsFeasibleTest, UniformPowerIsFeasible) {
  Config c = Config::uniform(2, 3, 4, 2, 1.7, 0.1);
  EXPECT_TRUE(is_feasible(c, uniform_strategy(c)).feasible);
}

TEST(IsFeasibleTest, PowerViolationReported) {
  const Config c = siso(1, 0.1);
  const auto rep = is_feasible(c, scalar_strategy({2.0}));
  EXPECT_FALSE(rep.feasible);
  EXPECT_NEAR(rep.worst_power_excess, 1.0, 1e-15);
  EXPECT_NE(rep.summary().find("power"), std::string::npos);
}

TEST(IsFeasibleTest, NegativeEigenvalueReported) {
  const Config c = Config::uniform(1, 1, 2, 1, 1.0, 0.1);
  Strategy x = uniform_strategy(c);
  x(0, 0)(1, 1) = -1e-3;
  const auto rep = is_feasible(c, x);
  EXPECT_FALSE(rep.feasible);
  EXPECT_NEAR(rep.min_eigenvalue, -1e-3, 1e-15);
  EXPECT_NE(rep.summary().find("PSD"), std::string::npos);
}

TEST(IsFeasibleTest, ShapeMismatchThrows) {
  const Config c = Config::uniform(1, 1, 2, 1, 1.0, 0.1);
  Strategy x = uniform_strategy(Config::uniform(1, 1, 3, 1, 1.0, 0.1));
  EXPECT_THROW(is_feasible(c, x), std::invalid_argument);
}

class RateProperty : public ::testing::TestWithParam<int> {};

TEST_P(RateProperty, NoiseFloorMonotonicityAndRotation) {
  std::mt19937_64 rng{std::uint64_t(100 + GetParam())};
  const Config c = random_config(rng);
  Channels h = generate_channels(c, std::uint64_t(GetParam()));
  Strategy x = sample_random_strategy(c, std::uint64_t(GetParam()) + 1000);
  std::uniform_real_distribution<double> scale(1.0, 4.0);

  for (int k = 0; k < c.num_cells(); ++k)
    for (int i = 0; i < c.num_users(k); ++i) {
      const UserIndex u{k, i};
      const Mat z = interference_covariance(c, h, x, u);
      EXPECT_GE(EigenDecomposition<double>(z).min_eigenvalue(), c.noise_variance - 1e-9);

      const double r = achievable_rate(c, h, x, u);
      Strategy scaled = x;
      scaled(u) *= scale(rng);
      EXPECT_GE(achievable_rate(c, h, scaled, u), r - 1e-12);

      Channels rotated = h;
      const Mat q = random_unitary(rng, c.rx(u));
      for (int j = 0; j < c.num_cells(); ++j) rotated(j, k, i) = q * h(j, k, i);
      EXPECT_NEAR(achievable_rate(c, rotated, x, u), r, 1e-9);
    }
}

TEST_P(RateProperty, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng{std::uint64_t(200 + GetParam())};
  const Config c = random_config(rng);
  const auto h = generate_channels(c, std::uint64_t(GetParam()));
  const auto x = sample_random_strategy(c, std::uint64_t(GetParam()) + 7);
  const auto g = weighted_sum_rate_gradient(c, h, x);
  const double step = 1e-5;
  for (int d = 0; d < 5; ++d) {
    const Strategy dir = random_direction(rng, x);
    const double fd = (weighted_sum_rate(c, h, x + step * dir) - weighted_sum_rate(c, h, x - step * dir)) / (2 * step);
    const double an = inner(g, dir);
    EXPECT_LE(std::abs(fd - an), 1e-5 * std::max({std::abs(fd), std::abs(an), 1.0}));
  }
}

INSTANTIATE_TEST_SUITE_P(Instances, RateProperty, ::testing::Range(0, 15));

}  // namespace
}  // namespace gbd::testing
