#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace gbd::testing {
namespace {

// Scalar link: |h|^2 = 2, x = 0.4, sigma^2 = 0.1, weight 1, Gamma = 1.3, anchor 5, Y = 7.
struct ScalarCase {
  Config config = Config::uniform(1, 1, 1, 1, 1.0, 0.1);
  Channels channels{config};
  Strategy x{{{Mat::Constant(1, 1, 0.4)}}};
  Aux anchor{{{Mat::Constant(1, 1, 5.0)}}};
  Aux y{{{Mat::Constant(1, 1, 7.0)}}};
  Duals gamma{{{Mat::Constant(1, 1, 1.3)}}};
  ScalarCase() { channels(0, 0, 0)(0, 0) = std::sqrt(2.0); }
};

TEST(BoundsScalarTest, HandExpandedValues) {
  const ScalarCase s;
  EXPECT_NEAR(lagrangian(s.config, s.channels, s.x, s.anchor, s.gamma), 2.819925001442312, 1e-12);
  EXPECT_NEAR(lin(s.config, s.channels, s.x, s.y, s.anchor, s.gamma), 3.1370030177978974, 1e-12);
  EXPECT_NEAR(lagrangian(s.config, s.channels, s.x, s.y, s.gamma), 3.045351828612554, 1e-12);
  EXPECT_NEAR(lin_lb(s.config, s.channels, s.x, s.y, s.anchor, s.gamma), 1.1244357092408983, 1e-12);
}

TEST(BoundsScalarTest, HalfInverseLosesOneBit) {
  const Config c = Config::uniform(1, 1, 1, 1, 1.0, 0.1);
  Channels h(c);
  h(0, 0, 0)(0, 0) = 1.0;
  const Strategy x{{{Mat::Constant(1, 1, 1.0)}}};
  const Mat half = Mat::Constant(1, 1, 0.5 / 0.1);
  EXPECT_NEAR(lower_bound_rate(c, h, x, half, {0, 0}), achievable_rate(c, h, x, {0, 0}) - 1.0, 1e-12);
}

TEST(LowerBoundRateTest, RejectsNonPdY) {
  const ScalarCase s;
  EXPECT_THROW(lower_bound_rate(s.config, s.channels, s.x, Mat(Mat::Constant(1, 1, -1.0)), {0, 0}), std::domain_error);
}

TEST(LagrangianTest, ZeroDualsGiveWeightedLowerBounds) {
  std::mt19937_64 rng(31);
  const Config c = random_config(rng);
  const auto h = generate_channels(c, 31);
  const auto x = sample_random_strategy(c, 31);
  const Aux y = random_pd_aux(rng, c);
  double expected = 0;
  for (int k = 0; k < c.num_cells(); ++k)
    for (int i = 0; i < c.num_users(k); ++i) expected += c.weight({k, i}) * lower_bound_rate(c, h, x, y({k, i}), {k, i});
  EXPECT_NEAR(lagrangian(c, h, x, y, 0.0 * random_psd_duals(rng, c)), expected, 1e-10);
}

TEST(LagrangianTest, InverseInterferenceKillsDualTerm) {
  std::mt19937_64 rng(32);
  const Config c = random_config(rng);
  const auto h = generate_channels(c, 32);
  const auto x = sample_random_strategy(c, 32);
  const auto sol = solve_primal(c, h, x);
  EXPECT_NEAR(lagrangian(c, h, x, sol.y, random_psd_duals(rng, c)), weighted_sum_rate(c, h, x), 1e-9);
}

TEST(LagrangianTest, MatchesDirectFormula) {
  std::mt19937_64 rng(33);
  const Config c = Config::uniform(2, 2, 2, 2, 1.0, 0.1);
  const auto h = generate_channels(c, 33);
  const auto x = sample_random_strategy(c, 33);
  const Aux y = random_pd_aux(rng, c);
  const Duals gamma = random_psd_duals(rng, c);
  // Oracle: determinants via the general eigensolver and covariances summed link by link.
  double expected = 0;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i) {
      Mat z = 0.1 * Mat::Identity(2, 2);
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l)
          if (j != k || l != i) z += h(j, k, i) * x(j, l) * h(j, k, i).adjoint();
      const Mat t = z + h(k, k, i) * x(k, i) * h(k, k, i).adjoint();
      auto log2det = [](const Mat& a) {
        Eigen::ComplexEigenSolver<Mat> es(a);
        double s = 0;
        for (int r = 0; r < a.rows(); ++r) s += std::log2(std::abs(es.eigenvalues()(r)));
        return s;
      };
      expected += log2det(t) + log2det(y({k, i}));
      expected += (gamma({k, i}) * (Mat::Identity(2, 2) - z * y({k, i}))).trace().real();
    }
  EXPECT_NEAR(lagrangian(c, h, x, y, gamma), expected, 1e-10);
}

TEST(LinTest, TangentAtAnchor) {
  std::mt19937_64 rng(34);
  const Config c = random_config(rng);
  const auto h = generate_channels(c, 34);
  const auto x = sample_random_strategy(c, 34);
  const Aux anchor = random_pd_aux(rng, c);
  const Duals gamma = random_psd_duals(rng, c);
  EXPECT_DOUBLE_EQ(lin(c, h, x, anchor, anchor, gamma), lagrangian(c, h, x, anchor, gamma));
}

TEST(LinLbTest, ZeroResidualRecoversLagrangian) {
  std::mt19937_64 rng(35);
  const Config c = random_config(rng);
  const auto h = generate_channels(c, 35);
  const auto x = sample_random_strategy(c, 35);
  const auto sol = solve_primal(c, h, x);
  // At the primal point the slope vanishes, so Y = anchor zeroes the residual.
  EXPECT_NEAR(lin_lb(c, h, x, sol.y, sol.y, sol.gamma), lagrangian(c, h, x, sol.y, sol.gamma), 1e-9);

  const Aux anchor = random_pd_aux(rng, c, 1.0);
  const Aux y = optimal_auxiliary(c, h, x, anchor, sol.gamma);
  const auto cov = CovarianceSnapshot<double>(c, h, x);
  double residual = 0;
  for (int k = 0; k < c.num_cells(); ++k)
    for (int i = 0; i < c.num_users(k); ++i)
      residual += frob_sq(lin_lb_residual(c.weight({k, i}), cov.Z({k, i}), y({k, i}), anchor({k, i}), sol.gamma({k, i})));
  if (residual < 1e-20) {
    EXPECT_NEAR(lin_lb(c, h, x, y, anchor, sol.gamma), lagrangian(c, h, x, anchor, sol.gamma), 1e-9);
    EXPECT_LE(std::sqrt(squared_norm(grad(GradientKind::lin_lb, c, h, x, y, anchor, sol.gamma).dY)), 1e-9);
  }
}

TEST(LinLbTest, TraceInequalityScalar) {
  // tr(AB) >= -1/2 ||A - B||^2 for A = 2, B = 1.
  const double a = 2.0, b = 1.0;
  EXPECT_GE(a * b, -0.5 * (a - b) * (a - b));
  EXPECT_DOUBLE_EQ(-0.5 * (a - b) * (a - b), -0.5);
}

TEST(GradTest, StationaryAtPrimalSolution) {
  std::mt19937_64 rng(36);
  for (int trial = 0; trial < 10; ++trial) {
    const Config c = random_config(rng);
    const auto h = generate_channels(c, std::uint64_t(trial));
    const auto x = sample_random_strategy(c, std::uint64_t(trial) + 50);
    const auto sol = solve_primal(c, h, x);
    const auto g = grad(GradientKind::lagrangian, c, h, x, sol.y, sol.y, sol.gamma);
    EXPECT_LE(std::sqrt(squared_norm(g.dY)), 1e-8);
  }
}

TEST(GradTest, ParseKind) {
  EXPECT_EQ(parse_gradient_kind("lagrangian"), GradientKind::lagrangian);
  EXPECT_EQ(parse_gradient_kind("lin_lb"), GradientKind::lin_lb);
  EXPECT_THROW(parse_gradient_kind("lin"), std::invalid_argument);
}

class BoundsProperty : public ::testing::TestWithParam<int> {
 protected:
  std::mt19937_64 rng{std::uint64_t(1000 + GetParam())};
  Config c = random_config(rng);
  Channels h = generate_channels(c, std::uint64_t(GetParam()));
  Strategy x = sample_random_strategy(c, std::uint64_t(GetParam()) + 77);
};

TEST_P(BoundsProperty, LowerBoundSandwich) {
  const auto cov = CovarianceSnapshot<double>(c, h, x);
  for (int k = 0; k < c.num_cells(); ++k)
    for (int i = 0; i < c.num_users(k); ++i) {
      const UserIndex u{k, i};
      const double r = achievable_rate(c, h, x, u);
      const Mat zinv = inverse_pd(cov.Z(u));
      EXPECT_NEAR(lower_bound_rate(c, h, x, zinv, u), r, 1e-9);

      EigenDecomposition<double> eig(zinv);
      const Mat v = random_unitary(rng, c.rx(u));
      const Mat rotated = hermitian_part(Mat(v * eig.eigenvalues.cast<std::complex<double>>().asDiagonal() * v.adjoint()));
      EXPECT_NEAR(lower_bound_rate(c, h, x, rotated, u), r, 1e-9);

      for (int trial = 0; trial < 5; ++trial)
        EXPECT_LE(lower_bound_rate(c, h, x, random_below_inverse(rng, cov.Z(u)), u), r + 1e-12);
    }
}

TEST_P(BoundsProperty, LowerBoundJointlyConcave) {
  const Strategy x2 = sample_random_strategy(c, std::uint64_t(GetParam()) + 991);
  const Aux y1 = random_pd_aux(rng, c), y2 = random_pd_aux(rng, c);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double t = unit(rng);
    const Strategy xm = t * x + (1 - t) * x2;
    const Aux ym = t * y1 + (1 - t) * y2;
    for (int k = 0; k < c.num_cells(); ++k)
      for (int i = 0; i < c.num_users(k); ++i) {
        const UserIndex u{k, i};
        const double mixed = lower_bound_rate(c, h, xm, ym(u), u);
        const double chord = t * lower_bound_rate(c, h, x, y1(u), u) + (1 - t) * lower_bound_rate(c, h, x2, y2(u), u);
        EXPECT_GE(mixed, chord - 1e-9);
      }
  }
}

TEST_P(BoundsProperty, BoundChain) {
  const Aux anchor = random_pd_aux(rng, c);
  const Duals gamma = random_psd_duals(rng, c);
  for (int trial = 0; trial < 5; ++trial) {
    const Aux y = random_pd_aux(rng, c, 0.05);
    const double l = lin(c, h, x, y, anchor, gamma);
    EXPECT_GE(l, lagrangian(c, h, x, y, gamma) - 1e-10);
    EXPECT_GE(l, lin_lb(c, h, x, y, anchor, gamma) - 1e-10);
  }
}

TEST_P(BoundsProperty, GradientsMatchFiniteDifferences) {
  const Aux y = random_pd_aux(rng, c);
  const Aux anchor = random_pd_aux(rng, c);
  const Duals gamma = random_psd_duals(rng, c);
  const double step = 1e-5;
  for (GradientKind kind : {GradientKind::lagrangian, GradientKind::lin_lb}) {
    const auto g = grad(kind, c, h, x, y, anchor, gamma);
    auto f = [&](const Strategy& xx, const Aux& yy) {
      return kind == GradientKind::lagrangian ? lagrangian(c, h, xx, yy, gamma) : lin_lb(c, h, xx, yy, anchor, gamma);
    };
    for (int d = 0; d < 4; ++d) {
      const Strategy dx = random_direction(rng, x);
      const Aux dy = random_direction(rng, y);
      const double fd = (f(x + step * dx, y + step * dy) - f(x - step * dx, y - step * dy)) / (2 * step);
      EXPECT_LE(relative_error(fd, inner(g.dX, dx) + inner(g.dY, dy)), 1e-5);
    }
  }
}

TEST_P(BoundsProperty, OptimalAuxiliaryMaximizesLinLb) {
  const Aux anchor = random_pd_aux(rng, c);
  const Duals gamma = random_psd_duals(rng, c);
  const Aux best = optimal_auxiliary(c, h, x, anchor, gamma);
  const double v = lin_lb(c, h, x, best, anchor, gamma);
  for (int trial = 0; trial < 10; ++trial) EXPECT_LE(lin_lb(c, h, x, random_pd_aux(rng, c, 1e-3), anchor, gamma), v + 1e-10);
  best.for_each([](const Mat& m) { EXPECT_GE(EigenDecomposition<double>(m).min_eigenvalue(), 1e-9 - 1e-15); });
}

INSTANTIATE_TEST_SUITE_P(Instances, BoundsProperty, ::testing::Range(0, 20));

}  // namespace
}  // namespace gbd::testing
