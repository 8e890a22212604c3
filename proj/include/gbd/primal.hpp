#ifndef GBD_PRIMAL_HPP
#define GBD_PRIMAL_HPP

#include <cassert>
#include <stdexcept>

#include "gbd/bounds.hpp"

namespace gbd {

template <typename Real>
struct PrimalSolution {
  AuxiliaryVars<Real> y;
  DualVars<Real> gamma;
  Real value = 0;  // v(X), bits
};

/// Closed-form solution of the inner maximization over Y for fixed X.
///
/// Y_ki = Z_ki^{-1}. The multiplier comes from stationarity of the Lagrangian
/// in Y, s w Y^{-1} = Gamma Z, so Gamma = s w Y^{-1} Z^{-1}; with Z Y = I this
/// is s w I and complementary slackness holds exactly.
template <typename Real>
PrimalSolution<Real> solve_primal(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                                  const TransmitStrategy<Real>& x) {
  const auto report = is_feasible(config, x);
  if (!report.feasible) throw std::invalid_argument("solve_primal: infeasible X: " + report.summary());

  const CovarianceSnapshot<Real> cov(config, channels, x);
  std::vector<std::vector<CMatrix<Real>>> ys(std::size_t(config.num_cells()));
  std::vector<std::vector<CMatrix<Real>>> gammas(std::size_t(config.num_cells()));
  Real value = 0;
  for (int k = 0; k < config.num_cells(); ++k)
    for (int i = 0; i < config.num_users(k); ++i) {
      const UserIndex u{k, i};
      const CMatrix<Real>& z = cov.Z(u);
      CMatrix<Real> y = inverse_pd(z);
      // Gamma = s w Y^{-1} Z^{-1}
      CMatrix<Real> gamma =
          hermitian_part(CMatrix<Real>(config.weight(u) * kBitsPerNat<Real> * solve_pd<Real>(y, inverse_pd(z))));
      value += config.weight(u) * detail::lower_bound_rate_from(cov, u, y);
      ys[std::size_t(k)].push_back(std::move(y));
      gammas[std::size_t(k)].push_back(std::move(gamma));
    }
  PrimalSolution<Real> sol{AuxiliaryVars<Real>(std::move(ys)), DualVars<Real>(std::move(gammas)), value};
#ifndef NDEBUG
  {
    const auto g = grad(GradientKind::lagrangian, config, channels, x, sol.y, sol.y, sol.gamma);
    assert(std::sqrt(double(squared_norm(g.dY))) <= 1e-6 * (1 + double(value)));
  }
#endif
  return sol;
}

/// Standing self-check that v(X) equals the weighted sum rate.
template <typename Real>
bool primal_value_matches_rates(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                                const TransmitStrategy<Real>& x, Real tol = Real(1e-8)) {
  const Real v = solve_primal(config, channels, x).value;
  const Real direct = weighted_sum_rate(config, channels, x);
  return std::abs(double(v - direct)) <= double(tol);
}

}  // namespace gbd

#endif  // GBD_PRIMAL_HPP
