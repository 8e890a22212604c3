#ifndef GBD_BASELINES_HPP
#define GBD_BASELINES_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "gbd/network.hpp"

namespace gbd {

/// Random feasible strategy.
///
/// Each user gets the Gram matrix of a square CN(0, 1) matrix; the cell's
/// tuple is then scaled so its total trace equals f * P_k with f ~ U(0, 1].
template <typename Real>
TransmitStrategy<Real> sample_random_strategy(const NetworkConfig<Real>& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<Real> normal(Real(0), std::sqrt(Real(0.5)));
  std::uniform_real_distribution<Real> unit(Real(0), Real(1));

  std::vector<std::vector<CMatrix<Real>>> m(std::size_t(config.num_cells()));
  for (int k = 0; k < config.num_cells(); ++k) {
    const int n = config.tx(k);
    Real trace_sum = 0;
    for (int i = 0; i < config.num_users(k); ++i) {
      CMatrix<Real> a(n, n);
      for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = 0; r < n; ++r) a(r, c) = Complex<Real>(normal(rng), normal(rng));
      CMatrix<Real> gram = hermitian_part(CMatrix<Real>(a * a.adjoint()));
      trace_sum += gram.trace().real();
      m[std::size_t(k)].push_back(std::move(gram));
    }
    const Real fraction = Real(1) - unit(rng);  // (0, 1]
    const Real scale = trace_sum > 0 ? fraction * config.power[std::size_t(k)] / trace_sum : Real(0);
    for (auto& x : m[std::size_t(k)]) x *= scale;
  }
  return TransmitStrategy<Real>(std::move(m));
}

template <typename Real>
struct GridResult {
  std::vector<std::vector<Real>> powers;  // per (cell, user)
  Real weighted_sum_rate = 0;
};

/// Exhaustive search over per-user powers on a uniform grid of [0, P_k].
///
/// SISO only, at most three users in total. Combinations that violate a
/// cell's power budget are skipped.
template <typename Real>
GridResult<Real> grid_search_siso(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                                  int grid_points = 200) {
  config.validate();
  if (grid_points < 2) throw std::invalid_argument("grid_search_siso: grid_points must be >= 2");
  std::vector<UserIndex> users;
  for (int k = 0; k < config.num_cells(); ++k) {
    if (config.tx(k) != 1) throw std::invalid_argument("grid_search_siso: transmitters must be single-antenna");
    for (int i = 0; i < config.num_users(k); ++i) {
      if (config.rx({k, i}) != 1) throw std::invalid_argument("grid_search_siso: receivers must be single-antenna");
      users.push_back({k, i});
    }
  }
  if (users.size() > 3) throw std::invalid_argument("grid_search_siso: at most 3 users supported");

  const std::size_t n = users.size();
  // gain[r][t] = |h from transmitter of user t to receiver r|^2
  std::vector<std::vector<Real>> gain(n, std::vector<Real>(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t t = 0; t < n; ++t) gain[r][t] = std::norm(channels(users[t].cell, users[r].cell, users[r].user)(0, 0));

  std::vector<int> idx(n, 0);
  std::vector<Real> p(n, 0);
  GridResult<Real> best;
  best.weighted_sum_rate = -1;
  std::vector<Real> best_p(n, 0);
  std::vector<Real> cell_load(std::size_t(config.num_cells()));
  while (true) {
    for (std::size_t u = 0; u < n; ++u) {
      p[u] = config.power[std::size_t(users[u].cell)] * Real(idx[u]) / Real(grid_points - 1);
    }
    std::fill(cell_load.begin(), cell_load.end(), Real(0));
    for (std::size_t u = 0; u < n; ++u) cell_load[std::size_t(users[u].cell)] += p[u];
    bool ok = true;
    for (int k = 0; k < config.num_cells(); ++k) {
      if (cell_load[std::size_t(k)] > config.power[std::size_t(k)] * (1 + 1e-12)) ok = false;
    }
    if (ok) {
      Real wsr = 0;
      for (std::size_t r = 0; r < n; ++r) {
        Real interference = config.noise_variance;
        for (std::size_t t = 0; t < n; ++t)
          if (t != r) interference += gain[r][t] * p[t];
        wsr += config.weight(users[r]) * std::log2(Real(1) + gain[r][r] * p[r] / interference);
      }
      if (wsr > best.weighted_sum_rate) best.weighted_sum_rate = wsr, best_p = p;
    }
    std::size_t d = 0;
    while (d < n && ++idx[d] == grid_points) idx[d++] = 0;
    if (d == n) break;
  }
  best.powers.assign(std::size_t(config.num_cells()), {});
  for (int k = 0; k < config.num_cells(); ++k) best.powers[std::size_t(k)].assign(std::size_t(config.num_users(k)), 0);
  for (std::size_t u = 0; u < n; ++u) best.powers[std::size_t(users[u].cell)][std::size_t(users[u].user)] = best_p[u];
  return best;
}

template <typename Real>
struct WaterFillingResult {
  CMatrix<Real> covariance;
  Real capacity = 0;  // bits
  RVector<Real> gains;
  RVector<Real> powers;
};

/// Capacity-achieving covariance of a single link H (m x n) under tr(X) <= P.
template <typename Real>
WaterFillingResult<Real> water_filling(const CMatrix<Real>& h, Real power, Real noise_variance) {
  if (!(power > 0) || !(noise_variance > 0)) throw std::invalid_argument("water_filling: power and noise must be positive");
  const CMatrix<Real> gram = hermitian_part(CMatrix<Real>(h.adjoint() * h / noise_variance));
  EigenDecomposition<Real> eig(gram);
  const Eigen::Index n = eig.eigenvalues.size();

  // Eigenvalues ascend; fill the strongest modes first.
  RVector<Real> gains = eig.eigenvalues.cwiseMax(Real(0));
  RVector<Real> p = RVector<Real>::Zero(n);
  Real level = 0;
  Real inverse_sum = 0;
  int active = 0;
  for (Eigen::Index r = n - 1; r >= 0; --r) {
    if (gains(r) <= Real(0)) break;
    const Real candidate = (power + inverse_sum + Real(1) / gains(r)) / Real(active + 1);
    if (candidate <= Real(1) / gains(r)) break;
    inverse_sum += Real(1) / gains(r);
    ++active;
    level = candidate;
  }
  Real capacity = 0;
  for (Eigen::Index r = n - 1; r >= n - active; --r) {
    p(r) = std::max(Real(0), level - Real(1) / gains(r));
    capacity += std::log2(Real(1) + gains(r) * p(r));
  }
  return {eig.reconstruct(p), capacity, gains, p};
}

}  // namespace gbd

#endif  // GBD_BASELINES_HPP
