#ifndef GBD_NETWORK_HPP
#define GBD_NETWORK_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gbd/hermitian.hpp"

namespace gbd {

/// 1 / ln 2, converts nats to bits.
template <typename Real>
inline constexpr Real kBitsPerNat = Real(1) / std::numbers::ln2_v<Real>;

struct UserIndex {
  int cell = 0;
  int user = 0;
  friend bool operator==(const UserIndex&, const UserIndex&) = default;
};

/// Cells, users, antenna counts, power budgets, noise and rate weights.
template <typename Real>
struct NetworkConfig {
  std::vector<int> users_per_cell;
  std::vector<int> tx_antennas;               // n_k
  std::vector<std::vector<int>> rx_antennas;  // m_ki
  std::vector<Real> power;                    // P_k
  Real noise_variance = 1;                    // sigma^2
  std::vector<std::vector<Real>> weights;     // lambda_ki

  int num_cells() const { return int(users_per_cell.size()); }
  int num_users(int cell) const { return users_per_cell.at(std::size_t(cell)); }
  int total_users() const {
    int n = 0;
    for (int u : users_per_cell) n += u;
    return n;
  }
  Real weight(UserIndex u) const { return weights[std::size_t(u.cell)][std::size_t(u.user)]; }
  int tx(int cell) const { return tx_antennas[std::size_t(cell)]; }
  int rx(UserIndex u) const { return rx_antennas[std::size_t(u.cell)][std::size_t(u.user)]; }

  bool contains(UserIndex u) const {
    return u.cell >= 0 && u.cell < num_cells() && u.user >= 0 && u.user < num_users(u.cell);
  }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const {
    const std::size_t k = users_per_cell.size();
    if (k == 0) throw std::invalid_argument("users_per_cell: at least one cell is required");
    if (tx_antennas.size() != k) throw std::invalid_argument("tx_antennas: expected one entry per cell");
    if (rx_antennas.size() != k) throw std::invalid_argument("rx_antennas: expected one list per cell");
    if (power.size() != k) throw std::invalid_argument("power: expected one entry per cell");
    if (weights.size() != k) throw std::invalid_argument("weights: expected one list per cell");
    if (!(noise_variance > 0) || !std::isfinite(double(noise_variance))) {
      throw std::invalid_argument("noise_variance: must be positive and finite");
    }
    bool any_positive = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (users_per_cell[c] < 1) throw std::invalid_argument("users_per_cell: each cell needs >= 1 user");
      if (tx_antennas[c] < 1) throw std::invalid_argument("tx_antennas: must be >= 1");
      if (!(power[c] > 0) || !std::isfinite(double(power[c]))) {
        throw std::invalid_argument("power: must be positive and finite");
      }
      if (rx_antennas[c].size() != std::size_t(users_per_cell[c])) {
        throw std::invalid_argument("rx_antennas: expected one entry per user");
      }
      if (weights[c].size() != std::size_t(users_per_cell[c])) {
        throw std::invalid_argument("weights: expected one entry per user");
      }
      for (int m : rx_antennas[c]) {
        if (m < 1) throw std::invalid_argument("rx_antennas: must be >= 1");
      }
      for (Real w : weights[c]) {
        if (!(w >= 0) || !std::isfinite(double(w))) {
          throw std::invalid_argument("weights: must be nonnegative and finite");
        }
        any_positive = any_positive || w > 0;
      }
    }
    if (!any_positive) throw std::invalid_argument("weights: at least one weight must be positive");
  }

  /// Identical cells with unit weights.
  static NetworkConfig uniform(int cells, int users, int n, int m, Real p, Real sigma2) {
    NetworkConfig c;
    c.users_per_cell.assign(std::size_t(cells), users);
    c.tx_antennas.assign(std::size_t(cells), n);
    c.rx_antennas.assign(std::size_t(cells), std::vector<int>(std::size_t(users), m));
    c.power.assign(std::size_t(cells), p);
    c.noise_variance = sigma2;
    c.weights.assign(std::size_t(cells), std::vector<Real>(std::size_t(users), Real(1)));
    return c;
  }
};

/// One matrix per user, indexed (cell, user). Tag distinguishes X, Y, Gamma and gradients.
template <typename Real, typename Tag>
class UserMatrices {
 public:
  using Matrix = CMatrix<Real>;

  UserMatrices() = default;
  explicit UserMatrices(std::vector<std::vector<Matrix>> m) : m_(std::move(m)) {}

  Matrix& operator()(int k, int i) { return m_[std::size_t(k)][std::size_t(i)]; }
  const Matrix& operator()(int k, int i) const { return m_[std::size_t(k)][std::size_t(i)]; }
  Matrix& operator()(UserIndex u) { return (*this)(u.cell, u.user); }
  const Matrix& operator()(UserIndex u) const { return (*this)(u.cell, u.user); }

  std::vector<Matrix>& cell(int k) { return m_[std::size_t(k)]; }
  const std::vector<Matrix>& cell(int k) const { return m_[std::size_t(k)]; }
  int num_cells() const { return int(m_.size()); }
  int num_users(int k) const { return int(m_[std::size_t(k)].size()); }

  template <typename F>
  void for_each(F&& f) {
    for (auto& c : m_)
      for (auto& x : c) f(x);
  }
  template <typename F>
  void for_each(F&& f) const {
    for (const auto& c : m_)
      for (const auto& x : c) f(x);
  }

  /// Same shape, all zeros.
  UserMatrices zeros_like() const {
    UserMatrices out(*this);
    out.for_each([](Matrix& x) { x.setZero(); });
    return out;
  }

  UserMatrices& operator+=(const UserMatrices& o) {
    zip(o, [](Matrix& a, const Matrix& b) { a += b; });
    return *this;
  }
  UserMatrices& operator-=(const UserMatrices& o) {
    zip(o, [](Matrix& a, const Matrix& b) { a -= b; });
    return *this;
  }
  UserMatrices& operator*=(Real s) {
    for_each([s](Matrix& a) { a *= s; });
    return *this;
  }
  friend UserMatrices operator+(UserMatrices a, const UserMatrices& b) { return a += b; }
  friend UserMatrices operator-(UserMatrices a, const UserMatrices& b) { return a -= b; }
  friend UserMatrices operator*(Real s, UserMatrices a) { return a *= s; }

  /// Sum of Re tr(A^H B) over users.
  friend Real inner(const UserMatrices& a, const UserMatrices& b) {
    Real s = 0;
    for (std::size_t k = 0; k < a.m_.size(); ++k)
      for (std::size_t i = 0; i < a.m_[k].size(); ++i) s += real_inner(a.m_[k][i], b.m_[k][i]);
    return s;
  }
  friend Real squared_norm(const UserMatrices& a) { return inner(a, a); }

  friend bool operator==(const UserMatrices&, const UserMatrices&) = default;

 private:
  template <typename F>
  void zip(const UserMatrices& o, F&& f) {
    if (o.m_.size() != m_.size()) throw std::invalid_argument("UserMatrices: cell count mismatch");
    for (std::size_t k = 0; k < m_.size(); ++k) {
      if (o.m_[k].size() != m_[k].size()) throw std::invalid_argument("UserMatrices: user count mismatch");
      for (std::size_t i = 0; i < m_[k].size(); ++i) f(m_[k][i], o.m_[k][i]);
    }
  }

  std::vector<std::vector<Matrix>> m_;
};

struct TransmitTag {};
template <typename Real>
using TransmitStrategy = UserMatrices<Real, TransmitTag>;

/// Flat-fading channels H_{jki}: transmitter cell j to user i of cell k.
template <typename Real>
class ChannelSet {
 public:
  ChannelSet() = default;

  explicit ChannelSet(const NetworkConfig<Real>& config) : cells_(config.num_cells()) {
    for (int k = 0; k < cells_; ++k) offsets_.push_back(total_users_), total_users_ += config.num_users(k);
    h_.resize(std::size_t(cells_ * total_users_));
    for (int j = 0; j < cells_; ++j)
      for (int k = 0; k < cells_; ++k)
        for (int i = 0; i < config.num_users(k); ++i)
          (*this)(j, k, i) = CMatrix<Real>::Zero(config.rx({k, i}), config.tx(j));
  }

  CMatrix<Real>& operator()(int j, int k, int i) { return h_[slot(j, k, i)]; }
  const CMatrix<Real>& operator()(int j, int k, int i) const { return h_[slot(j, k, i)]; }

  int num_cells() const { return cells_; }

  bool all_finite() const {
    for (const auto& h : h_)
      if (!h.allFinite()) return false;
    return true;
  }

  friend bool operator==(const ChannelSet&, const ChannelSet&) = default;

 private:
  std::size_t slot(int j, int k, int i) const {
    return std::size_t(j * total_users_ + offsets_[std::size_t(k)] + i);
  }

  int cells_ = 0;
  int total_users_ = 0;
  std::vector<int> offsets_;
  std::vector<CMatrix<Real>> h_;
};

/// Draws i.i.d. CN(0, 1) entries; deterministic in the seed.
template <typename Real>
ChannelSet<Real> generate_channels(const NetworkConfig<Real>& config, std::uint64_t seed) {
  config.validate();
  ChannelSet<Real> channels(config);
  std::mt19937_64 rng(seed);
  std::normal_distribution<Real> normal(Real(0), std::sqrt(Real(0.5)));
  for (int j = 0; j < config.num_cells(); ++j)
    for (int k = 0; k < config.num_cells(); ++k)
      for (int i = 0; i < config.num_users(k); ++i) {
        auto& h = channels(j, k, i);
        for (Eigen::Index c = 0; c < h.cols(); ++c)
          for (Eigen::Index r = 0; r < h.rows(); ++r) h(r, c) = Complex<Real>(normal(rng), normal(rng));
      }
  return channels;
}

/// X_ki = P_k / (|U_k| n_k) I for every user.
template <typename Real>
TransmitStrategy<Real> uniform_strategy(const NetworkConfig<Real>& config) {
  std::vector<std::vector<CMatrix<Real>>> m(std::size_t(config.num_cells()));
  for (int k = 0; k < config.num_cells(); ++k) {
    const int n = config.tx(k);
    const Real p = config.power[std::size_t(k)] / Real(config.num_users(k) * n);
    for (int i = 0; i < config.num_users(k); ++i) m[std::size_t(k)].push_back(p * CMatrix<Real>::Identity(n, n));
  }
  return TransmitStrategy<Real>(std::move(m));
}

template <typename Real>
TransmitStrategy<Real> zero_strategy(const NetworkConfig<Real>& config) {
  return uniform_strategy(config).zeros_like();
}

namespace detail {

template <typename Real>
void check_user(const NetworkConfig<Real>& config, UserIndex u) {
  if (!config.contains(u)) {
    throw std::out_of_range("user index (" + std::to_string(u.cell) + ", " + std::to_string(u.user) +
                            ") out of range");
  }
}

/// Sum of a cell's transmit covariances.
template <typename Real>
CMatrix<Real> cell_sum(const TransmitStrategy<Real>& x, int k) {
  CMatrix<Real> s = x(k, 0);
  for (int i = 1; i < x.num_users(k); ++i) s += x(k, i);
  return s;
}

}  // namespace detail

/// Received covariance sigma^2 I + sum over every transmitted signal, own signal included.
template <typename Real>
CMatrix<Real> total_covariance(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                               const TransmitStrategy<Real>& x, UserIndex target) {
  detail::check_user(config, target);
  const int m = config.rx(target);
  CMatrix<Real> t = config.noise_variance * CMatrix<Real>::Identity(m, m);
  for (int j = 0; j < config.num_cells(); ++j) {
    const auto& h = channels(j, target.cell, target.user);
    t.noalias() += h * detail::cell_sum(x, j) * h.adjoint();
  }
  return hermitian_part(t);
}

/// H_kki X_ki H_kki^H.
template <typename Real>
CMatrix<Real> signal_covariance(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                                const TransmitStrategy<Real>& x, UserIndex target) {
  detail::check_user(config, target);
  const auto& h = channels(target.cell, target.cell, target.user);
  CMatrix<Real> s = h * x(target) * h.adjoint();
  return hermitian_part(s);
}

/// Interference-plus-noise covariance Z_ki.
template <typename Real>
CMatrix<Real> interference_covariance(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                                      const TransmitStrategy<Real>& x, UserIndex target) {
  detail::check_user(config, target);
  const int m = config.rx(target);
  CMatrix<Real> z = config.noise_variance * CMatrix<Real>::Identity(m, m);
  for (int j = 0; j < config.num_cells(); ++j) {
    const auto& h = channels(j, target.cell, target.user);
    CMatrix<Real> tx = CMatrix<Real>::Zero(config.tx(j), config.tx(j));
    for (int l = 0; l < config.num_users(j); ++l) {
      if (j == target.cell && l == target.user) continue;
      tx += x(j, l);
    }
    z.noalias() += h * tx * h.adjoint();
  }
  return hermitian_part(z);
}

/// log2 det(I + Z^{-1} H X H^H), in bits per channel use.
template <typename Real>
Real achievable_rate(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                     const TransmitStrategy<Real>& x, UserIndex target) {
  const CMatrix<Real> z = interference_covariance(config, channels, x, target);
  const CMatrix<Real> t = z + signal_covariance(config, channels, x, target);
  try {
    const Real nats = logdet(t) - logdet(z);
    return std::max(Real(0), nats * kBitsPerNat<Real>);
  } catch (const std::domain_error& e) {
    throw std::runtime_error(std::string("achievable_rate: numerical failure: ") + e.what());
  }
}

template <typename Real>
std::vector<std::vector<Real>> all_rates(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                                         const TransmitStrategy<Real>& x) {
  std::vector<std::vector<Real>> r(std::size_t(config.num_cells()));
  for (int k = 0; k < config.num_cells(); ++k)
    for (int i = 0; i < config.num_users(k); ++i) r[std::size_t(k)].push_back(achievable_rate(config, channels, x, {k, i}));
  return r;
}

template <typename Real>
Real weighted_sum_rate(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                       const TransmitStrategy<Real>& x) {
  Real s = 0;
  for (int k = 0; k < config.num_cells(); ++k)
    for (int i = 0; i < config.num_users(k); ++i) {
      const Real w = config.weight({k, i});
      if (w != Real(0)) s += w * achievable_rate(config, channels, x, {k, i});
    }
  return s;
}

/// Gradient of the weighted sum rate (bits) with respect to each X_jl.
template <typename Real>
TransmitStrategy<Real> weighted_sum_rate_gradient(const NetworkConfig<Real>& config,
                                                  const ChannelSet<Real>& channels,
                                                  const TransmitStrategy<Real>& x) {
  TransmitStrategy<Real> g = x.zeros_like();
  for (int k = 0; k < config.num_cells(); ++k)
    for (int i = 0; i < config.num_users(k); ++i) {
      const Real w = config.weight({k, i}) * kBitsPerNat<Real>;
      if (w == Real(0)) continue;
      const CMatrix<Real> t_inv = inverse_pd(total_covariance(config, channels, x, {k, i}));
      const CMatrix<Real> z_inv = inverse_pd(interference_covariance(config, channels, x, {k, i}));
      const CMatrix<Real> shared = w * (t_inv - z_inv);
      for (int j = 0; j < config.num_cells(); ++j) {
        const auto& h = channels(j, k, i);
        const CMatrix<Real> term = h.adjoint() * shared * h;
        for (int l = 0; l < config.num_users(j); ++l) {
          if (j == k && l == i) g(j, l) += w * (h.adjoint() * t_inv * h);
          else g(j, l) += term;
        }
      }
    }
  g.for_each([](CMatrix<Real>& m) { m = hermitian_part(m); });
  return g;
}

/// Outcome of a feasibility check with the size of each violation.
struct FeasibilityReport {
  bool feasible = true;
  double max_hermitian_deviation = 0;
  double min_eigenvalue = 0;
  double worst_power_excess = 0;  // max_k (sum_i tr X_ki - P_k), <= 0 when satisfied
  std::vector<std::string> violations;

  std::string summary() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) os << (i ? "; " : "") << violations[i];
    return os.str();
  }
};

struct FeasibilityTolerance {
  double hermitian = 1e-10;
  double eigenvalue = -1e-9;
  double power_relative = 1e-9;
};

/// Checks X_ki Hermitian, PSD, and per-cell sum of traces within P_k.
template <typename Real>
FeasibilityReport is_feasible(const NetworkConfig<Real>& config, const TransmitStrategy<Real>& x,
                              FeasibilityTolerance tol = {}) {
  if (x.num_cells() != config.num_cells()) throw std::invalid_argument("is_feasible: cell count mismatch");
  FeasibilityReport rep;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  rep.worst_power_excess = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < config.num_cells(); ++k) {
    if (x.num_users(k) != config.num_users(k)) throw std::invalid_argument("is_feasible: user count mismatch");
    Real trace_sum = 0;
    for (int i = 0; i < config.num_users(k); ++i) {
      const auto& m = x(k, i);
      if (m.rows() != config.tx(k) || m.cols() != config.tx(k)) {
        throw std::invalid_argument("is_feasible: covariance shape mismatch");
      }
      const std::string who = "X(" + std::to_string(k) + "," + std::to_string(i) + ")";
      const double dev = double(hermitian_deviation(m));
      rep.max_hermitian_deviation = std::max(rep.max_hermitian_deviation, dev);
      if (dev > tol.hermitian) {
        rep.violations.push_back(who + " not Hermitian by " + std::to_string(dev));
      }
      const double min_eig = double(EigenDecomposition<Real>(m).min_eigenvalue());
      rep.min_eigenvalue = std::min(rep.min_eigenvalue, min_eig);
      if (min_eig < tol.eigenvalue) {
        rep.violations.push_back(who + " not PSD, min eigenvalue " + std::to_string(min_eig));
      }
      trace_sum += m.trace().real();
    }
    const double p = double(config.power[std::size_t(k)]);
    const double excess = double(trace_sum) - p;
    rep.worst_power_excess = std::max(rep.worst_power_excess, excess);
    if (double(trace_sum) > p * (1 + tol.power_relative)) {
      rep.violations.push_back("cell " + std::to_string(k) + " power exceeded by " + std::to_string(excess));
    }
  }
  rep.feasible = rep.violations.empty();
  return rep;
}

/// Projects every cell's covariance tuple onto its power-constrained PSD set.
template <typename Real>
TransmitStrategy<Real> project_strategy(const NetworkConfig<Real>& config, const TransmitStrategy<Real>& x) {
  TransmitStrategy<Real> out(x);
  for (int k = 0; k < config.num_cells(); ++k) {
    out.cell(k) = project_cell<Real>(x.cell(k), config.power[std::size_t(k)]);
  }
  return out;
}

}  // namespace gbd

#endif  // GBD_NETWORK_HPP
