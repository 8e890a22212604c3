#ifndef GBD_BOUNDS_HPP
#define GBD_BOUNDS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

#include "gbd/network.hpp"

namespace gbd {

struct AuxiliaryTag {};
struct DualTag {};

/// Per-user auxiliary matrices Y_ki, positive definite.
template <typename Real>
using AuxiliaryVars = UserMatrices<Real, AuxiliaryTag>;

/// Per-user multipliers Gamma_ki, Hermitian PSD.
template <typename Real>
using DualVars = UserMatrices<Real, DualTag>;

/// Smallest admissible eigenvalue of Y_ki.
template <typename Real>
inline constexpr Real kAuxiliaryFloor = Real(1e-9);

template <typename Real>
struct GradientPack {
  TransmitStrategy<Real> dX;
  AuxiliaryVars<Real> dY;
};

enum class GradientKind { lagrangian, lin_lb };

inline GradientKind parse_gradient_kind(std::string_view s) {
  if (s == "lagrangian") return GradientKind::lagrangian;
  if (s == "lin_lb" || s == "lin-lb") return GradientKind::lin_lb;
  throw std::invalid_argument("unknown gradient kind '" + std::string(s) + "'");
}

/// Received covariances of every user at one strategy.
template <typename Real>
struct CovarianceSnapshot {
  std::vector<std::vector<CMatrix<Real>>> z;  // interference plus noise
  std::vector<std::vector<CMatrix<Real>>> t;  // z plus own signal

  CovarianceSnapshot(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                     const TransmitStrategy<Real>& x)
      : z(std::size_t(config.num_cells())), t(std::size_t(config.num_cells())) {
    std::vector<CMatrix<Real>> sums;
    for (int j = 0; j < config.num_cells(); ++j) sums.push_back(detail::cell_sum(x, j));
    for (int k = 0; k < config.num_cells(); ++k)
      for (int i = 0; i < config.num_users(k); ++i) {
        const int m = config.rx({k, i});
        CMatrix<Real> total = config.noise_variance * CMatrix<Real>::Identity(m, m);
        for (int j = 0; j < config.num_cells(); ++j) {
          const auto& h = channels(j, k, i);
          total.noalias() += h * sums[std::size_t(j)] * h.adjoint();
        }
        total = hermitian_part(total);
        const auto& hk = channels(k, k, i);
        CMatrix<Real> own = hk * x(k, i) * hk.adjoint();
        z[std::size_t(k)].push_back(hermitian_part(CMatrix<Real>(total - own)));
        t[std::size_t(k)].push_back(std::move(total));
      }
  }

  const CMatrix<Real>& Z(UserIndex u) const { return z[std::size_t(u.cell)][std::size_t(u.user)]; }
  const CMatrix<Real>& T(UserIndex u) const { return t[std::size_t(u.cell)][std::size_t(u.user)]; }
};

namespace detail {

template <typename Real>
Real logdet_checked(const CMatrix<Real>& a, const char* what) {
  try {
    return logdet(a);
  } catch (const std::domain_error&) {
    throw std::domain_error(std::string(what) + " is not positive definite");
  }
}

template <typename Real>
Real lower_bound_rate_from(const CovarianceSnapshot<Real>& cov, UserIndex u, const CMatrix<Real>& y) {
  return (logdet_checked(cov.T(u), "total covariance") + logdet_checked(y, "auxiliary Y")) *
         kBitsPerNat<Real>;
}

/// Re tr(Gamma (I - Z Y)).
template <typename Real>
Real dual_term(const CMatrix<Real>& gamma, const CMatrix<Real>& z, const CMatrix<Real>& y) {
  const CMatrix<Real> zy = z * y;
  return (gamma.trace() - (gamma * zy).trace()).real();
}

template <typename Real>
Real lagrangian_from(const NetworkConfig<Real>& config, const CovarianceSnapshot<Real>& cov,
                     const AuxiliaryVars<Real>& y, const DualVars<Real>& gamma) {
  Real total = 0;
  for (int k = 0; k < config.num_cells(); ++k)
    for (int i = 0; i < config.num_users(k); ++i) {
      const UserIndex u{k, i};
      total += config.weight(u) * lower_bound_rate_from(cov, u, y(u));
      total += dual_term(gamma(u), cov.Z(u), y(u));
    }
  return total;
}

/// s w (Y^t)^{-1} - Gamma Z(X), the Y-gradient of the Lagrangian at the anchor.
template <typename Real>
CMatrix<Real> anchor_slope(Real weight, const CMatrix<Real>& anchor_y, const CMatrix<Real>& gamma,
                           const CMatrix<Real>& z) {
  CMatrix<Real> inv;
  try {
    inv = inverse_pd(anchor_y);
  } catch (const std::domain_error&) {
    throw std::domain_error("anchor Y is not positive definite");
  }
  return weight * kBitsPerNat<Real> * inv - gamma * z;
}

template <typename Real>
void check_shapes(const NetworkConfig<Real>& config, const AuxiliaryVars<Real>& y, const char* what) {
  if (y.num_cells() != config.num_cells()) throw std::invalid_argument(std::string(what) + ": cell count mismatch");
  for (int k = 0; k < config.num_cells(); ++k) {
    if (y.num_users(k) != config.num_users(k)) throw std::invalid_argument(std::string(what) + ": user count mismatch");
    for (int i = 0; i < config.num_users(k); ++i) {
      const int m = config.rx({k, i});
      if (y(k, i).rows() != m || y(k, i).cols() != m) {
        throw std::invalid_argument(std::string(what) + ": matrix shape mismatch");
      }
    }
  }
}

}  // namespace detail

/// log2|Z + H X H^H| + log2|Y| for one user.
template <typename Real>
Real lower_bound_rate(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                      const TransmitStrategy<Real>& x, const CMatrix<Real>& y, UserIndex target) {
  detail::check_user(config, target);
  const CMatrix<Real> t = total_covariance(config, channels, x, target);
  return (detail::logdet_checked(t, "total covariance") + detail::logdet_checked(y, "auxiliary Y")) *
         kBitsPerNat<Real>;
}

/// Weighted sum of lower-bound rates plus Re tr(Gamma (I - Z Y)) per user.
template <typename Real>
Real lagrangian(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                const TransmitStrategy<Real>& x, const AuxiliaryVars<Real>& y, const DualVars<Real>& gamma) {
  detail::check_shapes(config, y, "lagrangian");
  const CovarianceSnapshot<Real> cov(config, channels, x);
  return detail::lagrangian_from(config, cov, y, gamma);
}

/// First-order expansion of the Lagrangian in Y about anchor_y.
template <typename Real>
Real lin(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels, const TransmitStrategy<Real>& x,
         const AuxiliaryVars<Real>& y, const AuxiliaryVars<Real>& anchor_y, const DualVars<Real>& gamma) {
  detail::check_shapes(config, y, "lin");
  detail::check_shapes(config, anchor_y, "lin");
  const CovarianceSnapshot<Real> cov(config, channels, x);
  Real total = detail::lagrangian_from(config, cov, anchor_y, gamma);
  for (int k = 0; k < config.num_cells(); ++k)
    for (int i = 0; i < config.num_users(k); ++i) {
      const UserIndex u{k, i};
      const CMatrix<Real> slope = detail::anchor_slope(config.weight(u), anchor_y(u), gamma(u), cov.Z(u));
      total += (slope * (y(u) - anchor_y(u))).trace().real();
    }
  return total;
}

/// Residual herm(s w (Y^t)^{-1} - Gamma Z) - (Y - Y^t) of the quadratic lower bound.
template <typename Real>
CMatrix<Real> lin_lb_residual(Real weight, const CMatrix<Real>& z, const CMatrix<Real>& y,
                              const CMatrix<Real>& anchor_y, const CMatrix<Real>& gamma) {
  return hermitian_part(detail::anchor_slope(weight, anchor_y, gamma, z)) - (y - anchor_y);
}

/// Lagrangian at the anchor minus half the squared residual norms; jointly concave in (X, Y).
template <typename Real>
Real lin_lb(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels, const TransmitStrategy<Real>& x,
            const AuxiliaryVars<Real>& y, const AuxiliaryVars<Real>& anchor_y, const DualVars<Real>& gamma) {
  detail::check_shapes(config, y, "lin_lb");
  detail::check_shapes(config, anchor_y, "lin_lb");
  const CovarianceSnapshot<Real> cov(config, channels, x);
  Real total = detail::lagrangian_from(config, cov, anchor_y, gamma);
  for (int k = 0; k < config.num_cells(); ++k)
    for (int i = 0; i < config.num_users(k); ++i) {
      const UserIndex u{k, i};
      total -= Real(0.5) * frob_sq(lin_lb_residual(config.weight(u), cov.Z(u), y(u), anchor_y(u), gamma(u)));
    }
  return total;
}

/// Maximizer over {Y >= floor I} of the quadratic lower bound for fixed X:
/// the floor projection of Y^t + herm(s w (Y^t)^{-1} - Gamma Z(X)).
template <typename Real>
AuxiliaryVars<Real> optimal_auxiliary(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                                      const TransmitStrategy<Real>& x, const AuxiliaryVars<Real>& anchor_y,
                                      const DualVars<Real>& gamma, Real floor = kAuxiliaryFloor<Real>) {
  detail::check_shapes(config, anchor_y, "optimal_auxiliary");
  const CovarianceSnapshot<Real> cov(config, channels, x);
  AuxiliaryVars<Real> y = anchor_y;
  for (int k = 0; k < config.num_cells(); ++k)
    for (int i = 0; i < config.num_users(k); ++i) {
      const UserIndex u{k, i};
      const CMatrix<Real> target =
          anchor_y(u) + hermitian_part(detail::anchor_slope(config.weight(u), anchor_y(u), gamma(u), cov.Z(u)));
      y(u) = project_eigen_floor(target, floor);
    }
  return y;
}

/// Analytic gradients w.r.t. every X_ki and Y_ki, Hermitian-symmetrized.
///
/// For kind == lagrangian the point is (X, Y, Gamma) and anchor_y is unused.
/// For kind == lin_lb the Lagrangian part is evaluated at anchor_y.
template <typename Real>
GradientPack<Real> grad(GradientKind kind, const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                        const TransmitStrategy<Real>& x, const AuxiliaryVars<Real>& y,
                        const AuxiliaryVars<Real>& anchor_y, const DualVars<Real>& gamma) {
  detail::check_shapes(config, y, "grad");
  if (kind == GradientKind::lin_lb) detail::check_shapes(config, anchor_y, "grad");
  const CovarianceSnapshot<Real> cov(config, channels, x);
  const AuxiliaryVars<Real>& y_eval = kind == GradientKind::lagrangian ? y : anchor_y;

  GradientPack<Real> g{x.zeros_like(), y.zeros_like()};
  for (int k = 0; k < config.num_cells(); ++k)
    for (int i = 0; i < config.num_users(k); ++i) {
      const UserIndex u{k, i};
      const Real sw = config.weight(u) * kBitsPerNat<Real>;
      const CMatrix<Real>& gm = gamma(u);
      const CMatrix<Real>& yu = y_eval(u);

      // Matrix sandwiched by H^H (.) H for interfering covariances.
      CMatrix<Real> cross = -hermitian_part(CMatrix<Real>(yu * gm));
      CMatrix<Real> own_weight = CMatrix<Real>::Zero(cov.T(u).rows(), cov.T(u).cols());
      if (sw != Real(0)) own_weight = sw * inverse_pd(cov.T(u));

      if (kind == GradientKind::lagrangian) {
        CMatrix<Real> dy = -hermitian_part(CMatrix<Real>(gm * cov.Z(u)));
        if (sw != Real(0)) {
          try {
            dy += sw * inverse_pd(yu);
          } catch (const std::domain_error&) {
            throw std::domain_error("auxiliary Y is not positive definite");
          }
        }
        g.dY(u) = dy;
      } else {
        const CMatrix<Real> r = lin_lb_residual(config.weight(u), cov.Z(u), y(u), anchor_y(u), gm);
        g.dY(u) = r;
        cross += hermitian_part(CMatrix<Real>(r * gm));
      }
      cross += own_weight;

      for (int j = 0; j < config.num_cells(); ++j) {
        const auto& h = channels(j, k, i);
        const CMatrix<Real> hc = h.adjoint();
        const CMatrix<Real> term = hc * cross * h;
        for (int l = 0; l < config.num_users(j); ++l) {
          if (j == k && l == i) g.dX(j, l) += hc * own_weight * h;
          else g.dX(j, l) += term;
        }
      }
    }
  g.dX.for_each([](CMatrix<Real>& m) { m = hermitian_part(m); });
  g.dY.for_each([](CMatrix<Real>& m) { m = hermitian_part(m); });
  return g;
}

}  // namespace gbd

#endif  // GBD_BOUNDS_HPP
