#ifndef GBD_MASTER_HPP
#define GBD_MASTER_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gbd/bounds.hpp"

namespace gbd {

struct SolverSettings {
  int max_inner_iters = 500;
  double grad_norm_tol = 1e-7;
  double backtrack = 0.5;             // beta
  double sufficient_increase = 1e-4;  // Armijo constant c
  double initial_step = 1.0;
  int max_halvings = 60;
  double max_step = 1e6;
  bool spectral_step = true;  // Barzilai-Borwein trial step instead of doubling the last accepted one

  void validate() const {
    if (max_inner_iters < 1) throw std::invalid_argument("max_inner_iters: must be positive");
    if (!(grad_norm_tol > 0)) throw std::invalid_argument("grad_norm_tol: must be positive");
    if (!(backtrack > 0 && backtrack < 1)) throw std::invalid_argument("backtrack: must lie in (0, 1)");
    if (!(sufficient_increase > 0 && sufficient_increase < 1)) {
      throw std::invalid_argument("sufficient_increase: must lie in (0, 1)");
    }
    if (!(initial_step > 0)) throw std::invalid_argument("initial_step: must be positive");
    if (max_halvings < 1) throw std::invalid_argument("max_halvings: must be positive");
  }
};

template <typename Real>
struct MasterResult {
  TransmitStrategy<Real> x;
  std::optional<AuxiliaryVars<Real>> y;  // joint master only
  Real objective = 0;
  Real initial_objective = 0;
  int iterations = 0;
  Real projected_grad_norm = 0;
  bool line_search_failed = false;
  std::vector<Real> objective_history;  // one entry per accepted iterate, starting at the init
};

template <typename Real, typename Point>
struct AscentOutcome {
  Point point;
  Real value = 0;
  Real initial_value = 0;
  int iterations = 0;
  Real projected_grad_norm = 0;
  bool line_search_failed = false;
  std::vector<Real> history;
};

/// Projected gradient ascent with Armijo backtracking on a concave objective.
///
/// Stops when ||x - P(x + grad)|| <= tol or after max_inner_iters. The first
/// trial step of an iteration is the Barzilai-Borwein step when available,
/// otherwise twice the previously accepted one.
template <typename Real, typename Point, typename Value, typename Gradient, typename Project>
AscentOutcome<Real, Point> projected_gradient_ascent(Point x, Value&& value, Gradient&& gradient,
                                                     Project&& project, const SolverSettings& settings) {
  settings.validate();
  AscentOutcome<Real, Point> out;
  out.value = value(x);
  out.point = x;
  out.initial_value = out.value;
  out.history.push_back(out.value);
  Real fx = out.value;
  Real step = Real(settings.initial_step);
  bool first = true;
  std::optional<Point> prev_x;
  std::optional<Point> prev_g;

  auto projected_norm = [&](const Point& p, const Point& g) {
    return std::sqrt(std::max(Real(0), squared_norm(Point(p - project(p + g)))));
  };

  for (int it = 0; it < settings.max_inner_iters; ++it) {
    const Point g = gradient(x);
    const Real pg = projected_norm(x, g);
    out.projected_grad_norm = pg;
    if (pg <= Real(settings.grad_norm_tol)) break;

    Real alpha = first ? step : std::min(step / Real(settings.backtrack), Real(settings.max_step));
    if (settings.spectral_step && prev_x) {
      // Barzilai-Borwein: <s, s> / -<s, y> with s, y the iterate and gradient differences.
      const Point s = x - *prev_x;
      const Real curvature = -inner(s, Point(g - *prev_g));
      if (curvature > 0) alpha = std::clamp(squared_norm(s) / curvature, Real(1e-12), Real(settings.max_step));
    }
    first = false;
    bool accepted = false;
    bool stalled = false;
    Point candidate = x;
    Real f_candidate = fx;
    for (int h = 0; h <= settings.max_halvings; ++h) {
      candidate = project(x + alpha * g);
      const Point delta = candidate - x;
      const Real moved = squared_norm(delta);
      if (moved == Real(0)) {
        stalled = true;
        break;
      }
      f_candidate = value(candidate);
      // Rounding slack: near the optimum the required increase drops below the
      // resolution of the objective.
      const Real slack = Real(8) * std::numeric_limits<Real>::epsilon() * (Real(1) + std::abs(fx));
      if (std::isfinite(double(f_candidate)) &&
          f_candidate >= fx + Real(settings.sufficient_increase) * inner(g, delta) - slack) {
        accepted = true;
        break;
      }
      alpha *= Real(settings.backtrack);
    }
    if (stalled) break;
    if (!accepted) {
      out.line_search_failed = true;
      break;
    }
    prev_x = std::move(x);
    prev_g = g;
    x = std::move(candidate);
    fx = f_candidate;
    step = alpha;
    out.iterations = it + 1;
    out.history.push_back(fx);
  }
  if (out.iterations > 0 || out.line_search_failed) out.projected_grad_norm = projected_norm(x, gradient(x));
  out.point = std::move(x);
  out.value = fx;
  return out;
}

/// Maximizes X -> L(X, Y_fixed, Gamma_fixed) over the feasible strategies.
template <typename Real>
MasterResult<Real> solve_master_alg1(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                                     const AuxiliaryVars<Real>& y_fixed, const DualVars<Real>& gamma_fixed,
                                     const TransmitStrategy<Real>& x_init, const SolverSettings& settings = {}) {
  const auto rep = is_feasible(config, x_init);
  if (!rep.feasible) throw std::invalid_argument("solve_master_alg1: infeasible X_init: " + rep.summary());

  auto value = [&](const TransmitStrategy<Real>& x) { return lagrangian(config, channels, x, y_fixed, gamma_fixed); };
  auto gradient = [&](const TransmitStrategy<Real>& x) {
    return grad(GradientKind::lagrangian, config, channels, x, y_fixed, y_fixed, gamma_fixed).dX;
  };
  auto project = [&](const TransmitStrategy<Real>& x) { return project_strategy(config, x); };

  auto run = projected_gradient_ascent<Real>(x_init, value, gradient, project, settings);
  MasterResult<Real> res;
  res.x = std::move(run.point);
  res.objective = run.value;
  res.initial_objective = run.initial_value;
  res.iterations = run.iterations;
  res.projected_grad_norm = run.projected_grad_norm;
  res.line_search_failed = run.line_search_failed;
  res.objective_history = std::move(run.history);
  return res;
}

/// Maximizes the quadratic lower bound of the linearized Lagrangian jointly over
/// X in the feasible set and Y with eigenvalues at least the auxiliary floor.
///
/// Y is eliminated: for fixed X its maximizer is optimal_auxiliary(X), so the
/// ascent runs on the concave reduced function X -> lin_lb(X, Y*(X)), whose
/// X-gradient is the partial gradient at (X, Y*(X)). y_init only enters the
/// reported initial objective.
template <typename Real>
MasterResult<Real> solve_master_alg2(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                                     const AuxiliaryVars<Real>& anchor_y, const DualVars<Real>& gamma_fixed,
                                     const TransmitStrategy<Real>& x_init, const AuxiliaryVars<Real>& y_init,
                                     const SolverSettings& settings = {}) {
  const auto rep = is_feasible(config, x_init);
  if (!rep.feasible) throw std::invalid_argument("solve_master_alg2: infeasible X_init: " + rep.summary());
  const Real floor = kAuxiliaryFloor<Real>;

  auto best_y = [&](const TransmitStrategy<Real>& x) {
    return optimal_auxiliary(config, channels, x, anchor_y, gamma_fixed, floor);
  };
  auto value = [&](const TransmitStrategy<Real>& x) {
    return lin_lb(config, channels, x, best_y(x), anchor_y, gamma_fixed);
  };
  auto gradient = [&](const TransmitStrategy<Real>& x) {
    return grad(GradientKind::lin_lb, config, channels, x, best_y(x), anchor_y, gamma_fixed).dX;
  };
  auto project = [&](const TransmitStrategy<Real>& x) { return project_strategy(config, x); };

  AuxiliaryVars<Real> y0 = y_init;
  y0.for_each([floor](CMatrix<Real>& m) { m = project_eigen_floor(m, floor); });
  const Real joint_initial = lin_lb(config, channels, x_init, y0, anchor_y, gamma_fixed);

  auto run = projected_gradient_ascent<Real>(x_init, value, gradient, project, settings);
  MasterResult<Real> res;
  res.y = best_y(run.point);
  res.x = std::move(run.point);
  res.objective = run.value;
  res.initial_objective = joint_initial;
  res.iterations = run.iterations;
  res.projected_grad_norm = run.projected_grad_norm;
  res.line_search_failed = run.line_search_failed;
  res.objective_history = std::move(run.history);
  return res;
}

}  // namespace gbd

#endif  // GBD_MASTER_HPP
