#ifndef GBD_BENDERS_HPP
#define GBD_BENDERS_HPP

#include <chrono>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gbd/baselines.hpp"
#include "gbd/master.hpp"
#include "gbd/parallel.hpp"
#include "gbd/primal.hpp"

namespace gbd {

enum class Algorithm { alg1, alg2 };

inline std::string_view to_string(Algorithm a) { return a == Algorithm::alg1 ? "alg1" : "alg2"; }

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "alg1") return Algorithm::alg1;
  if (s == "alg2") return Algorithm::alg2;
  throw std::invalid_argument("unknown algorithm '" + std::string(s) + "'");
}

struct OuterSettings {
  double epsilon = 1e-5;
  int max_outer = 1000;
  SolverSettings inner;

  void validate() const {
    if (!(epsilon > 0)) throw std::invalid_argument("epsilon: must be positive");
    if (max_outer < 1) throw std::invalid_argument("max_outer: must be positive");
    inner.validate();
  }
};

/// One outer iteration t.
struct IterationRecord {
  int outer_iter = 0;
  double lower_bound_bits = 0;   // weighted sum rate at X^t
  double master_value_bits = 0;  // optimal master objective
  double primal_value_bits = 0;  // v(X^{t-1})
  double lagrangian_bits = 0;    // L(X^t, Y^t, Gamma^t)
  double lower_bound_lagrangian_bits = 0;  // sum_ki w R_lb(X^t, Y^t)
  double wallclock_ms = 0;       // cumulative since the run started
  int inner_iters = 0;
  double inner_grad_norm = 0;
  bool line_search_failed = false;
};

struct IterateTrace {
  double initial_lower_bound_bits = 0;
  std::vector<IterationRecord> iterations;
};

template <typename Real>
struct RunResult {
  Algorithm algorithm = Algorithm::alg1;
  TransmitStrategy<Real> x;
  Real weighted_sum_rate = 0;
  IterateTrace trace;
  bool converged = false;
  int iterations = 0;
  std::uint64_t seed = 0;
  NetworkConfig<Real> config;
};

namespace detail {

template <typename Real>
RunResult<Real> run_benders(Algorithm algorithm, const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                            const TransmitStrategy<Real>& x0, const OuterSettings& settings) {
  config.validate();
  settings.validate();
  const auto rep = is_feasible(config, x0);
  if (!rep.feasible) throw std::invalid_argument("initial strategy infeasible: " + rep.summary());

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  RunResult<Real> res;
  res.algorithm = algorithm;
  res.config = config;
  TransmitStrategy<Real> x_prev = x0;
  Real rate_prev = weighted_sum_rate(config, channels, x0);
  res.trace.initial_lower_bound_bits = double(rate_prev);

  for (int t = 1; t <= settings.max_outer; ++t) {
    const PrimalSolution<Real> primal = solve_primal(config, channels, x_prev);
    MasterResult<Real> master =
        algorithm == Algorithm::alg1
            ? solve_master_alg1(config, channels, primal.y, primal.gamma, x_prev, settings.inner)
            : solve_master_alg2(config, channels, primal.y, primal.gamma, x_prev, primal.y, settings.inner);
    TransmitStrategy<Real> x_t = std::move(master.x);
    const Real rate_t = weighted_sum_rate(config, channels, x_t);

    IterationRecord rec;
    rec.outer_iter = t;
    rec.lower_bound_bits = double(rate_t);
    rec.master_value_bits = double(master.objective);
    rec.primal_value_bits = double(primal.value);
    rec.lagrangian_bits = double(lagrangian(config, channels, x_t, primal.y, primal.gamma));
    Real lb_sum = 0;
    for (int k = 0; k < config.num_cells(); ++k)
      for (int i = 0; i < config.num_users(k); ++i)
        lb_sum += config.weight({k, i}) * lower_bound_rate(config, channels, x_t, primal.y({k, i}), {k, i});
    rec.lower_bound_lagrangian_bits = double(lb_sum);
    rec.inner_iters = master.iterations;
    rec.inner_grad_norm = double(master.projected_grad_norm);
    rec.line_search_failed = master.line_search_failed;
    rec.wallclock_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    res.trace.iterations.push_back(rec);

    const Real increment = rate_t - rate_prev;
    x_prev = std::move(x_t);
    rate_prev = rate_t;
    res.iterations = t;
    if (double(increment) < settings.epsilon) {
      res.converged = true;
      break;
    }
  }
  res.x = std::move(x_prev);
  res.weighted_sum_rate = rate_prev;
  return res;
}

}  // namespace detail

/// Alternates the closed-form primal and the fixed-multiplier master until the
/// weighted sum-rate increment drops below epsilon.
template <typename Real>
RunResult<Real> run_algorithm1(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                               const TransmitStrategy<Real>& x0, const OuterSettings& settings = {}) {
  return detail::run_benders(Algorithm::alg1, config, channels, x0, settings);
}

/// As run_algorithm1 with the joint (X, Y) master on the quadratic lower bound,
/// anchored at the fresh primal solution each iteration.
template <typename Real>
RunResult<Real> run_algorithm2(const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                               const TransmitStrategy<Real>& x0, const OuterSettings& settings = {}) {
  return detail::run_benders(Algorithm::alg2, config, channels, x0, settings);
}

template <typename Real>
RunResult<Real> run_algorithm(Algorithm algorithm, const NetworkConfig<Real>& config, const ChannelSet<Real>& channels,
                              const TransmitStrategy<Real>& x0, const OuterSettings& settings = {}) {
  return detail::run_benders(algorithm, config, channels, x0, settings);
}

template <typename Real>
struct MultiStartResult {
  int best = 0;
  std::vector<RunResult<Real>> runs;

  const RunResult<Real>& best_run() const { return runs[std::size_t(best)]; }
};

/// Seed of the s-th random start.
inline std::uint64_t start_seed(std::uint64_t seed, int s) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(s)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (std::uint64_t(out[0]) << 32) | out[1];
}

/// Runs from the uniform-power start plus n_starts - 1 random feasible starts.
/// Ties keep the lowest index.
template <typename Real>
MultiStartResult<Real> multi_start(Algorithm algorithm, const NetworkConfig<Real>& config,
                                   const ChannelSet<Real>& channels, int n_starts, std::uint64_t seed,
                                   const OuterSettings& settings = {}, int jobs = 1) {
  if (n_starts < 1) throw std::invalid_argument("n_starts: must be >= 1");
  MultiStartResult<Real> out;
  out.runs.resize(std::size_t(n_starts));
  parallel_for(n_starts, jobs, [&](int s) {
    const TransmitStrategy<Real> x0 =
        s == 0 ? uniform_strategy(config) : sample_random_strategy(config, start_seed(seed, s));
    RunResult<Real> r = run_algorithm(algorithm, config, channels, x0, settings);
    r.seed = seed;
    out.runs[std::size_t(s)] = std::move(r);
  });
  for (int s = 1; s < n_starts; ++s) {
    if (out.runs[std::size_t(s)].weighted_sum_rate > out.runs[std::size_t(out.best)].weighted_sum_rate) out.best = s;
  }
  return out;
}

template <typename Real>
struct BoundaryPoint {
  std::vector<std::vector<Real>> weights;
  RunResult<Real> run;
};

/// One weighted sum-rate optimization per weight vector.
template <typename Real>
std::vector<BoundaryPoint<Real>> trace_boundary(Algorithm algorithm, const NetworkConfig<Real>& config,
                                                const ChannelSet<Real>& channels,
                                                const std::vector<std::vector<std::vector<Real>>>& weight_list,
                                                const OuterSettings& settings = {}, int n_starts = 1,
                                                std::uint64_t seed = 0, int jobs = 1) {
  std::vector<BoundaryPoint<Real>> out(weight_list.size());
  parallel_for(int(weight_list.size()), jobs, [&](int w) {
    NetworkConfig<Real> weighted = config;
    weighted.weights = weight_list[std::size_t(w)];
    weighted.validate();
    auto ms = multi_start(algorithm, weighted, channels, n_starts, seed, settings, 1);
    out[std::size_t(w)] = {weight_list[std::size_t(w)], std::move(ms.runs[std::size_t(ms.best)])};
  });
  return out;
}

}  // namespace gbd

#endif  // GBD_BENDERS_HPP
