#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "chaoscale/chaos.hpp"
#include "chaoscale/error.hpp"
#include "chaoscale/iterated.hpp"
#include "chaoscale/parallel.hpp"

namespace chaoscale {

/// Monte-Carlo mean with its standard error.
struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
  bool indicator = true;  ///< probability estimate (mean in [0,1])
};

/// C_{alpha,n} = 1 + 4 e^alpha + 2e/sqrt(2 pi) * sum_{k>=n} k^{-1/2} r^k,
/// r = 2 alpha e / n, summed until the geometric remainder bound drops
/// below 1e-12.
inline double tail_constant(double alpha, std::size_t n) {
  detail::require(n >= 1, "tail_constant: order must be >= 1");
  const double limit = static_cast<double>(n) / (2.0 * std::numbers::e);
  if (!(alpha > 0.0) || !(alpha < limit))
    throw DomainError("tail_constant: alpha must lie in (0, n/(2e)) = (0, " + std::to_string(limit) + ")");
  const double r = 2.0 * alpha * std::numbers::e / static_cast<double>(n);
  double series = 0.0;
  double power = std::pow(r, static_cast<double>(n));
  for (std::size_t k = n;; ++k) {
    series += power / std::sqrt(static_cast<double>(k));
    power *= r;
    const double remainder = power / std::sqrt(static_cast<double>(k + 1)) / (1.0 - r);
    if (remainder < 1e-12) break;
  }
  return 1.0 + 4.0 * std::exp(alpha) + 2.0 * std::numbers::e / std::sqrt(2.0 * std::numbers::pi) * series;
}

/// C_{alpha,n} exp(-alpha delta^{2/n} / ||xi||^{2/n}) for an order-n chaos.
inline double hyper_bound(double alpha, std::size_t n, double xi_norm, double delta) {
  detail::require(delta > 0.0 && xi_norm > 0.0, "hyper_bound: delta and norm must be > 0");
  const double e = 2.0 / static_cast<double>(n);
  return tail_constant(alpha, n) * std::exp(-alpha * std::pow(delta, e) / std::pow(xi_norm, e));
}

/// (1+eps)^{1+1/eps} (||xi|| / delta)^{1+1/eps}. May exceed 1.
inline double doob_bound(double xi_norm, double eps, double delta) {
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("doob_bound: eps must lie in (0,1]");
  if (!(delta > 0.0)) throw DomainError("doob_bound: delta must be > 0");
  detail::require(xi_norm >= 0.0, "doob_bound: norm must be >= 0");
  const double q = 1.0 + 1.0 / eps;
  return std::pow(1.0 + eps, q) * std::pow(xi_norm / delta, q);
}

/// Probability estimate from per-sample indicators in index order.
inline MCEstimate indicator_estimate(std::span<const double> hits) {
  const auto count = hits.size();
  const double p = pairwise_sum(hits) / static_cast<double>(count);
  return {p, std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(count)), count, true};
}

/// Fraction of `samples` Brownian paths (m steps, substreams of `seed`)
/// for which hit(y) is true, y = sum of discrete Ito integrals of x.
template <class Hit>
MCEstimate mc_probability(const ChaosVector& x, std::size_t samples, std::size_t m, std::uint64_t seed, Hit&& hit) {
  detail::require(samples >= 1, "Monte-Carlo sample count must be >= 1");
  const ItoEvaluator eval(x, m);
  std::vector<double> hits(samples, 0.0);
  parallel_for(samples, [&](std::size_t k) {
    std::vector<double> dw, y, a, b;
    sample_increments(m, seed, k, dw);
    eval.evaluate(dw, y, a, b);
    hits[k] = hit(std::span<const double>(y)) ? 1.0 : 0.0;
  });
  return indicator_estimate(hits);
}

inline double sup_abs(std::span<const double> y) {
  double s = 0.0;
  for (double v : y) s = std::max(s, std::abs(v));
  return s;
}

/// P{ sup_t |Y^eps_t| >= delta } with Y^eps from gamma_scale(x, eps).
inline MCEstimate mc_sup_tail(const ChaosVector& x, double eps, double delta, std::size_t samples, std::size_t m,
                              std::uint64_t seed) {
  detail::require(delta >= 0.0, "mc_sup_tail: delta must be >= 0");
  const auto scaled = gamma_scale(x, eps);
  return mc_probability(scaled, samples, m, seed, [delta](std::span<const double> y) { return sup_abs(y) >= delta; });
}

}  // namespace chaoscale
