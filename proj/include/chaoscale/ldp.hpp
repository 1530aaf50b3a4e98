#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chaoscale/chaos.hpp"
#include "chaoscale/error.hpp"
#include "chaoscale/iterated.hpp"
#include "chaoscale/optimize.hpp"
#include "chaoscale/parallel.hpp"
#include "chaoscale/path.hpp"
#include "chaoscale/random.hpp"
#include "chaoscale/skeleton.hpp"
#include "chaoscale/tail.hpp"

namespace chaoscale {

/// Linear interpolation of w onto the grid with m steps.
inline GridPath resample(const GridPath& w, std::size_t m) {
  if (w.resolution() == m) return w;
  detail::require(m >= 1, "resample: m must be >= 1");
  const auto src = w.resolution();
  std::vector<double> v(m + 1, 0.0);
  for (std::size_t i = 1; i <= m; ++i) {
    const double pos = static_cast<double>(i) * static_cast<double>(src) / static_cast<double>(m);
    const auto lo = std::min(static_cast<std::size_t>(pos), src - 1);
    const double frac = pos - static_cast<double>(lo);
    v[i] = w[lo] + frac * (w[lo + 1] - w[lo]);
  }
  return GridPath(std::move(v));
}

/// Path event: {sup|y| >= delta}, {sup|y - center| >= radius} or {|y_1| >= delta}.
class EventSpec {
public:
  enum class Kind { sup_exceed, ball_complement, terminal_exceed };

  static EventSpec sup_exceed(double delta) { return EventSpec(Kind::sup_exceed, delta, std::nullopt); }
  static EventSpec terminal_exceed(double delta) { return EventSpec(Kind::terminal_exceed, delta, std::nullopt); }
  static EventSpec ball_complement(GridPath center, double radius) {
    return EventSpec(Kind::ball_complement, radius, std::move(center));
  }

  Kind kind() const noexcept { return kind_; }
  double threshold() const noexcept { return threshold_; }
  const std::optional<GridPath>& center() const noexcept { return center_; }

  /// Same event with the center moved onto an m-step grid.
  EventSpec on_grid(std::size_t m) const {
    EventSpec e = *this;
    if (e.center_) e.center_ = resample(*e.center_, m);
    return e;
  }

  /// Distance of the relevant statistic below the threshold; 0 inside the event.
  double shortfall(std::span<const double> y) const {
    double stat = 0.0;
    switch (kind_) {
      case Kind::sup_exceed:
        stat = sup_abs(y);
        break;
      case Kind::terminal_exceed:
        stat = std::abs(y.back());
        break;
      case Kind::ball_complement: {
        const auto& c = *center_;
        detail::require(c.resolution() + 1 == y.size(), "EventSpec: center is not on the path grid");
        for (std::size_t i = 0; i < y.size(); ++i) stat = std::max(stat, std::abs(y[i] - c[i]));
        break;
      }
    }
    return std::max(0.0, threshold_ - stat);
  }

  bool contains(std::span<const double> y) const { return shortfall(y) == 0.0; }

private:
  EventSpec(Kind k, double threshold, std::optional<GridPath> center)
      : kind_(k), threshold_(threshold), center_(std::move(center)) {
    if (!(threshold > 0.0) || !std::isfinite(threshold)) throw DomainError("EventSpec: threshold must be > 0");
  }

  Kind kind_;
  double threshold_;
  std::optional<GridPath> center_;
};

struct RateOptions {
  std::size_t m_opt = 64;
  std::vector<double> penalties{1e1, 1e2, 1e3, 1e4, 1e5, 1e6};
  double tol_feas = 1e-3;
  std::size_t starts = 8;
  double start_level = 1.0;
  std::uint64_t seed = 0;
  MinimizeOptions minimize{};
};

struct RateResult {
  double value = 0.0;     ///< energy of the final iterate
  bool infinite = false;  ///< residual above tol_feas at the last penalty
  CameronMartinPath minimizer;
  double residual = 0.0;
  bool converged = false;
  std::vector<std::pair<double, double>> trace;  ///< (lambda, objective)
  std::size_t start = 0;
};

namespace detail {

inline double slope_energy(const std::vector<double>& s) {
  double e = 0.0;
  for (double v : s) e += v * v;
  return 0.5 * e / static_cast<double>(s.size());
}

inline void slopes_to_values(const std::vector<double>& s, std::vector<double>& h) {
  const double dt = 1.0 / static_cast<double>(s.size());
  h.resize(s.size() + 1);
  h[0] = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) h[i + 1] = h[i] + s[i] * dt;
}

/// Continuation over opts.penalties from every start; the best start is the
/// feasible one with least energy, or the one with least residual.
template <class Objective, class Residual>
RateResult penalty_search(std::size_t m, const RateOptions& opts, Objective objective, Residual residual) {
  require(!opts.penalties.empty(), "rate: penalty list must not be empty");
  require(opts.starts >= 1, "rate: need at least one start");
  require(opts.tol_feas > 0.0, "rate: tol_feas must be > 0");
  std::vector<RateResult> runs(opts.starts);
  parallel_for(opts.starts, [&](std::size_t k) {
    const auto h0 = sample_level_set(opts.start_level, m, substream_seed(opts.seed, k));
    std::vector<double> x(h0.slopes().begin(), h0.slopes().end());
    RateResult r;
    bool ok = true;
    for (double lambda : opts.penalties) {
      auto f = [&](const std::vector<double>& s) { return objective(s, lambda); };
      auto res = minimize(f, x, opts.minimize);
      x = std::move(res.x);
      r.trace.emplace_back(lambda, res.value);
      ok = res.converged;
    }
    r.minimizer = CameronMartinPath::from_slopes(x);
    r.value = energy(r.minimizer);
    r.residual = residual(r.minimizer);
    r.infinite = !(r.residual <= opts.tol_feas);
    r.converged = ok && !r.infinite;
    r.start = k;
    runs[k] = std::move(r);
  });
  std::size_t best = 0;
  for (std::size_t k = 1; k < runs.size(); ++k) {
    const auto& a = runs[k];
    const auto& b = runs[best];
    if (a.infinite != b.infinite) {
      if (!a.infinite) best = k;
    } else if (!a.infinite ? a.value < b.value : a.residual < b.residual) {
      best = k;
    }
  }
  return std::move(runs[best]);
}

}  // namespace detail

/// inf { I(h) : F(h) = w } over piecewise-linear h on the grid of w.
inline RateResult rate_of_point(const ChaosVector& x, const GridPath& w, const RateOptions& opts = {}) {
  const auto m = w.resolution();
  const SkeletonEvaluator eval(x, m);
  const auto& target = w.values();
  auto objective = [&eval, &target](const std::vector<double>& s, double lambda) {
    thread_local std::vector<double> h, y, a, b;
    detail::slopes_to_values(s, h);
    eval.evaluate(h, y, a, b);
    double pen = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) pen += (y[i] - target[i]) * (y[i] - target[i]);
    return detail::slope_energy(s) + lambda * pen;
  };
  auto residual = [&](const CameronMartinPath& h) { return sup_norm(eval_skeleton(x, h).path - w); };
  return detail::penalty_search(m, opts, objective, residual);
}

/// inf { I(h) : F(h) in ev } on the opts.m_opt grid.
inline RateResult rate_of_event(const ChaosVector& x, const EventSpec& ev, const RateOptions& opts = {}) {
  detail::require(opts.m_opt >= 1, "rate_of_event: m_opt must be >= 1");
  const auto m = opts.m_opt;
  const SkeletonEvaluator eval(x, m);
  const auto event = ev.on_grid(m);
  auto objective = [&eval, &event](const std::vector<double>& s, double lambda) {
    thread_local std::vector<double> h, y, a, b;
    detail::slopes_to_values(s, h);
    eval.evaluate(h, y, a, b);
    const double gap = event.shortfall(y);
    return detail::slope_energy(s) + lambda * gap * gap;
  };
  auto residual = [&](const CameronMartinPath& h) { return event.shortfall(eval_skeleton(x, h).path.values()); };
  return detail::penalty_search(m, opts, objective, residual);
}

struct LadderPoint {
  double eps = 0.0;
  double p_hat = 0.0;
  double std_error = 0.0;
  double scaled_log = 0.0;     ///< eps log p_hat, -inf when p_hat = 0
  double scaled_log_se = 0.0;  ///< eps se / p_hat with se floored at the 1/M level
  bool used = false;
  double ceiling = std::numeric_limits<double>::quiet_NaN();  ///< finite-eps Doob ceiling (gap runs only)
};

struct SlopeResult {
  std::vector<LadderPoint> ladder;
  double intercept = 0.0;
  double slope = 0.0;
  double fit_rms = 0.0;  ///< weighted rms residual of the affine fit
  std::size_t used = 0;
  std::vector<double> excluded;  ///< eps values with p_hat = 0
  std::optional<double> rate_prediction;
  std::optional<RateResult> rate;
  double ceiling = std::numeric_limits<double>::quiet_NaN();  ///< log(||xi_N - xi|| / delta)
  std::size_t truncation = 0;
};

namespace detail {

inline void check_ladder(std::span<const double> ladder, std::size_t samples, std::size_t m) {
  require(!ladder.empty(), "ladder must not be empty");
  for (double e : ladder)
    if (!(e > 0.0 && e < 1.0)) throw DomainError("ladder values must lie in (0,1), got " + std::to_string(e));
  require(samples >= 1000, "Monte-Carlo sample count must be >= 1000");
  require(m >= 1, "m must be >= 1");
}

inline LadderPoint make_point(double eps, const MCEstimate& est) {
  LadderPoint p;
  p.eps = eps;
  p.p_hat = est.mean;
  p.std_error = est.std_error;
  if (est.mean > 0.0) {
    const double n = static_cast<double>(est.count);
    const double pc = std::clamp(est.mean, 1.0 / n, 1.0 - 1.0 / n);
    const double floor = std::sqrt(pc * (1.0 - pc) / n);
    p.scaled_log = eps * std::log(est.mean);
    p.scaled_log_se = eps * std::max(est.std_error, floor) / est.mean;
    p.used = true;
  } else {
    p.scaled_log = -std::numeric_limits<double>::infinity();
    p.scaled_log_se = std::numeric_limits<double>::infinity();
  }
  return p;
}

/// Weighted least squares of scaled_log against eps over used points.
inline void fit(SlopeResult& r) {
  double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  r.used = 0;
  r.excluded.clear();
  for (const auto& p : r.ladder) {
    if (!p.used) {
      r.excluded.push_back(p.eps);
      continue;
    }
    ++r.used;
    const double w = 1.0 / (p.scaled_log_se * p.scaled_log_se);
    sw += w;
    sx += w * p.eps;
    sy += w * p.scaled_log;
    sxx += w * p.eps * p.eps;
    sxy += w * p.eps * p.scaled_log;
  }
  if (r.used == 0) return;
  const double det = sw * sxx - sx * sx;
  if (r.used == 1 || !(std::abs(det) > 1e-300)) {
    r.slope = 0.0;
    r.intercept = sy / sw;
  } else {
    r.slope = (sw * sxy - sx * sy) / det;
    r.intercept = (sy - r.slope * sx) / sw;
  }
  double ss = 0.0;
  for (const auto& p : r.ladder) {
    if (!p.used) continue;
    const double z = (p.scaled_log - r.intercept - r.slope * p.eps) / p.scaled_log_se;
    ss += z * z;
  }
  r.fit_rms = std::sqrt(ss / static_cast<double>(r.used));
}

}  // namespace detail

/// eps log P(Y^eps in ev) along the ladder with an affine extrapolation to
/// eps = 0. Pass std::nullopt for `rate` to skip the variational comparison.
inline SlopeResult ldp_slope(const ChaosVector& x, const EventSpec& ev, std::span<const double> ladder,
                             std::size_t samples, std::size_t m, std::uint64_t seed,
                             const std::optional<RateOptions>& rate = RateOptions{}) {
  detail::check_ladder(ladder, samples, m);
  const auto event = ev.on_grid(m);
  SlopeResult r;
  for (std::size_t l = 0; l < ladder.size(); ++l) {
    const auto scaled = gamma_scale(x, ladder[l]);
    const auto est = mc_probability(scaled, samples, m, substream_seed(seed, l),
                                    [&event](std::span<const double> y) { return event.contains(y); });
    r.ladder.push_back(detail::make_point(ladder[l], est));
  }
  detail::fit(r);
  if (r.used == 0)
    throw NumericalError("ldp_slope: no ladder point produced a hit; use larger eps or more samples");
  if (rate) {
    r.rate = rate_of_event(x, ev, *rate);
    if (!r.rate->infinite) r.rate_prediction = -r.rate->value;
  }
  return r;
}

/// eps log P(sup |Y(N)^eps - Y^eps| >= delta) with Y(N) from truncate(x, N),
/// both driven by the same Brownian increments.
inline SlopeResult exp_equiv_gap_at(const ChaosVector& x, std::size_t N, double delta, std::span<const double> ladder,
                                    std::size_t samples, std::size_t m, std::uint64_t seed) {
  detail::check_ladder(ladder, samples, m);
  if (!(delta > 0.0)) throw DomainError("exp_equiv_gap: delta must be > 0");
  SlopeResult r;
  r.truncation = N;
  const double tail_norm = std::sqrt(chaos_tail_sq(x, N));
  r.ceiling = tail_norm > 0.0 ? std::log(tail_norm / delta) : -std::numeric_limits<double>::infinity();
  const auto truncated = truncate(x, N);
  for (std::size_t l = 0; l < ladder.size(); ++l) {
    const double eps = ladder[l];
    const ItoEvaluator full(gamma_scale(x, eps), m);
    const ItoEvaluator cut(gamma_scale(truncated, eps), m);
    const auto master = substream_seed(seed, l);
    std::vector<double> hits(samples, 0.0);
    if (tail_norm > 0.0) {
      parallel_for(samples, [&](std::size_t k) {
        std::vector<double> dw, y, z, a, b;
        sample_increments(m, master, k, dw);
        full.evaluate(dw, y, a, b);
        cut.evaluate(dw, z, a, b);
        double gap = 0.0;
        for (std::size_t i = 0; i <= m; ++i) gap = std::max(gap, std::abs(y[i] - z[i]));
        hits[k] = gap >= delta ? 1.0 : 0.0;
      });
    }
    auto point = detail::make_point(eps, indicator_estimate(hits));
    point.ceiling = tail_norm > 0.0 ? (1.0 + eps) * (std::log(1.0 + eps) + std::log(tail_norm / delta))
                                    : -std::numeric_limits<double>::infinity();
    r.ladder.push_back(point);
  }
  detail::fit(r);
  if (r.used == 0) {
    if (tail_norm > 0.0)
      throw NumericalError("exp_equiv_gap: no ladder point produced a hit; use larger eps or more samples");
    r.intercept = -std::numeric_limits<double>::infinity();
    r.slope = 0.0;
  }
  return r;
}

/// exp_equiv_gap_at with N from approx_schedule(x, n).
inline SlopeResult exp_equiv_gap(const ChaosVector& x, std::size_t n, double delta, std::span<const double> ladder,
                                 std::size_t samples, std::size_t m, std::uint64_t seed) {
  return exp_equiv_gap_at(x, approx_schedule(x, n).order, delta, ladder, samples, m, seed);
}

}  // namespace chaoscale
