#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chaoscale/error.hpp"
#include "chaoscale/factor.hpp"
#include "chaoscale/random.hpp"

namespace chaoscale {

/// A path on the uniform grid t_i = i/m of [0,1], pinned at 0.
class GridPath {
public:
  GridPath() : values_{0.0, 0.0} {}

  explicit GridPath(std::vector<double> values) : values_(std::move(values)) {
    detail::require(values_.size() >= 2, "grid path needs m >= 1");
    detail::require(values_.front() == 0.0, "grid path must start at 0");
  }

  static GridPath zero(std::size_t m) {
    detail::require(m >= 1, "grid path needs m >= 1");
    return GridPath(std::vector<double>(m + 1, 0.0));
  }

  /// Samples fn(i/m); fn(0) is forced to 0.
  template <class Fn>
  static GridPath sample(std::size_t m, Fn&& fn) {
    detail::require(m >= 1, "grid path needs m >= 1");
    std::vector<double> v(m + 1);
    v[0] = 0.0;
    for (std::size_t i = 1; i <= m; ++i) v[i] = fn(time_of(i, m));
    return GridPath(std::move(v));
  }

  static double time_of(std::size_t i, std::size_t m) noexcept {
    return static_cast<double>(i) / static_cast<double>(m);
  }

  std::size_t resolution() const noexcept { return values_.size() - 1; }
  double time(std::size_t i) const noexcept { return time_of(i, resolution()); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double back() const noexcept { return values_.back(); }

  friend bool operator==(const GridPath&, const GridPath&) = default;

private:
  std::vector<double> values_;
};

inline GridPath operator-(const GridPath& a, const GridPath& b) {
  detail::require(a.resolution() == b.resolution(), "grid resolution mismatch");
  std::vector<double> v(a.values().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] - b[i];
  return GridPath(std::move(v));
}

inline GridPath operator+(const GridPath& a, const GridPath& b) {
  detail::require(a.resolution() == b.resolution(), "grid resolution mismatch");
  std::vector<double> v(a.values().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
  return GridPath(std::move(v));
}

inline GridPath operator*(double c, const GridPath& a) {
  std::vector<double> v(a.values().begin(), a.values().end());
  for (double& x : v) x *= c;
  v[0] = 0.0;
  return GridPath(std::move(v));
}

/// Piecewise-linear member of the Cameron-Martin space. Segment slopes are
/// cached: slope_i = m * (values[i+1] - values[i]).
class CameronMartinPath {
public:
  CameronMartinPath() : CameronMartinPath(GridPath()) {}

  explicit CameronMartinPath(GridPath base) : base_(std::move(base)) {
    const auto m = base_.resolution();
    slopes_.resize(m);
    for (std::size_t i = 0; i < m; ++i) slopes_[i] = static_cast<double>(m) * (base_[i + 1] - base_[i]);
  }

  static CameronMartinPath from_slopes(std::vector<double> slopes) {
    detail::require(!slopes.empty(), "path needs at least one segment");
    const double dt = 1.0 / static_cast<double>(slopes.size());
    std::vector<double> v(slopes.size() + 1, 0.0);
    for (std::size_t i = 0; i < slopes.size(); ++i) v[i + 1] = v[i] + slopes[i] * dt;
    CameronMartinPath h(GridPath(std::move(v)));
    h.slopes_ = std::move(slopes);
    return h;
  }

  const GridPath& path() const noexcept { return base_; }
  std::size_t resolution() const noexcept { return base_.resolution(); }
  std::span<const double> slopes() const noexcept { return slopes_; }
  double slope(std::size_t i) const noexcept { return slopes_[i]; }

private:
  GridPath base_;
  std::vector<double> slopes_;
};

/// I(h) = 1/2 * integral of hdot^2; exact for piecewise-linear h.
inline double energy(const CameronMartinPath& h) {
  double acc = 0.0;
  for (double s : h.slopes()) acc += s * s;
  return 0.5 * acc / static_cast<double>(h.resolution());
}

inline double sup_norm(const GridPath& w) {
  double best = 0.0;
  for (double v : w.values()) best = std::max(best, std::abs(v));
  return best;
}

/// <f, h> = integral of f * hdot over [0,1]. Segment-exact: hdot is constant
/// per segment and f is integrated exactly (interpolant for grid factors).
inline double pairing(const FactorFn& f, const CameronMartinPath& h) {
  const auto m = h.resolution();
  if (f.kind() == FactorFn::Kind::grid && f.resolution() != m)
    throw DomainError("pairing: factor grid m=" + std::to_string(f.resolution()) +
                      " does not match path grid m=" + std::to_string(m));
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    acc += h.slope(i) * f.integral(GridPath::time_of(i, m), GridPath::time_of(i + 1, m));
  return acc;
}

/// Random member of K_L = {I(h) <= L}: i.i.d. normal slopes rescaled so that
/// I(h) = U * L with U uniform on [0,1].
inline CameronMartinPath sample_level_set(double level, std::size_t m, std::uint64_t seed) {
  detail::require(level >= 0.0, "sample_level_set: level must be >= 0");
  detail::require(m >= 1, "sample_level_set: m must be >= 1");
  if (level == 0.0) return CameronMartinPath(GridPath::zero(m));
  auto rng = make_engine(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> slopes(m);
  for (double& s : slopes) s = normal(rng);
  const double target = uniform(rng) * level;
  double raw = 0.0;
  for (double s : slopes) raw += s * s;
  raw *= 0.5 / static_cast<double>(m);
  double scale = raw > 0.0 ? std::sqrt(target / raw) : 0.0;
  for (;;) {
    std::vector<double> scaled(slopes);
    for (double& s : scaled) s *= scale;
    auto h = CameronMartinPath::from_slopes(std::move(scaled));
    if (energy(h) <= level) return h;
    scale = std::nextafter(scale, 0.0) * (1.0 - 1e-15);
  }
}

}  // namespace chaoscale
