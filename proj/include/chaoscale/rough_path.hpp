#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chaoscale/error.hpp"
#include "chaoscale/path.hpp"

namespace chaoscale {

inline constexpr double default_p = 2.5;

/// Truncated signature (w^1, w^2) of a path over some interval [s,t].
/// level2 is row-major d x d.
struct RoughIncrement {
  std::size_t d = 1;
  std::vector<double> level1;
  std::vector<double> level2;

  static RoughIncrement identity(std::size_t d) {
    return {d, std::vector<double>(d, 0.0), std::vector<double>(d * d, 0.0)};
  }

  double area(std::size_t i, std::size_t j) const { return level2[i * d + j]; }
};

/// Chen's identity: (a over [s,t]) * (b over [t,u]) = value over [s,u].
inline RoughIncrement chen_compose(const RoughIncrement& a, const RoughIncrement& b) {
  detail::require(a.d == b.d, "chen_compose: dimension mismatch");
  const auto d = a.d;
  RoughIncrement out{d, std::vector<double>(d), std::vector<double>(d * d)};
  for (std::size_t i = 0; i < d; ++i) out.level1[i] = a.level1[i] + b.level1[i];
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      out.level2[i * d + j] = a.level2[i * d + j] + b.level2[i * d + j] + a.level1[i] * b.level1[j];
  return out;
}

/// In-place acc <- acc * step; avoids allocation in the O(m^2) loops.
inline void chen_extend(RoughIncrement& acc, std::span<const double> step1, std::span<const double> step2) {
  const auto d = acc.d;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) acc.level2[i * d + j] += step2[i * d + j] + acc.level1[i] * step1[j];
  for (std::size_t i = 0; i < d; ++i) acc.level1[i] += step1[i];
}

/// Level-2 rough path stored per grid step; values over any grid interval
/// are recovered by Chen folds.
class GridRoughPath {
public:
  GridRoughPath(std::size_t d, std::size_t m, std::vector<double> level1, std::vector<double> level2)
      : d_(d), m_(m), level1_(std::move(level1)), level2_(std::move(level2)) {
    detail::require(d_ >= 1, "rough path dimension must be >= 1");
    detail::require(m_ >= 1, "rough path needs m >= 1");
    detail::require(level1_.size() == m_ * d_, "rough path level-1 size mismatch");
    detail::require(level2_.size() == m_ * d_ * d_, "rough path level-2 size mismatch");
  }

  std::size_t dimension() const noexcept { return d_; }
  std::size_t resolution() const noexcept { return m_; }

  std::span<const double> step_level1(std::size_t i) const { return {level1_.data() + i * d_, d_}; }
  std::span<const double> step_level2(std::size_t i) const { return {level2_.data() + i * d_ * d_, d_ * d_}; }

  const std::vector<double>& level1() const noexcept { return level1_; }
  const std::vector<double>& level2() const noexcept { return level2_; }

  /// Composed value over [t_a, t_b], a <= b.
  RoughIncrement segment(std::size_t a, std::size_t b) const {
    detail::require(a <= b && b <= m_, "segment: bad grid interval");
    auto acc = RoughIncrement::identity(d_);
    for (std::size_t i = a; i < b; ++i) chen_extend(acc, step_level1(i), step_level2(i));
    return acc;
  }

private:
  std::size_t d_;
  std::size_t m_;
  std::vector<double> level1_;
  std::vector<double> level2_;
};

/// Lift of the piecewise-linear path whose coordinates are `components`.
/// Each linear step has area 1/2 dw (x) dw.
inline GridRoughPath lift_piecewise_linear(std::span<const GridPath> components) {
  detail::require(!components.empty(), "lift: need at least one coordinate");
  const auto d = components.size();
  const auto m = components.front().resolution();
  for (const auto& c : components) detail::require(c.resolution() == m, "lift: coordinate grids differ");
  std::vector<double> l1(m * d), l2(m * d * d);
  for (std::size_t s = 0; s < m; ++s) {
    for (std::size_t i = 0; i < d; ++i) l1[s * d + i] = components[i][s + 1] - components[i][s];
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) l2[(s * d + i) * d + j] = 0.5 * l1[s * d + i] * l1[s * d + j];
  }
  return GridRoughPath(d, m, std::move(l1), std::move(l2));
}

inline GridRoughPath lift_piecewise_linear(const GridPath& path) {
  return lift_piecewise_linear(std::span<const GridPath>(&path, 1));
}

/// Gamma(eps): level 1 scaled by sqrt(eps), level 2 by eps.
inline GridRoughPath dilate(const GridRoughPath& x, double eps) {
  if (!(eps > 0.0)) throw DomainError("dilate: eps must be > 0");
  const double r = std::sqrt(eps);
  auto l1 = x.level1();
  auto l2 = x.level2();
  for (double& v : l1) v *= r;
  for (double& v : l2) v *= eps;
  return GridRoughPath(x.dimension(), x.resolution(), std::move(l1), std::move(l2));
}

/// max over sub-partitions 0 = i_0 < ... < i_k = m of sum cost(i_{l-1}, i_l)^p,
/// by V[j] = max_{i<j} V[i] + cost(i,j)^p. cost is called row by row
/// (i ascending, then j ascending); returns the sum, not its 1/p power.
template <class Cost>
double p_variation_sum(std::size_t m, Cost&& cost, double p) {
  detail::require(p >= 1.0, "p-variation exponent must be >= 1");
  std::vector<double> best(m + 1, -1.0);
  best[0] = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j <= m; ++j) {
      const double cand = best[i] + std::pow(cost(i, j), p);
      if (cand > best[j]) best[j] = cand;
    }
  }
  return best[m];
}

/// p-variation of a scalar grid sequence: (sup_D sum |v_j - v_i|^p)^{1/p}.
inline double p_var_level(std::span<const double> values, double p) {
  detail::require(values.size() >= 2, "p_var_level: need at least two values");
  const auto sum = p_variation_sum(values.size() - 1, [&](std::size_t i, std::size_t j) {
    return std::abs(values[j] - values[i]);
  }, p);
  return std::pow(sum, 1.0 / p);
}

struct PVarTerms {
  double level1 = 0.0;  ///< (sup_D sum |x1 - y1|^p)^{1/p}
  double level2 = 0.0;  ///< (sup_D sum |x2 - y2|^{p/2})^{2/p}
  double total() const noexcept { return level1 + level2; }
};

namespace detail {

inline double euclid_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// Calls emit(i, j, x_{ij}, y_{ij}) for all grid intervals in DP order.
template <class Emit>
void for_each_interval(const GridRoughPath& x, const GridRoughPath& y, Emit&& emit) {
  const auto m = x.resolution();
  for (std::size_t i = 0; i < m; ++i) {
    auto ax = RoughIncrement::identity(x.dimension());
    auto ay = RoughIncrement::identity(x.dimension());
    for (std::size_t j = i + 1; j <= m; ++j) {
      chen_extend(ax, x.step_level1(j - 1), x.step_level2(j - 1));
      chen_extend(ay, y.step_level1(j - 1), y.step_level2(j - 1));
      emit(i, j, ax, ay);
    }
  }
}

}  // namespace detail

/// Both suprema of the p-variation metric, each over its own partition.
inline PVarTerms p_var_terms(const GridRoughPath& x, const GridRoughPath& y, double p) {
  if (x.resolution() != y.resolution() || x.dimension() != y.dimension())
    throw DomainError("p_var_dist: grid or dimension mismatch");
  const auto m = x.resolution();
  std::vector<double> best1(m + 1, -1.0), best2(m + 1, -1.0);
  best1[0] = best2[0] = 0.0;
  const double q = 0.5 * p;
  detail::for_each_interval(x, y, [&](std::size_t i, std::size_t j, const RoughIncrement& a,
                                      const RoughIncrement& b) {
    const double c1 = best1[i] + std::pow(detail::euclid_diff(a.level1, b.level1), p);
    const double c2 = best2[i] + std::pow(detail::euclid_diff(a.level2, b.level2), q);
    best1[j] = std::max(best1[j], c1);
    best2[j] = std::max(best2[j], c2);
  });
  return {std::pow(best1[m], 1.0 / p), std::pow(best2[m], 1.0 / q)};
}

/// d_p(x, y) for 2 < p < 3.
inline double p_var_dist(const GridRoughPath& x, const GridRoughPath& y, double p = default_p) {
  if (!(p > 2.0 && p < 3.0)) throw DomainError("p_var_dist: p must lie in (2,3)");
  return p_var_terms(x, y, p).total();
}

}  // namespace chaoscale
