#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "chaoscale/error.hpp"

namespace chaoscale {

/// One-dimensional factor function on [0,1].
///
/// Three representations are supported. Constants and polynomials evaluate,
/// differentiate and integrate exactly. Grid factors hold samples at the
/// uniform nodes i/m and are read through their piecewise-linear interpolant.
class FactorFn {
public:
  struct Constant {
    double c = 0.0;
  };
  /// Coefficients in ascending powers of t.
  struct Polynomial {
    std::vector<double> coeffs;
  };
  /// samples[i] is the value at t = i/m, m = samples.size() - 1.
  struct Grid {
    std::vector<double> samples;
  };

  enum class Kind { constant, polynomial, grid };

  FactorFn() : repr_(Constant{1.0}) {}

  static FactorFn constant(double c) { return FactorFn(Constant{c}); }

  static FactorFn polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) coeffs.push_back(0.0);
    return FactorFn(Polynomial{std::move(coeffs)});
  }

  static FactorFn grid(std::vector<double> samples) {
    detail::require(samples.size() >= 2, "grid factor needs at least two samples");
    return FactorFn(Grid{std::move(samples)});
  }

  Kind kind() const noexcept { return static_cast<Kind>(repr_.index()); }
  const auto& repr() const noexcept { return repr_; }

  /// Grid resolution m for grid factors, 0 for closed forms.
  std::size_t resolution() const noexcept {
    if (auto g = std::get_if<Grid>(&repr_)) return g->samples.size() - 1;
    return 0;
  }

  double operator()(double t) const {
    return std::visit(
        [t](const auto& r) -> double {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, Constant>) {
            return r.c;
          } else if constexpr (std::is_same_v<R, Polynomial>) {
            double v = 0.0;
            for (auto it = r.coeffs.rbegin(); it != r.coeffs.rend(); ++it) v = v * t + *it;
            return v;
          } else {
            const auto m = r.samples.size() - 1;
            const auto [i, frac] = locate(t, m);
            return r.samples[i] + frac * (r.samples[i + 1] - r.samples[i]);
          }
        },
        repr_);
  }

  /// d/dt. Grid factors return the slope of the segment containing t
  /// (right segment at interior nodes, last segment at t = 1).
  double derivative(double t) const {
    return std::visit(
        [t](const auto& r) -> double {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, Constant>) {
            return 0.0;
          } else if constexpr (std::is_same_v<R, Polynomial>) {
            double v = 0.0;
            for (std::size_t k = r.coeffs.size(); k-- > 1;) v = v * t + static_cast<double>(k) * r.coeffs[k];
            return v;
          } else {
            const auto m = r.samples.size() - 1;
            const auto i = locate(t, m).first;
            return static_cast<double>(m) * (r.samples[i + 1] - r.samples[i]);
          }
        },
        repr_);
  }

  /// Exact integral over [a,b] (grid factors: integral of the interpolant).
  double integral(double a, double b) const {
    return std::visit(
        [a, b](const auto& r) -> double {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, Constant>) {
            return r.c * (b - a);
          } else if constexpr (std::is_same_v<R, Polynomial>) {
            return antiderivative(r.coeffs, b) - antiderivative(r.coeffs, a);
          } else {
            return interpolant_integral(r.samples, b) - interpolant_integral(r.samples, a);
          }
        },
        repr_);
  }

  /// Polynomial coefficients for closed forms; empty for grid factors.
  std::vector<double> as_polynomial() const {
    if (auto c = std::get_if<Constant>(&repr_)) return {c->c};
    if (auto p = std::get_if<Polynomial>(&repr_)) return p->coeffs;
    return {};
  }

  static double antiderivative(const std::vector<double>& coeffs, double t) {
    double v = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 0;) v = v * t + coeffs[k] / static_cast<double>(k + 1);
    return v * t;
  }

private:
  using Repr = std::variant<Constant, Polynomial, Grid>;
  explicit FactorFn(Repr r) : repr_(std::move(r)) {}

  static std::pair<std::size_t, double> locate(double t, std::size_t m) {
    const double x = std::clamp(t, 0.0, 1.0) * static_cast<double>(m);
    auto i = static_cast<std::size_t>(x);
    if (i >= m) i = m - 1;
    return {i, x - static_cast<double>(i)};
  }

  static double interpolant_integral(const std::vector<double>& s, double t) {
    const auto m = s.size() - 1;
    const double h = 1.0 / static_cast<double>(m);
    const auto [i, frac] = locate(t, m);
    double acc = 0.0;
    for (std::size_t k = 0; k < i; ++k) acc += 0.5 * h * (s[k] + s[k + 1]);
    const double vt = s[i] + frac * (s[i + 1] - s[i]);
    return acc + 0.5 * frac * h * (s[i] + vt);
  }

  Repr repr_;
};

namespace detail {

inline std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

}  // namespace detail

/// Integral of f*g over [0, upper]. Exact for closed-form pairs; composite
/// trapezoid at max(m_f, m_g) nodes otherwise.
inline double factor_inner(const FactorFn& f, const FactorFn& g, double upper = 1.0) {
  if (f.kind() != FactorFn::Kind::grid && g.kind() != FactorFn::Kind::grid) {
    return FactorFn::antiderivative(detail::poly_mul(f.as_polynomial(), g.as_polynomial()), upper);
  }
  const auto m = std::max(f.resolution(), g.resolution());
  const double h = upper / static_cast<double>(m);
  double acc = 0.5 * (f(0.0) * g(0.0) + f(upper) * g(upper));
  for (std::size_t i = 1; i < m; ++i) {
    const double t = h * static_cast<double>(i);
    acc += f(t) * g(t);
  }
  return acc * h;
}

}  // namespace chaoscale
