#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "chaoscale/chaos.hpp"
#include "chaoscale/error.hpp"
#include "chaoscale/iterated.hpp"
#include "chaoscale/path.hpp"

namespace chaoscale {

/// Which drift the closed system carries. `ito` keeps the -1/2 eps
/// correction terms, so pi_1 reproduces the multiple Ito integrals;
/// `stratonovich` drops them, so pi_1 gives the Stratonovich integrals and,
/// driven by a smooth h, the skeleton F(h).
enum class SystemKind { ito, stratonovich };

/// Stacked state (Z, X^{c,k,j}) of the closed linear system. Every entry is a
/// pair; values are laid out pair by pair, Z first.
struct SystemState {
  std::vector<double> values;

  double z_first() const { return values[0]; }
  double z_second() const { return values[1]; }
};

/// Sparse affine dynamics dX = A(t,X) o dw + D(t,X) dt.
///
/// For a product term c * f^1 (x) ... (x) f^n (chain index c) the pair
/// X^{c,k,j}, 1 <= k < n, 0 <= j < k, holds
///   ( eps^{(n-k)/2} I_{n-k}(t), eps^{(n-k)/2} g_{k,j}(t) I_{n-k}(t) ),
/// I_r = int_{t_1<..<t_r<t} f^1 .. f^r dw, g_{k,j} = f^{n-j} ... f^{n-k+1}.
/// X^{c,n,j} = (1, g_{n,j}(t)) enters as a known forcing, X^{c,k,j} = 0 for k > n.
class LinearSystem {
public:
  /// Product of factors (or its derivative) evaluated at t.
  struct TimeFn {
    std::vector<std::size_t> factors;
    bool derivative = false;
  };
  /// scale * fn(t) * state[source] added to component `target`. fn < 0 means 1.
  struct LinearTerm {
    std::size_t target;
    std::size_t source;
    double scale;
    int fn;
  };
  /// scale * fn(t) added to component `target`.
  struct Forcing {
    std::size_t target;
    double scale;
    int fn;
  };

  std::size_t state_size() const noexcept { return size_; }
  double eps() const noexcept { return eps_; }
  SystemKind kind() const noexcept { return kind_; }

  /// Offset of the first component of X^{chain,k,j}.
  std::size_t offset(std::size_t chain, std::size_t k, std::size_t j) const {
    auto it = index_.find({chain, k, j});
    if (it == index_.end()) throw DomainError("system has no variable X^{" + std::to_string(chain) + "," +
                                              std::to_string(k) + "," + std::to_string(j) + "}");
    return it->second;
  }

  std::size_t chain_count() const noexcept { return chains_; }

  double eval_fn(int fn, double t) const {
    if (fn < 0) return 1.0;
    const auto& f = fns_[static_cast<std::size_t>(fn)];
    if (!f.derivative) {
      double v = 1.0;
      for (auto idx : f.factors) v *= factors_[idx](t);
      return v;
    }
    double total = 0.0;
    for (std::size_t a = 0; a < f.factors.size(); ++a) {
      double v = factors_[f.factors[a]].derivative(t);
      for (std::size_t b = 0; b < f.factors.size() && v != 0.0; ++b)
        if (b != a) v *= factors_[f.factors[b]](t);
      total += v;
    }
    return total;
  }

  std::size_t fn_count() const noexcept { return fns_.size(); }
  const std::vector<LinearTerm>& noise() const noexcept { return noise_; }
  const std::vector<LinearTerm>& drift() const noexcept { return drift_; }
  const std::vector<Forcing>& noise_forcing() const noexcept { return noise_forcing_; }
  const std::vector<Forcing>& drift_forcing() const noexcept { return drift_forcing_; }

private:
  friend LinearSystem build_system(const ChaosVector&, double, SystemKind);

  int add_fn(std::vector<std::size_t> factors, bool derivative) {
    if (factors.empty() && !derivative) return -1;
    fns_.push_back({std::move(factors), derivative});
    return static_cast<int>(fns_.size() - 1);
  }

  double eps_ = 0.0;
  SystemKind kind_ = SystemKind::ito;
  std::size_t size_ = 2;
  std::size_t chains_ = 0;
  std::vector<FactorFn> factors_;
  std::vector<TimeFn> fns_;
  std::vector<LinearTerm> noise_, drift_;
  std::vector<Forcing> noise_forcing_, drift_forcing_;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::size_t> index_;
};

/// Assembles the closed system whose first coordinate is
/// Y^eps_t = sum_n eps^{n/2} J_n(f_n)_t. One chain per product term.
inline LinearSystem build_system(const ChaosVector& x, double eps, SystemKind kind = SystemKind::ito) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw DomainError("build_system: eps must lie in [0,1]");
  LinearSystem sys;
  sys.eps_ = eps;
  sys.kind_ = kind;
  const double root = std::sqrt(eps);
  const bool with_correction = kind == SystemKind::ito;

  std::size_t chain = 0;
  for (const auto& [n, kernel] : x.kernels()) {
    for (const auto& term : kernel.terms()) {
      if (term.order() != n) throw DomainError("build_system: kernel is not in product form");
      const std::size_t base = sys.factors_.size();
      for (const auto& f : term.factors) sys.factors_.push_back(f);
      // factor f^r (1-based) lives at base + r - 1
      auto g_factors = [&](std::size_t k, std::size_t j) {
        std::vector<std::size_t> ids;
        for (std::size_t i = j; i < k; ++i) ids.push_back(base + (n - i) - 1);
        return ids;
      };
      for (std::size_t k = 1; k < n; ++k)
        for (std::size_t j = 0; j < k; ++j) {
          sys.index_[{chain, k, j}] = sys.size_;
          sys.size_ += 2;
        }

      // Adds scale * (second component of X^{k,j}) to `target`.
      auto couple = [&](bool noise, std::size_t target, double scale, std::size_t k, std::size_t j) {
        if (scale == 0.0 || k > n) return;
        if (k == n) {
          const int fn = sys.add_fn(g_factors(n, j), false);
          (noise ? sys.noise_forcing_ : sys.drift_forcing_).push_back({target, scale, fn});
        } else {
          (noise ? sys.noise_ : sys.drift_).push_back({target, sys.index_.at({chain, k, j}) + 1, scale, -1});
        }
      };

      // dZ = sqrt(eps) c (E12 + E22) X^{1,0} o dw - 1/2 eps c (E12 + E22) X^{2,0} dt
      for (std::size_t target : {std::size_t{0}, std::size_t{1}}) {
        couple(true, target, root * term.coeff, 1, 0);
        if (with_correction) couple(false, target, -0.5 * eps * term.coeff, 2, 0);
      }
      for (std::size_t k = 1; k < n; ++k) {
        for (std::size_t j = 0; j < k; ++j) {
          const auto a = sys.index_.at({chain, k, j});
          const auto b = a + 1;
          couple(true, a, root, k + 1, k);
          couple(true, b, root, k + 1, j);
          if (with_correction) {
            couple(false, a, -0.5 * eps, k + 2, k);
            couple(false, b, -0.5 * eps, k + 2, j);
          }
          // d(g I) = g' I dt + g dI: the second component picks up g' times the first.
          auto ids = g_factors(k, j);
          bool varying = false;
          for (auto id : ids) varying = varying || sys.factors_[id].kind() != FactorFn::Kind::constant;
          if (varying) sys.drift_.push_back({b, a, 1.0, sys.add_fn(std::move(ids), true)});
        }
      }
      ++chain;
    }
  }
  sys.chains_ = chain;
  return sys;
}

namespace detail {

struct FnTable {
  std::vector<double> values;  // [fn][point]
  std::size_t points;
  double at(int fn, std::size_t p) const { return fn < 0 ? 1.0 : values[static_cast<std::size_t>(fn) * points + p]; }
};

inline void apply(const LinearSystem& sys, const FnTable& tab, std::size_t point, const std::vector<double>& x,
                  double dt, double dw, std::vector<double>& out) {
  for (const auto& e : sys.drift()) out[e.target] += e.scale * tab.at(e.fn, point) * x[e.source] * dt;
  for (const auto& e : sys.drift_forcing()) out[e.target] += e.scale * tab.at(e.fn, point) * dt;
  for (const auto& e : sys.noise()) out[e.target] += e.scale * tab.at(e.fn, point) * x[e.source] * dw;
  for (const auto& e : sys.noise_forcing()) out[e.target] += e.scale * tab.at(e.fn, point) * dw;
}

}  // namespace detail

/// Midpoint scheme with Heun predictor over the increments of `driver`:
///   X~ = X + D(t_i, X) dt + A(t_i, X) dw_i,  Xbar = (X + X~)/2,
///   X[i+1] = X + D(t_{i+1/2}, Xbar) dt + A(t_{i+1/2}, Xbar) dw_i.
/// Returns the full state at every grid time.
inline std::vector<SystemState> integrate_states(const LinearSystem& sys, const GridPath& driver) {
  const auto m = driver.resolution();
  const double dt = 1.0 / static_cast<double>(m);
  detail::FnTable tab{std::vector<double>(sys.fn_count() * (2 * m + 1)), 2 * m + 1};
  for (std::size_t f = 0; f < sys.fn_count(); ++f)
    for (std::size_t p = 0; p <= 2 * m; ++p)
      tab.values[f * tab.points + p] = sys.eval_fn(static_cast<int>(f), 0.5 * static_cast<double>(p) * dt);

  std::vector<SystemState> states;
  states.reserve(m + 1);
  std::vector<double> x(sys.state_size(), 0.0), pred(sys.state_size()), next(sys.state_size());
  states.push_back({x});
  for (std::size_t i = 0; i < m; ++i) {
    const double dw = driver[i + 1] - driver[i];
    pred = x;
    detail::apply(sys, tab, 2 * i, x, dt, dw, pred);
    for (std::size_t s = 0; s < x.size(); ++s) pred[s] = 0.5 * (x[s] + pred[s]);
    next = x;
    detail::apply(sys, tab, 2 * i + 1, pred, dt, dw, next);
    x.swap(next);
    states.push_back({x});
  }
  return states;
}

/// pi_1 of the integrated system, i.e. the first coordinate of Z.
inline GridPath integrate_system(const LinearSystem& sys, const GridPath& driver) {
  const auto states = integrate_states(sys, driver);
  std::vector<double> v(states.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = states[i].z_first();
  v[0] = 0.0;
  return GridPath(std::move(v));
}

inline GridPath integrate_system(const LinearSystem& sys, const BrownianPath& w) {
  return integrate_system(sys, w.path);
}

/// Drives the system with a Cameron-Martin path (dw_i := hdot_i dt).
inline GridPath integrate_system(const LinearSystem& sys, const CameronMartinPath& h) {
  return integrate_system(sys, h.path());
}

}  // namespace chaoscale
