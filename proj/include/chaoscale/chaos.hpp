#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "chaoscale/error.hpp"
#include "chaoscale/factor.hpp"

namespace chaoscale {

/// Largest order for which explicit symmetrization is allowed.
inline constexpr std::size_t max_symmetrize_order = 8;

/// coeff * f^1(t_1) * ... * f^n(t_n)
struct ProductTerm {
  double coeff = 1.0;
  std::vector<FactorFn> factors;

  std::size_t order() const noexcept { return factors.size(); }
};

/// Order-n kernel stored as a sum of product terms (not necessarily
/// symmetric). An empty term list is the zero kernel.
class Kernel {
public:
  explicit Kernel(std::size_t order, std::vector<ProductTerm> terms = {})
      : order_(order), terms_(std::move(terms)) {
    detail::require(order_ >= 1, "kernel order must be >= 1");
    for (const auto& t : terms_) {
      detail::require(t.order() == order_, "kernel term order " + std::to_string(t.order()) +
                                               " does not match kernel order " + std::to_string(order_));
      detail::require(std::isfinite(t.coeff), "kernel coefficient must be finite");
    }
  }

  /// Single product term with identical factors f (x) ... (x) f.
  static Kernel power(std::size_t order, const FactorFn& f, double coeff = 1.0) {
    return Kernel(order, {ProductTerm{coeff, std::vector<FactorFn>(order, f)}});
  }

  std::size_t order() const noexcept { return order_; }
  const std::vector<ProductTerm>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }

  Kernel scaled(double c) const {
    auto terms = terms_;
    for (auto& t : terms) t.coeff *= c;
    return Kernel(order_, std::move(terms));
  }

  friend Kernel operator-(const Kernel& a, const Kernel& b) {
    detail::require(a.order_ == b.order_, "kernel order mismatch");
    auto terms = a.terms_;
    for (auto t : b.terms_) {
      t.coeff = -t.coeff;
      terms.push_back(std::move(t));
    }
    return Kernel(a.order_, std::move(terms));
  }

private:
  std::size_t order_;
  std::vector<ProductTerm> terms_;
};

/// Finite chaos vector: one kernel per order, orders 1..N.
class ChaosVector {
public:
  ChaosVector() = default;

  explicit ChaosVector(std::vector<Kernel> kernels) {
    for (auto& k : kernels) add(std::move(k));
  }

  /// Adds k; terms are appended when the order is already present.
  ChaosVector& add(Kernel k) {
    auto it = kernels_.find(k.order());
    if (it == kernels_.end()) {
      kernels_.emplace(k.order(), std::move(k));
    } else {
      auto terms = it->second.terms();
      terms.insert(terms.end(), k.terms().begin(), k.terms().end());
      it->second = Kernel(k.order(), std::move(terms));
    }
    return *this;
  }

  const std::map<std::size_t, Kernel>& kernels() const noexcept { return kernels_; }
  bool empty() const noexcept { return kernels_.empty(); }

  std::size_t max_order() const noexcept { return kernels_.empty() ? 0 : kernels_.rbegin()->first; }

  const Kernel* find(std::size_t order) const {
    auto it = kernels_.find(order);
    return it == kernels_.end() ? nullptr : &it->second;
  }

  std::size_t term_count() const noexcept {
    std::size_t n = 0;
    for (const auto& [order, k] : kernels_) n += k.terms().size();
    return n;
  }

private:
  std::map<std::size_t, Kernel> kernels_;
};

/// All n! factor permutations of every term, each weighted by 1/n!.
inline Kernel symmetrize(const Kernel& k) {
  const auto n = k.order();
  if (n > max_symmetrize_order)
    throw DomainError("symmetrize: order " + std::to_string(n) + " exceeds cap " +
                      std::to_string(max_symmetrize_order));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double nfact = 1.0;
  for (std::size_t i = 2; i <= n; ++i) nfact *= static_cast<double>(i);

  std::vector<ProductTerm> out;
  for (const auto& term : k.terms()) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    do {
      ProductTerm p{term.coeff / nfact, {}};
      p.factors.reserve(n);
      for (auto idx : perm) p.factors.push_back(term.factors[idx]);
      out.push_back(std::move(p));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return Kernel(n, std::move(out));
}

/// ||k||^2 over [0,upper]^n by Gram expansion over term pairs.
inline double cube_norm_sq(const Kernel& k, double upper = 1.0) {
  const auto& terms = k.terms();
  double acc = 0.0;
  for (std::size_t a = 0; a < terms.size(); ++a) {
    for (std::size_t b = 0; b < terms.size(); ++b) {
      double prod = terms[a].coeff * terms[b].coeff;
      for (std::size_t i = 0; i < k.order() && prod != 0.0; ++i)
        prod *= factor_inner(terms[a].factors[i], terms[b].factors[i], upper);
      acc += prod;
    }
  }
  return std::max(acc, 0.0);
}

namespace detail {

/// Ryser's formula; n <= max_symmetrize_order keeps this at 2^n * n^2.
inline double permanent(const std::vector<double>& a, std::size_t n) {
  if (n == 0) return 1.0;
  double total = 0.0;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    double prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (mask & (std::size_t{1} << j)) row += a[i * n + j];
      prod *= row;
    }
    const auto bits = static_cast<std::size_t>(__builtin_popcountll(mask));
    total += ((n - bits) % 2 == 0 ? 1.0 : -1.0) * prod;
  }
  return total;
}

}  // namespace detail

/// ||symmetrize(k)||^2 over [0,upper]^n without expanding the n! terms:
/// (1/n!) * sum over term pairs of coeff*coeff' * perm(G), with G the Gram
/// matrix of factor inner products.
inline double symmetric_norm_sq(const Kernel& k, double upper = 1.0) {
  const auto n = k.order();
  if (n > max_symmetrize_order)
    throw DomainError("symmetrize: order " + std::to_string(n) + " exceeds cap " +
                      std::to_string(max_symmetrize_order));
  double nfact = 1.0;
  for (std::size_t i = 2; i <= n; ++i) nfact *= static_cast<double>(i);
  const auto& terms = k.terms();
  std::vector<double> gram(n * n);
  double acc = 0.0;
  for (std::size_t a = 0; a < terms.size(); ++a) {
    for (std::size_t b = 0; b < terms.size(); ++b) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          gram[i * n + j] = factor_inner(terms[a].factors[i], terms[b].factors[j], upper);
      acc += terms[a].coeff * terms[b].coeff * detail::permanent(gram, n);
    }
  }
  return std::max(acc / nfact, 0.0);
}

inline double factorial(std::size_t n) {
  double f = 1.0;
  for (std::size_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
  return f;
}

/// (1/n!) ||sym f_n||^2 for every order present, keyed by order.
inline std::map<std::size_t, double> chaos_components(const ChaosVector& x, double upper = 1.0) {
  std::map<std::size_t, double> out;
  for (const auto& [n, k] : x.kernels()) out[n] = symmetric_norm_sq(k, upper) / factorial(n);
  return out;
}

/// ||xi - E xi||_2^2 = sum_n (1/n!) ||sym f_n||^2.
inline double chaos_norm_sq(const ChaosVector& x) {
  double acc = 0.0;
  for (const auto& [n, v] : chaos_components(x)) acc += v;
  return acc;
}

/// Squared chaos norm of the orders strictly above N.
inline double chaos_tail_sq(const ChaosVector& x, std::size_t N) {
  double acc = 0.0;
  for (const auto& [n, v] : chaos_components(x))
    if (n > N) acc += v;
  return acc;
}

/// P_t: multiplies the order-n kernel by exp(-n t).
inline ChaosVector ou_scale(const ChaosVector& x, double t) {
  detail::require(t >= 0.0, "ou_scale: t must be >= 0");
  ChaosVector out;
  for (const auto& [n, k] : x.kernels()) out.add(k.scaled(std::exp(-static_cast<double>(n) * t)));
  return out;
}

/// P_{-log sqrt(eps)}: order-n kernel scaled by eps^{n/2}.
inline ChaosVector gamma_scale(const ChaosVector& x, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("gamma_scale: eps must lie in (0,1]");
  ChaosVector out;
  for (const auto& [n, k] : x.kernels()) out.add(k.scaled(std::pow(eps, 0.5 * static_cast<double>(n))));
  return out;
}

/// Drops every kernel of order > N.
inline ChaosVector truncate(const ChaosVector& x, std::size_t N) {
  ChaosVector out;
  for (const auto& [n, k] : x.kernels())
    if (n <= N) out.add(k);
  return out;
}

/// The kernels of order > N (so that x = truncate(x,N) + tail(x,N)).
inline ChaosVector tail(const ChaosVector& x, std::size_t N) {
  ChaosVector out;
  for (const auto& [n, k] : x.kernels())
    if (n > N) out.add(k);
  return out;
}

struct ApproxSchedule {
  std::size_t order = 0;     ///< N_n
  double residual_sq = 0.0;  ///< chaos tail above N_n
};

/// Smallest N with sum_{k>N} (1/k!) ||f_k||^2 < 1/(2 n^2).
inline ApproxSchedule approx_schedule(const ChaosVector& x, std::size_t n) {
  detail::require(n >= 1, "approx_schedule: index must be >= 1");
  const auto comps = chaos_components(x);
  const double tol = 1.0 / (2.0 * static_cast<double>(n) * static_cast<double>(n));
  for (std::size_t N = 0;; ++N) {
    double tail_sq = 0.0;
    for (const auto& [k, v] : comps)
      if (k > N) tail_sq += v;
    if (tail_sq < tol) return {N, tail_sq};
  }
}

/// Cauchy-Schwarz bound on sup_{h in K_L} ||F(h) - F_N(h)||:
/// sqrt(sum (2L)^n/n!) * sqrt(sum (1/n!) ||f_n||^2), both sums over the
/// orders n > N carried by x.
inline double truncation_tail_bound(const ChaosVector& x, std::size_t N, double level) {
  detail::require(level >= 0.0, "truncation_tail_bound: level must be >= 0");
  double energy_part = 0.0;
  double kernel_part = 0.0;
  for (const auto& [n, v] : chaos_components(x)) {
    if (n <= N || v == 0.0) continue;
    energy_part += std::pow(2.0 * level, static_cast<double>(n)) / factorial(n);
    kernel_part += v;
  }
  return std::sqrt(energy_part) * std::sqrt(kernel_part);
}

}  // namespace chaoscale
