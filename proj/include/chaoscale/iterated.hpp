#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "chaoscale/chaos.hpp"
#include "chaoscale/error.hpp"
#include "chaoscale/path.hpp"
#include "chaoscale/random.hpp"

namespace chaoscale {

/// Brownian motion sampled on t_i = i/m with the (seed, index) it came from.
struct BrownianPath {
  GridPath path;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

/// Draws the m increments of sample `index` under master `seed`, each
/// N(0, 1/m), into dw.
inline void sample_increments(std::size_t m, std::uint64_t seed, std::uint64_t index, std::vector<double>& dw) {
  auto rng = make_engine(seed, index);
  std::normal_distribution<double> normal(0.0, std::sqrt(1.0 / static_cast<double>(m)));
  dw.resize(m);
  for (double& x : dw) x = normal(rng);
}

inline BrownianPath sample_bm(std::size_t m, std::uint64_t seed, std::uint64_t index) {
  detail::require(m >= 1, "sample_bm: m must be >= 1");
  std::vector<double> dw;
  sample_increments(m, seed, index, dw);
  std::vector<double> v(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) v[i + 1] = v[i] + dw[i];
  return {GridPath(std::move(v)), seed, index};
}

namespace detail {

inline std::vector<double> increments_of(const GridPath& w) {
  std::vector<double> dw(w.resolution());
  for (std::size_t i = 0; i < dw.size(); ++i) dw[i] = w[i + 1] - w[i];
  return dw;
}

}  // namespace detail

/// Discrete multiple Ito integral: Z_0 = 1,
/// Z_k[i+1] = Z_k[i] + Z_{k-1}[i] f^k(t_i) dw_i. Returns coeff * Z_n.
inline GridPath ito_iterated(const ProductTerm& term, const GridPath& w) {
  const auto m = w.resolution();
  std::vector<double> prev(m + 1, 1.0), cur(m + 1);
  for (const auto& f : term.factors) {
    cur[0] = 0.0;
    for (std::size_t i = 0; i < m; ++i) cur[i + 1] = cur[i] + prev[i] * f(w.time(i)) * (w[i + 1] - w[i]);
    prev.swap(cur);
  }
  for (double& v : prev) v = term.factors.empty() ? 0.0 : term.coeff * v;
  return GridPath(std::move(prev));
}

inline GridPath ito_iterated(const ProductTerm& term, const BrownianPath& w) { return ito_iterated(term, w.path); }

/// Midpoint (Stratonovich) version of ito_iterated:
/// Z_k[i+1] = Z_k[i] + 1/2 (Z_{k-1}[i] + Z_{k-1}[i+1]) f^k(t_{i+1/2}) dw_i.
inline GridPath strat_iterated(const ProductTerm& term, const GridPath& w) {
  const auto m = w.resolution();
  std::vector<double> prev(m + 1, 1.0), cur(m + 1);
  for (const auto& f : term.factors) {
    cur[0] = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double mid = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
      cur[i + 1] = cur[i] + 0.5 * (prev[i] + prev[i + 1]) * f(mid) * (w[i + 1] - w[i]);
    }
    prev.swap(cur);
  }
  for (double& v : prev) v = term.factors.empty() ? 0.0 : term.coeff * v;
  return GridPath(std::move(prev));
}

inline GridPath strat_iterated(const ProductTerm& term, const BrownianPath& w) {
  return strat_iterated(term, w.path);
}

/// Stratonovich minus Ito for an order-2 term; tends to 1/2 int_0^t f^1 f^2 ds.
inline GridPath hu_meyer_gap(const ProductTerm& term, const GridPath& w) {
  if (term.order() != 2) throw DomainError("hu_meyer_gap: only order-2 terms are supported");
  return strat_iterated(term, w) - ito_iterated(term, w);
}

inline GridPath hu_meyer_gap(const ProductTerm& term, const BrownianPath& w) { return hu_meyer_gap(term, w.path); }

/// Sum of discrete Ito integrals of every term of x on one driving path.
/// Factor values are tabulated once at the grid nodes so the per-path cost
/// is one multiply-add per factor and step.
class ItoEvaluator {
public:
  ItoEvaluator(const ChaosVector& x, std::size_t m) : m_(m) {
    detail::require(m >= 1, "ItoEvaluator: m must be >= 1");
    for (const auto& [n, k] : x.kernels()) {
      for (const auto& term : k.terms()) {
        Table t{term.coeff, {}};
        for (const auto& f : term.factors) {
          std::vector<double> nodes(m);
          for (std::size_t i = 0; i < m; ++i) nodes[i] = f(GridPath::time_of(i, m));
          t.nodes.push_back(std::move(nodes));
        }
        tables_.push_back(std::move(t));
      }
    }
  }

  std::size_t resolution() const noexcept { return m_; }
  bool empty() const noexcept { return tables_.empty(); }

  /// y[i] = sum over terms of Z_n[i] for increments dw (size m).
  void evaluate(std::span<const double> dw, std::vector<double>& y, std::vector<double>& prev,
                std::vector<double>& cur) const {
    y.assign(m_ + 1, 0.0);
    prev.resize(m_ + 1);
    cur.resize(m_ + 1);
    for (const auto& t : tables_) {
      std::fill(prev.begin(), prev.end(), 1.0);
      for (const auto& f : t.nodes) {
        cur[0] = 0.0;
        for (std::size_t i = 0; i < m_; ++i) cur[i + 1] = cur[i] + prev[i] * f[i] * dw[i];
        prev.swap(cur);
      }
      for (std::size_t i = 0; i <= m_; ++i) y[i] += t.coeff * prev[i];
    }
  }

private:
  struct Table {
    double coeff;
    std::vector<std::vector<double>> nodes;
  };
  std::size_t m_;
  std::vector<Table> tables_;
};

/// sum_n J_n(f_n) on one path via the discrete Ito sums; pass
/// gamma_scale(x, eps) to obtain Y^eps.
inline GridPath ito_chaos(const ChaosVector& x, const GridPath& w) {
  ItoEvaluator eval(x, w.resolution());
  std::vector<double> y, a, b;
  const auto dw = detail::increments_of(w);
  eval.evaluate(dw, y, a, b);
  return GridPath(std::move(y));
}

}  // namespace chaoscale
