#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "chaoscale/chaos.hpp"
#include "chaoscale/error.hpp"
#include "chaoscale/parallel.hpp"
#include "chaoscale/path.hpp"
#include "chaoscale/random.hpp"

namespace chaoscale {

/// F(h) on the grid of h, with the contribution of every order kept.
struct SkeletonResult {
  GridPath path;
  std::map<std::size_t, GridPath> per_order;
};

namespace detail {

/// One grid segment: factors frozen at g, h linear with increment d. The
/// iterated integrals of a straight piece are d^r / r!, so
/// u_k += sum_{r=1..k} u_{k-r} g_{k-r+1} ... g_k d^r / r!  (top level first).
inline void exact_segment(std::vector<double>& u, const double* g, double d) {
  for (std::size_t k = u.size() - 1; k >= 1; --k) {
    double prod = 1.0, add = 0.0;
    for (std::size_t r = 1; r <= k; ++r) {
      prod *= g[k - r] * d / static_cast<double>(r);
      add += u[k - r] * prod;
    }
    u[k] += add;
  }
}

/// Nested simplex integral of one product term against dh, written into
/// `out` (size m+1). `scratch` is reused between calls.
inline void eval_term_into(const ProductTerm& term, const CameronMartinPath& h, std::vector<double>& out,
                           std::vector<double>& scratch) {
  const auto m = h.resolution();
  const auto n = term.order();
  const auto& v = h.path();
  out.assign(m + 1, 0.0);
  if (n == 0) return;
  scratch.assign(n + 1, 0.0);
  scratch[0] = term.coeff;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < m; ++i) {
    const double mid = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
    for (std::size_t l = 0; l < n; ++l) g[l] = term.factors[l](mid);
    exact_segment(scratch, g.data(), v[i + 1] - v[i]);
    out[i + 1] = scratch[n];
  }
}

}  // namespace detail

/// u_0 = coeff, u_k(t) = int_0^t u_{k-1} f^k dh; returns u_n on the grid.
/// Per segment: factors at the midpoint, exact iterated integrals of dh.
inline GridPath eval_term(const ProductTerm& term, const CameronMartinPath& h) {
  detail::require(term.order() >= 1, "eval_term: order must be >= 1");
  std::vector<double> out, scratch;
  detail::eval_term_into(term, h, out, scratch);
  return GridPath(std::move(out));
}

/// Sum of eval_term over all terms, ascending order then term index.
inline SkeletonResult eval_skeleton(const ChaosVector& x, const CameronMartinPath& h) {
  const auto m = h.resolution();
  std::vector<double> total(m + 1, 0.0), acc, out, scratch;
  SkeletonResult result;
  for (const auto& [n, k] : x.kernels()) {
    acc.assign(m + 1, 0.0);
    for (const auto& term : k.terms()) {
      detail::eval_term_into(term, h, out, scratch);
      for (std::size_t i = 0; i <= m; ++i) acc[i] += out[i];
    }
    for (std::size_t i = 0; i <= m; ++i) total[i] += acc[i];
    result.per_order.emplace(n, GridPath(acc));
  }
  result.path = GridPath(std::move(total));
  return result;
}

/// F(h) from raw grid values of h with factor midpoints tabulated once;
/// used in inner optimisation loops. Same recursion as eval_term.
class SkeletonEvaluator {
public:
  SkeletonEvaluator(const ChaosVector& x, std::size_t m) : m_(m) {
    for (const auto& [n, k] : x.kernels()) {
      for (const auto& term : k.terms()) {
        Table t{term.coeff, {}};
        for (const auto& f : term.factors) {
          std::vector<double> mids(m);
          for (std::size_t i = 0; i < m; ++i) mids[i] = f((static_cast<double>(i) + 0.5) / static_cast<double>(m));
          t.mids.push_back(std::move(mids));
        }
        tables_.push_back(std::move(t));
      }
    }
  }

  std::size_t resolution() const noexcept { return m_; }

  void evaluate(std::span<const double> h, std::vector<double>& out, std::vector<double>& state,
                std::vector<double>& g) const {
    out.assign(m_ + 1, 0.0);
    for (const auto& t : tables_) {
      const auto n = t.mids.size();
      if (n == 0) continue;
      state.assign(n + 1, 0.0);
      state[0] = t.coeff;
      g.resize(n);
      for (std::size_t i = 0; i < m_; ++i) {
        for (std::size_t l = 0; l < n; ++l) g[l] = t.mids[l][i];
        detail::exact_segment(state, g.data(), h[i + 1] - h[i]);
        out[i + 1] += state[n];
      }
    }
  }

private:
  struct Table {
    double coeff;
    std::vector<std::vector<double>> mids;
  };
  std::size_t m_;
  std::vector<Table> tables_;
};

struct UniformGap {
  double max_gap = 0.0;
  double bound = 0.0;
};

/// Largest sup-norm gap between F and F_N over `samples` paths drawn from
/// K_L, paired with the analytic truncation bound.
inline UniformGap uniform_gap(const ChaosVector& x, std::size_t N, double level, std::size_t samples,
                              std::uint64_t seed, std::size_t m = 64) {
  detail::require(samples >= 1, "uniform_gap: samples must be >= 1");
  const auto truncated = truncate(x, N);
  std::vector<double> gaps(samples, 0.0);
  parallel_for(samples, [&](std::size_t k) {
    const auto h = sample_level_set(level, m, substream_seed(seed, k));
    gaps[k] = sup_norm(eval_skeleton(x, h).path - eval_skeleton(truncated, h).path);
  });
  return {*std::max_element(gaps.begin(), gaps.end()), truncation_tail_bound(x, N, level)};
}

/// Equicontinuity bound |F(h)_t - F(h)_s| <= e^L sqrt(sum (1/n!) int_{D[s,t]} |f_n|^2)
/// with D[s,t] = [0,t]^n minus [0,s]^n.
inline double modulus_bound(const ChaosVector& x, double s, double t, double level) {
  if (s > t) throw DomainError("modulus_bound: s must not exceed t");
  detail::require(s >= 0.0 && t <= 1.0, "modulus_bound: times must lie in [0,1]");
  detail::require(level >= 0.0, "modulus_bound: level must be >= 0");
  if (s == t) return 0.0;
  double acc = 0.0;
  for (const auto& [n, k] : x.kernels()) {
    const double diff = symmetric_norm_sq(k, t) - symmetric_norm_sq(k, s);
    acc += std::max(diff, 0.0) / factorial(n);
  }
  return std::exp(level) * std::sqrt(acc);
}

}  // namespace chaoscale
