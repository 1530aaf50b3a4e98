#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <numeric>
#include <sstream>
#include <vector>

#include "chaoscale/error.hpp"

namespace chaoscale {

struct MinimizeOptions {
  std::size_t max_iter = 400;
  std::size_t memory = 8;
  double fd_step = 1e-5;
  double grad_tol = 1e-9;
  double rel_tol = 1e-13;
};

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

template <class Fn>
double checked_eval(Fn& f, const std::vector<double>& x) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "objective is not finite (value " << v << ") at a point with |x|_inf = ";
    double mx = 0.0;
    for (double xi : x) mx = std::max(mx, std::abs(xi));
    os << mx;
    throw NumericalError(os.str());
  }
  return v;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

/// Central finite-difference gradient with a fixed step.
template <class Fn>
std::vector<double> fd_gradient(Fn& f, std::vector<double> x, double step) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + step;
    const double up = detail::checked_eval(f, x);
    x[i] = xi - step;
    const double down = detail::checked_eval(f, x);
    x[i] = xi;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

/// Quasi-Newton descent (limited-memory BFGS directions) with Armijo
/// backtracking, on finite-difference gradients.
template <class Fn>
MinimizeResult minimize(Fn&& f, std::vector<double> x, const MinimizeOptions& opt = {}) {
  MinimizeResult res;
  double fx = detail::checked_eval(f, x);
  auto g = fd_gradient(f, x, opt.fd_step);
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::size_t stalls = 0;

  for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
    double gmax = 0.0;
    for (double gi : g) gmax = std::max(gmax, std::abs(gi));
    if (gmax < opt.grad_tol) {
      res.converged = true;
      break;
    }

    // two-loop recursion
    std::vector<double> d(g);
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * detail::dot(s_hist[k], d);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= alpha[k] * y_hist[k][i];
    }
    if (!s_hist.empty()) {
      const double gamma = detail::dot(s_hist.back(), y_hist.back()) / detail::dot(y_hist.back(), y_hist.back());
      for (double& di : d) di *= gamma;
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * detail::dot(y_hist[k], d);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += s_hist[k][i] * (alpha[k] - beta);
    }
    for (double& di : d) di = -di;
    double slope = detail::dot(g, d);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = g;
      for (double& di : d) di = -di;
      slope = detail::dot(g, d);
    }

    double step = 1.0;
    if (s_hist.empty()) {
      // first step: keep the move O(1) in the largest coordinate
      double dmax = 0.0;
      for (double di : d) dmax = std::max(dmax, std::abs(di));
      if (dmax > 0.0) step = std::min(1.0, 1.0 / dmax);
    }
    std::vector<double> xn(x.size());
    double fn = fx;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < x.size(); ++i) xn[i] = x[i] + step * d[i];
      fn = detail::checked_eval(f, xn);
      if (fn <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (s_hist.empty()) break;
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      continue;
    }

    auto gn = fd_gradient(f, xn, opt.fd_step);
    std::vector<double> s(x.size()), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      s[i] = xn[i] - x[i];
      y[i] = gn[i] - g[i];
    }
    const double sy = detail::dot(s, y);
    if (sy > 1e-300) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    const double change = std::abs(fx - fn);
    x.swap(xn);
    g.swap(gn);
    fx = fn;
    if (change <= opt.rel_tol * std::max(1.0, std::abs(fx))) {
      if (++stalls >= 3) {
        res.converged = true;
        break;
      }
    } else {
      stalls = 0;
    }
  }
  res.x = std::move(x);
  res.value = fx;
  return res;
}

}  // namespace chaoscale
