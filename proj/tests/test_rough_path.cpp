#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "chaoscale/iterated.hpp"
#include "chaoscale/path.hpp"
#include "chaoscale/rough_path.hpp"

using namespace chaoscale;
using Catch::Approx;

namespace {

std::vector<GridPath> random_paths(std::size_t d, std::size_t m, std::uint64_t seed) {
  std::vector<GridPath> out;
  for (std::size_t i = 0; i < d; ++i) out.push_back(sample_bm(m, seed, i).path);
  return out;
}

// Area over [a,b] straight from the coordinates: sum over steps of
// (x_i(t_k) - x_i(t_a)) dx_j + 1/2 dx_i dx_j.
std::vector<double> direct_level2(const std::vector<GridPath>& xs, std::size_t a, std::size_t b) {
  const auto d = xs.size();
  std::vector<double> out(d * d, 0.0);
  for (std::size_t k = a; k < b; ++k)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double di = xs[i][k + 1] - xs[i][k];
        const double dj = xs[j][k + 1] - xs[j][k];
        out[i * d + j] += (xs[i][k] - xs[i][a]) * dj + 0.5 * di * dj;
      }
  return out;
}

double norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Maximum over all 2^{m-1} partitions of sum cost(i,j)^p.
template <class Cost>
double brute_force(std::size_t m, Cost cost, double p) {
  double best = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << (m - 1)); ++mask) {
    double s = 0.0;
    std::size_t prev = 0;
    for (std::size_t k = 1; k <= m; ++k) {
      if (k == m || (mask >> (k - 1)) & 1) {
        s += std::pow(cost(prev, k), p);
        prev = k;
      }
    }
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

TEST_CASE("lift examples", "[rough]") {
  const auto line = lift_piecewise_linear(GridPath({0.0, 1.0}));
  CHECK(line.segment(0, 1).level1[0] == 1.0);
  CHECK(line.segment(0, 1).level2[0] == 0.5);

  const std::vector<GridPath> L{GridPath({0.0, 1.0, 1.0}), GridPath({0.0, 0.0, 1.0})};
  const auto x = lift_piecewise_linear(L).segment(0, 2);
  CHECK(x.area(0, 1) == 1.0);
  CHECK(x.area(1, 0) == 0.0);
  CHECK(x.area(0, 0) == 0.5);
  CHECK(x.area(1, 1) == 0.5);
  // antisymmetric part is the signed Levy area
  CHECK(0.5 * (x.area(0, 1) - x.area(1, 0)) == 0.5);

  const auto z = lift_piecewise_linear(GridPath::zero(5));
  for (double v : z.level1()) CHECK(v == 0.0);
  for (double v : z.level2()) CHECK(v == 0.0);
}

TEST_CASE("per-step areas of a lift", "[rough]") {
  const auto xs = random_paths(3, 20, 4);
  const auto x = lift_piecewise_linear(xs);
  for (std::size_t s = 0; s < 20; ++s) {
    const auto a = x.step_level1(s);
    const auto b = x.step_level2(s);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(b[i * 3 + j] == 0.5 * a[i] * a[j]);
  }
}

TEST_CASE("chen_compose examples", "[rough]") {
  const auto xs = random_paths(2, 10, 5);
  const auto x = lift_piecewise_linear(xs);
  const auto seg = x.segment(2, 7);
  const auto left = chen_compose(seg, RoughIncrement::identity(2));
  const auto right = chen_compose(RoughIncrement::identity(2), seg);
  CHECK(left.level1 == seg.level1);
  CHECK(left.level2 == seg.level2);
  CHECK(right.level2 == seg.level2);

  const RoughIncrement unit{1, {1.0}, {0.5}};
  const auto two = chen_compose(unit, unit);
  CHECK(two.level1[0] == 2.0);
  CHECK(two.level2[0] == 2.0);

  const auto a = x.segment(0, 3), b = x.segment(3, 4), c = x.segment(4, 10);
  const auto l = chen_compose(chen_compose(a, b), c);
  const auto r = chen_compose(a, chen_compose(b, c));
  CHECK(norm_diff(l.level2, r.level2) <= 1e-12);
  CHECK(norm_diff(l.level1, r.level1) <= 1e-12);
  CHECK_THROWS_AS(chen_compose(RoughIncrement::identity(1), RoughIncrement::identity(2)), DomainError);
}

TEST_CASE("Chen identity on random lifts", "[rough][property]") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t d = 1 + seed % 3, m = 16;
    const auto xs = random_paths(d, m, seed);
    const auto x = lift_piecewise_linear(xs);
    for (std::size_t s = 0; s < m; s += 3)
      for (std::size_t t = s + 1; t < m; t += 2)
        for (std::size_t u = t + 1; u <= m; u += 4) {
          const auto su = x.segment(s, u), st = x.segment(s, t), tu = x.segment(t, u);
          for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
              CHECK(std::abs(su.area(i, j) - st.area(i, j) - tu.area(i, j) - st.level1[i] * tu.level1[j]) <= 1e-12);
          CHECK(norm_diff(su.level2, direct_level2(xs, s, u)) <= 1e-12);
        }
  }
}

TEST_CASE("dilate examples", "[rough]") {
  const auto xs = random_paths(2, 12, 8);
  const auto x = lift_piecewise_linear(xs);
  const auto same = dilate(x, 1.0);
  CHECK(same.level1() == x.level1());
  CHECK(same.level2() == x.level2());

  const auto line = lift_piecewise_linear(GridPath::sample(8, [](double t) { return t; }));
  const auto twice = lift_piecewise_linear(GridPath::sample(8, [](double t) { return 2.0 * t; }));
  const auto d4 = dilate(line, 4.0);
  CHECK(norm_diff(d4.level1(), twice.level1()) <= 1e-15);
  CHECK(norm_diff(d4.level2(), twice.level2()) <= 1e-15);

  const auto ab = dilate(dilate(x, 0.3), 0.5);
  const auto c = dilate(x, 0.15);
  CHECK(norm_diff(ab.level1(), c.level1()) <= 1e-14);
  CHECK(norm_diff(ab.level2(), c.level2()) <= 1e-14);
  CHECK_THROWS_AS(dilate(x, 0.0), DomainError);
}

TEST_CASE("p_var_level examples", "[rough]") {
  const std::vector<double> mono{0.0, 0.5, 1.2, 1.3, 3.0};
  CHECK(p_var_level(mono, 2.0) == Approx(3.0).epsilon(1e-15));
  const std::vector<double> zig{0.0, 1.0, 0.0, 1.0};
  CHECK(p_var_level(zig, 2.0) == Approx(std::sqrt(3.0)));
  CHECK_THROWS_AS(p_var_level(zig, 0.5), DomainError);
}

TEST_CASE("DP equals exhaustive enumeration", "[rough][property]") {
  std::mt19937_64 rng(3);
  for (std::size_t m = 1; m <= 12; ++m) {
    for (double p : {1.0, 2.0, 2.5}) {
      const auto w = sample_bm(m, 17, m).path;
      const auto& v = w.values();
      auto cost = [&](std::size_t i, std::size_t j) { return std::abs(v[j] - v[i]); };
      CHECK(p_variation_sum(m, cost, p) == Approx(brute_force(m, cost, p)).epsilon(1e-14));
    }
    std::vector<double> zig(m + 1);
    for (std::size_t i = 0; i <= m; ++i) zig[i] = static_cast<double>(i % 2);
    auto zc = [&](std::size_t i, std::size_t j) { return std::abs(zig[j] - zig[i]); };
    CHECK(p_variation_sum(m, zc, 2.0) == brute_force(m, zc, 2.0));
  }
}

TEST_CASE("two-level DP equals exhaustive enumeration", "[rough][property]") {
  for (std::size_t m = 1; m <= 12; ++m) {
    const auto xs = random_paths(2, m, 100 + m);
    const auto ys = random_paths(2, m, 200 + m);
    const auto x = lift_piecewise_linear(xs), y = lift_piecewise_linear(ys);
    const double p = 2.5;
    auto c1 = [&](std::size_t a, std::size_t b) {
      std::vector<double> dx(2), dy(2);
      for (std::size_t i = 0; i < 2; ++i) {
        dx[i] = xs[i][b] - xs[i][a];
        dy[i] = ys[i][b] - ys[i][a];
      }
      return norm_diff(dx, dy);
    };
    auto c2 = [&](std::size_t a, std::size_t b) { return norm_diff(direct_level2(xs, a, b), direct_level2(ys, a, b)); };
    const auto terms = p_var_terms(x, y, p);
    CHECK(terms.level1 == Approx(std::pow(brute_force(m, c1, p), 1.0 / p)).epsilon(1e-12));
    CHECK(terms.level2 == Approx(std::pow(brute_force(m, c2, p / 2.0), 2.0 / p)).epsilon(1e-12));
  }
}

TEST_CASE("p_var_dist examples", "[rough]") {
  const auto xs = random_paths(2, 30, 6);
  const auto x = lift_piecewise_linear(xs);
  CHECK(p_var_dist(x, x) == 0.0);

  const auto line = lift_piecewise_linear(GridPath({0.0, 1.0}));
  const auto zero = lift_piecewise_linear(GridPath::zero(1));
  CHECK(p_var_dist(line, zero, 2.5) == Approx(1.5).epsilon(1e-14));

  CHECK_THROWS_AS(p_var_dist(x, x, 2.0), DomainError);
  CHECK_THROWS_AS(p_var_dist(x, x, 3.0), DomainError);
  CHECK_THROWS_AS(p_var_dist(x, lift_piecewise_linear(random_paths(2, 31, 1)), 2.5), DomainError);
  CHECK_THROWS_AS(p_var_dist(x, lift_piecewise_linear(random_paths(3, 30, 1)), 2.5), DomainError);
}

TEST_CASE("triangle inequality", "[rough][property]") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto x = lift_piecewise_linear(random_paths(2, 24, 3 * seed));
    const auto y = lift_piecewise_linear(random_paths(2, 24, 3 * seed + 1));
    const auto z = lift_piecewise_linear(random_paths(2, 24, 3 * seed + 2));
    for (double p : {2.1, 2.5, 2.9}) CHECK(p_var_dist(x, z, p) <= p_var_dist(x, y, p) + p_var_dist(y, z, p) + 1e-9);
  }
}

TEST_CASE("dilation covariance per level", "[rough][property]") {
  const auto x = lift_piecewise_linear(random_paths(2, 40, 9));
  const auto zero = lift_piecewise_linear(std::vector<GridPath>(2, GridPath::zero(40)));
  const auto base = p_var_terms(x, zero, 2.5);
  for (double eps : {0.01, 0.2, 0.7}) {
    const auto t = p_var_terms(dilate(x, eps), dilate(zero, eps), 2.5);
    CHECK(t.level1 == Approx(std::sqrt(eps) * base.level1).epsilon(1e-12));
    CHECK(t.level2 == Approx(eps * base.level2).epsilon(1e-12));
    CHECK(p_var_dist(dilate(x, eps), dilate(zero, eps)) ==
          Approx(std::sqrt(eps) * base.level1 + eps * base.level2).epsilon(1e-12));
  }
}

TEST_CASE("rough path construction checks", "[rough]") {
  CHECK_THROWS_AS(GridRoughPath(0, 1, {}, {}), DomainError);
  CHECK_THROWS_AS(GridRoughPath(1, 2, {1.0}, {0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(lift_piecewise_linear(std::vector<GridPath>{GridPath::zero(2), GridPath::zero(3)}), DomainError);
  const auto x = lift_piecewise_linear(GridPath::zero(3));
  CHECK_THROWS_AS(x.segment(2, 1), DomainError);
  CHECK_THROWS_AS(x.segment(0, 4), DomainError);
}
