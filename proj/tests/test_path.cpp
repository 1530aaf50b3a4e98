#include <catch_amalgamated.hpp>

#include <atomic>
#include <cmath>
#include <numeric>
#include <vector>

#include "chaoscale/factor.hpp"
#include "chaoscale/parallel.hpp"
#include "chaoscale/path.hpp"
#include "chaoscale/random.hpp"

using namespace chaoscale;
using Catch::Approx;

namespace {

CameronMartinPath line(std::size_t m, double slope) {
  return CameronMartinPath(GridPath::sample(m, [slope](double t) { return slope * t; }));
}

}  // namespace

TEST_CASE("grid path construction", "[path]") {
  CHECK_THROWS_AS(GridPath(std::vector<double>{0.0}), DomainError);
  CHECK_THROWS_AS(GridPath(std::vector<double>{1.0, 2.0}), DomainError);
  const GridPath w({0.0, 1.0, -2.0});
  CHECK(w.resolution() == 2);
  CHECK(w.time(1) == 0.5);
  CHECK(GridPath::zero(3) == GridPath(std::vector<double>(4, 0.0)));
}

TEST_CASE("energy examples", "[path]") {
  for (std::size_t m : {1u, 7u, 64u}) {
    CHECK(energy(line(m, 1.0)) == Approx(0.5).epsilon(1e-14));
    CHECK(energy(line(m, 2.0)) == Approx(2.0).epsilon(1e-14));
  }
  CHECK(energy(CameronMartinPath(GridPath::zero(5))) == 0.0);
}

TEST_CASE("sup_norm examples", "[path]") {
  CHECK(sup_norm(GridPath::sample(10, [](double t) { return t; })) == 1.0);
  CHECK(sup_norm(GridPath::zero(4)) == 0.0);
  CHECK(sup_norm(GridPath({0.0, 1.0, -2.0})) == 2.0);
}

TEST_CASE("pairing examples", "[path]") {
  const auto one = FactorFn::constant(1.0);
  const auto t = FactorFn::polynomial({0.0, 1.0});
  CHECK(pairing(one, line(16, 1.0)) == Approx(1.0).epsilon(1e-14));
  const CameronMartinPath sq(GridPath::sample(2048, [](double s) { return s * s; }));
  CHECK(pairing(one, sq) == Approx(1.0).margin(1e-6));
  CHECK(pairing(t, line(16, 1.0)) == Approx(0.5).epsilon(1e-14));
}

TEST_CASE("pairing rejects mismatched grids", "[path]") {
  const auto g = FactorFn::grid(std::vector<double>(9, 1.0));
  CHECK_NOTHROW(pairing(g, line(8, 1.0)));
  CHECK_THROWS_AS(pairing(g, line(16, 1.0)), DomainError);
}

TEST_CASE("sample_level_set examples", "[path]") {
  CHECK(sample_level_set(0.0, 8, 1).path() == GridPath::zero(8));
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const double level = 0.01 * static_cast<double>(seed % 37);
    CHECK(energy(sample_level_set(level, 1 + seed % 50, seed)) <= level);
  }
  CHECK(sample_level_set(1.5, 32, 42).path() == sample_level_set(1.5, 32, 42).path());
  CHECK_FALSE(sample_level_set(1.5, 32, 42).path() == sample_level_set(1.5, 32, 43).path());
  CHECK_THROWS_AS(sample_level_set(-1.0, 4, 0), DomainError);
}

TEST_CASE("energy is quadratic", "[path][property]") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto h = sample_level_set(2.0, 40, seed);
    for (double c : {-3.0, 0.5, 7.25}) {
      const CameronMartinPath ch(c * h.path());
      CHECK(energy(ch) == Approx(c * c * energy(h)).epsilon(1e-12));
    }
  }
}

TEST_CASE("sup norm is dominated by energy", "[path][property]") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto h = sample_level_set(3.0, 1 + seed, seed);
    CHECK(sup_norm(h.path()) <= std::sqrt(2.0 * energy(h)) * (1.0 + 1e-12));
  }
}

TEST_CASE("pairing is bilinear", "[path][property]") {
  const auto f = FactorFn::polynomial({1.0, -2.0, 0.5});
  const auto g = FactorFn::constant(3.0);
  const auto fg = FactorFn::polynomial({4.0, -2.0, 0.5});
  const auto a = sample_level_set(1.0, 32, 1);
  const auto b = sample_level_set(1.0, 32, 2);
  const CameronMartinPath ab(a.path() + 2.0 * b.path());
  CHECK(pairing(fg, a) == Approx(pairing(f, a) + pairing(g, a)).epsilon(1e-12));
  CHECK(pairing(f, ab) == Approx(pairing(f, a) + 2.0 * pairing(f, b)).epsilon(1e-12));
}

TEST_CASE("factor forms", "[factor]") {
  const auto p = FactorFn::polynomial({1.0, 2.0, 3.0});
  CHECK(p(0.5) == Approx(2.75));
  CHECK(p.derivative(0.5) == Approx(5.0));
  CHECK(p.integral(0.0, 1.0) == Approx(3.0));
  const auto g = FactorFn::grid({0.0, 1.0, 0.0});
  CHECK(g(0.25) == Approx(0.5));
  CHECK(g(0.75) == Approx(0.5));
  CHECK(g.integral(0.0, 1.0) == Approx(0.5));
  CHECK(g.resolution() == 2);
  CHECK(FactorFn::constant(4.0).derivative(0.3) == 0.0);
}

TEST_CASE("factor_inner examples", "[factor]") {
  const auto one = FactorFn::constant(1.0);
  const auto t = FactorFn::polynomial({0.0, 1.0});
  CHECK(factor_inner(one, one) == Approx(1.0).epsilon(1e-15));
  CHECK(factor_inner(one, t) == Approx(0.5).epsilon(1e-15));
  CHECK(factor_inner(t, t) == Approx(1.0 / 3.0).epsilon(1e-15));
  std::vector<double> s(257);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<double>(i) / 256.0;
  CHECK(factor_inner(FactorFn::grid(s), t) == Approx(1.0 / 3.0).margin(1e-5));
  CHECK(factor_inner(one, one, 0.25) == Approx(0.25));
}

TEST_CASE("substreams are stable and distinct", "[random]") {
  CHECK(substream_seed(1, 2) == substream_seed(1, 2));
  CHECK(substream_seed(1, 2) != substream_seed(1, 3));
  CHECK(substream_seed(1, 2) != substream_seed(2, 2));
  auto a = make_engine(5, 9);
  auto b = make_engine(5, 9);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
}

TEST_CASE("parallel_for covers every index once", "[parallel]") {
  for (unsigned threads : {1u, 3u, 8u}) {
    set_thread_count(threads);
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
  set_thread_count(0);
}

TEST_CASE("parallel_for rethrows", "[parallel]") {
  set_thread_count(4);
  CHECK_THROWS_AS(parallel_for(100, [](std::size_t i) {
                    if (i == 57) throw NumericalError("boom");
                  }),
                  NumericalError);
  set_thread_count(0);
}

TEST_CASE("pairwise_sum is exact on integers", "[parallel]") {
  std::vector<double> xs(1001);
  std::iota(xs.begin(), xs.end(), 0.0);
  CHECK(pairwise_sum(xs) == 500500.0);
  CHECK(pairwise_sum(std::span<const double>()) == 0.0);
}
