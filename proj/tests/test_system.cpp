#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "chaoscale/chaos.hpp"
#include "chaoscale/iterated.hpp"
#include "chaoscale/skeleton.hpp"
#include "chaoscale/system.hpp"

using namespace chaoscale;
using Catch::Approx;

namespace {

const auto one = FactorFn::constant(1.0);
const auto tee = FactorFn::polynomial({0.0, 1.0});

double system_gap(const ChaosVector& x, double eps, std::size_t m, std::uint64_t seed, std::uint64_t k) {
  const auto sys = build_system(x, eps);
  const auto w = sample_bm(m, seed, k);
  return sup_norm(integrate_system(sys, w) - ito_chaos(gamma_scale(x, eps), w.path));
}

}  // namespace

TEST_CASE("first-order system is sqrt(eps) w", "[system]") {
  ChaosVector x;
  x.add(Kernel::power(1, one));
  for (double eps : {0.25, 1.0}) {
    const auto sys = build_system(x, eps);
    CHECK(sys.state_size() == 2);
    const auto w = sample_bm(500, 1, 0);
    const auto states = integrate_states(sys, w.path);
    for (std::size_t i = 0; i <= 500; ++i) {
      CHECK(states[i].z_first() == Approx(std::sqrt(eps) * w.path[i]).margin(1e-10));
      CHECK(states[i].z_first() == states[i].z_second());
    }
  }
}

TEST_CASE("eps = 0 freezes the system", "[system]") {
  ChaosVector x;
  x.add(Kernel::power(1, tee)).add(Kernel::power(3, one));
  const auto sys = build_system(x, 0.0);
  const auto w = sample_bm(100, 2, 0);
  for (const auto& s : integrate_states(sys, w.path))
    for (double v : s.values) CHECK(v == 0.0);
}

TEST_CASE("build_system domain", "[system]") {
  ChaosVector x;
  x.add(Kernel::power(2, one));
  CHECK_THROWS_AS(build_system(x, -0.1), DomainError);
  CHECK_THROWS_AS(build_system(x, 1.1), DomainError);
  const auto sys = build_system(x, 0.5);
  CHECK(sys.chain_count() == 1);
  CHECK(sys.state_size() == 4);
  CHECK_NOTHROW(sys.offset(0, 1, 0));
  CHECK_THROWS_AS(sys.offset(0, 2, 0), DomainError);
}

TEST_CASE("both copies of Z agree", "[system]") {
  ChaosVector x;
  x.add(Kernel::power(1, tee)).add(Kernel(2, {ProductTerm{1.0, {tee, one}}, ProductTerm{0.5, {one, one}}}));
  const auto sys = build_system(x, 0.7);
  CHECK(sys.chain_count() == 3);
  for (const auto& s : integrate_states(sys, sample_bm(256, 3, 0).path)) CHECK(s.z_first() == s.z_second());
}

TEST_CASE("order-2 system matches eps * Ito sum", "[system]") {
  ChaosVector x;
  x.add(Kernel::power(2, one));
  int good = 0;
  const int seeds = 40;
  for (int k = 0; k < seeds; ++k) good += system_gap(x, 0.5, 4096, 11, k) <= 0.05;
  CHECK(good >= 0.95 * seeds);
}

TEST_CASE("time-varying factors close the system", "[system]") {
  ChaosVector x;
  x.add(Kernel::power(1, FactorFn::polynomial({1.0, 1.0}), 0.5));
  x.add(Kernel(2, {ProductTerm{1.0, {FactorFn::polynomial({1.0, 1.0}), tee}}}));
  x.add(Kernel(3, {ProductTerm{0.8, {tee, FactorFn::polynomial({2.0, -1.0}), FactorFn::polynomial({0.5, 0.0, 1.0})}}}));
  int good = 0;
  const int seeds = 30;
  for (int k = 0; k < seeds; ++k) good += system_gap(x, 0.5, 4096, 12, k) <= 0.05;
  CHECK(good >= 0.9 * seeds);
}

TEST_CASE("gap shrinks with the grid", "[system]") {
  ChaosVector x;
  x.add(Kernel::power(1, tee)).add(Kernel::power(2, FactorFn::polynomial({1.0, -0.5})));
  double coarse = 0.0, fine = 0.0;
  for (int k = 0; k < 20; ++k) {
    coarse += system_gap(x, 1.0, 256, 13, k);
    fine += system_gap(x, 1.0, 4096, 13, k);
  }
  CHECK(fine < 0.5 * coarse);
}

TEST_CASE("smooth driver reproduces the skeleton", "[system]") {
  ChaosVector x;
  x.add(Kernel::power(1, tee)).add(Kernel(2, {ProductTerm{1.0, {FactorFn::polynomial({1.0, 1.0}), tee}}}));
  x.add(Kernel::power(3, FactorFn::polynomial({1.0, -0.5}), 0.7));
  double prev = 1e300;
  for (std::size_t m : {64u, 128u, 256u, 512u}) {
    const auto h = CameronMartinPath(GridPath::sample(m, [](double t) { return std::sin(2.0 * t) + t * t; }));
    const auto sys = build_system(x, 1.0, SystemKind::stratonovich);
    const double err = sup_norm(integrate_system(sys, h) - eval_skeleton(x, h).path);
    CHECK(err <= 2.0 / m);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("stratonovich system tracks midpoint sums", "[system]") {
  ChaosVector x;
  x.add(Kernel::power(2, one));
  const auto sys = build_system(x, 1.0, SystemKind::stratonovich);
  const auto w = sample_bm(4096, 14, 0);
  const auto z = integrate_system(sys, w);
  const auto s = strat_iterated({1.0, {one, one}}, w);
  CHECK(sup_norm(z - s) <= 0.05);
}
