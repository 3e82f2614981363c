#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "pelastic/energy.hpp"

using namespace pel;
using std::numbers::pi;

TEST_CASE("energy_fp") {
  SUBCASE("round circles sit on the floor") {
    const auto e = energy_fp(AngleField::zeros(PeriodicGrid(kTwoPi, 64, 1)), 2.0);
    CHECK(e.fp == doctest::Approx(pi).epsilon(1e-14));
    CHECK(e.fenchel_floor == doctest::Approx(pi).epsilon(1e-14));
    CHECK(std::abs(e.margin) < 1e-13);
    const auto e2 = energy_fp(AngleField::zeros(PeriodicGrid(kTwoPi, 64, 2)), 2.0);
    CHECK(e2.fp == doctest::Approx(4 * pi).epsilon(1e-14));
    CHECK(e2.fenchel_floor == doctest::Approx(4 * pi).epsilon(1e-14));
  }
  SUBCASE("perturbation strictly raises the energy") {
    const PeriodicGrid g(kTwoPi, 128, 1);
    std::vector<double> v(128);
    for (int j = 0; j < 128; ++j) v[static_cast<std::size_t>(j)] = 0.1 * std::sin(2 * kTwoPi * g.node(j) / g.length());
    CHECK(energy_fp(AngleField(g, v), 2.0).fp > pi + 1e-3);
  }
  SUBCASE("floor holds on random fields") {
    std::mt19937_64 rng(2);
    for (double p : {1.2, 2.0, 3.0, 4.0}) {
      for (int k = 0; k < 250; ++k) {
        const PeriodicGrid g(0.5 + 0.01 * k, 32, 1 + k % 3);
        const auto e = energy_fp(AngleField(g, oracle::random_samples(rng, g, 1.0, 4, 0.05)), p);
        CHECK(e.margin >= -1e-12 * e.fp);
      }
    }
  }
  SUBCASE("shift invariance") {
    std::mt19937_64 rng(3);
    const PeriodicGrid g(kTwoPi, 32, 1);
    std::vector<double> d(32);
    for (auto& x : d) x = std::ldexp(static_cast<double>(rng() % 64), -6);
    const AngleField f(g, d);
    CHECK(energy_fp(f, 2.5).fp == energy_fp(f.shifted(0.25), 2.5).fp);
    CHECK(grad_fp(f, 2.5) == grad_fp(f.shifted(0.25), 2.5));
  }
}

TEST_CASE("grad_fp") {
  SUBCASE("circle is stationary") {
    for (double v : grad_fp(AngleField::zeros(PeriodicGrid(kTwoPi, 16, 1)), 3.0)) CHECK(v == 0.0);
  }
  SUBCASE("components sum to zero and match central differences") {
    std::mt19937_64 rng(4);
    for (double p : {1.5, 2.0, 3.0}) {
      for (int k = 0; k < 20; ++k) {
        const PeriodicGrid g(kTwoPi, 32, 1);
        const auto v = oracle::random_samples(rng, g, 0.4, 3, 0.01);
        const auto grad = grad_fp(AngleField(g, v), p);
        double sum = 0, scale = 0;
        for (double x : grad) {
          sum += x;
          scale = std::max(scale, std::abs(x));
        }
        CHECK(std::abs(sum) <= 1e-13 * (1 + scale) * 32);
        const auto fd = oracle::central_gradient(
            [&](const std::vector<double>& x) { return energy_fp(AngleField(g, x), p).fp; }, v, 1e-6);
        CHECK(oracle::rel_sup_error(grad, fd) <= 1e-6);
      }
    }
  }
}

TEST_CASE("sgnpow") {
  CHECK(sgnpow(0.0, 1.5) == 0.0);
  CHECK(sgnpow(-2.0, 3.0) == -4.0);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> U(-10, 10);
  for (int k = 0; k < 100; ++k) {
    const double x = U(rng);
    CHECK(sgnpow(x, 2.0) == x);
  }
}

TEST_CASE("scalar monotonicity constant 2^(2-p) is sharp") {
  // Dense sweep of the ratio product / |a-b|^p; by homogeneity fix a - b = 1.
  for (double p : {2.0, 2.5, 3.0, 4.0}) {
    double min_ratio = INFINITY;
    for (int k = -20000; k <= 20000; ++k) {
      const double a = k * 1e-4;
      const double b = a - 1.0;
      min_ratio = std::min(min_ratio, ineq::monotone_product(a, b, p));
    }
    CHECK(min_ratio == doctest::Approx(std::pow(2.0, 2.0 - p)).epsilon(1e-8));
    CHECK(min_ratio >= std::pow(2.0, 2.0 - p) * (1 - 1e-14));
  }
}

TEST_CASE("scalar inequalities on random pairs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-5, 5);
  for (double p : {2.0, 3.0, 4.0}) {
    for (int k = 0; k < 2000; ++k) {
      const double a = U(rng), b = U(rng);
      const double scale = std::pow(std::max(std::abs(a), std::abs(b)), p) + 1e-300;
      CHECK(ineq::strong_monotonicity_margin(a, b, p) >= -1e-14 * scale);
      CHECK(ineq::weighted_monotonicity_margin(a, b, p) >= -1e-14 * scale);
      CHECK(ineq::lipschitz_bound_margin(a, b, p) >= -1e-14 * scale);
    }
  }
}

TEST_CASE("power difference ratio stays between p/2 and 1") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(0, 3);
  for (double p : {1.3, 2.0, 3.0, 5.0}) {
    double lo = INFINITY, hi = 0;
    for (int k = 0; k < 5000; ++k) {
      const double x = U(rng), y = U(rng);
      if (x == y) continue;
      const double r = ineq::power_difference_ratio(x, y, p);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    const double cp = std::max(hi, 1.0 / lo);
    CHECK(std::isfinite(cp));
    CHECK(cp > 0);
    CHECK(lo >= std::min(1.0, p / 2) - 1e-9);
    CHECK(hi <= std::max(1.0, p / 2) + 1e-9);
  }
}
