#include "pelastic/energy.hpp"

#include <algorithm>
#include <cmath>

#include "pelastic/errors.hpp"

namespace pel {

double sgnpow(double x, double p) {
  if (x == 0.0) return 0.0;
  return std::pow(std::abs(x), p - 2.0) * x;
}

double fenchel_floor(const PeriodicGrid& g, double p) {
  return std::pow(kTwoPi * g.winding(), p) / (p * std::pow(g.length(), p - 1.0));
}

EnergyValue energy_fp(const AngleField& f, double p) {
  if (!(p > 1.0)) throw ValidationError("p must exceed 1");
  EnergyValue e;
  e.fp = lp_slope_norm_pow(f, p) / p;
  e.fenchel_floor = fenchel_floor(f.grid(), p);
  e.margin = e.fp - e.fenchel_floor;
  return e;
}

std::vector<double> grad_fp(const AngleField& f, double p) {
  if (!(p > 1.0)) throw ValidationError("p must exceed 1");
  const auto m = cell_slopes(f);
  const std::size_t M = m.size();
  std::vector<double> flux(M);
  for (std::size_t j = 0; j < M; ++j) flux[j] = sgnpow(m[j], p);
  std::vector<double> g(M);
  for (std::size_t j = 0; j < M; ++j) g[j] = flux[(j + M - 1) % M] - flux[j];
  return g;
}

namespace ineq {

double monotone_product(double a, double b, double p) { return (sgnpow(a, p) - sgnpow(b, p)) * (a - b); }

double strong_monotonicity_margin(double a, double b, double p) {
  return monotone_product(a, b, p) - std::pow(2.0, 2.0 - p) * std::pow(std::abs(a - b), p);
}

double weighted_monotonicity_margin(double a, double b, double p) {
  const double w = 0.5 * (std::pow(std::abs(a), p - 2.0) + std::pow(std::abs(b), p - 2.0));
  return monotone_product(a, b, p) - w * (a - b) * (a - b);
}

namespace {

// 8-point Gauss-Legendre on [lo, hi] of |x|^q; lo and hi share a sign.
double gauss_abs_pow(double lo, double hi, double q) {
  static constexpr double kNodes[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                       0.9602898564975363};
  static constexpr double kWeights[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                         0.1012285362903763};
  const double c = 0.5 * (lo + hi);
  const double r = 0.5 * (hi - lo);
  double sum = 0;
  for (int k = 0; k < 4; ++k) {
    sum += kWeights[k] * (std::pow(std::abs(c + r * kNodes[k]), q) + std::pow(std::abs(c - r * kNodes[k]), q));
  }
  return sum * r;
}

}  // namespace

double lipschitz_bound_margin(double a, double b, double p) {
  const double lhs = std::abs(sgnpow(a, p) - sgnpow(b, p));
  if (a == b) return 0.0;
  // int_0^1 |a + t(b-a)|^(p-2) dt = (1/(b-a)) int_a^b |x|^(p-2) dx
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  double integral = 0;
  if (lo < 0.0 && hi > 0.0) {
    integral = gauss_abs_pow(lo, 0.0, p - 2.0) + gauss_abs_pow(0.0, hi, p - 2.0);
  } else {
    integral = gauss_abs_pow(lo, hi, p - 2.0);
  }
  return (p - 1.0) * integral - lhs;
}

double power_difference_ratio(double x, double y, double p) {
  return std::abs(std::pow(x, p) - std::pow(y, p)) / (std::abs(x - y) * (std::pow(x, p - 1.0) + std::pow(y, p - 1.0)));
}

}  // namespace ineq

}  // namespace pel
