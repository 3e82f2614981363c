#pragma once

#include <vector>

#include "pelastic/field.hpp"

namespace pel {

/// F_p of a field together with the round-circle floor (1/p)(2 pi eta)^p / L^(p-1).
struct EnergyValue {
  double fp = 0;
  double fenchel_floor = 0;
  double margin = 0;  // fp - fenchel_floor
};

/// |x|^(p-2) x, with the value 0 at x = 0 for every p > 1.
double sgnpow(double x, double p);

EnergyValue energy_fp(const AngleField& f, double p);

/// Exact gradient of the discrete F_p with respect to the nodal values:
/// dF/du_j = sgnpow(m_{j-1}) - sgnpow(m_j).
std::vector<double> grad_fp(const AngleField& f, double p);

double fenchel_floor(const PeriodicGrid& g, double p);

// Scalar monotonicity inequalities for the map x -> |x|^(p-2) x. Each *_margin returns
// lhs - rhs of the inequality, so a valid instance has a nonnegative margin.
namespace ineq {

/// (sgnpow(a) - sgnpow(b)) (a - b).
double monotone_product(double a, double b, double p);

/// Strong monotonicity for p >= 2 with the sharp scalar constant 2^(2-p):
/// product - 2^(2-p) |a - b|^p.
double strong_monotonicity_margin(double a, double b, double p);

/// product - (1/2)(|a|^(p-2) + |b|^(p-2)) |a - b|^2, p >= 2.
double weighted_monotonicity_margin(double a, double b, double p);

/// (p-1)|a-b| int_0^1 |a + t(b-a)|^(p-2) dt - |sgnpow(a) - sgnpow(b)|, p >= 2.
/// The integral is evaluated by Gauss-Legendre quadrature split at the sign change.
double lipschitz_bound_margin(double a, double b, double p);

/// |x^p - y^p| / (|x - y| (x^(p-1) + y^(p-1))) for x, y >= 0, x != y.
double power_difference_ratio(double x, double y, double p);

}  // namespace ineq

}  // namespace pel
