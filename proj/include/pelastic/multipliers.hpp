#pragma once

#include <array>
#include <vector>

#include "pelastic/field.hpp"

namespace pel {

/// Closure multipliers of one field plus the integrals and bounds they are built from.
struct MultiplierReport {
  double lambda1 = 0;
  double lambda2 = 0;
  double det_at = 0;
  double delta = 0;
  double det_floor = 0;     // delta^2 / 4
  double lambda_bound = 0;  // a-priori bound on |lambda_i|
  double jc = 0, js = 0;
  double ic2 = 0, is2 = 0, isc = 0;
};

struct DeltaBound {
  double delta;
  double det_floor;
};

/// det of the normal Gram matrix [[int sin^2, -int sin cos], [-int sin cos, int cos^2]].
double det_at_matrix(const AngleField& f);

/// (1/2) double integral of sin^2(theta(sigma) - theta(s)) by tensor composite Simpson
/// with `subsamples` (even) subintervals per cell. Quadrature reference for det_at_matrix.
double det_at_double(const AngleField& f, int subsamples);

/// delta = min{L/2, (pi / (8 ||theta_s||_p))^(p/(p-1))}.
DeltaBound delta_bound(const AngleField& f, double p);

/// lambda = J A_T^{-1} with J = (int |theta_s|^p cos, int |theta_s|^p sin), in expanded form:
///   lambda1 = (JC IC2 + JS ISC) / det,  lambda2 = (JC ISC + JS IS2) / det.
/// Throws InternalError if det falls below max(delta^2/8, 1e-14 L^2).
MultiplierReport multipliers(const AngleField& f, double p);

/// Same multipliers obtained by solving lambda A_T = J with a pivoted 2x2 elimination
/// on the assembled matrix. Cross-check for multipliers().
std::array<double, 2> multipliers_by_solve(const AngleField& f, double p);

/// Nodal forcing lambda1 sin(theta_j) - lambda2 cos(theta_j).
std::vector<double> nodal_forcing(const AngleField& f, double lambda1, double lambda2);

/// int (lambda . N) N ds - int |theta_s|^p T ds; vanishes identically for the closure multipliers.
std::array<double, 2> multiplier_identity_residual(const AngleField& f, double p, const MultiplierReport& r);

}  // namespace pel
