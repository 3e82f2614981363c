#include "pelastic/multipliers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "pelastic/errors.hpp"

namespace pel {

double det_at_matrix(const AngleField& f) {
  const auto t = trig_moments(f);
  return t.is2 * t.ic2 - t.isc * t.isc;
}

double det_at_double(const AngleField& f, int subsamples) {
  if (subsamples < 2 || subsamples % 2 != 0) {
    throw ValidationError("det_at_double needs an even number (>= 2) of subsamples per cell");
  }
  const int M = f.size();
  const int per_cell = subsamples;
  const int n = M * per_cell;
  const double dx = f.grid().h() / per_cell;
  // Composite Simpson over the whole period; theta is linear inside each cell so the
  // integrand is smooth on every cell-by-cell rectangle.
  std::vector<double> theta(static_cast<std::size_t>(n) + 1);
  std::vector<double> weight(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j < M; ++j) {
    const double a = f.theta(j);
    const double d = f.cell_turn(j);
    for (int k = 0; k < per_cell; ++k) {
      theta[static_cast<std::size_t>(j * per_cell + k)] = a + d * k / per_cell;
    }
  }
  theta[static_cast<std::size_t>(n)] = f.theta(M);
  for (int k = 0; k <= n; ++k) {
    double w = (k % 2 == 1) ? 4.0 : 2.0;
    if (k == 0 || k == n) w = 1.0;
    weight[static_cast<std::size_t>(k)] = w * dx / 3.0;
  }
  double sum = 0;
  for (int a = 0; a <= n; ++a) {
    double row = 0;
    const double ta = theta[static_cast<std::size_t>(a)];
    for (int b = 0; b <= n; ++b) {
      const double s = std::sin(theta[static_cast<std::size_t>(b)] - ta);
      row += weight[static_cast<std::size_t>(b)] * s * s;
    }
    sum += weight[static_cast<std::size_t>(a)] * row;
  }
  return 0.5 * sum;
}

DeltaBound delta_bound(const AngleField& f, double p) {
  if (!(p > 1.0)) throw ValidationError("p must exceed 1");
  const double norm = lp_slope_norm(f, p);
  const double L = f.grid().length();
  const double branch = std::pow(std::numbers::pi / (8.0 * norm), p / (p - 1.0));
  const double delta = std::min(0.5 * L, branch);
  return {delta, 0.25 * delta * delta};
}

MultiplierReport multipliers(const AngleField& f, double p) {
  if (!(p > 1.0)) throw ValidationError("p must exceed 1");
  const auto t = trig_moments(f);
  const auto j = power_trig_moments(f, p);
  const auto db = delta_bound(f, p);
  const double L = f.grid().length();

  MultiplierReport r;
  r.jc = j.jc;
  r.js = j.js;
  r.ic2 = t.ic2;
  r.is2 = t.is2;
  r.isc = t.isc;
  r.det_at = t.is2 * t.ic2 - t.isc * t.isc;
  r.delta = db.delta;
  r.det_floor = db.det_floor;

  const double guard = std::max(db.delta * db.delta / 8.0, 1e-14 * L * L);
  if (!(r.det_at >= guard)) {
    std::ostringstream os;
    os << "det A_T = " << r.det_at << " below guard " << guard << " (delta^2/4 = " << db.det_floor << ")";
    throw InternalError(os.str());
  }

  r.lambda1 = (j.jc * t.ic2 + j.js * t.isc) / r.det_at;
  r.lambda2 = (j.jc * t.isc + j.js * t.is2) / r.det_at;

  const double norm = lp_slope_norm(f, p);
  r.lambda_bound = 8.0 * L * std::pow(norm, p) *
                   (4.0 / (L * L) + std::pow(8.0 * norm / std::numbers::pi, 2.0 * p / (p - 1.0)));
  return r;
}

std::array<double, 2> multipliers_by_solve(const AngleField& f, double p) {
  const auto t = trig_moments(f);
  const auto j = power_trig_moments(f, p);
  // lambda A = J with A symmetric, i.e. A lambda^T = J^T.
  double a[2][3] = {{t.is2, -t.isc, j.jc}, {-t.isc, t.ic2, j.js}};
  if (std::abs(a[1][0]) > std::abs(a[0][0])) std::swap(a[0], a[1]);
  if (a[0][0] == 0.0) throw InternalError("singular normal Gram matrix");
  const double factor = a[1][0] / a[0][0];
  for (int c = 0; c < 3; ++c) a[1][c] -= factor * a[0][c];
  if (a[1][1] == 0.0) throw InternalError("singular normal Gram matrix");
  const double l2 = a[1][2] / a[1][1];
  const double l1 = (a[0][2] - a[0][1] * l2) / a[0][0];
  return {l1, l2};
}

std::vector<double> nodal_forcing(const AngleField& f, double lambda1, double lambda2) {
  const int M = f.size();
  std::vector<double> out(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) {
    const double th = f.theta(j);
    out[static_cast<std::size_t>(j)] = lambda1 * std::sin(th) - lambda2 * std::cos(th);
  }
  return out;
}

std::array<double, 2> multiplier_identity_residual(const AngleField& f, double p, const MultiplierReport& r) {
  const auto t = trig_moments(f);
  const auto j = power_trig_moments(f, p);
  // (lambda . N) N with N = (-sin, cos)
  const double x = r.lambda1 * t.is2 - r.lambda2 * t.isc;
  const double y = -r.lambda1 * t.isc + r.lambda2 * t.ic2;
  return {x - j.jc, y - j.js};
}

}  // namespace pel
