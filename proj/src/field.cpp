#include "pelastic/field.hpp"

#include <cmath>
#include <string>

#include "pelastic/errors.hpp"

namespace pel {

PeriodicGrid::PeriodicGrid(double length, int cells, int winding)
    : length_(length), cells_(cells), winding_(winding), h_(length / cells) {
  if (!(length > 0) || !std::isfinite(length)) throw ValidationError("grid length L must be positive and finite");
  if (cells < 4) throw ValidationError("grid needs at least 4 cells, got " + std::to_string(cells));
  if (winding < 1) throw ValidationError("winding number eta must be >= 1, got " + std::to_string(winding));
}

AngleField::AngleField(PeriodicGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != grid_.cells()) {
    throw ValidationError("expected " + std::to_string(grid_.cells()) + " samples, got " +
                          std::to_string(values_.size()));
  }
}

AngleField AngleField::zeros(const PeriodicGrid& grid) {
  return AngleField(grid, std::vector<double>(static_cast<std::size_t>(grid.cells()), 0.0));
}

AngleField AngleField::shifted(double alpha) const {
  std::vector<double> v(values_);
  for (double& x : v) x += alpha;
  return AngleField(grid_, std::move(v));
}

AngleField make_field(const PeriodicGrid& grid, std::span<const double> samples) {
  if (static_cast<int>(samples.size()) != grid.cells()) {
    throw ValidationError("wrong sample count: expected " + std::to_string(grid.cells()) + ", got " +
                          std::to_string(samples.size()));
  }
  for (std::size_t j = 0; j < samples.size(); ++j) {
    if (!std::isfinite(samples[j])) throw ValidationError("non-finite sample at node " + std::to_string(j));
  }
  return AngleField(grid, std::vector<double>(samples.begin(), samples.end()));
}

std::vector<double> cell_slopes(const AngleField& f) {
  const auto& g = f.grid();
  const int M = g.cells();
  const double h = g.h();
  const double ramp = g.ramp_slope();
  std::vector<double> m(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) m[static_cast<std::size_t>(j)] = (f[(j + 1) % M] - f[j]) / h + ramp;
  return m;
}

namespace kernel {

double sinc(double x) {
  if (std::abs(x) < kSlopeEpsilon) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

double odd_moment(double x) {
  // Closed form (2 sin(x/2) - x cos(x/2)) / x^2 cancels badly for small x.
  if (std::abs(x) < 1.0) {
    // sum_k (-1)^k x^(2k+1) / (2k+1)! * 2 (1/2)^(2k+3) / (2k+3)
    double term = x;  // x^(2k+1)/(2k+1)!
    double half_pow = 0.125;
    double sum = 0;
    for (int k = 0; k < 10; ++k) {
      sum += term * 2.0 * half_pow / (2 * k + 3);
      term *= -x * x / ((2 * k + 2) * (2 * k + 3));
      half_pow *= 0.25;
    }
    return sum;
  }
  return (2.0 * std::sin(0.5 * x) - x * std::cos(0.5 * x)) / (x * x);
}

}  // namespace kernel

namespace {

// Integrals of cos/sin over a cell where theta runs linearly from a to a + d.
struct CellKernel {
  double mid;    // a + d/2
  double turn;   // d
  double s1;     // sinc(d/2)
  double s2;     // sinc(d)
};

CellKernel cell_kernel(const AngleField& f, int j) {
  const double d = f.cell_turn(j);
  const double mid = f.theta(j) + 0.5 * d;
  return {mid, d, kernel::sinc(0.5 * d), kernel::sinc(d)};
}

}  // namespace

CellDisplacement cell_displacement(const AngleField& f, int j) {
  const auto k = cell_kernel(f, j);
  const double h = f.grid().h();
  return {h * std::cos(k.mid) * k.s1, h * std::sin(k.mid) * k.s1};
}

TrigMoments trig_moments(const AngleField& f) {
  const int M = f.size();
  const double h = f.grid().h();
  TrigMoments t;
  double c2 = 0;  // int cos 2 theta
  for (int j = 0; j < M; ++j) {
    const auto k = cell_kernel(f, j);
    t.ic += h * std::cos(k.mid) * k.s1;
    t.is += h * std::sin(k.mid) * k.s1;
    c2 += h * std::cos(2.0 * k.mid) * k.s2;
    t.isc += 0.5 * h * std::sin(2.0 * k.mid) * k.s2;
  }
  const double L = f.grid().length();
  t.ic2 = 0.5 * L + 0.5 * c2;
  t.is2 = 0.5 * L - 0.5 * c2;
  return t;
}

PowerTrigMoments power_trig_moments(const AngleField& f, double p) {
  const int M = f.size();
  const double h = f.grid().h();
  PowerTrigMoments r;
  for (int j = 0; j < M; ++j) {
    const auto k = cell_kernel(f, j);
    const double w = std::pow(std::abs(k.turn / h), p) * h * k.s1;
    r.jc += w * std::cos(k.mid);
    r.js += w * std::sin(k.mid);
  }
  return r;
}

double lp_slope_norm_pow(const AngleField& f, double p) {
  const double h = f.grid().h();
  double sum = 0;
  for (double m : cell_slopes(f)) sum += h * std::pow(std::abs(m), p);
  return sum;
}

double lp_slope_norm(const AngleField& f, double p) { return std::pow(lp_slope_norm_pow(f, p), 1.0 / p); }

ClosureGradient closure_gradient(const AngleField& f) {
  const int M = f.size();
  const double h = f.grid().h();
  ClosureGradient g{std::vector<double>(static_cast<std::size_t>(M), 0.0),
                    std::vector<double>(static_cast<std::size_t>(M), 0.0)};
  // theta = a + t d on the cell, t in [0,1]; d/db of int e^{i theta} = i h int t e^{i theta} dt
  // and int t e^{i theta} dt = e^{i mid} (s1/2 + i q), int (1-t) e^{i theta} dt = e^{i mid} (s1/2 - i q).
  for (int j = 0; j < M; ++j) {
    const auto k = cell_kernel(f, j);
    const double q = kernel::odd_moment(k.turn);
    const double c = std::cos(k.mid);
    const double s = std::sin(k.mid);
    const double re_b = h * (c * 0.5 * k.s1 - s * q);
    const double im_b = h * (s * 0.5 * k.s1 + c * q);
    const double re_a = h * (c * 0.5 * k.s1 + s * q);
    const double im_a = h * (s * 0.5 * k.s1 - c * q);
    const auto ja = static_cast<std::size_t>(j);
    const auto jb = static_cast<std::size_t>((j + 1) % M);
    g.d_ic[ja] -= im_a;
    g.d_is[ja] += re_a;
    g.d_ic[jb] -= im_b;
    g.d_is[jb] += re_b;
  }
  return g;
}

double p1_l2_norm(std::span<const double> v, double h) {
  const std::size_t M = v.size();
  double sum = 0;
  for (std::size_t j = 0; j < M; ++j) {
    const double a = v[j];
    const double b = v[(j + 1) % M];
    sum += a * a + a * b + b * b;
  }
  return std::sqrt(sum * h / 3.0);
}

double p1_h1_seminorm(std::span<const double> v, double h) {
  const std::size_t M = v.size();
  double sum = 0;
  for (std::size_t j = 0; j < M; ++j) {
    const double s = (v[(j + 1) % M] - v[j]) / h;
    sum += h * s * s;
  }
  return std::sqrt(sum);
}

std::vector<double> p1_mass_apply(std::span<const double> v, double h) {
  const std::size_t M = v.size();
  std::vector<double> out(M);
  for (std::size_t j = 0; j < M; ++j) {
    out[j] = h * (4.0 * v[j] + v[(j + M - 1) % M] + v[(j + 1) % M]) / 6.0;
  }
  return out;
}

std::vector<double> p1_mass_solve(std::span<const double> rhs, double h) {
  // Cyclic tridiagonal (h/6)[1 4 1]; strictly diagonally dominant, so Jacobi-preconditioned
  // fixed-point iteration x <- (6 rhs / h - x_{j-1} - x_{j+1}) / 4 contracts by 1/2 per sweep.
  const std::size_t M = rhs.size();
  std::vector<double> x(M), next(M);
  for (std::size_t j = 0; j < M; ++j) x[j] = rhs[j] / h;
  for (int it = 0; it < 200; ++it) {
    double change = 0, scale = 0;
    for (std::size_t j = 0; j < M; ++j) {
      next[j] = (6.0 * rhs[j] / h - x[(j + M - 1) % M] - x[(j + 1) % M]) / 4.0;
      change = std::max(change, std::abs(next[j] - x[j]));
      scale = std::max(scale, std::abs(next[j]));
    }
    x.swap(next);
    if (change <= 1e-17 * scale) break;
  }
  return x;
}

}  // namespace pel
