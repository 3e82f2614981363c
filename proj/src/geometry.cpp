#include "pelastic/geometry.hpp"

#include <cmath>
#include <sstream>

#include "pelastic/errors.hpp"

namespace pel {

PlanarCurve reconstruct(const AngleField& f) {
  const int M = f.size();
  PlanarCurve c;
  c.points.reserve(static_cast<std::size_t>(M) + 1);
  c.points.push_back({0.0, 0.0});
  double x = 0, y = 0;
  for (int j = 0; j < M; ++j) {
    const auto d = cell_displacement(f, j);
    x += d.dx;
    y += d.dy;
    c.points.push_back({x, y});
  }
  c.curvature = cell_slopes(f);
  c.closure_gap = std::hypot(x, y);
  c.turning_number = f.grid().winding();
  c.length = f.grid().h() * M;
  return c;
}

double closure_residual(const AngleField& f) {
  const auto t = trig_moments(f);
  return std::hypot(t.ic, t.is);
}

AngleField project_closure(const AngleField& raw, double tol, int max_iters) {
  const auto& g = raw.grid();
  const int M = g.cells();
  const double L = g.length();
  std::vector<double> sn(static_cast<std::size_t>(M)), cs(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) {
    sn[static_cast<std::size_t>(j)] = std::sin(g.ramp(j));
    cs[static_cast<std::size_t>(j)] = std::cos(g.ramp(j));
  }
  auto corrected = [&](double a, double b) {
    std::vector<double> v(raw.values().begin(), raw.values().end());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += a * sn[j] + b * cs[j];
    return AngleField(g, std::move(v));
  };

  double a = 0, b = 0;
  AngleField cur = raw;
  for (int it = 0; it <= max_iters; ++it) {
    const auto t = trig_moments(cur);
    const double res = std::hypot(t.ic, t.is);
    if (res <= tol) return cur;
    if (it == max_iters) break;
    const auto cg = closure_gradient(cur);
    double j11 = 0, j12 = 0, j21 = 0, j22 = 0;
    for (int j = 0; j < M; ++j) {
      const auto k = static_cast<std::size_t>(j);
      j11 += cg.d_ic[k] * sn[k];
      j12 += cg.d_ic[k] * cs[k];
      j21 += cg.d_is[k] * sn[k];
      j22 += cg.d_is[k] * cs[k];
    }
    const double det = j11 * j22 - j12 * j21;
    // The unperturbed circle has |det| = (L/2)^2.
    if (!(std::abs(det) > 1e-8 * 0.25 * L * L)) {
      std::ostringstream os;
      os << "SingularJacobian: closure Jacobian determinant " << det << " at residual " << res;
      throw ClosureError(os.str());
    }
    const double da = -(j22 * t.ic - j12 * t.is) / det;
    const double db = -(-j21 * t.ic + j11 * t.is) / det;
    // Halve the Newton step until the residual drops.
    double step = 1.0;
    AngleField next = corrected(a + da, b + db);
    while (closure_residual(next) >= res && step > 1.0 / 1024) {
      step *= 0.5;
      next = corrected(a + step * da, b + step * db);
    }
    a += step * da;
    b += step * db;
    cur = std::move(next);
  }
  std::ostringstream os;
  os << "NewtonDiverged: closure residual " << closure_residual(cur) << " > " << tol << " after " << max_iters
     << " iterations";
  throw ClosureError(os.str());
}

CurveWitnesses isoperimetric_witnesses(const PlanarCurve& c) {
  if (!(c.closure_gap <= 1e-6)) {
    std::ostringstream os;
    os << "NotClosed: closure gap " << c.closure_gap;
    throw ClosureError(os.str());
  }
  const std::size_t n = c.points.size() - 1;
  double area2 = 0, cx = 0, cy = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const auto& p = c.points[j];
    const auto& q = c.points[j + 1];
    area2 += p.x * q.y - q.x * p.y;
    cx += p.x;
    cy += p.y;
  }
  // Close the polygon through the starting vertex regardless of the residual gap.
  const auto& last = c.points[n];
  const auto& first = c.points[0];
  area2 += last.x * first.y - first.x * last.y;
  return {c.length, 0.5 * area2, {cx / static_cast<double>(n), cy / static_cast<double>(n)}};
}

}  // namespace pel
