#pragma once

#include <vector>

#include "pelastic/field.hpp"

namespace pel {

struct Point {
  double x;
  double y;
};

/// Arc-length polyline of the curve with tangent (cos theta, sin theta), starting at the origin.
struct PlanarCurve {
  std::vector<Point> points;       // M + 1 vertices; the last one closes the loop when closed
  std::vector<double> curvature;   // per-cell theta_s
  double closure_gap = 0;          // |point_M - point_0|
  int turning_number = 1;
  double length = 0;
};

PlanarCurve reconstruct(const AngleField& f);

/// |(int cos theta, int sin theta)|.
double closure_residual(const AngleField& f);

/// Adds a sin(2 pi eta s/L) + b cos(2 pi eta s/L) and solves for (a, b) by Newton's method so
/// that the curve closes to within tol. Throws ClosureError (NewtonDiverged / SingularJacobian).
AngleField project_closure(const AngleField& raw, double tol, int max_iters = 50);

struct CurveWitnesses {
  double length;
  double signed_area;
  Point centroid;
};

/// Length, shoelace area and vertex centroid of a closed reconstructed curve.
CurveWitnesses isoperimetric_witnesses(const PlanarCurve& c);

}  // namespace pel
