#pragma once

#include <numbers>
#include <span>
#include <vector>

namespace pel {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// |m h| below this switches the per-cell trigonometric kernels to their Taylor branch.
inline constexpr double kSlopeEpsilon = 1e-7;

/// Uniform periodic partition of [0, L] into M cells; eta is the winding number
/// of the ramp phi(s) = 2 pi eta s / L.
class PeriodicGrid {
 public:
  PeriodicGrid(double length, int cells, int winding);

  double length() const noexcept { return length_; }
  int cells() const noexcept { return cells_; }
  int winding() const noexcept { return winding_; }
  double h() const noexcept { return h_; }

  /// phi_s = 2 pi eta / L.
  double ramp_slope() const noexcept { return kTwoPi * winding_ / length_; }
  /// phi at node j (j may equal M, giving 2 pi eta).
  double ramp(int j) const noexcept { return kTwoPi * winding_ * static_cast<double>(j) / cells_; }
  double node(int j) const noexcept { return h_ * j; }

  bool operator==(const PeriodicGrid& o) const noexcept {
    return length_ == o.length_ && cells_ == o.cells_ && winding_ == o.winding_;
  }

 private:
  double length_;
  int cells_;
  int winding_;
  double h_;
};

/// Nodal values u_0..u_{M-1} of a continuous periodic piecewise-linear oscillation.
/// The tangent angle is theta = u + phi.
class AngleField {
 public:
  AngleField(PeriodicGrid grid, std::vector<double> values);

  static AngleField zeros(const PeriodicGrid& grid);

  const PeriodicGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  int size() const noexcept { return grid_.cells(); }
  double operator[](int j) const noexcept { return values_[static_cast<std::size_t>(j)]; }

  /// theta at node j for 0 <= j <= M; node M is node 0 shifted by 2 pi eta.
  double theta(int j) const noexcept {
    const int M = grid_.cells();
    return values_[static_cast<std::size_t>(j == M ? 0 : j)] + grid_.ramp(j);
  }

  /// Increment of theta across cell j, i.e. m_j h.
  double cell_turn(int j) const noexcept {
    const int M = grid_.cells();
    const double du = values_[static_cast<std::size_t>((j + 1) % M)] - values_[static_cast<std::size_t>(j)];
    return du + kTwoPi * grid_.winding() / M;
  }

  /// Copy with every nodal value shifted by alpha.
  AngleField shifted(double alpha) const;

 private:
  PeriodicGrid grid_;
  std::vector<double> values_;
};

/// Validating constructor: exactly M finite samples.
AngleField make_field(const PeriodicGrid& grid, std::span<const double> samples);

/// Per-cell slope of theta: (u_{j+1} - u_j)/h + 2 pi eta / L.
std::vector<double> cell_slopes(const AngleField& f);

struct TrigMoments {
  double ic = 0;   // int cos theta
  double is = 0;   // int sin theta
  double ic2 = 0;  // int cos^2 theta
  double is2 = 0;  // int sin^2 theta
  double isc = 0;  // int sin theta cos theta
};

struct PowerTrigMoments {
  double jc = 0;  // int |theta_s|^p cos theta
  double js = 0;  // int |theta_s|^p sin theta
};

/// Exact integrals over a field whose theta is linear on every cell.
TrigMoments trig_moments(const AngleField& f);
PowerTrigMoments power_trig_moments(const AngleField& f, double p);

/// (sum_j h |m_j|^p)^(1/p).
double lp_slope_norm(const AngleField& f, double p);
/// sum_j h |m_j|^p, the p-th power of lp_slope_norm without the root.
double lp_slope_norm_pow(const AngleField& f, double p);

/// Nodal gradients of (int cos theta, int sin theta) with respect to u_0..u_{M-1}.
struct ClosureGradient {
  std::vector<double> d_ic;
  std::vector<double> d_is;
};
ClosureGradient closure_gradient(const AngleField& f);

/// Per-cell displacement (int_cell cos theta, int_cell sin theta).
struct CellDisplacement {
  double dx;
  double dy;
};
CellDisplacement cell_displacement(const AngleField& f, int j);

/// L2 norm of the P1 interpolant of nodal values on a grid of width h.
double p1_l2_norm(std::span<const double> nodal, double h);
/// L2 norm of the derivative of the P1 interpolant.
double p1_h1_seminorm(std::span<const double> nodal, double h);
/// Consistent P1 mass matrix times nodal vector.
std::vector<double> p1_mass_apply(std::span<const double> nodal, double h);
/// Solve (P1 mass) x = rhs on the periodic grid.
std::vector<double> p1_mass_solve(std::span<const double> rhs, double h);

namespace kernel {
/// sin(x)/x with a Taylor branch near zero.
double sinc(double x);
/// int_{-1/2}^{1/2} t sin(x t) dt.
double odd_moment(double x);
}  // namespace kernel

}  // namespace pel
