#pragma once

#include <span>
#include <string>
#include <vector>

#include "pelastic/field.hpp"

namespace pel {

enum class MassModel {
  Consistent,  // exact L2 product of P1 functions
  Lumped,      // nodal quadrature h * sum d_j^2
};

/// G(u) = F_p(u) + P(u) + H(u) for one minimizing-movements step:
///   P(u) = (1/2tau) int |u - prev|^2,
///   H(u) = lambda1 (int cos theta - int cos theta_prev) + lambda2 (int sin theta - int sin theta_prev),
/// with lambda frozen at the closure multipliers of prev.
class StepObjective {
 public:
  /// Freezes lambda = multipliers(prev, p).
  StepObjective(AngleField prev, double tau, double p, MassModel mass = MassModel::Consistent);
  /// Explicit multipliers, e.g. for testing the coupling term in isolation.
  StepObjective(AngleField prev, double tau, double p, double lambda1, double lambda2,
                MassModel mass = MassModel::Consistent);

  const AngleField& prev() const noexcept { return prev_; }
  double tau() const noexcept { return tau_; }
  double p() const noexcept { return p_; }
  double lambda1() const noexcept { return lambda1_; }
  double lambda2() const noexcept { return lambda2_; }
  MassModel mass() const noexcept { return mass_; }
  double ic_prev() const noexcept { return ic_prev_; }
  double is_prev() const noexcept { return is_prev_; }
  double fp_prev() const noexcept { return fp_prev_; }

 private:
  AngleField prev_;
  double tau_;
  double p_;
  double lambda1_;
  double lambda2_;
  MassModel mass_;
  double ic_prev_ = 0;
  double is_prev_ = 0;
  double fp_prev_ = 0;
};

struct ObjectiveParts {
  double fp = 0;
  double penalty = 0;
  double coupling = 0;  // H
  double total = 0;
};

/// Evaluation at u = prev + increment. Working in the increment keeps the penalty exact
/// even when tau is so small that prev + increment rounds back to prev.
ObjectiveParts objective_parts_increment(const StepObjective& so, std::span<const double> increment);
std::vector<double> grad_objective_increment(const StepObjective& so, std::span<const double> increment);

ObjectiveParts objective_parts(const StepObjective& so, const AngleField& u);
double objective(const StepObjective& so, const AngleField& u);
std::vector<double> grad_objective(const StepObjective& so, const AngleField& u);

/// Separate gradients of the three pieces; they sum to grad_objective.
struct ObjectiveGradientParts {
  std::vector<double> fp;
  std::vector<double> penalty;
  std::vector<double> coupling;
};
ObjectiveGradientParts grad_objective_parts(const StepObjective& so, const AngleField& u);

struct SolverOptions {
  /// Stop when ||grad G||_inf <= grad_tol * (1 + ||grad G(prev)||_inf).
  double grad_tol = 1e-10;
  int max_iters = 10000;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  /// Steepest-descent step seed; <= 0 selects a tau-aware estimate of the inverse Hessian scale.
  double initial_step = 0;
  /// L-BFGS directions, each still subject to the line search on G.
  bool quasi_newton = true;
  int memory = 8;
};

enum class StepStatus {
  Converged,
  Stationary,         // prev already satisfies the gradient tolerance
  ResolutionLimited,  // line search stalled at floating-point resolution after descent
  MaxItersWithDescent,
};

std::string to_string(StepStatus s);

struct DescentCertificate {
  /// G(prev) - G(next) >= 0.
  double eq39_margin = 0;
  /// F_p(prev) + tau L (|l1| + |l2|)^2 - F_p(next) - P(next)/2 >= 0.
  double eq311_margin = 0;
};

struct StepResult {
  AngleField next;
  std::vector<double> increment;  // next - prev before rounding into nodal values
  std::vector<double> velocity;   // increment / tau
  double g_value = 0;
  double fp_prev = 0;
  double fp_next = 0;
  double penalty = 0;
  double h_value = 0;
  int iters = 0;
  double grad_norm = 0;
  StepStatus status = StepStatus::Converged;
  DescentCertificate certificate;
};

/// Warm-started line-search descent on G from prev. Every accepted iterate lowers G (or
/// keeps it within floating-point noise of the start); the returned field never has a
/// larger G than prev. Throws StepFailed when no descent is achieved.
StepResult minimize_step(const StepObjective& so, const SolverOptions& opts = {});

}  // namespace pel
