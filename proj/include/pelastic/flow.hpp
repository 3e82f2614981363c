#pragma once

#include <array>
#include <optional>
#include <vector>

#include "pelastic/field.hpp"
#include "pelastic/step.hpp"

namespace pel {

struct FlowParams {
  double p = 2.0;
  int n_steps = 100;
  /// Horizon T; when absent the largest T admitted by the a-priori estimates is used.
  std::optional<double> horizon;
  /// Permit T beyond the a-priori horizon.
  bool override_horizon = false;
  SolverOptions solver;
  MassModel mass = MassModel::Consistent;
  /// Number of restarts for the p = 2 continuation.
  int continuation_rounds = 1;
  /// Required |(int cos theta0, int sin theta0)| at the start.
  double closure_tol = 1e-8;
  /// Keep every frame_stride-th field; 1 keeps all of them (needed for interpolants).
  int frame_stride = 1;
  /// Relative slack on the closed-form ledgers.
  double ledger_rel_tol = 1e-9;
  /// Absolute slack on the per-step descent certificates.
  double certificate_tol = 1e-10;
};

/// c_* = 2 ||(u0 + phi)_s||_p^p, c_1 = 8 L c_* (4/L^2 + (8 c_*/pi)^(2p/(p-1))),
/// t_max = c_* / (8 p L c_1^2).
struct HorizonConstants {
  double c_star = 0;
  double c_one = 0;
  double t_max = 0;
};

HorizonConstants horizon(const AngleField& u0, double p);

struct StepRecord {
  long index = 0;
  int round = 0;
  double t_start = 0;
  double t = 0;
  double tau = 0;
  double fp = 0;
  double penalty = 0;
  double lambda1 = 0;  // frozen at the previous field
  double lambda2 = 0;
  double det_at = 0;   // of the previous field
  double delta = 0;
  double v_l2 = 0;
  double v_h1 = 0;
  double closure = 0;
  double l2u = 0;
  double eq39_margin = 0;
  double eq311_margin = 0;
  double cumv2 = 0;
  double lambda1_end = 0;  // multipliers of the new field
  double lambda2_end = 0;
  /// max_r |lambda_r(u_i) - lambda_r(u_{i-1})| / (tau (||V_s||_p + ||V||_2)); 0 when V = 0.
  double lambda_increment_ratio = 0;
  int iters = 0;
  StepStatus status = StepStatus::Converged;
};

/// Bounds one round of the flow is held to.
struct LedgerBounds {
  double energy_bound = 0;       // p F_p(u0) + p T L 4 c1^2
  double multiplier_bound = 0;   // c1
  double dissipation_bound = 0;  // 4 (F_p(u0) + T L 4 c1^2)
  double l2_bound = 0;           // ||u0||_2 + sqrt(4 T (F_p(u0) + T L 4 c1^2))
};

struct RoundInfo {
  HorizonConstants constants;
  LedgerBounds bounds;
  double horizon = 0;
  double tau = 0;
  int n_steps = 0;
  double t_offset = 0;
  long first_index = 0;  // global index of the round's initial field
  double fp_start = 0;
};

struct Frame {
  long index;
  double t;
  AngleField field;
  std::vector<double> velocity;  // velocity of the step ending here; zeros for index 0
};

struct Trajectory {
  FlowParams params;
  AngleField initial;
  std::vector<RoundInfo> rounds;
  std::vector<StepRecord> records;
  std::vector<Frame> frames;
  AngleField final_field;
  double lambda1_initial = 0;
  double lambda2_initial = 0;

  double final_time() const { return records.empty() ? 0.0 : records.back().t; }
};

/// Minimizing-movements flow over one horizon. Every step is certified and every
/// ledger checked; violations throw MonitorViolation naming the inequality.
Trajectory run_flow(const AngleField& u0, const FlowParams& params);

/// p = 2 long-time continuation: restart from the terminal field continuation_rounds times,
/// recomputing the horizon unless an explicit one is given.
Trajectory continue_p2(const AngleField& u0, const FlowParams& params);

struct Interpolants {
  AngleField u_lin;    // piecewise linear in time
  AngleField u_const;  // right endpoint value
  AngleField U_const;  // left endpoint value
  std::vector<double> v;
  std::array<double, 2> lam_const;
  std::array<double, 2> lam_lin;
};

/// Requires frame_stride == 1. Throws ValidationError on t outside [0, final_time].
Interpolants sample_interpolants(const Trajectory& traj, double t);

struct SmallnessReport {
  bool passes = false;        // c_star_ok && slope_floor_ok
  bool c_star_ok = false;
  bool v0_ok = false;         // advisory: the true constant is not explicit
  bool slope_floor_ok = false;
  double c_star = 0;
  double c_star_limit = 0;    // 4 ||phi_s||_p^p
  double v0_norm_sq = 0;
  double v0_threshold = 0;
  double min_slope_ratio = 0; // min_j |m_j|^(p-1) / |phi_s|^(p-1); the floor is 1/2
  std::vector<double> v0;
};

/// Near-circle hypotheses for p >= 2. V0 = (weak) (|theta_s|^(p-2) theta_s)_s + l1 sin theta - l2 cos theta.
SmallnessReport check_smallness_sc(const AngleField& u0, double p, double v0_threshold = 0.5);

}  // namespace pel
