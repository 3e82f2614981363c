#include "pelastic/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pelastic/energy.hpp"
#include "pelastic/errors.hpp"
#include "pelastic/geometry.hpp"
#include "pelastic/multipliers.hpp"

namespace pel {

HorizonConstants horizon(const AngleField& u0, double p) {
  if (!(p > 1.0)) throw ValidationError("p must exceed 1");
  const double L = u0.grid().length();
  HorizonConstants h;
  h.c_star = 2.0 * lp_slope_norm_pow(u0, p);
  h.c_one = 8.0 * L * h.c_star * (4.0 / (L * L) + std::pow(8.0 * h.c_star / std::numbers::pi, 2.0 * p / (p - 1.0)));
  h.t_max = h.c_star / (8.0 * p * L * h.c_one * h.c_one);
  return h;
}

namespace {

void validate(const FlowParams& params) {
  if (!(params.p > 1.0) || !std::isfinite(params.p)) throw ValidationError("p must exceed 1");
  if (params.n_steps < 1) throw ValidationError("n must be at least 1");
  if (params.horizon && !(*params.horizon > 0.0)) throw ValidationError("horizon T must be positive");
  if (params.frame_stride < 1) throw ValidationError("frame_stride must be at least 1");
  if (params.continuation_rounds < 1) throw ValidationError("continuation_rounds must be at least 1");
  if (!(params.closure_tol > 0.0)) throw ValidationError("closure_tol must be positive");
}

double slope_lp_norm(std::span<const double> v, double h, double p) {
  const std::size_t M = v.size();
  double sum = 0;
  for (std::size_t j = 0; j < M; ++j) sum += h * std::pow(std::abs((v[(j + 1) % M] - v[j]) / h), p);
  return std::pow(sum, 1.0 / p);
}

[[noreturn]] void violation(const std::string& name, long step, double lhs, double rhs) {
  std::ostringstream os;
  os.precision(17);
  os << "monitor " << name << " violated at step " << step << ": " << lhs << " > " << rhs;
  throw MonitorViolation(name, step, os.str());
}

// Appends one round to traj starting from its final field.
// Only the initial data is held to closure_tol; at continuation seams the drift of the
// discrete scheme is carried over and stays visible in the closure column.
void run_round(Trajectory& traj, const FlowParams& params, std::optional<double> horizon_T, int round) {
  const AngleField u0 = traj.final_field;
  const double p = params.p;
  const double L = u0.grid().length();
  const double h = u0.grid().h();

  const double closure0 = closure_residual(u0);
  if (round == 0 && !(closure0 <= params.closure_tol)) {
    std::ostringstream os;
    os << "ClosureViolatedAtStart: |(int cos, int sin)| = " << closure0 << " > " << params.closure_tol;
    throw ClosureError(os.str());
  }

  RoundInfo info;
  info.constants = horizon(u0, p);
  info.horizon = horizon_T.value_or(info.constants.t_max);
  if (info.horizon > info.constants.t_max * (1.0 + 1e-12) && !params.override_horizon) {
    std::ostringstream os;
    os.precision(6);
    os << "HorizonExceeded: T = " << info.horizon << " exceeds the a-priori horizon " << info.constants.t_max
       << " (use override_horizon)";
    throw HorizonExceeded(os.str());
  }
  info.n_steps = params.n_steps;
  info.tau = info.horizon / params.n_steps;
  info.t_offset = traj.final_time();
  info.first_index = traj.records.empty() ? 0 : traj.records.back().index;
  info.fp_start = energy_fp(u0, p).fp;

  const double c1 = info.constants.c_one;
  const double T = info.horizon;
  const double drift = T * L * 4.0 * c1 * c1;
  info.bounds.energy_bound = p * info.fp_start + p * drift;
  info.bounds.multiplier_bound = c1;
  info.bounds.dissipation_bound = 4.0 * (info.fp_start + drift);
  info.bounds.l2_bound = p1_l2_norm(u0.values(), h) + std::sqrt(4.0 * T * (info.fp_start + drift));
  traj.rounds.push_back(info);

  const double rel = 1.0 + params.ledger_rel_tol;
  const double energy_cap = params.override_horizon
                                ? info.bounds.energy_bound
                                : std::min(info.bounds.energy_bound, info.constants.c_star);

  AngleField prev = u0;
  auto lam_prev = multipliers(prev, p);
  double cumv2 = 0;
  for (int i = 1; i <= params.n_steps; ++i) {
    const long index = info.first_index + i;
    StepObjective so(prev, info.tau, p, lam_prev.lambda1, lam_prev.lambda2, params.mass);
    const StepResult step = [&] {
      try {
        return minimize_step(so, params.solver);
      } catch (const StepFailed& e) {
        throw StepFailed("step " + std::to_string(index) + ": " + e.what());
      }
    }();

    StepRecord r;
    r.index = index;
    r.round = round;
    r.tau = info.tau;
    r.t_start = info.t_offset + (i - 1) * info.tau;
    r.t = info.t_offset + i * info.tau;
    r.fp = step.fp_next;
    r.penalty = step.penalty;
    r.lambda1 = lam_prev.lambda1;
    r.lambda2 = lam_prev.lambda2;
    r.det_at = lam_prev.det_at;
    r.delta = lam_prev.delta;
    r.v_l2 = p1_l2_norm(step.velocity, h);
    r.v_h1 = p1_h1_seminorm(step.velocity, h);
    r.closure = closure_residual(step.next);
    r.l2u = p1_l2_norm(step.next.values(), h);
    r.eq39_margin = step.certificate.eq39_margin;
    r.eq311_margin = step.certificate.eq311_margin;
    cumv2 += info.tau * r.v_l2 * r.v_l2;
    r.cumv2 = cumv2;
    r.iters = step.iters;
    r.status = step.status;

    const auto lam_next = multipliers(step.next, p);
    r.lambda1_end = lam_next.lambda1;
    r.lambda2_end = lam_next.lambda2;
    const double vscale = info.tau * (slope_lp_norm(step.velocity, h, p) + r.v_l2);
    if (vscale > 0) {
      r.lambda_increment_ratio = std::max(std::abs(lam_next.lambda1 - lam_prev.lambda1),
                                          std::abs(lam_next.lambda2 - lam_prev.lambda2)) / vscale;
    }

    if (r.eq39_margin < -1e-12 * (1.0 + std::abs(step.fp_prev))) violation("descent", index, step.g_value, step.fp_prev);
    if (r.eq311_margin < -params.certificate_tol) violation("energy_slack", index, -r.eq311_margin, 0.0);
    if (p * r.fp > energy_cap * rel) violation("energy_bound", index, p * r.fp, energy_cap);
    if (std::abs(r.lambda1) > c1 * rel) violation("multiplier_bound", index, std::abs(r.lambda1), c1);
    if (std::abs(r.lambda2) > c1 * rel) violation("multiplier_bound", index, std::abs(r.lambda2), c1);
    if (r.cumv2 > info.bounds.dissipation_bound * rel) violation("dissipation_bound", index, r.cumv2, info.bounds.dissipation_bound);
    if (r.l2u > info.bounds.l2_bound * rel) violation("l2_bound", index, r.l2u, info.bounds.l2_bound);

    traj.records.push_back(r);
    if (index % params.frame_stride == 0 || i == params.n_steps) {
      traj.frames.push_back({index, r.t, step.next, step.velocity});
    }
    prev = step.next;
    lam_prev = lam_next;
  }
  traj.final_field = prev;
}

Trajectory start_trajectory(const AngleField& u0, const FlowParams& params) {
  validate(params);
  const auto lam = multipliers(u0, params.p);
  Trajectory traj{params, u0, {}, {}, {}, u0, lam.lambda1, lam.lambda2};
  traj.frames.push_back({0, 0.0, u0, std::vector<double>(static_cast<std::size_t>(u0.size()), 0.0)});
  return traj;
}

}  // namespace

Trajectory run_flow(const AngleField& u0, const FlowParams& params) {
  Trajectory traj = start_trajectory(u0, params);
  run_round(traj, params, params.horizon, 0);
  return traj;
}

Trajectory continue_p2(const AngleField& u0, const FlowParams& params) {
  if (params.p != 2.0) throw ValidationError("NotP2: long-time continuation requires p = 2");
  Trajectory traj = start_trajectory(u0, params);
  const double fp0 = energy_fp(u0, params.p).fp;
  double slack = 0;
  for (int round = 0; round < params.continuation_rounds; ++round) {
    const std::size_t first = traj.records.size();
    run_round(traj, params, params.horizon, round);
    for (std::size_t k = first; k < traj.records.size(); ++k) {
      const auto& r = traj.records[k];
      const double lam = std::abs(r.lambda1) + std::abs(r.lambda2);
      slack += r.tau * u0.grid().length() * lam * lam;
    }
    const double seam = traj.records.back().fp;
    if (seam > fp0 + slack + params.certificate_tol) {
      violation("seam-energy", traj.records.back().index, seam, fp0 + slack);
    }
  }
  return traj;
}

Interpolants sample_interpolants(const Trajectory& traj, double t) {
  if (traj.records.empty()) throw ValidationError("OutOfRange: empty trajectory");
  if (!(t >= 0.0) || t > traj.final_time()) {
    std::ostringstream os;
    os << "OutOfRange: t = " << t << " outside [0, " << traj.final_time() << "]";
    throw ValidationError(os.str());
  }
  if (traj.params.frame_stride != 1 || traj.frames.size() != traj.records.size() + 1) {
    throw ValidationError("StrideTooCoarse: interpolants need every step stored (frame_stride = 1)");
  }
  // Step k covers (t_start, t]; t = 0 belongs to the first step.
  auto it = std::lower_bound(traj.records.begin(), traj.records.end(), t,
                             [](const StepRecord& r, double v) { return r.t < v; });
  if (it == traj.records.end()) it = std::prev(traj.records.end());
  const std::size_t k = static_cast<std::size_t>(it - traj.records.begin());
  const StepRecord& r = *it;
  const Frame& left = traj.frames[k];
  const Frame& right = traj.frames[k + 1];

  const double w = std::clamp((t - r.t_start) / r.tau, 0.0, 1.0);
  std::vector<double> lin(left.field.values().begin(), left.field.values().end());
  for (std::size_t j = 0; j < lin.size(); ++j) lin[j] = (1.0 - w) * lin[j] + w * right.field.values()[j];

  Interpolants out{AngleField(left.field.grid(), std::move(lin)),
                   right.field,
                   left.field,
                   right.velocity,
                   {r.lambda1, r.lambda2},
                   {r.lambda1 + w * (r.lambda1_end - r.lambda1), r.lambda2 + w * (r.lambda2_end - r.lambda2)}};
  return out;
}

SmallnessReport check_smallness_sc(const AngleField& u0, double p, double v0_threshold) {
  if (!(p >= 2.0)) throw ValidationError("the smallness condition is stated for p >= 2");
  const auto& g = u0.grid();
  const double h = g.h();
  const double ramp = g.ramp_slope();
  SmallnessReport s;

  s.c_star = 2.0 * lp_slope_norm_pow(u0, p);
  s.c_star_limit = 4.0 * std::pow(ramp, p) * g.length();
  s.c_star_ok = s.c_star <= s.c_star_limit;

  const auto lam = multipliers(u0, p);
  auto gf = grad_fp(u0, p);
  for (double& x : gf) x = -x;
  s.v0 = p1_mass_solve(gf, h);
  const auto forcing = nodal_forcing(u0, lam.lambda1, lam.lambda2);
  for (std::size_t j = 0; j < s.v0.size(); ++j) s.v0[j] += forcing[j];
  const double vn = p1_l2_norm(s.v0, h);
  s.v0_norm_sq = vn * vn;
  s.v0_threshold = std::min(0.5, v0_threshold);
  s.v0_ok = s.v0_norm_sq <= s.v0_threshold;

  double min_ratio = INFINITY;
  for (double m : cell_slopes(u0)) min_ratio = std::min(min_ratio, std::pow(std::abs(m) / ramp, p - 1.0));
  s.min_slope_ratio = min_ratio;
  s.slope_floor_ok = min_ratio >= 0.5;

  s.passes = s.c_star_ok && s.slope_floor_ok;
  return s;
}

}  // namespace pel
