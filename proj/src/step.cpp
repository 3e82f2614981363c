#include "pelastic/step.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>

#include "pelastic/energy.hpp"
#include "pelastic/errors.hpp"
#include "pelastic/multipliers.hpp"

namespace pel {

namespace {

double sup_norm(std::span<const double> v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

AngleField displaced(const AngleField& prev, std::span<const double> d) {
  std::vector<double> v(prev.values().begin(), prev.values().end());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] += d[j];
  return AngleField(prev.grid(), std::move(v));
}

double penalty_value(const StepObjective& so, std::span<const double> d) {
  const double h = so.prev().grid().h();
  double sq = 0;
  if (so.mass() == MassModel::Lumped) {
    for (double x : d) sq += x * x;
    sq *= h;
  } else {
    const double n = p1_l2_norm(d, h);
    sq = n * n;
  }
  return sq / (2.0 * so.tau());
}

std::vector<double> penalty_gradient(const StepObjective& so, std::span<const double> d) {
  const double h = so.prev().grid().h();
  std::vector<double> g;
  if (so.mass() == MassModel::Lumped) {
    g.assign(d.begin(), d.end());
    for (double& x : g) x *= h;
  } else {
    g = p1_mass_apply(d, h);
  }
  for (double& x : g) x /= so.tau();
  return g;
}

void check_grid(const StepObjective& so, const AngleField& u) {
  if (!(u.grid() == so.prev().grid())) throw ValidationError("grid mismatch between objective and field");
}

std::vector<double> increment_of(const StepObjective& so, const AngleField& u) {
  check_grid(so, u);
  std::vector<double> d(static_cast<std::size_t>(u.size()));
  for (int j = 0; j < u.size(); ++j) d[static_cast<std::size_t>(j)] = u[j] - so.prev()[j];
  return d;
}

ObjectiveParts parts_at(const StepObjective& so, const AngleField& u, std::span<const double> d) {
  ObjectiveParts r;
  r.fp = energy_fp(u, so.p()).fp;
  r.penalty = penalty_value(so, d);
  if (so.lambda1() != 0.0 || so.lambda2() != 0.0) {
    const auto t = trig_moments(u);
    r.coupling = so.lambda1() * (t.ic - so.ic_prev()) + so.lambda2() * (t.is - so.is_prev());
  }
  r.total = r.fp + r.penalty + r.coupling;
  return r;
}

ObjectiveGradientParts gradient_parts_at(const StepObjective& so, const AngleField& u,
                                         std::span<const double> d) {
  ObjectiveGradientParts g;
  g.fp = grad_fp(u, so.p());
  g.penalty = penalty_gradient(so, d);
  g.coupling.assign(static_cast<std::size_t>(u.size()), 0.0);
  if (so.lambda1() != 0.0 || so.lambda2() != 0.0) {
    const auto cg = closure_gradient(u);
    for (std::size_t j = 0; j < g.coupling.size(); ++j) {
      g.coupling[j] = so.lambda1() * cg.d_ic[j] + so.lambda2() * cg.d_is[j];
    }
  }
  return g;
}

std::vector<double> sum_parts(const ObjectiveGradientParts& g) {
  std::vector<double> out(g.fp.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = g.fp[j] + g.penalty[j] + g.coupling[j];
  return out;
}

}  // namespace

StepObjective::StepObjective(AngleField prev, double tau, double p, MassModel mass)
    : StepObjective(prev, tau, p, 0.0, 0.0, mass) {
  const auto r = multipliers(prev_, p_);
  lambda1_ = r.lambda1;
  lambda2_ = r.lambda2;
}

StepObjective::StepObjective(AngleField prev, double tau, double p, double lambda1, double lambda2, MassModel mass)
    : prev_(std::move(prev)), tau_(tau), p_(p), lambda1_(lambda1), lambda2_(lambda2), mass_(mass) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("time step tau must be positive");
  if (!(p > 1.0)) throw ValidationError("p must exceed 1");
  const auto t = trig_moments(prev_);
  ic_prev_ = t.ic;
  is_prev_ = t.is;
  fp_prev_ = energy_fp(prev_, p_).fp;
}

ObjectiveParts objective_parts_increment(const StepObjective& so, std::span<const double> increment) {
  return parts_at(so, displaced(so.prev(), increment), increment);
}

std::vector<double> grad_objective_increment(const StepObjective& so, std::span<const double> increment) {
  return sum_parts(gradient_parts_at(so, displaced(so.prev(), increment), increment));
}

ObjectiveParts objective_parts(const StepObjective& so, const AngleField& u) {
  return parts_at(so, u, increment_of(so, u));
}

double objective(const StepObjective& so, const AngleField& u) { return objective_parts(so, u).total; }

std::vector<double> grad_objective(const StepObjective& so, const AngleField& u) {
  return sum_parts(grad_objective_parts(so, u));
}

ObjectiveGradientParts grad_objective_parts(const StepObjective& so, const AngleField& u) {
  return gradient_parts_at(so, u, increment_of(so, u));
}

std::string to_string(StepStatus s) {
  switch (s) {
    case StepStatus::Converged: return "converged";
    case StepStatus::Stationary: return "stationary";
    case StepStatus::ResolutionLimited: return "resolution-limited";
    case StepStatus::MaxItersWithDescent: return "max-iters-with-descent";
  }
  return "unknown";
}

namespace {

struct Evaluated {
  std::vector<double> d;
  double f;
  std::vector<double> g;
};

Evaluated evaluate(const StepObjective& so, std::vector<double> d) {
  const AngleField u = displaced(so.prev(), d);
  Evaluated e;
  e.f = parts_at(so, u, d).total;
  e.g = sum_parts(gradient_parts_at(so, u, d));
  e.d = std::move(d);
  return e;
}

double auto_initial_step(const StepObjective& so) {
  const auto& grid = so.prev().grid();
  const double h = grid.h();
  double stiff = 0;
  for (double m : cell_slopes(so.prev())) {
    if (m != 0.0) stiff = std::max(stiff, (so.p() - 1.0) * std::pow(std::abs(m), so.p() - 2.0));
  }
  const double diag = (2.0 * h / 3.0) / so.tau() + 2.0 * stiff / h + (std::abs(so.lambda1()) + std::abs(so.lambda2())) * h;
  return 1.0 / diag;
}

// L-BFGS two-loop recursion applied to the negative gradient.
std::vector<double> lbfgs_direction(const std::deque<std::pair<std::vector<double>, std::vector<double>>>& hist,
                                    const std::vector<double>& g, double gamma) {
  std::vector<double> q(g);
  std::vector<double> alpha(hist.size());
  for (std::size_t k = hist.size(); k-- > 0;) {
    const auto& [s, y] = hist[k];
    const double rho = 1.0 / dot(y, s);
    alpha[k] = rho * dot(s, q);
    for (std::size_t j = 0; j < q.size(); ++j) q[j] -= alpha[k] * y[j];
  }
  for (double& x : q) x *= gamma;
  for (std::size_t k = 0; k < hist.size(); ++k) {
    const auto& [s, y] = hist[k];
    const double rho = 1.0 / dot(y, s);
    const double beta = rho * dot(y, q);
    for (std::size_t j = 0; j < q.size(); ++j) q[j] += s[j] * (alpha[k] - beta);
  }
  for (double& x : q) x = -x;
  return q;
}

}  // namespace

StepResult minimize_step(const StepObjective& so, const SolverOptions& opts) {
  if (!(opts.armijo_c > 0 && opts.armijo_c < 1)) throw ValidationError("armijo_c must lie in (0,1)");
  if (!(opts.backtrack_factor > 0 && opts.backtrack_factor < 1)) {
    throw ValidationError("backtrack_factor must lie in (0,1)");
  }
  if (!(opts.grad_tol > 0)) throw ValidationError("grad_tol must be positive");
  if (opts.max_iters < 1) throw ValidationError("max_iters must be positive");

  const std::size_t M = static_cast<std::size_t>(so.prev().size());
  Evaluated cur = evaluate(so, std::vector<double>(M, 0.0));
  const double f0 = cur.f;
  const double tol = opts.grad_tol * (1.0 + sup_norm(cur.g));
  // Function differences below this are indistinguishable from rounding in G.
  const double noise = 1e-15 * (1.0 + std::abs(f0));
  const double step_seed = opts.initial_step > 0 ? opts.initial_step : auto_initial_step(so);

  std::deque<std::pair<std::vector<double>, std::vector<double>>> hist;
  double gamma = step_seed;
  StepStatus status = StepStatus::Converged;
  int iters = 0;

  if (sup_norm(cur.g) <= tol) {
    status = StepStatus::Stationary;
  } else {
    bool done = false;
    for (; iters < opts.max_iters && !done; ++iters) {
      std::vector<double> dir;
      if (opts.quasi_newton && !hist.empty()) {
        dir = lbfgs_direction(hist, cur.g, gamma);
      } else {
        dir = cur.g;
        for (double& x : dir) x *= -gamma;
      }
      double slope = dot(cur.g, dir);
      if (!(slope < 0)) {
        hist.clear();
        dir = cur.g;
        for (double& x : dir) x *= -step_seed;
        slope = dot(cur.g, dir);
      }

      double alpha = 1.0;
      bool accepted = false;
      Evaluated trial;
      while (alpha > 1e-20) {
        std::vector<double> d(cur.d);
        for (std::size_t j = 0; j < M; ++j) d[j] += alpha * dir[j];
        if (d == cur.d) break;
        trial = evaluate(so, std::move(d));
        const double trial_slope = dot(trial.g, dir);
        const bool armijo = trial.f <= cur.f + opts.armijo_c * alpha * slope;
        // Approximate Wolfe test for when G has flattened to rounding level.
        const bool approx = trial.f <= cur.f + noise && trial_slope >= 0.9 * slope && trial_slope <= -0.8 * slope;
        if (std::isfinite(trial.f) && (armijo || approx)) {
          accepted = true;
          break;
        }
        alpha *= opts.backtrack_factor;
      }
      if (!accepted) {
        status = StepStatus::ResolutionLimited;
        break;
      }

      std::vector<double> s(M), y(M);
      for (std::size_t j = 0; j < M; ++j) {
        s[j] = trial.d[j] - cur.d[j];
        y[j] = trial.g[j] - cur.g[j];
      }
      if (opts.quasi_newton) {
        const double sy = dot(s, y);
        if (sy > 0) {
          hist.emplace_back(std::move(s), std::move(y));
          if (static_cast<int>(hist.size()) > std::max(1, opts.memory)) hist.pop_front();
          gamma = sy / dot(hist.back().second, hist.back().second);
        }
      } else {
        // Steepest descent seeds the next search one expansion above the accepted length.
        gamma = alpha * gamma / opts.backtrack_factor;
      }
      cur = std::move(trial);
      if (sup_norm(cur.g) <= tol) done = true;
    }
    if (!done && status == StepStatus::Converged) status = StepStatus::MaxItersWithDescent;
  }

  if (status == StepStatus::ResolutionLimited || status == StepStatus::MaxItersWithDescent) {
    // Acceptable only with a descent certificate in hand.
    const bool descended = cur.f < f0 || (cur.f <= f0 + noise && sup_norm(cur.g) <= 1e3 * tol) ||
                           (status == StepStatus::ResolutionLimited && cur.f <= f0);
    if (!descended) {
      std::ostringstream os;
      os << "no descent on G after " << iters << " iterations (G(prev) = " << f0 << ", G = " << cur.f
         << ", |grad| = " << sup_norm(cur.g) << ", tol = " << tol << ")";
      throw StepFailed(os.str());
    }
  }
  if (cur.f > f0) {
    // Rounding-level increase: fall back to the feasible start.
    cur = evaluate(so, std::vector<double>(M, 0.0));
  }

  StepResult r{displaced(so.prev(), cur.d), cur.d, {}, 0, 0, 0, 0, 0, iters, 0, status, {}};
  r.velocity = cur.d;
  for (double& v : r.velocity) v /= so.tau();
  const auto parts = objective_parts_increment(so, cur.d);
  r.g_value = parts.total;
  r.fp_prev = so.fp_prev();
  r.fp_next = parts.fp;
  r.penalty = parts.penalty;
  r.h_value = parts.coupling;
  r.grad_norm = sup_norm(cur.g);
  const double L = so.prev().grid().length();
  const double lam = std::abs(so.lambda1()) + std::abs(so.lambda2());
  r.certificate.eq39_margin = r.fp_prev - r.g_value;
  r.certificate.eq311_margin = r.fp_prev + so.tau() * L * lam * lam - r.fp_next - 0.5 * r.penalty;
  return r;
}

}  // namespace pel
