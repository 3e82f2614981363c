#include "pelastic/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pelastic/energy.hpp"
#include "pelastic/errors.hpp"
#include "pelastic/geometry.hpp"

namespace pel::cli {

namespace {

constexpr int kMaxIndexedMode = 64;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Key names of a config file, checked against the registered options so that errors carry
// a line number; CLI11 then does the actual value parsing.
void scan_config_keys(const std::filesystem::path& path, const std::set<std::string>& known) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read config file " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const std::string where = fmt::format("{}:{}", path.string(), lineno);
    if (body.front() == '[') throw ParseError(fmt::format("{}: sections are not supported", where));
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(fmt::format("{}: expected key = value", where));
    const std::string key = trim(body.substr(0, eq));
    if (!known.count(key)) throw ParseError(fmt::format("{}: unknown key '{}'", where, key));
    if (trim(body.substr(eq + 1)).empty()) throw ParseError(fmt::format("{}: missing value for '{}'", where, key));
  }
}

ScCheck parse_sc_check(const std::string& s) {
  if (s == "off") return ScCheck::Off;
  if (s == "advisory") return ScCheck::Advisory;
  if (s == "strict") return ScCheck::Strict;
  throw ValidationError("sc_check must be off, advisory or strict (got '" + s + "')");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  return os;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw IoError("write failed for " + path.string());
}

void write_summary(const RunConfig& cfg, const Trajectory& traj, const std::optional<SmallnessReport>& sc,
                   std::ostream& os) {
  const auto row = [&](const std::string& key, double v) { os << key << ',' << format_double(v) << '\n'; };
  os << "key,value\n";
  row("p", cfg.p);
  row("L", cfg.L);
  row("M", cfg.M);
  row("eta", cfg.eta);
  row("rounds", static_cast<double>(traj.rounds.size()));
  row("steps", static_cast<double>(traj.records.size()));
  for (std::size_t k = 0; k < traj.rounds.size(); ++k) {
    const auto& r = traj.rounds[k];
    const std::string pre = traj.rounds.size() == 1 ? "" : fmt::format("round{}_", k);
    row(pre + "c_star", r.constants.c_star);
    row(pre + "c_one", r.constants.c_one);
    row(pre + "t_max", r.constants.t_max);
    row(pre + "horizon", r.horizon);
    row(pre + "tau", r.tau);
  }
  const double fp0 = energy_fp(traj.initial, cfg.p).fp;
  row("fp_initial", fp0);
  row("fp_final", traj.records.empty() ? fp0 : traj.records.back().fp);
  row("fenchel_floor", fenchel_floor(traj.initial.grid(), cfg.p));
  double dissipation = 0;
  for (const auto& r : traj.records) dissipation += r.tau * r.v_l2 * r.v_l2;
  row("total_dissipation", dissipation);
  row("final_time", traj.final_time());
  row("closure_initial", closure_residual(traj.initial));
  row("closure_final", closure_residual(traj.final_field));
  if (sc) {
    row("sc_passes", sc->passes ? 1 : 0);
    row("sc_c_star", sc->c_star);
    row("sc_c_star_limit", sc->c_star_limit);
    row("sc_v0_norm_sq", sc->v0_norm_sq);
    row("sc_v0_threshold", sc->v0_threshold);
    row("sc_min_slope_ratio", sc->min_slope_ratio);
  }
}

}  // namespace

std::optional<double> RunConfig::horizon() const {
  if (T) return T;
  if (tau) return *tau * n;
  return std::nullopt;
}

FlowParams RunConfig::flow_params() const {
  FlowParams fp;
  fp.p = p;
  fp.n_steps = n;
  fp.horizon = horizon();
  fp.override_horizon = override_horizon;
  fp.solver.grad_tol = grad_tol;
  fp.solver.max_iters = max_iters;
  fp.mass = lumped_mass ? MassModel::Lumped : MassModel::Consistent;
  fp.continuation_rounds = continuation_rounds;
  fp.closure_tol = closure_tol;
  fp.frame_stride = frame_stride;
  return fp;
}

void validate(const RunConfig& c) {
  if (!(c.p > 1.0) || !std::isfinite(c.p)) throw ValidationError("p must exceed 1");
  if (c.p < 1.05) throw ValidationError("p below 1.05 is outside the supported range of the command line");
  if (!(c.L > 0.0) || !std::isfinite(c.L)) throw ValidationError("L must be positive");
  if (c.M < 4) throw ValidationError("M must be at least 4");
  if (c.eta < 1) throw ValidationError("eta must be at least 1");
  if (c.n < 1) throw ValidationError("n must be at least 1");
  if (c.T && c.tau) throw ValidationError("T and tau are exclusive; give one of them together with n");
  if (c.T && !(*c.T > 0.0)) throw ValidationError("T must be positive");
  if (c.tau && !(*c.tau > 0.0)) throw ValidationError("tau must be positive");
  if (c.preset != "circle" && c.preset != "fourier" && c.preset != "file") {
    throw ValidationError("preset must be circle, fourier or file (got '" + c.preset + "')");
  }
  if (c.preset == "file" && c.seed_file.empty()) throw ValidationError("preset file needs seed_file");
  if (c.frame_stride < 1) throw ValidationError("frame_stride must be at least 1");
  if (c.continuation_rounds < 1) throw ValidationError("continuation_rounds must be at least 1");
  if (c.continuation_rounds > 1 && c.p != 2.0) throw ValidationError("NotP2: continuation_rounds > 1 requires p = 2");
  if (c.sc_check != ScCheck::Off && c.p < 2.0) throw ValidationError("sc_check requires p >= 2");
  if (!(c.sc_delta > 0.0)) throw ValidationError("sc_delta must be positive");
  if (!(c.closure_tol > 0.0)) throw ValidationError("closure_tol must be positive");
  if (!(c.grad_tol > 0.0)) throw ValidationError("grad_tol must be positive");
  if (c.max_iters < 1) throw ValidationError("max_iters must be at least 1");
  for (double v : c.fourier_a) {
    if (!std::isfinite(v)) throw ValidationError("fourier coefficients must be finite");
  }
  for (double v : c.fourier_b) {
    if (!std::isfinite(v)) throw ValidationError("fourier coefficients must be finite");
  }
}

RunConfig parse_config(const std::vector<std::string>& args) {
  RunConfig cfg;
  CLI::App app{"p-elastic flow of closed planar curves by minimizing movements", "pelastic"};
  app.option_defaults()->always_capture_default();

  double T = 0, tau = 0;
  std::string out_dir = cfg.out_dir.string();
  std::string sc_check = "off";
  std::vector<double> list_a, list_b;
  std::vector<double> idx_a(kMaxIndexedMode, 0.0), idx_b(kMaxIndexedMode, 0.0);
  std::vector<CLI::Option*> opt_a, opt_b;

  app.add_option("-p,--p", cfg.p, "exponent of the elastic energy");
  app.add_option("-L,--L", cfg.L, "curve length");
  app.add_option("-M,--M", cfg.M, "number of cells");
  app.add_option("--eta", cfg.eta, "winding number");
  app.add_option("-n,--n", cfg.n, "time steps per round");
  auto* opt_T = app.add_option("-T,--T", T, "horizon; default is the a-priori horizon");
  auto* opt_tau = app.add_option("--tau", tau, "time step; sets T = tau * n");
  app.add_option("--preset", cfg.preset, "circle, fourier or file");
  app.add_option("--a", list_a, "sin coefficients of modes 1, 2, ...");
  app.add_option("--b", list_b, "cos coefficients of modes 1, 2, ...");
  for (int k = 1; k <= kMaxIndexedMode; ++k) {
    const auto i = static_cast<std::size_t>(k - 1);
    opt_a.push_back(app.add_option(fmt::format("--a_{}", k), idx_a[i])->group(""));
    opt_b.push_back(app.add_option(fmt::format("--b_{}", k), idx_b[i])->group(""));
  }
  app.add_option("--seed_file", cfg.seed_file, "nodal samples for preset file");
  app.add_option("--out_dir", out_dir, "output directory");
  app.add_option("--frame_stride", cfg.frame_stride, "keep every k-th frame");
  app.add_option("--continuation_rounds", cfg.continuation_rounds, "restarts for p = 2");
  app.add_flag("--override_horizon", cfg.override_horizon, "allow T beyond the a-priori horizon");
  app.add_option("--sc_check", sc_check, "off, advisory or strict");
  app.add_option("--sc_delta", cfg.sc_delta, "threshold for the initial velocity clause");
  app.add_option("--closure_tol", cfg.closure_tol, "closure tolerance of the initial curve");
  app.add_option("--grad_tol", cfg.grad_tol, "relative gradient tolerance of each step");
  app.add_option("--max_iters", cfg.max_iters, "iteration cap of each step");
  app.add_flag("--lumped_mass", cfg.lumped_mass, "lumped instead of consistent mass");
  app.add_option("--emit_frames", cfg.emit_frames, "write frame CSV files");
  app.add_option("--emit_svg", cfg.emit_svg, "write frame SVG files");

  std::set<std::string> known;
  for (const auto* o : app.get_options()) {
    for (const auto& name : o->get_lnames()) known.insert(name);
  }
  std::string config_path;
  app.set_config("--config", "", "key = value configuration file");

  // Locate --config ourselves so that key errors carry line numbers.
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (!config_path.empty()) scan_config_keys(config_path, known);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::ParseError& e) {
    throw ParseError(fmt::format("{}: {}", e.get_name(), e.what()));
  }

  if (opt_T->count()) cfg.T = T;
  if (opt_tau->count()) cfg.tau = tau;
  cfg.out_dir = out_dir;
  cfg.sc_check = parse_sc_check(sc_check);
  cfg.fourier_a = list_a;
  cfg.fourier_b = list_b;
  const auto merge = [](std::vector<double>& dst, const std::vector<CLI::Option*>& opts, const std::vector<double>& v) {
    for (std::size_t i = 0; i < opts.size(); ++i) {
      if (!opts[i]->count()) continue;
      if (dst.size() <= i) dst.resize(i + 1, 0.0);
      dst[i] = v[i];
    }
  };
  merge(cfg.fourier_a, opt_a, idx_a);
  merge(cfg.fourier_b, opt_b, idx_b);
  if (cfg.preset == "circle" && (!cfg.fourier_a.empty() || !cfg.fourier_b.empty())) {
    throw ValidationError("fourier coefficients given with preset circle");
  }
  validate(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path) { return parse_config({"--config", path.string()}); }

std::vector<double> read_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("FileError: cannot read " + path.string());
  std::vector<double> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    std::istringstream ss(body);
    double v;
    std::string rest;
    if (!(ss >> v) || (ss >> rest) || !std::isfinite(v)) {
      throw IoError(fmt::format("FileError: {}:{}: expected one finite number", path.string(), lineno));
    }
    out.push_back(v);
  }
  return out;
}

AngleField build_initial(const RunConfig& cfg) {
  const PeriodicGrid g(cfg.L, cfg.M, cfg.eta);
  if (cfg.preset == "circle") return AngleField::zeros(g);

  std::vector<double> raw(static_cast<std::size_t>(cfg.M), 0.0);
  if (cfg.preset == "fourier") {
    for (int j = 0; j < cfg.M; ++j) {
      const double x = kTwoPi * j / cfg.M;
      double s = 0;
      for (std::size_t k = 0; k < cfg.fourier_a.size(); ++k) s += cfg.fourier_a[k] * std::sin((k + 1.0) * x);
      for (std::size_t k = 0; k < cfg.fourier_b.size(); ++k) s += cfg.fourier_b[k] * std::cos((k + 1.0) * x);
      raw[static_cast<std::size_t>(j)] = s;
    }
  } else {
    raw = read_samples(cfg.seed_file);
    if (raw.size() != static_cast<std::size_t>(cfg.M)) {
      throw IoError(fmt::format("FileError: {} holds {} samples but M = {}", cfg.seed_file, raw.size(), cfg.M));
    }
  }
  const double tol = std::min(cfg.closure_tol, 1e-12 * std::max(1.0, cfg.L));
  return project_closure(AngleField(g, std::move(raw)), tol);
}

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

void write_monitors_csv(const Trajectory& traj, std::ostream& os) {
  os << "i,t,fp,penalty,lambda1,lambda2,det_at,delta,v_l2,v_h1,closure,l2u,eq39_margin,eq311_margin,cumv2\n";
  for (const auto& r : traj.records) {
    os << r.index;
    for (double v : {r.t, r.fp, r.penalty, r.lambda1, r.lambda2, r.det_at, r.delta, r.v_l2, r.v_h1, r.closure, r.l2u,
                     r.eq39_margin, r.eq311_margin, r.cumv2}) {
      os << ',' << format_double(v);
    }
    os << '\n';
  }
}

void write_frame_csv(const Frame& frame, std::ostream& os) {
  const auto& f = frame.field;
  const auto& g = f.grid();
  const int M = g.cells();
  const auto curve = reconstruct(f);
  os << "s,u,theta,kappa,x,y\n";
  for (int j = 0; j <= M; ++j) {
    const int jj = j % M;
    // Nodal curvature: mean of the two adjacent cell slopes.
    const double kappa = 0.5 * (curve.curvature[static_cast<std::size_t>((jj + M - 1) % M)] +
                                curve.curvature[static_cast<std::size_t>(jj)]);
    const auto& pt = curve.points[static_cast<std::size_t>(j)];
    os << format_double(g.node(j)) << ',' << format_double(f[jj]) << ',' << format_double(f.theta(j)) << ','
       << format_double(kappa) << ',' << format_double(pt.x) << ',' << format_double(pt.y) << '\n';
  }
}

ViewBox fitted_view_box(const AngleField& f) {
  const auto c = reconstruct(f);
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& pt : c.points) {
    x0 = std::min(x0, pt.x);
    x1 = std::max(x1, pt.x);
    y0 = std::min(y0, -pt.y);
    y1 = std::max(y1, -pt.y);
  }
  const double w = 1.5 * std::max(x1 - x0, 1e-12);
  const double h = 1.5 * std::max(y1 - y0, 1e-12);
  return {0.5 * (x0 + x1) - 0.5 * w, 0.5 * (y0 + y1) - 0.5 * h, w, h};
}

void write_frame_svg(const Frame& frame, const ViewBox& box, std::ostream& os) {
  const auto c = reconstruct(frame.field);
  const double stroke = 0.004 * std::max(box.width, box.height);
  os << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.9g} {:.9g} {:.9g} {:.9g}">)", box.x, box.y,
                    box.width, box.height)
     << '\n';
  os << fmt::format(R"(<title>step {} t={:.9g}</title>)", frame.index, frame.t) << '\n';
  os << fmt::format(R"(<polyline fill="none" stroke="black" stroke-width="{:.6g}" points=")", stroke);
  for (std::size_t j = 0; j < c.points.size(); ++j) {
    if (j) os << ' ';
    os << fmt::format("{:.9g},{:.9g}", c.points[j].x, -c.points[j].y);
  }
  os << "\"/>\n</svg>\n";
}

RunOutcome run(const RunConfig& cfg) {
  RunOutcome out;
  try {
    validate(cfg);
    const AngleField u0 = build_initial(cfg);
    std::optional<SmallnessReport> sc;
    if (cfg.sc_check != ScCheck::Off) {
      sc = check_smallness_sc(u0, cfg.p, cfg.sc_delta);
      if (cfg.sc_check == ScCheck::Strict && !sc->passes) {
        throw SmallnessFailed(fmt::format("SmallnessFailed: c_star {} (limit {}), min slope ratio {} (floor 0.5)",
                                          sc->c_star_ok ? "ok" : "violated", format_double(sc->c_star_limit),
                                          format_double(sc->min_slope_ratio)));
      }
    }
    const FlowParams params = cfg.flow_params();
    Trajectory traj = cfg.continuation_rounds > 1 ? continue_p2(u0, params) : run_flow(u0, params);

    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create " + cfg.out_dir.string() + ": " + ec.message());
    {
      const auto path = cfg.out_dir / "monitors.csv";
      auto os = open_out(path);
      write_monitors_csv(traj, os);
      finish(os, path);
    }
    {
      const auto path = cfg.out_dir / "summary.csv";
      auto os = open_out(path);
      write_summary(cfg, traj, sc, os);
      finish(os, path);
    }
    if (cfg.emit_frames || cfg.emit_svg) {
      const auto dir = cfg.out_dir / "frames";
      std::filesystem::create_directories(dir, ec);
      if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
      const ViewBox box = fitted_view_box(u0);
      for (const auto& fr : traj.frames) {
        if (cfg.emit_frames) {
          const auto path = dir / fmt::format("frame_{:06d}.csv", fr.index);
          auto os = open_out(path);
          write_frame_csv(fr, os);
          finish(os, path);
        }
        if (cfg.emit_svg) {
          const auto path = dir / fmt::format("frame_{:06d}.svg", fr.index);
          auto os = open_out(path);
          write_frame_svg(fr, box, os);
          finish(os, path);
        }
      }
    }
    out.message = fmt::format("{} steps, t = {}, fp = {}", traj.records.size(), format_double(traj.final_time()),
                              format_double(traj.records.empty() ? 0.0 : traj.records.back().fp));
    out.trajectory = std::move(traj);
  } catch (const MonitorViolation& e) {
    out.exit_code = e.exit_code();
    out.message = fmt::format("MonitorViolation {}: {}", e.monitor(), e.what());
  } catch (const Error& e) {
    out.exit_code = e.exit_code();
    out.message = e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    out.exit_code = static_cast<int>(ErrorKind::Io);
    out.message = e.what();
  } catch (const std::exception& e) {
    out.exit_code = static_cast<int>(ErrorKind::Internal);
    out.message = std::string("internal error: ") + e.what();
  }
  return out;
}

}  // namespace pel::cli
