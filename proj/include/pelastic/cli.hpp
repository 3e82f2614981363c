#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pelastic/field.hpp"
#include "pelastic/flow.hpp"

namespace pel::cli {

enum class ScCheck { Off, Advisory, Strict };

struct RunConfig {
  double p = 2.0;
  double L = kTwoPi;
  int M = 128;
  int eta = 1;
  int n = 100;
  std::optional<double> T;
  std::optional<double> tau;
  std::string preset = "circle";  // circle | fourier | file
  // Coefficients of sin / cos of mode k at index k - 1.
  std::vector<double> fourier_a;
  std::vector<double> fourier_b;
  std::string seed_file;
  std::filesystem::path out_dir = "out";
  int frame_stride = 1;
  int continuation_rounds = 1;
  bool override_horizon = false;
  ScCheck sc_check = ScCheck::Off;
  double sc_delta = 0.5;
  double closure_tol = 1e-8;
  double grad_tol = 1e-10;
  int max_iters = 10000;
  bool lumped_mass = false;
  bool emit_frames = true;
  bool emit_svg = true;

  /// Horizon after resolving tau * n.
  std::optional<double> horizon() const;
  FlowParams flow_params() const;
};

/// Thrown by parse_config for --help; carries the usage text.
struct HelpRequested {
  std::string text;
};

/// Parses flags (without the program name); `--config FILE` reads key = value pairs first.
/// Throws ParseError for malformed input or unknown keys, ValidationError for bad values.
RunConfig parse_config(const std::vector<std::string>& args);
RunConfig parse_config_file(const std::filesystem::path& path);

/// Range and consistency checks shared by both parse paths.
void validate(const RunConfig& cfg);

/// One sample per line; blank lines and '#' comments ignored.
std::vector<double> read_samples(const std::filesystem::path& path);

/// Initial oscillation for the preset, projected onto the closure constraint.
AngleField build_initial(const RunConfig& cfg);

/// Shortest decimal form that is stable for a double: 17 significant digits.
std::string format_double(double x);

void write_monitors_csv(const Trajectory& traj, std::ostream& os);
void write_frame_csv(const Frame& frame, std::ostream& os);

struct ViewBox {
  double x, y, width, height;
};
/// Bounding box of the curve of `f` (y flipped for SVG), scaled by 1.5 about its centre.
ViewBox fitted_view_box(const AngleField& f);
void write_frame_svg(const Frame& frame, const ViewBox& box, std::ostream& os);

struct RunOutcome {
  int exit_code = 0;
  std::string message;
  std::optional<Trajectory> trajectory;
};

/// Runs the configured flow and writes monitors.csv, summary.csv and frames/ into out_dir.
/// Library errors are caught and reported through the exit code.
RunOutcome run(const RunConfig& cfg);

}  // namespace pel::cli
