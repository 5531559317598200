#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace critflow::cli {

/// Exit statuses of the critflow binary.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kSpfDisagreement = 2,
  kTheoremContradiction = 3,
  kHomologyError = 4,
  kDeformError = 5,
  kEversionError = 6,
  kIndefiniteError = 7,
};

struct RunConfig {
  std::string family = "demo";  // built-in name or manifest path
  double lambda_lo = -1.0;
  double lambda_hi = 1.0;
  int slices = 400;
  double window = 10.0;
  double epsilon = 0.05;
  double grid_h = 0.01;
  int jobs = 0;                 // 0: all cores
  std::uint64_t seed = 1;
  std::string out = "critflow-out";
  std::string path;             // operator path manifest for spectral-flow
  int modes = 2;
  int starts = 250;
  std::optional<double> level_a, level_b;

  /// Throws InvalidArgument on violated invariants.
  void validate() const;
  int resolved_jobs() const;
};

/// Overlays a JSON config file (keys: family, lambda_interval, slices,
/// window_R, epsilon, grid_h, jobs, seed, output_dir, path, modes, starts,
/// level_a, level_b) onto cfg. Unknown keys are rejected.
void apply_config_file(RunConfig& cfg, const std::string& path);

int cmd_spectral_flow(const RunConfig& cfg, std::ostream& log);
int cmd_scan(const RunConfig& cfg, std::ostream& log);
int cmd_homology(const RunConfig& cfg, std::ostream& log);
int cmd_deform(const RunConfig& cfg, std::ostream& log);
int cmd_eversion(const RunConfig& cfg, std::ostream& log);
int cmd_indefinite(const RunConfig& cfg, std::ostream& log);
int cmd_selftest(const RunConfig& cfg, std::ostream& log);

/// Parses arguments (flags > --config file > defaults) and dispatches.
int run(int argc, const char* const* argv);

}  // namespace critflow::cli
