#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gwbec/condensate.hpp"
#include "gwbec/config.hpp"
#include "gwbec/detect.hpp"

namespace gwbec {

/// Process exit status for a scenario or CLI command.
enum class ExitCode : int { ok = 0, validation = 1, runtime = 2, invariant = 3 };

ExitCode exit_code_for(ErrorKind kind);

const char* version_string();

struct PreparedBackground {
  CondensateState state;
  std::optional<RealField> potential;
  std::vector<VortexSite> vortices;
  std::vector<std::pair<std::string, double>> info;
  std::vector<std::string> notes;
};

/// Builds the background state named by the config (relaxed where the kind
/// needs it, then enveloped and perturbed as configured).
PreparedBackground prepare_background(const ScenarioConfig& config);

/// Time step and step count covering the evolution span exactly.
struct Timing {
  double dt = 0.0;
  std::size_t steps = 0;
  double span = 0.0;
};
Timing resolve_timing(const EvolutionSpec& spec, const Grid& grid, double hbar, double mass,
                      const std::optional<StrainWaveform>& waveform);

/// Least-squares slope of log y against log x; NaN if any value is not
/// positive or fewer than two points are given.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct RunResult {
  ExitCode code = ExitCode::ok;
  std::string stage;    // failing stage, or "done"
  std::string message;  // empty on success
  std::filesystem::path output;
  std::optional<DetectionReport> report;
};

struct RunOptions {
  bool overwrite = false;  // in addition to the config's own flag
};

/// Runs every selected pipeline and writes the artifacts. Never throws;
/// failures are reported in the result and in manifest.json.
RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// Writes plot.py into `dir`. Throws `io` listing the expected files when
/// observables.csv is missing.
std::filesystem::path emit_plot_script(const std::filesystem::path& dir);

struct SweepResult {
  ExitCode code = ExitCode::ok;  // worst over all scenarios
  std::vector<std::filesystem::path> configs;
  std::vector<RunResult> runs;
};

/// Runs each config on up to `threads` workers; each scenario writes to its
/// own directory. Writes a summary CSV (one row per scenario) to `summary`
/// when it is non-empty. Configs that fail validation get code 1.
SweepResult run_sweep(const std::vector<std::filesystem::path>& configs, unsigned threads,
                      const RunOptions& options, const std::filesystem::path& summary);

}  // namespace gwbec
