#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gwbec/dynamics.hpp"
#include "gwbec/error.hpp"
#include "gwbec/phonon.hpp"
#include "gwbec/waveform.hpp"

namespace gwbec {

enum class BackgroundKind { homogeneous, plane_flow, vortex_pair, vortex_lattice, obstacle_flow };
enum class Pipeline { nonlinear, linear, detectability, cross_validate };

std::string_view to_string(BackgroundKind k);
std::string_view to_string(Pipeline p);

struct GridSpec {
  int dim = 2;
  std::vector<std::size_t> points;
  std::vector<double> extent;
};

/// "simulation": hbar = m = 1 with 1 eV energy and 1 m length units.
/// "atom": hbar = m = 1 for an atom of `mass_kg` and a length unit of
/// `length_scale_m`; SI values in reports use these scales.
struct UnitSpec {
  std::string system = "simulation";
  double mass_kg = 0.0;
  double length_scale_m = 1e-6;
};

struct BackgroundSpec {
  BackgroundKind kind = BackgroundKind::homogeneous;
  double rho0 = 1.0;
  double g = 1.0;
  std::vector<int> flow_mode{1, 0};
  double Omega = 0.0;
  double trap_omega = 0.0;
  double noise = 0.05;
  double vortex_separation = 0.0;  // 0 = L_x/2, or 6R/7 inside an envelope
  double obstacle_height = 0.5;
  double obstacle_width = 2.0;
  double envelope_radius = 0.0;  // 0 = none; profile exp(-(r/R)^4)
  double perturbation = 0.0;
  int perturbation_modes = 2;
  std::size_t relax_steps = 0;  // 0 = per-kind default
  double relax_tolerance = 0.0;
};

struct WaveformSpec {
  bool present = false;
  WaveformKind kind = WaveformKind::sinusoid;
  WaveformParams params;
  std::filesystem::path file;  // tabulated
};

struct EvolutionSpec {
  Scheme scheme = Scheme::metric;
  double dt = 0.0;  // 0 = default_time_step, trimmed to divide the span
  std::size_t steps = 0;
  double duration = 0.0;  // 0 = waveform duration
  std::size_t snapshot_stride = 0;
  bool check_invariants = true;
};

struct LinearSpec {
  bool quantum_pressure = false;
  SourceForm source = SourceForm::metric;
  double dt = 0.0;
  double dt_fraction = 0.5;
  double density_floor = 1e-2;  // relative; below it the linear model sees vacuum
  std::size_t snapshot_stride = 0;
};

struct DetectSpec {
  std::optional<double> N;
  std::optional<double> n;
  double dVdh_eV = 0.0;
  std::optional<double> noon_epsilon;
  bool strained_Q = false;
  // detectability-only inputs (no PDE)
  std::optional<double> T_s;
  std::optional<double> h_max;
  std::optional<double> E_eV;
};

struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 0;
  std::filesystem::path output;
  bool overwrite = false;
  std::vector<Pipeline> pipelines;
  std::optional<GridSpec> grid;
  UnitSpec units;
  BackgroundSpec background;
  WaveformSpec waveform;
  EvolutionSpec evolution;
  LinearSpec linear;
  DetectSpec detect;
  std::vector<double> ladder;  // strain amplitudes for cross_validate
  std::filesystem::path base_dir;

  bool has(Pipeline p) const;
  /// False for the detectability-only fast path.
  bool has_pde() const { return grid.has_value(); }
};

/// Every problem found in a config.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Parses flat TOML-style text: `[section]` headers, `key = value` lines,
/// dotted keys, `#` comments, strings, numbers, booleans and flat arrays.
/// Relative file paths are resolved against `base_dir`. Throws ConfigError
/// listing every problem.
ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);

/// Every accepted key, dotted.
const std::vector<std::string>& known_config_keys();
/// Closest known key to a misspelt one, or empty.
std::string suggest_key(const std::string& unknown);

/// Config echo with defaults filled in, as JSON.
std::string to_json(const ScenarioConfig& config);

UnitSystem make_units(const UnitSpec& spec);
GridPtr make_grid(const GridSpec& spec);
StrainWaveform make_waveform(const WaveformSpec& spec);

}  // namespace gwbec
