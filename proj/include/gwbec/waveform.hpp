#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace gwbec {

enum class WaveformKind { sinusoid, gaussian_pulse, linear_chirp, tabulated };

std::string_view to_string(WaveformKind kind);
WaveformKind waveform_kind_from_string(std::string_view name);

struct StrainSample {
  double h = 0.0;
  double hdot = 0.0;
  double hddot = 0.0;
};

/// Parameters for the analytic waveform kinds. Times and frequencies are in
/// simulation units; unused fields are ignored by the kinds that do not need
/// them.
struct WaveformParams {
  double h_max = 0.0;
  double frequency = 0.0;      // sinusoid, chirp start
  double frequency_end = 0.0;  // chirp end (defaults to `frequency`)
  double phase = 0.0;          // radians
  double center = 0.0;         // pulse
  double width = 0.0;          // pulse (standard deviation)
  double duration = 0.0;
};

/// Time-dependent (+)-polarised strain h(t) on [0, duration] with closed-form
/// first and second derivatives. Immutable once built.
class StrainWaveform {
 public:
  static StrainWaveform sinusoid(double h_max, double frequency, double phase, double duration);
  static StrainWaveform gaussian_pulse(double h_max, double center, double width, double duration);
  /// sin(phase + 2*pi*(f0*t + (f1-f0)*t^2/(2*duration))), scaled by h_max.
  static StrainWaveform linear_chirp(double h_max, double f0, double f1, double phase,
                                     double duration);
  /// Not-a-knot cubic spline through (t_i, h_i). Times must start at 0 and be
  /// strictly increasing; at least two samples. `h_max` becomes the exact
  /// maximum of |spline| over the domain.
  static StrainWaveform tabulated(std::vector<double> times, std::vector<double> values);
  /// Reads a two-column CSV with header `t,h`.
  static StrainWaveform from_csv(const std::filesystem::path& path);

  static StrainWaveform make(WaveformKind kind, const WaveformParams& params);

  /// Strain and its two time derivatives at `t`. Throws `out_of_range` for t
  /// outside [0, duration]; a slack of 1e-12*max(1, duration) absorbs
  /// accumulated rounding in time stamps.
  StrainSample sample(double t) const;
  double h(double t) const { return sample(t).h; }

  /// Copy with the amplitude multiplied by `factor` (>= 0).
  StrainWaveform scaled(double factor) const;

  WaveformKind kind() const { return kind_; }
  const WaveformParams& params() const { return params_; }
  double h_max() const { return params_.h_max; }
  double duration() const { return params_.duration; }
  const std::vector<double>& table_times() const { return times_; }
  const std::vector<double>& table_values() const { return values_; }

  std::string describe() const;

 private:
  StrainWaveform() = default;
  StrainSample sample_spline(double t) const;
  void fit_spline();

  WaveformKind kind_ = WaveformKind::sinusoid;
  WaveformParams params_;
  std::vector<double> times_;
  std::vector<double> values_;
  std::vector<double> second_;  // spline second derivatives at the knots
};

}  // namespace gwbec
