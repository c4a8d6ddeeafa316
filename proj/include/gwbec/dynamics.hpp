#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gwbec/condensate.hpp"
#include "gwbec/error.hpp"
#include "gwbec/waveform.hpp"

namespace gwbec {

enum class Scheme { flat, metric, gauge, imaginary_time };

std::string_view to_string(Scheme s);
Scheme scheme_from_string(std::string_view name);

/// 0.1 * 2 m dx^2 / (hbar pi^2) on the finest axis.
double default_time_step(const Grid& grid, double hbar, double mass);

/// One Strang step K/2 - N - K/2 of i hbar psi_t = [-hbar^2 lap/2m + g|psi|^2 + V] psi.
/// `potential` may be null.
CondensateState step_flat(const CondensateState& state, double dt, const RealField* potential = nullptr);
/// As step_flat with the strained kinetic factor (1+h)k_x^2 + (1-h)k_y^2 + k_z^2,
/// h taken at t + dt/2.
CondensateState step_metric(const CondensateState& state, double dt, const StrainWaveform& waveform,
                            const RealField* potential = nullptr);
/// Gauge-frame step: exact rescale sub-steps for the generator
/// (hdot/2)(x d_x - y d_y) around a flat Strang step. `state.psi` is the
/// gauge-frame amplitude.
CondensateState step_gauge(const CondensateState& state, double dt, const StrainWaveform& waveform,
                           const RealField* potential = nullptr);

/// f(x e^eps, y e^-eps) by Fourier interpolation along x and y.
ComplexField rescale_xy(const ComplexField& f, double eps);
/// Gauge-frame amplitude to the metric-frame amplitude at strain h.
inline ComplexField gauge_to_metric(const ComplexField& phi, double h) { return rescale_xy(phi, -0.5 * h); }
inline ComplexField metric_to_gauge(const ComplexField& psi, double h) { return rescale_xy(psi, 0.5 * h); }

struct RelaxOptions {
  double tau = 0.0;  // 0 picks a step from the nonlinear energy scale
  std::size_t max_steps = 20000;
  double tolerance = 1e-10;  // relative energy change per step
  double Omega = 0.0;        // rotating-frame angular velocity about z
  const RealField* potential = nullptr;
  /// Keep the phase of the starting state and relax only the amplitude.
  /// Holds imprinted vortices in place where free relaxation would let a
  /// vortex/antivortex pair drift together.
  bool pin_phase = false;
};

struct RelaxResult {
  CondensateState state;
  std::size_t steps = 0;
  double residual = 0.0;  // last relative change of E - Omega Lz
  bool converged = false;
  bool monotone = true;  // E - Omega Lz never increased by more than rounding
  double energy = 0.0;   // final rotating-frame energy
};

/// Normalised semi-implicit gradient flow toward the minimum of
/// E - Omega Lz at fixed N.
RelaxResult relax_imaginary_time(const CondensateState& state, const RelaxOptions& options);

struct EvolutionConfig {
  double dt = 0.0;
  std::size_t n_steps = 0;
  Scheme scheme = Scheme::flat;
  std::optional<StrainWaveform> waveform;
  std::optional<RealField> potential;
  std::size_t snapshot_stride = 0;  // 0 keeps only the initial and final states
  bool check_invariants = true;
  double Omega = 0.0;  // imaginary_time only
};

/// Throws unless dt > 0, n_steps >= 1, a waveform is present for the strained
/// schemes and the waveform covers [t0, t0 + n_steps dt].
void validate(const EvolutionConfig& config, double t0);

struct Trajectory {
  Scheme scheme = Scheme::flat;
  std::string waveform_tag;
  std::vector<double> times;  // one per recorded step, including t0
  std::vector<Observables> series;
  std::vector<StrainSample> strain;
  std::vector<CondensateState> snapshots;  // metric/lab frame
  CondensateState final_state;             // metric/lab frame
};

/// Raised by evolve when a step produces a non-finite field or breaks an
/// invariant; carries the last good state.
class StepError : public Error {
 public:
  StepError(ErrorKind kind, const std::string& what, std::size_t step, CondensateState last_good)
      : Error(kind, what), step_(step), last_good_(std::move(last_good)) {}
  std::size_t step() const { return step_; }
  const CondensateState& last_good() const { return last_good_; }

 private:
  std::size_t step_;
  CondensateState last_good_;
};

/// Largest edge density, relative to the peak, accepted by the gauge scheme.
inline constexpr double gauge_edge_tolerance = 1e-10;

/// Runs the selected scheme for n_steps steps, recording observables after
/// every step. For the gauge scheme the input and all recorded states are in
/// the metric frame; the rescale to and from the gauge frame happens here.
/// The gauge scheme rejects fields that do not vanish at the x/y faces.
Trajectory evolve(const CondensateState& state, const EvolutionConfig& config);

/// Quadratic energy of the difference between two runs:
/// (hbar^2/2m) int |grad(psi_a - psi_b)|^2 + (g/2) int (|psi_a|^2 - |psi_b|^2)^2.
double excess_perturbation_energy(const CondensateState& a, const CondensateState& b);

/// True if every value is finite.
bool all_finite(const ComplexField& f);

}  // namespace gwbec
