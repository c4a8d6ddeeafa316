#pragma once

#include <string>
#include <vector>

#include "gwbec/condensate.hpp"
#include "gwbec/waveform.hpp"

namespace gwbec {

/// Flat-spacetime background for the linearised phonon equations. The sound
/// speed is always derived from rho0.
struct BackgroundFlow {
  RealField rho0;
  std::vector<RealField> v0;  // one per axis
  RealField S0;
  std::vector<std::uint8_t> valid;  // rho0 above the phase floor
  double g = 0.0;
  double mass = 1.0;
  double hbar = 1.0;
  /// max |Im(psi* H psi)| relative to max |psi* H psi|.
  double continuity_residual = 0.0;
  /// Largest deviation of the local chemical potential Re(psi* H psi)/rho
  /// from its mean, relative to the mean, where rho0 > 1e-3 max(rho0).
  double bernoulli_residual = 0.0;
  std::string warning;

  const GridPtr& grid() const { return rho0.grid(); }
  RealField cs2() const;
  double mean_density() const;
  bool is_homogeneous() const;
};

/// Hydrodynamic background of a state, with steady-state residuals. When
/// either residual exceeds `tolerance` a warning is attached and the
/// background is still returned.
BackgroundFlow background_from(const CondensateState& state, const RealField* potential = nullptr,
                               double tolerance = 1e-6);

struct Perturbation {
  RealField drho;
  RealField dS;
  double t = 0.0;
};

Perturbation zero_perturbation(const GridPtr& grid, double t = 0.0);

enum class SourceForm { metric, gauge };
std::string_view to_string(SourceForm f);

struct SourceTerms {
  RealField F_rho;
  RealField F_S;
  SourceForm form = SourceForm::metric;
};

/// h [d_y(rho0 v0_y) - d_x(rho0 v0_x)] and m h (v0_y^2 - v0_x^2)/2. With
/// `quantum_pressure` the eikonal source also carries
/// (hbar^2 h/2m)(d_x^2 sqrt(rho0) - d_y^2 sqrt(rho0))/sqrt(rho0).
SourceTerms source_terms_metric(const BackgroundFlow& bg, double h, bool quantum_pressure = false);
/// (hdot/2)(x d_x rho0 - y d_y rho0) and (hdot/2)(x m v0_x - y m v0_y).
SourceTerms source_terms_gauge(const BackgroundFlow& bg, double hdot);

struct LinearOptions {
  bool quantum_pressure = false;
  /// Points with rho0 at or below this fraction of max rho0 are treated as
  /// vacuum: no background flow and no phase dynamics there. The density
  /// equation stays conservative.
  double density_floor = 1e-2;
};

/// Precomputed right-hand side of the linearised system around `bg`.
class LinearOperator {
 public:
  LinearOperator(BackgroundFlow bg, LinearOptions options = {});

  const BackgroundFlow& background() const { return bg_; }
  const LinearOptions& options() const { return options_; }
  /// False at vacuum points (see LinearOptions::density_floor).
  bool active(std::size_t i) const { return active_[i] != 0; }

  /// (d_t drho, d_t dS) without sources.
  std::pair<RealField, RealField> rhs(const RealField& drho, const RealField& dS) const;
  /// QP[drho] (zero fields when the option is off).
  RealField quantum_pressure(const RealField& drho) const;

  /// Largest |v0| / c_s over active points. Above 1 the
  /// dispersionless system has growing modes; quantum pressure removes them.
  double max_mach() const { return max_mach_; }

  /// dx / max(c_s + |v0|).
  double cfl_limit() const;
  /// Largest stable RK4 step from the highest resolved mode frequency.
  double spectral_limit() const;
  /// Throws unless dt is below both limits.
  void check_time_step(double dt) const;

  /// Quadratic energy of a perturbation:
  /// int rho0|grad dS|^2/2m + g drho^2/2 + drho v0.grad dS (+ quantum pressure).
  double energy(const Perturbation& p) const;

 private:
  BackgroundFlow bg_;
  LinearOptions options_;
  RealField sqrt_rho_;
  RealField lap_sqrt_rho_;
  std::vector<std::uint8_t> active_;
  double max_speed_ = 0.0;
  double max_mach_ = 0.0;
};

/// One RK4 step with constant sources (`sources` may be null).
Perturbation step_linear(const Perturbation& p, const LinearOperator& op, const SourceTerms* sources,
                         double dt);
/// One RK4 step with `unit_sources` evaluated at unit amplitude and scaled by
/// h(t) (metric form) or hdot(t) (gauge form) at every stage.
Perturbation step_linear(const Perturbation& p, const LinearOperator& op,
                         const SourceTerms& unit_sources, const StrainWaveform& waveform, double dt);

struct ModeShell {
  double k = 0.0;
  double energy = 0.0;
  double number = 0.0;
};

struct PhononContent {
  double n_est = 0.0;
  double energy = 0.0;
  std::vector<ModeShell> spectrum;
  /// True when the background is not homogeneous and the estimate uses the
  /// plane-wave basis of the mean density.
  bool homogeneous_reference = false;
};

/// Phonon number sum_k E_k / (hbar omega_k) in the plane-wave Bogoliubov
/// basis of the (mean) background density. Shells of width 2 pi / L_x.
PhononContent phonon_content(const Perturbation& p, const BackgroundFlow& bg);

/// Bogoliubov frequency sqrt(c^2 k^2 + (hbar k^2 / 2m)^2).
double bogoliubov_frequency(double k, double cs2, double hbar, double mass);

/// Density and phase differences of a strained run against a reference run:
/// drho = |a|^2 - |b|^2, dS = hbar arg(a conj(b)).
Perturbation difference(const CondensateState& a, const CondensateState& b);

}  // namespace gwbec
