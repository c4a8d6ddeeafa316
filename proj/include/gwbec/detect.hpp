#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gwbec/waveform.hpp"

namespace gwbec {

struct Trajectory;

/// Composite Simpson rule on uniformly spaced samples; an odd number of
/// intervals closes with the 3/8 rule, a single interval with the trapezoid.
double simpson(const std::vector<double>& f, double dx);

/// phi = -(1/hbar) integral h(t) Q(t) dt over uniformly spaced samples. Throws
/// `out_of_range` when the samples are not uniform or leave the waveform
/// domain.
double quadrupole_phase_shift(const std::vector<double>& times, const std::vector<double>& Q,
                              const StrainWaveform& waveform, double hbar);
double quadrupole_phase_shift(const Trajectory& reference, const StrainWaveform& waveform, double hbar);

struct FidelityCorrection {
  double deviation = 0.0;       // |1 - <psi|U|psi>| to first order, equal to |phi|
  double imaginary_part = 0.0;  // the correction is -i phi
  bool purely_imaginary = true;
  bool expansion_warning = false;  // |phi| > 0.3
};

FidelityCorrection fidelity_first_order(double phi);

/// T h_max E / hbar with T in seconds and E in eV.
double energy_bound(double T_s, double h_max, double E_eV);
/// T h_max N |dV/dh|_max / hbar with T in seconds and dV/dh in eV.
double trap_bound(double T_s, double h_max, double N, double dVdh_eV);
/// Same bounds with every quantity in one consistent unit system.
double energy_bound_sim(double T, double h_max, double E, double hbar);
double trap_bound_sim(double T, double h_max, double N, double dVdh, double hbar);

/// N m v^2 / 2 in eV.
double kinetic_energy_estimate(double N, double v_m_s, double mass_kg);

struct Hierarchy {
  double hN = 0.0;
  double h_sqrt_nN = 0.0;
  double hn = 0.0;
  double h = 0.0;
  bool strictly_decreasing = false;
  bool degenerate = false;  // n = 0
  bool boundary = false;    // n = N
};

Hierarchy hierarchy_estimates(double N, double n, double h);

struct NoonFidelity {
  double exact = 1.0;
  double linearized = 1.0;
};

/// (1 - eps)^N evaluated as exp(N log1p(-eps)), and 1 - N eps.
NoonFidelity noon_fidelity(double epsilon, double N);

/// Inputs and results of one detectability evaluation. Energies are in eV
/// and times in seconds unless noted.
struct DetectionReport {
  // inputs
  std::string waveform;
  double T_s = 0.0;
  double h_max = 0.0;
  double N = 0.0;
  double n = 0.0;
  std::string n_source = "user";
  double E_total_eV = 0.0;
  double E_kin_eV = 0.0;
  double dVdh_eV = 0.0;
  std::optional<double> noon_epsilon;
  // results
  std::optional<double> phi;
  FidelityCorrection fidelity;
  double bound_energy = 0.0;
  double bound_trap = 0.0;
  Hierarchy hierarchy;
  std::optional<NoonFidelity> noon;
  std::vector<std::string> notes;

  /// bound / |phi|; empty when phi is absent or zero.
  std::optional<double> margin_energy() const;
  std::optional<double> margin_trap() const;

  std::string to_json() const;
  static std::string csv_header();
  std::string csv_row(const std::string& scenario) const;
};

struct BoundsInput {
  double T_s = 0.0;
  double h_max = 0.0;
  double E_eV = 0.0;
  double N = 1.0;
  double dVdh_eV = 0.0;
  double n = 0.0;
};

/// Report without a trajectory: bounds, hierarchy and fidelity bookkeeping.
DetectionReport bounds_report(const BoundsInput& in);

/// Throws `invariant` if |phi| exceeds the energy bound (with 1e-9 relative
/// slack for quadrature and energy drift).
void check_phase_bound(const DetectionReport& report);

}  // namespace gwbec
