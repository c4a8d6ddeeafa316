#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gwbec/grid.hpp"
#include "gwbec/units.hpp"

namespace gwbec {

/// Condensate amplitude on a periodic grid. `g` is the contact coupling in
/// simulation units (energy * volume); g >= 0.
struct CondensateState {
  ComplexField psi;
  double t = 0.0;
  UnitSystem units;
  double g = 0.0;

  const GridPtr& grid() const { return psi.grid(); }
  double hbar() const { return units.hbar(); }
  double mass() const { return units.mass(); }
  /// N = integral of |psi|^2.
  double norm() const;
};

/// Density/phase split. Points with rho <= rho_floor keep S = 0 and v = 0 and
/// are flagged in `valid`.
struct HydroFields {
  RealField rho;
  RealField S;
  std::vector<RealField> v;  // one per axis
  std::vector<std::uint8_t> valid;
  double rho_floor = 0.0;
  std::size_t invalid_count = 0;
};

struct Observables {
  double N = 0.0;
  double E_kin = 0.0;
  double E_int = 0.0;
  double E_pot = 0.0;
  double E_total = 0.0;
  double Q = 0.0;
  double Lz = 0.0;
};

/// Relative floor below which the phase is not reported.
inline constexpr double rho_floor_fraction = 1e-12;

HydroFields madelung_decompose(const CondensateState& state);
/// sqrt(rho) * exp(i S / hbar); flagged points come back as sqrt(rho).
ComplexField madelung_compose(const HydroFields& hydro, double hbar);

/// Velocity component (hbar/m) Im(psi* d_axis psi) / |psi|^2, zero below the
/// density floor.
RealField velocity(const ComplexField& psi, int axis, double hbar, double mass);
/// Current component (hbar/m) Im(psi* d_axis psi).
RealField current(const ComplexField& psi, int axis, double hbar, double mass);

/// Energies, quadrupole anisotropy and angular momentum. Gradient terms are
/// evaluated in wavenumber space. `potential` adds E_pot = integral V |psi|^2.
Observables observables(const CondensateState& state, const RealField* potential = nullptr);
/// -i hbar integral psi* (x d_y - y d_x) psi about the domain centre.
double angular_momentum(const ComplexField& psi, double hbar);
/// Q from density and velocity: (hbar^2/8m) int ((d_x rho)^2 - (d_y rho)^2)/rho
/// + (m/2) int rho (v_x^2 - v_y^2).
double quadrupole_hydrodynamic(const HydroFields& hydro, double hbar, double mass);
/// Throws `invariant` unless |Q| <= E_kin <= E_total (with rounding slack)
/// and E_kin, E_int >= 0.
void check_observables(const Observables& obs);

CondensateState prepare_homogeneous(GridPtr grid, double rho0, double g, const UnitSystem& units);
/// sqrt(rho0) exp(i k.r) with k_a = 2 pi n_a / L_a.
CondensateState prepare_plane_flow(GridPtr grid, double rho0, double g, const UnitSystem& units,
                                   const std::vector<int>& mode);

/// Adds complex normal noise of relative size `amplitude` to the Fourier
/// modes with 0 < max_a |n_a| <= max_mode, then restores N. Draws depend only
/// on (seed, flat index), so a rerun is bit-identical.
CondensateState seed_perturbation(const CondensateState& state, double amplitude, std::uint64_t seed,
                                  int max_mode = 2);

/// Healing length hbar / sqrt(2 m g rho0).
double healing_length(double rho0, double g, double hbar, double mass);

struct VortexSpec {
  double x = 0.0;
  double y = 0.0;
  int charge = 1;
};

/// Multiplies psi by the phase winding and a healing-length density dip for
/// each vortex. The phase uses periodic images along y and a compensating
/// linear ramp, so a neutral set stays single-valued on the torus. Charges
/// must be non-zero integers; with a non-neutral set the field is
/// discontinuous at the boundary and relaxation is expected to fix it.
CondensateState imprint_vortices(const CondensateState& state, const std::vector<VortexSpec>& vortices);
/// Single vortex; `charge` must be a non-zero integer value.
CondensateState imprint_vortex(const CondensateState& state, double x, double y, double charge);

/// Vortex/antivortex pair on the x axis at -L/4 and +L/4, shifted by half a
/// cell so cores avoid grid points. Imprinted on a homogeneous state.
std::vector<VortexSpec> vortex_pair_layout(const Grid& grid);

struct VortexSite {
  double x = 0.0;
  double y = 0.0;
  int winding = 0;
};

/// Plaquette winding census in the x-y plane (mid-plane for 3D). When
/// `density_fraction` > 0, plaquettes where the density smoothed with a
/// Gaussian of width `smoothing` is below that fraction of its maximum are
/// skipped.
std::vector<VortexSite> find_vortices(const ComplexField& psi, double density_fraction = 0.0,
                                      double smoothing = 0.0);
int net_winding(const std::vector<VortexSite>& sites);

/// Settings for vortex-lattice preparation in a harmonic trap.
struct LatticeOptions {
  double trap_omega = 0.0;  // 0 picks omega so that the cloud radius is ~L/3
  double noise = 0.05;
  std::uint64_t seed = 0;
  std::size_t max_steps = 6000;
  double tolerance = 1e-10;
  double tau = 0.0;  // imaginary time step, 0 = automatic
};

struct LatticeResult {
  CondensateState state;
  RealField potential;
  double trap_omega = 0.0;
  std::size_t steps = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<VortexSite> vortices;  // inside the cloud
  double cloud_radius = 0.0;         // sqrt(3 <r^2>)
  double disk_radius = 0.0;
  int disk_count = 0;  // vortices inside disk_radius
  double feynman_estimate = 0.0;     // for the same disk
};

/// Fraction of the cloud radius inside which vortices are compared with the
/// Feynman density; the outer shell is depleted at desk-scale rotation.
inline constexpr double feynman_disk_fraction = 0.7;

/// Rotating-frame imaginary-time relaxation from a noise-seeded Thomas-Fermi
/// start in V = m w^2 (x^2 + y^2)/2. `rho0` is the peak density of the
/// starting profile. Omega = 0 gives the vortex-free trapped ground state.
LatticeResult prepare_vortex_lattice(GridPtr grid, double Omega, double g, double rho0,
                                     const UnitSystem& units, const LatticeOptions& options = {});

/// Harmonic potential m w^2 (x^2 + y^2)/2 (z ignored).
RealField harmonic_potential(const GridPtr& grid, double mass, double omega);

/// sqrt(3 <r^2>) in the x-y plane; the Thomas-Fermi radius for a 2D
/// inverted-parabola profile.
double cloud_radius(const ComplexField& psi);
/// Feynman count m Omega r^2 / hbar for a disk of radius r: the uniform
/// vortex density m Omega / (pi hbar) times the disk area.
double feynman_vortex_count(double Omega, double radius, double hbar, double mass);

}  // namespace gwbec
