#pragma once

#include <string_view>

namespace gwbec {

namespace constants {
/// Reduced Planck constant, CODATA 2018 (exact in SI since 2019).
inline constexpr double hbar_eV_s = 6.582119569e-16;
inline constexpr double hbar_J_s = 1.054571817e-34;
inline constexpr double electron_volt_J = 1.602176634e-19;
inline constexpr double atomic_mass_kg = 1.66053906660e-27;
inline constexpr double rb87_mass_kg = 86.909180527 * atomic_mass_kg;
}  // namespace constants

/// Physical quantities that cross the simulation/SI boundary. SI side uses
/// metres, seconds, electron-volts, m/s and eV*s.
enum class QuantityKind { length, time, energy, velocity, action };

enum class Direction { si_to_sim, sim_to_si };

std::string_view to_string(QuantityKind kind);
QuantityKind quantity_kind_from_string(std::string_view name);

/// Scale factors between simulation units and SI (+ eV for energies).
///
/// The simulation side carries its own values of hbar and the atomic mass
/// (both 1 by default). The three SI scales are tied together by
/// `energy_scale * time_scale == hbar_SI / hbar` and
/// `energy_scale == mass_kg * length_scale^2 / time_scale^2` (in eV).
class UnitSystem {
 public:
  /// hbar = m = 1, one energy unit = 1 eV, one length unit = 1 m; the time
  /// scale follows from the action relation.
  UnitSystem() = default;

  /// Builds a unit system for an atom of mass `mass_kg` with one simulation
  /// length unit equal to `length_scale_m` metres.
  static UnitSystem for_atom(double mass_kg, double length_scale_m, double hbar_sim = 1.0,
                             double mass_sim = 1.0);

  /// Validating constructor from explicit scales. Throws if any scale is not
  /// strictly positive or the action consistency relation is off by more than
  /// 1e-9 relative.
  UnitSystem(double hbar_sim, double mass_sim, double length_scale_m, double time_scale_s,
             double energy_scale_eV);

  double hbar() const { return hbar_; }
  double mass() const { return mass_; }
  double length_scale() const { return length_scale_; }
  double time_scale() const { return time_scale_; }
  double energy_scale() const { return energy_scale_; }

  /// SI value of one simulation unit of `kind`.
  double scale(QuantityKind kind) const;

  double convert(double value, QuantityKind kind, Direction dir) const;

 private:
  double hbar_ = 1.0;
  double mass_ = 1.0;
  double length_scale_ = 1.0;
  double time_scale_ = constants::hbar_eV_s;
  double energy_scale_ = 1.0;
};

inline double convert(double value, QuantityKind kind, Direction dir, const UnitSystem& units) {
  return units.convert(value, kind, dir);
}

/// Kinetic energy of one atom of mass `mass_kg` moving at `speed_m_s`, in eV.
double kinetic_energy_per_atom_eV(double mass_kg, double speed_m_s);

}  // namespace gwbec
