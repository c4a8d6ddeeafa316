#include <algorithm>
#include <cmath>

#include "gwbec/condensate.hpp"
#include "gwbec/dynamics.hpp"
#include "gwbec/random.hpp"

namespace gwbec {

LatticeResult prepare_vortex_lattice(GridPtr grid, double Omega, double g, double rho0,
                                     const UnitSystem& units, const LatticeOptions& options) {
  const auto& gr = *grid;
  require(gr.dim() == 2, "vortex lattice preparation is two-dimensional");
  require(rho0 > 0.0 && g > 0.0, "vortex lattice needs rho0 > 0 and g > 0");
  require(Omega >= 0.0, "rotation rate must be non-negative");
  const double m = units.mass();
  const double L = std::min(gr.extent(0), gr.extent(1));
  const double radius_guess = L / 3.0;
  const double omega = options.trap_omega > 0.0 ? options.trap_omega
                                                 : std::sqrt(2.0 * g * rho0 / m) / radius_guess;
  require(Omega < omega, "rotation rate must stay below the trap frequency");

  LatticeResult out;
  out.trap_omega = omega;
  out.potential = harmonic_potential(grid, m, omega);

  // Thomas-Fermi radius for peak density rho0.
  const double R2 = 2.0 * g * rho0 / (m * omega * omega);
  CounterRng rng(options.seed, 0x6c617474696365ULL);
  CondensateState s;
  s.psi = ComplexField(grid);
  s.units = units;
  s.g = g;
  for (std::size_t i = 0; i < gr.size(); ++i) {
    const double x = gr.coordinates(0)[i];
    const double y = gr.coordinates(1)[i];
    const double tf = std::sqrt(std::max(0.0, rho0 * (1.0 - (x * x + y * y) / R2)));
    const double amp = options.noise * std::sqrt(rho0);
    s.psi[i] = complex(tf + amp * rng.normal(2 * i), amp * rng.normal(2 * i + 1));
  }

  double vmax = 0.0;
  for (double v : out.potential.values()) vmax = std::max(vmax, v);
  RelaxOptions ro;
  ro.tau = options.tau > 0.0 ? options.tau : 3.0 / (g * rho0 + vmax);
  ro.max_steps = options.max_steps;
  ro.tolerance = options.tolerance;
  ro.Omega = Omega;
  ro.potential = &out.potential;
  auto r = relax_imaginary_time(s, ro);
  out.state = std::move(r.state);
  out.steps = r.steps;
  out.residual = r.residual;
  out.converged = r.converged;
  out.vortices = find_vortices(out.state.psi, 0.1, 4.0 * healing_length(rho0, g, units.hbar(), m));
  out.cloud_radius = cloud_radius(out.state.psi);
  out.disk_radius = feynman_disk_fraction * out.cloud_radius;
  for (const auto& v : out.vortices) {
    if (v.x * v.x + v.y * v.y < out.disk_radius * out.disk_radius) ++out.disk_count;
  }
  out.feynman_estimate = feynman_vortex_count(Omega, out.disk_radius, units.hbar(), m);
  return out;
}

}  // namespace gwbec
