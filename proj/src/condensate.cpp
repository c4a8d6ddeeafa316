#include "gwbec/condensate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gwbec/error.hpp"
#include "gwbec/random.hpp"

namespace gwbec {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap(double a) { return a - two_pi * std::round(a / two_pi); }

// Flat index of the neighbour that seeds the unwrap of `i`: the previous
// point along the last axis, or along an earlier axis at the start of a line.
std::ptrdiff_t unwrap_reference(const Grid& g, std::size_t i) {
  for (int a = g.dim() - 1; a >= 0; --a) {
    if (g.axis_index(i, a) > 0) return static_cast<std::ptrdiff_t>(i - g.stride(a));
  }
  return -1;
}

// Minimum-image separation along `axis`.
double min_image(double d, double L) { return d - L * std::round(d / L); }

}  // namespace

double CondensateState::norm() const {
  double s = 0.0;
  for (const auto& z : psi.values()) s += std::norm(z);
  return s * grid()->cell_volume();
}

HydroFields madelung_decompose(const CondensateState& state) {
  const auto& g = *state.grid();
  const double hbar = state.hbar();
  HydroFields out;
  out.rho = RealField(state.grid());
  out.S = RealField(state.grid());
  double rho_max = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    out.rho[i] = std::norm(state.psi[i]);
    rho_max = std::max(rho_max, out.rho[i]);
  }
  out.rho_floor = rho_floor_fraction * rho_max;
  out.valid.assign(g.size(), 1);

  std::vector<double> phase(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double raw = std::arg(state.psi[i]);
    const auto ref = unwrap_reference(g, i);
    phase[i] = ref < 0 ? raw : phase[ref] + wrap(raw - phase[ref]);
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (out.rho[i] <= out.rho_floor) {
      out.valid[i] = 0;
      ++out.invalid_count;
      out.S[i] = 0.0;
    } else {
      out.S[i] = hbar * phase[i];
    }
  }
  for (int a = 0; a < g.dim(); ++a) out.v.push_back(velocity(state.psi, a, hbar, state.mass()));
  return out;
}

ComplexField madelung_compose(const HydroFields& hydro, double hbar) {
  ComplexField psi(hydro.rho.grid());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double amp = std::sqrt(std::max(0.0, hydro.rho[i]));
    psi[i] = hydro.valid[i] ? std::polar(amp, hydro.S[i] / hbar) : complex(amp, 0.0);
  }
  return psi;
}

RealField current(const ComplexField& psi, int axis, double hbar, double mass) {
  const auto d = spectral::gradient(psi, axis);
  RealField j(psi.grid());
  for (std::size_t i = 0; i < j.size(); ++i) j[i] = (hbar / mass) * std::imag(std::conj(psi[i]) * d[i]);
  return j;
}

RealField velocity(const ComplexField& psi, int axis, double hbar, double mass) {
  auto j = current(psi, axis, hbar, mass);
  double rho_max = 0.0;
  for (const auto& z : psi.values()) rho_max = std::max(rho_max, std::norm(z));
  const double floor = rho_floor_fraction * rho_max;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const double rho = std::norm(psi[i]);
    j[i] = rho > floor ? j[i] / rho : 0.0;
  }
  return j;
}

double angular_momentum(const ComplexField& psi, double hbar) {
  const auto& g = *psi.grid();
  if (g.dim() < 2) return 0.0;
  const auto dx = spectral::gradient(psi, 0);
  const auto dy = spectral::gradient(psi, 1);
  const auto& x = g.coordinates(0);
  const auto& y = g.coordinates(1);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    s += std::imag(std::conj(psi[i]) * (x[i] * dy[i] - y[i] * dx[i]));
  }
  return hbar * s * g.cell_volume();
}

Observables observables(const CondensateState& state, const RealField* potential) {
  const auto& g = *state.grid();
  if (potential) check_same_grid(g, *potential->grid());
  const double hbar = state.hbar();
  const double m = state.mass();
  Observables o;

  std::vector<complex> hat(state.psi.data());
  g.forward(hat);
  const double n_total = static_cast<double>(g.size());
  const double spectral_weight = g.volume() / (n_total * n_total);
  double kin = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = std::norm(hat[i]);
    double k2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) k2 += g.k_squared(a)[i];
    kin += k2 * w;
    if (g.dim() >= 2) quad += (g.k_squared(0)[i] - g.k_squared(1)[i]) * w;
    else quad += g.k_squared(0)[i] * w;
  }
  const double pref = hbar * hbar / (2.0 * m) * spectral_weight;
  o.E_kin = pref * kin;
  o.Q = pref * quad;

  double n = 0.0, quartic = 0.0, pot = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double rho = std::norm(state.psi[i]);
    n += rho;
    quartic += rho * rho;
    if (potential) pot += (*potential)[i] * rho;
  }
  const double dv = g.cell_volume();
  o.N = n * dv;
  o.E_int = 0.5 * state.g * quartic * dv;
  o.E_pot = pot * dv;
  o.E_total = o.E_kin + o.E_int + o.E_pot;
  o.Lz = angular_momentum(state.psi, hbar);
  return o;
}

double quadrupole_hydrodynamic(const HydroFields& hydro, double hbar, double mass) {
  const auto& g = *hydro.rho.grid();
  require(g.dim() >= 2, "hydrodynamic quadrupole needs at least two axes");
  const auto drx = spectral::gradient(hydro.rho, 0);
  const auto dry = spectral::gradient(hydro.rho, 1);
  double pressure = 0.0, flow = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!hydro.valid[i]) continue;
    const double rho = hydro.rho[i];
    pressure += (drx[i] * drx[i] - dry[i] * dry[i]) / rho;
    flow += rho * (hydro.v[0][i] * hydro.v[0][i] - hydro.v[1][i] * hydro.v[1][i]);
  }
  return (hbar * hbar / (8.0 * mass) * pressure + 0.5 * mass * flow) * g.cell_volume();
}

void check_observables(const Observables& o) {
  const double scale = std::max({std::abs(o.E_kin), std::abs(o.E_total), std::abs(o.E_int)});
  const double slack = 1e-12 * scale + 1e-300;
  if (!std::isfinite(o.E_total) || !std::isfinite(o.Q) || !std::isfinite(o.N)) {
    fail(ErrorKind::invariant, "non-finite observables");
  }
  if (o.E_kin < -slack || o.E_int < -slack) fail(ErrorKind::invariant, "negative energy component");
  if (std::abs(o.Q) > o.E_kin + slack) fail(ErrorKind::invariant, "|Q| exceeds E_kin");
  if (o.E_kin > o.E_total + slack) fail(ErrorKind::invariant, "E_kin exceeds E_total");
}

CondensateState prepare_homogeneous(GridPtr grid, double rho0, double g, const UnitSystem& units) {
  require(rho0 > 0.0, "rho0 must be positive");
  require(g >= 0.0, "coupling g must be non-negative");
  CondensateState s;
  s.psi = ComplexField(std::move(grid), complex(std::sqrt(rho0), 0.0));
  s.units = units;
  s.g = g;
  return s;
}

CondensateState prepare_plane_flow(GridPtr grid, double rho0, double g, const UnitSystem& units,
                                   const std::vector<int>& mode) {
  auto s = prepare_homogeneous(grid, rho0, g, units);
  const auto& gr = *s.grid();
  require(mode.size() <= static_cast<std::size_t>(gr.dim()), "flow mode has more axes than the grid");
  for (std::size_t i = 0; i < gr.size(); ++i) {
    double phase = 0.0;
    for (std::size_t a = 0; a < mode.size(); ++a) {
      const int ax = static_cast<int>(a);
      phase += two_pi * mode[a] / gr.extent(ax) * (gr.coordinates(ax)[i] + 0.5 * gr.extent(ax));
    }
    s.psi[i] *= std::polar(1.0, phase);
  }
  return s;
}

CondensateState seed_perturbation(const CondensateState& state, double amplitude, std::uint64_t seed,
                                  int max_mode) {
  require(amplitude >= 0.0, "perturbation amplitude must be non-negative");
  require(max_mode >= 1, "perturbation needs max_mode >= 1");
  const auto& g = *state.grid();
  const double n0 = state.norm();
  std::vector<complex> hat(state.psi.data());
  g.forward(hat);
  // zero mode amplitude sets the scale
  const double scale = amplitude * std::abs(hat[0]);
  const CounterRng rng(seed, 0x70657274);
  for (std::size_t i = 0; i < g.size(); ++i) {
    int reach = 0;
    for (int a = 0; a < g.dim(); ++a) {
      const auto n = static_cast<long>(g.axis_index(i, a));
      const long p = static_cast<long>(g.points(a));
      reach = std::max(reach, static_cast<int>(std::min(n, p - n)));
    }
    if (reach == 0 || reach > max_mode) continue;
    hat[i] += scale * complex(rng.normal(2 * i), rng.normal(2 * i + 1)) / std::sqrt(2.0);
  }
  g.backward(hat);
  CondensateState s = state;
  s.psi = ComplexField(state.grid(), std::move(hat));
  const double n1 = s.norm();
  if (n1 > 0.0) s.psi *= complex(std::sqrt(n0 / n1));
  return s;
}

double healing_length(double rho0, double g, double hbar, double mass) {
  require(rho0 > 0.0 && g > 0.0, "healing length needs rho0 > 0 and g > 0");
  return hbar / std::sqrt(2.0 * mass * g * rho0);
}

CondensateState imprint_vortices(const CondensateState& state,
                                 const std::vector<VortexSpec>& vortices) {
  const auto& g = *state.grid();
  require(g.dim() >= 2, "vortices need at least two axes");
  const double Lx = g.extent(0);
  const double Ly = g.extent(1);
  for (const auto& v : vortices) {
    require(v.charge != 0, "vortex charge must be non-zero");
    require(std::abs(v.x) <= Lx / 2 && std::abs(v.y) <= Ly / 2, "vortex position outside the domain");
  }
  double rho_mean = 0.0;
  for (const auto& z : state.psi.values()) rho_mean += std::norm(z);
  rho_mean /= static_cast<double>(g.size());
  const double xi = state.g > 0.0 && rho_mean > 0.0
                        ? healing_length(rho_mean, state.g, state.hbar(), state.mass())
                        : g.spacing(0);

  // Images along y: rows beyond |n| = M contribute below 1e-12 to the phase.
  constexpr int M = 6;
  double ramp = 0.0;
  for (const auto& v : vortices) ramp += two_pi * v.charge * v.x / Lx;

  auto out = state;
  const auto& xs = g.coordinates(0);
  const auto& ys = g.coordinates(1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double phase = -ramp * ys[i] / Ly;
    double amp = 1.0;
    for (const auto& v : vortices) {
      for (int n = -M; n <= M; ++n) {
        const complex w(xs[i] - v.x, ys[i] - v.y - n * Ly);
        phase += v.charge * std::arg(std::sin(std::numbers::pi * w / Lx));
      }
      const double dx = min_image(xs[i] - v.x, Lx);
      const double dy = min_image(ys[i] - v.y, Ly);
      const double r2 = dx * dx + dy * dy;
      amp *= std::pow(r2 / (r2 + 2.0 * xi * xi), 0.5 * std::abs(v.charge));
    }
    out.psi[i] *= std::polar(amp, phase);
  }
  return out;
}

CondensateState imprint_vortex(const CondensateState& state, double x, double y, double charge) {
  require(std::isfinite(charge) && charge == std::round(charge), "vortex charge must be an integer");
  return imprint_vortices(state, {{x, y, static_cast<int>(charge)}});
}

std::vector<VortexSpec> vortex_pair_layout(const Grid& grid) {
  require(grid.dim() >= 2, "vortex pair needs at least two axes");
  const double L = grid.extent(0);
  const double hx = 0.5 * grid.spacing(0);
  const double hy = 0.5 * grid.spacing(1);
  return {{-0.25 * L + hx, hy, 1}, {0.25 * L + hx, hy, -1}};
}

std::vector<VortexSite> find_vortices(const ComplexField& psi, double density_fraction,
                                      double smoothing) {
  const auto& g = *psi.grid();
  require(g.dim() >= 2, "vortex census needs at least two axes");
  const std::size_t nx = g.points(0);
  const std::size_t ny = g.points(1);
  const std::size_t z0 = g.dim() == 3 ? (g.points(2) / 2) * g.stride(2) : 0;

  std::vector<complex> rho(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) rho[i] = std::norm(psi[i]);
  if (density_fraction > 0.0 && smoothing > 0.0) {
    g.forward(rho);
    for (std::size_t i = 0; i < g.size(); ++i) {
      double k2 = 0.0;
      for (int a = 0; a < g.dim(); ++a) k2 += g.k_squared(a)[i];
      rho[i] *= std::exp(-0.5 * k2 * smoothing * smoothing);
    }
    g.backward(rho);
  }
  double rho_max = 0.0;
  for (const auto& r : rho) rho_max = std::max(rho_max, r.real());
  const double cut = density_fraction * rho_max;
  auto dens = [&](std::size_t i, std::size_t j) {
    return rho[z0 + (i % nx) * g.stride(0) + (j % ny) * g.stride(1)].real();
  };

  auto at = [&](std::size_t i, std::size_t j) -> const complex& {
    return psi[z0 + (i % nx) * g.stride(0) + (j % ny) * g.stride(1)];
  };
  std::vector<VortexSite> sites;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const complex c[4] = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
      if (density_fraction > 0.0) {
        const double mean =
            0.25 * (dens(i, j) + dens(i + 1, j) + dens(i + 1, j + 1) + dens(i, j + 1));
        if (mean < cut) continue;
      }
      double circ = 0.0;
      for (int k = 0; k < 4; ++k) circ += wrap(std::arg(c[(k + 1) % 4]) - std::arg(c[k]));
      const int w = static_cast<int>(std::lround(circ / two_pi));
      if (w == 0) continue;
      sites.push_back({g.coordinate(0, i) + 0.5 * g.spacing(0), g.coordinate(1, j) + 0.5 * g.spacing(1), w});
    }
  }
  return sites;
}

int net_winding(const std::vector<VortexSite>& sites) {
  int s = 0;
  for (const auto& v : sites) s += v.winding;
  return s;
}

RealField harmonic_potential(const GridPtr& grid, double mass, double omega) {
  RealField V(grid);
  const auto& g = *grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double r2 = 0.0;
    for (int a = 0; a < std::min(2, g.dim()); ++a) r2 += g.coordinates(a)[i] * g.coordinates(a)[i];
    V[i] = 0.5 * mass * omega * omega * r2;
  }
  return V;
}

double cloud_radius(const ComplexField& psi) {
  const auto& g = *psi.grid();
  double n = 0.0, r2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double rho = std::norm(psi[i]);
    double rr = 0.0;
    for (int a = 0; a < std::min(2, g.dim()); ++a) rr += g.coordinates(a)[i] * g.coordinates(a)[i];
    n += rho;
    r2 += rho * rr;
  }
  return n > 0.0 ? std::sqrt(3.0 * r2 / n) : 0.0;
}

double feynman_vortex_count(double Omega, double radius, double hbar, double mass) {
  return mass * std::abs(Omega) * radius * radius / hbar;
}

}  // namespace gwbec
