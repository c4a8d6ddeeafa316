#include "gwbec/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gwbec {

namespace {

void kinetic_half(ComplexField& psi, double dt, double h, double hbar, double mass) {
  const auto& g = *psi.grid();
  g.forward(psi.values());
  const double c = -0.5 * dt * hbar / (2.0 * mass);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double k2 = (1.0 + h) * g.k_squared(0)[i];
    if (g.dim() >= 2) k2 += (1.0 - h) * g.k_squared(1)[i];
    if (g.dim() >= 3) k2 += g.k_squared(2)[i];
    psi[i] *= std::polar(1.0, c * k2);
  }
  g.backward(psi.values());
}

void nonlinear(ComplexField& psi, double dt, double coupling, double hbar, const RealField* V) {
  const double c = -dt / hbar;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    double e = coupling * std::norm(psi[i]);
    if (V) e += (*V)[i];
    psi[i] *= std::polar(1.0, c * e);
  }
}

CondensateState strang(const CondensateState& s, double dt, double h, const RealField* V) {
  if (V) check_same_grid(*s.grid(), *V->grid());
  require(std::abs(h) < 1.0, "strain must satisfy |h| < 1");
  CondensateState out = s;
  kinetic_half(out.psi, dt, h, s.hbar(), s.mass());
  nonlinear(out.psi, dt, s.g, s.hbar(), V);
  kinetic_half(out.psi, dt, h, s.hbar(), s.mass());
  out.t = s.t + dt;
  return out;
}

// Evaluates the band-limited interpolant of each line along `axis` at the
// scaled points s * x_i.
void rescale_axis(std::vector<complex>& data, const Grid& g, int axis, double s) {
  const std::size_t n = g.points(axis);
  const double L = g.extent(axis);
  const auto& k = g.wavenumbers(axis);
  std::vector<complex> E(n * n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double arg = s * g.coordinate(axis, i) + 0.5 * L;
    for (std::size_t m = 0; m < n; ++m) {
      E[i * n + m] = g.is_nyquist(axis, m) ? complex(std::cos(k[m] * arg) * inv_n, 0.0)
                                           : std::polar(inv_n, k[m] * arg);
    }
  }
  g.forward_axis(data, axis);
  const std::size_t stride = g.stride(axis);
  std::vector<complex> line(n);
  for (std::size_t base = 0; base < g.size(); ++base) {
    if (g.axis_index(base, axis) != 0) continue;
    for (std::size_t m = 0; m < n; ++m) line[m] = data[base + m * stride];
    for (std::size_t i = 0; i < n; ++i) {
      complex acc = 0.0;
      const complex* row = &E[i * n];
      for (std::size_t m = 0; m < n; ++m) acc += row[m] * line[m];
      data[base + i * stride] = acc;
    }
  }
}

double relative_change(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

// One normalised step of the stabilised gradient flow; returns E - Omega Lz
// of the input state.
class ImaginaryStepper {
 public:
  ImaginaryStepper(const CondensateState& s, double tau, double Omega, const RealField* V)
      : grid_(s.grid()), tau_(tau), Omega_(Omega), V_(V), target_(s.norm()) {
    if (V_) check_same_grid(*grid_, *V_->grid());
    require(target_ > 0.0, "imaginary-time relaxation needs a non-zero state");
  }

  double step(CondensateState& s) {
    const auto& g = *grid_;
    const double hbar = s.hbar();
    const double m = s.mass();
    const double dv = g.cell_volume();
    const double n_total = static_cast<double>(g.size());

    std::vector<complex> hat(s.psi.data());
    g.forward(hat);

    std::vector<double> b(g.size());
    double bmin = INFINITY, bmax = -INFINITY;
    for (std::size_t i = 0; i < g.size(); ++i) {
      b[i] = s.g * std::norm(s.psi[i]) + (V_ ? (*V_)[i] : 0.0);
      bmin = std::min(bmin, b[i]);
      bmax = std::max(bmax, b[i]);
    }
    const double alpha = 0.5 * (bmin + bmax);

    std::vector<complex> lz(g.size(), 0.0);
    if (Omega_ != 0.0 && g.dim() >= 2) {
      std::vector<complex> dx(hat), dy(hat);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double kx = g.wavenumbers(0)[g.axis_index(i, 0)];
        const double ky = g.wavenumbers(1)[g.axis_index(i, 1)];
        dx[i] *= complex(0.0, g.is_nyquist(0, g.axis_index(i, 0)) ? 0.0 : kx);
        dy[i] *= complex(0.0, g.is_nyquist(1, g.axis_index(i, 1)) ? 0.0 : ky);
      }
      g.backward(dx);
      g.backward(dy);
      const auto& x = g.coordinates(0);
      const auto& y = g.coordinates(1);
      for (std::size_t i = 0; i < g.size(); ++i) {
        lz[i] = complex(0.0, -hbar) * (x[i] * dy[i] - y[i] * dx[i]);
      }
    }

    double kin = 0.0;
    std::vector<double> K(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      double k2 = 0.0;
      for (int a = 0; a < g.dim(); ++a) k2 += g.k_squared(a)[i];
      K[i] = hbar * hbar * k2 / (2.0 * m);
      kin += K[i] * std::norm(hat[i]);
    }
    kin *= g.volume() / (n_total * n_total);
    double inter = 0.0, pot = 0.0, lzs = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double rho = std::norm(s.psi[i]);
      inter += 0.5 * s.g * rho * rho;
      if (V_) pot += (*V_)[i] * rho;
      lzs += std::real(std::conj(s.psi[i]) * lz[i]);
    }
    inter *= dv;
    pot *= dv;
    lzs *= dv;
    const double energy = kin + inter + pot - Omega_ * lzs;
    const double mu = (kin + 2.0 * inter + pot - Omega_ * lzs) / target_;

    std::vector<complex> rhs(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      rhs[i] = (alpha - b[i] + mu) * s.psi[i] + Omega_ * lz[i];
    }
    g.forward(rhs);
    for (std::size_t i = 0; i < g.size(); ++i) {
      hat[i] = (hat[i] + tau_ * rhs[i]) / (1.0 + tau_ * (alpha + K[i]));
    }
    g.backward(hat);
    s.psi.data() = std::move(hat);
    const double scale = std::sqrt(target_ / s.norm());
    s.psi *= complex(scale, 0.0);
    return energy;
  }

 private:
  GridPtr grid_;
  double tau_;
  double Omega_;
  const RealField* V_;
  double target_;
};

double auto_tau(const CondensateState& s, const RealField* V) {
  double bmax = 0.0;
  for (std::size_t i = 0; i < s.psi.size(); ++i) {
    bmax = std::max(bmax, s.g * std::norm(s.psi[i]) + (V ? (*V)[i] : 0.0));
  }
  const auto& g = *s.grid();
  const double dx = std::min({g.spacing(0), g.dim() > 1 ? g.spacing(1) : INFINITY,
                              g.dim() > 2 ? g.spacing(2) : INFINITY});
  const double kin = s.hbar() * s.hbar() / (2.0 * s.mass() * dx * dx);
  return 1.0 / std::max(bmax, 1e-3 * kin);
}

std::string step_message(const char* what, std::size_t step, double t) {
  std::ostringstream os;
  os << what << " at step " << step << " (t = " << t << ")";
  return os.str();
}

// The rescale is only exact for fields that vanish at the x and y faces of the
// box; a periodic background would be torn at the boundary.
void require_edge_free(const ComplexField& psi) {
  const auto& g = *psi.grid();
  double peak = 0.0, edge = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = std::norm(psi[i]);
    peak = std::max(peak, r);
    if (g.axis_index(i, 0) == 0 || g.axis_index(i, 1) == 0) edge = std::max(edge, r);
  }
  if (edge > gauge_edge_tolerance * peak) {
    std::ostringstream os;
    os << "gauge scheme needs a field that vanishes at the x/y faces (edge density " << edge / peak
       << " of peak, limit " << gauge_edge_tolerance << ")";
    fail(ErrorKind::invalid_argument, os.str());
  }
}

}  // namespace

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::flat: return "flat";
    case Scheme::metric: return "metric";
    case Scheme::gauge: return "gauge";
    case Scheme::imaginary_time: return "imaginary_time";
  }
  return "flat";
}

Scheme scheme_from_string(std::string_view name) {
  if (name == "flat") return Scheme::flat;
  if (name == "metric") return Scheme::metric;
  if (name == "gauge") return Scheme::gauge;
  if (name == "imaginary_time") return Scheme::imaginary_time;
  fail(ErrorKind::invalid_argument, "unknown scheme '" + std::string(name) + "'");
}

double default_time_step(const Grid& grid, double hbar, double mass) {
  double dx = grid.spacing(0);
  for (int a = 1; a < grid.dim(); ++a) dx = std::min(dx, grid.spacing(a));
  return 0.1 * 2.0 * mass * dx * dx / (hbar * std::numbers::pi * std::numbers::pi);
}

CondensateState step_flat(const CondensateState& state, double dt, const RealField* potential) {
  return strang(state, dt, 0.0, potential);
}

CondensateState step_metric(const CondensateState& state, double dt, const StrainWaveform& waveform,
                            const RealField* potential) {
  return strang(state, dt, waveform.h(state.t + 0.5 * dt), potential);
}

CondensateState step_gauge(const CondensateState& state, double dt, const StrainWaveform& waveform,
                           const RealField* potential) {
  const double h0 = waveform.h(state.t);
  const double hm = waveform.h(state.t + 0.5 * dt);
  const double h1 = waveform.h(state.t + dt);
  CondensateState s = state;
  s.psi = rescale_xy(s.psi, 0.5 * (hm - h0));
  s = strang(s, dt, 0.0, potential);
  s.psi = rescale_xy(s.psi, 0.5 * (h1 - hm));
  return s;
}

ComplexField rescale_xy(const ComplexField& f, double eps) {
  if (eps == 0.0) return f;
  const auto& g = *f.grid();
  require(g.dim() >= 2, "rescale needs x and y axes");
  std::vector<complex> data(f.data());
  rescale_axis(data, g, 0, std::exp(eps));
  rescale_axis(data, g, 1, std::exp(-eps));
  return ComplexField(f.grid(), std::move(data));
}

RelaxResult relax_imaginary_time(const CondensateState& state, const RelaxOptions& options) {
  require(options.max_steps >= 1, "relaxation needs at least one step");
  require(options.tolerance > 0.0, "relaxation tolerance must be positive");
  const double tau = options.tau > 0.0 ? options.tau : auto_tau(state, options.potential);
  ImaginaryStepper stepper(state, tau, options.Omega, options.potential);
  RelaxResult r;
  r.state = state;
  std::vector<complex> phase;
  if (options.pin_phase) {
    for (const auto& z : state.psi.values()) phase.push_back(z == 0.0 ? complex(1.0) : z / std::abs(z));
  }
  double prev = NAN;
  for (std::size_t k = 0; k < options.max_steps; ++k) {
    const double e = stepper.step(r.state);
    if (options.pin_phase) {
      for (std::size_t i = 0; i < phase.size(); ++i) r.state.psi[i] = std::abs(r.state.psi[i]) * phase[i];
    }
    if (!all_finite(r.state.psi)) {
      fail(ErrorKind::numerical, step_message("imaginary-time relaxation diverged", k, r.state.t));
    }
    r.steps = k + 1;
    if (!std::isnan(prev)) {
      if (e > prev + 1e-12 * std::abs(prev)) r.monotone = false;
      r.residual = relative_change(e, prev);
      if (r.residual < options.tolerance) {
        r.converged = true;
        r.energy = e;
        break;
      }
    }
    prev = e;
    r.energy = e;
  }
  return r;
}

void validate(const EvolutionConfig& c, double t0) {
  require(c.dt > 0.0 && std::isfinite(c.dt), "dt must be positive");
  require(c.n_steps >= 1, "n_steps must be at least 1");
  if (c.scheme == Scheme::metric || c.scheme == Scheme::gauge) {
    require(c.waveform.has_value(), std::string(to_string(c.scheme)) + " scheme needs a waveform");
    const double t_end = t0 + static_cast<double>(c.n_steps) * c.dt;
    if (t0 < 0.0 || t_end > c.waveform->duration() * (1.0 + 1e-12) + 1e-12) {
      std::ostringstream os;
      os << "waveform duration " << c.waveform->duration() << " does not cover evolution span ["
         << t0 << ", " << t_end << "]";
      fail(ErrorKind::invalid_argument, os.str());
    }
  }
}

Trajectory evolve(const CondensateState& state, const EvolutionConfig& c) {
  validate(c, state.t);
  const RealField* V = c.potential ? &*c.potential : nullptr;
  Trajectory tr;
  tr.scheme = c.scheme;
  tr.waveform_tag = c.waveform ? c.waveform->describe() : "none";

  auto record = [&](const CondensateState& lab) {
    tr.times.push_back(lab.t);
    auto obs = observables(lab, V);
    if (c.check_invariants) check_observables(obs);
    tr.series.push_back(obs);
    tr.strain.push_back(c.waveform ? c.waveform->sample(lab.t) : StrainSample{});
  };

  if (c.scheme == Scheme::gauge) require_edge_free(state.psi);
  const double t0 = state.t;
  CondensateState cur = state;
  if (c.scheme == Scheme::gauge) cur.psi = metric_to_gauge(state.psi, c.waveform->h(t0));
  CondensateState lab = state;
  record(lab);
  tr.snapshots.push_back(lab);

  std::optional<ImaginaryStepper> imag;
  if (c.scheme == Scheme::imaginary_time) imag.emplace(state, c.dt, c.Omega, V);

  const double norm_tol = c.scheme == Scheme::gauge ? 1e-10 : 1e-12;
  double n_prev = state.norm();
  for (std::size_t k = 1; k <= c.n_steps; ++k) {
    CondensateState next;
    try {
      switch (c.scheme) {
        case Scheme::flat: next = step_flat(cur, c.dt, V); break;
        case Scheme::metric: next = step_metric(cur, c.dt, *c.waveform, V); break;
        case Scheme::gauge: next = step_gauge(cur, c.dt, *c.waveform, V); break;
        case Scheme::imaginary_time:
          next = cur;
          imag->step(next);
          break;
      }
    } catch (const StepError&) {
      throw;
    } catch (const Error& e) {
      throw StepError(e.kind(), step_message(e.what(), k, cur.t), k, lab);
    }
    next.t = t0 + static_cast<double>(k) * c.dt;
    if (!all_finite(next.psi)) {
      throw StepError(ErrorKind::numerical, step_message("non-finite amplitude", k, next.t), k, lab);
    }
    CondensateState next_lab = next;
    if (c.scheme == Scheme::gauge) next_lab.psi = gauge_to_metric(next.psi, c.waveform->h(next.t));
    if (c.check_invariants && c.scheme != Scheme::imaginary_time) {
      const double n = next.norm();
      if (relative_change(n, n_prev) > norm_tol) {
        throw StepError(ErrorKind::invariant, step_message("norm not conserved", k, next.t), k, lab);
      }
      n_prev = n;
    }
    try {
      record(next_lab);
    } catch (const Error& e) {
      throw StepError(e.kind(), step_message(e.what(), k, next.t), k, lab);
    }
    if (c.snapshot_stride > 0 && k % c.snapshot_stride == 0) tr.snapshots.push_back(next_lab);
    cur = std::move(next);
    lab = std::move(next_lab);
  }
  tr.final_state = lab;
  return tr;
}

double excess_perturbation_energy(const CondensateState& a, const CondensateState& b) {
  check_same_grid(*a.grid(), *b.grid());
  const auto& g = *a.grid();
  std::vector<complex> d(g.size());
  double quartic = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    d[i] = a.psi[i] - b.psi[i];
    const double dr = std::norm(a.psi[i]) - std::norm(b.psi[i]);
    quartic += dr * dr;
  }
  g.forward(d);
  double kin = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double k2 = 0.0;
    for (int ax = 0; ax < g.dim(); ++ax) k2 += g.k_squared(ax)[i];
    kin += k2 * std::norm(d[i]);
  }
  const double n_total = static_cast<double>(g.size());
  kin *= a.hbar() * a.hbar() / (2.0 * a.mass()) * g.volume() / (n_total * n_total);
  return kin + 0.5 * a.g * quartic * g.cell_volume();
}

bool all_finite(const ComplexField& f) {
  for (const auto& z : f.values()) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

}  // namespace gwbec
