#include "gwbec/phonon.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "gwbec/error.hpp"

namespace gwbec {

namespace {

RealField zeros_like(const GridPtr& g) { return RealField(g); }

// axpy on fields sharing a grid: y + a * x.
RealField axpy(const RealField& y, double a, const RealField& x) {
  RealField out = y;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * x[i];
  return out;
}

void check_finite(const RealField& f, const char* what) {
  for (double v : f.values()) {
    if (!std::isfinite(v)) fail(ErrorKind::numerical, std::string("non-finite values in ") + what);
  }
}

// psi* H psi with H = -hbar^2 lap/2m + g|psi|^2 + V.
std::vector<complex> local_energy(const CondensateState& s, const RealField* V) {
  const auto lap = spectral::laplacian(s.psi);
  std::vector<complex> e(s.psi.size());
  const double c = -s.hbar() * s.hbar() / (2.0 * s.mass());
  for (std::size_t i = 0; i < e.size(); ++i) {
    complex hpsi = c * lap[i] + s.g * std::norm(s.psi[i]) * s.psi[i];
    if (V) hpsi += (*V)[i] * s.psi[i];
    e[i] = std::conj(s.psi[i]) * hpsi;
  }
  return e;
}

}  // namespace

RealField BackgroundFlow::cs2() const {
  RealField c(rho0.grid());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = g * rho0[i] / mass;
  return c;
}

double BackgroundFlow::mean_density() const {
  double s = 0.0;
  for (double r : rho0.values()) s += r;
  return s / static_cast<double>(rho0.size());
}

bool BackgroundFlow::is_homogeneous() const {
  const auto [lo, hi] = std::minmax_element(rho0.values().begin(), rho0.values().end());
  if (*hi - *lo > 1e-12 * std::abs(*hi)) return false;
  for (const auto& v : v0) {
    for (double x : v.values()) {
      if (x != 0.0) return false;
    }
  }
  return true;
}

BackgroundFlow background_from(const CondensateState& state, const RealField* potential,
                               double tolerance) {
  auto hydro = madelung_decompose(state);
  BackgroundFlow bg;
  bg.rho0 = std::move(hydro.rho);
  bg.v0 = std::move(hydro.v);
  bg.S0 = std::move(hydro.S);
  bg.valid = std::move(hydro.valid);
  bg.g = state.g;
  bg.mass = state.mass();
  bg.hbar = state.hbar();

  const auto e = local_energy(state, potential);
  double rho_max = 0.0, n = 0.0;
  complex total = 0.0;
  double emax = 0.0, imag_max = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    rho_max = std::max(rho_max, bg.rho0[i]);
    n += bg.rho0[i];
    total += e[i];
    emax = std::max(emax, std::abs(e[i]));
    imag_max = std::max(imag_max, std::abs(e[i].imag()));
  }
  bg.continuity_residual = emax > 0.0 ? imag_max / emax : 0.0;
  const double mu = n > 0.0 ? total.real() / n : 0.0;
  double spread = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (bg.rho0[i] <= 1e-3 * rho_max) continue;
    spread = std::max(spread, std::abs(e[i].real() / bg.rho0[i] - mu));
  }
  bg.bernoulli_residual = mu != 0.0 ? spread / std::abs(mu) : spread;

  if (bg.continuity_residual > tolerance || bg.bernoulli_residual > tolerance) {
    std::ostringstream os;
    os << "background is not stationary: continuity residual " << bg.continuity_residual
       << ", Bernoulli residual " << bg.bernoulli_residual << " (tolerance " << tolerance << ")";
    bg.warning = os.str();
  }
  return bg;
}

Perturbation zero_perturbation(const GridPtr& grid, double t) {
  return Perturbation{RealField(grid), RealField(grid), t};
}

std::string_view to_string(SourceForm f) { return f == SourceForm::metric ? "metric" : "gauge"; }

SourceTerms source_terms_metric(const BackgroundFlow& bg, double h, bool quantum_pressure) {
  const auto& grid = bg.grid();
  const int dim = grid->dim();
  SourceTerms s{zeros_like(grid), zeros_like(grid), SourceForm::metric};

  RealField jx(grid);
  for (std::size_t i = 0; i < jx.size(); ++i) jx[i] = bg.rho0[i] * bg.v0[0][i];
  const auto djx = spectral::gradient(jx, 0);
  for (std::size_t i = 0; i < jx.size(); ++i) s.F_rho[i] = -h * djx[i];
  if (dim >= 2) {
    RealField jy(grid);
    for (std::size_t i = 0; i < jy.size(); ++i) jy[i] = bg.rho0[i] * bg.v0[1][i];
    const auto djy = spectral::gradient(jy, 1);
    for (std::size_t i = 0; i < jy.size(); ++i) s.F_rho[i] += h * djy[i];
  }
  for (std::size_t i = 0; i < jx.size(); ++i) {
    const double vx = bg.v0[0][i];
    const double vy = dim >= 2 ? bg.v0[1][i] : 0.0;
    s.F_S[i] = 0.5 * bg.mass * h * (vy * vy - vx * vx);
  }
  if (quantum_pressure) {
    RealField root(grid);
    for (std::size_t i = 0; i < root.size(); ++i) root[i] = std::sqrt(std::max(0.0, bg.rho0[i]));
    const auto dxx = spectral::second_derivative(root, 0);
    RealField dyy(grid);
    if (dim >= 2) dyy = spectral::second_derivative(root, 1);
    const double c = bg.hbar * bg.hbar * h / (2.0 * bg.mass);
    for (std::size_t i = 0; i < root.size(); ++i) {
      if (!bg.valid[i]) continue;
      const double d = dxx[i] - dyy[i];
      if (d != 0.0) s.F_S[i] += c * d / root[i];
    }
  }
  return s;
}

SourceTerms source_terms_gauge(const BackgroundFlow& bg, double hdot) {
  const auto& grid = bg.grid();
  require(grid->dim() >= 2, "gauge sources need x and y axes");
  SourceTerms s{zeros_like(grid), zeros_like(grid), SourceForm::gauge};
  const auto drx = spectral::gradient(bg.rho0, 0);
  const auto dry = spectral::gradient(bg.rho0, 1);
  const auto& x = grid->coordinates(0);
  const auto& y = grid->coordinates(1);
  const double c = 0.5 * hdot;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    s.F_rho[i] = c * (x[i] * drx[i] - y[i] * dry[i]);
    s.F_S[i] = c * bg.mass * (x[i] * bg.v0[0][i] - y[i] * bg.v0[1][i]);
  }
  return s;
}

LinearOperator::LinearOperator(BackgroundFlow bg, LinearOptions options)
    : bg_(std::move(bg)), options_(options) {
  const auto& grid = bg_.grid();
  require(bg_.v0.size() == static_cast<std::size_t>(grid->dim()), "background needs one velocity per axis");
  require(options_.density_floor >= 0.0 && options_.density_floor < 1.0, "density floor must lie in [0, 1)");
  double rho_max = 0.0;
  for (double r : bg_.rho0.values()) rho_max = std::max(rho_max, r);
  active_.assign(grid->size(), 1);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    if (bg_.valid[i] && bg_.rho0[i] > options_.density_floor * rho_max) continue;
    active_[i] = 0;
    bg_.valid[i] = 0;
    for (auto& v : bg_.v0) v[i] = 0.0;
  }
  sqrt_rho_ = RealField(grid);
  for (std::size_t i = 0; i < grid->size(); ++i) sqrt_rho_[i] = std::sqrt(std::max(0.0, bg_.rho0[i]));
  lap_sqrt_rho_ = spectral::laplacian(sqrt_rho_);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    double v2 = 0.0;
    for (const auto& v : bg_.v0) v2 += v[i] * v[i];
    const double c = std::sqrt(std::max(0.0, bg_.g * bg_.rho0[i] / bg_.mass));
    max_speed_ = std::max(max_speed_, c + std::sqrt(v2));
    if (bg_.valid[i] && v2 > 0.0) max_mach_ = std::max(max_mach_, c > 0.0 ? std::sqrt(v2) / c : INFINITY);
  }
}

RealField LinearOperator::quantum_pressure(const RealField& drho) const {
  const auto& grid = bg_.grid();
  RealField out(grid);
  if (!options_.quantum_pressure) return out;
  RealField ratio(grid);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    ratio[i] = bg_.valid[i] ? drho[i] / sqrt_rho_[i] : 0.0;
  }
  const auto lap = spectral::laplacian(ratio);
  const double c = bg_.hbar * bg_.hbar / (4.0 * bg_.mass);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    if (!bg_.valid[i]) continue;
    const double r = bg_.rho0[i];
    out[i] = c * (r * lap[i] - drho[i] * lap_sqrt_rho_[i]) / (r * sqrt_rho_[i]);
  }
  return out;
}

std::pair<RealField, RealField> LinearOperator::rhs(const RealField& drho, const RealField& dS) const {
  const auto& grid = bg_.grid();
  const int dim = grid->dim();
  RealField rho_t(grid), s_t(grid);
  for (int a = 0; a < dim; ++a) {
    const auto grad_s = spectral::gradient(dS, a);
    RealField flux(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) {
      flux[i] = bg_.v0[a][i] * drho[i] + bg_.rho0[i] * grad_s[i] / bg_.mass;
      s_t[i] -= bg_.v0[a][i] * grad_s[i];
    }
    const auto div = spectral::gradient(flux, a);
    for (std::size_t i = 0; i < grid->size(); ++i) rho_t[i] -= div[i];
  }
  for (std::size_t i = 0; i < grid->size(); ++i) s_t[i] -= bg_.g * drho[i];
  if (options_.quantum_pressure) s_t += quantum_pressure(drho);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    if (!active_[i]) s_t[i] = 0.0;
  }
  return {std::move(rho_t), std::move(s_t)};
}

double LinearOperator::cfl_limit() const {
  const auto& g = *bg_.grid();
  double dx = g.spacing(0);
  for (int a = 1; a < g.dim(); ++a) dx = std::min(dx, g.spacing(a));
  return max_speed_ > 0.0 ? dx / max_speed_ : INFINITY;
}

double LinearOperator::spectral_limit() const {
  const auto& g = *bg_.grid();
  double k2 = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    const double k = std::numbers::pi / g.spacing(a);
    k2 += k * k;
  }
  const double k = std::sqrt(k2);
  double omega = max_speed_ * k;
  if (options_.quantum_pressure) omega += bg_.hbar * k2 / (2.0 * bg_.mass);
  return omega > 0.0 ? 2.8 / omega : INFINITY;
}

void LinearOperator::check_time_step(double dt) const {
  require(dt > 0.0 && std::isfinite(dt), "linear time step must be positive");
  if (dt >= cfl_limit()) {
    std::ostringstream os;
    os << "dt = " << dt << " violates the acoustic CFL bound " << cfl_limit();
    fail(ErrorKind::invalid_argument, os.str());
  }
  if (dt >= spectral_limit()) {
    std::ostringstream os;
    os << "dt = " << dt << " exceeds the RK4 stability bound " << spectral_limit()
       << " of the highest resolved mode";
    fail(ErrorKind::invalid_argument, os.str());
  }
}

double LinearOperator::energy(const Perturbation& p) const {
  const auto& g = *bg_.grid();
  double e = 0.0;
  std::vector<RealField> grad_s, grad_r, grad_rho0;
  for (int a = 0; a < g.dim(); ++a) {
    grad_s.push_back(spectral::gradient(p.dS, a));
    if (options_.quantum_pressure) {
      grad_r.push_back(spectral::gradient(p.drho, a));
      grad_rho0.push_back(spectral::gradient(bg_.rho0, a));
    }
  }
  const double qp = bg_.hbar * bg_.hbar / (8.0 * bg_.mass);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double gs2 = 0.0, cross = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
      gs2 += grad_s[a][i] * grad_s[a][i];
      cross += bg_.v0[a][i] * grad_s[a][i];
    }
    e += bg_.rho0[i] * gs2 / (2.0 * bg_.mass) + 0.5 * bg_.g * p.drho[i] * p.drho[i] +
         p.drho[i] * cross;
    if (options_.quantum_pressure && bg_.valid[i]) {
      const double r = bg_.rho0[i];
      double a2 = 0.0, ab = 0.0, b2 = 0.0;
      for (int a = 0; a < g.dim(); ++a) {
        a2 += grad_r[a][i] * grad_r[a][i];
        ab += grad_rho0[a][i] * grad_r[a][i];
        b2 += grad_rho0[a][i] * grad_rho0[a][i];
      }
      const double d = p.drho[i];
      e += qp * (a2 / r - 2.0 * ab * d / (r * r) + b2 * d * d / (r * r * r));
    }
  }
  return e * g.cell_volume();
}

namespace {

Perturbation rk4(const Perturbation& p, const LinearOperator& op, double dt,
                 const std::function<const SourceTerms*(double, double&)>& source_at) {
  op.check_time_step(dt);
  const auto& grid = op.background().grid();
  check_same_grid(*grid, *p.drho.grid());
  check_same_grid(*grid, *p.dS.grid());

  auto f = [&](double t, const RealField& r, const RealField& s) {
    auto [rt, st] = op.rhs(r, s);
    double amp = 1.0;
    if (const SourceTerms* src = source_at(t, amp); src && amp != 0.0) {
      for (std::size_t i = 0; i < rt.size(); ++i) {
        rt[i] += amp * src->F_rho[i];
        if (op.active(i)) st[i] += amp * src->F_S[i];
      }
    }
    return std::pair{std::move(rt), std::move(st)};
  };

  const double t = p.t;
  const auto k1 = f(t, p.drho, p.dS);
  const auto k2 = f(t + 0.5 * dt, axpy(p.drho, 0.5 * dt, k1.first), axpy(p.dS, 0.5 * dt, k1.second));
  const auto k3 = f(t + 0.5 * dt, axpy(p.drho, 0.5 * dt, k2.first), axpy(p.dS, 0.5 * dt, k2.second));
  const auto k4 = f(t + dt, axpy(p.drho, dt, k3.first), axpy(p.dS, dt, k3.second));

  Perturbation out{p.drho, p.dS, t + dt};
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < out.drho.size(); ++i) {
    out.drho[i] += w * (k1.first[i] + 2.0 * k2.first[i] + 2.0 * k3.first[i] + k4.first[i]);
    out.dS[i] += w * (k1.second[i] + 2.0 * k2.second[i] + 2.0 * k3.second[i] + k4.second[i]);
  }
  check_finite(out.drho, "density perturbation");
  check_finite(out.dS, "phase perturbation");
  return out;
}

}  // namespace

Perturbation step_linear(const Perturbation& p, const LinearOperator& op, const SourceTerms* sources,
                         double dt) {
  return rk4(p, op, dt, [sources](double, double& amp) {
    amp = 1.0;
    return sources;
  });
}

Perturbation step_linear(const Perturbation& p, const LinearOperator& op,
                         const SourceTerms& unit_sources, const StrainWaveform& waveform, double dt) {
  return rk4(p, op, dt, [&](double t, double& amp) {
    const auto s = waveform.sample(t);
    amp = unit_sources.form == SourceForm::metric ? s.h : s.hdot;
    return &unit_sources;
  });
}

double bogoliubov_frequency(double k, double cs2, double hbar, double mass) {
  const double q = hbar * k * k / (2.0 * mass);
  return std::sqrt(cs2 * k * k + q * q);
}

PhononContent phonon_content(const Perturbation& p, const BackgroundFlow& bg) {
  const auto& g = *bg.grid();
  check_same_grid(g, *p.drho.grid());
  PhononContent out;
  out.homogeneous_reference = !bg.is_homogeneous();
  const double rho = bg.mean_density();
  require(rho > 0.0, "phonon content needs a non-empty background");
  const double cs2 = bg.g * rho / bg.mass;
  const auto r_hat = spectral::forward(p.drho);
  const auto s_hat = spectral::forward(p.dS);
  const double n_total = static_cast<double>(g.size());
  const double w = g.volume() / (n_total * n_total);
  const double dk = 2.0 * std::numbers::pi / g.extent(0);

  std::map<long, ModeShell> shells;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double k2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) k2 += g.k_squared(a)[i];
    if (k2 == 0.0) continue;
    const double e = w * (rho * k2 * std::norm(s_hat[i]) / (2.0 * bg.mass) +
                          0.5 * (bg.g + bg.hbar * bg.hbar * k2 / (4.0 * bg.mass * rho)) *
                              std::norm(r_hat[i]));
    const double k = std::sqrt(k2);
    const double n = e / (bg.hbar * bogoliubov_frequency(k, cs2, bg.hbar, bg.mass));
    const long idx = std::lround(k / dk);
    auto& shell = shells[idx];
    shell.k = static_cast<double>(idx) * dk;
    shell.energy += e;
    shell.number += n;
    out.energy += e;
    out.n_est += n;
  }
  for (auto& [idx, shell] : shells) out.spectrum.push_back(shell);
  return out;
}

Perturbation difference(const CondensateState& a, const CondensateState& b) {
  check_same_grid(*a.grid(), *b.grid());
  Perturbation p = zero_perturbation(a.grid(), a.t);
  for (std::size_t i = 0; i < a.psi.size(); ++i) {
    p.drho[i] = std::norm(a.psi[i]) - std::norm(b.psi[i]);
    p.dS[i] = a.hbar() * std::arg(a.psi[i] * std::conj(b.psi[i]));
  }
  return p;
}

}  // namespace gwbec
