#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "gwbec/dynamics.hpp"
#include "gwbec/phonon.hpp"
#include "oracles.hpp"

using namespace gwbec;
using std::numbers::pi;

namespace {

// Smooth stationary-looking background: random density bumps and a random
// periodic phase, density bounded away from zero.
CondensateState random_background(const GridPtr& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double L = g->extent(0);
  double a[3][3], b[3][3];
  for (auto& row : a)
    for (double& v : row) v = 0.08 * n(rng);
  for (auto& row : b)
    for (double& v : row) v = 0.4 * n(rng);
  auto s = prepare_homogeneous(g, 1.0, 1.0, UnitSystem());
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double x = 2 * pi * g->coordinates(0)[i] / L, y = 2 * pi * g->coordinates(1)[i] / L;
    double r = 1.0, ph = 0.0;
    for (int p = 0; p < 3; ++p) {
      for (int q = 0; q < 3; ++q) {
        r += a[p][q] * std::cos(p * x + q * y + 1.0 * p);
        ph += b[p][q] * std::sin(p * x + q * y + 2.0 * q);
      }
    }
    s.psi[i] = std::polar(std::sqrt(r), ph);
  }
  return s;
}

double total(const RealField& f) { return spectral::integrate(f); }

double max_abs(const RealField& f) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("metric density source integrates to zero") {
  std::mt19937_64 rng(51);
  auto g = Grid::uniform(2, 32, 16.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto bg = background_from(random_background(g, rng));
    for (bool qp : {false, true}) {
      const auto s = source_terms_metric(bg, 1e-3, qp);
      CHECK(std::abs(total(s.F_rho)) < 1e-12 * (1 + max_abs(s.F_rho)) * g->volume());
    }
  }
}

TEST_CASE("sources are linear in the strain") {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto g = Grid::uniform(2, 32, 16.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto bg = background_from(random_background(g, rng));
    const double h = 1e-3 * u(rng), k = 5 * u(rng);
    const bool qp = trial % 2;
    const auto a = source_terms_metric(bg, h, qp), b = source_terms_metric(bg, k * h, qp);
    const auto ga = source_terms_gauge(bg, h), gb = source_terms_gauge(bg, k * h);
    for (std::size_t i = 0; i < g->size(); ++i) {
      CHECK(b.F_rho[i] == doctest::Approx(k * a.F_rho[i]).epsilon(1e-12).scale(max_abs(a.F_rho)));
      CHECK(b.F_S[i] == doctest::Approx(k * a.F_S[i]).epsilon(1e-12).scale(max_abs(a.F_S)));
      CHECK(gb.F_rho[i] == doctest::Approx(k * ga.F_rho[i]).epsilon(1e-12).scale(max_abs(ga.F_rho)));
      CHECK(gb.F_S[i] == doctest::Approx(k * ga.F_S[i]).epsilon(1e-12).scale(max_abs(ga.F_S)));
    }
  }
}

TEST_CASE("undriven linear energy is conserved over 1e4 steps") {
  auto g = Grid::uniform(2, 32, 16.0);
  auto bg = background_from(prepare_homogeneous(g, 1.0, 1.0, UnitSystem()));
  std::mt19937_64 rng(53);
  std::normal_distribution<double> n(0.0, 1.0);
  for (bool qp : {false, true}) {
    LinearOptions lo;
    lo.quantum_pressure = qp;
    LinearOperator op(bg, lo);
    auto p = zero_perturbation(g);
    for (int m = 1; m <= 3; ++m) {
      const double a = 1e-3 * n(rng), b = 1e-3 * n(rng);
      for (std::size_t i = 0; i < g->size(); ++i) {
        const double x = 2 * pi * m * g->coordinates(0)[i] / 16.0, y = 2 * pi * (m - 1) * g->coordinates(1)[i] / 16.0;
        p.dS[i] += a * std::cos(x + y);
        p.drho[i] += b * std::sin(x - y);
      }
    }
    // RK4 loses energy as (w dt)^6 per step; a small fraction of the stability limit keeps it below rounding
    const double e0 = op.energy(p), dt = 0.02 * std::min(op.cfl_limit(), op.spectral_limit());
    const double m0 = total(p.drho);
    double worst = 0.0, drift = 0.0;
    for (int k = 0; k < 10000; ++k) {
      p = step_linear(p, op, nullptr, dt);
      if (k % 100 == 99) worst = std::max(worst, std::abs(op.energy(p) / e0 - 1));
      drift = std::max(drift, std::abs(total(p.drho) - m0));
    }
    CHECK(worst < 1e-8);
    CHECK(drift < 1e-10 * max_abs(p.drho) * g->volume());
  }
}

TEST_CASE("linear and nonlinear responses agree up to O(h^2)") {
  auto g = Grid::uniform(2, 64, 32.0);
  auto s = prepare_plane_flow(g, 1.0, 1.0, UnitSystem(), {1, 0});
  std::vector<double> vv(g->size());
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double x = g->coordinates(0)[i], y = g->coordinates(1)[i];
    vv[i] = 0.5 * std::exp(-(x * x + y * y) / 8.0);
  }
  RealField V(g, vv);
  RelaxOptions ro;
  ro.max_steps = 20000;
  ro.potential = &V;
  ro.tolerance = 1e-13;
  const auto r = relax_imaginary_time(s, ro);
  const auto bg = background_from(r.state, &V);
  const double T = 10.0, f = 0.1;
  EvolutionConfig c;
  c.n_steps = static_cast<std::size_t>(std::lround(T / default_time_step(*g, 1, 1)));
  c.dt = T / static_cast<double>(c.n_steps);
  c.potential = V;
  const auto ref = evolve(r.state, c);
  LinearOptions lo;
  lo.quantum_pressure = true;
  LinearOperator op(bg, lo);
  const auto ls = static_cast<std::size_t>(std::ceil(T / (0.5 * std::min(op.cfl_limit(), op.spectral_limit()))));
  const double ldt = T / static_cast<double>(ls);
  const auto unit = source_terms_metric(bg, 1.0, true);
  std::vector<double> hs{1e-3, 2e-3, 4e-3}, disc;
  for (double h : hs) {
    const auto w = StrainWaveform::sinusoid(h, f, 0.0, T);
    c.scheme = Scheme::metric;
    c.waveform = w;
    const auto d = difference(evolve(r.state, c).final_state, ref.final_state);
    auto p = zero_perturbation(g);
    for (std::size_t k = 0; k < ls; ++k) p = step_linear(p, op, unit, w, ldt);
    double e = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) e = std::max(e, std::abs(p.drho[i] - d.drho[i]));
    disc.push_back(e);
  }
  CHECK(std::abs(oracle::loglog_slope(hs, disc) - 2.0) <= 0.1);
}
