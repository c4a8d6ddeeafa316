#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "gwbec/dynamics.hpp"
#include "oracles.hpp"

using namespace gwbec;
using std::numbers::pi;

namespace {

// Seeded low-mode perturbation of a homogeneous state, optionally with a
// smooth compact envelope so the field vanishes at the faces.
CondensateState random_state(const GridPtr& g, std::uint64_t seed, double envelope = 0.0) {
  auto s = seed_perturbation(prepare_homogeneous(g, 1.0, 1.0, UnitSystem()), 0.05, seed, 3);
  if (envelope > 0.0) {
    for (std::size_t i = 0; i < g->size(); ++i) {
      double r2 = 0.0;
      for (int a = 0; a < g->dim(); ++a) r2 += std::pow(g->coordinates(a)[i] / envelope, 2);
      s.psi[i] *= std::exp(-r2 * r2);
    }
  }
  return s;
}

ComplexField conj(const ComplexField& f) {
  auto out = f;
  for (auto& z : out.values()) z = std::conj(z);
  return out;
}

double l2_diff(const ComplexField& a, const ComplexField& b) {
  double d = 0.0, n = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += std::norm(a[i] - b[i]);
    n += std::norm(b[i]);
  }
  return std::sqrt(d / n);
}

CondensateState run(const CondensateState& s, Scheme scheme, const StrainWaveform& w, double T, std::size_t steps) {
  EvolutionConfig c;
  c.scheme = scheme;
  c.waveform = w;
  c.dt = T / static_cast<double>(steps);
  c.n_steps = steps;
  return evolve(s, c).final_state;
}

}  // namespace

TEST_CASE("every step preserves the norm") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto g = Grid::uniform(2, 32, 16.0);
    auto s = random_state(g, seed);
    const auto w = StrainWaveform::sinusoid(0.05, 0.5, 0.0, 10.0);
    const double n0 = s.norm(), dt = default_time_step(*g, 1, 1);
    auto a = s, b = s;
    for (int k = 0; k < 50; ++k) {
      a = step_flat(a, dt);
      b = step_metric(b, dt, w);
      CHECK(std::abs(a.norm() / n0 - 1) < 1e-13);
      CHECK(std::abs(b.norm() / n0 - 1) < 1e-13);
    }
  }
}

TEST_CASE("conjugation reverses time") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (int dim : {1, 2, 3}) {
      auto g = Grid::uniform(dim, dim == 3 ? 12 : 32, 12.0);
      auto s = random_state(g, seed);
      const double dt = default_time_step(*g, 1, 1);
      auto a = s;
      for (int k = 0; k < 40; ++k) a = step_flat(a, dt);
      a.psi = conj(a.psi);
      for (int k = 0; k < 40; ++k) a = step_flat(a, dt);
      CHECK(l2_diff(conj(a.psi), s.psi) < 1e-10);
    }
  }
}

TEST_CASE("metric scheme converges at second order in dt") {
  auto g = Grid::uniform(2, 32, 16.0);
  const auto s = random_state(g, 9);
  const auto w = StrainWaveform::sinusoid(0.05, 0.5, 0.0, 1.0);
  const auto ref = run(s, Scheme::metric, w, 1.0, 1600);
  const double e1 = l2_diff(run(s, Scheme::metric, w, 1.0, 50).psi, ref.psi);
  const double e2 = l2_diff(run(s, Scheme::metric, w, 1.0, 100).psi, ref.psi);
  MESSAGE("errors " << e1 << " " << e2);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("flat scheme conserves norm and energy over 1e4 steps") {
  for (std::uint64_t seed : {3u, 4u}) {
    auto g = Grid::uniform(2, 64, 32.0);
    const auto s = seed_perturbation(prepare_homogeneous(g, 1.0, 1.0, UnitSystem()), 0.01, seed, 2);
    EvolutionConfig c;
    c.dt = default_time_step(*g, 1, 1);
    c.n_steps = 10000;
    const auto tr = evolve(s, c);
    double dn = 0.0, de = 0.0;
    for (const auto& o : tr.series) {
      dn = std::max(dn, std::abs(o.N / tr.series[0].N - 1));
      de = std::max(de, std::abs(o.E_total / tr.series[0].E_total - 1));
    }
    CHECK(dn < 1e-10);
    CHECK(de < 1e-8);
  }
}

TEST_CASE("metric and gauge schemes differ at second order in h") {
  auto g = Grid::uniform(2, 48, 32.0);
  const auto s = random_state(g, 5, 6.0);
  const double T = 2.0;
  const auto steps = static_cast<std::size_t>(std::lround(T / default_time_step(*g, 1, 1)));
  std::vector<double> hs{1e-3, 2e-3, 4e-3}, d;
  for (double h : hs) {
    const auto w = StrainWaveform::sinusoid(h, 1.0, 0.0, T);
    EvolutionConfig c;
    c.dt = T / static_cast<double>(steps);
    c.n_steps = steps;
    c.waveform = w;
    c.scheme = Scheme::metric;
    const auto a = evolve(s, c);
    c.scheme = Scheme::gauge;
    const auto b = evolve(s, c);
    double m = 0.0;
    for (std::size_t k = 0; k < a.series.size(); ++k) m = std::max(m, std::abs(a.series[k].Q - b.series[k].Q));
    d.push_back(m);
  }
  CHECK(oracle::loglog_slope(hs, d) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("strained excess energy on a homogeneous state is second order") {
  auto g = Grid::uniform(2, 32, 16.0);
  const auto s = seed_perturbation(prepare_homogeneous(g, 1.0, 1.0, UnitSystem()), 0.01, 2, 2);
  const double T = 10.0;
  const auto steps = static_cast<std::size_t>(std::lround(T / default_time_step(*g, 1, 1)));
  EvolutionConfig c;
  c.dt = T / static_cast<double>(steps);
  c.n_steps = steps;
  const auto ref = evolve(s, c).final_state;
  std::vector<double> hs{1e-3, 2e-3, 4e-3}, e;
  for (double h : hs) e.push_back(excess_perturbation_energy(run(s, Scheme::metric, StrainWaveform::sinusoid(h, 0.1, 0.0, T), T, steps), ref));
  CHECK(oracle::loglog_slope(hs, e) == doctest::Approx(2.0).epsilon(0.075));
}
