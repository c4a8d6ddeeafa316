#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gwbec/detect.hpp"
#include "gwbec/dynamics.hpp"
#include "gwbec/error.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace gwbec;
using std::numbers::pi;

namespace {

std::vector<double> grid_times(double T, std::size_t n) {
  std::vector<double> t(n + 1);
  for (std::size_t i = 0; i <= n; ++i) t[i] = T * static_cast<double>(i) / static_cast<double>(n);
  return t;
}

}  // namespace

TEST_CASE("simpson is exact for cubics with even and odd interval counts") {
  for (std::size_t n : {1, 2, 3, 4, 7, 10}) {
    const double dx = 0.3;
    std::vector<double> f;
    for (std::size_t i = 0; i <= n; ++i) {
      const double x = dx * i;
      f.push_back(n == 1 ? 2.0 * x + 1.0 : x * x * x - 2.0 * x + 0.5);
    }
    const double X = dx * n;
    const double exact = n == 1 ? X * X + X : X * X * X * X / 4 - X * X + 0.5 * X;
    CHECK(simpson(f, dx) == doctest::Approx(exact).epsilon(1e-13));
  }
}

TEST_CASE("phase shift vanishes for a homogeneous condensate") {
  auto w = StrainWaveform::sinusoid(1e-3, 1.0, 0.0, 2.0);
  const auto t = grid_times(2.0, 200);
  CHECK(quadrupole_phase_shift(t, std::vector<double>(t.size(), 0.0), w, 1.0) == 0.0);
}

TEST_CASE("phase shift of a stationary Q over whole periods is zero") {
  auto w = StrainWaveform::sinusoid(1e-3, 0.5, 0.0, 6.0);
  const auto t = grid_times(6.0, 600);
  const double phi = quadrupole_phase_shift(t, std::vector<double>(t.size(), 3.0), w, 1.0);
  CHECK(std::abs(phi) < 1e-12 * 1e-3 * 3.0 * 6.0);
}

TEST_CASE("resonant Q makes the phase grow linearly with T") {
  const double f = 0.5, h0 = 1e-3, q0 = 2.0;
  std::vector<double> T, phi;
  for (int periods : {2, 4, 6, 8, 10}) {
    const double span = periods / f;
    auto w = StrainWaveform::sinusoid(h0, f, 0.0, span);
    const auto t = grid_times(span, 100 * periods);
    std::vector<double> q;
    for (double x : t) q.push_back(q0 * std::sin(2 * pi * f * x));
    T.push_back(span);
    phi.push_back(quadrupole_phase_shift(t, q, w, 1.0));
    // closed form: -h0 q0 T / 2
    CHECK(phi.back() == doctest::Approx(-h0 * q0 * span / 2).epsilon(1e-8));
  }
  const double s = oracle::slope(T, phi);
  double ss_res = 0, ss_tot = 0, mean = 0;
  for (double p : phi) mean += p / phi.size();
  for (std::size_t i = 0; i < T.size(); ++i) {
    const double fit = phi[0] + s * (T[i] - T[0]);
    ss_res += std::pow(phi[i] - fit, 2);
    ss_tot += std::pow(phi[i] - mean, 2);
  }
  CHECK(1 - ss_res / ss_tot > 0.999);
  CHECK(s == doctest::Approx(-h0 * q0 / 2).epsilon(1e-8));
}

TEST_CASE("phase shift rejects mismatched inputs") {
  auto w = StrainWaveform::sinusoid(1e-3, 1.0, 0.0, 1.0);
  CHECK_THROWS_AS(quadrupole_phase_shift({0.0, 0.5, 1.5}, {1, 1, 1}, w, 1.0), Error);
  CHECK_THROWS_AS(quadrupole_phase_shift({0.0, 1.0, 2.0}, {1, 1, 1}, w, 1.0), Error);
  CHECK_THROWS_AS(quadrupole_phase_shift({0.0, 1.0}, {1, 1, 1}, w, 1.0), Error);
}

TEST_CASE("first-order fidelity") {
  auto z = fidelity_first_order(0.0);
  CHECK(z.deviation == 0.0);
  auto a = fidelity_first_order(0.30);
  CHECK(a.deviation == doctest::Approx(0.30));
  CHECK(a.purely_imaginary);
  CHECK_FALSE(a.expansion_warning);
  CHECK(fidelity_first_order(0.5).expansion_warning);
  CHECK(fidelity_first_order(-0.5).deviation == 0.5);
}

TEST_CASE("energy bound reproduces the quoted numbers") {
  CHECK(energy_bound(2000, 1e-21, 100) == doctest::Approx(2000 * 1e-21 * 100 / oracle::hbar_eV_s).epsilon(1e-14));
  CHECK(std::abs(energy_bound(2000, 1e-21, 100) - 0.3039) < 1e-4);
  CHECK(energy_bound(0.1, 1e-9, 1e-6) == doctest::Approx(0.152).epsilon(2e-3));
  CHECK(energy_bound(2000, 0.0, 100) == 0.0);
  CHECK_THROWS_AS(energy_bound(-1, 1e-21, 100), Error);
}

TEST_CASE("trap bound") {
  CHECK(trap_bound(2000, 1e-21, 1, 100) == energy_bound(2000, 1e-21, 100));
  CHECK(trap_bound(1, 1e-9, 2e6, 1e-6) == doctest::Approx(2 * trap_bound(1, 1e-9, 1e6, 1e-6)));
  CHECK(trap_bound(1, 1e-9, 1e6, 0.0) == 0.0);
}

TEST_CASE("kinetic energy estimate for a million Rb-87 atoms") {
  const double m = 86.909180527 * oracle::amu_kg;
  auto hand = [&](double v) { return 1e6 * 0.5 * m * v * v / oracle::eV_J; };
  CHECK(kinetic_energy_estimate(1e6, 1e-3, m) == doctest::Approx(hand(1e-3)).epsilon(1e-14));
  CHECK(kinetic_energy_estimate(1e6, 1e-3, m) == doctest::Approx(4.5e-7).epsilon(0.01));
  CHECK(kinetic_energy_estimate(1e6, 3e-3, m) == doctest::Approx(4.1e-6).epsilon(0.01));
  CHECK(kinetic_energy_estimate(1e6, 0.0, m) == 0.0);
}

TEST_CASE("hierarchy levels") {
  auto h = hierarchy_estimates(1e6, 10, 1e-21);
  CHECK(h.hN == doctest::Approx(1e-15));
  CHECK(h.h_sqrt_nN == doctest::Approx(3.16227766e-18));
  CHECK(h.hn == doctest::Approx(1e-20));
  CHECK(h.h == 1e-21);
  CHECK(h.strictly_decreasing);
  auto z = hierarchy_estimates(1e6, 0, 1e-21);
  CHECK(z.degenerate);
  CHECK(z.h_sqrt_nN == 0.0);
  CHECK(z.hn == 0.0);
  CHECK_FALSE(z.strictly_decreasing);
  auto b = hierarchy_estimates(100, 100, 1e-3);
  CHECK(b.boundary);
  CHECK(b.hN == doctest::Approx(b.h_sqrt_nN));
  CHECK_THROWS_AS(hierarchy_estimates(10, 11, 1e-3), Error);
}

TEST_CASE("NOON fidelity") {
  auto f = noon_fidelity(1e-8, 1e6);
  CHECK(f.exact == doctest::Approx(std::pow(1 - 1e-8, 1e6)).epsilon(1e-9));
  CHECK(f.exact == doctest::Approx(0.990050).epsilon(1e-6));
  CHECK(f.linearized == doctest::Approx(0.99).epsilon(1e-15));
  auto z = noon_fidelity(0.0, 1e6);
  CHECK(z.exact == 1.0);
  CHECK(z.linearized == 1.0);
  auto one = noon_fidelity(1e-3, 1);
  CHECK(one.exact == doctest::Approx(1 - 1e-3).epsilon(1e-15));
  CHECK(std::abs(one.exact - one.linearized) < 1e-14);
  CHECK_THROWS_AS(noon_fidelity(1.5, 10), Error);
}

TEST_CASE("bounds report without a trajectory") {
  BoundsInput in;
  in.T_s = 2000;
  in.h_max = 1e-21;
  in.E_eV = 100;
  in.N = 1e6;
  in.n = 10;
  auto r = bounds_report(in);
  CHECK_FALSE(r.phi.has_value());
  CHECK_FALSE(r.margin_energy().has_value());
  auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["bound_energy"].get<double>() == doctest::Approx(0.3039).epsilon(1e-3));
  CHECK(j["phi"].is_null());
  CHECK(j["inputs"]["hbar_eV_s"] == oracle::hbar_eV_s);
  CHECK(j["hierarchy"]["strictly_decreasing"] == true);
  in.T_s = 0;
  CHECK_THROWS_AS(bounds_report(in), Error);
}

TEST_CASE("phase above the energy bound is an invariant violation") {
  DetectionReport r;
  r.bound_energy = 0.1;
  r.phi = 0.1;
  CHECK_NOTHROW(check_phase_bound(r));
  r.phi = -0.11;
  try {
    check_phase_bound(r);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invariant);
  }
  r.phi.reset();
  CHECK_NOTHROW(check_phase_bound(r));
}

TEST_CASE("report margins and csv row") {
  DetectionReport r;
  r.phi = 0.01;
  r.bound_energy = 0.3;
  r.bound_trap = 0.6;
  CHECK(*r.margin_energy() == doctest::Approx(30.0));
  CHECK(*r.margin_trap() == doctest::Approx(60.0));
  const auto row = r.csv_row("s1");
  CHECK(row.rfind("s1,0.01", 0) == 0);
  const auto header = DetectionReport::csv_header();
  CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));
}

TEST_CASE("phase from a trajectory uses its Q series") {
  auto g = Grid::uniform(2, 16, 8.0);
  auto s = prepare_plane_flow(g, 1.0, 0.0, UnitSystem(), {1, 0});
  EvolutionConfig c;
  c.dt = 0.01;
  c.n_steps = 100;
  auto tr = evolve(s, c);
  auto w = StrainWaveform::gaussian_pulse(1e-3, 0.5, 0.1, 1.0);
  // Q is constant (= E_kin of the plane wave), so phi = -Q int h dt.
  const double q = tr.series.front().Q;
  const double expect = -q * 1e-3 * 0.1 * std::sqrt(2 * pi) * std::erf(0.5 / (0.1 * std::sqrt(2.0)));
  CHECK(quadrupole_phase_shift(tr, w, 1.0) == doctest::Approx(expect).epsilon(1e-6));
}
