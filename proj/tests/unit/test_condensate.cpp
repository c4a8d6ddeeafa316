#include "doctest.h"

#include <cmath>
#include <numbers>

#include "gwbec/condensate.hpp"
#include "gwbec/dynamics.hpp"
#include "gwbec/error.hpp"

using namespace gwbec;
using std::numbers::pi;

namespace {

// Winding of arg(psi) around the square loop of half-width r (in cells)
// centred on cell (ci, cj), summing wrapped phase steps.
double winding(const ComplexField& psi, long ci, long cj, long r) {
  const auto& g = *psi.grid();
  const long nx = static_cast<long>(g.points(0)), ny = static_cast<long>(g.points(1));
  auto at = [&](long i, long j) {
    i = ((i % nx) + nx) % nx;
    j = ((j % ny) + ny) % ny;
    return psi[static_cast<std::size_t>(i) * g.stride(0) + static_cast<std::size_t>(j) * g.stride(1)];
  };
  std::vector<std::pair<long, long>> loop;
  for (long k = -r; k < r; ++k) loop.push_back({ci + k, cj - r});
  for (long k = -r; k < r; ++k) loop.push_back({ci + r, cj + k});
  for (long k = r; k > -r; --k) loop.push_back({ci + k, cj + r});
  for (long k = r; k > -r; --k) loop.push_back({ci - r, cj + k});
  double total = 0.0;
  for (std::size_t n = 0; n < loop.size(); ++n) {
    const auto a = at(loop[n].first, loop[n].second);
    const auto b = at(loop[(n + 1) % loop.size()].first, loop[(n + 1) % loop.size()].second);
    total += std::arg(b * std::conj(a));
  }
  return total / (2 * pi);
}

// Trigonometric interpolation of a 2D periodic field at (x, y), summed directly.
complex interpolate(const ComplexField& psi, double x, double y) {
  const auto& g = *psi.grid();
  const auto nx = g.points(0), ny = g.points(1);
  complex acc = 0.0;
  const auto& kx = g.wavenumbers(0);
  const auto& ky = g.wavenumbers(1);
  for (std::size_t p = 0; p < nx; ++p) {
    for (std::size_t q = 0; q < ny; ++q) {
      complex c = 0.0;
      for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
          const double ph = -(kx[p] * g.coordinate(0, i) + ky[q] * g.coordinate(1, j));
          c += psi[i * g.stride(0) + j * g.stride(1)] * std::polar(1.0, ph);
        }
      }
      double w = 1.0;
      if (g.is_nyquist(0, p)) w *= 0.5;
      if (g.is_nyquist(1, q)) w *= 0.5;
      acc += w * c * std::polar(1.0, kx[p] * x + ky[q] * y);
      // The unpaired Nyquist bins contribute their cosine part.
      if (g.is_nyquist(0, p) || g.is_nyquist(1, q)) {
        const double sx = g.is_nyquist(0, p) ? -1.0 : 1.0;
        const double sy = g.is_nyquist(1, q) ? -1.0 : 1.0;
        acc += w * c * std::polar(1.0, sx * kx[p] * x + sy * ky[q] * y);
      }
    }
  }
  return acc / static_cast<double>(nx * ny);
}

}  // namespace

TEST_CASE("homogeneous preparation") {
  auto g = Grid::uniform(2, 8, 8.0);
  auto s = prepare_homogeneous(g, 1.0, 1.0, UnitSystem());
  CHECK(s.norm() == doctest::Approx(64.0).epsilon(1e-15));
  CHECK(s.t == 0.0);
  auto h = madelung_decompose(prepare_homogeneous(g, 2.5, 1.0, UnitSystem()));
  for (std::size_t i = 0; i < g->size(); ++i) {
    CHECK(h.rho[i] == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(h.S[i] == 0.0);
    CHECK(h.v[0][i] == 0.0);
    CHECK(h.v[1][i] == 0.0);
  }
  CHECK_THROWS_AS(prepare_homogeneous(g, 0.0, 1.0, UnitSystem()), Error);
  CHECK_THROWS_AS(prepare_homogeneous(g, 1.0, -1.0, UnitSystem()), Error);
}

TEST_CASE("plane wave has uniform velocity hbar k / m") {
  UnitSystem u(0.7, 1.3, 1.0, 6.582119569e-16 / 0.7, 1.0);
  auto g = Grid::uniform(2, 16, 10.0);
  auto s = prepare_plane_flow(g, 1.0, 1.0, u, {2, 0});
  auto h = madelung_decompose(s);
  const double v = 0.7 * 2 * pi * 2 / 10.0 / 1.3;
  for (std::size_t i = 0; i < g->size(); ++i) {
    CHECK(h.v[0][i] == doctest::Approx(v).epsilon(1e-12));
    CHECK(std::abs(h.v[1][i]) < 1e-12);
  }
}

TEST_CASE("observables of simple states") {
  auto g = Grid::uniform(2, 16, 8.0);
  const double V = 64.0;
  auto o = observables(prepare_homogeneous(g, 1.5, 2.0, UnitSystem()));
  CHECK(o.E_kin == 0.0);
  CHECK(o.Q == 0.0);
  CHECK(o.E_int == doctest::Approx(2.0 * 1.5 * 1.5 * V / 2).epsilon(1e-14));

  const double k = 2 * pi * 3 / 8.0;
  auto px = observables(prepare_plane_flow(g, 1.0, 0.0, UnitSystem(), {3, 0}));
  CHECK(px.E_kin == doctest::Approx(V * k * k / 2).epsilon(1e-12));
  CHECK(px.Q == doctest::Approx(px.E_kin).epsilon(1e-12));
  auto py = observables(prepare_plane_flow(g, 1.0, 0.0, UnitSystem(), {0, 3}));
  CHECK(py.Q == doctest::Approx(-py.E_kin).epsilon(1e-12));
}

TEST_CASE("imprinted vortex circulation is 2 pi hbar q / m") {
  auto g = Grid::uniform(2, 64, 32.0);
  auto base = prepare_homogeneous(g, 1.0, 1.0, UnitSystem());
  const double hx = 0.5 * g->spacing(0);
  for (int q : {1, 2, -1}) {
    auto s = imprint_vortex(base, hx, hx, q);
    CHECK(winding(s.psi, 32, 32, 6) == doctest::Approx(q).epsilon(1e-12));
    // Away from the core the same loop through the velocity field.
    const auto vx = velocity(s.psi, 0, 1.0, 1.0);
    const auto vy = velocity(s.psi, 1, 1.0, 1.0);
    double circ = 0.0;
    const double dx = g->spacing(0);
    const std::size_t lo = 32 - 8, hi = 32 + 8;
    for (std::size_t i = lo; i < hi; ++i) {
      circ += 0.5 * (vx[i * 64 + lo] + vx[(i + 1) * 64 + lo]) * dx;
      circ -= 0.5 * (vx[i * 64 + hi] + vx[(i + 1) * 64 + hi]) * dx;
      circ += 0.5 * (vy[hi * 64 + i] + vy[hi * 64 + i + 1]) * dx;
      circ -= 0.5 * (vy[lo * 64 + i] + vy[lo * 64 + i + 1]) * dx;
    }
    CHECK(circ == doctest::Approx(2 * pi * q).epsilon(0.03));
  }
  CHECK_THROWS_AS(imprint_vortex(base, 0.0, 0.0, 1.5), Error);
  CHECK_THROWS_AS(imprint_vortex(base, 0.0, 0.0, 0.0), Error);
}

TEST_CASE("vortex census of a neutral pair") {
  auto g = Grid::uniform(2, 64, 32.0);
  auto s = imprint_vortices(prepare_homogeneous(g, 1.0, 1.0, UnitSystem()), vortex_pair_layout(*g));
  auto sites = find_vortices(s.psi);
  REQUIRE(sites.size() == 2);
  CHECK(net_winding(sites) == 0);
  for (const auto& v : sites) {
    CHECK(std::abs(std::abs(v.x) - 8.0) < 1.0);
    CHECK(std::abs(v.y) < 1.0);
    CHECK(v.winding == (v.x < 0 ? 1 : -1));
  }
}

TEST_CASE("relaxed pair has an empty core") {
  auto g = Grid::uniform(2, 32, 16.0);
  auto layout = vortex_pair_layout(*g);
  auto s = imprint_vortices(prepare_homogeneous(g, 1.0, 1.0, UnitSystem()), layout);
  RelaxOptions ro;
  ro.pin_phase = true;
  ro.max_steps = 2000;
  auto r = relax_imaginary_time(s, ro);
  CHECK(r.converged);  // pinning the phase is a projection, so energy need not fall monotonically
  const double rho_mean = r.state.norm() / g->volume();
  for (const auto& v : layout) CHECK(std::norm(interpolate(r.state.psi, v.x, v.y)) < 0.01 * rho_mean);
  CHECK(find_vortices(r.state.psi).size() == 2);
}

TEST_CASE("seeded perturbation is reproducible and keeps N") {
  auto g = Grid::uniform(2, 16, 8.0);
  auto s = prepare_homogeneous(g, 1.0, 1.0, UnitSystem());
  auto a = seed_perturbation(s, 0.01, 42);
  auto b = seed_perturbation(s, 0.01, 42);
  auto c = seed_perturbation(s, 0.01, 43);
  CHECK(a.norm() == doctest::Approx(s.norm()).epsilon(1e-14));
  bool same = true, differs = false;
  for (std::size_t i = 0; i < g->size(); ++i) {
    same = same && a.psi[i] == b.psi[i];
    differs = differs || a.psi[i] != c.psi[i];
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("observable checks catch broken orderings") {
  Observables o;
  o.E_kin = 1.0;
  o.E_total = 2.0;
  o.Q = 0.5;
  CHECK_NOTHROW(check_observables(o));
  o.Q = 1.5;
  try {
    check_observables(o);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invariant);
  }
  o.Q = 0.0;
  o.E_int = -1.0;
  CHECK_THROWS_AS(check_observables(o), Error);
}

TEST_CASE("healing length") {
  CHECK(healing_length(1.0, 1.0, 1.0, 1.0) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(healing_length(4.0, 2.0, 1.0, 0.5) == doctest::Approx(1 / std::sqrt(8.0)));
}

TEST_CASE("non-rotating trapped relaxation has no vortices") {
  auto g = Grid::uniform(2, 48, 20.0);
  LatticeOptions lo;
  lo.max_steps = 1500;
  lo.seed = 3;
  auto r = prepare_vortex_lattice(g, 0.0, 8.0, 1.0, UnitSystem(), lo);
  CHECK(r.vortices.empty());
  CHECK(r.disk_count == 0);
}

TEST_CASE("rotating lattice matches the Feynman count") {
  auto g = Grid::uniform(2, 96, 20.0);
  LatticeOptions lo;
  lo.trap_omega = 0.6;
  lo.max_steps = 5000;
  lo.seed = 5;
  auto r = prepare_vortex_lattice(g, 0.48, 8.0, 1.0, UnitSystem(), lo);
  MESSAGE("disk count " << r.disk_count << " vs Feynman " << r.feynman_estimate);
  CHECK(r.disk_count >= 1);
  CHECK(std::abs(r.disk_count - r.feynman_estimate) <= 0.3 * r.feynman_estimate);
  for (const auto& v : r.vortices) CHECK(v.winding == 1);
  CHECK_THROWS_AS(prepare_vortex_lattice(g, 0.7, 8.0, 1.0, UnitSystem(), lo), Error);
}

TEST_CASE("feynman count") {
  CHECK(feynman_vortex_count(0.5, 4.0, 1.0, 1.0) == doctest::Approx(8.0));
}
