#include "doctest.h"

#include <cmath>
#include <numbers>

#include "gwbec/error.hpp"
#include "gwbec/grid.hpp"

using namespace gwbec;
using std::numbers::pi;

namespace {

RealField sample(const GridPtr& g, double (*f)(double, double, double)) {
  RealField out(g);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double x = g->coordinates(0)[i];
    const double y = g->dim() > 1 ? g->coordinates(1)[i] : 0.0;
    const double z = g->dim() > 2 ? g->coordinates(2)[i] : 0.0;
    out[i] = f(x, y, z);
  }
  return out;
}

double max_err(const RealField& a, const RealField& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

constexpr double L = 10.0;

}  // namespace

TEST_CASE("grid geometry") {
  auto g = Grid::create({8, 6}, {4.0, 3.0});
  CHECK(g->dim() == 2);
  CHECK(g->size() == 48);
  CHECK(g->spacing(0) == 0.5);
  CHECK(g->volume() == 12.0);
  CHECK(g->cell_volume() == 0.25);
  CHECK(g->coordinate(0, 0) == -2.0);
  CHECK(g->coordinate(1, 5) == doctest::Approx(1.0));
  CHECK_FALSE(g->powers_of_two());
  CHECK(Grid::uniform(3, 8, 1.0)->powers_of_two());
}

TEST_CASE("wavenumbers run from -N/2 to N/2 - 1 in FFT order") {
  auto g = Grid::uniform(1, 8, 2 * pi);
  const auto& k = g->wavenumbers(0);
  const std::vector<double> expect{0, 1, 2, 3, -4, -3, -2, -1};
  for (std::size_t i = 0; i < 8; ++i) CHECK(k[i] == doctest::Approx(expect[i]));
  CHECK(g->is_nyquist(0, 4));
  CHECK_FALSE(g->is_nyquist(0, 3));
}

TEST_CASE("grid construction rejects bad shapes") {
  CHECK_THROWS_AS(Grid::create({3}, {1.0}), Error);
  CHECK_THROWS_AS(Grid::create({8, 8}, {1.0}), Error);
  CHECK_THROWS_AS(Grid::create({8}, {0.0}), Error);
  CHECK_THROWS_AS(Grid::create({8, 8, 8, 8}, {1, 1, 1, 1}), Error);
}

TEST_CASE("gradient of a sine is exact") {
  auto g = Grid::uniform(1, 32, L);
  auto f = sample(g, [](double x, double, double) { return std::sin(2 * pi * x / L); });
  auto d = spectral::gradient(f, 0);
  auto e = sample(g, [](double x, double, double) { return 2 * pi / L * std::cos(2 * pi * x / L); });
  CHECK(max_err(d, e) < 1e-12);
}

TEST_CASE("gradient of a constant is zero") {
  auto g = Grid::uniform(2, 16, L);
  RealField c(g, 3.7);
  for (int a = 0; a < 2; ++a) {
    auto d = spectral::gradient(c, a);
    for (double v : d.values()) CHECK(std::abs(v) < 1e-14);
  }
}

TEST_CASE("gradient along y of a separable product") {
  auto g = Grid::uniform(2, 32, L);
  auto f = sample(g, [](double x, double y, double) { return std::sin(2 * pi * x / L) * std::sin(4 * pi * y / L); });
  auto e = sample(g, [](double x, double y, double) {
    return std::sin(2 * pi * x / L) * (4 * pi / L) * std::cos(4 * pi * y / L);
  });
  CHECK(max_err(spectral::gradient(f, 1), e) < 1e-12);
}

TEST_CASE("gradient rejects an axis beyond the grid") {
  auto g = Grid::uniform(2, 8, L);
  RealField f(g);
  CHECK_THROWS_AS(spectral::gradient(f, 2), Error);
}

TEST_CASE("strained laplacian on single modes") {
  auto g = Grid::uniform(2, 16, L);
  const double k = 2 * pi * 3 / L;
  ComplexField ex(g), ey(g);
  for (std::size_t i = 0; i < g->size(); ++i) {
    ex[i] = std::polar(1.0, k * g->coordinates(0)[i]);
    ey[i] = std::polar(1.0, k * g->coordinates(1)[i]);
  }
  for (double h : {0.0, 1e-3, -0.2}) {
    auto lx = spectral::laplacian_strained(ex, h);
    auto ly = spectral::laplacian_strained(ey, h);
    for (std::size_t i = 0; i < g->size(); ++i) {
      CHECK(std::abs(lx[i] + k * k * (1 + h) * ex[i]) < 1e-11);
      CHECK(std::abs(ly[i] + k * k * (1 - h) * ey[i]) < 1e-11);
    }
  }
}

TEST_CASE("strained laplacian at h = 0 is bit-identical to the flat one") {
  auto g = Grid::uniform(2, 16, L);
  auto f = sample(g, [](double x, double y, double) { return std::exp(std::cos(x) + 0.3 * std::sin(2 * y)); });
  auto a = spectral::laplacian_strained(f, 0.0);
  auto b = spectral::laplacian(f);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("strained laplacian rejects |h| >= 1") {
  auto g = Grid::uniform(2, 8, L);
  RealField f(g, 1.0);
  CHECK_THROWS_AS(spectral::laplacian_strained(f, 1.0), Error);
  CHECK_THROWS_AS(spectral::laplacian_strained(f, -1.5), Error);
}

TEST_CASE("integrals") {
  auto g = Grid::create({16, 12, 8}, {2.0, 3.0, 4.0});
  CHECK(spectral::integrate(RealField(g, 1.0)) == doctest::Approx(24.0).epsilon(1e-15));
  auto s = sample(g, [](double x, double, double) { return std::sin(2 * pi * x / 2.0); });
  CHECK(std::abs(spectral::integrate(s)) < 1e-12 * 24.0);
  ComplexField e(g);
  for (std::size_t i = 0; i < g->size(); ++i) e[i] = std::polar(1.0, 2 * pi * g->coordinates(1)[i] / 3.0);
  CHECK(spectral::integrate_abs2_spectral(e) == doctest::Approx(24.0).epsilon(1e-12));
}

TEST_CASE("fields on different grids are rejected") {
  auto a = Grid::uniform(2, 8, 1.0);
  auto b = Grid::uniform(2, 8, 2.0);
  RealField fa(a, 1.0), fb(b, 1.0);
  CHECK_THROWS_AS(fa += fb, Error);
  try {
    check_same_grid(*a, *b);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::grid_mismatch);
  }
}

TEST_CASE("non power-of-two transforms work") {
  auto g = Grid::uniform(1, 12, L);
  auto f = sample(g, [](double x, double, double) { return std::cos(2 * pi * 2 * x / L); });
  auto d2 = spectral::second_derivative(f, 0);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(d2[i] == doctest::Approx(-std::pow(4 * pi / L, 2) * f[i]).epsilon(1e-10));
}
