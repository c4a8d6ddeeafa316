#include "doctest.h"

#include <cmath>
#include <random>

#include "gwbec/detect.hpp"

using namespace gwbec;

TEST_CASE("NOON linearization error is at most (N eps)^2 / 2") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double N = std::floor(std::pow(10.0, 6 * u(rng))) + 1;
    const double eps = std::pow(10.0, -12 + 10 * u(rng)) / N;  // N eps < 1
    const auto f = noon_fidelity(eps, N);
    const double x = N * eps;
    CHECK(f.exact - f.linearized >= -1e-15);
    CHECK(f.exact - f.linearized <= 0.5 * x * x * (1 + 1e-9) + 1e-15);
    CHECK(f.exact <= 1.0);
  }
}

TEST_CASE("incoherent loss never exceeds the coherent one") {
  std::mt19937_64 rng(62);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double N = std::pow(10.0, 8 * u(rng)), eps = u(rng);
    CHECK(N * eps * eps <= N * eps);
  }
}

TEST_CASE("hierarchy is strictly decreasing for 1 < n < N and h > 0") {
  std::mt19937_64 rng(63);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double N = std::pow(10.0, 2 + 10 * u(rng));
    const double n = 1.5 + (N - 3) * u(rng) * u(rng);
    const auto r = hierarchy_estimates(N, n, std::pow(10.0, -25 + 20 * u(rng)));
    CHECK(r.strictly_decreasing);
    CHECK_FALSE(r.degenerate);
    CHECK_FALSE(r.boundary);
  }
}

TEST_CASE("phase shift is linear in the strain amplitude") {
  std::mt19937_64 rng(64);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> t, q;
  const double T = 10.0;
  for (int i = 0; i <= 1000; ++i) {
    t.push_back(T * i / 1000.0);
    q.push_back(1 + std::sin(0.7 * t.back()) + 0.3 * std::cos(2.1 * t.back()));
  }
  for (int trial = 0; trial < 50; ++trial) {
    const double h = std::pow(10.0, -9 + 8 * u(rng)), a = 0.1 + 10 * u(rng), f = 0.1 + u(rng);
    const auto w = StrainWaveform::sinusoid(h, f, 0.0, T);
    const double p1 = quadrupole_phase_shift(t, q, w, 1.0);
    const double pa = quadrupole_phase_shift(t, q, w.scaled(a), 1.0);
    CHECK(pa == doctest::Approx(a * p1).epsilon(1e-12));
    CHECK(std::abs(p1) <= energy_bound_sim(T, h, 2.3, 1.0));  // max |Q| = 2.3 here
  }
}

TEST_CASE("bounds are linear in each of T, h and E") {
  std::mt19937_64 rng(65);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double T = u(rng), h = u(rng) * 1e-21, E = u(rng), k = u(rng);
    const double b = energy_bound(T, h, E);
    CHECK(energy_bound(k * T, h, E) == doctest::Approx(k * b).epsilon(1e-13));
    CHECK(energy_bound(T, k * h, E) == doctest::Approx(k * b).epsilon(1e-13));
    CHECK(energy_bound(T, h, k * E) == doctest::Approx(k * b).epsilon(1e-13));
  }
}
