#include "doctest.h"

#include <cmath>
#include <numbers>

#include "gwbec/error.hpp"
#include "gwbec/waveform.hpp"
#include "oracles.hpp"

using namespace gwbec;
using std::numbers::pi;

TEST_CASE("sinusoid starts at zero and peaks at a quarter period") {
  auto w = StrainWaveform::sinusoid(1e-3, 1.0, 0.0, 10.0);
  const auto s0 = w.sample(0.0);
  CHECK(s0.h == 0.0);
  CHECK(s0.hdot == doctest::Approx(2 * pi * 1e-3));
  CHECK(std::abs(s0.hddot) < 1e-18);
  CHECK(w.h(0.25) == doctest::Approx(1e-3).epsilon(1e-15));
}

TEST_CASE("gaussian pulse peaks at its centre") {
  auto w = StrainWaveform::gaussian_pulse(1e-3, 5.0, 1.0, 10.0);
  CHECK(w.h(5.0) == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(w.h(0.0) < 1.4e-8);
  CHECK(w.h(0.0) == doctest::Approx(1e-3 * std::exp(-12.5)).epsilon(1e-12));
}

TEST_CASE("zero amplitude gives zero samples") {
  for (auto w : {StrainWaveform::sinusoid(0.0, 2.0, 0.3, 5.0), StrainWaveform::gaussian_pulse(0.0, 2.0, 1.0, 5.0),
                 StrainWaveform::linear_chirp(0.0, 1.0, 2.0, 0.0, 5.0)}) {
    for (double t : {0.0, 1.3, 5.0}) {
      const auto s = w.sample(t);
      CHECK(s.h == 0.0);
      CHECK(s.hdot == 0.0);
      CHECK(s.hddot == 0.0);
    }
  }
}

TEST_CASE("construction rejects bad parameters") {
  CHECK_THROWS_AS(StrainWaveform::sinusoid(-1e-3, 1.0, 0.0, 1.0), Error);
  CHECK_THROWS_AS(StrainWaveform::sinusoid(1e-3, 1.0, 0.0, 0.0), Error);
  CHECK_THROWS_AS(StrainWaveform::sinusoid(1e-3, 0.0, 0.0, 1.0), Error);
  CHECK_THROWS_AS(StrainWaveform::tabulated({0.0}, {1.0}), Error);
  CHECK_THROWS_AS(StrainWaveform::tabulated({0.0, 1.0, 1.0}, {1.0, 2.0, 3.0}), Error);
  CHECK_THROWS_AS(StrainWaveform::tabulated({0.5, 1.0}, {1.0, 2.0}), Error);
}

TEST_CASE("sampling outside the domain is an error") {
  auto w = StrainWaveform::sinusoid(1e-3, 1.0, 0.0, 2.0);
  try {
    w.sample(2.5);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::out_of_range);
  }
  CHECK_THROWS_AS(w.sample(-0.1), Error);
  CHECK_NOTHROW(w.sample(2.0 + 1e-13));
}

TEST_CASE("tabulated waveform through a cubic reproduces the cubic") {
  // Not-a-knot splines are exact for cubics, so the polynomial is the oracle.
  auto p = [](double t) { return 1e-4 * (0.5 + t - 0.3 * t * t + 0.05 * t * t * t); };
  auto dp = [](double t) { return 1e-4 * (1.0 - 0.6 * t + 0.15 * t * t); };
  auto ddp = [](double t) { return 1e-4 * (-0.6 + 0.3 * t); };
  std::vector<double> ts, hs;
  for (double t : {0.0, 0.7, 1.5, 2.0, 3.1, 4.0, 5.5}) {
    ts.push_back(t);
    hs.push_back(p(t));
  }
  auto w = StrainWaveform::tabulated(ts, hs);
  for (std::size_t i = 0; i < ts.size(); ++i) CHECK(w.h(ts[i]) == hs[i]);
  for (double t : {0.1, 1.0, 2.6, 4.9, 5.5}) {
    const auto s = w.sample(t);
    CHECK(s.h == doctest::Approx(p(t)).epsilon(1e-12));
    CHECK(s.hdot == doctest::Approx(dp(t)).epsilon(1e-10));
    CHECK(s.hddot == doctest::Approx(ddp(t)).epsilon(1e-9));
  }
}

TEST_CASE("tabulated h_max is the peak of the interpolant") {
  auto w = StrainWaveform::tabulated({0.0, 1.0, 2.0, 3.0}, {0.0, 1.0, 1.0, 0.0});
  double peak = 0.0;
  for (int i = 0; i <= 30000; ++i) peak = std::max(peak, std::abs(w.h(3.0 * i / 30000.0)));
  CHECK(w.h_max() >= peak - 1e-15);
  CHECK(w.h_max() == doctest::Approx(peak).epsilon(1e-8));
}

TEST_CASE("csv tables load with a t,h header") {
  oracle::TempDir dir("wf");
  oracle::write_file(dir.path() / "ok.csv", "t,h\n0,0\n1,1e-3\n2,0\n");
  auto w = StrainWaveform::from_csv(dir.path() / "ok.csv");
  CHECK(w.h(1.0) == 1e-3);
  oracle::write_file(dir.path() / "bad.csv", "time,strain\n0,0\n1,1\n");
  CHECK_THROWS_AS(StrainWaveform::from_csv(dir.path() / "bad.csv"), Error);
  CHECK_THROWS_AS(StrainWaveform::from_csv(dir.path() / "missing.csv"), Error);
}

TEST_CASE("scaled copies multiply the amplitude") {
  auto w = StrainWaveform::linear_chirp(2e-3, 0.5, 1.5, 0.2, 4.0);
  auto s = w.scaled(0.5);
  CHECK(s.h_max() == doctest::Approx(1e-3));
  for (double t : {0.0, 1.1, 3.9}) CHECK(s.h(t) == doctest::Approx(0.5 * w.h(t)).epsilon(1e-15));
  CHECK_THROWS_AS(w.scaled(-1.0), Error);
}

TEST_CASE("chirp frequency sweeps linearly") {
  // Instantaneous angular frequency 2 pi (f0 + (f1 - f0) t / T) from hdot at zeros.
  auto w = StrainWaveform::linear_chirp(1.0, 1.0, 3.0, 0.0, 2.0);
  CHECK(w.sample(0.0).hdot == doctest::Approx(2 * pi * 1.0));
  CHECK(w.h(2.0) == doctest::Approx(std::sin(2 * pi * (2.0 + 2.0))).epsilon(1e-12));
}

TEST_CASE("kinds round trip through their names") {
  for (auto k : {WaveformKind::sinusoid, WaveformKind::gaussian_pulse, WaveformKind::linear_chirp,
                 WaveformKind::tabulated}) {
    CHECK(waveform_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(waveform_kind_from_string("square"), Error);
}
