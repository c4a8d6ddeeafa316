#include "gwbec/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gwbec/error.hpp"

namespace gwbec {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

void check_common(double h_max, double duration) {
  require(std::isfinite(h_max) && h_max >= 0, "waveform amplitude h_max must be >= 0");
  require(std::isfinite(duration) && duration > 0, "waveform duration must be > 0");
}

// Solves a tridiagonal system in place (Thomas algorithm). `lower[0]` and
// `upper[n-1]` are ignored.
std::vector<double> solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                                      std::vector<double> upper, std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
  return x;
}

}  // namespace

std::string_view to_string(WaveformKind kind) {
  switch (kind) {
    case WaveformKind::sinusoid: return "sinusoid";
    case WaveformKind::gaussian_pulse: return "gaussian_pulse";
    case WaveformKind::linear_chirp: return "linear_chirp";
    case WaveformKind::tabulated: return "tabulated";
  }
  return "unknown";
}

WaveformKind waveform_kind_from_string(std::string_view name) {
  for (auto k : {WaveformKind::sinusoid, WaveformKind::gaussian_pulse, WaveformKind::linear_chirp,
                 WaveformKind::tabulated}) {
    if (to_string(k) == name) return k;
  }
  fail(ErrorKind::invalid_argument, "unknown waveform kind '" + std::string(name) + "'");
}

StrainWaveform StrainWaveform::sinusoid(double h_max, double frequency, double phase,
                                        double duration) {
  check_common(h_max, duration);
  require(std::isfinite(frequency) && frequency > 0, "sinusoid frequency must be > 0");
  StrainWaveform w;
  w.kind_ = WaveformKind::sinusoid;
  w.params_ = {h_max, frequency, frequency, phase, 0.0, 0.0, duration};
  return w;
}

StrainWaveform StrainWaveform::gaussian_pulse(double h_max, double center, double width,
                                              double duration) {
  check_common(h_max, duration);
  require(std::isfinite(width) && width > 0, "pulse width must be > 0");
  require(std::isfinite(center), "pulse center must be finite");
  StrainWaveform w;
  w.kind_ = WaveformKind::gaussian_pulse;
  w.params_ = {h_max, 0.0, 0.0, 0.0, center, width, duration};
  return w;
}

StrainWaveform StrainWaveform::linear_chirp(double h_max, double f0, double f1, double phase,
                                            double duration) {
  check_common(h_max, duration);
  require(std::isfinite(f0) && f0 > 0, "chirp start frequency must be > 0");
  require(std::isfinite(f1) && f1 > 0, "chirp end frequency must be > 0");
  StrainWaveform w;
  w.kind_ = WaveformKind::linear_chirp;
  w.params_ = {h_max, f0, f1, phase, 0.0, 0.0, duration};
  return w;
}

StrainWaveform StrainWaveform::tabulated(std::vector<double> times, std::vector<double> values) {
  require(times.size() == values.size(), "tabulated waveform needs equally many times and values");
  require(times.size() >= 2, "tabulated waveform needs at least 2 samples");
  require(times.front() == 0.0, "tabulated waveform must start at t = 0");
  for (std::size_t i = 0; i < times.size(); ++i) {
    require(std::isfinite(times[i]) && std::isfinite(values[i]), "tabulated samples must be finite");
    if (i > 0) require(times[i] > times[i - 1], "tabulated times must be strictly increasing");
  }
  StrainWaveform w;
  w.kind_ = WaveformKind::tabulated;
  w.times_ = std::move(times);
  w.values_ = std::move(values);
  w.params_.duration = w.times_.back();
  w.fit_spline();
  return w;
}

StrainWaveform StrainWaveform::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open waveform table " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != "t,h") {
    fail(ErrorKind::io, "waveform table " + path.string() + " must start with header 't,h'");
  }
  std::vector<double> t, h;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      fail(ErrorKind::io, path.string() + ":" + std::to_string(lineno) + ": expected 't,h'");
    }
    try {
      std::size_t used = 0;
      const std::string a = trim(line.substr(0, comma)), b = trim(line.substr(comma + 1));
      t.push_back(std::stod(a, &used));
      if (used != a.size()) throw std::invalid_argument("trailing");
      h.push_back(std::stod(b, &used));
      if (used != b.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      fail(ErrorKind::io, path.string() + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return tabulated(std::move(t), std::move(h));
}

StrainWaveform StrainWaveform::make(WaveformKind kind, const WaveformParams& p) {
  switch (kind) {
    case WaveformKind::sinusoid: return sinusoid(p.h_max, p.frequency, p.phase, p.duration);
    case WaveformKind::gaussian_pulse: return gaussian_pulse(p.h_max, p.center, p.width, p.duration);
    case WaveformKind::linear_chirp:
      return linear_chirp(p.h_max, p.frequency, p.frequency_end > 0 ? p.frequency_end : p.frequency,
                          p.phase, p.duration);
    case WaveformKind::tabulated:
      fail(ErrorKind::invalid_argument, "tabulated waveforms are built from samples, not parameters");
  }
  fail(ErrorKind::invalid_argument, "unknown waveform kind");
}

void StrainWaveform::fit_spline() {
  const std::size_t n = times_.size();
  second_.assign(n, 0.0);
  std::vector<double> dt(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) dt[i] = times_[i + 1] - times_[i];

  if (n == 3) {
    // Not-a-knot with three points is the interpolating parabola.
    const double s0 = (values_[1] - values_[0]) / dt[0];
    const double s1 = (values_[2] - values_[1]) / dt[1];
    const double curvature = 2.0 * (s1 - s0) / (dt[0] + dt[1]);
    second_.assign(3, curvature);
  } else if (n >= 4) {
    // Unknowns M_1..M_{n-2}; M_0 and M_{n-1} eliminated with not-a-knot.
    const std::size_t m = n - 2;
    std::vector<double> lower(m), diag(m), upper(m), rhs(m);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = k + 1;
      lower[k] = dt[i - 1];
      diag[k] = 2.0 * (dt[i - 1] + dt[i]);
      upper[k] = dt[i];
      rhs[k] = 6.0 * ((values_[i + 1] - values_[i]) / dt[i] - (values_[i] - values_[i - 1]) / dt[i - 1]);
    }
    const double h0 = dt[0], h1 = dt[1];
    diag[0] = (h0 + h1) * (h0 + 2.0 * h1) / h1;
    upper[0] = (h1 * h1 - h0 * h0) / h1;
    const double ha = dt[n - 3], hb = dt[n - 2];
    lower[m - 1] = (ha * ha - hb * hb) / ha;
    diag[m - 1] = (ha + hb) * (2.0 * ha + hb) / ha;
    const auto inner = solve_tridiagonal(lower, diag, upper, rhs);
    for (std::size_t k = 0; k < m; ++k) second_[k + 1] = inner[k];
    second_[0] = ((h0 + h1) * second_[1] - h0 * second_[2]) / h1;
    second_[n - 1] = ((ha + hb) * second_[n - 2] - hb * second_[n - 3]) / ha;
  }

  // Exact max |s(t)| over each cubic piece: endpoints plus interior extrema.
  double peak = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = dt[i];
    const double a0 = values_[i];
    const double c = second_[i] / 2.0;
    const double d = (second_[i + 1] - second_[i]) / (6.0 * h);
    const double b = (values_[i + 1] - values_[i]) / h - h * (2.0 * second_[i] + second_[i + 1]) / 6.0;
    auto eval = [&](double u) { return a0 + u * (b + u * (c + u * d)); };
    peak = std::max({peak, std::abs(values_[i]), std::abs(values_[i + 1])});
    // Roots of b + 2 c u + 3 d u^2.
    std::vector<double> roots;
    if (std::abs(d) > 0) {
      const double disc = 4 * c * c - 12 * d * b;
      if (disc >= 0) {
        const double sq = std::sqrt(disc);
        roots = {(-2 * c + sq) / (6 * d), (-2 * c - sq) / (6 * d)};
      }
    } else if (std::abs(c) > 0) {
      roots = {-b / (2 * c)};
    }
    for (double u : roots) {
      if (u > 0 && u < h) peak = std::max(peak, std::abs(eval(u)));
    }
  }
  params_.h_max = peak;
}

StrainSample StrainWaveform::sample_spline(double t) const {
  const std::size_t n = times_.size();
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t i = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  if (i >= n - 1) i = n - 2;
  const double h = times_[i + 1] - times_[i];
  if (t == times_[i]) {
    // Exact knot value, no interpolation rounding.
    const double slope = (values_[i + 1] - values_[i]) / h - h * (2.0 * second_[i] + second_[i + 1]) / 6.0;
    return {values_[i], slope, second_[i]};
  }
  const double a = (times_[i + 1] - t) / h;
  const double b = (t - times_[i]) / h;
  const double mi = second_[i], mj = second_[i + 1];
  StrainSample s;
  s.h = a * values_[i] + b * values_[i + 1] + ((a * a * a - a) * mi + (b * b * b - b) * mj) * h * h / 6.0;
  s.hdot = (values_[i + 1] - values_[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * mi +
           (3.0 * b * b - 1.0) / 6.0 * h * mj;
  s.hddot = a * mi + b * mj;
  return s;
}

StrainSample StrainWaveform::sample(double t) const {
  const double slack = 1e-12 * std::max(1.0, params_.duration);
  if (!(t >= -slack && t <= params_.duration + slack)) {
    std::ostringstream os;
    os << "strain sampled at t=" << t << " outside [0, " << params_.duration << "]";
    fail(ErrorKind::out_of_range, os.str());
  }
  t = std::clamp(t, 0.0, params_.duration);
  const auto& p = params_;
  if (p.h_max == 0.0) return {};
  switch (kind_) {
    case WaveformKind::sinusoid: {
      const double w = two_pi * p.frequency;
      const double arg = w * t + p.phase;
      const double s = std::sin(arg), c = std::cos(arg);
      return {p.h_max * s, p.h_max * w * c, -p.h_max * w * w * s};
    }
    case WaveformKind::gaussian_pulse: {
      const double u = (t - p.center) / p.width;
      const double g = p.h_max * std::exp(-0.5 * u * u);
      const double inv_w = 1.0 / p.width;
      return {g, -u * inv_w * g, (u * u - 1.0) * inv_w * inv_w * g};
    }
    case WaveformKind::linear_chirp: {
      const double rate = (p.frequency_end - p.frequency) / p.duration;
      const double theta = p.phase + two_pi * (p.frequency * t + 0.5 * rate * t * t);
      const double dtheta = two_pi * (p.frequency + rate * t);
      const double ddtheta = two_pi * rate;
      const double s = std::sin(theta), c = std::cos(theta);
      return {p.h_max * s, p.h_max * c * dtheta, p.h_max * (-s * dtheta * dtheta + c * ddtheta)};
    }
    case WaveformKind::tabulated: return sample_spline(t);
  }
  return {};
}

StrainWaveform StrainWaveform::scaled(double factor) const {
  require(std::isfinite(factor) && factor >= 0, "waveform scale factor must be >= 0");
  StrainWaveform w = *this;
  w.params_.h_max *= factor;
  for (auto& v : w.values_) v *= factor;
  for (auto& v : w.second_) v *= factor;
  return w;
}

std::string StrainWaveform::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(h_max=" << params_.h_max;
  switch (kind_) {
    case WaveformKind::sinusoid:
      os << ", f=" << params_.frequency << ", phase=" << params_.phase;
      break;
    case WaveformKind::gaussian_pulse:
      os << ", center=" << params_.center << ", width=" << params_.width;
      break;
    case WaveformKind::linear_chirp:
      os << ", f0=" << params_.frequency << ", f1=" << params_.frequency_end;
      break;
    case WaveformKind::tabulated: os << ", samples=" << times_.size(); break;
  }
  os << ", duration=" << params_.duration << ")";
  return os.str();
}

}  // namespace gwbec
