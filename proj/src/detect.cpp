#include "gwbec/detect.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "gwbec/dynamics.hpp"
#include "gwbec/error.hpp"
#include "gwbec/units.hpp"

namespace gwbec {

double simpson(const std::vector<double>& f, double dx) {
  const std::size_t n = f.size() < 2 ? 0 : f.size() - 1;  // intervals
  if (n == 0) return 0.0;
  if (n == 1) return 0.5 * dx * (f[0] + f[1]);
  auto simpson_even = [&](std::size_t last) {
    double s = f[0] + f[last];
    for (std::size_t i = 1; i < last; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
    return s * dx / 3.0;
  };
  if (n % 2 == 0) return simpson_even(n);
  const std::size_t m = n - 3;
  const double head = m > 0 ? simpson_even(m) : 0.0;
  const double tail = 3.0 * dx / 8.0 * (f[m] + 3.0 * f[m + 1] + 3.0 * f[m + 2] + f[m + 3]);
  return head + tail;
}

double quadrupole_phase_shift(const std::vector<double>& times, const std::vector<double>& Q,
                              const StrainWaveform& waveform, double hbar) {
  require(times.size() == Q.size(), "time and Q series differ in length");
  require(hbar > 0.0, "hbar must be positive");
  if (times.size() < 2) return 0.0;
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) fail(ErrorKind::out_of_range, "Q series must have increasing time stamps");
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double expect = times.front() + static_cast<double>(i) * dt;
    if (std::abs(times[i] - expect) > 1e-9 * std::max(1.0, std::abs(expect))) {
      fail(ErrorKind::out_of_range, "Q series is not uniformly sampled");
    }
  }
  const double slack = 1e-12 * std::max(1.0, waveform.duration());
  if (times.front() < -slack || times.back() > waveform.duration() + slack) {
    std::ostringstream os;
    os << "trajectory span [" << times.front() << ", " << times.back()
       << "] leaves the waveform domain [0, " << waveform.duration() << "]";
    fail(ErrorKind::out_of_range, os.str());
  }
  std::vector<double> f(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) f[i] = waveform.h(times[i]) * Q[i];
  return 0.0 - simpson(f, dt) / hbar;  // no negative zero in reports
}

double quadrupole_phase_shift(const Trajectory& reference, const StrainWaveform& waveform, double hbar) {
  std::vector<double> q;
  q.reserve(reference.series.size());
  for (const auto& o : reference.series) q.push_back(o.Q);
  return quadrupole_phase_shift(reference.times, q, waveform, hbar);
}

FidelityCorrection fidelity_first_order(double phi) {
  FidelityCorrection f;
  f.deviation = std::abs(phi);
  f.imaginary_part = -phi;
  f.purely_imaginary = true;
  f.expansion_warning = std::abs(phi) > 0.3;
  return f;
}

double energy_bound(double T_s, double h_max, double E_eV) {
  return energy_bound_sim(T_s, h_max, E_eV, constants::hbar_eV_s);
}

double trap_bound(double T_s, double h_max, double N, double dVdh_eV) {
  return trap_bound_sim(T_s, h_max, N, dVdh_eV, constants::hbar_eV_s);
}

double energy_bound_sim(double T, double h_max, double E, double hbar) {
  require(T >= 0.0 && h_max >= 0.0 && E >= 0.0, "bound inputs must be non-negative");
  require(hbar > 0.0, "hbar must be positive");
  return T * h_max * E / hbar;
}

double trap_bound_sim(double T, double h_max, double N, double dVdh, double hbar) {
  require(N >= 0.0 && dVdh >= 0.0, "bound inputs must be non-negative");
  return energy_bound_sim(T, h_max, N * dVdh, hbar);
}

double kinetic_energy_estimate(double N, double v_m_s, double mass_kg) {
  require(N >= 0.0 && mass_kg > 0.0, "kinetic estimate needs N >= 0 and a positive mass");
  return N * kinetic_energy_per_atom_eV(mass_kg, v_m_s);
}

Hierarchy hierarchy_estimates(double N, double n, double h) {
  require(n >= 0.0, "phonon number must be non-negative");
  require(n <= N, "phonon number exceeds atom number");
  require(h >= 0.0, "strain must be non-negative");
  Hierarchy r;
  r.hN = h * N;
  r.h_sqrt_nN = h * std::sqrt(n * N);
  r.hn = h * n;
  r.h = h;
  r.strictly_decreasing = r.hN > r.h_sqrt_nN && r.h_sqrt_nN > r.hn && r.hn > r.h;
  r.degenerate = n == 0.0;
  r.boundary = n == N;
  return r;
}

NoonFidelity noon_fidelity(double epsilon, double N) {
  require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon must lie in [0, 1]");
  require(N >= 0.0, "N must be non-negative");
  NoonFidelity f;
  f.exact = epsilon == 1.0 ? (N == 0.0 ? 1.0 : 0.0) : std::exp(N * std::log1p(-epsilon));
  f.linearized = 1.0 - N * epsilon;
  return f;
}

std::optional<double> DetectionReport::margin_energy() const {
  if (!phi || *phi == 0.0) return std::nullopt;
  return bound_energy / std::abs(*phi);
}

std::optional<double> DetectionReport::margin_trap() const {
  if (!phi || *phi == 0.0) return std::nullopt;
  return bound_trap / std::abs(*phi);
}

std::string DetectionReport::to_json() const {
  using nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  ordered_json j;
  j["inputs"] = {{"waveform", waveform},
                 {"T_s", T_s},
                 {"h_max", h_max},
                 {"N", N},
                 {"n", n},
                 {"n_source", n_source},
                 {"E_total_eV", E_total_eV},
                 {"E_kin_eV", E_kin_eV},
                 {"dVdh_eV", dVdh_eV},
                 {"noon_epsilon", opt(noon_epsilon)},
                 {"hbar_eV_s", constants::hbar_eV_s}};
  j["phi"] = opt(phi);
  j["fidelity"] = {{"deviation", fidelity.deviation},
                   {"correction_imag", fidelity.imaginary_part},
                   {"purely_imaginary", fidelity.purely_imaginary},
                   {"expansion_warning", fidelity.expansion_warning}};
  j["bound_energy"] = bound_energy;
  j["bound_trap"] = bound_trap;
  j["margins"] = {{"energy", opt(margin_energy())}, {"trap", opt(margin_trap())}};
  j["hierarchy"] = {{"hN", hierarchy.hN},
                    {"h_sqrt_nN", hierarchy.h_sqrt_nN},
                    {"hn", hierarchy.hn},
                    {"h", hierarchy.h},
                    {"strictly_decreasing", hierarchy.strictly_decreasing},
                    {"degenerate", hierarchy.degenerate},
                    {"boundary", hierarchy.boundary}};
  if (noon) {
    j["noon"] = {{"exact", noon->exact},
                 {"linearized", noon->linearized},
                 {"difference", noon->exact - noon->linearized},
                 {"incoherent_over_coherent", *noon_epsilon}};
  } else {
    j["noon"] = nullptr;
  }
  j["notes"] = notes;
  return j.dump(2) + "\n";
}

std::string DetectionReport::csv_header() {
  return "scenario,phi,bound_energy,bound_trap,margin_energy,margin_trap,hN,h_sqrt_nN,hn,h";
}

std::string DetectionReport::csv_row(const std::string& scenario) const {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  std::ostringstream os;
  os << scenario << ',' << opt(phi) << ',' << num(bound_energy) << ',' << num(bound_trap) << ','
     << opt(margin_energy()) << ',' << opt(margin_trap()) << ',' << num(hierarchy.hN) << ','
     << num(hierarchy.h_sqrt_nN) << ',' << num(hierarchy.hn) << ',' << num(hierarchy.h);
  return os.str();
}

DetectionReport bounds_report(const BoundsInput& in) {
  require(in.T_s > 0.0, "T must be positive");
  require(in.N >= 1.0, "N must be at least 1");
  DetectionReport r;
  r.waveform = "none";
  r.T_s = in.T_s;
  r.h_max = in.h_max;
  r.N = in.N;
  r.n = in.n;
  r.E_total_eV = in.E_eV;
  r.dVdh_eV = in.dVdh_eV;
  r.bound_energy = energy_bound(in.T_s, in.h_max, in.E_eV);
  r.bound_trap = trap_bound(in.T_s, in.h_max, in.N, in.dVdh_eV);
  r.hierarchy = hierarchy_estimates(in.N, in.n, in.h_max);
  r.notes.push_back("phase shift not evaluated: no trajectory");
  return r;
}

void check_phase_bound(const DetectionReport& report) {
  if (!report.phi) return;
  const double limit = report.bound_energy * (1.0 + 1e-9) + 1e-300;
  if (std::abs(*report.phi) > limit) {
    std::ostringstream os;
    os.precision(17);
    os << "|phi| = " << std::abs(*report.phi) << " exceeds the energy bound " << report.bound_energy;
    fail(ErrorKind::invariant, os.str());
  }
}

}  // namespace gwbec
