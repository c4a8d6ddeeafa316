#include "gwbec/scenario.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gwbec/dynamics.hpp"
#include "gwbec/field_io.hpp"
#include "gwbec/phonon.hpp"

#ifndef GWBEC_VERSION
#define GWBEC_VERSION "0.0.0"
#endif

namespace gwbec {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ordered_json jnum(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

std::string observables_csv(const Trajectory& tr) {
  std::ostringstream os;
  os << "t,N,E_kin,E_int,E_pot,E_total,Q,Lz\n";
  for (std::size_t k = 0; k < tr.series.size(); ++k) {
    const auto& o = tr.series[k];
    os << num(tr.times[k]) << ',' << num(o.N) << ',' << num(o.E_kin) << ',' << num(o.E_int) << ','
       << num(o.E_pot) << ',' << num(o.E_total) << ',' << num(o.Q) << ',' << num(o.Lz) << '\n';
  }
  return os.str();
}

std::string strain_csv(const Trajectory& tr) {
  std::ostringstream os;
  os << "t,h,hdot,hddot\n";
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    os << num(tr.times[k]) << ',' << num(tr.strain[k].h) << ',' << num(tr.strain[k].hdot) << ','
       << num(tr.strain[k].hddot) << '\n';
  }
  return os.str();
}

RealField density(const ComplexField& psi) {
  RealField r(psi.grid());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::norm(psi[i]);
  return r;
}

double max_abs(const RealField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

std::string step_tag(std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06zu", k);
  return buf;
}

void apply_envelope(CondensateState& s, double radius) {
  const auto& g = *s.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coordinates(0)[i];
    const double y = g.coordinates(1)[i];
    const double q = (x * x + y * y) / (radius * radius);
    s.psi[i] *= std::exp(-q * q);
  }
}

RealField obstacle_potential(const GridPtr& grid, double height, double width) {
  RealField V(grid);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    double r2 = 0.0;
    for (int a = 0; a < grid->dim(); ++a) r2 += grid->coordinates(a)[i] * grid->coordinates(a)[i];
    V[i] = height * std::exp(-r2 / (2.0 * width * width));
  }
  return V;
}

bool at_rest_homogeneous(const BackgroundFlow& bg) {
  if (!bg.is_homogeneous()) return false;
  for (const auto& v : bg.v0) {
    if (max_abs(v) != 0.0) return false;
  }
  return true;
}

class Manifest {
 public:
  Manifest(fs::path dir, const ScenarioConfig& c) : path_(std::move(dir) / "manifest.json") {
    j_["name"] = c.name;
    j_["version"] = {{"gwbec", GWBEC_VERSION}, {"fftw", std::string(fftw_version)}, {"compiler", __VERSION__}};
    j_["seed"] = c.seed;
    j_["config"] = ordered_json::parse(to_json(c));
    j_["status"] = "running";
    j_["stage"] = "prepare";
    j_["message"] = "";
    j_["derived"] = ordered_json::object();
    j_["artifacts"] = ordered_json::array();
    j_["notes"] = ordered_json::array();
  }
  ordered_json& derived() { return j_["derived"]; }
  void artifact(const std::string& name) { j_["artifacts"].push_back(name); }
  void note(const std::string& text) { j_["notes"].push_back(text); }
  void stage(const std::string& s) {
    j_["stage"] = s;
    write();
  }
  void finish(const std::string& status, const std::string& message) {
    j_["status"] = status;
    j_["message"] = message;
    write();
  }
  void write() const { write_text(path_, j_.dump(2) + "\n"); }

 private:
  fs::path path_;
  ordered_json j_;
};

void prepare_output(const fs::path& dir, bool overwrite) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir)) fail(ErrorKind::invalid_argument, "output path " + dir.string() + " is not a directory");
    if (!fs::is_empty(dir)) {
      if (!overwrite) {
        fail(ErrorKind::invalid_argument, "output directory " + dir.string() +
                                              " is not empty; choose a fresh directory or set overwrite");
      }
      if (!fs::exists(dir / "manifest.json")) {
        fail(ErrorKind::invalid_argument,
             "refusing to overwrite " + dir.string() + ": it does not hold a previous run (no manifest.json)");
      }
      for (const auto& entry : fs::directory_iterator(dir)) fs::remove_all(entry.path());
    }
  }
  fs::create_directories(dir);
}

struct Context {
  const ScenarioConfig& c;
  fs::path dir;
  Manifest& manifest;
  PreparedBackground bg;
  std::optional<StrainWaveform> waveform;
  Timing timing;
  const RealField* V = nullptr;
  std::optional<Trajectory> reference;
  std::optional<Trajectory> driven;
  std::optional<PhononContent> linear_content;
  bool stationary_warning = false;
};

Trajectory run_reference(Context& x) {
  EvolutionConfig ec;
  ec.dt = x.timing.dt;
  ec.n_steps = x.timing.steps;
  ec.scheme = Scheme::flat;
  if (x.V) ec.potential = *x.V;
  ec.check_invariants = x.c.evolution.check_invariants;
  ec.snapshot_stride = x.c.evolution.snapshot_stride;
  return evolve(x.bg.state, ec);
}

Trajectory run_driven(Context& x, const StrainWaveform& wf, Scheme scheme, std::size_t stride) {
  EvolutionConfig ec;
  ec.dt = x.timing.dt;
  ec.n_steps = x.timing.steps;
  ec.scheme = scheme;
  ec.waveform = wf;
  if (x.V) ec.potential = *x.V;
  ec.check_invariants = x.c.evolution.check_invariants;
  ec.snapshot_stride = stride;
  return evolve(x.bg.state, ec);
}

void run_nonlinear(Context& x) {
  const auto& c = x.c;
  if (!x.reference) x.reference = run_reference(x);
  write_text(x.dir / "reference_observables.csv", observables_csv(*x.reference));
  x.manifest.artifact("reference_observables.csv");

  const Trajectory* main = &*x.reference;
  if (c.evolution.scheme != Scheme::flat) {
    x.driven = run_driven(x, *x.waveform, c.evolution.scheme, c.evolution.snapshot_stride);
    main = &*x.driven;
  }
  write_text(x.dir / "observables.csv", observables_csv(*main));
  write_text(x.dir / "strain.csv", strain_csv(*main));
  x.manifest.artifact("observables.csv");
  x.manifest.artifact("strain.csv");

  const fs::path snaps = x.dir / "snapshots";
  fs::create_directories(snaps);
  const std::size_t stride = c.evolution.snapshot_stride;
  for (std::size_t j = 0; j < main->snapshots.size(); ++j) {
    const std::size_t k = j * stride;
    const auto& s = main->snapshots[j];
    write_field(snaps / ("density_" + step_tag(k)), density(s.psi), "density", s.t);
    x.manifest.artifact("snapshots/density_" + step_tag(k));
    if (x.driven && j < x.reference->snapshots.size()) {
      const auto d = difference(s, x.reference->snapshots[j]);
      write_field(snaps / ("drho_" + step_tag(k)), d.drho, "drho", s.t);
      x.manifest.artifact("snapshots/drho_" + step_tag(k));
    }
  }
  write_field(snaps / "psi_final", main->final_state.psi, "psi", main->final_state.t);
  x.manifest.artifact("snapshots/psi_final");
  if (x.driven) {
    const auto d = difference(x.driven->final_state, x.reference->final_state);
    write_field(snaps / "drho_final", d.drho, "drho", main->final_state.t);
    x.manifest.artifact("snapshots/drho_final");
    x.manifest.derived()["nonlinear_drho_max"] = jnum(max_abs(d.drho));
  }
}

struct LinearRun {
  Perturbation final;
  std::vector<std::array<double, 6>> rows;  // t, h, max drho, max dS, energy, int drho
  std::vector<Perturbation> snapshots;
  std::vector<std::size_t> snapshot_steps;
};

LinearRun drive_linear(const LinearOperator& op, const SourceTerms& unit, const StrainWaveform& wf, double dt,
                       std::size_t steps, std::size_t stride, bool record) {
  LinearRun r;
  Perturbation p = zero_perturbation(op.background().grid());
  const double dv = op.background().grid()->cell_volume();
  auto log = [&](const Perturbation& q) {
    if (!record) return;
    double s = 0.0;
    for (double v : q.drho.values()) s += v;
    r.rows.push_back({q.t, wf.h(q.t), max_abs(q.drho), max_abs(q.dS), op.energy(q), s * dv});
  };
  log(p);
  for (std::size_t k = 1; k <= steps; ++k) {
    p = step_linear(p, op, unit, wf, dt);
    p.t = static_cast<double>(k) * dt;
    for (double v : p.drho.values()) {
      if (!std::isfinite(v)) fail(ErrorKind::numerical, "linear evolution produced a non-finite value at step " + std::to_string(k));
    }
    log(p);
    if (stride > 0 && k % stride == 0) {
      r.snapshots.push_back(p);
      r.snapshot_steps.push_back(k);
    }
  }
  r.final = std::move(p);
  return r;
}

std::pair<double, std::size_t> linear_timing(const LinearOperator& op, double requested, double fraction, double span) {
  double dt = requested > 0.0 ? requested : fraction * std::min(op.cfl_limit(), op.spectral_limit());
  if (!std::isfinite(dt)) dt = span / 100.0;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt - 1e-9)));
  dt = span / static_cast<double>(steps);
  op.check_time_step(dt);
  return {dt, steps};
}

BackgroundFlow make_background(Context& x) {
  auto bg = background_from(x.bg.state, x.V);
  x.manifest.derived()["continuity_residual"] = jnum(bg.continuity_residual);
  x.manifest.derived()["bernoulli_residual"] = jnum(bg.bernoulli_residual);
  if (!bg.warning.empty() && !x.stationary_warning) {
    x.manifest.note(bg.warning);
    x.stationary_warning = true;
  }
  return bg;
}

// Notes how many points the linear model treats as vacuum.
void note_vacuum(Context& x, const LinearOperator& op, const char* stage) {
  std::size_t n = 0;
  const std::size_t total = op.background().rho0.size();
  for (std::size_t i = 0; i < total; ++i) n += op.active(i) ? 0 : 1;
  if (n == 0) return;
  std::ostringstream os;
  os << stage << ": " << n << " of " << total << " points lie below the density floor "
     << op.options().density_floor << " and are held as vacuum";
  x.manifest.note(os.str());
}

void check_mach(const LinearOperator& op) {
  if (!op.options().quantum_pressure && op.max_mach() > 1.0) {
    std::ostringstream os;
    os << "background flow is supersonic somewhere (max Mach " << op.max_mach()
       << "); the linearised system without quantum pressure has growing modes there; set linear.quantum_pressure = true";
    fail(ErrorKind::invalid_argument, os.str());
  }
}

// Atom number is conserved when the density source integrates to zero.
bool source_conserves(const SourceTerms& s) {
  double sum = 0.0, mag = 0.0;
  for (double v : s.F_rho.values()) {
    sum += v;
    mag += std::abs(v);
  }
  return std::abs(sum) <= 1e-12 * mag || mag == 0.0;
}

void check_drho_integral(const LinearRun& run, const std::string& what) {
  const auto& p = run.final;
  double sum = 0.0, mag = 0.0;
  for (double v : p.drho.values()) {
    sum += v;
    mag += std::abs(v);
  }
  if (std::abs(sum) > 1e-10 * mag) {
    std::ostringstream os;
    os.precision(6);
    os << what << ": integral of drho drifted to " << std::abs(sum) / mag << " of its L1 norm (limit 1e-10)";
    fail(ErrorKind::invariant, os.str());
  }
}

void run_linear(Context& x) {
  const auto& c = x.c;
  auto bg = make_background(x);
  LinearOptions lo;
  lo.quantum_pressure = c.linear.quantum_pressure;
  lo.density_floor = c.linear.density_floor;
  LinearOperator op(bg, lo);
  check_mach(op);
  note_vacuum(x, op, "linear");
  const auto [dt, steps] = linear_timing(op, c.linear.dt, c.linear.dt_fraction, x.timing.span);
  const SourceTerms unit = c.linear.source == SourceForm::metric ? source_terms_metric(op.background(), 1.0, lo.quantum_pressure)
                                                                 : source_terms_gauge(op.background(), 1.0);
  if (at_rest_homogeneous(op.background())) {
    x.manifest.note("linear: source terms vanish identically on a homogeneous background at rest");
  }
  auto run = drive_linear(op, unit, *x.waveform, dt, steps, c.linear.snapshot_stride, true);
  x.manifest.derived()["linear_dt"] = dt;
  x.manifest.derived()["linear_steps"] = steps;
  x.manifest.derived()["linear_max_mach"] = jnum(op.max_mach());

  std::ostringstream os;
  os << "t,h,drho_max,dS_max,energy,drho_integral\n";
  for (const auto& r : run.rows) {
    os << num(r[0]) << ',' << num(r[1]) << ',' << num(r[2]) << ',' << num(r[3]) << ',' << num(r[4]) << ','
       << num(r[5]) << '\n';
  }
  write_text(x.dir / "linear.csv", os.str());
  x.manifest.artifact("linear.csv");
  const fs::path snaps = x.dir / "snapshots";
  fs::create_directories(snaps);
  for (std::size_t j = 0; j < run.snapshots.size(); ++j) {
    const auto tag = step_tag(run.snapshot_steps[j]);
    write_field(snaps / ("linear_drho_" + tag), run.snapshots[j].drho, "drho", run.snapshots[j].t);
    x.manifest.artifact("snapshots/linear_drho_" + tag);
  }
  write_field(snaps / "linear_drho_final", run.final.drho, "drho", run.final.t);
  write_field(snaps / "linear_dS_final", run.final.dS, "dS", run.final.t);
  x.manifest.artifact("snapshots/linear_drho_final");
  x.manifest.artifact("snapshots/linear_dS_final");

  auto content = phonon_content(run.final, op.background());
  std::ostringstream ps;
  ps << "k,energy,number\n";
  for (const auto& s : content.spectrum) ps << num(s.k) << ',' << num(s.energy) << ',' << num(s.number) << '\n';
  write_text(x.dir / "phonon_spectrum.csv", ps.str());
  x.manifest.artifact("phonon_spectrum.csv");
  x.manifest.derived()["phonon_n_est"] = jnum(content.n_est);
  x.manifest.derived()["phonon_homogeneous_reference"] = content.homogeneous_reference;
  x.linear_content = content;

  if (source_conserves(unit)) {
    check_drho_integral(run, "linear");
  } else {
    x.manifest.note("linear: the gauge density source does not integrate to zero on this periodic background; "
                    "atom-number check skipped");
  }
}

void run_cross_validate(Context& x) {
  const auto& c = x.c;
  if (!x.reference) x.reference = run_reference(x);
  auto bg = make_background(x);
  LinearOptions lo;
  lo.quantum_pressure = true;  // the nonlinear equation always carries it
  lo.density_floor = c.linear.density_floor;
  LinearOperator op(bg, lo);
  note_vacuum(x, op, "cross_validate");
  const auto [dt, steps] = linear_timing(op, c.linear.dt, c.linear.dt_fraction, x.timing.span);
  const SourceTerms unit = source_terms_metric(op.background(), 1.0, true);

  bool gauge_ok = !x.V && x.bg.state.grid()->dim() >= 2;
  if (gauge_ok) {
    try {
      EvolutionConfig probe;
      probe.dt = x.timing.dt;
      probe.n_steps = 1;
      probe.scheme = Scheme::gauge;
      probe.waveform = x.waveform->scaled(0.0);
      probe.check_invariants = false;
      evolve(x.bg.state, probe);
    } catch (const Error& e) {
      gauge_ok = false;
      x.manifest.note(std::string("cross_validate: gauge comparison skipped: ") + e.what());
    }
  } else {
    x.manifest.note("cross_validate: gauge comparison skipped: background has an external potential");
  }

  const double h0 = x.waveform->h_max();
  std::vector<double> amp_nl, amp_lin, disc, nest, dq;
  std::ostringstream csv;
  csv << "h,drho_nonlinear,drho_linear,discrepancy,n_est,gauge_metric_dQ\n";
  for (double h : c.ladder) {
    const StrainWaveform wf = h0 > 0.0 ? x.waveform->scaled(h / h0) : x.waveform->scaled(0.0);
    const auto metric = run_driven(x, wf, Scheme::metric, 0);
    const auto d = difference(metric.final_state, x.reference->final_state);
    auto lin = drive_linear(op, unit, wf, dt, steps, 0, false);
    check_drho_integral(lin, "cross_validate");
    double e = 0.0;
    for (std::size_t i = 0; i < d.drho.size(); ++i) e = std::max(e, std::abs(lin.final.drho[i] - d.drho[i]));
    amp_nl.push_back(max_abs(d.drho));
    amp_lin.push_back(max_abs(lin.final.drho));
    disc.push_back(e);
    nest.push_back(phonon_content(lin.final, op.background()).n_est);
    double g = NAN;
    if (gauge_ok) {
      const auto gauge = run_driven(x, wf, Scheme::gauge, 0);
      g = 0.0;
      for (std::size_t k = 0; k < gauge.series.size(); ++k) g = std::max(g, std::abs(gauge.series[k].Q - metric.series[k].Q));
    }
    dq.push_back(g);
    csv << num(h) << ',' << num(amp_nl.back()) << ',' << num(amp_lin.back()) << ',' << num(e) << ','
        << num(nest.back()) << ',' << (std::isnan(g) ? std::string() : num(g)) << '\n';
  }
  if (!c.has(Pipeline::nonlinear)) {
    write_text(x.dir / "observables.csv", observables_csv(*x.reference));
    x.manifest.artifact("observables.csv");
    x.manifest.note("observables.csv holds the flat reference run (nonlinear pipeline not selected)");
  }
  write_text(x.dir / "cross_validate.csv", csv.str());
  x.manifest.artifact("cross_validate.csv");

  ordered_json j;
  j["ladder"] = c.ladder;
  j["linear_quantum_pressure"] = true;
  j["linear_dt"] = dt;
  j["linear_steps"] = steps;
  j["nonlinear_dt"] = x.timing.dt;
  j["nonlinear_steps"] = x.timing.steps;
  j["fits"] = {{"linearity_slope", jnum(loglog_slope(c.ladder, amp_nl))},
               {"linear_response_slope", jnum(loglog_slope(c.ladder, amp_lin))},
               {"phonon_number_slope", jnum(loglog_slope(c.ladder, nest))},
               {"linear_vs_nonlinear_slope", jnum(loglog_slope(c.ladder, disc))},
               {"gauge_metric_slope", gauge_ok ? jnum(loglog_slope(c.ladder, dq)) : ordered_json(nullptr)}};
  j["expected"] = {{"linearity_slope", 1.0},
                   {"linear_response_slope", 1.0},
                   {"phonon_number_slope", 2.0},
                   {"linear_vs_nonlinear_slope", 2.0},
                   {"gauge_metric_slope", 2.0}};
  ordered_json notes = ordered_json::array();
  if (!bg.warning.empty()) {
    notes.push_back("background is not stationary; the linear model holds it fixed, so the linear/nonlinear "
                    "discrepancy carries a first-order part from background drift");
  }
  j["notes"] = notes;
  j["rows"] = ordered_json::array();
  for (std::size_t i = 0; i < c.ladder.size(); ++i) {
    j["rows"].push_back({{"h", c.ladder[i]},
                         {"drho_nonlinear", amp_nl[i]},
                         {"drho_linear", amp_lin[i]},
                         {"discrepancy", disc[i]},
                         {"n_est", nest[i]},
                         {"gauge_metric_dQ", jnum(dq[i])}});
  }
  write_text(x.dir / "cross_validate.json", j.dump(2) + "\n");
  x.manifest.artifact("cross_validate.json");
}

DetectionReport run_detectability(Context& x) {
  const auto& c = x.c;
  const auto& u = x.bg.state.units;
  if (!x.reference) x.reference = run_reference(x);
  const Trajectory* q = &*x.reference;
  if (c.detect.strained_Q) {
    if (!x.driven || x.driven->scheme != Scheme::metric) x.driven = run_driven(x, *x.waveform, Scheme::metric, 0);
    q = &*x.driven;
  }
  const auto& o0 = x.reference->series.front();
  const double hbar = x.bg.state.hbar();
  DetectionReport r;
  r.waveform = x.waveform->describe();
  r.T_s = x.timing.span * u.time_scale();
  r.h_max = x.waveform->h_max();
  r.N = c.detect.N.value_or(o0.N);
  r.E_total_eV = o0.E_total * u.energy_scale();
  r.E_kin_eV = o0.E_kin * u.energy_scale();
  r.dVdh_eV = c.detect.dVdh_eV;
  r.phi = quadrupole_phase_shift(*q, *x.waveform, hbar);
  r.fidelity = fidelity_first_order(*r.phi);
  r.bound_energy = energy_bound_sim(x.timing.span, r.h_max, o0.E_total, hbar);
  r.bound_trap = trap_bound(r.T_s, r.h_max, r.N, r.dVdh_eV);
  if (x.linear_content) {
    r.n = x.linear_content->n_est;
    r.n_source = x.linear_content->homogeneous_reference ? "linear phonon_content (homogeneous reference basis)"
                                                         : "linear phonon_content";
  } else if (c.detect.n) {
    r.n = *c.detect.n;
    r.n_source = "config";
  } else {
    r.n = 0.0;
    r.n_source = "none (no linear run, detect.n unset)";
  }
  if (r.n > r.N) {
    r.notes.push_back("phonon estimate exceeds N; hierarchy evaluated at n = N");
    r.n = r.N;
  }
  r.hierarchy = hierarchy_estimates(r.N, r.n, r.h_max);
  r.noon_epsilon = c.detect.noon_epsilon;
  if (r.noon_epsilon) r.noon = noon_fidelity(*r.noon_epsilon, r.N);
  r.notes.push_back(c.detect.strained_Q ? "phi from the strained trajectory's Q(t)" : "phi from the flat reference Q(t)");
  auto bg = background_from(x.bg.state, x.V);
  if (at_rest_homogeneous(bg)) {
    r.notes.push_back("no direct phonon creation: source terms vanish on a homogeneous background at rest");
  }
  r.notes.push_back("phi is reported without a detectability threshold");
  write_text(x.dir / "detection_report.json", r.to_json());
  x.manifest.artifact("detection_report.json");
  check_phase_bound(r);
  return r;
}

DetectionReport run_bounds_only(const ScenarioConfig& c, const fs::path& dir, Manifest& m) {
  BoundsInput in;
  in.T_s = *c.detect.T_s;
  in.h_max = *c.detect.h_max;
  in.E_eV = *c.detect.E_eV;
  in.N = c.detect.N.value_or(1.0);
  in.n = c.detect.n.value_or(0.0);
  in.dVdh_eV = c.detect.dVdh_eV;
  auto r = bounds_report(in);
  r.n_source = c.detect.n ? "config" : "none (detect.n unset)";
  r.noon_epsilon = c.detect.noon_epsilon;
  if (r.noon_epsilon) r.noon = noon_fidelity(*r.noon_epsilon, r.N);
  write_text(dir / "detection_report.json", r.to_json());
  m.artifact("detection_report.json");
  return r;
}

void write_vortices(const fs::path& path, const std::vector<VortexSite>& v) {
  std::ostringstream os;
  os << "x,y,winding\n";
  for (const auto& s : v) os << num(s.x) << ',' << num(s.y) << ',' << s.winding << '\n';
  write_text(path, os.str());
}

}  // namespace

ExitCode exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return ExitCode::validation;
    case ErrorKind::invariant: return ExitCode::invariant;
    default: return ExitCode::runtime;
  }
}

const char* version_string() { return GWBEC_VERSION; }

PreparedBackground prepare_background(const ScenarioConfig& c) {
  require(c.grid.has_value(), "background preparation needs a grid");
  const auto& b = c.background;
  const auto units = make_units(c.units);
  const auto grid = make_grid(*c.grid);
  PreparedBackground p;
  switch (b.kind) {
    case BackgroundKind::homogeneous:
      p.state = prepare_homogeneous(grid, b.rho0, b.g, units);
      if (b.envelope_radius > 0.0) apply_envelope(p.state, b.envelope_radius);
      break;
    case BackgroundKind::plane_flow:
      p.state = prepare_plane_flow(grid, b.rho0, b.g, units, b.flow_mode);
      break;
    case BackgroundKind::vortex_pair: {
      p.state = prepare_homogeneous(grid, b.rho0, b.g, units);
      std::vector<VortexSpec> layout;
      if (b.vortex_separation > 0.0 || b.envelope_radius > 0.0) {
        const double sep = b.vortex_separation > 0.0 ? b.vortex_separation : 6.0 * b.envelope_radius / 7.0;
        const double hx = 0.5 * grid->spacing(0), hy = 0.5 * grid->spacing(1);
        layout = {{-0.5 * sep + hx, hy, 1}, {0.5 * sep + hx, hy, -1}};
      } else {
        layout = vortex_pair_layout(*grid);
      }
      if (b.envelope_radius > 0.0) {
        apply_envelope(p.state, b.envelope_radius);
        p.state = imprint_vortices(p.state, layout);
        p.notes.push_back("enveloped vortex pair is imprinted without relaxation");
      } else {
        p.state = imprint_vortices(p.state, layout);
        RelaxOptions ro;
        ro.pin_phase = true;
        ro.max_steps = b.relax_steps > 0 ? b.relax_steps : 2000;
        ro.tolerance = b.relax_tolerance > 0.0 ? b.relax_tolerance : 1e-10;
        auto r = relax_imaginary_time(p.state, ro);
        p.state = std::move(r.state);
        p.state.t = 0.0;
        p.info.emplace_back("relax_steps", static_cast<double>(r.steps));
        p.info.emplace_back("relax_residual", r.residual);
        p.info.emplace_back("relax_converged", r.converged ? 1.0 : 0.0);
        p.notes.push_back("vortex pair relaxed with its imprinted phase held fixed");
      }
      p.vortices = find_vortices(p.state.psi);
      break;
    }
    case BackgroundKind::vortex_lattice: {
      LatticeOptions lo;
      lo.trap_omega = b.trap_omega;
      lo.noise = b.noise;
      lo.seed = c.seed;
      if (b.relax_steps > 0) lo.max_steps = b.relax_steps;
      if (b.relax_tolerance > 0.0) lo.tolerance = b.relax_tolerance;
      auto r = prepare_vortex_lattice(grid, b.Omega, b.g, b.rho0, units, lo);
      p.state = std::move(r.state);
      p.potential = std::move(r.potential);
      p.vortices = std::move(r.vortices);
      p.info.emplace_back("trap_omega", r.trap_omega);
      p.info.emplace_back("relax_steps", static_cast<double>(r.steps));
      p.info.emplace_back("relax_residual", r.residual);
      p.info.emplace_back("relax_converged", r.converged ? 1.0 : 0.0);
      p.info.emplace_back("cloud_radius", r.cloud_radius);
      p.info.emplace_back("disk_radius", r.disk_radius);
      p.info.emplace_back("disk_vortex_count", r.disk_count);
      p.info.emplace_back("feynman_estimate", r.feynman_estimate);
      break;
    }
    case BackgroundKind::obstacle_flow: {
      p.state = prepare_plane_flow(grid, b.rho0, b.g, units, b.flow_mode);
      p.potential = obstacle_potential(grid, b.obstacle_height, b.obstacle_width);
      RelaxOptions ro;
      ro.potential = &*p.potential;
      ro.max_steps = b.relax_steps > 0 ? b.relax_steps : 20000;
      ro.tolerance = b.relax_tolerance > 0.0 ? b.relax_tolerance : 1e-13;
      auto r = relax_imaginary_time(p.state, ro);
      p.state = std::move(r.state);
      p.state.t = 0.0;
      p.info.emplace_back("relax_steps", static_cast<double>(r.steps));
      p.info.emplace_back("relax_residual", r.residual);
      p.info.emplace_back("relax_converged", r.converged ? 1.0 : 0.0);
      if (grid->dim() >= 2) {
        p.vortices = find_vortices(p.state.psi, 0.1);
        if (!p.vortices.empty()) {
          fail(ErrorKind::numerical, "obstacle relaxation nucleated " + std::to_string(p.vortices.size()) +
                                         " vortices; lower the flow or the obstacle height");
        }
      }
      break;
    }
  }
  if (b.perturbation > 0.0) {
    p.state = seed_perturbation(p.state, b.perturbation, c.seed, b.perturbation_modes);
    p.notes.push_back("seeded low-mode perturbation added");
  }
  return p;
}

Timing resolve_timing(const EvolutionSpec& e, const Grid& grid, double hbar, double mass,
                      const std::optional<StrainWaveform>& waveform) {
  Timing t;
  if (e.dt > 0.0 && e.steps > 0) {
    t.dt = e.dt;
    t.steps = e.steps;
    t.span = e.dt * static_cast<double>(e.steps);
    return t;
  }
  if (e.duration > 0.0) {
    t.span = e.duration;
  } else if (waveform) {
    t.span = waveform->duration();
  } else {
    fail(ErrorKind::invalid_argument, "evolution span unknown: set evolution.duration, or evolution.dt with evolution.steps");
  }
  if (e.steps > 0) {
    t.steps = e.steps;
  } else {
    const double dt0 = e.dt > 0.0 ? e.dt : default_time_step(grid, hbar, mass);
    t.steps = static_cast<std::size_t>(std::max(1.0, std::ceil(t.span / dt0 - 1e-9)));
  }
  t.dt = t.span / static_cast<double>(t.steps);
  return t;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return NAN;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return NAN;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  return den > 0.0 ? (n * sxy - sx * sy) / den : NAN;
}

RunResult run_scenario(const ScenarioConfig& c, const RunOptions& options) {
  RunResult res;
  res.output = c.output;
  res.stage = "output";
  try {
    prepare_output(c.output, c.overwrite || options.overwrite);
  } catch (const std::exception& e) {
    const auto* ge = dynamic_cast<const Error*>(&e);
    res.code = ge ? exit_code_for(ge->kind()) : ExitCode::runtime;
    res.message = e.what();
    return res;
  }

  std::optional<Manifest> manifest;
  try {
    manifest.emplace(c.output, c);
    manifest->write();
    res.stage = "prepare";
    if (!c.has_pde()) {
      res.stage = "detectability";
      manifest->stage(res.stage);
      res.report = run_bounds_only(c, c.output, *manifest);
    } else {
      Context x{c, c.output, *manifest, prepare_background(c), std::nullopt, {}, nullptr, {}, {}, {}, false};
      if (c.waveform.present) x.waveform = make_waveform(c.waveform);
      const auto& s = x.bg.state;
      x.timing = resolve_timing(c.evolution, *s.grid(), s.hbar(), s.mass(), x.waveform);
      if (x.waveform) {
        EvolutionConfig probe;
        probe.dt = x.timing.dt;
        probe.n_steps = x.timing.steps;
        probe.scheme = Scheme::metric;
        probe.waveform = x.waveform;
        validate(probe, 0.0);
      }
      if (x.bg.potential) x.V = &*x.bg.potential;
      auto& d = manifest->derived();
      d["dt"] = x.timing.dt;
      d["steps"] = x.timing.steps;
      d["span"] = x.timing.span;
      d["units"] = {{"hbar", s.hbar()},
                    {"mass", s.mass()},
                    {"length_scale_m", s.units.length_scale()},
                    {"time_scale_s", s.units.time_scale()},
                    {"energy_scale_eV", s.units.energy_scale()}};
      d["initial_norm"] = s.norm();
      for (const auto& [k, v] : x.bg.info) d["background_" + k] = jnum(v);
      for (const auto& n : x.bg.notes) manifest->note(n);
      if (!x.bg.vortices.empty() || c.background.kind == BackgroundKind::vortex_pair ||
          c.background.kind == BackgroundKind::vortex_lattice) {
        write_vortices(c.output / "vortices.csv", x.bg.vortices);
        manifest->artifact("vortices.csv");
        d["vortex_count"] = x.bg.vortices.size();
        d["net_winding"] = net_winding(x.bg.vortices);
      }
      if (x.bg.potential) {
        write_field(c.output / "potential", *x.bg.potential, "potential", 0.0);
        manifest->artifact("potential");
      }
      write_field(c.output / "psi_initial", s.psi, "psi", 0.0);
      manifest->artifact("psi_initial");

      if (c.has(Pipeline::nonlinear)) {
        res.stage = "nonlinear";
        manifest->stage(res.stage);
        run_nonlinear(x);
      }
      if (c.has(Pipeline::linear)) {
        res.stage = "linear";
        manifest->stage(res.stage);
        run_linear(x);
      }
      if (c.has(Pipeline::cross_validate)) {
        res.stage = "cross_validate";
        manifest->stage(res.stage);
        run_cross_validate(x);
      }
      if (c.has(Pipeline::detectability)) {
        res.stage = "detectability";
        manifest->stage(res.stage);
        res.report = run_detectability(x);
      }
      if (fs::exists(c.output / "observables.csv")) {
        res.stage = "plot";
        manifest->stage(res.stage);
        emit_plot_script(c.output);
        manifest->artifact("plot.py");
      }
    }
    res.stage = "done";
    manifest->stage(res.stage);
    manifest->finish("complete", "");
  } catch (const std::exception& e) {
    const auto* ge = dynamic_cast<const Error*>(&e);
    res.code = ge ? exit_code_for(ge->kind()) : ExitCode::runtime;
    res.message = e.what();
    if (manifest) {
      try {
        manifest->finish(res.code == ExitCode::invariant ? "invariant_violation" : "failed", res.message);
      } catch (const std::exception&) {
        // nothing left to report to
      }
    }
  }
  return res;
}

SweepResult run_sweep(const std::vector<fs::path>& configs, unsigned threads, const RunOptions& options,
                      const fs::path& summary) {
  SweepResult out;
  out.configs = configs;
  out.runs.resize(configs.size());
  std::vector<std::string> names(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        const auto cfg = load_config(configs[i]);
        names[i] = cfg.name;
        out.runs[i] = run_scenario(cfg, options);
      } catch (const std::exception& e) {
        const auto* ge = dynamic_cast<const Error*>(&e);
        out.runs[i].code = ge ? exit_code_for(ge->kind()) : ExitCode::runtime;
        out.runs[i].stage = "validate";
        out.runs[i].message = e.what();
        names[i] = configs[i].stem().string();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(configs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& r : out.runs) out.code = static_cast<ExitCode>(std::max(static_cast<int>(out.code), static_cast<int>(r.code)));
  if (!summary.empty()) {
    std::ostringstream os;
    os << DetectionReport::csv_header() << ",exit_code,stage\n";
    for (std::size_t i = 0; i < configs.size(); ++i) {
      const auto& r = out.runs[i];
      if (r.report) {
        os << r.report->csv_row(names[i]);
      } else {
        os << names[i] << ",,,,,,,,,";
      }
      os << ',' << static_cast<int>(r.code) << ',' << r.stage << '\n';
    }
    if (summary.has_parent_path()) fs::create_directories(summary.parent_path());
    write_text(summary, os.str());
  }
  return out;
}

}  // namespace gwbec
