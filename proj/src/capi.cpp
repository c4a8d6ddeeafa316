#include "gwbec/gwbec.h"

#include <cstring>
#include <string>
#include <vector>

#include "gwbec/config.hpp"
#include "gwbec/detect.hpp"
#include "gwbec/dynamics.hpp"
#include "gwbec/scenario.hpp"

struct gwbec_scenario {
  gwbec::ScenarioConfig config;
};

struct gwbec_state {
  gwbec::CondensateState state;
};

struct gwbec_waveform {
  gwbec::StrainWaveform wf;
};

namespace {

thread_local std::string last_error;

int set_error(int code, const std::string& what) {
  last_error = what;
  return code;
}

// Runs f, mapping exceptions to status codes.
template <class F>
int guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const gwbec::ConfigError& e) {
    std::string msg;
    for (const auto& line : e.errors()) msg += line + "\n";
    return set_error(GWBEC_VALIDATION, msg);
  } catch (const gwbec::Error& e) {
    return set_error(static_cast<int>(gwbec::exit_code_for(e.kind())), e.what());
  } catch (const std::exception& e) {
    return set_error(GWBEC_RUNTIME, e.what());
  } catch (...) {
    return set_error(GWBEC_RUNTIME, "unknown error");
  }
}

int copy_out(const std::string& s, char* buf, size_t len, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf || len < s.size() + 1) {
    if (buf && len > 0) buf[0] = '\0';
    return set_error(GWBEC_TRUNCATED, "buffer needs " + std::to_string(s.size() + 1) + " bytes");
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return GWBEC_OK;
}

int bad_handle(const char* what) { return set_error(GWBEC_BAD_HANDLE, std::string("null ") + what); }

}  // namespace

extern "C" {

const char* gwbec_version(void) { return gwbec::version_string(); }

const char* gwbec_last_error(void) { return last_error.c_str(); }

int gwbec_scenario_parse(const char* text, const char* base_dir, gwbec_scenario** out) {
  if (!text || !out) return bad_handle("argument");
  *out = nullptr;
  return guarded([&]() -> int {
    auto cfg = gwbec::parse_config(text, base_dir ? base_dir : "");
    *out = new gwbec_scenario{std::move(cfg)};
    return GWBEC_OK;
  });
}

int gwbec_scenario_load(const char* path, gwbec_scenario** out) {
  if (!path || !out) return bad_handle("argument");
  *out = nullptr;
  return guarded([&]() -> int {
    auto cfg = gwbec::load_config(path);
    *out = new gwbec_scenario{std::move(cfg)};
    return GWBEC_OK;
  });
}

void gwbec_scenario_free(gwbec_scenario* s) { delete s; }

int gwbec_scenario_json(const gwbec_scenario* s, char* buf, size_t len, size_t* needed) {
  if (!s) return bad_handle("scenario");
  return guarded([&]() -> int { return copy_out(gwbec::to_json(s->config), buf, len, needed); });
}

int gwbec_scenario_output_dir(const gwbec_scenario* s, char* buf, size_t len, size_t* needed) {
  if (!s) return bad_handle("scenario");
  return guarded([&]() -> int { return copy_out(s->config.output.string(), buf, len, needed); });
}

int gwbec_scenario_run(const gwbec_scenario* s, int overwrite) {
  if (!s) return bad_handle("scenario");
  return guarded([&]() -> int {
    gwbec::RunOptions opt;
    opt.overwrite = overwrite != 0;
    const auto r = gwbec::run_scenario(s->config, opt);
    if (r.code != gwbec::ExitCode::ok) return set_error(static_cast<int>(r.code), r.stage + ": " + r.message);
    return GWBEC_OK;
  });
}

int gwbec_sweep(const char* const* config_paths, size_t count, unsigned threads, int overwrite,
                const char* summary_path) {
  if (!config_paths && count > 0) return bad_handle("config list");
  return guarded([&]() -> int {
    std::vector<std::filesystem::path> paths;
    for (size_t i = 0; i < count; ++i) {
      if (!config_paths[i]) return bad_handle("config path");
      paths.emplace_back(config_paths[i]);
    }
    gwbec::RunOptions opt;
    opt.overwrite = overwrite != 0;
    const auto r = gwbec::run_sweep(paths, threads, opt, summary_path ? summary_path : "");
    std::string msg;
    for (size_t i = 0; i < r.runs.size(); ++i) {
      if (r.runs[i].code != gwbec::ExitCode::ok) {
        msg += paths[i].string() + ": " + r.runs[i].stage + ": " + r.runs[i].message + "\n";
      }
    }
    if (r.code != gwbec::ExitCode::ok) return set_error(static_cast<int>(r.code), msg);
    return GWBEC_OK;
  });
}

int gwbec_plot(const char* artifact_dir) {
  if (!artifact_dir) return bad_handle("directory");
  return guarded([&]() -> int {
    gwbec::emit_plot_script(artifact_dir);
    return GWBEC_OK;
  });
}

double gwbec_energy_bound(double T_s, double h_max, double E_eV) {
  double r = NAN;
  guarded([&]() -> int {
    r = gwbec::energy_bound(T_s, h_max, E_eV);
    return GWBEC_OK;
  });
  return r;
}

double gwbec_trap_bound(double T_s, double h_max, double N, double dVdh_eV) {
  double r = NAN;
  guarded([&]() -> int {
    r = gwbec::trap_bound(T_s, h_max, N, dVdh_eV);
    return GWBEC_OK;
  });
  return r;
}

int gwbec_bounds_report(const gwbec_bounds_input* in, char* buf, size_t len, size_t* needed) {
  if (!in) return bad_handle("input");
  return guarded([&]() -> int {
    gwbec::BoundsInput b;
    b.T_s = in->T_s;
    b.h_max = in->h_max;
    b.E_eV = in->E_eV;
    b.N = in->N;
    b.dVdh_eV = in->dVdh_eV;
    b.n = in->n;
    return copy_out(gwbec::bounds_report(b).to_json(), buf, len, needed);
  });
}

int gwbec_hierarchy(double N, double n, double h, double levels[4], int* strictly_decreasing) {
  if (!levels) return bad_handle("levels");
  return guarded([&]() -> int {
    const auto r = gwbec::hierarchy_estimates(N, n, h);
    levels[0] = r.hN;
    levels[1] = r.h_sqrt_nN;
    levels[2] = r.hn;
    levels[3] = r.h;
    if (strictly_decreasing) *strictly_decreasing = r.strictly_decreasing ? 1 : 0;
    return GWBEC_OK;
  });
}

int gwbec_noon_fidelity(double epsilon, double N, double* exact, double* linearized) {
  return guarded([&]() -> int {
    const auto f = gwbec::noon_fidelity(epsilon, N);
    if (exact) *exact = f.exact;
    if (linearized) *linearized = f.linearized;
    return GWBEC_OK;
  });
}

double gwbec_kinetic_energy_eV(double N, double speed_m_s, double mass_kg) {
  double r = NAN;
  guarded([&]() -> int {
    r = gwbec::kinetic_energy_estimate(N, speed_m_s, mass_kg);
    return GWBEC_OK;
  });
  return r;
}

int gwbec_waveform_sinusoid(double h_max, double frequency, double phase, double duration, gwbec_waveform** out) {
  if (!out) return bad_handle("output");
  *out = nullptr;
  return guarded([&]() -> int {
    *out = new gwbec_waveform{gwbec::StrainWaveform::sinusoid(h_max, frequency, phase, duration)};
    return GWBEC_OK;
  });
}

int gwbec_waveform_tabulated(const double* t, const double* h, size_t n, gwbec_waveform** out) {
  if (!out || (n > 0 && (!t || !h))) return bad_handle("argument");
  *out = nullptr;
  return guarded([&]() -> int {
    *out = new gwbec_waveform{gwbec::StrainWaveform::tabulated(std::vector<double>(t, t + n), std::vector<double>(h, h + n))};
    return GWBEC_OK;
  });
}

void gwbec_waveform_free(gwbec_waveform* w) { delete w; }

int gwbec_waveform_sample(const gwbec_waveform* w, double t, double* h, double* hdot) {
  if (!w) return bad_handle("waveform");
  return guarded([&]() -> int {
    const auto s = w->wf.sample(t);
    if (h) *h = s.h;
    if (hdot) *hdot = s.hdot;
    return GWBEC_OK;
  });
}

int gwbec_state_homogeneous(int dim, size_t n, double length, double rho0, double g, gwbec_state** out) {
  if (!out) return bad_handle("output");
  *out = nullptr;
  return guarded([&]() -> int {
    gwbec::require(dim >= 1 && dim <= 3, "dim must be 1, 2 or 3");
    auto grid = gwbec::Grid::uniform(dim, n, length);
    *out = new gwbec_state{gwbec::prepare_homogeneous(grid, rho0, g, gwbec::UnitSystem())};
    return GWBEC_OK;
  });
}

int gwbec_state_imprint_pair(gwbec_state* s) {
  if (!s) return bad_handle("state");
  return guarded([&]() -> int {
    s->state = gwbec::imprint_vortices(s->state, gwbec::vortex_pair_layout(*s->state.grid()));
    return GWBEC_OK;
  });
}

int gwbec_state_perturb(gwbec_state* s, double amplitude, uint64_t seed) {
  if (!s) return bad_handle("state");
  return guarded([&]() -> int {
    s->state = gwbec::seed_perturbation(s->state, amplitude, seed);
    return GWBEC_OK;
  });
}

gwbec_state* gwbec_state_clone(const gwbec_state* s) {
  if (!s) {
    bad_handle("state");
    return nullptr;
  }
  return new gwbec_state{s->state};
}

void gwbec_state_free(gwbec_state* s) { delete s; }

size_t gwbec_state_size(const gwbec_state* s) { return s ? s->state.grid()->size() : 0; }

int gwbec_state_amplitude(const gwbec_state* s, double* buf, size_t len) {
  if (!s || !buf) return bad_handle("argument");
  const size_t n = s->state.grid()->size();
  if (len < 2 * n) return set_error(GWBEC_TRUNCATED, "buffer needs " + std::to_string(2 * n) + " doubles");
  for (size_t i = 0; i < n; ++i) {
    buf[2 * i] = s->state.psi[i].real();
    buf[2 * i + 1] = s->state.psi[i].imag();
  }
  return GWBEC_OK;
}

int gwbec_state_observables(const gwbec_state* s, gwbec_observables* out) {
  if (!s || !out) return bad_handle("argument");
  return guarded([&]() -> int {
    const auto o = gwbec::observables(s->state);
    *out = {o.N, o.E_kin, o.E_int, o.E_pot, o.E_total, o.Q, o.Lz};
    return GWBEC_OK;
  });
}

int gwbec_state_evolve(gwbec_state* s, const char* scheme, const gwbec_waveform* w, double dt, size_t steps) {
  if (!s || !scheme) return bad_handle("argument");
  return guarded([&]() -> int {
    gwbec::EvolutionConfig c;
    c.scheme = gwbec::scheme_from_string(scheme);
    gwbec::require(c.scheme != gwbec::Scheme::imaginary_time, "use a real-time scheme");
    c.dt = dt > 0.0 ? dt : gwbec::default_time_step(*s->state.grid(), s->state.hbar(), s->state.mass());
    c.n_steps = steps;
    if (w) c.waveform = w->wf;
    auto tr = gwbec::evolve(s->state, c);
    s->state = std::move(tr.final_state);
    return GWBEC_OK;
  });
}

}  // extern "C"
