/* C interface to the gwbec library. All functions are thread-safe; the text
 * returned by gwbec_last_error() is per thread. */
#ifndef GWBEC_H
#define GWBEC_H

#include <stddef.h>
#include <stdint.h>

#if defined(GWBEC_BUILDING)
#define GWBEC_API __attribute__((visibility("default")))
#else
#define GWBEC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. The first four double as process exit codes. */
typedef enum {
  GWBEC_OK = 0,
  GWBEC_VALIDATION = 1, /* bad input or config */
  GWBEC_RUNTIME = 2,    /* numerical or I/O failure */
  GWBEC_INVARIANT = 3,  /* a physical invariant broke */
  GWBEC_BAD_HANDLE = 4, /* null handle or output pointer */
  GWBEC_TRUNCATED = 5   /* output buffer too small; *needed holds the size */
} gwbec_status;

typedef struct gwbec_scenario gwbec_scenario;
typedef struct gwbec_state gwbec_state;
typedef struct gwbec_waveform gwbec_waveform;

GWBEC_API const char* gwbec_version(void);
/* Message for the last failing call on this thread, or "". */
GWBEC_API const char* gwbec_last_error(void);

/* ---- scenarios ---- */

/* Parses config text; relative paths resolve against base_dir (may be NULL).
 * On GWBEC_VALIDATION, gwbec_last_error() lists every problem, one per line. */
GWBEC_API int gwbec_scenario_parse(const char* text, const char* base_dir, gwbec_scenario** out);
GWBEC_API int gwbec_scenario_load(const char* path, gwbec_scenario** out);
GWBEC_API void gwbec_scenario_free(gwbec_scenario* s);
/* Config echo with defaults filled in, as JSON. */
GWBEC_API int gwbec_scenario_json(const gwbec_scenario* s, char* buf, size_t len, size_t* needed);
GWBEC_API int gwbec_scenario_output_dir(const gwbec_scenario* s, char* buf, size_t len, size_t* needed);
/* Runs all pipelines and writes artifacts. Returns an exit code (0-3). */
GWBEC_API int gwbec_scenario_run(const gwbec_scenario* s, int overwrite);

/* Runs configs concurrently on `threads` workers, writing a CSV summary to
 * summary_path (may be NULL). Returns the worst exit code. */
GWBEC_API int gwbec_sweep(const char* const* config_paths, size_t count, unsigned threads, int overwrite,
                          const char* summary_path);

/* Writes <dir>/plot.py. */
GWBEC_API int gwbec_plot(const char* artifact_dir);

/* ---- detectability arithmetic (SI units, energies in eV) ---- */

typedef struct {
  double T_s;
  double h_max;
  double E_eV;
  double N;       /* atoms; 1 if unknown */
  double dVdh_eV; /* 0 if unknown */
  double n;       /* phonons; 0 if unknown */
} gwbec_bounds_input;

GWBEC_API double gwbec_energy_bound(double T_s, double h_max, double E_eV);
GWBEC_API double gwbec_trap_bound(double T_s, double h_max, double N, double dVdh_eV);
/* JSON detection report without a trajectory. */
GWBEC_API int gwbec_bounds_report(const gwbec_bounds_input* in, char* buf, size_t len, size_t* needed);
/* levels[4] = {hN, h sqrt(nN), hn, h}. */
GWBEC_API int gwbec_hierarchy(double N, double n, double h, double levels[4], int* strictly_decreasing);
GWBEC_API int gwbec_noon_fidelity(double epsilon, double N, double* exact, double* linearized);
GWBEC_API double gwbec_kinetic_energy_eV(double N, double speed_m_s, double mass_kg);

/* ---- waveforms (simulation units) ---- */

GWBEC_API int gwbec_waveform_sinusoid(double h_max, double frequency, double phase, double duration,
                                      gwbec_waveform** out);
GWBEC_API int gwbec_waveform_tabulated(const double* t, const double* h, size_t n, gwbec_waveform** out);
GWBEC_API void gwbec_waveform_free(gwbec_waveform* w);
GWBEC_API int gwbec_waveform_sample(const gwbec_waveform* w, double t, double* h, double* hdot);

/* ---- condensate states (simulation units, hbar = m = 1) ---- */

typedef struct {
  double N;
  double E_kin;
  double E_int;
  double E_pot;
  double E_total;
  double Q;
  double Lz;
} gwbec_observables;

/* Homogeneous state on a dim-dimensional periodic box of n^dim points. */
GWBEC_API int gwbec_state_homogeneous(int dim, size_t n, double length, double rho0, double g,
                                      gwbec_state** out);
/* Imprints the default vortex/antivortex pair (2D and 3D only). */
GWBEC_API int gwbec_state_imprint_pair(gwbec_state* s);
/* Adds a seeded low-mode perturbation of relative size `amplitude`. */
GWBEC_API int gwbec_state_perturb(gwbec_state* s, double amplitude, uint64_t seed);
GWBEC_API gwbec_state* gwbec_state_clone(const gwbec_state* s);
GWBEC_API void gwbec_state_free(gwbec_state* s);
GWBEC_API size_t gwbec_state_size(const gwbec_state* s);
/* Copies the amplitude as interleaved (re, im) pairs; buf holds 2*size doubles. */
GWBEC_API int gwbec_state_amplitude(const gwbec_state* s, double* buf, size_t len);
GWBEC_API int gwbec_state_observables(const gwbec_state* s, gwbec_observables* out);
/* Advances the state in place. scheme: "flat", "metric" or "gauge";
 * waveform may be NULL for "flat". dt <= 0 picks the default step. */
GWBEC_API int gwbec_state_evolve(gwbec_state* s, const char* scheme, const gwbec_waveform* w, double dt,
                                 size_t steps);

#ifdef __cplusplus
}
#endif

#endif /* GWBEC_H */
