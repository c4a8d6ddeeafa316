/* Exercises the C interface from plain C. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "gwbec/gwbec.h"

static int failures = 0;

#define EXPECT(cond)                                             \
  do {                                                           \
    if (!(cond)) {                                               \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                \
    }                                                            \
  } while (0)

static const char* kConfig =
    "name = \"capi\"\n"
    "pipelines = [\"nonlinear\"]\n"
    "[grid]\ndim = 2\npoints = 16\nextent = 8.0\n"
    "[background]\nkind = \"homogeneous\"\n"
    "[waveform]\nkind = \"sinusoid\"\nh_max = 1e-3\nfrequency = 0.5\nduration = 2.0\n";

int main(void) {
  EXPECT(strlen(gwbec_version()) > 0);

  /* bounds */
  EXPECT(fabs(gwbec_energy_bound(2000, 1e-21, 100) - 0.30385) < 1e-4);
  EXPECT(isnan(gwbec_energy_bound(-1, 1e-21, 100)));
  EXPECT(strlen(gwbec_last_error()) > 0);
  EXPECT(gwbec_trap_bound(2000, 1e-21, 1, 100) == gwbec_energy_bound(2000, 1e-21, 100));

  gwbec_bounds_input in = {2000, 1e-21, 100, 1e6, 0, 10};
  size_t need = 0;
  EXPECT(gwbec_bounds_report(&in, NULL, 0, &need) == GWBEC_TRUNCATED);
  char* buf = malloc(need);
  EXPECT(gwbec_bounds_report(&in, buf, need, &need) == GWBEC_OK);
  EXPECT(strstr(buf, "\"bound_energy\"") != NULL);
  free(buf);
  in.T_s = 0;
  EXPECT(gwbec_bounds_report(&in, NULL, 0, &need) == GWBEC_VALIDATION);

  double levels[4];
  int dec = 0;
  EXPECT(gwbec_hierarchy(1e6, 10, 1e-21, levels, &dec) == GWBEC_OK);
  EXPECT(dec == 1 && fabs(levels[1] / 3.16227766e-18 - 1) < 1e-8);
  EXPECT(gwbec_hierarchy(10, 11, 1e-21, levels, &dec) == GWBEC_VALIDATION);

  double exact = 0, lin = 0;
  EXPECT(gwbec_noon_fidelity(1e-8, 1e6, &exact, &lin) == GWBEC_OK);
  EXPECT(fabs(exact - 0.990050) < 1e-6 && lin == 0.99);
  EXPECT(gwbec_kinetic_energy_eV(1e6, 1e-3, 86.909180527 * 1.66053906660e-27) > 4e-7);

  /* waveforms */
  gwbec_waveform* w = NULL;
  EXPECT(gwbec_waveform_sinusoid(1e-3, 0.5, 0.0, 2.0, &w) == GWBEC_OK);
  double h = 1, hdot = 0;
  EXPECT(gwbec_waveform_sample(w, 0.5, &h, &hdot) == GWBEC_OK);
  EXPECT(fabs(h - 1e-3) < 1e-15);
  EXPECT(gwbec_waveform_sample(w, 10.0, &h, &hdot) != GWBEC_OK);
  EXPECT(gwbec_waveform_sample(NULL, 0.0, &h, &hdot) == GWBEC_BAD_HANDLE);

  /* states */
  gwbec_state* s = NULL;
  EXPECT(gwbec_state_homogeneous(2, 16, 8.0, 1.0, 1.0, &s) == GWBEC_OK);
  EXPECT(gwbec_state_size(s) == 256);
  EXPECT(gwbec_state_perturb(s, 0.01, 3) == GWBEC_OK);
  gwbec_observables o0, o1;
  EXPECT(gwbec_state_observables(s, &o0) == GWBEC_OK);
  EXPECT(fabs(o0.N - 64.0) < 1e-9);
  gwbec_state* c = gwbec_state_clone(s);
  EXPECT(gwbec_state_evolve(c, "metric", w, 0.0, 100) == GWBEC_OK);
  EXPECT(gwbec_state_observables(c, &o1) == GWBEC_OK);
  EXPECT(fabs(o1.N / o0.N - 1) < 1e-12);
  EXPECT(gwbec_state_evolve(c, "warp", w, 0.0, 1) == GWBEC_VALIDATION);
  double* amp = malloc(2 * 256 * sizeof(double));
  EXPECT(gwbec_state_amplitude(c, amp, 10) == GWBEC_TRUNCATED);
  EXPECT(gwbec_state_amplitude(c, amp, 512) == GWBEC_OK);
  free(amp);
  EXPECT(gwbec_state_imprint_pair(s) == GWBEC_OK);
  gwbec_state_free(c);
  gwbec_state_free(s);
  gwbec_waveform_free(w);

  /* scenarios */
  gwbec_scenario* sc = NULL;
  EXPECT(gwbec_scenario_parse(kConfig, NULL, &sc) == GWBEC_OK);
  EXPECT(gwbec_scenario_json(sc, NULL, 0, &need) == GWBEC_TRUNCATED && need > 10);
  gwbec_scenario_free(sc);
  EXPECT(gwbec_scenario_parse("name = \"x\"\nbogus = 1\n", NULL, &sc) == GWBEC_VALIDATION);
  EXPECT(sc == NULL);
  EXPECT(strstr(gwbec_last_error(), "bogus") != NULL);
  EXPECT(gwbec_scenario_run(NULL, 0) == GWBEC_BAD_HANDLE);
  EXPECT(gwbec_plot("/nonexistent/gwbec") == GWBEC_RUNTIME);

  if (failures == 0) printf("capi smoke: ok\n");
  return failures == 0 ? 0 : 1;
}
