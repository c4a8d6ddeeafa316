// gwbec command line: scenario runs, sweeps, validation, plot scripts and
// the detectability-only bounds path. Talks to the library through the C API.
#include <glob.h>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gwbec/gwbec.h"

namespace {

std::string fetch(int (*get)(const gwbec_scenario*, char*, size_t, size_t*), const gwbec_scenario* s) {
  size_t need = 0;
  get(s, nullptr, 0, &need);
  std::string out(need, '\0');
  if (get(s, out.data(), out.size(), &need) != GWBEC_OK) return {};
  out.resize(need - 1);
  return out;
}

int report(int code, const char* what) {
  if (code != GWBEC_OK) std::cerr << "gwbec " << what << ": " << gwbec_last_error() << "\n";
  return code;
}

unsigned thread_count() {
  if (const char* env = std::getenv("GWBEC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    std::cerr << "gwbec: ignoring GWBEC_THREADS='" << env << "' (expected a positive integer)\n";
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

std::vector<std::string> expand(const std::vector<std::string>& patterns) {
  std::vector<std::string> out;
  for (const auto& p : patterns) {
    glob_t g{};
    if (glob(p.c_str(), 0, nullptr, &g) == 0) {
      for (size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    }
    globfree(&g);
  }
  return out;
}

int cmd_run(const std::string& path, bool overwrite) {
  gwbec_scenario* s = nullptr;
  if (int rc = gwbec_scenario_load(path.c_str(), &s); rc != GWBEC_OK) return report(rc, "validate");
  const std::string dir = fetch(gwbec_scenario_output_dir, s);
  const int rc = gwbec_scenario_run(s, overwrite ? 1 : 0);
  gwbec_scenario_free(s);
  if (rc != GWBEC_OK) return report(rc, "run");
  std::cout << dir << "\n";
  return GWBEC_OK;
}

int cmd_validate(const std::string& path, bool json) {
  gwbec_scenario* s = nullptr;
  if (int rc = gwbec_scenario_load(path.c_str(), &s); rc != GWBEC_OK) return report(rc, "validate");
  if (json) {
    std::cout << fetch(gwbec_scenario_json, s) << "\n";
  } else {
    std::cout << "ok: " << path << "\n";
  }
  gwbec_scenario_free(s);
  return GWBEC_OK;
}

int cmd_sweep(const std::vector<std::string>& patterns, const std::string& summary, bool overwrite) {
  const auto files = expand(patterns);
  if (files.empty()) {
    std::cerr << "gwbec sweep: no config matches the given pattern(s)\n";
    return GWBEC_VALIDATION;
  }
  std::vector<const char*> argv;
  for (const auto& f : files) argv.push_back(f.c_str());
  const int rc = gwbec_sweep(argv.data(), argv.size(), thread_count(), overwrite ? 1 : 0,
                             summary.empty() ? nullptr : summary.c_str());
  std::cout << files.size() << " scenario(s); summary: " << (summary.empty() ? "(none)" : summary) << "\n";
  return report(rc, "sweep");
}

int cmd_bounds(double T, double hmax, double E, double N, double dVdh, double n) {
  const gwbec_bounds_input in{T, hmax, E, N, dVdh, n};
  size_t need = 0;
  gwbec_bounds_report(&in, nullptr, 0, &need);
  std::string out(need > 0 ? need : 1, '\0');
  const int rc = gwbec_bounds_report(&in, out.data(), out.size(), &need);
  if (rc != GWBEC_OK) return report(rc == GWBEC_TRUNCATED ? GWBEC_RUNTIME : rc, "bounds");
  std::cout << out.c_str();
  return GWBEC_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gwbec: condensate phonon response to gravitational-wave strain"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gwbec_version()));

  bool overwrite = false;
  std::string config;
  auto* run = app.add_subcommand("run", "run one scenario config");
  run->add_option("config", config, "config file")->required();
  run->add_flag("--overwrite", overwrite, "replace a previous run in the output directory");

  std::vector<std::string> patterns;
  std::string summary = "sweep_summary.csv";
  auto* sweep = app.add_subcommand("sweep", "run every config matching the glob(s); GWBEC_THREADS sets concurrency");
  sweep->add_option("configs", patterns, "config glob(s)")->required();
  sweep->add_option("--summary", summary, "summary CSV path (empty to skip)");
  sweep->add_flag("--overwrite", overwrite, "replace previous runs");

  bool json = false;
  auto* validate = app.add_subcommand("validate", "check a config and list every problem");
  validate->add_option("config", config, "config file")->required();
  validate->add_flag("--json", json, "print the config with defaults filled in");

  std::string dir;
  auto* plot = app.add_subcommand("plot", "write plot.py into an artifact directory");
  plot->add_option("artifact-dir", dir, "run output directory")->required();

  double T = 0, hmax = 0, E = 0, N = 1, dVdh = 0, n = 0;
  auto* bounds = app.add_subcommand("bounds", "phase-shift bounds without a simulation (SI units, eV)");
  bounds->add_option("--T", T, "observation time [s]")->required();
  bounds->add_option("--hmax", hmax, "peak strain")->required();
  bounds->add_option("--E", E, "energy scale [eV]")->required();
  bounds->add_option("--N", N, "atom number");
  bounds->add_option("--dVdh", dVdh, "trap response dV/dh per atom [eV]");
  bounds->add_option("--n", n, "phonon number");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return GWBEC_VALIDATION;
  }

  if (*run) return cmd_run(config, overwrite);
  if (*sweep) return cmd_sweep(patterns, summary, overwrite);
  if (*validate) return cmd_validate(config, json);
  if (*plot) return report(gwbec_plot(dir.c_str()), "plot");
  if (*bounds) return cmd_bounds(T, hmax, E, N, dVdh, n);
  return GWBEC_VALIDATION;
}
