#include <fstream>
#include <sstream>

#include "gwbec/error.hpp"
#include "gwbec/scenario.hpp"

namespace gwbec {

namespace fs = std::filesystem;

namespace {

const char* kHead = R"PY(#!/usr/bin/env python3
"""Plots for one gwbec run. Reads only files next to this script.

usage: python3 plot.py [output.png]
"""
import csv
import json
import pathlib
import sys

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = pathlib.Path(__file__).resolve().parent


def read_csv(name):
    with open(HERE / name, newline="") as f:
        rows = list(csv.DictReader(f))
    cols = {}
    for key in rows[0].keys() if rows else []:
        cols[key] = np.array([float(r[key]) if r[key] != "" else np.nan for r in rows])
    return cols


def read_field(stem):
    meta = json.loads((HERE / (stem + ".json")).read_text())
    dtype = "<c16" if meta["type"] == "complex128" else "<f8"
    data = np.fromfile(HERE / (stem + ".bin"), dtype=dtype)
    return meta, data.reshape(meta["points"])


panels = []
)PY";

const char* kObservables = R"PY(
def panel_q(ax):
    obs = read_csv("observables.csv")
    ax.plot(obs["t"], obs["Q"], label="driven" if (HERE / "reference_observables.csv").exists() else "Q")
    if (HERE / "reference_observables.csv").exists():
        ref = read_csv("reference_observables.csv")
        ax.plot(ref["t"], ref["Q"], "--", label="reference")
    ax.set_xlabel("t")
    ax.set_ylabel("Q")
    ax.set_title("quadrupole anisotropy")
    ax.legend()


panels.append(panel_q)
)PY";

const char* kStrain = R"PY(
def panel_h(ax):
    st = read_csv("strain.csv")
    ax.plot(st["t"], st["h"])
    ax.set_xlabel("t")
    ax.set_ylabel("h")
    ax.set_title("strain")


panels.append(panel_h)
)PY";

const char* kSnapshot = R"PY(
SNAPSHOT = "@STEM@"


def panel_drho(ax):
    meta, f = read_field(SNAPSHOT)
    if f.ndim == 3:
        f = f[:, :, f.shape[2] // 2]
    if f.ndim == 1:
        x = np.linspace(-meta["extents"][0] / 2, meta["extents"][0] / 2, f.shape[0], endpoint=False)
        ax.plot(x, f)
    else:
        ex = meta["extents"]
        im = ax.imshow(f.T, origin="lower", extent=[-ex[0] / 2, ex[0] / 2, -ex[1] / 2, ex[1] / 2], cmap="RdBu_r")
        plt.colorbar(im, ax=ax)
    ax.set_title("%s at t = %.4g" % (meta["name"], meta["time"]))


panels.append(panel_drho)
)PY";

const char* kScaling = R"PY(
def panel_scaling(ax):
    cv = read_csv("cross_validate.csv")
    h = cv["h"]
    for key, marker in (("drho_nonlinear", "o"), ("discrepancy", "s"), ("n_est", "^"), ("gauge_metric_dQ", "d")):
        y = cv.get(key)
        if y is None or not np.all(np.isfinite(y)) or np.any(y <= 0):
            continue
        slope = np.polyfit(np.log(h), np.log(y), 1)[0]
        ax.loglog(h, y, marker + "-", label="%s (slope %.3f)" % (key, slope))
    ax.set_xlabel("h")
    ax.set_title("strain scaling")
    ax.legend(fontsize="small")


panels.append(panel_scaling)
)PY";

const char* kTail = R"PY(
fig, axes = plt.subplots(1, len(panels), figsize=(5 * len(panels), 4), squeeze=False)
for draw, ax in zip(panels, axes[0]):
    draw(ax)
fig.tight_layout()
out = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else HERE / "plots.png"
fig.savefig(out, dpi=120)
print(out)
)PY";

}  // namespace

fs::path emit_plot_script(const fs::path& dir) {
  if (!fs::exists(dir / "observables.csv")) {
    std::ostringstream os;
    os << "cannot build a plot script for " << dir.string() << ": missing observables.csv"
       << " (expected files: observables.csv; optional: reference_observables.csv, strain.csv,"
       << " snapshots/drho_final.json, snapshots/linear_drho_final.json, cross_validate.csv)";
    fail(ErrorKind::io, os.str());
  }
  std::string script = kHead;
  script += kObservables;
  if (fs::exists(dir / "strain.csv")) script += kStrain;
  std::string stem;
  for (const char* s : {"snapshots/drho_final", "snapshots/linear_drho_final"}) {
    if (fs::exists(dir / (std::string(s) + ".json"))) {
      stem = s;
      break;
    }
  }
  if (!stem.empty()) {
    std::string block = kSnapshot;
    block.replace(block.find("@STEM@"), 6, stem);
    script += block;
  }
  if (fs::exists(dir / "cross_validate.csv")) script += kScaling;
  script += kTail;
  const auto path = dir / "plot.py";
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << script;
  return path;
}

}  // namespace gwbec
