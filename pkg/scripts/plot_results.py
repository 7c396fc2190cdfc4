#!/usr/bin/env python3
"""Render the CSV output of a dlamf run directory with matplotlib.

Usage: plot_results.py RUN_DIR [-o OUT.png]

Groups files by their prefix (everything before _mc_/_theory_ or the panel
suffix) and draws one axes per group: detection curves on SCNR axes,
histograms as steps with theory overlays. Matplotlib is not a package
dependency; install it separately.
"""

import argparse
import csv
import json
import sys
from collections import defaultdict
from pathlib import Path


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], rows[1:]
    cols = {name: [] for name in head}
    for row in body:
        for name, cell in zip(head, row):
            cols[name].append(float(cell) if cell else None)
    return cols


def group_key(name):
    stem = name[:-4]
    for mark in ("_mc_", "_theory_", "_theory"):
        if mark in stem:
            return stem.split(mark)[0]
    return stem


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("run_dir", type=Path)
    ap.add_argument("-o", "--out", default=None)
    args = ap.parse_args()

    try:
        import matplotlib.pyplot as plt
    except ImportError:
        sys.exit("matplotlib is required for plotting: pip install matplotlib")

    manifest = {}
    mpath = args.run_dir / "manifest.json"
    if mpath.exists():
        manifest = json.loads(mpath.read_text())

    groups = defaultdict(list)
    for name in sorted(manifest.get("outputs", [])) or sorted(
            p.name for p in args.run_dir.glob("*.csv")):
        if name.endswith(".csv"):
            groups[group_key(name)].append(name)

    if not groups:
        sys.exit(f"no CSV files found in {args.run_dir}")

    n = len(groups)
    ncol = min(3, n)
    nrow = (n + ncol - 1) // ncol
    fig, axes = plt.subplots(nrow, ncol, figsize=(5.2 * ncol, 4.0 * nrow),
                             squeeze=False)
    for ax, (key, files) in zip(axes.flat, sorted(groups.items())):
        for name in files:
            cols = read_csv(args.run_dir / name)
            label = name[:-4].replace(key, "").strip("_") or key
            xs, ys = cols.get("x") or cols.get("lambda"), None
            if "y" in cols:
                ys = cols["y"]
            elif "kappa" in cols:
                ys = cols["kappa"]
            if xs is None or ys is None:
                continue
            style = "-" if "theory" in name else "."
            if "theory" not in name and "mc" not in name:
                style = "-"
            ax.plot(xs, ys, style, label=label, markersize=3)
        ax.set_title(key)
        ax.grid(True, alpha=0.3)
        if len(files) <= 12:
            ax.legend(fontsize=6)
    for ax in axes.flat[n:]:
        ax.set_visible(False)
    fig.tight_layout()
    out = args.out or args.run_dir / "plots.png"
    fig.savefig(out, dpi=130)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
