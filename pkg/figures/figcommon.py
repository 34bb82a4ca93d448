"""Shared plumbing for the figure scripts.

All scripts consume artifact directories written by the `rdode` CLI and
never recompute any mathematics. The style file pins every aesthetic so a
rerun on the same artifacts is byte-for-byte reproducible.
"""

import argparse
import csv
import json
import os
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

STYLE = os.path.join(os.path.dirname(os.path.abspath(__file__)),
                     "style.mplstyle")


def make_parser(description):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("artifact_dir", help="directory written by the rdode CLI")
    p.add_argument("--out", required=True, help="output image path")
    return p


def apply_style():
    plt.style.use(STYLE)


def read_csv_columns(path):
    """Columns of a comma-separated artifact as {name: list[float]}."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise SystemExit(f"{path}: no data rows")
    names = rows[0]
    cols = {name: [] for name in names}
    for row in rows[1:]:
        for name, cell in zip(names, row):
            cols[name].append(float(cell))
    return cols


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def read_pbm_ascii(path):
    """P1 bitmap -> (width, height, flat 0/1 list)."""
    with open(path) as fh:
        tokens = []
        for line in fh:
            tokens.extend(line.split("#", 1)[0].split())
    if tokens[0] != "P1":
        raise SystemExit(f"{path}: not a P1 bitmap")
    w, h = int(tokens[1]), int(tokens[2])
    bits = [int(t) for t in tokens[3:3 + w * h]]
    if len(bits) != w * h:
        raise SystemExit(f"{path}: truncated bitmap")
    return w, h, bits


def save(fig, out_path):
    """Write the figure with the invoking command line in the metadata."""
    fig.savefig(out_path,
                metadata={"Description": " ".join(sys.argv)})
    plt.close(fig)
