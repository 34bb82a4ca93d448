#!/usr/bin/env python3
"""Sup-norm deviation curves on a log axis from a norms.csv artifact
(`rdode decay` or `rdode simulate`); a stable construction shows up as a
straight line."""

import os

import matplotlib.pyplot as plt

import figcommon


def plot_decay(artifact_dir):
    cols = figcommon.read_csv_columns(os.path.join(artifact_dir, "norms.csv"))
    t = cols["t"]
    fig, ax = plt.subplots()
    for name in cols:
        if name == "t":
            continue
        positive = [(ti, vi) for ti, vi in zip(t, cols[name]) if vi > 0]
        if positive:
            ax.semilogy([p[0] for p in positive], [p[1] for p in positive],
                        label=name)
    decay_path = os.path.join(artifact_dir, "decay.json")
    if os.path.exists(decay_path):
        rep = figcommon.read_json(decay_path)
        ax.set_title(f"rate {rep['rate']:.3g}, verdict {rep['verdict']}",
                     fontsize=9)
    ax.set_xlabel("t")
    ax.set_ylabel("deviation (sup norm)")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig


def main():
    args = figcommon.make_parser(__doc__).parse_args()
    figcommon.apply_style()
    figcommon.save(plot_decay(args.artifact_dir), args.out)


if __name__ == "__main__":
    main()
