#!/usr/bin/env python3
"""Nullcline diagram in the (U, V) plane from a `rdode branches` artifact
directory: every f = 0 branch, the g = 0 curve, constant steady states,
and the model-specific markers recorded in report.json."""

import os

import matplotlib.pyplot as plt

import figcommon


def plot_nullclines(artifact_dir):
    branches = figcommon.read_csv_columns(
        os.path.join(artifact_dir, "branches.csv"))
    gdata = figcommon.read_csv_columns(
        os.path.join(artifact_dir, "g_nullcline.csv"))
    markers = figcommon.read_json(os.path.join(artifact_dir, "report.json"))

    fig, ax = plt.subplots()
    vv = branches["V"]
    k_names = [n for n in branches if n != "V"]
    if not k_names:
        raise SystemExit("branch artifact holds no branch columns")
    for name in k_names:
        ax.plot(branches[name], vv, label=f"f = 0 ({name})")
    uu = gdata["U"]
    for name in gdata:
        if name == "U":
            continue
        ax.plot(uu, gdata[name], "--", color="0.35",
                label="g = 0" if name == "g0" else None)

    v_lo, v_hi = min(vv), max(vv)
    for s in markers.get("steady_states", []):
        if v_lo <= s["v_bar"] <= v_hi:
            ax.plot(s["u_bar"], s["v_bar"], "ko", ms=6, zorder=5)
            ax.annotate(f"({s['u_bar']:.3g}, {s['v_bar']:.3g})",
                        (s["u_bar"], s["v_bar"]),
                        textcoords="offset points", xytext=(6, 6), fontsize=8)
    if "excluded_point" in markers:
        ex, ey = markers["excluded_point"]
        ax.plot(ex, ey, "o", mfc="white", mec="k", ms=7, zorder=5)
    if "u_m" in markers:
        ax.axvline(markers["u_m"], color="0.5", lw=0.8, ls=":")
        ax.annotate("$U_m$", (markers["u_m"], v_hi),
                    textcoords="offset points", xytext=(3, -12), fontsize=9)

    ax.set_xlabel("U")
    ax.set_ylabel("V")
    ax.set_ylim(v_lo, v_hi)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig


def main():
    args = figcommon.make_parser(__doc__).parse_args()
    figcommon.apply_style()
    figcommon.save(plot_nullclines(args.artifact_dir), args.out)


if __name__ == "__main__":
    main()
