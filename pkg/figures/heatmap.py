#!/usr/bin/env python3
"""Field heatmap from a `rdode ey` (or 2D simulate) artifact directory:
the u component of final.csv as an image, with the Omega_2 boundary from
mask.pbm overlaid when present."""

import math
import os

import matplotlib.pyplot as plt

import figcommon


def _to_image(xs, ys, values):
    nx = len({round(x, 12) for x in xs})
    ny = len(values) // nx
    if nx * ny != len(values):
        raise SystemExit("field is not a full raster")
    return [values[r * nx:(r + 1) * nx] for r in range(ny)], nx, ny


def plot_heatmap(artifact_dir, component="u"):
    cols = figcommon.read_csv_columns(os.path.join(artifact_dir, "final.csv"))
    if "y" not in cols:
        raise SystemExit("heatmap needs a 2D field artifact (x,y,u,v)")
    img, nx, ny = _to_image(cols["x"], cols["y"], cols[component])

    fig, ax = plt.subplots()
    im = ax.imshow(img, origin="lower", extent=(0.0, 1.0, 0.0, 1.0),
                   interpolation="nearest")
    fig.colorbar(im, ax=ax, label=component)

    mask_path = os.path.join(artifact_dir, "mask.pbm")
    if os.path.exists(mask_path):
        w, h, bits = figcommon.read_pbm_ascii(mask_path)
        grid = [bits[r * w:(r + 1) * w] for r in range(h)]
        ax.contour([[float(b) for b in row] for row in grid],
                   levels=[0.5], colors="white", linewidths=0.8,
                   extent=(0.0, 1.0, 0.0, 1.0), origin="lower")

    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.grid(False)
    fig.tight_layout()
    return fig


def main():
    args = figcommon.make_parser(__doc__).parse_args()
    figcommon.apply_style()
    figcommon.save(plot_heatmap(args.artifact_dir), args.out)


if __name__ == "__main__":
    main()
