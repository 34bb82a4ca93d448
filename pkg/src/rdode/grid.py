"""Cell-centered grids on (0,1) and (0,1)^2, the Neumann Laplacian,
domain partitions (masks) and their file formats (PBM/PGM, CSV dumps).

The Laplacian uses reflected ghost cells, so every row sums to zero exactly
and constants lie in the kernel; masks align with cells by construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import MaskError


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid on the unit interval or unit square."""

    dim: int
    nx: int
    ny: int = 1

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if self.nx < 4 or (self.dim == 2 and self.ny < 4):
            raise ValueError("grid needs at least 4 cells per direction")
        if self.dim == 2 and self.nx != self.ny:
            # square cells keep the zero-row-sum identity exact
            raise ValueError("2D grids must be square (nx == ny)")

    @property
    def n(self):
        return self.nx

    @property
    def h(self):
        return 1.0 / self.nx

    @property
    def cell_count(self):
        return self.nx * (self.ny if self.dim == 2 else 1)

    @property
    def cell_measure(self):
        return self.h ** self.dim

    def centers(self):
        """Cell-center coordinates; 1D: (x,), 2D: (x, y) row-major (y outer)."""
        x = (np.arange(self.nx) + 0.5) * self.h
        if self.dim == 1:
            return (x,)
        y = (np.arange(self.ny) + 0.5) * self.h
        X, Y = np.meshgrid(x, y)
        return X.ravel(), Y.ravel()


def build_grid(dim, n, ny=None):
    if dim == 1:
        return Grid(dim=1, nx=n)
    return Grid(dim=dim, nx=n, ny=n if ny is None else ny)


@dataclass(frozen=True)
class NeumannLaplacian:
    """Sparse symmetric Laplacian with no-flux (reflected-ghost) boundaries."""

    grid: Grid
    matrix: sp.csr_matrix

    def apply(self, v):
        return self.matrix @ v


def _laplacian_1d(n, h):
    main = np.full(n, -2.0)
    main[0] = main[-1] = -1.0
    off = np.ones(n - 1)
    L = sp.diags([off, main, off], [-1, 0, 1], format="csr")
    # scale by the exact integer n^2 (= 1/h^2): every entry stays an exact
    # small integer multiple, so row sums vanish in floating point
    return L * float(n * n)


def neumann_laplacian(grid):
    """3-point (1D) / 5-point (2D) stencil at scale 1/h^2."""
    Lx = _laplacian_1d(grid.nx, grid.h)
    if grid.dim == 1:
        return NeumannLaplacian(grid=grid, matrix=Lx.tocsr())
    Ly = _laplacian_1d(grid.ny, grid.h)
    Ix = sp.identity(grid.nx, format="csr")
    Iy = sp.identity(grid.ny, format="csr")
    L = sp.kron(Iy, Lx) + sp.kron(Ly, Ix)
    return NeumannLaplacian(grid=grid, matrix=L.tocsr())


def _merge_multiplicities(values, count, tol=1e-9):
    out = []
    for mu in values:
        if out and abs(mu - out[-1][0]) <= tol * max(1.0, abs(mu)):
            out[-1][1] += 1
        else:
            out.append([mu, 1])
        if len(out) > count:
            out.pop()
            break
    return [(float(mu), int(m)) for mu, m in out[:count]]


def laplacian_eigenvalues(grid, count, kind="analytic"):
    """Ascending eigenvalues mu_k of -Laplacian with merged multiplicities.

    analytic: (k*pi)^2 on (0,1), pi^2*(j^2+k^2) on (0,1)^2.
    discrete: eigenvalues of -L; in 1D these are (4/h^2)*sin^2(k*pi/(2n)).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if kind == "analytic":
        if grid.dim == 1:
            mus = [(np.pi * k) ** 2 for k in range(count)]
            return [(float(mu), 1) for mu in mus]
        kmax = int(np.ceil(np.sqrt(2.0 * count))) + 2
        sums = sorted((j * j + k * k)
                      for j in range(kmax) for k in range(kmax))
        merged = _merge_multiplicities([float(s) for s in sums], count, tol=0.0)
        return [(np.pi ** 2 * s, m) for s, m in merged]
    if kind != "discrete":
        raise ValueError("kind must be 'analytic' or 'discrete'")
    n, h = grid.nx, grid.h
    lam = (4.0 / (h * h)) * np.sin(np.arange(n) * np.pi / (2 * n)) ** 2
    if grid.dim == 1:
        return [(float(mu), 1) for mu in lam[:count]]
    sums = np.sort((lam[:, None] + lam[None, :]).ravel())
    return _merge_multiplicities(sums, count)


# ---------------------------------------------------------------------------
# Domain partitions and masks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DomainPartition:
    """Per-cell branch assignment Omega_1..Omega_J with cell-counted measures."""

    grid: Grid
    assignment: np.ndarray  # flat int array, values are branch labels >= 1

    def __post_init__(self):
        if self.assignment.shape != (self.grid.cell_count,):
            raise MaskError("assignment length does not match the grid")
        if np.any(self.assignment < 1):
            raise MaskError("branch indices must be >= 1")

    @property
    def labels(self):
        return sorted(int(v) for v in np.unique(self.assignment))

    def measure(self, label):
        return int(np.sum(self.assignment == label)) * self.grid.cell_measure

    @property
    def measures(self):
        return {lbl: self.measure(lbl) for lbl in self.labels}

    def interior_mask(self, label, band=2):
        """Cells of a region at least `band` cells from any assignment change."""
        a = self.assignment
        if self.grid.dim == 1:
            same = a == label
            ok = same.copy()
            for s in range(1, band + 1):
                ok[s:] &= same[:-s]
                ok[:-s] &= same[s:]
            return ok
        A = a.reshape(self.grid.ny, self.grid.nx)
        same = np.pad(A == label, band, mode="edge")
        ok = np.ones_like(A, dtype=bool)
        for dy in range(-band, band + 1):
            for dx in range(-band, band + 1):
                ok &= same[band + dy:band + dy + A.shape[0],
                           band + dx:band + dx + A.shape[1]]
        return ok.ravel()


def stripe_partition(grid, lo, hi, inside_label=2, outside_label=1):
    """1D partition: cells with center in (lo, hi) get inside_label."""
    if grid.dim != 1:
        raise ValueError("stripe_partition is 1D only")
    (x,) = grid.centers()
    assignment = np.where((x > lo) & (x < hi), inside_label, outside_label)
    return DomainPartition(grid=grid, assignment=assignment.astype(int))


def uniform_partition(grid, label=1):
    return DomainPartition(grid=grid,
                           assignment=np.full(grid.cell_count, label, dtype=int))


# --- PBM / PGM ---------------------------------------------------------------


def _read_pnm_tokens(data):
    """Token stream of an ASCII PNM header/body, comments stripped."""
    tokens = []
    for line in data.split(b"\n"):
        line = line.split(b"#", 1)[0]
        tokens.extend(line.split())
    return tokens


def read_mask(grid, path, inside_label=2, outside_label=1):
    """Load a PBM (P1/P4, J=2) or PGM (P2, gray = region index) mask."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data[:2] in (b"P1", b"P2", b"P4"):
        raise MaskError(f"{path}: not a P1/P2/P4 portable anymap")
    magic = data[:2]
    if magic == b"P4":
        # binary header: magic, width, height, then packed bits
        parts = data.split(None, 3)
        if len(parts) < 4:
            raise MaskError(f"{path}: truncated P4 file")
        w, h = int(parts[1]), int(parts[2])
        raw = parts[3]
        row_bytes = (w + 7) // 8
        if len(raw) < row_bytes * h:
            raise MaskError(f"{path}: truncated P4 raster")
        bits = np.unpackbits(
            np.frombuffer(raw[:row_bytes * h], dtype=np.uint8)
        ).reshape(h, row_bytes * 8)[:, :w]
        values = bits.astype(int)
    else:
        tokens = _read_pnm_tokens(data)
        w, h = int(tokens[1]), int(tokens[2])
        body_at = 3
        if magic == b"P2":
            body_at = 4  # skip maxval
        values = np.array([int(t) for t in tokens[body_at:body_at + w * h]])
        if values.size != w * h:
            raise MaskError(f"{path}: expected {w * h} samples, got {values.size}")
        values = values.reshape(h, w)
    exp_w = grid.nx
    exp_h = grid.ny if grid.dim == 2 else 1
    if (w, h) != (exp_w, exp_h):
        raise MaskError(
            f"{path}: mask is {w}x{h}, grid is {exp_w}x{exp_h}")
    if magic in (b"P1", b"P4"):
        assignment = np.where(values.ravel() > 0, inside_label, outside_label)
    else:
        assignment = values.ravel()
        if np.any(assignment < 1):
            raise MaskError(f"{path}: PGM region indices must be >= 1")
    return DomainPartition(grid=grid, assignment=assignment.astype(int))


def write_mask_pbm(partition, path, inside_label=2):
    """Write the inside_label region as a P1 bitmap."""
    g = partition.grid
    h = g.ny if g.dim == 2 else 1
    bits = (partition.assignment == inside_label).astype(int).reshape(h, g.nx)
    lines = [f"P1", f"{g.nx} {h}"]
    for row in bits:
        lines.append(" ".join(str(b) for b in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# --- EY mask ----------------------------------------------------------------

# Block glyphs as unions of axis-aligned rectangles (x0, y0, x1, y1) in a
# unit letter box, y up. Exact geometry is immaterial; only the partition
# measures enter the claims.
_GLYPH_E = [
    (0.00, 0.00, 0.28, 1.00),
    (0.00, 0.00, 1.00, 0.20),
    (0.00, 0.42, 0.85, 0.62),
    (0.00, 0.80, 1.00, 1.00),
]
_GLYPH_Y = [
    (0.00, 0.60, 0.30, 1.00),
    (0.70, 0.60, 1.00, 1.00),
    (0.36, 0.00, 0.64, 0.62),
    (0.00, 0.52, 1.00, 0.66),
]


def _glyph_depth(px, py, rects):
    """Depth of (px,py) inside the rect union (positive inside)."""
    depth = np.full(px.shape, -np.inf)
    for x0, y0, x1, y1 in rects:
        d = np.minimum(np.minimum(px - x0, x1 - px),
                       np.minimum(py - y0, y1 - py))
        depth = np.maximum(depth, d)
    return depth


def _ey_depth(X, Y, scale):
    """Depth field of the two-letter EY glyph centered in the unit square."""
    lw, lh, gap = 0.42, 1.0, 0.16
    W, H = (2 * lw + gap) * scale, lh * scale
    x0, y0 = 0.5 - W / 2, 0.5 - H / 2
    ex = (X - x0) / (lw * scale)
    ey = (Y - y0) / (lh * scale)
    yx = (X - x0 - (lw + gap) * scale) / (lw * scale)
    d_e = _glyph_depth(ex, ey, _GLYPH_E)
    d_y = _glyph_depth(yx, ey, _GLYPH_Y)
    return np.maximum(d_e, d_y) * scale


def generate_ey_mask(grid, fraction, inside_label=2, outside_label=1):
    """Rasterize block letters 'EY' occupying the given area fraction.

    The glyph is scaled so that its raster area approximates the target and
    the final cell set is the top-K cells by glyph depth, which pins
    |Omega_2| to within one cell area of fraction*|Omega|.
    """
    if grid.dim != 2:
        raise ValueError("EY mask is 2D only")
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be in (0, 1)")
    X, Y = grid.centers()
    target = int(round(fraction * grid.cell_count))
    if target < 1:
        raise ValueError("fraction too small for this grid")
    lo, hi = 0.01, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        cnt = int(np.sum(_ey_depth(X, Y, mid) > 0.0))
        if cnt < target:
            lo = mid
        else:
            hi = mid
    depth = _ey_depth(X, Y, hi)
    order = np.lexsort((np.arange(grid.cell_count), -depth))
    assignment = np.full(grid.cell_count, outside_label, dtype=int)
    assignment[order[:target]] = inside_label
    return DomainPartition(grid=grid, assignment=assignment)


# --- field dumps -------------------------------------------------------------


def save_field_csv(grid, u, v, path):
    """Dump (u, v) at cell centers, header x[,y],u,v, row-major order."""
    if grid.dim == 1:
        (x,) = grid.centers()
        cols = np.column_stack([x, u, v])
        header = "x,u,v"
    else:
        x, y = grid.centers()
        cols = np.column_stack([x, y, u, v])
        header = "x,y,u,v"
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in cols:
            fh.write(",".join(repr(float(c)) for c in row) + "\n")


def load_field_csv(path):
    """Inverse of save_field_csv; returns (header_names, columns dict)."""
    with open(path) as fh:
        names = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",").reshape(-1, len(names))
    return {name: data[:, i] for i, name in enumerate(names)}


def save_field_pgm(grid, values, path):
    """8-bit P2 snapshot with linear min-max scaling; scaling in sidecar JSON."""
    h = grid.ny if grid.dim == 2 else 1
    arr = np.asarray(values, dtype=float).reshape(h, grid.nx)
    vmin, vmax = float(arr.min()), float(arr.max())
    span = vmax - vmin if vmax > vmin else 1.0
    pix = np.round(255.0 * (arr - vmin) / span).astype(int)
    lines = ["P2", f"{grid.nx} {h}", "255"]
    for row in pix:
        lines.append(" ".join(str(p) for p in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(str(path) + ".json", "w") as fh:
        json.dump({"min": vmin, "max": vmax}, fh)
