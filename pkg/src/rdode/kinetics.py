"""Kinetics families, their derivatives, constant steady states and nullcline branches.

Four reaction pairs (f, g) are supported, each parametrized by two positive
rates alpha and beta:

  GrayScott      f = u^2 v - alpha*u            g = -u^2 v + beta*(1 - v)
  Brusselator    f = alpha + u^2 v - (beta+1)*u g = beta*u - u^2 v
  Oregonator     f = u - u^2 + alpha*v*(beta-u)/(beta+u)
                                                g = u - v
  PredatorPrey   f = u*(u^2/(u^3+1) - v)        g = v*(alpha*u - v - beta)

All evaluators are plain numpy expressions: they accept scalars or arrays and
are bit-for-bit deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import AssumptionError, FoldError, SingularPointError

FAMILIES = ("GrayScott", "Brusselator", "Oregonator", "PredatorPrey")

# Algebraic identities are checked to 100x eps, root solves to 1e4x eps.
TOL_ALGEBRAIC = 1e-12
TOL_ROOT = 1e-10


@dataclass(frozen=True)
class KineticModel:
    """A named kinetics pair (f, g) with its rate parameters."""

    family: str
    alpha: float
    beta: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kinetics family {self.family!r}")
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("alpha and beta must be positive")

    def to_record(self):
        return {"family": self.family, "alpha": self.alpha, "beta": self.beta}

    @classmethod
    def from_record(cls, rec):
        return cls(family=rec["family"], alpha=float(rec["alpha"]),
                   beta=float(rec["beta"]))


@dataclass(frozen=True)
class SteadyState:
    """A constant solution (u_bar, v_bar) with its Jacobian entries."""

    u_bar: float
    v_bar: float
    a0: float
    b0: float
    c0: float
    d0: float
    label: int

    @property
    def det(self):
        return self.a0 * self.d0 - self.b0 * self.c0

    @property
    def trace(self):
        return self.a0 + self.d0


def _check_oregonator_domain(model, u):
    if np.any(np.asarray(u) + model.beta == 0):
        raise SingularPointError(
            f"singular point: u = -beta = {-model.beta} for the Oregonator")


def eval_f(model, u, v):
    """f(u, v) for the model family."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    a, b = model.alpha, model.beta
    if model.family == "GrayScott":
        out = u * u * v - a * u
    elif model.family == "Brusselator":
        out = a + u * u * v - (b + 1.0) * u
    elif model.family == "Oregonator":
        _check_oregonator_domain(model, u)
        out = u - u * u + a * v * (b - u) / (b + u)
    else:  # PredatorPrey
        out = u * (u * u / (u ** 3 + 1.0) - v)
    return out if out.ndim else float(out)


def eval_g(model, u, v):
    """g(u, v) for the model family."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    a, b = model.alpha, model.beta
    if model.family == "GrayScott":
        out = -u * u * v + b * (1.0 - v)
    elif model.family == "Brusselator":
        out = b * u - u * u * v
    elif model.family == "Oregonator":
        out = u - v
    else:  # PredatorPrey
        out = v * (a * u - v - b)
    return out if out.ndim else float(out)


def jacobian(model, u, v):
    """Analytic partials (f_u, f_v, g_u, g_v), vectorized."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    a, b = model.alpha, model.beta
    if model.family == "GrayScott":
        fu = 2.0 * u * v - a
        fv = u * u
        gu = -2.0 * u * v
        gv = -u * u - b
    elif model.family == "Brusselator":
        fu = 2.0 * u * v - (b + 1.0)
        fv = u * u
        gu = b - 2.0 * u * v
        gv = -u * u
    elif model.family == "Oregonator":
        _check_oregonator_domain(model, u)
        fu = 1.0 - 2.0 * u - 2.0 * a * b * v / (b + u) ** 2
        fv = a * (b - u) / (b + u)
        gu = np.ones_like(u)
        gv = -np.ones_like(u)
    else:  # PredatorPrey
        q = u ** 3 + 1.0
        fu = 3.0 * u * u / (q * q) - v
        fv = -u
        gu = a * v
        gv = a * u - 2.0 * v - b
    if fu.ndim:
        return fu, fv, gu, gv
    return float(fu), float(fv), float(gu), float(gv)


def _make_steady(model, u_bar, v_bar, label):
    a0, b0, c0, d0 = jacobian(model, u_bar, v_bar)
    return SteadyState(u_bar=float(u_bar), v_bar=float(v_bar),
                       a0=a0, b0=b0, c0=c0, d0=d0, label=label)


def constant_steady_states(model):
    """All real constant solutions, ordered by the conventional labels.

    Gray-Scott returns one or three states depending on the sign of
    1 - 4*alpha^2/beta; the nonzero predator-prey state is found by a
    bracketed root solve on u > 0.
    """
    a, b = model.alpha, model.beta
    if model.family == "GrayScott":
        states = [_make_steady(model, 0.0, 1.0, 1)]
        disc = 1.0 - 4.0 * a * a / b
        if disc > 0.0:
            v2 = 0.5 * (1.0 + np.sqrt(disc))
            v3 = 0.5 * (1.0 - np.sqrt(disc))
            states.append(_make_steady(model, a / v2, v2, 2))
            states.append(_make_steady(model, a / v3, v3, 3))
        return states
    if model.family == "Brusselator":
        return [_make_steady(model, a, b / a, 1)]
    if model.family == "Oregonator":
        # u^2 + u*(beta+alpha-1) - beta*(alpha+1) = 0, v = u
        p = b + a - 1.0
        disc = p * p + 4.0 * b * (a + 1.0)
        u2 = 0.5 * (-p + np.sqrt(disc))
        u3 = 0.5 * (-p - np.sqrt(disc))
        return [_make_steady(model, 0.0, 0.0, 1),
                _make_steady(model, u2, u2, 2),
                _make_steady(model, u3, u3, 3)]
    # PredatorPrey: nonzero state solves alpha*u - u^2/(u^3+1) - beta = 0
    # on u > beta/alpha (below that the line alpha*u - beta is negative).
    def resid(u):
        return a * u - u * u / (u ** 3 + 1.0) - b

    lo = b / a
    hi = lo + 1.0
    while resid(hi) <= 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise AssumptionError("no nonzero predator-prey steady state found")
    u1 = brentq(resid, lo, hi, xtol=1e-15, rtol=8.9e-16)
    v1 = a * u1 - b
    return [_make_steady(model, u1, v1, 1),
            _make_steady(model, 0.0, 0.0, 2)]


# ---------------------------------------------------------------------------
# Nullcline branches of f(U, V) = 0
# ---------------------------------------------------------------------------


@dataclass
class Branch:
    """One solution branch U = k(V) of f(U, V) = 0 on an open interval."""

    label: int
    v_lo: float
    v_hi: float
    _evaluate: callable = field(repr=False)

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        if np.any(v <= self.v_lo) or np.any(v >= self.v_hi):
            raise FoldError(
                f"V outside the branch window ({self.v_lo}, {self.v_hi})")
        out = self._evaluate(v)
        return out if np.ndim(out) else float(out)


@dataclass
class BranchSet:
    """Labelled branches k_1..k_J sharing the open interval (v_lo, v_hi)."""

    v_lo: float
    v_hi: float
    branches: list
    separation_gap: float

    @property
    def J(self):
        return len(self.branches)

    def by_label(self, label):
        for br in self.branches:
            if br.label == label:
                return br
        raise KeyError(f"no branch with label {label}")


def branch_derivative(model, branch, v):
    """k'(V) = -f_v/f_u along the branch (implicit differentiation)."""
    u = branch(v)
    fu, fv, _, _ = jacobian(model, u, v)
    if np.any(np.abs(np.asarray(fu)) < TOL_ALGEBRAIC):
        raise FoldError("f_u vanishes on the branch (fold)", v_fold=v)
    out = -np.asarray(fv) / np.asarray(fu)
    return out if out.ndim else float(out)


def _branch_poly_coeffs(model, v):
    """Coefficients (high to low) of the cleared-denominator polynomial in U."""
    a, b = model.alpha, model.beta
    v = np.asarray(v, dtype=float)
    one = np.ones_like(v)
    if model.family == "Oregonator":
        # (U - U^2)(beta + U) + alpha*V*(beta - U) = 0, multiplied by -1:
        return np.stack([one, (b - 1.0) * one, a * v - b, -a * v * b])
    if model.family == "PredatorPrey":
        # v*(u^3 + 1) - u^2 = 0  (nonzero branches)
        return np.stack([v, -one, np.zeros_like(v), v])
    raise ValueError(f"no polynomial branches for {model.family}")


def _polish_poly_root(coeffs, u, iters=8):
    """Vectorized Newton polish of a root of the stacked polynomial."""
    deg = coeffs.shape[0] - 1
    for _ in range(iters):
        p = coeffs[0]
        dp = np.zeros_like(u)
        for c in coeffs[1:]:
            dp = dp * u + p
            p = p * u + c
        step = np.where(dp != 0.0, p / np.where(dp != 0.0, dp, 1.0), 0.0)
        u = u - step
    return u


def _real_roots_desc(coeffs_1d, tol=1e-8):
    roots = np.roots(coeffs_1d)
    scale = max(1.0, np.max(np.abs(roots))) if roots.size else 1.0
    real = np.sort(np.real(roots[np.abs(np.imag(roots)) <= tol * scale]))[::-1]
    return real


def _track_polynomial_branches(model, v_lo, v_hi, samples=801):
    """Sample the window, follow the real roots continuously in V.

    Branches of a polynomial cannot cross without a fold, so the b-th largest
    real root is a continuous branch as long as the root count is constant.
    A change of count inside the window is reported as a fold.
    """
    inset = 1e-9 * (v_hi - v_lo)
    vs = np.linspace(v_lo + inset, v_hi - inset, samples)
    if model.family == "Oregonator":
        # exactly at V=0 the cleared cubic picks up the excluded point
        # (-beta, 0); nudge the sample off it
        vs = np.where(np.abs(vs) < 1e-12, 1e-9, vs)
    coeffs = _branch_poly_coeffs(model, vs)
    tables = []
    count = None
    for j in range(samples):
        roots = _real_roots_desc(coeffs[:, j])
        if count is None:
            count = roots.size
            tables = [np.empty(samples) for _ in range(count)]
        elif roots.size != count:
            raise FoldError(
                f"branch count changes near V = {vs[j]:.6g} "
                f"({count} -> {roots.size}); shrink the window",
                v_fold=float(vs[j]))
        for b in range(count):
            tables[b][j] = roots[b]
    return vs, tables


def _tracked_evaluator(model, vs, table):
    def _eval(v):
        u0 = np.interp(v, vs, table)
        coeffs = _branch_poly_coeffs(model, v)
        return _polish_poly_root(coeffs, np.asarray(u0, dtype=float))
    return _eval


def _closed_form_branches(model, v_lo, v_hi):
    a, b = model.alpha, model.beta
    if model.family == "GrayScott":
        if v_lo <= 0.0 < v_hi or v_lo < 0.0 <= v_hi:
            raise FoldError("Gray-Scott branch k2 = alpha/V is singular at V=0",
                            v_fold=0.0)
        return [(1, lambda v: np.zeros_like(np.asarray(v, dtype=float))),
                (2, lambda v: a / np.asarray(v, dtype=float))]
    # Brusselator: branches exist for 0 < V < (beta+1)^2/(4*alpha)
    v_fold = (b + 1.0) ** 2 / (4.0 * a)
    if v_hi >= v_fold:
        raise FoldError(
            f"Brusselator branches merge at V = {v_fold:.6g}", v_fold=v_fold)
    if v_lo <= 0.0:
        raise FoldError("Brusselator branches are singular at V=0", v_fold=0.0)

    def k1(v):
        v = np.asarray(v, dtype=float)
        return (b + 1.0 + np.sqrt((b + 1.0) ** 2 - 4.0 * a * v)) / (2.0 * v)

    def k2(v):
        v = np.asarray(v, dtype=float)
        return (b + 1.0 - np.sqrt((b + 1.0) ** 2 - 4.0 * a * v)) / (2.0 * v)

    return [(1, k1), (2, k2)]


def branches(model, steady, v_window):
    """All solution branches of f(U, V) = 0 on the open window v_window.

    Labels are frozen per family to match the conventional k_1..k_J naming:
    Gray-Scott k1 = 0, k2 = alpha/V; Brusselator k1/k2 the +/- closed forms;
    Oregonator k1 through (0,0), k2 the upper branch, k3 the branch near
    U = -beta; predator-prey k1/k2 the upper/lower positive branches,
    k3 = 0 and k4 the negative root.
    """
    v_lo, v_hi = float(v_window[0]), float(v_window[1])
    if not v_lo < steady.v_bar < v_hi:
        raise ValueError("v_window must contain v_bar of the steady state")

    if model.family in ("GrayScott", "Brusselator"):
        entries = [(lbl, fn) for lbl, fn in
                   _closed_form_branches(model, v_lo, v_hi)]
        brs = [Branch(lbl, v_lo, v_hi, fn) for lbl, fn in entries]
    else:
        vs, tables = _track_polynomial_branches(model, v_lo, v_hi)
        evals = [_tracked_evaluator(model, vs, t) for t in tables]
        if model.family == "Oregonator":
            if len(tables) != 3:
                raise FoldError(
                    f"expected 3 Oregonator branches, found {len(tables)}")
            labels = (2, 1, 3)  # descending U: upper, middle (through 0), lower
            brs = [Branch(lbl, v_lo, v_hi, ev)
                   for lbl, ev in zip(labels, evals)]
            brs.sort(key=lambda br: br.label)
        else:  # PredatorPrey
            if v_lo <= 0.0:
                raise FoldError("predator-prey cubic degenerates at V <= 0",
                                v_fold=0.0)
            if len(tables) != 3:
                raise FoldError(
                    f"expected 3 nonzero predator-prey branches, found "
                    f"{len(tables)} (window may cross the hump maximum)")
            zero = Branch(3, v_lo, v_hi,
                          lambda v: np.zeros_like(np.asarray(v, dtype=float)))
            brs = [Branch(1, v_lo, v_hi, evals[0]),
                   Branch(2, v_lo, v_hi, evals[1]),
                   zero,
                   Branch(4, v_lo, v_hi, evals[2])]

    # pairwise separation over a residual-check sample
    vv = np.linspace(v_lo, v_hi, 202)[1:-1]
    vals = np.stack([br(vv) for br in brs])
    gap = np.inf
    for i in range(len(brs)):
        for j in range(i + 1, len(brs)):
            gap = min(gap, float(np.min(np.abs(vals[i] - vals[j]))))
    if gap <= 0.0:
        raise FoldError("branches are not separated on the window")
    return BranchSet(v_lo=v_lo, v_hi=v_hi, branches=brs,
                     separation_gap=gap)
