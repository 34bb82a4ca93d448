"""Linearization around a stationary field, rightmost spectra, and
mechanical checks of every stability/instability hypothesis.

The linearized operator has the block form

    M = [[diag(a), diag(b)],
         [diag(c), gamma*L + diag(d)]]

with a, b, c, d the kinetics Jacobian evaluated cellwise: the u-equation
carries no diffusion, so the (1,1) and (1,2) blocks are diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kinetics
from .errors import NonConvergenceError
from .grid import laplacian_eigenvalues, neumann_laplacian
from .kinetics import jacobian
from .stationary import check_sineq

SIGN_TOL = 1e-12
VERDICT_MARGIN = 1e-6
DENSE_LIMIT = 2000


@dataclass
class Linearization:
    grid: object
    gamma: float
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    matrix: sp.csr_matrix = field(repr=False)


def assemble_linearization(model, fld):
    """Coefficient fields and the assembled 2n x 2n block operator."""
    a, b, c, d = jacobian(model, fld.U, fld.V)
    a, b, c, d = (np.atleast_1d(np.asarray(z)) for z in (a, b, c, d))
    L = neumann_laplacian(fld.grid).matrix
    M = sp.bmat([[sp.diags(a), sp.diags(b)],
                 [sp.diags(c), fld.gamma * L + sp.diags(d)]], format="csr")
    return Linearization(grid=fld.grid, gamma=fld.gamma,
                         a=a, b=b, c=c, d=d, matrix=M)


@dataclass
class SpectrumReport:
    rightmost: list  # [(re, im)] sorted by re descending
    method: str
    verdict: str
    residuals: list

    def to_dict(self):
        return {"eigenvalues": [[re, im] for re, im in self.rightmost],
                "method": self.method, "verdict": self.verdict,
                "residuals": self.residuals}


def _verdict(re_max):
    if re_max > VERDICT_MARGIN:
        return "unstable"
    if re_max < -VERDICT_MARGIN:
        return "stable"
    return "marginal"


def _certify(M, vals, vecs, tol=1e-8):
    residuals = []
    for lam, x in zip(vals, vecs.T):
        r = np.linalg.norm(M @ x - lam * x) / np.linalg.norm(x)
        residuals.append(float(r))
        if r > tol:
            raise NonConvergenceError(
                f"eigenpair residual {r:.3e} exceeds {tol:.1e}")
    return residuals


def rightmost_spectrum(lin, m=5):
    """The m eigenvalues of largest real part, residual-certified.

    Dense solve below 2000 unknowns, otherwise shift-invert Arnoldi at the
    shifts max(a)+1 and 0.
    """
    M = lin.matrix
    n2 = M.shape[0]
    if n2 > 100000:
        raise ValueError("operator too large")
    m = min(m, n2)
    if n2 <= DENSE_LIMIT:
        vals, vecs = np.linalg.eig(M.toarray())
        order = np.argsort(-vals.real)
        vals, vecs = vals[order][:m], vecs[:, order][:, :m]
        residuals = _certify(M, vals, vecs)
        method = "dense"
    else:
        shifts = [float(np.max(lin.a)) + 1.0, 0.0]
        found_vals, found_vecs = [], []
        for sigma in shifts:
            k = min(2 * m + 10, n2 - 2)
            try:
                vals, vecs = spla.eigs(M.tocsc(), k=k, sigma=sigma, which="LM")
            except spla.ArpackNoConvergence as exc:
                # keep whatever this shift produced; the other shift usually
                # covers the rightmost cluster on its own
                vals, vecs = exc.eigenvalues, exc.eigenvectors
            if vals.size:
                found_vals.append(vals)
                found_vecs.append(vecs)
        if not found_vals:
            raise NonConvergenceError("no eigenpairs converged at any shift")
        vals = np.concatenate(found_vals)
        vecs = np.hstack(found_vecs)
        # dedupe nearly identical pairs from the two shifts
        order = np.argsort(-vals.real)
        vals, vecs = vals[order], vecs[:, order]
        keep = []
        for i, lam in enumerate(vals):
            if all(abs(lam - vals[j]) > 1e-9 * max(1.0, abs(lam))
                   for j in keep):
                keep.append(i)
            if len(keep) == m:
                break
        vals, vecs = vals[keep], vecs[:, keep]
        residuals = _certify(M, vals, vecs)
        method = "iterative"
    pairs = [(float(lam.real), float(lam.imag)) for lam in vals]
    return SpectrumReport(rightmost=pairs, method=method,
                          verdict=_verdict(pairs[0][0]), residuals=residuals)


@dataclass
class AssumptionAudit:
    """Signed margins plus booleans for every hypothesis in the theory."""

    checks: dict  # name -> {"pass": bool, "margin": float}
    bifurcation_gammas: list
    autocatalysis_fraction: float | None = None

    def passed(self, name):
        return self.checks[name]["pass"]

    def margin(self, name):
        return self.checks[name]["margin"]

    def to_dict(self):
        out = {name: dict(v) for name, v in self.checks.items()}
        out["bifurcation_gammas"] = [[k, g] for k, g in
                                     self.bifurcation_gammas]
        if self.autocatalysis_fraction is not None:
            out["autocatalysis_fraction"] = self.autocatalysis_fraction
        return out


def audit_assumptions(model, steady, branch_set, gamma, grid,
                      eigen_count=64, second_branch_label=None):
    """All hypothesis checks with signed margins (positive = satisfied)."""
    from .stationary import bifurcation_gammas

    checks = {}
    a0, d0 = steady.a0, steady.d0
    checks["assumption1_a0_nonzero"] = {
        "pass": bool(abs(a0) > SIGN_TOL), "margin": float(abs(a0))}

    margin3, kmin = check_sineq(steady, gamma, grid, count=eigen_count)
    checks["assumption3_nonresonance"] = {
        "pass": bool(margin3 > SIGN_TOL), "margin": float(margin3),
        "nearest_mode": int(kmin)}

    sep = branch_set.separation_gap if branch_set is not None else 0.0
    count = branch_set.J if branch_set is not None else 0
    checks["assumption4_two_branches"] = {
        "pass": bool(count >= 2 and sep > SIGN_TOL), "margin": float(sep),
        "branch_count": int(count)}

    m5 = min(-a0, -d0, -steady.trace, steady.det)
    checks["assumption5_linear_stability"] = {
        "pass": bool(m5 > SIGN_TOL), "margin": float(m5)}

    if branch_set is not None and second_branch_label is not None:
        k2 = branch_set.by_label(second_branch_label)
        u2 = k2(np.array([steady.v_bar]))[0]
        fu2, _, _, gv2 = jacobian(model, u2, steady.v_bar)
        m_sec = min(-fu2, -gv2)
        checks["second_branch_condition"] = {
            "pass": bool(m_sec > SIGN_TOL), "margin": float(m_sec),
            "f_u": float(fu2), "g_v": float(gv2)}

    mus = [mu for mu, _ in laplacian_eigenvalues(grid, eigen_count,
                                                 "analytic")]
    gammas = bifurcation_gammas(steady, mus) if abs(a0) > SIGN_TOL else []
    return AssumptionAudit(checks=checks, bifurcation_gammas=gammas)


def classify_regular(model, fld):
    """Instability verdict for a single-branch stationary field."""
    a, _, _, _ = jacobian(model, fld.U, fld.V)
    amax = float(np.max(np.atleast_1d(a)))
    if abs(amax) <= 1e-10:
        return "degenerate"
    if amax > 0:
        return "unstable (f_u>0 somewhere)"
    return "unstable (f_u<0 everywhere, convex domain)"


def autocatalysis_check(model, fld):
    """Fraction of cells with f_u > 0; any positive measure forces instability."""
    a, _, _, _ = jacobian(model, fld.U, fld.V)
    frac = float(np.mean(np.atleast_1d(a) > SIGN_TOL))
    return frac, ("unstable" if frac > 0 else "inconclusive")
