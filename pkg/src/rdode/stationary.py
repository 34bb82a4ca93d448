"""Construction of stationary solutions.

The discontinuous constructor reduces the problem to the V-equation
gamma*L*V + g(k_sigma(V), V) = 0 with U eliminated branch-wise, and solves
it by damped Newton with a direct sparse factorization per step. The
perturbed regular problem d*L*V + (1-d)*(V - v_bar) + g(k(V), V) = 0 is
handled by the same machinery, optionally with an amplitude constraint that
cuts transversally through the bifurcation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from . import kinetics
from .errors import (AssumptionError, NonConvergenceError, ResonanceError,
                     WindowViolationError)
from .grid import (laplacian_eigenvalues, neumann_laplacian, stripe_partition,
                   uniform_partition)
from .kinetics import branches, constant_steady_states, jacobian

RESONANCE_RTOL = 1e-8


@dataclass
class DeviationReport:
    """Measured counterparts of the existence theorem's epsilon and C*epsilon."""

    v_dev: float
    u_dev_1: float
    u_dev_2: float
    omega2_measure: float

    def to_dict(self):
        return {"v_dev": self.v_dev, "u_dev_1": self.u_dev_1,
                "u_dev_2": self.u_dev_2, "omega2_measure": self.omega2_measure}


@dataclass
class StationaryField:
    """A grid stationary pair (U, V) with its certification data."""

    grid: object
    gamma: float
    U: np.ndarray
    V: np.ndarray
    partition: object
    branch_set: object
    residual_inf: float
    iterations: int
    deviation: DeviationReport | None = None
    steady: object = None

    @property
    def branch_labels(self):
        return self.partition.assignment


def check_sineq(steady, gamma, grid, count=64):
    """Margin of the non-resonance hypothesis det/a0 != gamma*mu_k.

    Only finitely many analytic eigenvalues can collide; candidates up to
    twice the target plus the next one are checked. Returns (margin, k_min).
    """
    if abs(steady.a0) < kinetics.TOL_ALGEBRAIC:
        raise AssumptionError("a0 = f_u(u_bar, v_bar) vanishes")
    target = steady.det / steady.a0
    want = count
    while True:
        mus = [mu for mu, _ in laplacian_eigenvalues(grid, want, "analytic")]
        if gamma * mus[-1] > 2.0 * abs(target) or want >= 16 * count:
            break
        want *= 2
    diffs = [abs(target - gamma * mu) for mu in mus]
    i = int(np.argmin(diffs))
    return diffs[i], i


def _require_nonresonant(steady, gamma, grid):
    margin, k = check_sineq(steady, gamma, grid)
    mus = [mu for mu, _ in laplacian_eigenvalues(grid, k + 1, "analytic")]
    scale = max(1.0, gamma * mus[-1])
    if margin < RESONANCE_RTOL * scale:
        raise ResonanceError(
            f"gamma = {gamma} is resonant at mode k = {k} "
            f"(margin {margin:.3e})", mode=k)


def _branch_values(branch_set, assignment, V):
    U = np.empty_like(V)
    for br in branch_set.branches:
        cells = assignment == br.label
        if np.any(cells):
            U[cells] = br(V[cells])
    return U


def _branch_slopes(model, branch_set, assignment, U, V):
    fu, fv, _, _ = jacobian(model, U, V)
    return -np.asarray(fv) / np.asarray(fu)


def _damped_newton(residual, jacobian_op, V0, tol, v_bounds, max_iter=50):
    """Armijo-damped Newton on the reduced V-system."""
    V = V0.copy()
    F = residual(V)
    for it in range(1, max_iter + 1):
        norm_inf = float(np.max(np.abs(F)))
        if norm_inf <= tol:
            return V, norm_inf, it - 1
        J = jacobian_op(V)
        step = spsolve(J.tocsc(), -F)
        norm2 = np.linalg.norm(F)
        lam = 1.0
        blocked_by_window = True
        for _ in range(21):
            V_try = V + lam * step
            if np.min(V_try) <= v_bounds[0] or np.max(V_try) >= v_bounds[1]:
                lam *= 0.5
                continue
            blocked_by_window = False
            F_try = residual(V_try)
            if np.linalg.norm(F_try) < norm2:
                V, F = V_try, F_try
                break
            lam *= 0.5
        else:
            if blocked_by_window:
                raise WindowViolationError(
                    "Newton iterate left the trusted V-window "
                    f"({v_bounds[0]:.6g}, {v_bounds[1]:.6g}); the "
                    "construction's neighborhood hypothesis fails at this "
                    "|Omega_2|")
            raise NonConvergenceError(
                "line search failed", residual=norm_inf, iterations=it)
    raise NonConvergenceError(
        f"no convergence in {max_iter} Newton iterations",
        residual=float(np.max(np.abs(F))), iterations=max_iter)


def _primary_secondary_labels(branch_set, steady, used_labels):
    prim = None
    for br in branch_set.branches:
        if abs(br(np.array([steady.v_bar]))[0] - steady.u_bar) < 1e-8:
            prim = br.label
            break
    if prim is None:
        raise AssumptionError("no branch passes through the steady state")
    secondary = [lbl for lbl in used_labels if lbl != prim]
    return prim, secondary


def solve_discontinuous(model, grid, partition, branch_set, gamma, steady,
                        tol=1e-9):
    """Jump-discontinuous stationary solution on the given partition.

    Newton on F(V) = gamma*L*V + g(k_sigma(V), V) from V == v_bar; U is
    reconstructed branch-wise from the converged V.
    """
    _require_nonresonant(steady, gamma, grid)
    used = sorted(int(v) for v in np.unique(partition.assignment))
    for lbl in used:
        branch_set.by_label(lbl)

    v_bar = steady.v_bar
    # trust window: halfway to the window edge (fold), per side
    bounds = (v_bar - 0.5 * (v_bar - branch_set.v_lo),
              v_bar + 0.5 * (branch_set.v_hi - v_bar))
    L = neumann_laplacian(grid).matrix
    assignment = partition.assignment
    n = grid.cell_count

    def residual(V):
        U = _branch_values(branch_set, assignment, V)
        return gamma * (L @ V) + np.asarray(kinetics.eval_g(model, U, V))

    def jac(V):
        U = _branch_values(branch_set, assignment, V)
        kp = _branch_slopes(model, branch_set, assignment, U, V)
        _, _, gu, gv = jacobian(model, U, V)
        return gamma * L + sp.diags(np.asarray(gu) * kp + np.asarray(gv))

    V0 = np.full(n, v_bar)
    if len(used) == 1 and abs(branch_set.by_label(used[0])(
            np.array([v_bar]))[0] - steady.u_bar) < 1e-12:
        # degenerate partition: the constant state solves the system exactly
        U = _branch_values(branch_set, assignment, V0)
        dev = DeviationReport(0.0, 0.0, 0.0, 0.0)
        return StationaryField(grid=grid, gamma=gamma, U=U, V=V0,
                               partition=partition, branch_set=branch_set,
                               residual_inf=0.0, iterations=0,
                               deviation=dev, steady=steady)

    V, res_inf, iters = _damped_newton(residual, jac, V0, tol, bounds)
    U = _branch_values(branch_set, assignment, V)

    prim, secondary = _primary_secondary_labels(branch_set, steady, used)
    mask1 = assignment == prim
    v_dev = float(np.max(np.abs(V - v_bar)))
    u_dev_1 = float(np.max(np.abs(U[mask1] - steady.u_bar))) if mask1.any() else 0.0
    u_dev_2 = 0.0
    omega2 = 0.0
    for lbl in secondary:
        cells = assignment == lbl
        k2_vbar = branch_set.by_label(lbl)(np.array([v_bar]))[0]
        if cells.any():
            u_dev_2 = max(u_dev_2, float(np.max(np.abs(U[cells] - k2_vbar))))
            omega2 += partition.measure(lbl)
    dev = DeviationReport(v_dev=v_dev, u_dev_1=u_dev_1, u_dev_2=u_dev_2,
                          omega2_measure=omega2)
    return StationaryField(grid=grid, gamma=gamma, U=U, V=V,
                           partition=partition, branch_set=branch_set,
                           residual_inf=res_inf, iterations=iters,
                           deviation=dev, steady=steady)


def deviation_sweep(model, grid, branch_set, gamma, steady, omega2_fractions,
                    omega2_label=2, omega1_label=1, tol=1e-9):
    """Deviation reports for a centered 1D stripe of decreasing measure."""
    reports = []
    for frac in omega2_fractions:
        if frac == 0:
            reports.append(DeviationReport(0.0, 0.0, 0.0, 0.0))
            continue
        if not 0.0 < frac < 1.0:
            raise ValueError(f"omega2 fraction {frac} not in [0, 1)")
        part = stripe_partition(grid, 0.5 - frac / 2, 0.5 + frac / 2,
                                inside_label=omega2_label,
                                outside_label=omega1_label)
        fld = solve_discontinuous(model, grid, part, branch_set, gamma,
                                  steady, tol=tol)
        reports.append(fld.deviation)
    return reports


def bifurcation_gammas(steady, eigenvalues):
    """gamma_k = (det/a0)/mu_k for every mu_k > 0, kept when positive."""
    if abs(steady.a0) < kinetics.TOL_ALGEBRAIC:
        raise AssumptionError("a0 = 0 violates the basic branch assumption")
    target = steady.det / steady.a0
    out = []
    for k, mu in enumerate(eigenvalues):
        if mu > 0 and target / mu > 0:
            out.append((k, target / mu))
    return out


def cosine_energy_fraction(grid, V, v_bar, mode):
    """Energy share of the given discrete Neumann cosine mode in V - v_bar."""
    n = grid.cell_count
    x = (np.arange(n) + 0.5) / n
    dev = V - v_bar
    coeffs = []
    for j in range(1, n):
        phi = np.cos(j * np.pi * x)
        coeffs.append(np.dot(dev, phi) ** 2 / np.dot(phi, phi))
    coeffs = np.array(coeffs)
    total = coeffs.sum()
    return float(coeffs[mode - 1] / total) if total > 0 else 0.0


@dataclass
class PerturbedSolution:
    field: StationaryField
    d_ell: float
    amplitude: float
    nonconstant: bool
    energy_fraction: float


def solve_perturbed_regular(model, grid, branch, steady, mode, d_ell=None,
                            amplitude=None, amp0=1e-2, tol=1e-9):
    """Nonconstant regular solution of the perturbed problem (1D).

    With d_ell fixed, Newton starts from v_bar + amp0*cos(mode*pi*x); with
    amplitude fixed instead, d_ell joins the unknowns via a bordered system
    pinning the cosine Fourier coefficient, which avoids collapse to the
    constant near the pivot.
    """
    if grid.dim != 1:
        raise ValueError("the perturbed regular problem is 1D only")
    if (d_ell is None) == (amplitude is None):
        raise ValueError("specify exactly one of d_ell and amplitude")
    n = grid.cell_count
    L = neumann_laplacian(grid).matrix
    x = (np.arange(n) + 0.5) * grid.h
    phi = np.cos(mode * np.pi * x)
    v_bar = steady.v_bar
    span = min(v_bar - branch.v_lo, branch.v_hi - v_bar)
    bounds = (v_bar - 0.98 * span, v_bar + 0.98 * span)

    def residual_at(V, d):
        U = branch(V)
        return (d * (L @ V) + (1.0 - d) * (V - v_bar)
                + np.asarray(kinetics.eval_g(model, U, V)))

    def jac_at(V, d):
        U = branch(V)
        fu, fv, gu, gv = jacobian(model, U, V)
        kp = -np.asarray(fv) / np.asarray(fu)
        return d * L + sp.diags(np.asarray(gu) * kp + np.asarray(gv)
                                + (1.0 - d))

    if d_ell is not None:
        V, res_inf, iters = _damped_newton(
            lambda V: residual_at(V, d_ell), lambda V: jac_at(V, d_ell),
            v_bar + amp0 * phi, tol, bounds)
        d_found = float(d_ell)
    else:
        # bordered Newton in (V, d): F(V, d) = 0 and <V - v_bar, phi> = a
        mu1 = laplacian_eigenvalues(grid, mode + 1, "discrete")[mode][0]
        d = (1.0 + steady.det / steady.a0) / (1.0 + mu1)
        V = v_bar + amplitude * phi
        w = np.dot(phi, phi)
        ok = False
        for it in range(1, 61):
            F = residual_at(V, d)
            c = np.dot(V - v_bar, phi) / w - amplitude
            if max(np.max(np.abs(F)), abs(c)) <= tol:
                ok = True
                break
            J = jac_at(V, d)
            dF_dd = L @ V - (V - v_bar)
            B = sp.bmat([[J, dF_dd[:, None]],
                         [sp.csr_matrix(phi[None, :] / w), None]],
                        format="csc")
            delta = spsolve(B, -np.concatenate([F, [c]]))
            V = V + delta[:n]
            d = d + delta[n]
            if np.min(V) <= bounds[0] or np.max(V) >= bounds[1]:
                raise WindowViolationError(
                    "amplitude-constrained iterate left the branch window")
        if not ok:
            raise NonConvergenceError(
                "bordered Newton did not converge",
                residual=float(np.max(np.abs(residual_at(V, d)))))
        res_inf = float(np.max(np.abs(residual_at(V, d))))
        iters = it
        d_found = float(d)

    amp = float(np.max(np.abs(V - v_bar)))
    nonconstant = amp >= 1e-3
    if amp < 1e-6 and amplitude is None:
        raise NonConvergenceError(
            f"collapse to the constant solution at d_ell = {d_found}",
            residual=res_inf)
    U = branch(V)
    part = uniform_partition(grid, label=branch.label)
    bset = kinetics.BranchSet(v_lo=branch.v_lo, v_hi=branch.v_hi,
                              branches=[branch], separation_gap=np.inf)
    fld = StationaryField(grid=grid, gamma=d_found, U=U, V=V, partition=part,
                          branch_set=bset, residual_inf=res_inf,
                          iterations=iters, steady=steady)
    efrac = cosine_energy_fraction(grid, V, v_bar, mode)
    return PerturbedSolution(field=fld, d_ell=d_found, amplitude=amp,
                             nonconstant=nonconstant, energy_fraction=efrac)


ALPHA_SCAN = (0.2, 0.1, 0.05, 0.02, 0.01)


def _oregonator_three_branch_window(beta, alpha, margin_rel=0.05):
    model = kinetics.KineticModel("Oregonator", alpha, beta)
    states = constant_steady_states(model)
    vs = [s.v_bar for s in states]
    span = max(vs) - min(vs)
    lo = min(vs) - margin_rel * span
    hi = max(vs) + margin_rel * span
    return model, states, (lo, hi)


def find_admissible_oregonator_alpha(beta, scan=ALPHA_SCAN, max_decades=3):
    """Largest scanned alpha with three distinct branches on a window
    containing all three constant states (the Fig.-1 topology)."""
    if not beta > 1:
        raise ValueError("beta must be > 1")
    candidates = list(scan)
    for _ in range(max_decades + 1):
        for alpha in candidates:
            try:
                model, states, window = _oregonator_three_branch_window(
                    beta, alpha)
                bset = branches(model, states[0], window)
            except kinetics.FoldError:
                continue
            if bset.J == 3 and bset.separation_gap > 0:
                return float(alpha)
        candidates = [a / 10.0 for a in candidates]
    raise AssumptionError(
        f"no admissible Oregonator alpha found for beta = {beta}")


PREDATOR_PREY_SCAN = ((1.0, 1.5), (1.0, 1.0), (2.0, 3.0), (0.7, 1.0),
                      (1.5, 2.0))

U_M = 2.0 ** (1.0 / 3.0)  # argmax of u^2/(u^3+1) on u > 0


def find_admissible_predator_prey_params(scan=PREDATOR_PREY_SCAN,
                                         margin=1.05):
    """(alpha, beta) whose nonzero steady state clears u_bar > U_m."""
    for alpha, beta in scan:
        model = kinetics.KineticModel("PredatorPrey", alpha, beta)
        s1 = constant_steady_states(model)[0]
        if s1.u_bar > margin * U_M and s1.a0 < 0:
            return float(alpha), float(beta)
    raise AssumptionError("no scanned predator-prey parameters admissible")
