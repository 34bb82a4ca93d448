"""Explicit Euler time integration of the full system and the standard
experiments: pattern formation from the EY initial condition and
perturbation-decay runs around constructed stationary fields.

The update is synchronized (all cells read the old state):

    u <- u + dt * f(u, v)
    v <- v + dt * (gamma * L v + g(u, v))
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kinetics
from .errors import BlowUpError
from .grid import neumann_laplacian
from .kinetics import eval_f, eval_g, jacobian

CFL_REFRESH = 100


@dataclass
class SimulationConfig:
    model: object
    grid: object
    gamma: float
    dt: float
    t_end: float
    snapshot_stride: int = 0
    cfl_safety: float = 0.9


@dataclass
class Trajectory:
    times: list
    snapshots: list  # [(u, v)]
    norm_times: list = field(default_factory=list)
    du_inf: list = field(default_factory=list)
    dv_inf: list = field(default_factory=list)


def reaction_lipschitz(model, u, v):
    """Conservative local Lipschitz bound |f_u|+|f_v|+|g_u|+|g_v|."""
    fu, fv, gu, gv = jacobian(model, u, v)
    return float(np.max(np.abs(fu) + np.abs(fv) + np.abs(gu) + np.abs(gv)))

def cfl_dt(model, grid, gamma, u, v, cfl_safety=0.9):
    """Step size honoring the diffusive and reaction CFL bounds."""
    dt = cfl_safety * grid.h ** 2 / (2.0 * grid.dim * gamma)
    if model is not None:
        lip = reaction_lipschitz(model, u, v)
        if lip > 0:
            dt = min(dt, cfl_safety / lip)
    return dt


def step(model, grid, gamma, state, dt, laplacian=None):
    """One synchronized explicit Euler step; model=None disables reaction."""
    u, v = state
    L = laplacian if laplacian is not None else neumann_laplacian(grid).matrix
    if model is None:
        return u.copy(), v + dt * (gamma * (L @ v))
    u_new = u + dt * np.asarray(eval_f(model, u, v))
    v_new = v + dt * (gamma * (L @ v) + np.asarray(eval_g(model, u, v)))
    return u_new, v_new


def run(model, grid, gamma, u0, v0, dt, t_end, snapshot_stride=0,
        reference=None, cfl_safety=0.9):
    """March to t_end, recording snapshots and sup-norm distances to an
    optional reference field (u_ref, v_ref)."""
    L = neumann_laplacian(grid).matrix
    u = np.array(u0, dtype=float)
    v = np.array(v0, dtype=float)
    steps = int(np.ceil(t_end / dt))
    traj = Trajectory(times=[0.0], snapshots=[(u.copy(), v.copy())])

    def record_norms(t):
        if reference is not None:
            traj.norm_times.append(t)
            traj.du_inf.append(float(np.max(np.abs(u - reference[0]))))
            traj.dv_inf.append(float(np.max(np.abs(v - reference[1]))))

    record_norms(0.0)
    for s in range(1, steps + 1):
        if model is not None and s % CFL_REFRESH == 1:
            lip = reaction_lipschitz(model, u, v)
            if lip > 0 and dt > cfl_safety / lip:
                raise BlowUpError(
                    f"reaction CFL violated at step {s} (Lipschitz {lip:.3g})",
                    step=s)
        u, v = step(model, grid, gamma, (u, v), dt, laplacian=L)
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise BlowUpError(f"non-finite value at step {s}", step=s)
        t = s * dt
        if snapshot_stride and s % snapshot_stride == 0:
            traj.times.append(t)
            traj.snapshots.append((u.copy(), v.copy()))
        record_norms(t)
    if traj.times[-1] != steps * dt:
        traj.times.append(steps * dt)
        traj.snapshots.append((u.copy(), v.copy()))
    return traj


@dataclass
class EyReport:
    trajectory: Trajectory
    u_max_omega2_interior: float
    u_dev_omega1_interior: float
    v_dev: float
    dt: float
    t_end: float


def run_ey_experiment(model, grid, partition, gamma, steady1, t_end,
                      dt=None, snapshot_stride=0, omega2_label=2,
                      cfl_safety=0.9):
    """Pattern run from the EY-mask initial data: (u, v) = (u_bar1, v_bar1)
    on Omega_1 and (0, v_bar1) on Omega_2. Region statistics exclude a
    2-cell interface band where the jump layer is smeared."""
    mask2 = partition.assignment == omega2_label
    u0 = np.where(mask2, 0.0, steady1.u_bar)
    v0 = np.full(grid.cell_count, steady1.v_bar)
    if dt is None:
        dt = cfl_dt(model, grid, gamma, u0, v0, cfl_safety)
    traj = run(model, grid, gamma, u0, v0, dt, t_end,
               snapshot_stride=snapshot_stride, cfl_safety=cfl_safety)
    u, v = traj.snapshots[-1]
    omega1_label = next(lbl for lbl in partition.labels
                        if lbl != omega2_label)
    int1 = partition.interior_mask(omega1_label)
    int2 = partition.interior_mask(omega2_label)
    u_max2 = float(np.max(np.abs(u[int2]))) if int2.any() else 0.0
    u_dev1 = (float(np.max(np.abs(u[int1] - steady1.u_bar)))
              if int1.any() else 0.0)
    v_dev = float(np.max(np.abs(v - steady1.v_bar)))
    return EyReport(trajectory=traj, u_max_omega2_interior=u_max2,
                    u_dev_omega1_interior=u_dev1, v_dev=v_dev,
                    dt=dt, t_end=t_end)


@dataclass
class DecayReport:
    rate: float
    final_dev: float
    verdict: str
    seed: int
    times: np.ndarray
    deviations: np.ndarray


def perturbation_decay(model, fld, amplitude, t_end, dt=None, seed=0,
                       cfl_safety=0.9, samples=200):
    """Perturb V by amplitude * (+-1 per cell), rebuild U branch-consistently,
    evolve, and fit log ||deviation||_inf over the second half of the run."""
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=fld.grid.cell_count) * 2 - 1
    v0 = fld.V + amplitude * signs
    if amplitude == 0.0:
        v0 = fld.V.copy()
    from .stationary import _branch_values
    u0 = _branch_values(fld.branch_set, fld.partition.assignment, v0)
    if dt is None:
        dt = cfl_dt(model, fld.grid, fld.gamma, u0, v0, cfl_safety)
    stride = max(1, int(np.ceil(t_end / dt)) // samples)
    try:
        traj = run(model, fld.grid, fld.gamma, u0, v0, dt, t_end,
                   snapshot_stride=stride, reference=(fld.U, fld.V),
                   cfl_safety=cfl_safety)
    except BlowUpError:
        return DecayReport(rate=np.inf, final_dev=np.inf, verdict="escaped",
                           seed=seed, times=np.array([]),
                           deviations=np.array([]))
    t = np.array(traj.norm_times)
    dev = np.maximum(np.array(traj.du_inf), np.array(traj.dv_inf))
    final_dev = float(dev[-1])
    if amplitude == 0.0 or np.max(dev) < 1e-14:
        return DecayReport(rate=0.0, final_dev=final_dev, verdict="stationary",
                           seed=seed, times=t, deviations=dev)
    if final_dev > 10.0 * np.max(np.abs(fld.V)) + 10.0:
        return DecayReport(rate=np.inf, final_dev=final_dev, verdict="escaped",
                           seed=seed, times=t, deviations=dev)
    half = t > 0.5 * t[-1]
    good = half & (dev > 0)
    if np.count_nonzero(good) < 2:
        rate = 0.0
    else:
        rate = float(np.polyfit(t[good], np.log(dev[good]), 1)[0])
    verdict = "decaying" if rate < 0 else "growing"
    return DecayReport(rate=rate, final_dev=final_dev, verdict=verdict,
                       seed=seed, times=t, deviations=dev)
