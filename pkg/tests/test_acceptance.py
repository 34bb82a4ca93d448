"""Acceptance suite: one test per primary criterion, one PASS line each.

Each test prints "[criterion N] <name>: PASS" after its assertions, so a
verbose run doubles as the acceptance report.
"""

import json
import subprocess
import sys

import numpy as np
import pytest

from rdode import (KineticModel, branches, build_grid, cfl_dt,
                   constant_steady_states, eval_f, eval_g,
                   generate_ey_mask, laplacian_eigenvalues,
                   neumann_laplacian, perturbation_decay,
                   solve_discontinuous, solve_perturbed_regular, step,
                   stripe_partition, uniform_partition)
from rdode.simulate import run_ey_experiment
from rdode.stability import (assemble_linearization, audit_assumptions,
                             autocatalysis_check, rightmost_spectrum)
from rdode.stationary import (StationaryField, U_M, bifurcation_gammas,
                              deviation_sweep,
                              find_admissible_oregonator_alpha,
                              find_admissible_predator_prey_params)

GS = KineticModel("GrayScott", 0.04, 0.1)
BR = KineticModel("Brusselator", 1.0, 2.0)
OR_ALPHA = find_admissible_oregonator_alpha(2.0)
OR = KineticModel("Oregonator", OR_ALPHA, 2.0)
PP_ALPHA, PP_BETA = find_admissible_predator_prey_params()
PP = KineticModel("PredatorPrey", PP_ALPHA, PP_BETA)

WINDOWS = {
    "GrayScott": (0.4, 1.6),
    "Brusselator": (1.5, 2.2),
    "PredatorPrey": (0.35, 0.52),
}


def _report(n, name):
    print(f"\n[criterion {n}] {name}: PASS")


def _steady_for_branches(model):
    states = constant_steady_states(model)
    if model.family == "Oregonator":
        return states[1]
    return states[0]


def _branch_window(model):
    if model.family == "Oregonator":
        s = _steady_for_branches(model)
        return (s.v_bar - 0.5, s.v_bar + 0.5)
    return WINDOWS[model.family]


def test_criterion_1_steady_state_closure():
    oracles = {
        "GrayScott": 3, "Brusselator": 1, "Oregonator": 3, "PredatorPrey": 2,
    }
    for model in (GS, BR, OR, PP):
        states = constant_steady_states(model)
        assert len(states) == oracles[model.family]
        for s in states:
            assert abs(eval_f(model, s.u_bar, s.v_bar)) <= 1e-12
            assert abs(eval_g(model, s.u_bar, s.v_bar)) <= 1e-12
    # closed-form oracles
    disc = np.sqrt(1.0 - 4.0 * GS.alpha ** 2 / GS.beta)
    gs = constant_steady_states(GS)
    assert abs(gs[1].v_bar - 0.5 * (1 + disc)) <= 1e-10
    assert abs(gs[2].v_bar - 0.5 * (1 - disc)) <= 1e-10
    brs = constant_steady_states(BR)[0]
    assert (brs.u_bar, brs.v_bar) == (BR.alpha, BR.beta / BR.alpha)
    p = OR.beta + OR.alpha - 1.0
    d = np.sqrt(p * p + 4.0 * OR.beta * (OR.alpha + 1.0))
    ors = constant_steady_states(OR)
    assert abs(ors[1].u_bar - 0.5 * (-p + d)) <= 1e-10
    assert abs(ors[2].u_bar - 0.5 * (-p - d)) <= 1e-10
    # bisection oracle for the nonzero predator-prey state
    def resid(u):
        return PP.alpha * u - u * u / (u ** 3 + 1.0) - PP.beta
    lo, hi = PP.beta / PP.alpha, 10.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if resid(mid) > 0 else (mid, hi)
    assert abs(constant_steady_states(PP)[0].u_bar - 0.5 * (lo + hi)) <= 1e-10
    _report(1, "steady-state closure")


def test_criterion_2_branch_residual_sweep():
    for model in (GS, BR, OR, PP):
        steady = _steady_for_branches(model)
        window = _branch_window(model)
        bset = branches(model, steady, window)
        span = window[1] - window[0]
        vv = np.linspace(window[0] + 1e-6 * span, window[1] - 1e-6 * span, 200)
        for br in bset.branches:
            assert np.max(np.abs(eval_f(model, br(vv), vv))) <= 1e-10, \
                f"{model.family} k{br.label}"
    # Brusselator closed form, exact as algebra
    bset = branches(BR, constant_steady_states(BR)[0], WINDOWS["Brusselator"])
    vv = np.linspace(1.55, 2.15, 200)
    root = np.sqrt((BR.beta + 1.0) ** 2 - 4.0 * BR.alpha * vv)
    assert np.array_equal(bset.by_label(1)(vv),
                          (BR.beta + 1.0 + root) / (2.0 * vv))
    assert np.array_equal(bset.by_label(2)(vv),
                          (BR.beta + 1.0 - root) / (2.0 * vv))
    _report(2, "branch residual sweep")


def test_criterion_3_mode_decoupling_spectral_oracle():
    n, gamma = 64, 0.5
    grid = build_grid(1, n)
    mus = (4.0 * n * n) * np.sin(np.arange(n) * np.pi / (2 * n)) ** 2
    for model in (GS, BR, OR, PP):
        s = constant_steady_states(model)[0]
        fld = StationaryField(
            grid=grid, gamma=gamma, U=np.full(n, s.u_bar),
            V=np.full(n, s.v_bar), partition=uniform_partition(grid),
            branch_set=None, residual_inf=0.0, iterations=0, steady=s)
        full = np.linalg.eigvals(
            assemble_linearization(model, fld).matrix.toarray())
        oracle = []
        for mu in mus:
            M = np.array([[s.a0, s.b0], [s.c0, -gamma * mu + s.d0]])
            oracle.extend(np.linalg.eigvals(M))
        oracle = np.array(oracle)
        full = full[np.lexsort((full.imag, full.real))]
        oracle = oracle[np.lexsort((oracle.imag, oracle.real))]
        assert np.max(np.abs(full - oracle)) <= 1e-8, model.family
    _report(3, "mode-decoupling spectral oracle")


def test_criterion_4_bifurcation_arithmetic_and_continuation():
    s = constant_steady_states(BR)[0]
    # a0 = beta - 1 = 1, det = alpha^2 = 1, mu_1 = pi^2
    assert abs(s.a0 - (BR.beta - 1.0)) <= 1e-12
    assert abs(s.det - BR.alpha ** 2) <= 1e-12
    gammas = dict(bifurcation_gammas(s, [(np.pi * k) ** 2 for k in range(4)]))
    assert abs(gammas[1] - 1.0 / np.pi ** 2) <= 1e-10
    assert abs(gammas[1] - 0.10132118364233778) <= 1e-10

    grid = build_grid(1, 256)
    bset = branches(BR, s, WINDOWS["Brusselator"])
    sol = solve_perturbed_regular(BR, grid, bset.by_label(1), s, 1,
                                  amplitude=0.02)
    assert sol.nonconstant
    assert sol.amplitude >= 1e-3
    assert sol.field.residual_inf <= 1e-8
    assert sol.energy_fraction >= 0.9
    _report(4, "bifurcation arithmetic + mode-1 continuation")


def test_criterion_5_discontinuous_construction_trend():
    grid = build_grid(1, 256)
    s = constant_steady_states(GS)[0]
    bset = branches(GS, s, WINDOWS["GrayScott"])
    reports = deviation_sweep(GS, grid, bset, 1.0, s, (0.1, 0.05, 0.025),
                              omega2_label=2, omega1_label=1, tol=1e-9)
    v_devs = [r.v_dev for r in reports]
    assert all(np.isfinite(v_devs))
    assert v_devs[0] > v_devs[1] > v_devs[2] > 0.0
    _report(5, "discontinuous construction, deviation trend")


def test_criterion_6_instability_detection():
    grid = build_grid(1, 200)
    for model, label_in, label_out in ((GS, 2, 1), (BR, 2, 1)):
        s = constant_steady_states(model)[0]
        bset = branches(model, s, WINDOWS[model.family])
        part = stripe_partition(grid, 0.45, 0.55, inside_label=label_in,
                                outside_label=label_out)
        fld = solve_discontinuous(model, grid, part, bset, 1.0, s, tol=1e-9)
        assert fld.residual_inf <= 1e-9
        rep = rightmost_spectrum(assemble_linearization(model, fld))
        assert rep.method == "dense"
        assert rep.rightmost[0][0] > 1e-6, model.family
        frac, verdict = autocatalysis_check(model, fld)
        assert frac > 0.0 and verdict == "unstable", model.family
    _report(6, "instability detection (discontinuous fields)")


def test_criterion_7_stable_constructions():
    # Oregonator around the upper state, second branch k3
    grid = build_grid(1, 256)
    s2 = constant_steady_states(OR)[1]
    bset = branches(OR, s2, (s2.v_bar - 0.5, s2.v_bar + 0.5))
    part = stripe_partition(grid, 0.49, 0.51, inside_label=3, outside_label=2)
    fld = solve_discontinuous(OR, grid, part, bset, 0.1, s2, tol=1e-10)
    audit = audit_assumptions(OR, s2, bset, 0.1, grid, second_branch_label=3)
    assert audit.passed("assumption5_linear_stability")
    chk = audit.checks["second_branch_condition"]
    assert chk["pass"] and chk["f_u"] < 0.0 and chk["g_v"] < 0.0
    rep = rightmost_spectrum(assemble_linearization(OR, fld))
    assert rep.rightmost[0][0] < -1e-6
    dec = perturbation_decay(OR, fld, 1e-2, 15.0, seed=0)
    assert dec.verdict == "decaying" and dec.rate < 0.0
    assert dec.final_dev < 1e-4

    # predator-prey with the zero branch (k3) on a small Omega_2
    s1 = constant_steady_states(PP)[0]
    assert s1.u_bar > U_M
    bset = branches(PP, s1, WINDOWS["PredatorPrey"])
    part = stripe_partition(grid, 0.49, 0.51, inside_label=3, outside_label=1)
    fld = solve_discontinuous(PP, grid, part, bset, 0.2, s1, tol=1e-10)
    audit = audit_assumptions(PP, s1, bset, 0.2, grid, second_branch_label=3)
    assert audit.passed("assumption5_linear_stability")
    chk = audit.checks["second_branch_condition"]
    assert chk["pass"] and chk["f_u"] < 0.0 and chk["g_v"] < 0.0
    rep = rightmost_spectrum(assemble_linearization(PP, fld))
    assert rep.rightmost[0][0] < -1e-6
    dec = perturbation_decay(PP, fld, 1e-2, 30.0, seed=0)
    assert dec.verdict == "decaying" and dec.rate < 0.0
    assert dec.final_dev < 1e-4
    _report(7, "stable constructions + decay (Oregonator, predator-prey)")


def test_criterion_8_ey_experiment():
    grid = build_grid(2, 128)
    s1 = constant_steady_states(PP)[0]
    part = generate_ey_mask(grid, 0.05, inside_label=3, outside_label=1)
    bset = branches(PP, s1, (0.2, 0.52))
    fld = solve_discontinuous(PP, grid, part, bset, 0.1, s1, tol=1e-10)
    assert fld.residual_inf <= 1e-9
    assert abs(fld.deviation.omega2_measure - 0.05) <= grid.cell_measure

    rep = run_ey_experiment(PP, grid, part, 0.1, s1, t_end=40.0,
                            omega2_label=3)
    assert rep.u_max_omega2_interior <= 1e-3
    # u on the Omega_1 interior stays within the constructor-measured
    # deviation from u_bar (same interior mask, small truncation slack)
    int1 = part.interior_mask(1)
    u_dev_ref = float(np.max(np.abs(fld.U[int1] - s1.u_bar)))
    assert rep.u_dev_omega1_interior <= u_dev_ref * (1.0 + 1e-3) + 1e-6
    # v uniformly within the measured epsilon of v_bar
    eps = fld.deviation.v_dev
    assert rep.v_dev <= eps * (1.0 + 1e-3) + 1e-6
    _report(8, "EY pattern experiment")


def test_criterion_9_discretization_hygiene(tmp_path):
    # exact zero row sums
    for g in (build_grid(1, 64), build_grid(1, 100), build_grid(2, 24)):
        rows = np.asarray(neumann_laplacian(g).matrix.sum(axis=1)).ravel()
        assert np.all(rows == 0.0)
    # discrete spectrum closed form at n = 64
    n = 64
    g = build_grid(1, n)
    computed = np.sort(np.linalg.eigvalsh(-neumann_laplacian(g).matrix.toarray()))
    expected = (4.0 * n * n) * np.sin(np.arange(n) * np.pi / (2 * n)) ** 2
    assert np.max(np.abs(computed - expected)) <= 1e-10 * (4 * n * n)
    # v-mass conserved under zero reaction
    rng = np.random.default_rng(0)
    v = rng.uniform(0.0, 1.0, n)
    u = np.zeros(n)
    dt = cfl_dt(None, g, 1.0, u, v)
    m0 = float(np.mean(v))
    for k in range(100):
        u, v = step(None, g, 1.0, (u, v), dt)
        assert abs(float(np.mean(v)) - m0) <= (k + 1) * 1e-13
    # simulation bitwise identical across thread counts (via the CLI)
    cfg = {"family": "GrayScott", "alpha": 0.04, "beta": 0.1,
           "steady_label": 2, "grid_dim": 1, "grid_n": 64, "gamma": 1.0,
           "t_end": 0.05}
    cfg_path = tmp_path / "sim.json"
    cfg_path.write_text(json.dumps(cfg))
    outputs = []
    for threads in ("1", "4"):
        out = tmp_path / f"t{threads}"
        proc = subprocess.run(
            [sys.executable, "-m", "rdode.cli", "simulate",
             "--config", str(cfg_path), "--out", str(out),
             "--threads", threads],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stdout + proc.stderr
        outputs.append((out / "final.csv").read_bytes()
                       + (out / "norms.csv").read_bytes())
    assert outputs[0] == outputs[1]
    _report(9, "discretization hygiene")
