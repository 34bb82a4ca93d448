"""Command-line surface: reproducible experiment recipes over flat JSON
configs, writing CSV/JSON/PNM artifacts plus the resolved config next to
every run.

Exit codes: 0 success, 1 computational failure (non-convergence, blow-up),
2 configuration error. Stdout is a single-line JSON summary.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, kinetics, simulate, stability, stationary
from . import grid as gridmod
from .errors import ConfigError, RdodeError


def _load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a flat JSON object")
    return cfg


def _require(cfg, key):
    if key not in cfg:
        raise ConfigError(f"missing config key {key!r}")
    return cfg[key]


def _model_from(cfg):
    try:
        return kinetics.KineticModel(
            family=_require(cfg, "family"),
            alpha=float(_require(cfg, "alpha")),
            beta=float(_require(cfg, "beta")))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _grid_from(cfg):
    dim = int(cfg.get("grid_dim", 1))
    n = int(cfg.get("grid_n", 256))
    try:
        return gridmod.build_grid(dim, n, int(cfg["grid_ny"])
                                  if "grid_ny" in cfg else None)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _steady_from(cfg, model):
    label = int(cfg.get("steady_label", 1))
    for s in kinetics.constant_steady_states(model):
        if s.label == label:
            return s
    raise ConfigError(f"no constant steady state with label {label}")


def _window_from(cfg, steady):
    if "v_window_lo" in cfg and "v_window_hi" in cfg:
        return float(cfg["v_window_lo"]), float(cfg["v_window_hi"])
    raise ConfigError("config needs v_window_lo and v_window_hi")


def _partition_from(cfg, grid):
    sources = [k for k in ("mask", "ey_fraction", "stripe_lo") if k in cfg]
    if len(sources) != 1:
        raise ConfigError(
            "exactly one of mask / ey_fraction / stripe_lo+stripe_hi required")
    inside = int(cfg.get("omega2_branch", 2))
    outside = int(cfg.get("omega1_branch", 1))
    if "mask" in cfg:
        if not os.path.exists(cfg["mask"]):
            raise ConfigError(f"mask file not found: {cfg['mask']}")
        return gridmod.read_mask(grid, cfg["mask"], inside_label=inside,
                                 outside_label=outside)
    if "ey_fraction" in cfg:
        try:
            return gridmod.generate_ey_mask(grid, float(cfg["ey_fraction"]),
                                            inside_label=inside,
                                            outside_label=outside)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if grid.dim != 1:
        raise ConfigError("stripe partitions are 1D only")
    return gridmod.stripe_partition(grid, float(cfg["stripe_lo"]),
                                    float(cfg["stripe_hi"]),
                                    inside_label=inside, outside_label=outside)


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _stamp(out_dir, cfg):
    os.makedirs(out_dir, exist_ok=True)
    _write_json(os.path.join(out_dir, "resolved_config.json"), cfg)
    _write_json(os.path.join(out_dir, "tool_version.json"),
                {"tool": "rdode", "version": __version__})


def _field_artifacts(out_dir, fld, extra=None):
    gridmod.save_field_csv(fld.grid, fld.U, fld.V,
                           os.path.join(out_dir, "field.csv"))
    hist = {str(lbl): int(np.sum(fld.partition.assignment == lbl))
            for lbl in fld.partition.labels}
    report = {
        "converged": True,
        "iterations": fld.iterations,
        "residual_inf": fld.residual_inf,
        "gamma": fld.gamma,
        "branch_labels_histogram": hist,
    }
    if fld.deviation is not None:
        report["deviation_report"] = fld.deviation.to_dict()
    if extra:
        report.update(extra)
    _write_json(os.path.join(out_dir, "report.json"), report)
    return report


def cmd_steady(cfg, out_dir):
    model = _model_from(cfg)
    states = kinetics.constant_steady_states(model)
    payload = [{"label": s.label, "u_bar": s.u_bar, "v_bar": s.v_bar,
                "a0": s.a0, "b0": s.b0, "c0": s.c0, "d0": s.d0}
               for s in states]
    _write_json(os.path.join(out_dir, "steady_states.json"), payload)
    return {"states": len(payload)}


def cmd_branches(cfg, out_dir):
    model = _model_from(cfg)
    steady = _steady_from(cfg, model)
    window = _window_from(cfg, steady)
    bset = kinetics.branches(model, steady, window)
    samples = int(cfg.get("samples", 401))
    inset = 1e-9 * (window[1] - window[0])
    vv = np.linspace(window[0] + inset, window[1] - inset, samples)
    cols = {"V": vv}
    for br in bset.branches:
        cols[f"k{br.label}"] = br(vv)
    names = list(cols)
    with open(os.path.join(out_dir, "branches.csv"), "w") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(samples):
            fh.write(",".join(repr(float(cols[n][i])) for n in names) + "\n")
    # g = 0 nullcline samples over the U range of the branches, for plotting
    u_lo = min(float(np.min(cols[f"k{br.label}"])) for br in bset.branches)
    u_hi = max(float(np.max(cols[f"k{br.label}"])) for br in bset.branches)
    uu = np.linspace(u_lo, u_hi, samples)
    g_curves = _g_nullcline(model, uu)
    with open(os.path.join(out_dir, "g_nullcline.csv"), "w") as fh:
        fh.write("U," + ",".join(name for name, _ in g_curves) + "\n")
        for i in range(samples):
            fh.write(",".join([repr(float(uu[i]))]
                              + [repr(float(vals[i]))
                                 for _, vals in g_curves]) + "\n")
    markers = {
        "steady_states": [{"label": s.label, "u_bar": s.u_bar,
                           "v_bar": s.v_bar}
                          for s in kinetics.constant_steady_states(model)],
        "separation_gap": bset.separation_gap,
    }
    if model.family == "Oregonator":
        markers["excluded_point"] = [-model.beta, 0.0]
    if model.family == "PredatorPrey":
        markers["u_m"] = stationary.U_M
    _write_json(os.path.join(out_dir, "report.json"), markers)
    return {"branches": bset.J, "separation_gap": bset.separation_gap}


def _g_nullcline(model, uu):
    """Solution curves V(U) of g(U, V) = 0, named per solution family."""
    a, b = model.alpha, model.beta
    if model.family == "GrayScott":
        return [("g0", b / (uu * uu + b))]
    if model.family == "Brusselator":
        with np.errstate(divide="ignore"):
            return [("g0", np.where(uu != 0, b / np.where(uu != 0, uu, 1.0),
                                    np.inf))]
    if model.family == "Oregonator":
        return [("g0", uu.copy())]
    return [("g0", a * uu - b), ("g_zero", np.zeros_like(uu))]


def cmd_bifurcate(cfg, out_dir):
    model = _model_from(cfg)
    steady = _steady_from(cfg, model)
    grid = _grid_from(cfg)
    mus = [mu for mu, _ in gridmod.laplacian_eigenvalues(
        grid, int(cfg.get("eigen_count", 16)), "analytic")]
    gammas = stationary.bifurcation_gammas(steady, mus)
    _write_json(os.path.join(out_dir, "gammas.json"),
                {"gammas": [[k, g] for k, g in gammas]})
    return {"count": len(gammas)}


def _construct(cfg):
    model = _model_from(cfg)
    grid = _grid_from(cfg)
    steady = _steady_from(cfg, model)
    window = _window_from(cfg, steady)
    bset = kinetics.branches(model, steady, window)
    part = _partition_from(cfg, grid)
    gamma = float(_require(cfg, "gamma"))
    tol = float(cfg.get("tol", 1e-9))
    fld = stationary.solve_discontinuous(model, grid, part, bset, gamma,
                                         steady, tol=tol)
    return model, fld


def cmd_construct(cfg, out_dir):
    _, fld = _construct(cfg)
    report = _field_artifacts(out_dir, fld)
    return {"residual_inf": report["residual_inf"],
            "iterations": report["iterations"]}


def cmd_audit(cfg, out_dir):
    model = _model_from(cfg)
    grid = _grid_from(cfg)
    steady = _steady_from(cfg, model)
    gamma = float(_require(cfg, "gamma"))
    bset = None
    if "v_window_lo" in cfg:
        bset = kinetics.branches(model, steady, _window_from(cfg, steady))
    audit = stability.audit_assumptions(
        model, steady, bset, gamma, grid,
        eigen_count=int(cfg.get("eigen_count", 64)),
        second_branch_label=(int(cfg["omega2_branch"])
                             if "omega2_branch" in cfg and bset else None))
    _write_json(os.path.join(out_dir, "audit.json"), audit.to_dict())
    return {name: audit.passed(name) for name in audit.checks}


def cmd_spectrum(cfg, out_dir):
    model, fld = _construct(cfg)
    lin = stability.assemble_linearization(model, fld)
    rep = stability.rightmost_spectrum(lin, int(cfg.get("spectrum_count", 5)))
    _field_artifacts(out_dir, fld)
    _write_json(os.path.join(out_dir, "spectrum.json"), rep.to_dict())
    frac, _ = stability.autocatalysis_check(model, fld)
    return {"rightmost_re": rep.rightmost[0][0], "verdict": rep.verdict,
            "autocatalysis_fraction": frac}


def _norms_csv(path, times, du, dv):
    with open(path, "w") as fh:
        fh.write("t,du_inf,dv_inf\n")
        for t, a, b in zip(times, du, dv):
            fh.write(f"{float(t)!r},{float(a)!r},{float(b)!r}\n")


def cmd_simulate(cfg, out_dir):
    model = _model_from(cfg)
    grid = _grid_from(cfg)
    gamma = float(_require(cfg, "gamma"))
    steady = _steady_from(cfg, model)
    u0 = np.full(grid.cell_count, steady.u_bar)
    v0 = np.full(grid.cell_count, steady.v_bar)
    t_end = float(_require(cfg, "t_end"))
    dt = (float(cfg["dt"]) if "dt" in cfg
          else simulate.cfl_dt(model, grid, gamma, u0, v0,
                               float(cfg.get("cfl_safety", 0.9))))
    traj = simulate.run(model, grid, gamma, u0, v0, dt, t_end,
                        snapshot_stride=int(cfg.get("snapshot_stride", 0)),
                        reference=(u0, v0))
    u, v = traj.snapshots[-1]
    gridmod.save_field_csv(grid, u, v, os.path.join(out_dir, "final.csv"))
    _norms_csv(os.path.join(out_dir, "norms.csv"),
               traj.norm_times, traj.du_inf, traj.dv_inf)
    _write_json(os.path.join(out_dir, "report.json"),
                {"dt": dt, "t_end": t_end, "steps": len(traj.norm_times) - 1})
    return {"dt": dt, "final_du_inf": traj.du_inf[-1]}


def cmd_ey(cfg, out_dir):
    model = _model_from(cfg)
    grid = _grid_from(cfg)
    gamma = float(_require(cfg, "gamma"))
    steady = _steady_from(cfg, model)
    part = _partition_from(cfg, grid)
    omega2 = int(cfg.get("omega2_branch", 2))
    rep = simulate.run_ey_experiment(
        model, grid, part, gamma, steady, float(_require(cfg, "t_end")),
        dt=float(cfg["dt"]) if "dt" in cfg else None,
        omega2_label=omega2,
        cfl_safety=float(cfg.get("cfl_safety", 0.9)))
    u, v = rep.trajectory.snapshots[-1]
    gridmod.save_field_csv(grid, u, v, os.path.join(out_dir, "final.csv"))
    gridmod.save_field_pgm(grid, u, os.path.join(out_dir, "u.pgm"))
    gridmod.save_field_pgm(grid, v, os.path.join(out_dir, "v.pgm"))
    gridmod.write_mask_pbm(part, os.path.join(out_dir, "mask.pbm"),
                           inside_label=omega2)
    payload = {"u_max_omega2_interior": rep.u_max_omega2_interior,
               "u_dev_omega1_interior": rep.u_dev_omega1_interior,
               "v_dev": rep.v_dev, "dt": rep.dt, "t_end": rep.t_end}
    _write_json(os.path.join(out_dir, "report.json"), payload)
    return payload


def cmd_decay(cfg, out_dir, seed):
    model, fld = _construct(cfg)
    rep = simulate.perturbation_decay(
        model, fld, float(cfg.get("perturb_amplitude", 1e-2)),
        float(_require(cfg, "t_end")),
        dt=float(cfg["dt"]) if "dt" in cfg else None, seed=seed)
    _field_artifacts(out_dir, fld)
    _norms_csv(os.path.join(out_dir, "norms.csv"),
               rep.times, rep.deviations, rep.deviations)
    payload = {"rate": rep.rate, "final_dev": rep.final_dev,
               "verdict": rep.verdict, "seed": rep.seed}
    _write_json(os.path.join(out_dir, "decay.json"), payload)
    return payload


COMMANDS = {
    "steady": cmd_steady,
    "branches": cmd_branches,
    "bifurcate": cmd_bifurcate,
    "construct": cmd_construct,
    "audit": cmd_audit,
    "spectrum": cmd_spectrum,
    "simulate": cmd_simulate,
    "ey": cmd_ey,
    "decay": cmd_decay,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="rdode",
        description="stationary solutions of reaction-diffusion-ODE systems")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default=None)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    try:
        from threadpoolctl import threadpool_limits
        threadpool_limits(limits=max(1, args.threads))
    except ImportError:
        pass

    try:
        cfg = _load_config(args.config)
        out_dir = args.out or os.environ.get("RDODE_OUT") \
            or cfg.get("out_dir")
        if not out_dir:
            raise ConfigError("no output directory (--out or out_dir)")
        _stamp(out_dir, cfg)
        fn = COMMANDS[args.command]
        if args.command == "decay":
            summary = fn(cfg, out_dir, args.seed)
        else:
            summary = fn(cfg, out_dir)
    except ConfigError as exc:
        print(json.dumps({"status": "config-error", "error": str(exc)}))
        return 2
    except RdodeError as exc:
        print(json.dumps({"status": "failed",
                          "error_type": type(exc).__name__,
                          "error": str(exc)}))
        return 1
    print(json.dumps({"status": "ok", "command": args.command, **summary}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
