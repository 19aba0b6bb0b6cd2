"""Command-line entry point: scenario dispatch, CSV and report emission.

Every subcommand reads one flat key=value scenario file and writes its
outputs into --out.  Exit codes: 0 success, 1 solver failure, 2 input error.
Outputs carry no timestamps, so a fixed scenario and seed reproduce every
file byte for byte.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .dynamics import (
    EvolveConfig,
    StepAbortError,
    evolve,
    evolve_scalar,
    inoculum_state,
    invariant_region,
    phase_portrait,
)
from .eigen import EigenConvergenceError, lambda0
from .grid import ScalarField, write_field_csv
from .homogenize import convergence_study, read_cell_csv
from .model import ModelParams, params_from_r0, reproductive_ratio
from .scenario import Scenario, ScenarioError, load_scenario, random_r0_field
from .stability import stability_report
from .steady import SandwichViolationError, SteadyConvergenceError, monotone_iterate

__all__ = ["main"]


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _write_lines(path, lines) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _cmd_eigen(sc: Scenario, out: str) -> None:
    p = sc.params()
    res = lambda0(p, tol=sc.get_float("tol", 1e-10))
    _write_lines(
        os.path.join(out, "eigen.csv"),
        ["lambda0,iterations,residual", f"{_fmt(res.lambda_max)},{res.iterations},{_fmt(res.residual)}"],
    )
    if sc.get_bool("eigen.write_eigenfunction", False):
        write_field_csv(res.phi, os.path.join(out, "eigenfunction.csv"))


def _cmd_steady(sc: Scenario, out: str) -> None:
    p = sc.params()
    res = monotone_iterate(p, tol=sc.get_float("tol", 1e-10), max_iter=sc.get_int("max_iter", 2000))
    _write_lines(
        os.path.join(out, "summary.csv"),
        [
            "branch,lambda0,iterations,residual",
            f"{res.branch},{_fmt(res.lambda0)},{res.iterations},{_fmt(res.residual)}",
        ],
    )
    write_field_csv(res.triple.V, os.path.join(out, "V.csv"))
    write_field_csv(res.triple.T, os.path.join(out, "T.csv"))
    write_field_csv(res.triple.I, os.path.join(out, "I.csv"))


def _evolve_config(sc: Scenario) -> EvolveConfig:
    try:
        return EvolveConfig(
            dt=sc.get_float("dt"),
            t_end=sc.get_float("t_end"),
            scheme=sc.raw.get("scheme", "strang"),
            record_every=sc.get_int("record_every", 100),
            probes=sc.probes(),
            snapshot_every=sc.get_int("snapshot_every", 0),
        )
    except ValueError as e:
        raise ScenarioError(str(e)) from None


def _write_snapshots(out: str, snaps, names) -> None:
    for idx, entry in enumerate(snaps):
        for name, fld in names(entry):
            write_field_csv(fld, os.path.join(out, f"{name}_{idx:04d}.csv"))


def _cmd_evolve(sc: Scenario, out: str) -> None:
    p = sc.params()
    cfg = _evolve_config(sc)
    s0 = inoculum_state(p, sc.inoculum_site(), sc.get_float("inoculum.amount", 1.0))
    traj = evolve(s0, p, cfg)

    rows = ["t,site,T,I,V"]
    for t, site, T, I, V in traj.probe_rows:
        rows.append(f"{_fmt(t)},{site[0]}:{site[1]},{_fmt(T)},{_fmt(I)},{_fmt(V)}")
    _write_lines(os.path.join(out, "probes.csv"), rows)

    rows = ["t,series,T,V"]
    for t, label, T, V in phase_portrait(traj):
        rows.append(f"{_fmt(t)},{label},{_fmt(T)},{_fmt(V)}")
    _write_lines(os.path.join(out, "phase.csv"), rows)

    _write_snapshots(
        out, traj.snapshots, lambda s: (("T", s.T), ("I", s.I), ("V", s.V))
    )

    fin = traj.final
    reg = traj.region
    viol = traj.first_violation
    lines = [
        f"t_end = {_fmt(fin.t)}",
        f"sup_T = {_fmt(fin.T.max())}",
        f"sup_I = {_fmt(fin.I.max())}",
        f"sup_V = {_fmt(fin.V.max())}",
        f"mean_T = {_fmt(float(fin.T.values.mean()))}",
        f"mean_I = {_fmt(float(fin.I.values.mean()))}",
        f"mean_V = {_fmt(float(fin.V.values.mean()))}",
        f"M1 = {_fmt(reg.M1)}",
        f"M2 = {_fmt(reg.M2)}",
        f"M2_conservative = {_fmt(reg.M2_conservative)}",
        f"violated = {'true' if traj.violations else 'false'}",
        f"first_violation = {viol[1] + ' at t=' + _fmt(viol[0]) if viol else 'none'}",
        f"clamped_T = {_fmt(traj.clamped['T'])}",
        f"clamped_I = {_fmt(traj.clamped['I'])}",
        f"clamped_V = {_fmt(traj.clamped['V'])}",
    ]
    _write_lines(os.path.join(out, "summary.txt"), lines)


def _cmd_evolve_scalar(sc: Scenario, out: str) -> None:
    p = sc.params()
    cfg = _evolve_config(sc)
    i, j = sc.inoculum_site()
    v0 = np.zeros(p.spec.shape)
    v0[i, j] = sc.get_float("inoculum.amount", 1.0)
    traj = evolve_scalar(ScalarField(p.spec, v0), p, cfg)

    rows = ["t,site,V"]
    for t, site, V in traj.probe_rows:
        rows.append(f"{_fmt(t)},{site[0]}:{site[1]},{_fmt(V)}")
    _write_lines(os.path.join(out, "probes.csv"), rows)

    _write_snapshots(out, traj.snapshots, lambda s: (("V", s[1]),))
    write_field_csv(traj.final, os.path.join(out, "V_final.csv"))
    _write_lines(
        os.path.join(out, "summary.txt"),
        [
            f"t_end = {_fmt(traj.times[-1])}",
            f"sup_V = {_fmt(traj.sup_V[-1])}",
            f"mean_V = {_fmt(traj.mean_V[-1])}",
            f"clamped_V = {_fmt(traj.clamped)}",
        ],
    )


def _cmd_stability(sc: Scenario, out: str) -> None:
    p = sc.params()
    try:
        report = stability_report(p, max_index=sc.get_int("stability.max_index", 128))
    except ValueError as e:
        raise ScenarioError(str(e)) from None
    rows = ["m1,m2,lambda_k,b,c,d,re_root1,re_root2,re_root3,stable"]
    for m in report.modes:
        re_parts = ",".join(_fmt(r.real) for r in m.roots)
        rows.append(
            f"{m.mode[0]},{m.mode[1]},{_fmt(m.lambda_k)},{_fmt(m.b)},{_fmt(m.c)},"
            f"{_fmt(m.d)},{re_parts},{'true' if m.stable else 'false'}"
        )
    _write_lines(os.path.join(out, "modes.csv"), rows)
    _write_lines(
        os.path.join(out, "summary.txt"),
        [
            f"verdict = {'stable' if report.verdict else 'unstable'}",
            f"all_modes = {'true' if report.all_modes else 'false'}",
            f"tail_stable = {'true' if report.tail_stable else 'false'}",
            f"essential_1 = {_fmt(report.essential[0])}",
            f"essential_2 = {_fmt(report.essential[1])}",
            f"unstable_at_zero_mode = {report.unstable_at_zero_mode}",
        ],
    )


def _cmd_homogenize(sc: Scenario, out: str) -> None:
    try:
        cell = read_cell_csv(sc.require("homog.cell_path"))
    except OSError as e:
        raise ScenarioError(f"homog.cell_path: {e}") from None
    eps_raw = sc.require("homog.epsilons")
    try:
        epsilons = [float(x) for x in eps_raw.split(",") if x.strip()]
    except ValueError:
        raise ScenarioError(f"homog.epsilons: expected comma-separated numbers, got {eps_raw!r}") from None
    # scalar rates are what matters here; alpha is replaced by the tiling
    spec = sc.grid()
    p = ModelParams(
        alpha=ScalarField.constant(spec, 1.0),
        gamma=sc.get_float("gamma"),
        N=sc.get_float("N"),
        mu_T=sc.get_float("mu_T"),
        mu_I=sc.get_float("mu_I"),
        mu_V=sc.get_float("mu_V"),
        d_V=sc.get_float("d_V"),
    )
    try:
        study = convergence_study(
            p,
            cell,
            epsilons,
            tol=sc.get_float("tol", 1e-10),
            points_per_subcell=sc.get_int("homog.points_per_subcell", 4),
        )
    except ValueError as e:
        raise ScenarioError(str(e)) from None
    rows = [
        f"# M={_fmt(study.M)} V0={_fmt(study.V0)}",
        "epsilon,lambda0_eps,sup_dist,iterations",
    ]
    for r in study.records:
        rows.append(f"{_fmt(r.epsilon)},{_fmt(r.lambda0_eps)},{_fmt(r.sup_dist)},{r.iterations}")
    _write_lines(os.path.join(out, "study.csv"), rows)


def _cmd_sweep(sc: Scenario, out: str) -> None:
    spec = sc.grid()
    gamma = sc.get_float("gamma")
    N = sc.get_float("N")
    mu_T = sc.get_float("mu_T")
    mu_I = sc.get_float("mu_I")
    mu_V = sc.get_float("mu_V")
    d_V = sc.get_float("d_V")
    tol = sc.get_float("tol", 1e-10)
    count = sc.get_int("sweep.count", 31)
    r0_max = sc.get_float("sweep.r0_max", 3.0)
    if count < 2:
        raise ScenarioError("sweep.count must be >= 2")
    if r0_max <= 0:
        raise ScenarioError("sweep.r0_max must be > 0")

    rows = ["alpha,r0,lambda0,branch,mean_V"]
    for r0 in np.linspace(0.0, r0_max, count):
        alpha = r0 * mu_T * mu_V / (gamma * N)
        if r0 == 0.0:
            # alpha = 0 degenerates the model (no cell production); the steady
            # problem is linear there with V = 0 and eigenvalue exactly -mu_V
            rows.append(f"{_fmt(alpha)},{_fmt(r0)},{_fmt(-mu_V)},uninfected,0")
            continue
        p = ModelParams(ScalarField.constant(spec, alpha), gamma, N, mu_T, mu_I, mu_V, d_V)
        res = monotone_iterate(p, tol=tol)
        mean_v = float(res.triple.V.values.mean())
        rows.append(f"{_fmt(alpha)},{_fmt(r0)},{_fmt(res.lambda0)},{res.branch},{_fmt(mean_v)}")
    _write_lines(os.path.join(out, "sweep.csv"), rows)


def _cmd_random_field(sc: Scenario, out: str) -> None:
    spec = sc.grid()
    try:
        r0 = random_r0_field(
            spec,
            seed=sc.get_int("seed"),
            lo=sc.get_float("rf.lo", 0.1),
            hi=sc.get_float("rf.hi", 5.0),
            source_fraction=sc.get_float("rf.source_fraction"),
        )
    except ValueError as e:
        raise ScenarioError(str(e)) from None
    p = params_from_r0(
        r0,
        sc.get_float("gamma"),
        sc.get_float("N"),
        sc.get_float("mu_T"),
        sc.get_float("mu_I"),
        sc.get_float("mu_V"),
        sc.get_float("d_V"),
    )
    write_field_csv(r0, os.path.join(out, "r0.csv"))
    write_field_csv(p.alpha, os.path.join(out, "alpha.csv"))
    src = int((r0.values > 1).sum())
    _write_lines(
        os.path.join(out, "summary.txt"),
        [f"sources = {src}", f"sinks = {int((r0.values < 1).sum())}", f"sites = {spec.n * spec.n}"],
    )


_COMMANDS = {
    "eigen": _cmd_eigen,
    "steady": _cmd_steady,
    "evolve": _cmd_evolve,
    "evolve-scalar": _cmd_evolve_scalar,
    "stability": _cmd_stability,
    "homogenize": _cmd_homogenize,
    "sweep": _cmd_sweep,
    "random-field": _cmd_random_field,
}

_SOLVER_ERRORS = (
    EigenConvergenceError,
    SteadyConvergenceError,
    SandwichViolationError,
    StepAbortError,
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hivrd",
        description="Virus dynamics on a 2D periodic grid: eigenvalue criterion, "
        "steady states, time integration, mode stability, homogenization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cp = sub.add_parser(name)
        cp.add_argument("--scenario", "-s", required=True, help="key=value scenario file")
        cp.add_argument("--out", "-o", required=True, help="output directory")
    args = parser.parse_args(argv)

    try:
        sc = load_scenario(args.scenario, args.command)
        os.makedirs(args.out, exist_ok=True)
        _COMMANDS[args.command](sc, args.out)
    except ScenarioError as e:
        print(f"hivrd {args.command}: input error: {e}", file=sys.stderr)
        return 2
    except _SOLVER_ERRORS as e:
        print(f"hivrd {args.command}: solver failure: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
