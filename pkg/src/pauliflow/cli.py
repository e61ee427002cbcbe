"""Command-line front end: run, sweep, verify, convergence.

Exit codes: 0 all gates pass, 1 a gated tolerance failed, 2 hard error
(bad config, solver failure, ...). Hard errors also leave a machine-
readable error.json in the output directory when one exists. All outputs
are deterministic for a given config + seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config, resolved_config_text
from .diagnostics import identity_suite, records_to_csv
from .evolution import (
    BlowUpGuardTriggered,
    PicardNonConvergence,
    StepScheme,
    epsilon_sweep,
    evolve,
)
from .fields import GaugeKind, NonConvergence
from .initial_data import make_initial_data
from .snapshot import SnapshotError, write_snapshot

__all__ = ["main", "cmd_run", "cmd_sweep", "cmd_verify", "cmd_convergence"]

_NOMINAL_ORDER = {StepScheme.RK4: 4.0, StepScheme.SEMIGROUP_PICARD: 2.0}


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _gate_line(name: str, ok: bool, detail: str) -> bool:
    print(f"GATE {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


def _float_list(text: str) -> list[float]:
    items = [s for s in text.replace(",", " ").split() if s]
    return [float(s) for s in items]


def _int_list(text: str) -> list[int]:
    return [int(s) for s in text.replace(",", " ").split() if s]


def _run_evolution(cfg: RunConfig, keep_states: bool):
    grid = cfg.make_grid()
    u0 = make_initial_data(grid, cfg.initial)
    return evolve(
        u0,
        cfg.gauge,
        cfg.epsilon,
        cfg.dt,
        cfg.t_final,
        cfg.scheme,
        options=cfg.solver,
        stride=cfg.stride,
        sobolev_s=cfg.sobolev_s,
        dealias=cfg.dealias,
        keep_states=keep_states,
        picard_tol=cfg.picard_tol,
        picard_max_iterations=cfg.picard_max_iterations,
        blowup_factor=cfg.blowup_factor,
    )


def _evaluate_run_gates(cfg: RunConfig, result) -> bool:
    gates = cfg.gates
    recs = result.records
    q0 = recs[0].Q
    e0 = recs[0].E
    ok = True

    charge_dev = max(abs(r.Q - q0) for r in recs) / q0
    ok &= _gate_line(
        "charge_conservation", charge_dev <= gates.charge_rel,
        f"max |dQ|/Q0 = {charge_dev:.3e}, bound {gates.charge_rel:g}",
    )

    if cfg.epsilon == 0.0:
        energy_dev = max(abs(r.E - e0) for r in recs) / max(e0, 1e-300)
        ok &= _gate_line(
            "energy_conservation", energy_dev <= gates.energy_rel,
            f"max |dE|/E0 = {energy_dev:.3e}, bound {gates.energy_rel:g}",
        )
    else:
        rises = [recs[i + 1].E - recs[i].E for i in range(len(recs) - 1)] or [0.0]
        worst_rise = max(rises)
        bound = gates.energy_increase_rel * max(e0, 1e-300)
        ok &= _gate_line(
            "energy_monotone", worst_rise <= bound,
            f"max energy increase {worst_rise:.3e}, bound {bound:.3e}",
        )

    if cfg.gauge is GaugeKind.DARWIN:
        worst_gauge = max(r.gauge_residual for r in recs)
        ok &= _gate_line(
            "gauge_coulomb", worst_gauge <= gates.gauge_abs,
            f"max ||div A|| = {worst_gauge:.3e}, bound {gates.gauge_abs:g}",
        )
    else:
        margin = 0.0
        passed = True
        for r, a_norm in zip(recs, result.a_norms):
            bound = gates.gauge_factor * cfg.solver.tolerance * a_norm
            passed &= r.gauge_residual <= bound
            margin = max(margin, r.gauge_residual - bound)
        ok &= _gate_line(
            "gauge_lorenz", passed,
            f"worst residual-over-bound margin {margin:.3e}",
        )

    h1_bound = gates.h1_guard * (np.sqrt(e0) + e0 * np.sqrt(q0))
    grads = [np.sqrt(max(r.H1_norm**2 - r.Q, 0.0)) for r in recs]
    worst_grad = max(grads)
    ok &= _gate_line(
        "h1_a_priori_bound", worst_grad <= h1_bound,
        f"max ||grad u|| = {worst_grad:.6g}, bound {h1_bound:.6g}",
    )
    return bool(ok)


def cmd_run(config_path, out_dir, overrides=None, seed=None) -> int:
    """Single evolution: diagnostics.csv, resolved_config, snapshots, gates."""
    cfg = load_config(config_path, list(overrides or []))
    if seed is not None:
        cfg = load_config(config_path, list(overrides or []) + [f"run.seed={seed}"])
    out = Path(out_dir)
    _write_text(out / "resolved_config", resolved_config_text(cfg))

    result = _run_evolution(cfg, keep_states=cfg.snapshots)
    _write_text(out / "diagnostics.csv", records_to_csv(result.records))

    if cfg.snapshots:
        snap_dir = out / "snapshots"
        snap_dir.mkdir(parents=True, exist_ok=True)
        for st in result.states:
            index = int(round(st.t / cfg.dt))
            write_snapshot(snap_dir / f"{index:06d}.pwf", st.u)

    print(
        f"run: gauge={cfg.gauge.value} eps={cfg.epsilon:g} dt={cfg.dt:g} "
        f"steps={result.n_steps} records={len(result.records)}"
    )
    return 0 if _evaluate_run_gates(cfg, result) else 1


def cmd_sweep(config_path, epsilons, out_dir, overrides=None) -> int:
    """Vanishing-regularization sweep; writes report.csv and per-run CSVs."""
    cfg = load_config(config_path, list(overrides or []))
    out = Path(out_dir)
    _write_text(out / "resolved_config", resolved_config_text(cfg))

    grid = cfg.make_grid()
    u0 = make_initial_data(grid, cfg.initial)
    report = epsilon_sweep(
        u0, cfg.gauge, epsilons, cfg.dt, cfg.t_final,
        scheme=cfg.scheme, options=cfg.solver, stride=cfg.stride,
        sobolev_s=cfg.sobolev_s, dealias=cfg.dealias,
        picard_tol=cfg.picard_tol,
        picard_max_iterations=cfg.picard_max_iterations,
        blowup_factor=cfg.blowup_factor,
    )

    for eps, run in zip(report.epsilons, report.runs):
        _write_text(out / f"eps_{eps:g}" / "diagnostics.csv", records_to_csv(run.records))

    lines = ["eps_hi,eps_lo,deviation,slope,monotone"]
    for p in report.pairs:
        lines.append(
            f"{p.eps_hi:.17g},{p.eps_lo:.17g},{p.deviation:.17g},"
            f"{report.slope:.17g},{'true' if report.monotone else 'false'}"
        )
    _write_text(out / "report.csv", "\n".join(lines) + "\n")

    ok = True
    ok &= _gate_line(
        "sweep_monotone", report.monotone,
        "deviations " + " > ".join(f"{p.deviation:.3e}" for p in report.pairs),
    )
    ok &= _gate_line(
        "sweep_slope", report.slope >= cfg.gates.sweep_slope_min,
        f"log-log slope {report.slope:.3f}, bound {cfg.gates.sweep_slope_min:g}",
    )
    return 0 if ok else 1


def cmd_verify(seed, out_dir=None, resolutions=(8, 16, 32), corruption=None) -> int:
    """Operator identity suite on seeded random band-limited inputs."""
    report = identity_suite(seed=seed, resolutions=tuple(resolutions), corruption=corruption)
    if out_dir is not None:
        _write_text(Path(out_dir) / "report.csv", report.to_csv_text())
    ok = True
    for chk in report.checks:
        ok &= _gate_line(
            f"{chk.name}[n={chk.resolution}]", chk.passed,
            f"deviation {chk.deviation:.3e}, tolerance {chk.tolerance:g}",
        )
    return 0 if ok else 1


def _convergence_dt_study(cfg: RunConfig, dt_list: list[float], out: Path) -> int:
    dts = sorted(set(float(d) for d in dt_list), reverse=True)
    if len(dts) < 3:
        raise ConfigError("dt study needs at least 3 distinct dt values")
    grid = cfg.make_grid()
    u0 = make_initial_data(grid, cfg.initial)

    finals = []
    for dt in dts:
        res = evolve(
            u0, cfg.gauge, cfg.epsilon, dt, cfg.t_final, cfg.scheme,
            options=cfg.solver, stride=max(1, int(round(cfg.t_final / dt))),
            sobolev_s=cfg.sobolev_s, dealias=cfg.dealias, keep_states=True,
            picard_tol=cfg.picard_tol,
            picard_max_iterations=cfg.picard_max_iterations,
            blowup_factor=cfg.blowup_factor,
        )
        finals.append(res.states[-1].u)

    w = grid.cell_volume
    ref = finals[-1].components
    errors = [
        float(np.sqrt(w * np.sum(np.abs(f.components - ref) ** 2))) for f in finals[:-1]
    ]
    coarse_dts = dts[:-1]

    if any(e == 0.0 for e in errors):
        slope = float("nan")
    else:
        slope = float(np.polyfit(np.log(coarse_dts), np.log(errors), 1)[0])
    nominal = _NOMINAL_ORDER[cfg.scheme]
    window = cfg.gates.order_window

    lines = ["dt,error_vs_finest,observed_order"]
    for i, (dt, err) in enumerate(zip(coarse_dts, errors)):
        if i + 1 < len(errors) and errors[i + 1] > 0.0 and err > 0.0:
            pair_order = np.log(err / errors[i + 1]) / np.log(dt / coarse_dts[i + 1])
        else:
            pair_order = float("nan")
        lines.append(f"{dt:.17g},{err:.17g},{pair_order:.17g}")
    lines.append(f"fit,{slope:.17g},{nominal:.17g}")
    _write_text(out / "report.csv", "\n".join(lines) + "\n")

    ok = _gate_line(
        "convergence_order",
        bool(np.isfinite(slope)) and (nominal - window) <= slope <= (nominal + window),
        f"observed order {slope:.3f}, window [{nominal - window:g}, {nominal + window:g}]",
    )
    return 0 if ok else 1


def _convergence_n_study(cfg: RunConfig, n_list: list[int], out: Path) -> int:
    from .grid import make_grid, spectral_restrict

    ns = sorted(set(int(n) for n in n_list))
    if len(ns) < 2:
        raise ConfigError("grid study needs at least 2 distinct n values")
    finals = {}
    for n in ns:
        grid = make_grid(n, cfg.box_length)
        u0 = make_initial_data(grid, cfg.initial)
        res = evolve(
            u0, cfg.gauge, cfg.epsilon, cfg.dt, cfg.t_final, cfg.scheme,
            options=cfg.solver, stride=10**9, sobolev_s=cfg.sobolev_s,
            dealias=cfg.dealias, keep_states=True,
            picard_tol=cfg.picard_tol,
            picard_max_iterations=cfg.picard_max_iterations,
            blowup_factor=cfg.blowup_factor,
        )
        finals[n] = res.states[-1].u

    fine = finals[ns[-1]]
    lines = ["n,error_vs_finest"]
    for n in ns[:-1]:
        coarse_grid = finals[n].grid
        restricted = spectral_restrict(fine, coarse_grid)
        w = coarse_grid.cell_volume
        err = float(
            np.sqrt(w * np.sum(np.abs(finals[n].components - restricted.components) ** 2))
        )
        lines.append(f"{n},{err:.17g}")
        print(f"grid n={n}: error vs n={ns[-1]} is {err:.6e}")
    _write_text(out / "report.csv", "\n".join(lines) + "\n")
    return 0


def cmd_convergence(config_path, out_dir, dt_list=None, n_list=None, overrides=None) -> int:
    """Self-convergence study: dt refinement (gated) or grid refinement."""
    cfg = load_config(config_path, list(overrides or []))
    out = Path(out_dir)
    _write_text(out / "resolved_config", resolved_config_text(cfg))
    if (dt_list is None) == (n_list is None):
        raise ConfigError("convergence needs exactly one of --dt-list / --n-list")
    if dt_list is not None:
        return _convergence_dt_study(cfg, dt_list, out)
    return _convergence_n_study(cfg, n_list, out)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pauliflow",
        description="Pseudo-spectral solver for coupled Pauli spinor-potential systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        if config_required:
            p.add_argument("--config", required=True, help="path to INI config")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument(
            "--set", dest="overrides", action="append", default=[],
            metavar="SECTION.KEY=VALUE", help="override a config value",
        )

    p_run = sub.add_parser("run", help="evolve one configuration and gate diagnostics")
    add_common(p_run)
    p_run.add_argument("--seed", type=int, default=None, help="override run.seed")

    p_sweep = sub.add_parser("sweep", help="vanishing-regularization epsilon sweep")
    add_common(p_sweep)
    p_sweep.add_argument(
        "--epsilons", required=True,
        help="comma/space-separated descending epsilon list (>= 3 values)",
    )

    p_verify = sub.add_parser("verify", help="run the operator identity suite")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--out", default=None, help="directory for report.csv")
    p_verify.add_argument(
        "--resolutions", default="8,16,32", help="comma-separated grid sizes"
    )
    p_verify.add_argument(
        "--corruption", default=None,
        help="inject a deliberate defect (demonstrates detection)",
    )

    p_conv = sub.add_parser("convergence", help="dt or grid self-convergence study")
    add_common(p_conv)
    group = p_conv.add_mutually_exclusive_group(required=True)
    group.add_argument("--dt-list", default=None, help="comma-separated dt values")
    group.add_argument("--n-list", default=None, help="comma-separated grid sizes")

    return parser


_EXPECTED_ERRORS = (
    ConfigError,
    NonConvergence,
    PicardNonConvergence,
    BlowUpGuardTriggered,
    SnapshotError,
    ValueError,
    OSError,
)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out_dir = getattr(args, "out", None)
    try:
        if args.command == "run":
            return cmd_run(args.config, args.out, args.overrides, args.seed)
        if args.command == "sweep":
            return cmd_sweep(args.config, _float_list(args.epsilons), args.out, args.overrides)
        if args.command == "verify":
            return cmd_verify(
                args.seed, args.out, _int_list(args.resolutions), args.corruption
            )
        if args.command == "convergence":
            dt_list = _float_list(args.dt_list) if args.dt_list else None
            n_list = _int_list(args.n_list) if args.n_list else None
            return cmd_convergence(args.config, args.out, dt_list, n_list, args.overrides)
        raise AssertionError(f"unhandled command {args.command}")
    except _EXPECTED_ERRORS as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        if out_dir is not None:
            try:
                _write_text(Path(out_dir) / "error.json", json.dumps(record, indent=2) + "\n")
            except OSError:
                pass
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
