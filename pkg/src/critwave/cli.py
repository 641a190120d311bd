"""Command-line orchestration: constants, coefficient certification, single
evolutions, threshold sweeps, the hyperbolic bridge and the acceptance suite.

Configs are JSON, traces are CSV with a fixed column order, and summaries are
versioned JSON; identical configs reproduce identical artifacts on the same
platform (nothing in the pipeline is randomized). All file writes go through
a write-temp-then-rename so partially written artifacts never appear.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .acceptance import run_acceptance, sweep_row
from .classifier import compare, predict_defocusing, predict_focusing
from .coefficients import (
    CoefficientSpec,
    check_decay_condition,
    check_defocusing_condition,
    check_focusing_condition,
)
from .evolution import (
    SolverConfig,
    WaveState,
    evolve_confirmed,
    required_domain_radius,
)
from .families import gaussian_bump, scaled_ground_state
from .functionals import TRACE_SCHEMA_VERSION
from .grid import RadialGrid, make_grid
from .ground_state import ground_state_constants
from .hyperbolic import H3RadialField, h3_predict, h3_solve

SUMMARY_SCHEMA = 1


class ConfigError(ValueError):
    pass


def _atomic_write(path: Path, text: str):
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _write_json(path: Path, obj):
    _atomic_write(path, json.dumps(obj, indent=1, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if hasattr(x, "as_dict"):
        return x.as_dict()
    return str(x)


def _out_dir(cli_out, config):
    out = cli_out or os.environ.get("CRITWAVE_OUT") or config.get("output_dir") or "."
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _require(cfg: dict, key: str, kind=None):
    if key not in cfg:
        raise ConfigError(f"config is missing required key {key!r}")
    val = cfg[key]
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(f"config key {key!r} has wrong type {type(val).__name__}")
    return val


def _family_support_radius(data_cfg: dict) -> float:
    fam = data_cfg.get("family")
    if fam == "scaled_ground_state":
        taper = data_cfg.get("taper")
        if taper is None:
            raise ConfigError("scaled_ground_state data needs a taper for a finite support radius")
        return float(taper[1])
    if fam == "gaussian_bump":
        return float(data_cfg.get("center", 0.0)) + 7.0 * float(data_cfg.get("width", 1.0))
    if fam == "h3_gaussian":
        # exp(-r^2) times sinh r / r is below double tiny past ~width*7 + 2
        return 7.0 * float(data_cfg.get("width", 1.0)) + 2.0
    raise ConfigError(f"unknown data family {fam!r}")


def _build_grid(cfg: dict, t_final: float) -> RadialGrid:
    gc = _require(cfg, "grid", dict)
    n = int(_require(gc, "n"))
    r_max = gc.get("r_max", "auto")
    d = int(cfg.get("dimension", 3))
    if r_max == "auto":
        support = _family_support_radius(_require(cfg, "data", dict))
        dr_guess = (support + t_final) / max(n - 2, 1)
        r_max = math.ceil(required_domain_radius(support, t_final, dr_guess))
    try:
        return make_grid(d, float(r_max), n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_data(cfg: dict, grid: RadialGrid) -> WaveState:
    data = _require(cfg, "data", dict)
    fam = data.get("family")
    try:
        if fam == "scaled_ground_state":
            taper = data.get("taper")
            return scaled_ground_state(
                grid,
                float(_require(data, "amplitude")),
                float(data.get("lam", 1.0)),
                taper=tuple(taper) if taper else None,
            )
        if fam == "gaussian_bump":
            return gaussian_bump(
                grid,
                float(_require(data, "amplitude")),
                float(data.get("center", 0.0)),
                float(data.get("width", 1.0)),
            )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown data family {fam!r}")


def _build_solver_config(cfg: dict) -> SolverConfig:
    sc = _require(cfg, "solver", dict)
    diag = cfg.get("diagnostics", {})
    spec = _coefficient(cfg)
    try:
        return SolverConfig(
            coefficient=spec,
            zeta=int(cfg.get("sign", 1)),
            t_final=float(_require(sc, "t_final")),
            cfl=float(sc.get("cfl", 0.5)),
            blowup_sup_cap=float(sc.get("blowup_sup_cap", 1e6)),
            blowup_h_cap_multiple=float(sc.get("blowup_h_cap_multiple", 10.0)),
            cadence=int(diag.get("cadence", 50)),
            cutoff_radius=diag.get("cutoff_radius"),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _coefficient(cfg: dict) -> CoefficientSpec:
    try:
        return CoefficientSpec.from_json_dict(_require(cfg, "coefficient", dict))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _condition_reports(spec: CoefficientSpec) -> dict:
    return {
        "defocusing": check_defocusing_condition(spec).as_dict(),
        "focusing": check_focusing_condition(spec).as_dict(),
        "decay": check_decay_condition(spec).as_dict(),
    }


def cmd_constants(args) -> int:
    bundle = ground_state_constants(args.d)
    text = json.dumps(bundle.as_dict(), indent=1, sort_keys=True)
    print(text)
    if args.out:
        _write_json(Path(args.out), bundle.as_dict())
    return 0


def cmd_check_phi(args) -> int:
    params = {}
    if args.sigma is not None:
        params["sigma"] = args.sigma
    if args.alpha is not None:
        params["alpha"] = args.alpha
    if args.c is not None:
        params["c"] = args.c
    try:
        spec = CoefficientSpec.from_json_dict({"family": args.family, **params})
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    reports = _condition_reports(spec)
    print(json.dumps(reports, indent=1, sort_keys=True))
    if args.out:
        _write_json(Path(args.out) / "conditions.json", reports)
    return 0


def _grid_provenance(grid: RadialGrid, solver: SolverConfig) -> dict:
    return {
        "d": grid.d,
        "n": grid.n,
        "r_max": grid.r_max,
        "dr": grid.dr,
        "cfl": solver.cfl,
        "dt": solver.cfl * grid.dr,
    }


def cmd_evolve(args) -> int:
    cfg = _load_config(args.config)
    solver = _build_solver_config(cfg)
    grid = _build_grid(cfg, solver.t_final)
    spec = solver.coefficient
    builder = lambda g: _build_data(cfg, g)
    ground = ground_state_constants(grid.d)

    if solver.zeta == +1:
        prediction = predict_focusing(builder(grid), spec, ground)
    else:
        prediction = predict_defocusing(builder(grid), spec)

    trapping = None
    if solver.zeta == +1 and prediction.verdict == "Scatter":
        from .functionals import trapping_check

        delta = cfg.get("diagnostics", {}).get("delta")
        if delta is None:
            # largest admissible gap to the threshold, with headroom
            delta = max(1e-3, prediction.energy_margin / ground.threshold_energy - 0.05)
        report = trapping_check(builder(grid), spec, float(delta), ground)
        trapping = {
            "delta": float(delta),
            "norm_below_threshold": report.norm_below_threshold,
            "gradient_ratio": report.gradient_ratio,
            "gradient_bounds": report.gradient_bounds,
            "energy_ratio": report.energy_ratio,
            "energy_bounds": report.energy_bounds,
            "all_pass": report.all_pass,
        }

    trace = evolve_confirmed(builder, grid, solver)
    row = compare(prediction, trace.outcome)

    out = _out_dir(args.out, cfg)
    trace.to_csv(out / "trace.csv.tmp")
    os.replace(out / "trace.csv.tmp", out / "trace.csv")
    summary = {
        "schema": SUMMARY_SCHEMA,
        "trace_schema": TRACE_SCHEMA_VERSION,
        "config": cfg,
        "grid": _grid_provenance(grid, solver),
        "prediction": prediction.as_dict(),
        "outcome": {
            "kind": trace.outcome.kind,
            "t_event": trace.outcome.t_event,
            "evidence": {
                "final_potential_fraction": trace.outcome.evidence.final_potential_fraction,
                "refinement_consistent": trace.outcome.evidence.refinement_consistent,
                "note": trace.outcome.evidence.note,
            },
        },
        "verdict": row.verdict,
        "initial_energy": trace.initial_energy,
        "trapping": trapping,
    }
    _write_json(out / "summary.json", summary)
    _write_json(out / "conditions.json", _condition_reports(spec))
    print(f"{trace.outcome.kind} verdict={row.verdict} -> {out}")
    return 0


SWEEP_COLUMNS = ("a", "E_phi", "grad_ratio", "prediction", "outcome", "verdict")


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    amplitudes = _require(cfg, "amplitudes", list)
    if not amplitudes:
        raise ConfigError("sweep needs a nonempty amplitudes list")
    if sorted(amplitudes) != list(amplitudes):
        raise ConfigError("sweep amplitudes must be sorted ascending")
    out = _out_dir(args.out, cfg)
    path = out / "sweep.csv"
    done = set()
    if path.exists():
        for line in path.read_text().splitlines()[1:]:
            if line.strip():
                done.add(line.split(",")[0])
        fh = open(path, "a", encoding="utf-8")
    else:
        fh = open(path, "w", encoding="utf-8")
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        fh.flush()
    ground = ground_state_constants(3)
    failures = 0
    with fh:
        for a in amplitudes:
            key = format(float(a), ".17g")
            if key in done:
                continue
            try:
                pred, trace, row = sweep_row(float(a))
                cells = (
                    key,
                    format(pred.energy_value, ".17g"),
                    format(pred.norm_value / ground.grad_norm, ".17g"),
                    pred.verdict,
                    trace.outcome.kind,
                    row.verdict,
                )
            except Exception as exc:  # a bad row must not abort the sweep
                failures += 1
                cells = (key, "nan", "nan", "Failed", "Failed", f"Failed:{type(exc).__name__}")
            fh.write(",".join(cells) + "\n")
            fh.flush()
    print(f"sweep -> {path}")
    return 0 if failures == 0 else 1


def cmd_hyperbolic(args) -> int:
    cfg = _load_config(args.config)
    data = _require(cfg, "data", dict)
    if data.get("family") != "h3_gaussian":
        raise ConfigError("hyperbolic runs use the h3_gaussian data family")
    sc = _require(cfg, "solver", dict)
    t_final = float(_require(sc, "t_final"))
    grid = _build_grid(cfg, t_final)
    amp = float(_require(data, "amplitude"))
    width = float(data.get("width", 1.0))
    v0 = H3RadialField.from_function(grid, lambda r: amp * np.exp(-((r / width) ** 2)))
    v1 = H3RadialField.zeros(grid)
    ground = ground_state_constants(3)
    prediction = h3_predict(v0, v1, ground)
    diag = cfg.get("diagnostics", {})
    trace = h3_solve(
        v0,
        v1,
        t_final,
        cfl=float(sc.get("cfl", 0.5)),
        cadence=int(diag.get("cadence", 50)),
    )
    out = _out_dir(args.out, cfg)
    trace.euclidean_trace.to_csv(out / "trace.csv.tmp")
    os.replace(out / "trace.csv.tmp", out / "trace.csv")
    energies = [e.total for e in trace.energies]
    summary = {
        "schema": SUMMARY_SCHEMA,
        "config": cfg,
        "prediction": prediction.as_dict(),
        "outcome": {"kind": trace.outcome.kind, "t_event": trace.outcome.t_event},
        "shifted_energy_initial": energies[0] if energies else None,
        "shifted_energy_drift": (
            max(abs(e - energies[0]) for e in energies) / abs(energies[0])
            if energies and energies[0] != 0.0
            else 0.0
        ),
        "sample_times": trace.times,
    }
    _write_json(out / "summary.json", summary)
    print(f"{trace.outcome.kind} prediction={prediction.verdict} -> {out}")
    return 0


def cmd_verify(args) -> int:
    out_dir = None
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
    results = run_acceptance(only=args.only, out_dir=out_dir)
    if not results:
        print(f"no acceptance criterion matches {args.only!r}", file=sys.stderr)
        return 2
    for r in results:
        print(r.line())
    if args.out:
        _write_json(
            Path(args.out) / "acceptance.json",
            [
                {"name": r.name, "passed": r.passed, "runtime": r.runtime, "details": r.details}
                for r in results
            ],
        )
    n_failed = sum(not r.passed for r in results)
    print(f"{len(results) - n_failed}/{len(results)} criteria passed")
    return 0 if n_failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="critwave",
        description="numerical laboratory for the energy-critical wave equation with a decaying coefficient",
    )
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="print the bubble constants bundle as JSON")
    c.add_argument("--d", type=int, default=3, choices=(3, 4, 5))
    c.add_argument("--out", help="also write the bundle to this file")
    c.set_defaults(fn=cmd_constants)

    ph = sub.add_parser("check-phi", help="certify the structural conditions of a coefficient")
    ph.add_argument("--family", required=True, choices=("constant", "sinh_power", "gaussian"))
    ph.add_argument("--sigma", type=float)
    ph.add_argument("--alpha", type=float)
    ph.add_argument("--c", type=float)
    ph.add_argument("--out", help="directory for conditions.json")
    ph.set_defaults(fn=cmd_check_phi)

    ev = sub.add_parser("evolve", help="run one experiment from a JSON config")
    ev.add_argument("--config", required=True)
    ev.add_argument("--out", help="output directory (overrides CRITWAVE_OUT and the config)")
    ev.set_defaults(fn=cmd_evolve)

    sw = sub.add_parser("sweep", help="run the amplitude sweep, flushing rows incrementally")
    sw.add_argument("--config", required=True)
    sw.add_argument("--out")
    sw.set_defaults(fn=cmd_sweep)

    hy = sub.add_parser("hyperbolic", help="run a shifted-wave experiment through the bridge")
    hy.add_argument("--config", required=True)
    hy.add_argument("--out")
    hy.set_defaults(fn=cmd_hyperbolic)

    vf = sub.add_parser("verify", help="run the acceptance suite")
    vf.add_argument("--only", help="run only criteria whose name contains this substring")
    vf.add_argument("--out", help="directory for acceptance.json")
    vf.set_defaults(fn=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(json.dumps({"error": {"kind": "config", "message": str(exc)}}), file=sys.stderr)
        return 2
    except ValueError as exc:
        print(json.dumps({"error": {"kind": "value", "message": str(exc)}}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
