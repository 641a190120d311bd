"""Deterministic figure rendering from critwave's CSV/JSON artifacts.

This package reads only the public artifact contract (trace.csv, decay.csv,
sweep.csv, summary.json, all schema version 1); it never imports the solver
package. Output is SVG with fixed styling, a pinned hash salt and stripped
date metadata, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

SCHEMA_VERSION = 1

TRACE_HEADER = (
    "t,E_total,E_kinetic,E_gradient,E_potential,sup_norm,h_norm,"
    "y_norm_accum,morawetz_accum,G_R,y_R,y_R_dot,kappa_R"
)
DECAY_HEADER = "t,crit_norm,sup_norm"
SWEEP_HEADER = "a,E_phi,grad_ratio,prediction,outcome,verdict"

FIGURE_KINDS = ("energy_trace", "decay_fit", "morawetz", "virial_residual", "phase_diagram")

_STYLE = {
    "figure.figsize": (7.0, 4.5),
    "figure.dpi": 100,
    "svg.hashsalt": "critwave-plots",
    "axes.grid": True,
    "grid.alpha": 0.3,
}


class SchemaError(ValueError):
    """Input artifact does not carry the expected schema version 1 layout."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple
    output: str

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {FIGURE_KINDS}")
        if not self.inputs:
            raise ValueError("figure needs at least one input artifact")


@dataclass
class RenderResult:
    path: Path
    annotations: dict = field(default_factory=dict)


def _read_csv(path, expected_header: str, numeric_columns=None):
    p = Path(path)
    if not p.exists():
        raise SchemaError(f"input {p} does not exist")
    lines = p.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != expected_header:
        raise SchemaError(
            f"{p} does not carry the schema version {SCHEMA_VERSION} header "
            f"(expected {expected_header!r})"
        )
    rows = [ln.split(",") for ln in lines[1:] if ln.strip()]
    if not rows:
        raise SchemaError(f"{p} has a valid header but no data rows")
    names = expected_header.split(",")
    cols: dict = {name: [] for name in names}
    for row in rows:
        if len(row) != len(names):
            raise SchemaError(f"{p} has a malformed row with {len(row)} cells")
        for name, cell in zip(names, row):
            cols[name].append(cell)
    numeric = set(names) - set(("prediction", "outcome", "verdict"))
    if numeric_columns is not None:
        numeric = set(numeric_columns)
    for name in names:
        if name in numeric:
            cols[name] = np.array([float(c) for c in cols[name]])
    return cols


def _read_summary(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise SchemaError(f"input {p} does not exist")
    obj = json.loads(p.read_text(encoding="utf-8"))
    if obj.get("schema") != SCHEMA_VERSION:
        raise SchemaError(
            f"{p} carries schema {obj.get('schema')!r}, expected version {SCHEMA_VERSION}"
        )
    return obj


def _save(fig, output) -> Path:
    out = Path(output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out


def _fig_energy_trace(spec: FigureSpec) -> RenderResult:
    cols = _read_csv(spec.inputs[0], TRACE_HEADER)
    t = cols["t"]
    fig, ax = plt.subplots()
    for name, style in (
        ("E_total", "-"),
        ("E_kinetic", "--"),
        ("E_gradient", "-."),
        ("E_potential", ":"),
    ):
        ax.plot(t, cols[name], style, label=name)
    e0 = cols["E_total"][0]
    drift = float(np.max(np.abs(cols["E_total"] - e0)) / abs(e0)) if e0 else 0.0
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.set_title(f"energy pieces (relative drift {drift:.2e})")
    ax.legend(loc="best")
    return RenderResult(_save(fig, spec.output), {"relative_drift": drift})


def _fig_decay_fit(spec: FigureSpec) -> RenderResult:
    cols = _read_csv(spec.inputs[0], DECAY_HEADER)
    t, crit = cols["t"], cols["crit_norm"]
    if np.any(crit <= 0.0):
        raise SchemaError("decay fit needs strictly positive norms")
    slope, intercept = np.polyfit(np.log(t), np.log(crit), 1)
    fig, ax = plt.subplots()
    ax.loglog(t, crit, "o", label="critical norm")
    ax.loglog(t, np.exp(intercept) * t**slope, "-", label=f"fit slope {slope:.3f}")
    ref = crit[0] * (t / t[0]) ** -0.5
    ax.loglog(t, ref, "--", label="reference slope -1/2")
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.set_title(f"free-wave decay: fitted slope {slope:.3f}")
    ax.legend(loc="best")
    return RenderResult(_save(fig, spec.output), {"slope": float(slope)})


def _fig_morawetz(spec: FigureSpec) -> RenderResult:
    if len(spec.inputs) < 2:
        raise ValueError("morawetz figure needs trace.csv and summary.json")
    cols = _read_csv(spec.inputs[0], TRACE_HEADER)
    summary = _read_summary(spec.inputs[1])
    d = summary["grid"]["d"]
    bound = 2.0 * d / (d - 1.0) * float(summary["initial_energy"])
    t, acc = cols["t"], cols["morawetz_accum"]
    fig, ax = plt.subplots()
    ax.plot(t, acc, "-", label="accumulated weighted mass")
    ax.axhline(bound, linestyle="--", color="k", label=f"bound {bound:.4g}")
    margin = bound - float(acc[-1])
    ax.set_xlabel("t")
    ax.set_ylabel("space-time integral")
    ax.set_title(f"dispersive estimate: margin {margin:.4g}")
    ax.legend(loc="best")
    return RenderResult(_save(fig, spec.output), {"lhs": float(acc[-1]), "bound": bound, "margin": margin})


def _fig_virial_residual(spec: FigureSpec) -> RenderResult:
    cols = _read_csv(spec.inputs[0], TRACE_HEADER)
    t, y, y_dot, kappa = cols["t"], cols["y_R"], cols["y_R_dot"], cols["kappa_R"]
    if len(t) < 3:
        raise SchemaError("virial residual needs at least 3 trace rows")
    # centered difference of the localized mass against its exact rate column
    fd = (y[2:] - y[:-2]) / (t[2:] - t[:-2])
    resid = np.abs(fd - y_dot[1:-1])
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True)
    ax1.plot(t, y, "-", label="localized mass")
    ax1.plot(t, cols["G_R"], "--", label="virial functional")
    ax1.legend(loc="best")
    ax1.set_ylabel("value")
    ax2.semilogy(t[1:-1], np.maximum(resid, 1e-300), "-", label="|fd rate - exact rate|")
    ax2.semilogy(t, np.maximum(kappa, 1e-300), "--", label="exterior tail")
    ax2.set_xlabel("t")
    ax2.set_ylabel("residual")
    ax2.legend(loc="best")
    fig.suptitle("virial identity residuals")
    return RenderResult(
        _save(fig, spec.output), {"max_residual": float(np.max(resid)), "max_kappa": float(np.max(kappa))}
    )


_VERDICT_LEVEL = {"Scatter": 0, "Indeterminate": 1, "BlowUp": 2, "Failed": 3}
_BAND_COLORS = {"Scatter": "#2c7fb8", "Indeterminate": "#bdbdbd", "BlowUp": "#d95f02", "Failed": "#000000"}


def _fig_phase_diagram(spec: FigureSpec) -> RenderResult:
    cols = _read_csv(spec.inputs[0], SWEEP_HEADER)
    a = cols["a"]
    preds = cols["prediction"]
    outs = cols["outcome"]
    fig, ax = plt.subplots()
    for x, p, o in zip(a, preds, outs):
        ax.scatter([x], [0.0], c=_BAND_COLORS.get(p, "k"), s=120, marker="s")
        ax.scatter([x], [1.0], c=_BAND_COLORS.get("BlowUp" if o == "BlewUp" else "Scatter" if o == "Dispersed" else "Indeterminate"), s=120, marker="o")
    for x, r in zip(a, cols["grad_ratio"]):
        ax.annotate(f"{r:.2f}", (x, 0.5), ha="center", fontsize=8)
    ax.set_yticks([0.0, 0.5, 1.0])
    ax.set_yticklabels(["prediction", "gradient ratio", "outcome"])
    ax.set_xlabel("amplitude a")
    ax.set_ylim(-0.5, 1.5)
    ax.set_title("threshold phase diagram")
    levels = [_VERDICT_LEVEL.get(p, 3) for p in preds]
    monotone = levels == sorted(levels)
    return RenderResult(
        _save(fig, spec.output),
        {"predictions": list(preds), "outcomes": list(outs), "bands_monotone": monotone},
    )


_RENDERERS = {
    "energy_trace": _fig_energy_trace,
    "decay_fit": _fig_decay_fit,
    "morawetz": _fig_morawetz,
    "virial_residual": _fig_virial_residual,
    "phase_diagram": _fig_phase_diagram,
}


def render(spec: FigureSpec) -> RenderResult:
    """Render one figure; raises before writing anything on bad inputs."""
    with plt.rc_context(_STYLE):
        return _RENDERERS[spec.kind](spec)
