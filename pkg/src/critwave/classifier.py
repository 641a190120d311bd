"""Decision procedures that turn numerically evaluated energies and norms
into scatter/blow-up predictions, refusing to classify inside the quadrature
error band.

The focusing predicate gates on the conserved energy sitting strictly below
the static-bubble threshold, then branches on the gradient norm against the
bubble's; the defocusing predicate needs only the positive-weight condition
on the coefficient. Margins are reported so sweeps can audit how far each
datum sits from the decision surfaces.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .coefficients import CoefficientSpec, check_defocusing_condition, check_focusing_condition
from .functionals import energy
from .grid import RadialField, RadialGrid, h1_seminorm
from .ground_state import GroundStateConstants

SCATTER = "Scatter"
BLOW_UP = "BlowUp"
INDETERMINATE = "Indeterminate"

CONSISTENT = "Consistent"
INCONSISTENT = "Inconsistent"
UNTESTED = "Untested"

MARGIN_SAFETY = 3.0  # refuse to classify within this multiple of the quadrature error

_condition_cache: dict = {}


def _focusing_condition_ok(spec: CoefficientSpec) -> bool:
    key = json.dumps(spec.to_json_dict(), sort_keys=True)
    if key not in _condition_cache:
        _condition_cache[key] = check_focusing_condition(spec).passed
    return _condition_cache[key]


@dataclass(frozen=True)
class Prediction:
    verdict: str
    rule: str
    energy_value: float
    energy_threshold: float
    energy_margin: float
    norm_value: float
    norm_threshold: float
    norm_margin: float
    tolerance_energy: float
    tolerance_norm: float

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "rule": self.rule,
            "energy_value": self.energy_value,
            "energy_threshold": self.energy_threshold,
            "energy_margin": self.energy_margin,
            "norm_value": self.norm_value,
            "norm_threshold": self.norm_threshold,
            "norm_margin": self.norm_margin,
            "tolerance_energy": self.tolerance_energy,
            "tolerance_norm": self.tolerance_norm,
        }


def _coarsened(field_: RadialField) -> RadialField | None:
    g = field_.grid
    if g.n % 4 != 0 or g.n < 16:
        return None
    coarse = RadialGrid(g.d, g.r_max, g.n // 2)
    return RadialField(coarse, field_.values[::2], field_.even_symmetric)


def _quadrature_estimates(state, spec: CoefficientSpec):
    """Energy and gradient norm on the state's grid plus half-resolution
    copies; the difference estimates the quadrature error."""
    e_fine = energy(state, spec, zeta=+1).total
    n_fine = h1_seminorm(state.u)
    cu, cut = _coarsened(state.u), _coarsened(state.u_t)
    if cu is None or cut is None:
        return e_fine, n_fine, 1e-10 * max(1.0, abs(e_fine)), 1e-10 * max(1.0, n_fine)

    class _Pair:
        u = cu
        u_t = cut

    e_coarse = energy(_Pair, spec, zeta=+1).total
    n_coarse = h1_seminorm(cu)
    err_e = abs(e_fine - e_coarse) + 1e-12 * max(1.0, abs(e_fine))
    err_n = abs(n_fine - n_coarse) + 1e-12 * max(1.0, n_fine)
    return e_fine, n_fine, err_e, err_n


def predict_focusing(state, spec: CoefficientSpec, ground: GroundStateConstants) -> Prediction:
    """Threshold classification below the static-bubble energy.

    Outside the energy gate, or within MARGIN_SAFETY quadrature errors of
    either decision surface, the verdict is Indeterminate.
    """
    if not _focusing_condition_ok(spec):
        raise ValueError("hypothesis not satisfied: coefficient fails the focusing growth condition")
    e_val, n_val, err_e, err_n = _quadrature_estimates(state, spec)
    tol_e, tol_n = MARGIN_SAFETY * err_e, MARGIN_SAFETY * err_n
    e_thr = ground.threshold_energy
    n_thr = ground.grad_norm
    e_margin = e_thr - e_val
    n_margin = n_thr - n_val

    if e_margin <= tol_e:
        verdict = INDETERMINATE
    elif n_margin > tol_n:
        verdict = SCATTER
    elif n_margin < -tol_n:
        verdict = BLOW_UP
    else:
        verdict = INDETERMINATE
    return Prediction(
        verdict,
        "focusing_threshold",
        e_val,
        e_thr,
        e_margin,
        n_val,
        n_thr,
        n_margin,
        tol_e,
        tol_n,
    )


def predict_defocusing(state, spec: CoefficientSpec) -> Prediction:
    """Global scattering whenever the dispersive weight is positive."""
    rep = check_defocusing_condition(spec)
    e_val = energy(state, spec, zeta=-1).total if state is not None else math.nan
    n_val = h1_seminorm(state.u) if state is not None else math.nan
    verdict = SCATTER if rep.passed else INDETERMINATE
    return Prediction(
        verdict,
        "defocusing_global",
        e_val,
        math.inf,
        math.inf,
        n_val,
        math.inf,
        math.inf,
        0.0,
        0.0,
    )


def predict_constant_c(state, c: float, ground: GroundStateConstants) -> Prediction:
    """Constant-coefficient thresholds, rescaled exactly: gate at
    c^{-(d-2)/2} E_thr and norm surface at c^{-(d-2)/4} |grad B|."""
    if not (0.0 < c <= 1.0):
        raise ValueError(f"constant coefficient must lie in (0, 1], got {c}")
    d = state.u.grid.d
    spec = CoefficientSpec.constant(c)
    e_val, n_val, err_e, err_n = _quadrature_estimates(state, spec)
    tol_e, tol_n = MARGIN_SAFETY * err_e, MARGIN_SAFETY * err_n
    e_thr = c ** (-(d - 2.0) / 2.0) * ground.threshold_energy
    n_thr = c ** (-(d - 2.0) / 4.0) * ground.grad_norm
    e_margin = e_thr - e_val
    n_margin = n_thr - n_val
    if e_margin <= tol_e:
        verdict = INDETERMINATE
    elif n_margin > tol_n:
        verdict = SCATTER
    elif n_margin < -tol_n:
        verdict = BLOW_UP
    else:
        verdict = INDETERMINATE
    return Prediction(
        verdict,
        "constant_coefficient",
        e_val,
        e_thr,
        e_margin,
        n_val,
        n_thr,
        n_margin,
        tol_e,
        tol_n,
    )


@dataclass(frozen=True)
class ComparisonRow:
    verdict: str
    prediction: Prediction
    outcome_kind: str
    outcome_t_event: float | None

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "prediction": self.prediction.as_dict(),
            "outcome_kind": self.outcome_kind,
            "outcome_t_event": self.outcome_t_event,
        }


def compare(prediction: Prediction, outcome) -> ComparisonRow:
    """Score a prediction against an observed run outcome."""
    kind = outcome.kind
    if prediction.verdict == INDETERMINATE or kind == "Undecided":
        verdict = UNTESTED
    elif (prediction.verdict, kind) in ((SCATTER, "Dispersed"), (BLOW_UP, "BlewUp")):
        verdict = CONSISTENT
    else:
        verdict = INCONSISTENT
    return ComparisonRow(verdict, prediction, kind, outcome.t_event)
