"""Coefficient families and the structural conditions they must satisfy.

A coefficient is a radial function with range in (0, 1] decaying at infinity.
Two scan-based checkers certify the sign conditions the theory needs: the
defocusing weight eta = phi - (d-2) r phi' / (2(d-1)) must stay positive, and
the focusing combination 2*(1 - phi) + r phi' must stay nonnegative. Both are
certified by a dense grid scan whose verdict must be stable under refinement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import RadialGrid, RadialField, critical_sobolev

# strict inequality gets positive headroom, the non-strict one symmetric slack
DEFOCUSING_TOL = 1e-12
FOCUSING_TOL = -1e-12

DEFAULT_SCAN_NODES = 100_000
DEFAULT_SCAN_R_MAX = 50.0

_SINH_SERIES_CUT = 1e-4


@dataclass(frozen=True)
class CoefficientSpec:
    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family == "constant":
            c = self.params.get("c")
            if c is None or not (0.0 < c <= 1.0):
                raise ValueError(f"constant coefficient needs 0 < c <= 1, got {c}")
        elif self.family == "sinh_power":
            s = self.params.get("sigma")
            if s is None or s <= 0.0:
                raise ValueError(f"sinh_power needs sigma > 0, got {s}")
        elif self.family == "gaussian":
            a = self.params.get("alpha")
            if a is None or a <= 0.0:
                raise ValueError(f"gaussian needs alpha > 0, got {a}")
        elif self.family == "table":
            radii = np.asarray(self.params.get("radii", ()), dtype=float)
            values = np.asarray(self.params.get("values", ()), dtype=float)
            if radii.ndim != 1 or radii.shape != values.shape or len(radii) < 2:
                raise ValueError("table needs matching 1-d radii/values with >= 2 samples")
            if radii[0] != 0.0 or np.any(np.diff(radii) <= 0):
                raise ValueError("table radii must start at 0 and strictly increase")
            if np.any(values <= 0.0) or np.any(values > 1.0):
                raise ValueError("table values must lie in (0, 1]")
            object.__setattr__(self, "params", {"radii": radii, "values": values})
        else:
            raise ValueError(f"unknown coefficient family {self.family!r}")

    @classmethod
    def constant(cls, c: float) -> "CoefficientSpec":
        return cls("constant", {"c": float(c)})

    @classmethod
    def sinh_power(cls, sigma: float) -> "CoefficientSpec":
        return cls("sinh_power", {"sigma": float(sigma)})

    @classmethod
    def gaussian(cls, alpha: float) -> "CoefficientSpec":
        return cls("gaussian", {"alpha": float(alpha)})

    @classmethod
    def table(cls, radii, values) -> "CoefficientSpec":
        return cls("table", {"radii": radii, "values": values})

    def to_json_dict(self) -> dict:
        if self.family == "table":
            return {
                "family": "table",
                "radii": [float(x) for x in self.params["radii"]],
                "values": [float(x) for x in self.params["values"]],
            }
        return {"family": self.family, **{k: float(v) for k, v in self.params.items()}}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "CoefficientSpec":
        d = dict(obj)
        family = d.pop("family", None)
        if family == "constant":
            return cls.constant(d["c"])
        if family == "sinh_power":
            return cls.sinh_power(d["sigma"])
        if family == "gaussian":
            return cls.gaussian(d["alpha"])
        if family == "table":
            return cls.table(d["radii"], d["values"])
        raise ValueError(f"unknown coefficient family {family!r}")


def phi_eval(spec: CoefficientSpec, r):
    """Value and radial derivative of the coefficient at radius r (vectorized)."""
    rr = np.asarray(r, dtype=float)
    scalar = rr.ndim == 0
    rr = np.atleast_1d(rr)
    if np.any(rr < 0):
        raise ValueError("radius must be nonnegative")

    if spec.family == "constant":
        c = spec.params["c"]
        val = np.full_like(rr, c)
        der = np.zeros_like(rr)
    elif spec.family == "gaussian":
        a = spec.params["alpha"]
        val = np.exp(-a * rr**2)
        der = -2.0 * a * rr * val
    elif spec.family == "sinh_power":
        s = spec.params["sigma"]
        val = np.empty_like(rr)
        der = np.empty_like(rr)
        small = rr < _SINH_SERIES_CUT
        # removable singularity at the origin: r/sinh r = 1 - r^2/6 + O(r^4)
        val[small] = 1.0 - s * rr[small] ** 2 / 6.0
        der[small] = -s * rr[small] / 3.0
        rb = rr[~small]
        # sinh overflows past r ~ 710; the ratio then underflows to 0, which
        # is the correct double-precision value of the coefficient there
        with np.errstate(over="ignore"):
            base = rb / np.sinh(rb)
        val[~small] = base**s
        der[~small] = s * val[~small] * (1.0 / rb - 1.0 / np.tanh(rb))
    elif spec.family == "table":
        radii = spec.params["radii"]
        values = spec.params["values"]
        val = np.interp(rr, radii, values)
        slopes = np.diff(values) / np.diff(radii)
        seg = np.clip(np.searchsorted(radii, rr, side="right") - 1, 0, len(slopes) - 1)
        der = slopes[seg]
        der = np.where(rr >= radii[-1], 0.0, der)  # constant continuation
    else:  # pragma: no cover - constructor forbids this
        raise ValueError(f"unknown coefficient family {spec.family!r}")

    if scalar:
        return float(val[0]), float(der[0])
    return val, der


def coefficient_field(spec: CoefficientSpec, grid: RadialGrid) -> RadialField:
    val, _ = phi_eval(spec, grid.nodes)
    return RadialField(grid, val)


@dataclass(frozen=True)
class ConditionReport:
    condition: str  # "defocusing" | "focusing" | "decay"
    min_value: float
    argmin_r: float
    passed: bool
    tolerance: float
    grid_d: int
    grid_n: int
    grid_r_max: float
    coarse_grid_warning: bool = False
    tail_monotone_to_zero: bool | None = None

    def as_dict(self) -> dict:
        return {
            "condition": self.condition,
            "min_value": self.min_value,
            "argmin_r": self.argmin_r,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "grid_d": self.grid_d,
            "grid_n": self.grid_n,
            "grid_r_max": self.grid_r_max,
            "coarse_grid_warning": self.coarse_grid_warning,
            "tail_monotone_to_zero": self.tail_monotone_to_zero,
        }


def default_scan_grid(d: int) -> RadialGrid:
    return RadialGrid(d, DEFAULT_SCAN_R_MAX, DEFAULT_SCAN_NODES)


def _table_too_coarse(spec: CoefficientSpec, grid: RadialGrid) -> bool:
    if spec.family != "table":
        return False
    return float(np.min(np.diff(spec.params["radii"]))) < grid.dr


def defocusing_values(spec: CoefficientSpec, grid: RadialGrid) -> np.ndarray:
    d = grid.d
    val, der = phi_eval(spec, grid.nodes)
    return val - (d - 2.0) * grid.nodes * der / (2.0 * (d - 1.0))


def check_defocusing_condition(spec: CoefficientSpec, grid: RadialGrid | None = None) -> ConditionReport:
    """Scan phi - (d-2) r phi' / (2(d-1)) > 0 over the grid.

    Decaying coefficients push the weight below any absolute floor at large
    radius (and eventually below the double-precision floor), so strict
    positivity is certified on the head of the scan where the weight is
    representable above tolerance; past that point the weight must stay
    nonnegative and nonincreasing (a limit of 0 from above).
    """
    if grid is None:
        grid = default_scan_grid(3)
    g = defocusing_values(spec, grid)
    above = np.nonzero(g > DEFOCUSING_TOL)[0]
    if len(above) == 0:
        k = int(np.argmin(g))
        return ConditionReport(
            condition="defocusing",
            min_value=float(g[k]),
            argmin_r=float(grid.nodes[k]),
            passed=False,
            tolerance=DEFOCUSING_TOL,
            grid_d=grid.d,
            grid_n=grid.n,
            grid_r_max=grid.r_max,
            coarse_grid_warning=_table_too_coarse(spec, grid),
            tail_monotone_to_zero=False,
        )
    last = int(above[-1])
    head = g[: last + 1]
    k = int(np.argmin(head))
    tail = g[last + 1 :]
    tail_ok = bool(np.all(tail >= -DEFOCUSING_TOL) and np.all(np.diff(tail) <= DEFOCUSING_TOL))
    return ConditionReport(
        condition="defocusing",
        min_value=float(head[k]),
        argmin_r=float(grid.nodes[k]),
        passed=bool(head[k] > DEFOCUSING_TOL and tail_ok),
        tolerance=DEFOCUSING_TOL,
        grid_d=grid.d,
        grid_n=grid.n,
        grid_r_max=grid.r_max,
        coarse_grid_warning=_table_too_coarse(spec, grid),
        tail_monotone_to_zero=None if len(tail) == 0 else tail_ok,
    )


def check_focusing_condition(spec: CoefficientSpec, grid: RadialGrid | None = None) -> ConditionReport:
    """Scan 2*(1 - phi) + r phi' >= 0 over the grid.

    The limit at infinity is 2* > 0 for every decaying family, so the finite
    scan radius is the binding part of the certificate.
    """
    if grid is None:
        grid = default_scan_grid(3)
    ts = critical_sobolev(grid.d)
    val, der = phi_eval(spec, grid.nodes)
    g = ts * (1.0 - val) + grid.nodes * der
    k = int(np.argmin(g))
    return ConditionReport(
        condition="focusing",
        min_value=float(g[k]),
        argmin_r=float(grid.nodes[k]),
        passed=bool(g[k] >= FOCUSING_TOL),
        tolerance=FOCUSING_TOL,
        grid_d=grid.d,
        grid_n=grid.n,
        grid_r_max=grid.r_max,
        coarse_grid_warning=_table_too_coarse(spec, grid),
    )


def check_decay_condition(spec: CoefficientSpec, grid: RadialGrid | None = None) -> ConditionReport:
    """Range in [0, 1] on the scan grid plus decay to zero at the outer radius.

    A strictly positive analytic coefficient may underflow to 0.0 in double
    precision far out; the range check therefore admits exact zeros in the
    tail. Constant coefficients fail the vanishing-limit part by design.
    """
    if grid is None:
        grid = default_scan_grid(3)
    val, _ = phi_eval(spec, grid.nodes)
    k = int(np.argmin(val))
    in_range = bool(np.all(val >= 0.0) and np.all(val <= 1.0 + 1e-15) and val[0] > 0.0)
    tail = val[grid.n // 2 :]
    vanishes = bool(val[-1] <= 1e-3 and np.all(np.diff(tail) <= 1e-15))
    return ConditionReport(
        condition="decay",
        min_value=float(val[k]),
        argmin_r=float(grid.nodes[k]),
        passed=in_range and vanishes,
        tolerance=0.0,
        grid_d=grid.d,
        grid_n=grid.n,
        grid_r_max=grid.r_max,
        coarse_grid_warning=_table_too_coarse(spec, grid),
        tail_monotone_to_zero=vanishes,
    )


def morawetz_weight(spec: CoefficientSpec, grid: RadialGrid) -> RadialField:
    """The dispersive-estimate weight; node-for-node the defocusing integrand."""
    return RadialField(grid, defocusing_values(spec, grid))
