"""Integral diagnostics: energies, trapping ratios, space-time norms, the
localized virial functionals with their predicted time derivatives, and the
exterior tail functional that budgets every cutoff error.

Cutoff-localized identities are never reported as exact: each check carries
the exterior tail value so callers can use tail-aware tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coefficients import CoefficientSpec, check_defocusing_condition, morawetz_weight, phi_eval
from .grid import (
    RadialField,
    RadialGrid,
    critical_exponent,
    critical_sobolev,
    derivative_values,
    integrate_values,
)

TRACE_COLUMNS = (
    "t",
    "E_total",
    "E_kinetic",
    "E_gradient",
    "E_potential",
    "sup_norm",
    "h_norm",
    "y_norm_accum",
    "morawetz_accum",
    "G_R",
    "y_R",
    "y_R_dot",
    "kappa_R",
)

TRACE_SCHEMA_VERSION = 1


def quintic_smoothstep(x):
    """C^2 ramp from 0 at x<=0 to 1 at x>=1."""
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (10.0 + x * (-15.0 + 6.0 * x))


def quintic_smoothstep_slope(x):
    x = np.clip(x, 0.0, 1.0)
    return 30.0 * x**2 * (1.0 - x) ** 2


@dataclass(frozen=True)
class CutoffField:
    """Radial plateau cutoff: 1 inside R, 0 outside 2R, C^2 quintic between."""

    R: float
    grid: RadialGrid
    values: np.ndarray = field(repr=False)
    slope: np.ndarray = field(repr=False)

    @classmethod
    def from_radius(cls, grid: RadialGrid, R: float) -> "CutoffField":
        if R <= 0:
            raise ValueError(f"cutoff radius must be positive, got {R}")
        if 2.0 * R > grid.r_max + 1e-12:
            raise ValueError(f"cutoff support [0, {2*R}] exceeds the grid radius {grid.r_max}")
        x = (grid.nodes - R) / R
        vals = 1.0 - quintic_smoothstep(x)
        slope = -quintic_smoothstep_slope(x) / R
        return cls(R, grid, vals, slope)


@dataclass(frozen=True)
class EnergyBreakdown:
    total: float
    kinetic: float
    gradient: float
    potential: float  # unsigned coefficient-weighted potential mass


def energy(state, spec: CoefficientSpec, zeta: int) -> EnergyBreakdown:
    """Conserved energy of the flow split into its three pieces."""
    u: RadialField = state.u
    ut: RadialField = state.u_t
    u.require_finite()
    ut.require_finite()
    grid = u.grid
    ts = critical_sobolev(grid.d)
    phi, _ = phi_eval(spec, grid.nodes)
    du = derivative_values(grid, u.values, u.even_symmetric)
    kinetic = 0.5 * integrate_values(grid, ut.values**2)
    gradient = 0.5 * integrate_values(grid, du**2)
    potential = integrate_values(grid, phi * np.abs(u.values) ** ts) / ts
    return EnergyBreakdown(kinetic + gradient - zeta * potential, kinetic, gradient, potential)


@dataclass(frozen=True)
class TrappingReport:
    norm_below_threshold: bool
    gradient_ratio: float
    gradient_bounds: tuple
    energy_ratio: float
    energy_bounds: tuple
    all_pass: bool


def trapping_check(state, spec: CoefficientSpec, delta: float, ground) -> TrappingReport:
    """Quantitative trapping ratios for states below the variational threshold.

    gradient_ratio compares int(|grad u|^2 - |u|^{2*}) against int |grad u|^2
    and must lie in [1 - theta, 1] with theta = (1 - 2 delta/d)^{(2*-2)/2};
    energy_ratio compares the same quantity plus the kinetic mass against the
    conserved energy, bounded between 2(1-theta) and 1/(1/2 - theta/2*).
    """
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0,1), got {delta}")
    grid = state.u.grid
    d = grid.d
    ts = critical_sobolev(d)
    theta = (1.0 - 2.0 * delta / d) ** ((ts - 2.0) / 2.0)
    g_lo, g_hi = 1.0 - theta, 1.0
    e_lo, e_hi = 2.0 * (1.0 - theta), 1.0 / (0.5 - theta / ts)

    du = derivative_values(grid, state.u.values, state.u.even_symmetric)
    grad_sq = integrate_values(grid, du**2)
    kin = integrate_values(grid, state.u_t.values**2)
    crit = integrate_values(grid, np.abs(state.u.values) ** ts)
    eb = energy(state, spec, zeta=+1)

    pair_sq = grad_sq + kin
    norm_below = math.sqrt(max(pair_sq, 0.0)) < math.sqrt(1.0 - 2.0 * delta / d) * ground.grad_norm

    if grad_sq == 0.0:
        gradient_ratio = 1.0
    else:
        gradient_ratio = (grad_sq - crit) / grad_sq
    if eb.total == 0.0:
        energy_ratio = 1.0
    else:
        energy_ratio = (kin + grad_sq - crit) / eb.total

    ok = (
        norm_below
        and g_lo <= gradient_ratio <= g_hi + 1e-12
        and e_lo <= energy_ratio <= e_hi + 1e-12
    )
    return TrappingReport(norm_below, gradient_ratio, (g_lo, g_hi), energy_ratio, (e_lo, e_hi), ok)


def spacetime_norm_increment(state, spec: CoefficientSpec | None = None) -> float:
    """One time-slice contribution |phi^{1/p_c} u|_{L^{2 p_c}}^{p_c}.

    Pass spec=None for the unweighted variant.
    """
    grid = state.u.grid
    pc = critical_exponent(grid.d)
    if spec is None:
        w = np.abs(state.u.values) ** (2.0 * pc)
    else:
        phi, _ = phi_eval(spec, grid.nodes)
        w = phi**2 * np.abs(state.u.values) ** (2.0 * pc)
    return integrate_values(grid, w) ** 0.5


def y_norm_accumulate(states, dt: float, spec: CoefficientSpec | None = None) -> float:
    """(sum_k dt |u(t_k)|^{p_c}_{L^{2 p_c}})^{1/p_c} over a uniform window."""
    states = list(states)
    if not states:
        raise ValueError("empty diagnostic window")
    pc = critical_exponent(states[0].u.grid.d)
    total = sum(spacetime_norm_increment(s, spec) for s in states) * dt
    return total ** (1.0 / pc)


def morawetz_integrand(state, spec: CoefficientSpec) -> float:
    """int eta(x) |u|^{2*} / |x| dx at one time slice."""
    grid = state.u.grid
    ts = critical_sobolev(grid.d)
    eta = morawetz_weight(spec, grid).values
    return integrate_values(grid, eta * np.abs(state.u.values) ** ts, power_offset=-1)


@dataclass(frozen=True)
class MorawetzReport:
    lhs: float
    bound: float
    margin: float
    initial_energy: float


def morawetz_accumulate(trace: "RunTrace", spec: CoefficientSpec) -> MorawetzReport:
    """Space-time dispersive estimate: accumulated LHS vs 2d/(d-1) * energy.

    Only meaningful on defocusing runs whose coefficient passes the positivity
    condition on the weight; focusing traces are rejected.
    """
    if trace.zeta != -1:
        raise ValueError("the dispersive space-time bound applies to defocusing runs only")
    rep = check_defocusing_condition(spec)
    if not rep.passed:
        raise ValueError("coefficient fails the positive-weight condition; bound not applicable")
    d = trace.grid_d
    lhs = trace.column("morawetz_accum")[-1]
    bound = 2.0 * d / (d - 1.0) * trace.initial_energy
    return MorawetzReport(lhs, bound, bound - lhs, trace.initial_energy)


def _state_pieces(state, spec: CoefficientSpec):
    grid = state.u.grid
    ts = critical_sobolev(grid.d)
    u = state.u.values
    ut = state.u_t.values
    du = derivative_values(grid, u, state.u.even_symmetric)
    phi, dphi = phi_eval(spec, grid.nodes)
    return grid, ts, u, ut, du, phi, dphi


@dataclass(frozen=True)
class VirialReport:
    value: float  # combined functional: moment piece + (d/2) * mass piece
    moment_piece: float  # int (x . grad u) u_t cutoff dx
    mass_piece: float  # int u u_t cutoff dx
    moment_rate_predicted: float
    mass_rate_predicted: float
    rate_predicted: float
    kappa: float


def virial_functional(state, spec: CoefficientSpec, R: float) -> VirialReport:
    """Localized virial functional and its predicted time derivative.

    The predictions drop the exterior error terms; kappa reports their budget
    so callers compare measured rates at a kappa-aware tolerance.
    """
    grid, ts, u, ut, du, phi, dphi = _state_pieces(state, spec)
    cut = CutoffField.from_radius(grid, R)
    d = grid.d
    r = grid.nodes

    moment = integrate_values(grid, r * du * ut * cut.values)
    mass = integrate_values(grid, u * ut * cut.values)
    value = moment + 0.5 * d * mass

    kin = integrate_values(grid, ut**2)
    grad_sq = integrate_values(grid, du**2)
    pot = integrate_values(grid, phi * np.abs(u) ** ts)
    weighted_defect = integrate_values(grid, (r * dphi) * np.abs(u) ** ts * cut.values)

    moment_rate = -0.5 * d * kin + 0.5 * (d - 2.0) * (grad_sq - pot) - weighted_defect / ts
    mass_rate = kin - (grad_sq - pot)
    return VirialReport(
        value=value,
        moment_piece=moment,
        mass_piece=mass,
        moment_rate_predicted=moment_rate,
        mass_rate_predicted=mass_rate,
        rate_predicted=moment_rate + 0.5 * d * mass_rate,
        kappa=tail_kappa(state, R),
    )


@dataclass(frozen=True)
class LocalizedMassReport:
    value: float  # int |u|^2 cutoff dx
    rate: float  # 2 int u_t u cutoff dx
    curvature_predicted: float
    kappa: float


def blowup_functional(state, spec: CoefficientSpec, R: float, zeta: int = +1) -> LocalizedMassReport:
    """Localized mass, its exact first derivative, and the predicted second.

    The curvature identity keeps the cutoff in every piece, so up to
    discretization it is exact; for d=3 the four coefficients are 12, 8, 4, 2.
    """
    grid, ts, u, ut, du, phi, dphi = _state_pieces(state, spec)
    cut = CutoffField.from_radius(grid, R)
    d = grid.d

    y = integrate_values(grid, u**2 * cut.values)
    y_dot = 2.0 * integrate_values(grid, ut * u * cut.values)

    dens = 0.5 * du**2 + 0.5 * ut**2 - (zeta / ts) * phi * np.abs(u) ** ts
    c_energy = 4.0 * d / (d - 2.0)
    c_kin = 4.0 * (d - 1.0) / (d - 2.0)
    c_grad = 4.0 / (d - 2.0)
    curvature = (
        -c_energy * integrate_values(grid, dens * cut.values)
        + c_kin * integrate_values(grid, ut**2 * cut.values)
        + c_grad * integrate_values(grid, du**2 * cut.values)
        - 2.0 * integrate_values(grid, du * cut.slope * u)
    )
    return LocalizedMassReport(y, y_dot, curvature, tail_kappa(state, R))


def tail_kappa(state, R: float) -> float:
    """Exterior energy-type mass beyond radius R at one time slice."""
    grid = state.u.grid
    if R >= grid.r_max:
        raise ValueError(f"tail radius {R} must be inside the grid radius {grid.r_max}")
    ts = critical_sobolev(grid.d)
    u = state.u.values
    ut = state.u_t.values
    du = derivative_values(grid, u, state.u.even_symmetric)
    outside = (grid.nodes > R).astype(float)
    bulk = integrate_values(grid, (ut**2 + du**2 + np.abs(u) ** ts) * outside)
    hardy = integrate_values(grid, u**2 * outside, power_offset=-2)
    return bulk + hardy


def hardy_ratio(f: RadialField) -> float:
    """int |f|^2/|x|^2 dx over |f|_{H1-dot}^2; discretely <= 4 + slack in d=3."""
    grid = f.grid
    du = derivative_values(grid, f.values, f.even_symmetric)
    denom = integrate_values(grid, du**2)
    if denom == 0.0:
        return 0.0
    return integrate_values(grid, f.values**2, power_offset=-2) / denom


@dataclass
class RunTrace:
    """Time series of diagnostics plus the terminal outcome.

    rows is a list of per-sample dicts carrying exactly TRACE_COLUMNS (plus
    any hook-contributed extras); accumulator columns are nondecreasing.
    """

    grid_d: int
    grid_n: int
    grid_r_max: float
    zeta: int
    initial_energy: float
    rows: list = field(default_factory=list)
    outcome: object = None
    final_state: object = None
    extra_columns: tuple = ()
    schema_version: int = TRACE_SCHEMA_VERSION

    def append(self, row: dict):
        self.rows.append(row)

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.rows], dtype=float)

    @property
    def columns(self) -> tuple:
        return TRACE_COLUMNS + tuple(self.extra_columns)

    def to_csv(self, path):
        cols = self.columns
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(cols) + "\n")
            for row in self.rows:
                fh.write(",".join(format(float(row[c]), ".17g") for c in cols) + "\n")
