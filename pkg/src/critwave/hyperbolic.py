"""Bridge between radial waves on 3-d hyperbolic space and Euclidean space.

Multiplying a radial function by sinh(r)/r is an isometry from L^2 (and from
the shifted first-order Sobolev space) of hyperbolic space onto the radial
Euclidean spaces, and it intertwines the shifted hyperbolic Laplacian with
the flat one. The shifted-wave flow is therefore evolved by transforming the
data, running the Euclidean solver with the coefficient (r/sinh r)^4, and
pulling every sample back; no separate hyperbolic stepper exists.

The shifted Sobolev norm is computed in its gradient-minus-mass form, valid
for compactly supported data; because the spectrum starts at 1, that form is
near-degenerate for slowly decaying tails, so both terms are reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classifier import Prediction, predict_focusing
from .coefficients import CoefficientSpec
from .evolution import SolverConfig, WaveState, evolve
from .functionals import RunTrace
from .grid import RadialField, RadialGrid, derivative_values
from .ground_state import GroundStateConstants

BRIDGE_COEFFICIENT = CoefficientSpec.sinh_power(4.0)


@dataclass(frozen=True)
class H3RadialField:
    """Samples of a radial function on hyperbolic 3-space; the grid's radial
    coordinate is geodesic distance and the measure weight is sinh^2."""

    grid: RadialGrid
    values: np.ndarray
    even_symmetric: bool = True

    def __post_init__(self):
        if self.grid.d != 3:
            raise ValueError("hyperbolic fields use a d=3 grid tag")
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape != (self.grid.n + 1,):
            raise ValueError(f"expected {self.grid.n + 1} samples, got {v.shape}")

    @classmethod
    def from_function(cls, grid: RadialGrid, fn) -> "H3RadialField":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float))

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "H3RadialField":
        return cls(grid, np.zeros(grid.n + 1))


def _sinh_ratio(r: np.ndarray) -> np.ndarray:
    """sinh(r)/r with the removable singularity filled in."""
    out = np.empty_like(r)
    small = r < 1e-8
    out[small] = 1.0 + r[small] ** 2 / 6.0
    out[~small] = np.sinh(r[~small]) / r[~small]
    return out


def h3_measure_weights(grid: RadialGrid) -> np.ndarray:
    """Quadrature weights for 4 pi sinh^2(r) dr."""
    return 4.0 * math.pi * grid.simpson_weights() * np.sinh(grid.nodes) ** 2


def h3_integrate(f: H3RadialField) -> float:
    return float(np.dot(h3_measure_weights(f.grid), f.values))


def to_euclidean(f: H3RadialField) -> RadialField:
    """Multiply by sinh(r)/r; an isometry onto radial Euclidean fields."""
    return RadialField(f.grid, f.values * _sinh_ratio(f.grid.nodes), f.even_symmetric)


def to_hyperbolic(g: RadialField) -> H3RadialField:
    """Inverse map: multiply by r/sinh(r)."""
    return H3RadialField(g.grid, g.values / _sinh_ratio(g.grid.nodes), g.even_symmetric)


def h3_laplacian_values(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    """Radial hyperbolic Laplacian f'' + 2 coth(r) f' for even samples."""
    dr, r = grid.dr, grid.nodes
    out = np.empty_like(values)
    fpp = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / dr**2
    fp = (values[2:] - values[:-2]) / (2.0 * dr)
    out[1:-1] = fpp + 2.0 * fp / np.tanh(r[1:-1])
    # coth r ~ 1/r + r/3: the even-symmetry limit matches the flat d=3 case
    out[0] = 6.0 * (values[1] - values[0]) / dr**2
    out[-1] = out[-2]
    return out


@dataclass(frozen=True)
class IntertwiningReport:
    sup_residual: float
    r_at_sup: float


def intertwining_residual(f: H3RadialField) -> IntertwiningReport:
    """Discrete defect of -Lap_flat(T f) = T[(-Lap_hyp - 1) f] over interior
    nodes; O(dr^2) for smooth compactly supported data."""
    grid = f.grid
    from .grid import laplacian_values

    lhs = -laplacian_values(grid, to_euclidean(f).values)
    rhs_h3 = -h3_laplacian_values(grid, f.values) - f.values
    rhs = rhs_h3 * _sinh_ratio(grid.nodes)
    resid = np.abs(lhs[1:-1] - rhs[1:-1])
    k = int(np.argmax(resid))
    return IntertwiningReport(float(resid[k]), float(grid.nodes[k + 1]))


@dataclass(frozen=True)
class H3Energy:
    total: float
    sobolev_gradient_term: float  # int |f'|^2 dmu
    sobolev_mass_term: float  # int |f|^2 dmu (subtracted)
    kinetic: float
    sextic: float

    @property
    def sobolev_sq(self) -> float:
        return self.sobolev_gradient_term - self.sobolev_mass_term


def h01_norm_sq(f: H3RadialField) -> tuple:
    """Gradient and mass terms of the shifted Sobolev norm, separately."""
    w = h3_measure_weights(f.grid)
    df = derivative_values(f.grid, f.values, f.even_symmetric)
    return float(np.dot(w, df**2)), float(np.dot(w, f.values**2))


def h3_energy(v: H3RadialField, v_t: H3RadialField) -> H3Energy:
    """Conserved energy of the shifted focusing flow on hyperbolic space."""
    w = h3_measure_weights(v.grid)
    grad_term, mass_term = h01_norm_sq(v)
    kinetic = 0.5 * float(np.dot(w, v_t.values**2))
    sextic = float(np.dot(w, v.values**6)) / 6.0
    total = 0.5 * (grad_term - mass_term) + kinetic - sextic
    return H3Energy(total, grad_term, mass_term, kinetic, sextic)


@dataclass
class H3Trace:
    euclidean_trace: RunTrace
    times: list
    energies: list
    states: list  # pulled-back (v, v_t) snapshots

    @property
    def outcome(self):
        return self.euclidean_trace.outcome


def h3_solve(
    v0: H3RadialField,
    v1: H3RadialField,
    t_final: float,
    cfl: float = 0.5,
    cadence: int = 50,
    sample_every: int = 4,
) -> H3Trace:
    """Evolve the shifted flow by transforming through the Euclidean solver.

    Every sample_every-th cadence row is pulled back to hyperbolic variables
    with its shifted energy evaluated.
    """
    grid = v0.grid
    initial = WaveState(to_euclidean(v0), to_euclidean(v1))
    config = SolverConfig(
        coefficient=BRIDGE_COEFFICIENT, zeta=+1, t_final=t_final, cfl=cfl, cadence=cadence
    )
    times: list = []
    energies: list = []
    states: list = []
    counter = {"k": 0}

    def pullback_hook(state):
        counter["k"] += 1
        if (counter["k"] - 1) % sample_every:
            return {}
        v = to_hyperbolic(state.u)
        vt = to_hyperbolic(state.u_t)
        times.append(state.t)
        energies.append(h3_energy(v, vt))
        states.append((v, vt))
        return {}

    trace = evolve(initial, config, hooks=(pullback_hook,))
    return H3Trace(trace, times, energies, states)


def h3_predict(v0: H3RadialField, v1: H3RadialField, ground: GroundStateConstants) -> Prediction:
    """Threshold classification of hyperbolic data via the transform.

    Exactly the Euclidean focusing predicate applied to the transformed
    datum; the isometry makes the shifted Sobolev norm of v0 and the
    Euclidean gradient norm of the transform interchangeable.
    """
    state = WaveState(to_euclidean(v0), to_euclidean(v1))
    return predict_focusing(state, BRIDGE_COEFFICIENT, ground)
