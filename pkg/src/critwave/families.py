"""Initial-data families used by the experiments and the acceptance suite.

Every family produces compactly supported data (the solver's domain-sizing
precondition assumes finite support), so slowly decaying profiles carry an
explicit smooth taper whose location is part of the documented datum.
"""

from __future__ import annotations

import numpy as np

from .evolution import WaveState
from .functionals import quintic_smoothstep, quintic_smoothstep_slope
from .grid import RadialField, RadialGrid
from .ground_state import rescaled_value


def taper_profile(r, r0: float, r1: float):
    """C^2 plateau: 1 below r0, 0 above r1."""
    if not (0.0 <= r0 < r1):
        raise ValueError(f"taper needs 0 <= r0 < r1, got ({r0}, {r1})")
    return 1.0 - quintic_smoothstep((np.asarray(r, dtype=float) - r0) / (r1 - r0))


def scaled_ground_state(
    grid: RadialGrid,
    amplitude: float,
    lam: float = 1.0,
    taper: tuple | None = None,
) -> WaveState:
    """(a * B_lam * taper, 0): the threshold-sweep family."""
    vals = amplitude * rescaled_value(grid.d, lam, grid.nodes)
    if taper is not None:
        r0, r1 = taper
        if r1 >= grid.r_max:
            raise ValueError(f"taper end {r1} must sit inside the grid radius {grid.r_max}")
        vals = vals * taper_profile(grid.nodes, r0, r1)
    return WaveState(RadialField(grid, vals), RadialField.zeros(grid))


def gaussian_bump(grid: RadialGrid, amplitude: float = 1.0, center: float = 0.0, width: float = 1.0) -> WaveState:
    """Smooth even bump; off-center bumps are symmetrized through the origin."""
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    r = grid.nodes
    if center == 0.0:
        vals = amplitude * np.exp(-((r / width) ** 2))
    else:
        vals = amplitude * (
            np.exp(-(((r - center) / width) ** 2)) + np.exp(-(((r + center) / width) ** 2))
        )
    return WaveState(RadialField(grid, vals), RadialField.zeros(grid))


def _shell_profile_and_slope(r, amplitude, ramp_on, plateau_end, taper_width):
    a, b = ramp_on
    up = quintic_smoothstep((r - a) / (b - a))
    dup = quintic_smoothstep_slope((r - a) / (b - a)) / (b - a)
    down = 1.0 - quintic_smoothstep((r - plateau_end) / taper_width)
    ddown = -quintic_smoothstep_slope((r - plateau_end) / taper_width) / taper_width
    return amplitude * up * down, amplitude * (dup * down + up * ddown)


def outgoing_shell(
    grid: RadialGrid,
    amplitude: float = 1.0,
    ramp_on: tuple = (0.2, 0.8),
    plateau_end: float = 400.0,
    taper_width: float = 50.0,
) -> WaveState:
    """Purely outgoing free-wave datum whose reduced profile has a long 1/r
    plateau; used by the linear decay-rate experiment (d=3 only).

    The reduced profile p(r) travels right without reflection, so
    u(r,t) = p(r-t)/r exactly, which realizes the generic decay rates of the
    critical norm over a window shorter than the plateau.
    """
    if grid.d != 3:
        raise ValueError("the outgoing-shell family is defined for d=3")
    if plateau_end + taper_width >= grid.r_max:
        raise ValueError("shell support must sit inside the grid")
    r = grid.nodes
    p, dp = _shell_profile_and_slope(r, amplitude, ramp_on, plateau_end, taper_width)
    u0 = np.zeros_like(r)
    u1 = np.zeros_like(r)
    u0[1:] = p[1:] / r[1:]
    u1[1:] = -dp[1:] / r[1:]
    # p vanishes identically near the origin, so both limits are 0
    return WaveState(RadialField(grid, u0), RadialField(grid, u1))
