"""Uniform radial grids, weighted quadrature, finite differences and norms.

Everything downstream (energies, condition checkers, the solver diagnostics)
integrates against the radial measure omega_{d-1} r^{d-1} dr on [0, r_max].
The quadrature is composite Simpson with the measure weight absorbed into the
node weights, so the origin node carries zero weight for d >= 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SUPPORTED_DIMENSIONS = (3, 4, 5)


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere S^{d-1} in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def critical_exponent(d: int) -> float:
    """Nonlinearity power for which the energy is scaling-invariant."""
    return 1.0 + 4.0 / (d - 2.0)


def critical_sobolev(d: int) -> float:
    """Embedding exponent: H^1-dot functions live in L^{2d/(d-2)}."""
    return 2.0 * d / (d - 2.0)


@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid r_i = i*dr on [0, r_max] with n cells (n+1 nodes).

    n must be even so composite Simpson applies to the whole interval.
    """

    d: int
    r_max: float
    n: int
    dr: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.d not in SUPPORTED_DIMENSIONS:
            raise ValueError(f"unsupported dimension {self.d}; expected one of {SUPPORTED_DIMENSIONS}")
        if not (self.r_max > 0.0):
            raise ValueError(f"non-positive outer radius {self.r_max}")
        if self.n < 8:
            raise ValueError(f"need at least 8 cells, got {self.n}")
        if self.n % 2 != 0:
            raise ValueError(f"cell count must be even for Simpson quadrature, got {self.n}")
        object.__setattr__(self, "dr", self.r_max / self.n)
        object.__setattr__(self, "nodes", np.arange(self.n + 1) * self.dr)

    def simpson_weights(self) -> np.ndarray:
        w = np.ones(self.n + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return w * (self.dr / 3.0)

    def measure_weights(self, power_offset: int = 0) -> np.ndarray:
        """Quadrature weights for omega_{d-1} r^{d-1+power_offset} dr.

        power_offset=-2 gives the weights for Hardy-type integrals of f^2/r^2.
        The origin weight is zero whenever the net power of r is positive.
        """
        p = self.d - 1 + power_offset
        rw = np.zeros(self.n + 1)
        if p > 0:
            rw[1:] = self.nodes[1:] ** p
        elif p == 0:
            rw[:] = 1.0
        else:
            rw[1:] = self.nodes[1:] ** float(p)  # origin excluded; weight 0 there
        return sphere_area(self.d) * self.simpson_weights() * rw

    def refined(self, factor: int = 2) -> "RadialGrid":
        return RadialGrid(self.d, self.r_max, self.n * factor)


@dataclass(frozen=True)
class RadialField:
    """Samples of a radial function on a RadialGrid.

    even_symmetric marks fields that extend smoothly through the origin
    (u'(0)=0); the radial derivative is pinned to 0 there.
    """

    grid: RadialGrid
    values: np.ndarray
    even_symmetric: bool = True

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.shape != (self.grid.n + 1,):
            raise ValueError(f"expected {self.grid.n + 1} samples, got {v.shape}")

    @property
    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def require_finite(self):
        if not self.finite:
            raise ValueError("field contains non-finite samples")

    @classmethod
    def from_function(cls, grid: RadialGrid, fn, even_symmetric: bool = True) -> "RadialField":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float), even_symmetric)

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "RadialField":
        return cls(grid, np.zeros(grid.n + 1))


def make_grid(d: int, r_max: float, n: int) -> RadialGrid:
    return RadialGrid(d, r_max, n)


def integrate(f: RadialField, power_offset: int = 0) -> float:
    """omega_{d-1} * int_0^{r_max} f(r) r^{d-1+power_offset} dr by composite Simpson."""
    f.require_finite()
    return float(np.dot(f.grid.measure_weights(power_offset), f.values))


def integrate_values(grid: RadialGrid, values: np.ndarray, power_offset: int = 0) -> float:
    """Quadrature of raw samples; callers guarantee finiteness."""
    return float(np.dot(grid.measure_weights(power_offset), values))


def derivative_values(grid: RadialGrid, values: np.ndarray, even_symmetric: bool = True) -> np.ndarray:
    """Second-order radial derivative: centered interior, one-sided ends."""
    dr = grid.dr
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2.0 * dr)
    if even_symmetric:
        out[0] = 0.0
    else:
        out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dr)
    out[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * dr)
    return out


def radial_derivative(f: RadialField) -> RadialField:
    dv = derivative_values(f.grid, f.values, f.even_symmetric)
    # derivative of an even field is odd, and vice versa
    return RadialField(f.grid, dv, even_symmetric=not f.even_symmetric)


def laplacian_values(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    """Discrete radial Laplacian u'' + (d-1) u'/r for even-symmetric samples.

    At the origin the symmetric limit d*u''(0) is used; at r_max a one-sided
    2nd-order formula (rarely relevant, callers usually exclude boundaries).
    """
    d, dr, r = grid.d, grid.dr, grid.nodes
    out = np.empty_like(values)
    upp = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / dr**2
    up = (values[2:] - values[:-2]) / (2.0 * dr)
    out[1:-1] = upp + (d - 1) * up / r[1:-1]
    out[0] = 2.0 * d * (values[1] - values[0]) / dr**2
    # one-sided second derivative and first derivative at r_max
    upp_end = (2.0 * values[-1] - 5.0 * values[-2] + 4.0 * values[-3] - values[-4]) / dr**2
    up_end = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * dr)
    out[-1] = upp_end + (d - 1) * up_end / r[-1]
    return out


def radial_laplacian(f: RadialField) -> RadialField:
    return RadialField(f.grid, laplacian_values(f.grid, f.values), f.even_symmetric)


def lp_norm(f: RadialField, p: float) -> float:
    if p < 1:
        raise ValueError(f"L^p norm needs p >= 1, got {p}")
    return integrate(RadialField(f.grid, np.abs(f.values) ** p)) ** (1.0 / p)


def h1_seminorm(f: RadialField) -> float:
    df = radial_derivative(f)
    return math.sqrt(max(integrate(RadialField(f.grid, df.values**2)), 0.0))


def pair_h_norm(f: RadialField, g: RadialField) -> float:
    """Energy-space norm of the pair: (|f|_{H1-dot}^2 + |g|_{L2}^2)^{1/2}."""
    if f.grid is not g.grid and f.grid != g.grid:
        raise ValueError("pair norm requires both fields on the same grid")
    return math.sqrt(h1_seminorm(f) ** 2 + lp_norm(g, 2) ** 2)


@dataclass(frozen=True)
class NormBundle:
    h1_seminorm: float
    l2_partner: float
    pair_h_norm: float


def norms(f: RadialField, g: RadialField) -> NormBundle:
    h1 = h1_seminorm(f)
    l2g = lp_norm(g, 2)
    return NormBundle(h1, l2g, math.sqrt(h1 * h1 + l2g * l2g))
