"""critwave: a desk-scale numerical laboratory for the energy-critical
semilinear wave equation with a spatially decaying coefficient."""

from .grid import RadialField, RadialGrid, make_grid
from .coefficients import CoefficientSpec
from .ground_state import GroundStateConstants, ground_state_constants
from .evolution import Outcome, SolverConfig, WaveState, evolve
from .classifier import Prediction, predict_defocusing, predict_focusing

__all__ = [
    "RadialField",
    "RadialGrid",
    "make_grid",
    "CoefficientSpec",
    "GroundStateConstants",
    "ground_state_constants",
    "Outcome",
    "SolverConfig",
    "WaveState",
    "evolve",
    "Prediction",
    "predict_defocusing",
    "predict_focusing",
]

__version__ = "0.1.0"
