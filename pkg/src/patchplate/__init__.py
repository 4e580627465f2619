"""In-plane elasticity of an infinite plate with holes reinforced by patches.

The problem is reduced to a system of singular integral equations for jump
densities on the hole and patch boundaries, discretized by truncated Fourier
series and collocation, and solved as a dense real linear system.  Stresses
and displacement derivatives are then available anywhere in the plate or the
patches through the complex-potential formulas.
"""

from .geometry import Contour, GeometryError, circle, fourier_curve, rounded_square
from .model import (
    FarField,
    Hole,
    Material,
    Patch,
    ProblemSpec,
    TractionLoad,
    ValidationError,
    validate,
)
from .linsolve import SingularSystemError
from .field import DensitySet, FieldEvaluator
from .verify import Solution, convergence_study, kirsch_hoop, solve, sweep

__all__ = [
    "Contour",
    "GeometryError",
    "circle",
    "rounded_square",
    "fourier_curve",
    "Material",
    "FarField",
    "TractionLoad",
    "Hole",
    "Patch",
    "ProblemSpec",
    "ValidationError",
    "validate",
    "SingularSystemError",
    "DensitySet",
    "FieldEvaluator",
    "Solution",
    "solve",
    "kirsch_hoop",
    "convergence_study",
    "sweep",
]

__version__ = "0.1.0"
