"""Direct solve of the dense collocation system with a quality report."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .assembly import RealSystem, assemble
from .model import ValidatedProblem

__all__ = ["SingularSystemError", "SolveReport", "solve_dense", "solve_problem"]

RCOND_FLOOR = 1e-13


class SingularSystemError(RuntimeError):
    """The collocation matrix is numerically singular.

    Usually the problem is degenerate (touching contours slipped past
    validation, or a physically ill-posed configuration).
    """


@dataclass(frozen=True)
class SolveReport:
    residual_norm: float  # max-norm of A x - b
    condition_estimate: float  # 1-norm condition estimate
    order: int


def solve_dense(system: RealSystem) -> tuple[np.ndarray, SolveReport]:
    """LU with partial pivoting plus a cheap 1-norm condition estimate."""
    a = system.matrix
    b = system.rhs
    if a.shape[0] != a.shape[1] or a.shape[0] != b.shape[0]:
        raise ValueError(f"system is not square: matrix {a.shape}, rhs {b.shape}")
    anorm = np.linalg.norm(a, 1)
    with warnings.catch_warnings():
        # exact singularity surfaces as a LinAlgWarning; the rcond gate below
        # turns it into a typed error
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a)
    rcond, info = lapack.dgecon(lu, anorm, norm="1")
    if info != 0:  # pragma: no cover
        raise SingularSystemError(f"condition estimation failed (info={info})")
    if rcond < RCOND_FLOOR:
        raise SingularSystemError(
            f"reciprocal condition estimate {rcond:.2e} below {RCOND_FLOOR:g}; "
            "the problem is likely ill-posed or degenerate"
        )
    x = sla.lu_solve((lu, piv), b)
    residual = float(np.abs(a @ x - b).max()) if b.size else 0.0
    cond = float(1.0 / rcond) if rcond > 0 else float("inf")
    return x, SolveReport(residual_norm=residual, condition_estimate=cond, order=a.shape[0])


def solve_problem(
    problem: ValidatedProblem, order: int, quad_size: int | None = None
):
    """Assemble, solve, and unpack coefficients per density block.

    Returns ``(coeffs, report, system)`` where ``coeffs`` maps
    ``(kind, contour_index)`` to FourierCoeffs.
    """
    system = assemble(problem, order, quad_size)
    x, report = solve_dense(system)
    return system.layout.unpack(x), report, system
