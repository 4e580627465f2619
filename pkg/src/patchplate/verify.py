"""Independent oracles and study drivers: Kirsch benchmark, convergence, sweeps.

The Kirsch closed form is classical plate theory and entirely external to the
solver path, which makes it the primary accuracy oracle.  Convergence studies
and parameter sweeps re-solve the problem per point; their outputs feed both
the acceptance tests and the command line tool.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .field import DensitySet, FieldEvaluator, StressTrace
from .linsolve import solve_problem
from .model import ProblemSpec, ValidatedProblem, validate

__all__ = [
    "kirsch_hoop",
    "Solution",
    "solve",
    "ConvergenceReport",
    "convergence_study",
    "SweepRow",
    "sweep",
    "apply_parameter",
    "SWEEP_PARAMETERS",
]


def kirsch_hoop(theta, sigma: float):
    """Boundary hoop stress of a traction-free circular hole under remote
    uniaxial tension ``sigma`` along the real axis: sigma * (1 - 2 cos 2theta)."""
    return sigma * (1.0 - 2.0 * np.cos(2.0 * np.asarray(theta, dtype=float)))


@dataclass(frozen=True)
class Solution:
    """A solved problem bundled with its field evaluator."""

    problem: ValidatedProblem
    densities: DensitySet
    residual_norm: float
    condition_estimate: float
    order: int

    def evaluator(self, quad_size: int | None = None) -> FieldEvaluator:
        return FieldEvaluator(self.problem, self.densities, quad_size)


def solve(spec: ProblemSpec | ValidatedProblem, order: int, quad_size: int | None = None) -> Solution:
    """Validate (if needed), assemble, and solve at truncation ``order``."""
    problem = spec if isinstance(spec, ValidatedProblem) else validate(spec)
    blocks, report, _ = solve_problem(problem, order, quad_size)
    return Solution(
        problem=problem,
        densities=DensitySet.from_blocks(problem, blocks),
        residual_norm=report.residual_norm,
        condition_estimate=report.condition_estimate,
        order=report.order,
    )


@dataclass(frozen=True)
class ConvergenceReport:
    orders: tuple[int, ...]
    tails: tuple[float, ...]  # max |coefficient| over |m| > N/2, all blocks
    trace_deltas: tuple[float, ...]  # max trace difference against the largest N
    trace_scale: float  # max trace magnitude at the largest N
    contours: tuple[str, ...]


def _trace_values(evaluator: FieldEvaluator, contours, resolution: int) -> np.ndarray:
    vals = []
    for cid in contours:
        tr = evaluator.trace(cid, "plate", "plus", resolution)
        vals.append(tr.sigma_n + 1j * tr.tau_n)
    return np.concatenate(vals)


def _coefficient_tail(densities: DensitySet) -> float:
    worst = 0.0
    for group in (densities.g, densities.q, densities.qk, densities.gk):
        for coeffs in group.values():
            n = coeffs.order
            cut = n // 2
            ms = coeffs.harmonics
            tail = np.abs(coeffs.values[np.abs(ms) > cut])
            if tail.size:
                worst = max(worst, float(tail.max()))
    return worst


def convergence_study(
    spec: ProblemSpec | ValidatedProblem,
    orders,
    quad_size: int | None = None,
    contours=None,
    resolution: int = 360,
) -> ConvergenceReport:
    """Solve at each truncation and compare stress traces against the largest.

    ``contours`` defaults to the first hole and the first patch boundary,
    traced on the plate side.
    """
    orders = tuple(sorted(orders))
    if len(orders) < 2:
        raise ValueError("need at least two truncation orders to compare")
    problem = spec if isinstance(spec, ValidatedProblem) else validate(spec)
    if contours is None:
        contours = tuple(
            ([problem.hole_ids[0]] if problem.hole_ids else [])
            + ([problem.patch_ids[0]] if problem.patch_ids else [])
        )
    tails, traces = [], []
    for order in orders:
        sol = solve(problem, order, quad_size)
        tails.append(_coefficient_tail(sol.densities))
        traces.append(_trace_values(sol.evaluator(), contours, resolution))
    ref = traces[-1]
    deltas = tuple(float(np.abs(tr - ref).max()) for tr in traces)
    return ConvergenceReport(
        orders=orders,
        tails=tuple(tails),
        trace_deltas=deltas,
        trace_scale=float(np.abs(ref).max()),
        contours=tuple(contours),
    )


# ---------------------------------------------------------------------------
# Parameter sweeps.
# ---------------------------------------------------------------------------

SWEEP_PARAMETERS = ("patch_scale", "load_angle", "patch_orientation")


def apply_parameter(spec: ProblemSpec, parameter: str, value: float) -> ProblemSpec:
    """Rebuild the problem with one swept parameter changed.

    ``patch_scale`` sets every patch to the given circumscribed radius,
    keeping its proportions; ``load_angle`` replaces the far-field angle;
    ``patch_orientation`` adds the value to every patch rotation.
    """
    if parameter == "load_angle":
        return replace(spec, far_field=replace(spec.far_field, alpha=float(value)))
    if parameter not in SWEEP_PARAMETERS:
        raise ValueError(f"unknown sweep parameter {parameter!r}; use one of {SWEEP_PARAMETERS}")
    patches = {}
    for pid, patch in spec.patches.items():
        contour = patch.contour
        if parameter == "patch_scale":
            if contour.kind == "circle":
                contour = contour.with_params(radius=float(value))
            elif contour.kind == "rounded_square":
                s = dict(contour.params)["corner_divisor"]
                contour = contour.with_params(scale=float(value) * s / (s + 1.0))
            else:
                raise ValueError(f"cannot scale a {contour.kind!r} patch contour")
        else:  # patch_orientation
            if contour.kind != "rounded_square":
                raise ValueError(f"cannot rotate a {contour.kind!r} patch contour")
            base = dict(contour.params)["rotation"]
            contour = contour.with_params(rotation=base + float(value))
        patches[pid] = replace(patch, contour=contour)
    return replace(spec, patches=patches)


@dataclass(frozen=True)
class SweepRow:
    value: float
    max_sigma: dict[str, float]  # contour id -> max |sigma_n|
    max_tau: dict[str, float]


def sweep(
    spec: ProblemSpec,
    parameter: str,
    values,
    order: int,
    quad_size: int | None = None,
    contours=None,
    region: str = "plate",
    side="plus",
    resolution: int = 256,
) -> list[SweepRow]:
    """Solve at each parameter value and record per-contour stress maxima."""
    rows = []
    for value in values:
        sol = solve(apply_parameter(spec, parameter, float(value)), order, quad_size)
        ev = sol.evaluator()
        ids = contours
        if ids is None:
            ids = tuple(sol.problem.hole_ids) + tuple(sol.problem.patch_ids)
        max_sigma, max_tau = {}, {}
        for cid in ids:
            tr: StressTrace = ev.trace(cid, region, side, resolution)
            max_sigma[cid] = tr.max_sigma
            max_tau[cid] = tr.max_tau
        rows.append(SweepRow(value=float(value), max_sigma=max_sigma, max_tau=max_tau))
    return rows
