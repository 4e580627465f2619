"""Assembly of the collocated real linear system.

Five complex equation families are enforced at the collocation nodes:

* ``HOLE_DISPLACEMENT``  - plate/patch displacement-derivative match on each
  bonded hole boundary;
* ``HOLE_TRACTION``      - traction balance on each bonded hole boundary;
* ``FREE_HOLE_TRACTION`` - prescribed traction on each free hole boundary
  (carries the single-valuedness term);
* ``PATCH_EDGE_DISPLACEMENT`` - plate/patch displacement match on each patch
  boundary (carries the zero-resultant term);
* ``PATCH_EDGE_DENSITY`` - consistency of the patch boundary density with the
  patch displacement derivative.

Unknown density blocks are ordered: g' per hole, q per patch boundary, q_k
per bonded hole, g'_k per patch boundary.  Every complex coefficient is split
into real and imaginary columns, every collocated complex equation into real
and imaginary rows, which doubles the order.

Each hole density block g' carries a one-dimensional gauge freedom: a real
constant g' is the interior rigid-rotation continuation and produces no field
in the plate.  A small gauge term (i/2 on coefficient m=0 and its conjugate)
is added to one equation family per hole to pin Re(mean g') = 0; it vanishes
on the selected solution and makes the discrete system uniquely solvable.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .basis import FourierCoeffs, collocation_nodes
from .kernels import (
    SourceGrid,
    cauchy_block,
    cauchy_block_boundary,
    cauchy_conj_block,
    cauchy_conj_block_boundary,
    default_quadrature_size,
    moments,
    smooth_pair_block,
    smooth_pair_block_boundary,
)
from .model import DerivedConstants, ValidatedProblem, derived_constants

__all__ = [
    "RowFamily",
    "EquationRowId",
    "SystemLayout",
    "RealSystem",
    "assemble",
    "matrix_coefficients",
    "rhs_value",
    "row_groups",
]

GAUGE_WEIGHT = 1.0


class RowFamily(Enum):
    HOLE_DISPLACEMENT = "hole_displacement"
    HOLE_TRACTION = "hole_traction"
    FREE_HOLE_TRACTION = "free_hole_traction"
    PATCH_EDGE_DISPLACEMENT = "patch_edge_displacement"
    PATCH_EDGE_DENSITY = "patch_edge_density"


@dataclass(frozen=True)
class EquationRowId:
    family: RowFamily
    index: int  # hole index or patch index, per the validated ordering
    node: int  # collocation node 0..2N


def row_groups(problem: ValidatedProblem) -> list[tuple[RowFamily, int]]:
    """Complex equation groups in system order."""
    bonded = [i for i, p in enumerate(problem.patch_of_hole) if p is not None]
    free = [i for i, p in enumerate(problem.patch_of_hole) if p is None]
    groups: list[tuple[RowFamily, int]] = []
    groups += [(RowFamily.HOLE_DISPLACEMENT, i) for i in bonded]
    groups += [(RowFamily.HOLE_TRACTION, i) for i in bonded]
    groups += [(RowFamily.FREE_HOLE_TRACTION, i) for i in free]
    groups += [(RowFamily.PATCH_EDGE_DISPLACEMENT, k) for k in range(len(problem.patches))]
    groups += [(RowFamily.PATCH_EDGE_DENSITY, k) for k in range(len(problem.patches))]
    return groups


@dataclass(frozen=True)
class SystemLayout:
    """Maps (block, harmonic, re/im) to columns and row ids to rows."""

    order: int  # truncation N
    blocks: tuple[tuple[str, int], ...]  # ("g"|"q"|"qk"|"gk", contour index)
    groups: tuple[tuple[RowFamily, int], ...]
    hole_ids: tuple[str, ...]
    patch_ids: tuple[str, ...]

    @property
    def coeffs_per_block(self) -> int:
        return 2 * self.order + 1

    @property
    def size(self) -> int:
        return 2 * self.coeffs_per_block * len(self.blocks)

    def block_offset(self, kind: str, index: int) -> int:
        return self.blocks.index((kind, index))

    def column(self, kind: str, index: int, m: int, part: str) -> int:
        base = self.block_offset(kind, index) * 2 * self.coeffs_per_block
        return base + 2 * (m + self.order) + (0 if part == "re" else 1)

    def row(self, row_id: EquationRowId, part: str) -> int:
        base = self.groups.index((row_id.family, row_id.index)) * 2 * self.coeffs_per_block
        return base + 2 * row_id.node + (0 if part == "re" else 1)

    def block_label(self, kind: str, index: int) -> str:
        contour = self.hole_ids[index] if kind in ("g", "qk") else self.patch_ids[index]
        return f"{kind}:{contour}"

    def unpack(self, x: np.ndarray) -> dict[tuple[str, int], FourierCoeffs]:
        """Real solution vector back to complex coefficients per block."""
        n = self.coeffs_per_block
        out = {}
        for b, key in enumerate(self.blocks):
            seg = x[b * 2 * n : (b + 1) * 2 * n]
            out[key] = FourierCoeffs(self.order, seg[0::2] + 1j * seg[1::2])
        return out


def build_layout(problem: ValidatedProblem, order: int) -> SystemLayout:
    blocks: list[tuple[str, int]] = []
    blocks += [("g", i) for i in range(len(problem.holes))]
    blocks += [("q", k) for k in range(len(problem.patches))]
    blocks += [("qk", i) for i, p in enumerate(problem.patch_of_hole) if p is not None]
    blocks += [("gk", k) for k in range(len(problem.patches))]
    return SystemLayout(
        order=order,
        blocks=tuple(blocks),
        groups=tuple(row_groups(problem)),
        hole_ids=problem.hole_ids,
        patch_ids=problem.patch_ids,
    )


@dataclass
class RealSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    layout: SystemLayout

    @property
    def order(self) -> int:
        return self.matrix.shape[0]

    def dump_csv(self, matrix_path, rhs_path) -> None:
        np.savetxt(matrix_path, self.matrix, delimiter=",")
        np.savetxt(rhs_path, self.rhs, delimiter=",")


# ---------------------------------------------------------------------------
# Assembly context: cached grids, collocation geometry and kernel blocks.
# ---------------------------------------------------------------------------


class _Context:
    def __init__(self, problem: ValidatedProblem, order: int, quad_size: int | None):
        self.problem = problem
        self.dc: DerivedConstants = derived_constants(problem)
        self.order = order
        size = quad_size if quad_size is not None else default_quadrature_size(order)
        self.grids: dict[tuple[str, int], SourceGrid] = {}
        for i, hole in enumerate(problem.holes):
            self.grids[("hole", i)] = SourceGrid(hole.contour, size)
        for k, patch in enumerate(problem.patches):
            self.grids[("patch", k)] = SourceGrid(patch.contour, size)
        self.nodes = collocation_nodes(order)
        self._kcache: dict[tuple, dict[str, np.ndarray]] = {}

    def contour(self, key):
        return self.grids[key].contour

    def eq_geometry(self, eq_key, thetas):
        contour = self.contour(eq_key)
        t = contour.point(thetas)
        d1, _ = contour.derivs(thetas)
        return t, np.conj(d1) / d1, np.abs(d1) / d1

    def kernels(self, src_key, eq_key, thetas, w) -> dict[str, np.ndarray]:
        """C, CB (coefficient kernels) and B (conjugate kernel) blocks."""
        std = thetas is self.nodes
        cache_key = (src_key, eq_key)
        if std and cache_key in self._kcache:
            return self._kcache[cache_key]
        src = self.grids[src_key]
        if src_key == eq_key:
            blk = {
                "C": cauchy_block_boundary(src, self.order, thetas),
                "CB": cauchy_conj_block_boundary(src, self.order, thetas),
                "B": smooth_pair_block_boundary(src, self.order, thetas),
            }
        else:
            t = self.contour(eq_key).point(thetas)
            blk = {
                "C": cauchy_block(src, self.order, t),
                "CB": cauchy_conj_block(src, self.order, t),
                "B": smooth_pair_block(src, self.order, t, w),
            }
        if std:
            self._kcache[cache_key] = blk
        return blk


# ---------------------------------------------------------------------------
# Far-field right-hand sides.
# ---------------------------------------------------------------------------


def far_field_displacement(problem: ValidatedProblem, dc: DerivedConstants, t, w):
    """Displacement-type driving terms at points t with tangent factors w."""
    kp = dc.kappa_plate
    val = kp * dc.gamma - np.conj(dc.gamma) - np.conj(dc.gamma_prime) * w
    for hi in range(len(problem.holes)):
        if problem.patch_of_hole[hi] is not None:
            continue
        qk, zk = dc.q[hi], dc.z_ref[hi]
        cdiff = np.conj(t) - np.conj(zk)
        val = val - (
            kp * qk / (t - zk)
            - np.conj(qk) / cdiff
            + w * (kp * qk / cdiff + t * np.conj(qk) / cdiff**2)
        )
    return val


def far_field_traction(problem: ValidatedProblem, dc: DerivedConstants, t, w):
    """Traction-type right-hand side at points t with tangent factors w."""
    val = -2.0 * np.real(dc.gamma) - np.conj(dc.gamma_prime) * w
    val = val + np.zeros_like(w)
    for hi in range(len(problem.holes)):
        if problem.patch_of_hole[hi] is not None:
            continue
        qk, zk = dc.q[hi], dc.z_ref[hi]
        cdiff = np.conj(t) - np.conj(zk)
        val = val + (
            2.0 * np.real(qk / (t - zk))
            - w * (t * np.conj(qk) / cdiff**2 + dc.kappa_plate * qk / cdiff)
        )
    return val


# ---------------------------------------------------------------------------
# Complex coefficient blocks for one equation group.
# ---------------------------------------------------------------------------


def _complex_row_blocks(ctx: _Context, family: RowFamily, idx: int, thetas=None):
    """A- and B-coefficient blocks (per unknown block) and the complex rhs.

    Returns ``(blocks, rhs)`` where ``blocks[(kind, index)] = [A, B]`` with
    shape (len(thetas), 2N+1): A multiplies the coefficients, B multiplies
    their conjugates.
    """
    problem, dc, order = ctx.problem, ctx.dc, ctx.order
    if thetas is None:
        thetas = ctx.nodes
    on_hole = family in (
        RowFamily.HOLE_DISPLACEMENT,
        RowFamily.HOLE_TRACTION,
        RowFamily.FREE_HOLE_TRACTION,
    )
    eq_key = ("hole", idx) if on_hole else ("patch", idx)
    t, w, absdt = ctx.eq_geometry(eq_key, thetas)
    n_pts = len(np.atleast_1d(thetas))
    ms = np.arange(-order, order + 1)
    e_t = np.exp(1j * np.multiply.outer(np.atleast_1d(thetas), ms))

    kp = dc.kappa_plate
    blocks: dict[tuple[str, int], list[np.ndarray]] = {}

    def add(key, A=None, B=None):
        if key not in blocks:
            shape = (n_pts, 2 * order + 1)
            blocks[key] = [np.zeros(shape, complex), np.zeros(shape, complex)]
        if A is not None:
            blocks[key][0] += A
        if B is not None:
            blocks[key][1] += B

    wc = w[:, None]

    def plate_displacement(mult):
        for h in range(len(problem.holes)):
            kb = ctx.kernels(("hole", h), eq_key, thetas, w)
            add(
                ("g", h),
                A=mult / (2.0 * np.pi) * (kp * kb["C"] - wc * kb["CB"]),
                B=mult / (2.0 * np.pi) * kb["B"],
            )
        cq = 1.0 / ((kp + 1.0) * np.pi * 1j)
        for p in range(len(problem.patches)):
            kb = ctx.kernels(("patch", p), eq_key, thetas, w)
            add(
                ("q", p),
                A=mult * cq * kp * (kb["C"] + wc * kb["CB"]),
                B=-mult * cq * kb["B"],
            )

    def plate_traction():
        for h in range(len(problem.holes)):
            kb = ctx.kernels(("hole", h), eq_key, thetas, w)
            add(
                ("g", h),
                A=(kb["C"] + wc * kb["CB"]) / (2.0 * np.pi),
                B=-kb["B"] / (2.0 * np.pi),
            )
        cq = 1.0 / ((kp + 1.0) * np.pi * 1j)
        for p in range(len(problem.patches)):
            kb = ctx.kernels(("patch", p), eq_key, thetas, w)
            add(
                ("q", p),
                A=cq * (kb["C"] - kp * wc * kb["CB"]),
                B=cq * kb["B"],
            )

    def patch_displacement(k, mult):
        kk = dc.kappa_patch[k]
        cqk = 1.0 / ((kk + 1.0) * np.pi * 1j)
        cdk = 1j / (dc.d[k] * np.pi * (kk + 1.0))
        for b in problem.holes_of_patch[k]:
            kb = ctx.kernels(("hole", b), eq_key, thetas, w)
            add(
                ("qk", b),
                A=mult * cqk * kk * (kb["C"] + wc * kb["CB"]),
                B=-mult * cqk * kb["B"],
            )
        kb = ctx.kernels(("patch", k), eq_key, thetas, w)
        add(
            ("gk", k),
            A=mult / (2.0 * np.pi) * (kk * kb["C"] - wc * kb["CB"]),
            B=mult / (2.0 * np.pi) * kb["B"],
        )
        add(
            ("q", k),
            A=mult * cdk * kk * (kb["C"] + wc * kb["CB"]),
            B=-mult * cdk * kb["B"],
        )
        if eq_key == ("patch", k):
            add(("gk", k), A=mult * 0.5j * (kk + 1.0) * e_t)

    def gauge(hole_idx):
        col = np.zeros((n_pts, 2 * order + 1), complex)
        col[:, order] = 0.5j * GAUGE_WEIGHT
        add(("g", hole_idx), A=col, B=col.copy())

    if family is RowFamily.HOLE_DISPLACEMENT:
        p = problem.patch_of_hole[idx]
        mu_ratio = problem.patches[p].material.shear_modulus / problem.plate.shear_modulus
        plate_displacement(mu_ratio)
        add(("g", idx), A=mu_ratio * 0.5j * (kp + 1.0) * e_t)
        gauge(idx)
        patch_displacement(p, -1.0)
        rhs = -mu_ratio * far_field_displacement(problem, dc, t, w)

    elif family is RowFamily.HOLE_TRACTION:
        p = problem.patch_of_hole[idx]
        plate_traction()
        add(("qk", idx), A=2.0 * dc.d[p] * e_t)
        rhs = far_field_traction(problem, dc, t, w)

    elif family is RowFamily.FREE_HOLE_TRACTION:
        plate_traction()
        mom = moments(ctx.grids[("hole", idx)], order)
        add(("g", idx), A=absdt[:, None] * mom[None, :] / np.pi)
        gauge(idx)
        rhs = far_field_traction(problem, dc, t, w) + problem.holes[idx].load.eval(
            np.atleast_1d(thetas)
        )

    elif family is RowFamily.PATCH_EDGE_DISPLACEMENT:
        mu_ratio = problem.patches[idx].material.shear_modulus / problem.plate.shear_modulus
        plate_displacement(mu_ratio)
        mom = moments(ctx.grids[("patch", idx)], order)
        add(("q", idx), A=mu_ratio * absdt[:, None] * mom[None, :] / np.pi)
        patch_displacement(idx, -1.0)
        rhs = -mu_ratio * far_field_displacement(problem, dc, t, w)

    elif family is RowFamily.PATCH_EDGE_DENSITY:
        kk = dc.kappa_patch[idx]
        patch_displacement(idx, 1.0)
        add(("gk", idx), A=-1j * (kk + 1.0) * e_t)
        rhs = np.zeros(n_pts, complex)

    else:  # pragma: no cover
        raise ValueError(f"unknown family {family}")

    return blocks, rhs


# ---------------------------------------------------------------------------
# Real system.
# ---------------------------------------------------------------------------


def assemble(
    problem: ValidatedProblem, order: int, quad_size: int | None = None
) -> RealSystem:
    """Build the dense real collocation system at truncation ``order``."""
    if order < 0:
        raise ValueError("truncation order must be nonnegative")
    ctx = _Context(problem, order, quad_size)
    layout = build_layout(problem, order)
    n = layout.coeffs_per_block
    size = layout.size
    matrix = np.zeros((size, size))
    rhs = np.zeros(size)

    for gi, (family, idx) in enumerate(layout.groups):
        blocks, crhs = _complex_row_blocks(ctx, family, idx)
        r0 = gi * 2 * n
        rhs[r0 : r0 + 2 * n : 2] = crhs.real
        rhs[r0 + 1 : r0 + 2 * n : 2] = crhs.imag
        for key, (A, B) in blocks.items():
            c0 = layout.block_offset(*key) * 2 * n
            s, d = A + B, A - B
            matrix[r0 : r0 + 2 * n : 2, c0 : c0 + 2 * n : 2] = s.real
            matrix[r0 : r0 + 2 * n : 2, c0 + 1 : c0 + 2 * n : 2] = -d.imag
            matrix[r0 + 1 : r0 + 2 * n : 2, c0 : c0 + 2 * n : 2] = s.imag
            matrix[r0 + 1 : r0 + 2 * n : 2, c0 + 1 : c0 + 2 * n : 2] = d.real
    return RealSystem(matrix=matrix, rhs=rhs, layout=layout)


def matrix_coefficients(
    problem: ValidatedProblem,
    row: EquationRowId,
    theta: float,
    block: tuple[str, int],
    m: int,
    order: int,
    quad_size: int | None = None,
) -> tuple[complex, complex]:
    """(A, B) coefficients of one unknown harmonic in one equation row."""
    ctx = _Context(problem, order, quad_size)
    blocks, _ = _complex_row_blocks(ctx, row.family, row.index, np.array([theta]))
    if block not in blocks:
        return 0.0 + 0.0j, 0.0 + 0.0j
    A, B = blocks[block]
    return complex(A[0, m + order]), complex(B[0, m + order])


def rhs_value(
    problem: ValidatedProblem,
    row: EquationRowId,
    theta: float,
    order: int = 1,
    quad_size: int | None = None,
) -> complex:
    """Inhomogeneous side of one equation row at parameter ``theta``."""
    ctx = _Context(problem, order, quad_size)
    _, rhs = _complex_row_blocks(ctx, row.family, row.index, np.array([theta]))
    return complex(rhs[0])
