"""Problem description: materials, far-field load, holes, patches.

Validation normalizes orientations (hole boundaries clockwise, patch
boundaries counterclockwise), checks separation and coverage, and fixes the
ordering used by the discrete system: bonded holes first, then free holes;
fully bonded patches first, then edge-bonded ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Contour, min_separation

__all__ = [
    "ValidationError",
    "Material",
    "FarField",
    "TractionLoad",
    "Hole",
    "Patch",
    "ProblemSpec",
    "ValidatedProblem",
    "DerivedConstants",
    "kappa",
    "validate",
    "derived_constants",
]

SEPARATION_TOL = 1e-3


class ValidationError(ValueError):
    """Inconsistent or physically impossible problem description."""


@dataclass(frozen=True)
class Material:
    """Isotropic elastic sheet: shear modulus, Poisson ratio, thickness."""

    shear_modulus: float
    poisson: float
    thickness: float = 1.0

    def __post_init__(self):
        if self.shear_modulus <= 0:
            raise ValidationError(f"shear modulus must be positive, got {self.shear_modulus}")
        if not (-1.0 < self.poisson < 0.5):
            raise ValidationError(f"Poisson ratio must lie in (-1, 0.5), got {self.poisson}")
        if self.thickness <= 0:
            raise ValidationError(f"thickness must be positive, got {self.thickness}")


def kappa(material: Material) -> float:
    """Plane-stress Kolosov constant (3 - nu) / (1 + nu)."""
    return (3.0 - material.poisson) / (1.0 + material.poisson)


@dataclass(frozen=True)
class FarField:
    """Principal stresses sigma1, sigma2 at infinity; sigma1 acts at angle alpha."""

    sigma1: float = 0.0
    sigma2: float = 0.0
    alpha: float = 0.0


@dataclass(frozen=True)
class TractionLoad:
    """Boundary traction sigma_n + i tau_n as a finite Fourier series in theta."""

    coeffs: tuple[tuple[int, complex], ...] = ()

    @staticmethod
    def zero() -> "TractionLoad":
        return TractionLoad(())

    @staticmethod
    def constant_pressure(p: float) -> "TractionLoad":
        """Uniform normal pressure p pushing on the boundary: sigma_n = -p."""
        return TractionLoad(((0, complex(-p)),))

    @staticmethod
    def from_dict(coeffs: dict[int, complex]) -> "TractionLoad":
        return TractionLoad(tuple(sorted((int(m), complex(c)) for m, c in coeffs.items())))

    def eval(self, theta):
        th = np.asarray(theta, dtype=float)
        out = np.zeros(th.shape, dtype=complex)
        for m, c in self.coeffs:
            out = out + c * np.exp(1j * m * th)
        return complex(out) if np.isscalar(theta) else out

    def is_zero(self) -> bool:
        return all(c == 0 for _, c in self.coeffs)


@dataclass(frozen=True)
class Hole:
    """A hole boundary; either bonded to a covering patch or free and loaded."""

    contour: Contour
    bonded_to: str | None = None
    load: TractionLoad = field(default_factory=TractionLoad.zero)
    z_ref: complex | None = None  # reference point for the load resultant (free holes)


@dataclass(frozen=True)
class Patch:
    """A reinforcing patch; ``covers`` lists hole ids for full attachment.

    An empty ``covers`` means the patch is attached along its own boundary
    only (edge bond).
    """

    contour: Contour
    material: Material
    covers: tuple[str, ...] = ()


@dataclass(frozen=True)
class ProblemSpec:
    plate: Material
    far_field: FarField
    holes: dict[str, Hole]
    patches: dict[str, Patch]


@dataclass(frozen=True)
class DerivedConstants:
    """All load- and material-derived constants of the integral system."""

    kappa_plate: float
    gamma: complex  # (sigma1 + sigma2) / 4
    gamma_prime: complex  # (sigma2 - sigma1) e^{-2 i alpha} / 2
    kappa_patch: tuple[float, ...]
    d: tuple[float, ...]  # thickness ratios h_k / h per patch
    z_ref: tuple[complex | None, ...]  # per hole; None when bonded
    q: tuple[complex, ...]  # load resultants per hole; 0 when bonded


@dataclass(frozen=True)
class ValidatedProblem:
    """Normalized, cross-checked problem with a fixed unknown ordering."""

    plate: Material
    far_field: FarField
    hole_ids: tuple[str, ...]
    holes: tuple[Hole, ...]
    patch_ids: tuple[str, ...]
    patches: tuple[Patch, ...]
    patch_of_hole: tuple[int | None, ...]  # index into patches, None for free holes
    holes_of_patch: tuple[tuple[int, ...], ...]
    n_full: int  # fully bonded patches
    n_edge: int  # edge-bonded patches
    n_free: int  # free holes
    n_bonded_holes: int

    @property
    def counts(self) -> tuple[int, int, int]:
        return self.n_full, self.n_edge, self.n_free

    def hole_index(self, hole_id: str) -> int:
        return self.hole_ids.index(hole_id)

    def patch_index(self, patch_id: str) -> int:
        return self.patch_ids.index(patch_id)

    def unknown_group_count(self) -> int:
        """Density blocks: g' per hole, q and g'_k per patch, q_k per bonded hole."""
        n_holes = len(self.holes)
        n_patches = len(self.patches)
        return n_holes + 2 * n_patches + self.n_bonded_holes


def _normalized(contour: Contour, want_ccw: bool) -> Contour:
    sign = contour.orientation_sign()
    if (sign > 0) != want_ccw:
        return contour.reversed()
    return contour


def validate(spec: ProblemSpec, separation_tol: float = SEPARATION_TOL) -> ValidatedProblem:
    """Check and normalize a problem description.

    Raises ValidationError for bonding inconsistencies, patches that do not
    cover their holes, touching contours, or out-of-range materials.
    """
    kappa(spec.plate)  # range check

    covered_by: dict[str, str] = {}
    for pid, patch in spec.patches.items():
        kappa(patch.material)
        for hid in patch.covers:
            if hid not in spec.holes:
                raise ValidationError(f"patch {pid!r} covers unknown hole {hid!r}")
            if hid in covered_by:
                raise ValidationError(
                    f"hole {hid!r} is covered by both {covered_by[hid]!r} and {pid!r}"
                )
            covered_by[hid] = pid

    for hid, hole in spec.holes.items():
        if hole.bonded_to is not None:
            if hole.bonded_to not in spec.patches:
                raise ValidationError(f"hole {hid!r} bonded to unknown patch {hole.bonded_to!r}")
            if covered_by.get(hid) != hole.bonded_to:
                raise ValidationError(
                    f"hole {hid!r} declares bond to {hole.bonded_to!r} but the patch "
                    "does not list it"
                )
        if hid in covered_by and not hole.load.is_zero():
            raise ValidationError(f"bonded hole {hid!r} cannot carry a boundary load")

    # ordering: bonded holes first, free holes after; full patches, then edge
    bonded_hids = [h for h in spec.holes if h in covered_by]
    free_hids = [h for h in spec.holes if h not in covered_by]
    full_pids = [p for p, patch in spec.patches.items() if patch.covers]
    edge_pids = [p for p, patch in spec.patches.items() if not patch.covers]

    hole_ids = tuple(bonded_hids + free_hids)
    patch_ids = tuple(full_pids + edge_pids)
    holes = []
    for hid in hole_ids:
        hole = spec.holes[hid]
        holes.append(
            Hole(
                contour=_normalized(hole.contour, want_ccw=False),
                bonded_to=covered_by.get(hid),
                load=hole.load,
                z_ref=hole.z_ref,
            )
        )
    patches = []
    for pid in patch_ids:
        patch = spec.patches[pid]
        patches.append(
            Patch(
                contour=_normalized(patch.contour, want_ccw=True),
                material=patch.material,
                covers=patch.covers,
            )
        )

    patch_of_hole = tuple(
        patch_ids.index(covered_by[hid]) if hid in covered_by else None for hid in hole_ids
    )
    holes_of_patch = tuple(
        tuple(hole_ids.index(hid) for hid in patch.covers) for patch in patches
    )

    # geometric checks
    all_contours = [(hid, h.contour) for hid, h in zip(hole_ids, holes)] + [
        (pid, p.contour) for pid, p in zip(patch_ids, patches)
    ]
    for a in range(len(all_contours)):
        for b in range(a + 1, len(all_contours)):
            gap = min_separation(all_contours[a][1], all_contours[b][1])
            if gap < separation_tol:
                raise ValidationError(
                    f"contours {all_contours[a][0]!r} and {all_contours[b][0]!r} touch or "
                    f"intersect (separation {gap:.2e} < {separation_tol:g})"
                )
    probe = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    for pi, patch in enumerate(patches):
        for hi in holes_of_patch[pi]:
            pts = holes[hi].contour.point(probe)
            if any(patch.contour.winding_number(z) != 1 for z in pts):
                raise ValidationError(
                    f"patch {patch_ids[pi]!r} does not cover hole {hole_ids[hi]!r}"
                )
    for hi, hole in enumerate(holes):
        if patch_of_hole[hi] is None and hole.z_ref is not None:
            if hole.contour.winding_number(hole.z_ref) == 0:
                raise ValidationError(
                    f"reference point {hole.z_ref} lies outside free hole {hole_ids[hi]!r}"
                )

    return ValidatedProblem(
        plate=spec.plate,
        far_field=spec.far_field,
        hole_ids=hole_ids,
        holes=tuple(holes),
        patch_ids=patch_ids,
        patches=tuple(patches),
        patch_of_hole=patch_of_hole,
        holes_of_patch=holes_of_patch,
        n_full=len(full_pids),
        n_edge=len(edge_pids),
        n_free=len(free_hids),
        n_bonded_holes=len(bonded_hids),
    )


def derived_constants(problem: ValidatedProblem, quad_nodes: int = 256) -> DerivedConstants:
    """Far-field constants, thickness ratios and load resultants."""
    kp = kappa(problem.plate)
    ff = problem.far_field
    gamma = (ff.sigma1 + ff.sigma2) / 4.0 + 0.0j
    gamma_prime = (ff.sigma2 - ff.sigma1) * np.exp(-2j * ff.alpha) / 2.0

    kappa_patch = tuple(kappa(p.material) for p in problem.patches)
    d = tuple(p.material.thickness / problem.plate.thickness for p in problem.patches)

    z_ref: list[complex | None] = []
    q: list[complex] = []
    th = np.linspace(0.0, 2.0 * np.pi, quad_nodes, endpoint=False)
    for hi, hole in enumerate(problem.holes):
        if problem.patch_of_hole[hi] is not None:
            z_ref.append(None)
            q.append(0.0 + 0.0j)
            continue
        zr = hole.z_ref if hole.z_ref is not None else hole.contour.centroid()
        z_ref.append(complex(zr))
        d1, _ = hole.contour.derivs(th)
        resultant = -1j * np.mean(hole.load.eval(th) * d1) * 2.0 * np.pi
        q.append(complex(resultant / (2.0 * np.pi * (1.0 + kp))))
    return DerivedConstants(
        kappa_plate=kp,
        gamma=complex(gamma),
        gamma_prime=complex(gamma_prime),
        kappa_patch=kappa_patch,
        d=d,
        z_ref=tuple(z_ref),
        q=tuple(q),
    )
