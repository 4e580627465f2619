"""Stress and displacement evaluation from solved densities.

The plate potentials are a far-field part plus Cauchy-type layers over all
hole and patch boundaries; each patch has its own pair of potentials with
layers over its boundary and the holes it covers.  Stresses and displacement
derivatives follow from the classical complex-potential formulas

    sigma_n + i tau_n = Phi + conj(Phi) + (conj(dt)/dt) (t conj(Phi') + conj(Psi)),
    2 mu (u + iv)'    = kappa Phi - conj(Phi) - (conj(dt)/dt) (t conj(Phi') + conj(Psi)),

where dt is the direction of the line element carrying the stress vector.
Boundary values use Sokhotski-Plemelj limits of every layer; Phi' is always
obtained by differentiating the integral representations analytically, never
by numerical differentiation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import FourierCoeffs, differentiate_series, eval_series
from .kernels import (
    NearBoundaryError,
    SourceGrid,
    cauchy_apply,
    cauchy_apply_boundary,
    conj_density_cauchy_apply,
    conj_density_cauchy_apply_boundary,
    default_quadrature_size,
    moments,
    second_order_apply,
    second_order_apply_boundary,
)
from .model import ValidatedProblem, derived_constants

__all__ = [
    "FieldDomainError",
    "DensitySet",
    "StressSample",
    "StressTrace",
    "FieldEvaluator",
    "stress_at",
    "displacement_derivative",
]

PLUS = 1
MINUS = -1
_SIDES = {"plus": PLUS, "minus": MINUS, PLUS: PLUS, MINUS: MINUS}


class FieldDomainError(ValueError):
    """Evaluation requested outside the region where the field is defined."""


@dataclass(frozen=True)
class DensitySet:
    """Solved density coefficients keyed by contour id.

    ``g``  - displacement-derivative jump density on every hole boundary;
    ``q``  - half traction jump of the plate across every patch boundary;
    ``qk`` - patch stress jump on bonded hole boundaries;
    ``gk`` - patch boundary displacement density on every patch boundary.
    """

    order: int
    g: dict[str, FourierCoeffs]
    q: dict[str, FourierCoeffs]
    qk: dict[str, FourierCoeffs]
    gk: dict[str, FourierCoeffs]

    @staticmethod
    def from_blocks(
        problem: ValidatedProblem, blocks: dict[tuple[str, int], FourierCoeffs]
    ) -> "DensitySet":
        order = next(iter(blocks.values())).order if blocks else 0
        g, q, qk, gk = {}, {}, {}, {}
        for (kind, idx), coeffs in blocks.items():
            if kind == "g":
                g[problem.hole_ids[idx]] = coeffs
            elif kind == "q":
                q[problem.patch_ids[idx]] = coeffs
            elif kind == "qk":
                qk[problem.hole_ids[idx]] = coeffs
            elif kind == "gk":
                gk[problem.patch_ids[idx]] = coeffs
            else:
                raise ValueError(f"unknown block kind {kind!r}")
        return DensitySet(order=order, g=g, q=q, qk=qk, gk=gk)

    @staticmethod
    def zeros(problem: ValidatedProblem, order: int) -> "DensitySet":
        z = lambda: FourierCoeffs.zeros(order)  # noqa: E731
        return DensitySet(
            order=order,
            g={hid: z() for hid in problem.hole_ids},
            q={pid: z() for pid in problem.patch_ids},
            qk={
                problem.hole_ids[i]: z()
                for i, p in enumerate(problem.patch_of_hole)
                if p is not None
            },
            gk={pid: z() for pid in problem.patch_ids},
        )


@dataclass(frozen=True)
class StressSample:
    location: complex
    direction: complex
    region: str
    side: int
    value: complex  # sigma_n + i tau_n


@dataclass(frozen=True)
class StressTrace:
    contour_id: str
    region: str
    side: int
    theta: np.ndarray
    sigma_n: np.ndarray
    tau_n: np.ndarray

    @property
    def max_sigma(self) -> float:
        return float(np.abs(self.sigma_n).max())

    @property
    def max_tau(self) -> float:
        return float(np.abs(self.tau_n).max())

    @property
    def argmax_sigma(self) -> float:
        return float(self.theta[int(np.argmax(np.abs(self.sigma_n)))])

    @property
    def argmax_tau(self) -> float:
        return float(self.theta[int(np.argmax(np.abs(self.tau_n)))])


def stress_at(phi, dphi, psi, t, dt):
    """sigma_n + i tau_n on a line element with tangent direction dt."""
    w = np.conj(dt) / dt
    return phi + np.conj(phi) + w * (t * np.conj(dphi) + np.conj(psi))


def displacement_derivative(phi, dphi, psi, mu, kap, t, dt):
    """d(u+iv)/dt along direction dt."""
    w = np.conj(dt) / dt
    return (kap * phi - np.conj(phi) - w * (t * np.conj(dphi) + np.conj(psi))) / (
        2.0 * mu
    )


class _Density:
    """A series density on one contour: node samples plus exact derivatives."""

    def __init__(self, coeffs: FourierCoeffs, grid: SourceGrid):
        self.coeffs = coeffs
        self.d1 = differentiate_series(coeffs)
        self.d2 = differentiate_series(self.d1)
        self.samples = eval_series(coeffs, grid.theta)
        self.grid = grid
        self.tbar_samples = np.conj(grid.tau) * self.samples

    def at(self, theta):
        return (
            eval_series(self.coeffs, theta),
            eval_series(self.d1, theta),
            eval_series(self.d2, theta),
        )

    def tbar_at(self, theta):
        """Value and derivatives of conj(tau(theta)) * density."""
        p, dp, ddp = self.at(theta)
        tau = self.grid.contour.point(theta)
        d1, d2 = self.grid.contour.derivs(theta)
        val = np.conj(tau) * p
        dval = np.conj(d1) * p + np.conj(tau) * dp
        ddval = np.conj(d2) * p + 2.0 * np.conj(d1) * dp + np.conj(tau) * ddp
        return val, dval, ddval


class FieldEvaluator:
    """Evaluates potentials, stresses and residuals for one solved state."""

    def __init__(
        self,
        problem: ValidatedProblem,
        densities: DensitySet,
        quad_size: int | None = None,
    ):
        self.problem = problem
        self.densities = densities
        self.dc = derived_constants(problem)
        size = quad_size if quad_size is not None else default_quadrature_size(densities.order)
        self.hole_grid = [SourceGrid(h.contour, size) for h in problem.holes]
        self.patch_grid = [SourceGrid(p.contour, size) for p in problem.patches]

        self._g = [
            _Density(densities.g[hid], self.hole_grid[i])
            for i, hid in enumerate(problem.hole_ids)
        ]
        self._q = [
            _Density(densities.q[pid], self.patch_grid[k])
            for k, pid in enumerate(problem.patch_ids)
        ]
        self._qk = {
            i: _Density(densities.qk[problem.hole_ids[i]], self.hole_grid[i])
            for i, p in enumerate(problem.patch_of_hole)
            if p is not None
        }
        # patch-boundary layer densities of the patch potentials:
        # e_k feeds the Cauchy and second-order terms, f_k the conjugated one
        self._e = []
        self._f = []
        for k, pid in enumerate(problem.patch_ids):
            kk = self.dc.kappa_patch[k]
            dk = self.dc.d[k]
            gk = densities.gk[pid].values
            qv = densities.q[pid].values
            order = densities.order
            e = FourierCoeffs(order, gk + 2j / (dk * (kk + 1.0)) * qv)
            f = FourierCoeffs(order, gk - 2j * kk / (dk * (kk + 1.0)) * qv)
            self._e.append(_Density(e, self.patch_grid[k]))
            self._f.append(_Density(f, self.patch_grid[k]))

    # -- contour lookup ------------------------------------------------------

    def _find_contour(self, contour_id: str):
        if contour_id in self.problem.hole_ids:
            return "hole", self.problem.hole_index(contour_id)
        if contour_id in self.problem.patch_ids:
            return "patch", self.problem.patch_index(contour_id)
        raise FieldDomainError(f"unknown contour id {contour_id!r}")

    # -- plate fields ---------------------------------------------------------

    def _plate_far(self, z):
        dc = self.dc
        phi = np.full_like(z, dc.gamma, dtype=complex)
        dphi = np.zeros_like(z, dtype=complex)
        psi = np.full_like(z, dc.gamma_prime, dtype=complex)
        for i in range(len(self.problem.holes)):
            if self.problem.patch_of_hole[i] is not None:
                continue
            qk, zk = dc.q[i], dc.z_ref[i]
            phi = phi - qk / (z - zk)
            dphi = dphi + qk / (z - zk) ** 2
            psi = psi + dc.kappa_plate * np.conj(qk) / (z - zk)
        return phi, dphi, psi

    def _plate_fields(self, z=None, boundary=None):
        """(Phi, Phi', Psi) of the plate, off contours or as one-sided limits.

        ``boundary`` is (kind, index, theta, side) for a limit on one contour.
        """
        kp = self.dc.kappa_plate
        cq = 1.0 / ((kp + 1.0) * np.pi * 1j)
        if boundary is None:
            zz = np.atleast_1d(np.asarray(z, dtype=complex))
            tgt = None
        else:
            kind, idx, theta, side = boundary
            grid = (self.hole_grid if kind == "hole" else self.patch_grid)[idx]
            zz = np.atleast_1d(grid.contour.point(theta))
            tgt = (kind, idx, np.atleast_1d(theta), side)

        phi, dphi, psi = self._plate_far(zz)

        def cau(grid, dens, pref, key):
            nonlocal phi, dphi, psi
            if tgt is not None and key == tgt[:2]:
                th, side = tgt[2], tgt[3]
                p, dp, ddp = dens.at(th)
                tb, dtb, ddtb = dens.tbar_at(th)
                phi = phi + pref * cauchy_apply_boundary(grid, dens.samples, th, p, dp, side)
                dphi = dphi + pref * second_order_apply_boundary(
                    grid, dens.samples, th, p, dp, ddp, side
                )
                psi = psi + pref * (
                    conj_density_cauchy_apply_boundary(grid, dens.samples, th, p, dp, side)
                    * (kp if key[0] == "patch" else 1.0)
                    - second_order_apply_boundary(grid, dens.tbar_samples, th, tb, dtb, ddtb, side)
                )
            else:
                phi = phi + pref * cauchy_apply(grid, dens.samples, zz)
                dphi = dphi + pref * second_order_apply(grid, dens.samples, zz)
                psi = psi + pref * (
                    conj_density_cauchy_apply(grid, dens.samples, zz)
                    * (kp if key[0] == "patch" else 1.0)
                    - second_order_apply(grid, dens.tbar_samples, zz)
                )

        for i, grid in enumerate(self.hole_grid):
            cau(grid, self._g[i], 1.0 / (2.0 * np.pi), ("hole", i))
        for k, grid in enumerate(self.patch_grid):
            cau(grid, self._q[k], cq, ("patch", k))
        return phi, dphi, psi

    # -- patch fields ----------------------------------------------------------

    def _patch_fields(self, k: int, z=None, boundary=None):
        """(Phi_k, Phi_k', Psi_k) of patch k; ``boundary`` as in _plate_fields."""
        kk = self.dc.kappa_patch[k]
        cqk = 1.0 / ((kk + 1.0) * np.pi * 1j)
        if boundary is None:
            zz = np.atleast_1d(np.asarray(z, dtype=complex))
            tgt = None
        else:
            kind, idx, theta, side = boundary
            grid = (self.hole_grid if kind == "hole" else self.patch_grid)[idx]
            zz = np.atleast_1d(grid.contour.point(theta))
            tgt = (kind, idx, np.atleast_1d(theta), side)

        phi = np.zeros_like(zz, dtype=complex)
        dphi = np.zeros_like(zz, dtype=complex)
        psi = np.zeros_like(zz, dtype=complex)

        def add_layer(grid, cdens, fdens, pref, conj_weight, key):
            """Cauchy density cdens, conjugated-layer density fdens."""
            nonlocal phi, dphi, psi
            if tgt is not None and key == tgt[:2]:
                th, side = tgt[2], tgt[3]
                p, dp, ddp = cdens.at(th)
                tb, dtb, ddtb = cdens.tbar_at(th)
                fp, fdp, _ = fdens.at(th)
                phi = phi + pref * cauchy_apply_boundary(grid, cdens.samples, th, p, dp, side)
                dphi = dphi + pref * second_order_apply_boundary(
                    grid, cdens.samples, th, p, dp, ddp, side
                )
                psi = psi + pref * (
                    conj_weight
                    * conj_density_cauchy_apply_boundary(grid, fdens.samples, th, fp, fdp, side)
                    - second_order_apply_boundary(grid, cdens.tbar_samples, th, tb, dtb, ddtb, side)
                )
            else:
                phi = phi + pref * cauchy_apply(grid, cdens.samples, zz)
                dphi = dphi + pref * second_order_apply(grid, cdens.samples, zz)
                psi = psi + pref * (
                    conj_weight * conj_density_cauchy_apply(grid, fdens.samples, zz)
                    - second_order_apply(grid, cdens.tbar_samples, zz)
                )

        for b in self.problem.holes_of_patch[k]:
            add_layer(self.hole_grid[b], self._qk[b], self._qk[b], cqk, kk, ("hole", b))
        add_layer(
            self.patch_grid[k], self._e[k], self._f[k], 1.0 / (2.0 * np.pi), 1.0, ("patch", k)
        )
        return phi, dphi, psi

    # -- public evaluation ------------------------------------------------------

    def potentials_plate(self, z):
        """(Phi, Psi) at points strictly inside the plate."""
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        for grid in list(self.hole_grid) + list(self.patch_grid):
            if grid.min_distance(zz).min() < 1e-6:
                raise NearBoundaryError(
                    "evaluation point within 1e-6 of a contour; use boundary_stress"
                )
        for i, hole in enumerate(self.problem.holes):
            if any(hole.contour.winding_number(p) != 0 for p in zz):
                raise FieldDomainError(
                    f"point inside hole {self.problem.hole_ids[i]!r}; not a plate point"
                )
        phi, _, psi = self._plate_fields(z=zz)
        if np.isscalar(z):
            return complex(phi[0]), complex(psi[0])
        return phi, psi

    def potentials_patch(self, patch_id: str, z):
        """(Phi_k, Psi_k) at points strictly inside patch ``patch_id``."""
        k = self.problem.patch_index(patch_id)
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        contour = self.problem.patches[k].contour
        if any(contour.winding_number(p) != 1 for p in zz):
            raise FieldDomainError(f"point is not inside patch {patch_id!r}")
        phi, _, psi = self._patch_fields(k, z=zz)
        if np.isscalar(z):
            return complex(phi[0]), complex(psi[0])
        return phi, psi

    def plate_stress(self, z, direction):
        """Interior plate stress on an element with tangent ``direction``."""
        zz = np.atleast_1d(np.asarray(z, dtype=complex))
        phi, dphi, psi = self._plate_fields(z=zz)
        return stress_at(phi, dphi, psi, zz, direction)

    def _resolve_region(self, contour_id: str, region: str, side: int):
        kind, idx = self._find_contour(contour_id)
        if region == "plate":
            if kind == "hole" and side != PLUS:
                raise FieldDomainError(
                    "the plate exists only on the plus side of a hole boundary"
                )
            return kind, idx, None
        if region != "patch":
            raise FieldDomainError(f"unknown region {region!r}")
        if kind == "patch":
            return kind, idx, idx
        patch = self.problem.patch_of_hole[idx]
        if patch is None:
            raise FieldDomainError(
                f"hole {contour_id!r} is free; it has no patch side"
            )
        return kind, idx, patch

    def boundary_fields(self, contour_id: str, theta, region: str, side):
        side = _SIDES[side]
        kind, idx, patch = self._resolve_region(contour_id, region, side)
        boundary = (kind, idx, np.atleast_1d(theta), side)
        if region == "plate":
            return self._plate_fields(boundary=boundary)
        return self._patch_fields(patch, boundary=boundary)

    def boundary_stress(
        self, contour_id: str, theta, region: str, side, direction: str = "tangent"
    ):
        """One-sided limit of sigma_n + i tau_n along a contour.

        ``direction="tangent"`` gives the traction transmitted across the
        contour; ``direction="normal"`` rotates the element by 90 degrees so
        sigma_n becomes the hoop (tangential normal) stress.
        """
        side = _SIDES[side]
        kind, idx, _ = self._resolve_region(contour_id, region, side)
        contour = (self.problem.holes[idx].contour if kind == "hole"
                   else self.problem.patches[idx].contour)
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        phi, dphi, psi = self.boundary_fields(contour_id, th, region, side)
        t = contour.point(th)
        d1, _ = contour.derivs(th)
        dt = d1 if direction == "tangent" else 1j * d1
        return stress_at(phi, dphi, psi, t, dt)

    def boundary_displacement_derivative(self, contour_id: str, theta, region: str, side):
        """One-sided limit of d(u+iv)/dt along the contour tangent."""
        side = _SIDES[side]
        kind, idx, patch = self._resolve_region(contour_id, region, side)
        contour = (self.problem.holes[idx].contour if kind == "hole"
                   else self.problem.patches[idx].contour)
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        phi, dphi, psi = self.boundary_fields(contour_id, th, region, side)
        t = contour.point(th)
        d1, _ = contour.derivs(th)
        if region == "plate":
            mu, kap = self.problem.plate.shear_modulus, self.dc.kappa_plate
        else:
            mu = self.problem.patches[patch].material.shear_modulus
            kap = self.dc.kappa_patch[patch]
        return displacement_derivative(phi, dphi, psi, mu, kap, t, d1)

    def sample(self, contour_id, theta, region, side, direction="tangent") -> StressSample:
        kind, idx = self._find_contour(contour_id)
        contour = (self.problem.holes[idx].contour if kind == "hole"
                   else self.problem.patches[idx].contour)
        value = self.boundary_stress(contour_id, theta, region, side, direction)
        d1, _ = contour.derivs(theta)
        dt = d1 if direction == "tangent" else 1j * d1
        return StressSample(
            location=complex(contour.point(theta)),
            direction=complex(dt / abs(dt)),
            region=region,
            side=_SIDES[side],
            value=complex(value[0]),
        )

    def trace(
        self,
        contour_id: str,
        region: str = "plate",
        side=PLUS,
        resolution: int = 256,
        direction: str = "tangent",
    ) -> StressTrace:
        th = np.linspace(0.0, 2.0 * np.pi, resolution, endpoint=False)
        vals = self.boundary_stress(contour_id, th, region, side, direction)
        return StressTrace(
            contour_id=contour_id,
            region=region,
            side=_SIDES[side],
            theta=th,
            sigma_n=vals.real,
            tau_n=vals.imag,
        )

    # -- invariants and residuals -------------------------------------------

    def density_moments(self) -> dict[str, dict[str, float]]:
        """|contour integral g' dtau| per free hole, |integral q dtau| per patch."""
        order = self.densities.order
        single = {}
        for i, hid in enumerate(self.problem.hole_ids):
            if self.problem.patch_of_hole[i] is not None:
                continue
            mom = moments(self.hole_grid[i], order)
            single[hid] = float(abs(mom @ self.densities.g[hid].values))
        resultant = {}
        for k, pid in enumerate(self.problem.patch_ids):
            mom = moments(self.patch_grid[k], order)
            resultant[pid] = float(abs(mom @ self.densities.q[pid].values))
        return {"single_valuedness": single, "zero_resultant": resultant}

    def bc_residuals(self, probes: int | None = None) -> dict[tuple[str, str], float]:
        """Max mismatch of every junction/load condition at inter-node probes.

        Displacement conditions are compared at the level of tangential
        derivatives d(u+iv)/dt, which determine the displacements up to the
        per-contour constants absorbed by the integral representations.
        """
        n = probes if probes is not None else max(64, 2 * (2 * self.densities.order + 1))
        # collocation nodes sit at half-integer multiples of 2*pi/(2N+1); the
        # integer grid samples between them (and densely enough to see the
        # residual of an under-resolved solve)
        th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        h = self.problem.plate.thickness
        out: dict[tuple[str, str], float] = {}

        for i, hid in enumerate(self.problem.hole_ids):
            p = self.problem.patch_of_hole[i]
            if p is None:
                trac = self.boundary_stress(hid, th, "plate", PLUS)
                load = self.problem.holes[i].load.eval(th)
                out[("load_match", hid)] = float(np.abs(trac - load).max())
                continue
            hk = self.problem.patches[p].material.thickness
            du_plate = self.boundary_displacement_derivative(hid, th, "plate", PLUS)
            du_pp = self.boundary_displacement_derivative(hid, th, "patch", PLUS)
            du_pm = self.boundary_displacement_derivative(hid, th, "patch", MINUS)
            out[("displacement_plate_patch", hid)] = float(np.abs(du_plate - du_pp).max())
            out[("displacement_patch_jump", hid)] = float(np.abs(du_pp - du_pm).max())
            t_plate = self.boundary_stress(hid, th, "plate", PLUS)
            t_pp = self.boundary_stress(hid, th, "patch", PLUS)
            t_pm = self.boundary_stress(hid, th, "patch", MINUS)
            out[("traction_balance", hid)] = float(
                np.abs(h * t_plate + hk * t_pp - hk * t_pm).max()
            )

        for k, pid in enumerate(self.problem.patch_ids):
            hk = self.problem.patches[k].material.thickness
            du_pl_p = self.boundary_displacement_derivative(pid, th, "plate", PLUS)
            du_pl_m = self.boundary_displacement_derivative(pid, th, "plate", MINUS)
            du_pa = self.boundary_displacement_derivative(pid, th, "patch", PLUS)
            out[("displacement_plate_jump", pid)] = float(np.abs(du_pl_p - du_pl_m).max())
            out[("displacement_plate_patch", pid)] = float(np.abs(du_pl_p - du_pa).max())
            t_pl_p = self.boundary_stress(pid, th, "plate", PLUS)
            t_pl_m = self.boundary_stress(pid, th, "plate", MINUS)
            t_pa = self.boundary_stress(pid, th, "patch", PLUS)
            out[("traction_balance", pid)] = float(
                np.abs(h * t_pl_p + hk * t_pa - h * t_pl_m).max()
            )
        return out
