"""Layer integrals of Cauchy type over closed contours.

All integrals are parametrized over theta' in [0, 2*pi) and computed with the
periodic trapezoid rule on a uniform grid, which is spectrally accurate for
analytic curves and densities.  Singular targets are handled by subtracting
the density value (and for second-order kernels also its first Taylor term)
at the target, integrating the now-smooth remainder, and adding the singular
part back in closed form:

* principal value of dtau/(tau - t) over a closed curve equals sigma*pi*i,
  where sigma is the orientation sign (+1 counterclockwise);
* one-sided limits (Sokhotski-Plemelj) add +/- pi*i times the density, the
  plus sign for the limit from the left of the direction of travel;
* the conjugated kernel dtau/(conj tau - conj t) obeys the conjugate rules
  with the effective density chi = psi * tau' / conj(tau');
* the finite part of dtau/(tau - t)^2 over a closed curve is zero, and the
  one-sided limits of integral psi dtau/(tau - z)^2 differ from the smooth
  remainder by (sigma +/- 1)*pi*i times dpsi/dtau at the target.

When a quadrature node lands exactly on the target, the removable-singularity
value of the subtracted integrand is substituted analytically; this keeps the
trapezoid rule spectrally accurate with no special grids.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import Contour

__all__ = [
    "KernelId",
    "OffContour",
    "OnContourPV",
    "Limit",
    "NearBoundaryError",
    "SourceGrid",
    "default_quadrature_size",
    "smooth_pair_diagonal",
    "layer_integral",
    "moments",
    "cauchy_block",
    "cauchy_block_boundary",
    "cauchy_conj_block",
    "cauchy_conj_block_boundary",
    "smooth_pair_block",
    "smooth_pair_block_boundary",
    "cauchy_apply",
    "cauchy_apply_boundary",
    "conj_density_cauchy_apply",
    "conj_density_cauchy_apply_boundary",
    "second_order_apply",
    "second_order_apply_boundary",
]

_DIAG_TOL = 1e-9
_NEAR_BOUNDARY = 1e-6


class NearBoundaryError(ValueError):
    """Off-contour evaluation requested too close to the source curve."""


class KernelId(Enum):
    CAUCHY = "cauchy"  # 1/(tau - t) acting on psi dtau
    CAUCHY_CONJ = "cauchy_conj"  # 1/(conj tau - conj t) acting on psi dtau
    SMOOTH_PAIR = "smooth_pair"  # -1/(conj diff) + (tau-t)*w/(conj diff)^2 on conj(psi dtau)
    SECOND_ORDER = "second_order"  # 1/(tau - z)^2 acting on psi dtau
    SECOND_ORDER_TBAR = "second_order_tbar"  # 1/(tau - z)^2 acting on conj(tau) psi dtau


@dataclass(frozen=True)
class OffContour:
    z: complex


@dataclass(frozen=True)
class OnContourPV:
    theta: float


@dataclass(frozen=True)
class Limit:
    theta: float
    side: int  # +1 = left of the direction of travel, -1 = right


def default_quadrature_size(order: int) -> int:
    """Shared uniform grid size for a truncation order N."""
    return max(256, 8 * (2 * order + 1))


class SourceGrid:
    """Cached quadrature data for one contour: nodes, tau, tau', tau''."""

    def __init__(self, contour: Contour, size: int):
        if size < 16:
            raise ValueError(f"quadrature grid too small: {size}")
        self.contour = contour
        self.size = size
        self.theta = 2.0 * np.pi * np.arange(size) / size
        self.tau = contour.point(self.theta)
        self.dtau, self.ddtau = contour.derivs(self.theta)
        self.h = 2.0 * np.pi / size
        self.sigma = contour.orientation_sign()
        self._basis: dict[int, np.ndarray] = {}

    def basis(self, order: int) -> np.ndarray:
        """exp(i m theta_j) for m = -N..N, shape (size, 2N+1)."""
        if order not in self._basis:
            ms = np.arange(-order, order + 1)
            self._basis[order] = np.exp(1j * np.multiply.outer(self.theta, ms))
        return self._basis[order]

    def min_distance(self, z) -> np.ndarray:
        return np.abs(self.tau[None, :] - np.atleast_1d(z)[:, None]).min(axis=1)


def _wrap_angle(delta: np.ndarray) -> np.ndarray:
    return (delta + np.pi) % (2.0 * np.pi) - np.pi


def _diag_mask(src: SourceGrid, theta_t: np.ndarray) -> np.ndarray:
    """Boolean (targets, nodes): quadrature node coincides with the target."""
    delta = _wrap_angle(src.theta[None, :] - np.atleast_1d(theta_t)[:, None])
    return np.abs(delta) < _DIAG_TOL


def _guard_off_contour(src: SourceGrid, z: np.ndarray):
    close = src.min_distance(z)
    if np.any(close < _NEAR_BOUNDARY):
        raise NearBoundaryError(
            "target within {:g} of the source contour; use a boundary limit".format(
                _NEAR_BOUNDARY
            )
        )


def smooth_pair_diagonal(contour: Contour, theta) -> complex | np.ndarray:
    """Coincidence limit of -1/(conj diff) + (tau-t)*w/(conj diff)^2.

    Two-term Taylor expansion gives
    (tau'' conj(tau') - conj(tau'') tau') / (2 conj(tau')^2 tau').
    """
    d1, d2 = contour.derivs(theta)
    if np.any(np.abs(np.atleast_1d(d1)) < 1e-12):
        raise ValueError("degenerate parametrization: |tau'| ~ 0")
    return (d2 * np.conj(d1) - np.conj(d2) * d1) / (2.0 * np.conj(d1) ** 2 * d1)


# ---------------------------------------------------------------------------
# Harmonic blocks: value of the integral for density e^{i m theta'},
# m = -N..N, returned as (n_targets, 2N+1) complex arrays.
# ---------------------------------------------------------------------------


def cauchy_block(src: SourceGrid, order: int, targets) -> np.ndarray:
    """integral e^{im th'} dtau / (tau - z) for off-contour targets."""
    z = np.atleast_1d(np.asarray(targets, dtype=complex))
    _guard_off_contour(src, z)
    g = src.h * src.dtau[None, :] / (src.tau[None, :] - z[:, None])
    return g @ src.basis(order)


def cauchy_block_boundary(
    src: SourceGrid, order: int, theta_t, side: int = 0
) -> np.ndarray:
    """Principal value (side=0) or one-sided limit (side=+/-1) on the source."""
    th = np.atleast_1d(np.asarray(theta_t, dtype=float))
    t = src.contour.point(th)
    mask = _diag_mask(src, th)
    denom = src.tau[None, :] - t[:, None]
    denom = np.where(mask, 1.0, denom)
    g = src.h * src.dtau[None, :] / denom
    g = np.where(mask, 0.0, g)

    ms = np.arange(-order, order + 1)
    e_t = np.exp(1j * np.multiply.outer(th, ms))
    block = g @ src.basis(order) - g.sum(axis=1)[:, None] * e_t
    # removable singularity of (psi - psi_t) tau' / (tau - t): limit i m e^{im th}
    hit = mask.any(axis=1).astype(float)
    block += (src.h * hit)[:, None] * (1j * ms)[None, :] * e_t
    const = src.sigma * np.pi * 1j + side * np.pi * 1j
    return block + const * e_t


def cauchy_conj_block(src: SourceGrid, order: int, targets) -> np.ndarray:
    """integral e^{im th'} dtau / (conj tau - conj z), off-contour targets."""
    z = np.atleast_1d(np.asarray(targets, dtype=complex))
    _guard_off_contour(src, z)
    g = src.h * src.dtau[None, :] / (np.conj(src.tau)[None, :] - np.conj(z)[:, None])
    return g @ src.basis(order)


def cauchy_conj_block_boundary(
    src: SourceGrid, order: int, theta_t, side: int = 0
) -> np.ndarray:
    """PV / limits of the conjugated-difference kernel on the source contour.

    Effective density w.r.t. d(conj tau) is chi = psi tau'/conj(tau'); the
    principal value constant is -sigma*pi*i*chi and the one-sided limits
    subtract a further side*pi*i*chi.
    """
    th = np.atleast_1d(np.asarray(theta_t, dtype=float))
    t = src.contour.point(th)
    d1t, d2t = src.contour.derivs(th)
    chifac = d1t / np.conj(d1t)

    mask = _diag_mask(src, th)
    cden = np.conj(src.tau)[None, :] - np.conj(t)[:, None]
    cden = np.where(mask, 1.0, cden)
    g = src.h * src.dtau[None, :] / cden
    g = np.where(mask, 0.0, g)
    r = src.h * np.conj(src.dtau)[None, :] / cden
    r = np.where(mask, 0.0, r)

    ms = np.arange(-order, order + 1)
    e_t = np.exp(1j * np.multiply.outer(th, ms))
    block = g @ src.basis(order) - (r.sum(axis=1) * chifac)[:, None] * e_t
    # diagonal limit of [psi tau' - chi_t conj(tau')] / (conj tau - conj t)
    hit = mask.any(axis=1).astype(float)
    fill = (
        (1j * ms)[None, :] * d1t[:, None]
        + d2t[:, None]
        - (chifac * np.conj(d2t))[:, None]
    ) / np.conj(d1t)[:, None]
    block += (src.h * hit)[:, None] * fill * e_t
    const = (-src.sigma * np.pi * 1j - side * np.pi * 1j) * chifac
    return block + const[:, None] * e_t


def _smooth_pair_kernel(src: SourceGrid, t, w_t) -> np.ndarray:
    diff = src.tau[None, :] - np.atleast_1d(t)[:, None]
    cdiff = np.conj(diff)
    return -1.0 / cdiff + diff * np.atleast_1d(w_t)[:, None] / cdiff**2


def smooth_pair_block(src: SourceGrid, order: int, targets, w_t) -> np.ndarray:
    """Smooth kernel pair acting on conj(e^{im th'} dtau), targets off source.

    ``w_t`` is conj(dt)/dt of the receiving contour at each target.  The
    returned block multiplies the conjugate of coefficient m.
    """
    z = np.atleast_1d(np.asarray(targets, dtype=complex))
    _guard_off_contour(src, z)
    k = _smooth_pair_kernel(src, z, w_t) * np.conj(src.dtau)[None, :] * src.h
    return k @ np.conj(src.basis(order))


def smooth_pair_block_boundary(src: SourceGrid, order: int, theta_t) -> np.ndarray:
    """Smooth pair on its own contour; the diagonal uses the Taylor limit."""
    th = np.atleast_1d(np.asarray(theta_t, dtype=float))
    t = src.contour.point(th)
    d1t, _ = src.contour.derivs(th)
    w_t = np.conj(d1t) / d1t
    mask = _diag_mask(src, th)
    diff = src.tau[None, :] - t[:, None]
    diff = np.where(mask, 1.0, diff)
    cdiff = np.conj(diff)
    kern = -1.0 / cdiff + (diff * w_t[:, None]) / cdiff**2
    kern = np.where(mask, 0.0, kern)
    kern = kern * np.conj(src.dtau)[None, :] * src.h
    diag = smooth_pair_diagonal(src.contour, th) * np.conj(d1t)
    kern += mask * (src.h * diag)[:, None]
    return kern @ np.conj(src.basis(order))


def moments(src: SourceGrid, order: int) -> np.ndarray:
    """Whole-contour moments integral e^{im th'} dtau, m = -N..N."""
    return src.h * (src.dtau @ src.basis(order))


# ---------------------------------------------------------------------------
# Sampled-density evaluation (used for the solved fields).  ``psi`` holds the
# density at the quadrature nodes; target values and derivatives are passed
# explicitly so series densities stay exact.
# ---------------------------------------------------------------------------


def cauchy_apply(src: SourceGrid, psi, z, *, guard: bool = True) -> np.ndarray:
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if guard:
        _guard_off_contour(src, zz)
    g = src.h * (psi * src.dtau)[None, :] / (src.tau[None, :] - zz[:, None])
    return g.sum(axis=1)


def cauchy_apply_boundary(
    src: SourceGrid, psi, theta_t, psi_t, dpsi_t, side: int = 0
) -> np.ndarray:
    th = np.atleast_1d(np.asarray(theta_t, dtype=float))
    t = src.contour.point(th)
    psi_t = np.atleast_1d(np.asarray(psi_t, dtype=complex))
    dpsi_t = np.atleast_1d(np.asarray(dpsi_t, dtype=complex))
    mask = _diag_mask(src, th)
    denom = np.where(mask, 1.0, src.tau[None, :] - t[:, None])
    integ = (psi[None, :] - psi_t[:, None]) * src.dtau[None, :] / denom
    integ = np.where(mask, 0.0, integ)
    val = src.h * integ.sum(axis=1)
    val += src.h * mask.any(axis=1) * dpsi_t
    return val + (src.sigma + side) * np.pi * 1j * psi_t


def conj_density_cauchy_apply(src: SourceGrid, psi, z, *, guard: bool = True) -> np.ndarray:
    """integral conj(psi dtau) / (tau - z)."""
    return cauchy_apply(src, np.conj(psi * src.dtau) / src.dtau, z, guard=guard)


def conj_density_cauchy_apply_boundary(
    src: SourceGrid, psi, theta_t, psi_t, dpsi_t, side: int = 0
) -> np.ndarray:
    """Boundary values of integral conj(psi dtau) / (tau - z).

    Rewritten as a plain Cauchy integral with density conj(psi tau')/tau',
    whose target value and theta-derivative follow by the quotient rule.
    """
    th = np.atleast_1d(np.asarray(theta_t, dtype=float))
    d1t, d2t = src.contour.derivs(th)
    rho = np.conj(psi * src.dtau) / src.dtau
    rho_t = np.conj(psi_t * d1t) / d1t
    drho_t = (np.conj(dpsi_t * d1t + psi_t * d2t) * d1t - np.conj(psi_t * d1t) * d2t) / d1t**2
    return cauchy_apply_boundary(src, rho, th, rho_t, drho_t, side)


def second_order_apply(src: SourceGrid, psi, z, *, guard: bool = True) -> np.ndarray:
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if guard:
        _guard_off_contour(src, zz)
    g = src.h * (psi * src.dtau)[None, :] / (src.tau[None, :] - zz[:, None]) ** 2
    return g.sum(axis=1)


def second_order_apply_boundary(
    src: SourceGrid, psi, theta_t, psi_t, dpsi_t, ddpsi_t, side: int = 0
) -> np.ndarray:
    """Finite part (side=0) or one-sided limits of integral psi dtau/(tau-z)^2.

    Subtracts psi_t + (dpsi_t/tau'_t)(tau - t); the remainder has a removable
    double zero over the double pole.  The subtracted part contributes
    (sigma + side)*pi*i * dpsi_t/tau'_t, since the closed-contour finite part
    of dtau/(tau-t)^2 vanishes.
    """
    th = np.atleast_1d(np.asarray(theta_t, dtype=float))
    t = src.contour.point(th)
    d1t, d2t = src.contour.derivs(th)
    psi_t = np.atleast_1d(np.asarray(psi_t, dtype=complex))
    dpsi_t = np.atleast_1d(np.asarray(dpsi_t, dtype=complex))
    ddpsi_t = np.atleast_1d(np.asarray(ddpsi_t, dtype=complex))
    slope = dpsi_t / d1t

    mask = _diag_mask(src, th)
    diff = src.tau[None, :] - t[:, None]
    diff = np.where(mask, 1.0, diff)
    rem = psi[None, :] - psi_t[:, None] - slope[:, None] * diff
    rem = np.where(mask, 0.0, rem)
    integ = rem * src.dtau[None, :] / diff**2
    val = src.h * integ.sum(axis=1)
    fill = (ddpsi_t - slope * d2t) / (2.0 * d1t)
    val += src.h * mask.any(axis=1) * fill
    return val + (src.sigma + side) * np.pi * 1j * slope


# ---------------------------------------------------------------------------
# Single-harmonic interface.
# ---------------------------------------------------------------------------


def layer_integral(
    source: Contour,
    m: int,
    kernel: KernelId,
    target,
    size: int | None = None,
    *,
    target_tangent: complex | None = None,
) -> complex:
    """One layer integral of the basis density e^{i m theta'} on ``source``.

    ``target`` is OffContour(z), OnContourPV(theta) or Limit(theta, side);
    on-contour targets refer to the source parametrization.  For the smooth
    pair at an off-contour target, ``target_tangent`` must supply dt of the
    receiving curve.
    """
    if size is None:
        size = max(default_quadrature_size(abs(m)), 4 * (2 * abs(m) + 1))
    if size < 4 * (2 * abs(m) + 1):
        raise ValueError(f"need at least {4 * (2 * abs(m) + 1)} nodes for harmonic {m}")
    src = SourceGrid(source, size)
    order = abs(m)
    col = m + order

    if isinstance(target, OffContour):
        z = np.array([target.z])
        if kernel is KernelId.CAUCHY:
            return complex(cauchy_block(src, order, z)[0, col])
        if kernel is KernelId.CAUCHY_CONJ:
            return complex(cauchy_conj_block(src, order, z)[0, col])
        if kernel is KernelId.SMOOTH_PAIR:
            if target_tangent is None:
                raise ValueError("smooth pair off contour needs target_tangent")
            w = np.conj(target_tangent) / target_tangent
            return complex(smooth_pair_block(src, order, z, w)[0, col])
        if kernel is KernelId.SECOND_ORDER:
            psi = np.exp(1j * m * src.theta)
            return complex(second_order_apply(src, psi, z)[0])
        if kernel is KernelId.SECOND_ORDER_TBAR:
            psi = np.conj(src.tau) * np.exp(1j * m * src.theta)
            return complex(second_order_apply(src, psi, z)[0])
        raise ValueError(f"unsupported kernel {kernel}")

    if isinstance(target, OnContourPV):
        theta, side = target.theta, 0
    elif isinstance(target, Limit):
        theta, side = target.theta, target.side
        if side not in (-1, 1):
            raise ValueError("limit side must be +1 (left) or -1 (right)")
    else:
        raise TypeError(f"unsupported target {target!r}")

    th = np.array([theta])
    if kernel is KernelId.CAUCHY:
        return complex(cauchy_block_boundary(src, order, th, side)[0, col])
    if kernel is KernelId.CAUCHY_CONJ:
        return complex(cauchy_conj_block_boundary(src, order, th, side)[0, col])
    if kernel is KernelId.SMOOTH_PAIR:
        return complex(smooth_pair_block_boundary(src, order, th)[0, col])

    e = np.exp(1j * m * src.theta)
    e_t = np.exp(1j * m * theta)
    tau_t = source.point(theta)
    d1t, d2t = source.derivs(theta)
    if kernel is KernelId.SECOND_ORDER:
        return complex(
            second_order_apply_boundary(
                src, e, th, e_t, 1j * m * e_t, -(m**2) * e_t, side
            )[0]
        )
    if kernel is KernelId.SECOND_ORDER_TBAR:
        psi = np.conj(src.tau) * e
        psi_t = np.conj(tau_t) * e_t
        dpsi_t = (np.conj(d1t) + 1j * m * np.conj(tau_t)) * e_t
        ddpsi_t = (
            np.conj(d2t) + 2j * m * np.conj(d1t) - m**2 * np.conj(tau_t)
        ) * e_t
        return complex(
            second_order_apply_boundary(src, psi, th, psi_t, dpsi_t, ddpsi_t, side)[0]
        )
    raise ValueError(f"unsupported kernel {kernel}")
