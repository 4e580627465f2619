"""Smooth closed contours with analytic Fourier parametrizations.

Every supported curve is stored as a finite complex Fourier series

    tau(theta) = sum_k c_k * exp(i k theta),       theta in [0, 2*pi),

so positions and the first two derivatives are exact, and reversing the
orientation is just a flip of the harmonic index.  Circles and squares with
rounded corners are special cases with one and two shape harmonics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GeometryError",
    "Contour",
    "TangentFactors",
    "circle",
    "rounded_square",
    "fourier_curve",
    "min_separation",
]

_DEGENERATE_SPEED = 1e-12
_DEGENERATE_AREA = 1e-12
_WINDING_CLEARANCE = 1e-9


class GeometryError(ValueError):
    """Degenerate or otherwise unusable contour data."""


@dataclass(frozen=True)
class TangentFactors:
    """Unit-modulus tangent ratios used by the layer kernels.

    dtbar_dt = conj(tau') / tau'   and   absdt_dt = |tau'| / tau'.
    """

    dtbar_dt: complex
    absdt_dt: complex


@dataclass(frozen=True)
class Contour:
    """A closed curve tau(theta) = sum_k c_k e^{ik theta}.

    ``kind`` records which constructor produced the curve ("circle",
    "rounded_square" or "fourier") and ``params`` its original arguments,
    so parametric sweeps can rebuild a modified copy via :meth:`with_params`.
    """

    kind: str
    params: tuple[tuple[str, object], ...]
    harmonics: tuple[int, ...]
    amplitudes: tuple[complex, ...]

    # -- evaluation ---------------------------------------------------------

    def point(self, theta):
        """Position tau(theta); accepts scalars or arrays."""
        th = np.asarray(theta, dtype=float)
        ks = np.asarray(self.harmonics)
        cs = np.asarray(self.amplitudes)
        vals = (cs * np.exp(1j * np.multiply.outer(th, ks))).sum(axis=-1)
        return complex(vals) if np.isscalar(theta) else vals

    def derivs(self, theta):
        """Exact first and second derivatives (tau', tau'') w.r.t. theta."""
        th = np.asarray(theta, dtype=float)
        ks = np.asarray(self.harmonics)
        cs = np.asarray(self.amplitudes)
        phase = np.exp(1j * np.multiply.outer(th, ks))
        d1 = (1j * ks * cs * phase).sum(axis=-1)
        d2 = (-(ks**2) * cs * phase).sum(axis=-1)
        if np.isscalar(theta):
            return complex(d1), complex(d2)
        return d1, d2

    def tangent_factors(self, theta) -> TangentFactors:
        """conj(tau')/tau' and |tau'|/tau' at ``theta`` (both unit modulus)."""
        d1, _ = self.derivs(theta)
        speed = np.abs(d1)
        if np.any(speed < _DEGENERATE_SPEED):
            raise GeometryError("contour parametrization is degenerate: |tau'| ~ 0")
        return TangentFactors(dtbar_dt=np.conj(d1) / d1, absdt_dt=speed / d1)

    # -- global properties --------------------------------------------------

    def signed_area(self, samples: int = 1024) -> float:
        """(1/2) * contour integral of Im(conj(tau) dtau), by trapezoid rule."""
        th = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
        tau = self.point(th)
        d1, _ = self.derivs(th)
        return float(0.5 * np.mean(np.imag(np.conj(tau) * d1)) * 2.0 * np.pi)

    def orientation_sign(self) -> int:
        """+1 for a counterclockwise parametrization, -1 for clockwise."""
        area = self.signed_area()
        if abs(area) < _DEGENERATE_AREA:
            raise GeometryError("contour encloses no area; cannot orient it")
        return 1 if area > 0 else -1

    def reversed(self) -> "Contour":
        """Same point set traversed the opposite way (theta -> 2*pi - theta)."""
        flag = ("reversed", True)
        params = tuple(p for p in self.params if p != flag)
        if flag not in self.params:
            params = params + (flag,)
        return Contour(
            kind=self.kind,
            params=params,
            harmonics=tuple(-k for k in self.harmonics),
            amplitudes=self.amplitudes,
        )

    def winding_number(self, z: complex, samples: int = 1024) -> int:
        """Winding of the curve about ``z``: (1/2*pi*i) * integral dtau/(tau-z)."""
        th = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
        tau = self.point(th)
        dist = np.abs(tau - z)
        if dist.min() < _WINDING_CLEARANCE:
            raise GeometryError(f"point {z} lies on the contour; winding is ambiguous")
        d1, _ = self.derivs(th)
        val = np.mean(d1 / (tau - z)) * 2.0 * np.pi / (2.0j * np.pi)
        # a point on or extremely near the curve between samples shows up as a
        # far-from-integer quadrature value
        if abs(val.real - np.rint(val.real)) > 0.25 or abs(val.imag) > 0.25:
            raise GeometryError(
                f"point {z} is too close to the contour; winding is ambiguous"
            )
        return int(np.rint(val.real))

    def centroid(self, samples: int = 512) -> complex:
        """Mean of tau(theta) over the parameter; a convenient interior point."""
        th = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
        return complex(np.mean(self.point(th)))

    def max_harmonic(self) -> int:
        return max(abs(k) for k in self.harmonics)

    def with_params(self, **updates) -> "Contour":
        """Rebuild the contour through its constructor with modified arguments."""
        if self.kind not in ("circle", "rounded_square"):
            raise GeometryError(f"cannot rebuild a {self.kind!r} contour from parameters")
        params = dict(self.params)
        rev = bool(params.pop("reversed", False))
        params.update(updates)
        built = _CONSTRUCTORS[self.kind](**params)
        return built.reversed() if rev else built


def _check_simple(contour: Contour, samples: int = 512) -> Contour:
    th = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    d1, _ = contour.derivs(th)
    if np.abs(d1).min() < 1e-9:
        raise GeometryError("parametrization speed |tau'| vanishes; curve is not smooth")
    return contour


def circle(center: complex, radius: float) -> Contour:
    """Counterclockwise circle center + radius * e^{i theta}."""
    if radius <= 0:
        raise GeometryError(f"circle radius must be positive, got {radius}")
    return _check_simple(
        Contour(
            kind="circle",
            params=(("center", complex(center)), ("radius", float(radius))),
            harmonics=(0, 1),
            amplitudes=(complex(center), complex(radius)),
        )
    )


def rounded_square(
    center: complex, scale: float, corner_divisor: float, rotation: float = 0.0
) -> Contour:
    """Square with rounded corners: center + scale*e^{i rot}(e^{i th} + e^{-3i th}/s).

    ``corner_divisor`` s controls how sharp the corners are (larger s means
    rounder); s must exceed 3 for the curve to stay simple.  ``rotation``
    turns the shape about its own center, not the center point.
    """
    if scale <= 0:
        raise GeometryError(f"rounded square scale must be positive, got {scale}")
    if corner_divisor <= 3:
        raise GeometryError("corner divisor must exceed 3 for a simple smooth curve")
    shape = complex(scale) * np.exp(1j * rotation)
    return _check_simple(
        Contour(
            kind="rounded_square",
            params=(
                ("center", complex(center)),
                ("scale", float(scale)),
                ("corner_divisor", float(corner_divisor)),
                ("rotation", float(rotation)),
            ),
            harmonics=(-3, 0, 1),
            amplitudes=(shape / corner_divisor, complex(center), shape),
        )
    )


def fourier_curve(coeffs: dict[int, complex]) -> Contour:
    """Arbitrary finite Fourier parametrization {harmonic: amplitude}."""
    items = tuple(sorted((int(k), complex(c)) for k, c in coeffs.items()))
    if not any(k != 0 and c != 0 for k, c in items):
        raise GeometryError("fourier curve needs at least one nonzero moving harmonic")
    return _check_simple(
        Contour(
            kind="fourier",
            params=(("coeffs", items),),
            harmonics=tuple(k for k, _ in items),
            amplitudes=tuple(c for _, c in items),
        )
    )


_CONSTRUCTORS = {"circle": circle, "rounded_square": rounded_square}


def min_separation(c1: Contour, c2: Contour, samples: int = 512) -> float:
    """Smallest pairwise distance over dense sample grids (validation guard)."""
    th = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    p1 = c1.point(th)
    p2 = c2.point(th)
    diff = np.abs(p1[:, None] - p2[None, :])
    return float(diff.min())
