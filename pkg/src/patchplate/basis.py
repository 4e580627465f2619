"""Truncated complex Fourier series on [0, 2*pi) and the collocation grid.

Densities are represented by 2N+1 coefficients for harmonics m = -N..N.
The transform between coefficient space and samples on the collocation grid
is the plain O(N^2) discrete sum; system sizes stay small enough that a fast
transform would be pointless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FourierCoeffs",
    "collocation_nodes",
    "eval_series",
    "differentiate_series",
    "samples_to_coeffs",
]


@dataclass(frozen=True)
class FourierCoeffs:
    """Coefficients c_m, m = -N..N, stored contiguously (index m + N)."""

    order: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (2 * self.order + 1,):
            raise ValueError(
                f"need {2 * self.order + 1} coefficients for order {self.order}, "
                f"got shape {vals.shape}"
            )
        object.__setattr__(self, "values", vals)

    @property
    def harmonics(self) -> np.ndarray:
        return np.arange(-self.order, self.order + 1)

    def __getitem__(self, m: int) -> complex:
        if abs(m) > self.order:
            return 0.0 + 0.0j
        return complex(self.values[m + self.order])

    @staticmethod
    def zeros(order: int) -> "FourierCoeffs":
        return FourierCoeffs(order, np.zeros(2 * order + 1, dtype=complex))

    @staticmethod
    def single(order: int, m: int, value: complex = 1.0) -> "FourierCoeffs":
        vals = np.zeros(2 * order + 1, dtype=complex)
        vals[m + order] = value
        return FourierCoeffs(order, vals)


def collocation_nodes(order: int) -> np.ndarray:
    """Nodes theta_s = pi (2s - 1) / (2N + 1), s = 1..2N+1."""
    s = np.arange(1, 2 * order + 2)
    return np.pi * (2 * s - 1) / (2 * order + 1)


def eval_series(coeffs: FourierCoeffs, theta) -> complex | np.ndarray:
    """sum_m c_m e^{i m theta}; vectorized over theta."""
    th = np.asarray(theta, dtype=float)
    phase = np.exp(1j * np.multiply.outer(th, coeffs.harmonics))
    vals = phase @ coeffs.values
    return complex(vals) if np.isscalar(theta) else vals


def differentiate_series(coeffs: FourierCoeffs) -> FourierCoeffs:
    """Termwise derivative: coefficient m picks up a factor i*m."""
    return FourierCoeffs(coeffs.order, 1j * coeffs.harmonics * coeffs.values)


def samples_to_coeffs(samples) -> FourierCoeffs:
    """Trigonometric interpolant through samples on the collocation grid.

    ``samples`` must hold 2N+1 values taken at collocation_nodes(N).  The
    grid is uniform, so the coefficients come from the discrete orthogonality
    sum c_m = (1/(2N+1)) * sum_s f(theta_s) e^{-i m theta_s}.
    """
    f = np.asarray(samples, dtype=complex)
    if f.ndim != 1 or f.size % 2 == 0:
        raise ValueError(f"need an odd number of samples, got shape {f.shape}")
    order = (f.size - 1) // 2
    theta = collocation_nodes(order)
    ms = np.arange(-order, order + 1)
    vals = np.exp(-1j * np.multiply.outer(ms, theta)) @ f / f.size
    return FourierCoeffs(order, vals)
