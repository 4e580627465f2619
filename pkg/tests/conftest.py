"""Shared problem builders and solved-state fixtures.

The building blocks here are the standard benchmark configurations: a single
traction-free circular hole (closed-form hoop stress), two square holes with
rounded corners under bonded square patches, and three circular holes under
rotatable square patches.  Solves are session-scoped since several test
modules interrogate the same solution.
"""

from __future__ import annotations

import numpy as np
import pytest

from patchplate import geometry as geo
from patchplate import model as md
from patchplate.verify import Solution, solve


PLATE = md.Material(shear_modulus=60.0, poisson=0.4, thickness=1.0)
PATCH_MATERIAL = md.Material(shear_modulus=40.0, poisson=0.3, thickness=1.0)


def kirsch_spec(radius: float = 0.5, sigma: float = 1.0) -> md.ProblemSpec:
    """Single traction-free circular hole under remote uniaxial tension."""
    return md.ProblemSpec(
        plate=PLATE,
        far_field=md.FarField(sigma1=sigma, sigma2=0.0, alpha=0.0),
        holes={"L1": md.Hole(contour=geo.circle(0.0, radius))},
        patches={},
    )


def two_squares_spec(alpha: float = np.pi / 4, bonded: bool = True) -> md.ProblemSpec:
    """Two rounded-square holes at -1 and +1 under rounded-square patches.

    ``bonded=True`` attaches each patch along both the hole and the patch
    boundary; ``bonded=False`` leaves the holes free and attaches the patches
    along their own boundaries only.
    """
    holes = {
        "L1": md.Hole(contour=geo.rounded_square(-1.0, 0.45, 9.0)),
        "L2": md.Hole(contour=geo.rounded_square(+1.0, 0.45, 9.0)),
    }
    patches = {
        "G1": md.Patch(
            contour=geo.rounded_square(-1.0, 0.7, 14.0),
            material=PATCH_MATERIAL,
            covers=("L1",) if bonded else (),
        ),
        "G2": md.Patch(
            contour=geo.rounded_square(+1.0, 0.7, 14.0),
            material=PATCH_MATERIAL,
            covers=("L2",) if bonded else (),
        ),
    }
    return md.ProblemSpec(
        plate=PLATE,
        far_field=md.FarField(sigma1=1.0, sigma2=0.0, alpha=alpha),
        holes=holes,
        patches=patches,
    )


def three_holes_spec(beta: float = 0.0) -> md.ProblemSpec:
    """Three circular holes at -1-i, 1-i, -1+i under square patches.

    ``beta`` rotates every patch; the patch shape is rotated by beta - pi/4.
    """
    centers = [-1.0 - 1.0j, 1.0 - 1.0j, -1.0 + 1.0j]
    holes = {
        f"L{i + 1}": md.Hole(contour=geo.circle(c, 0.5)) for i, c in enumerate(centers)
    }
    patches = {
        f"G{i + 1}": md.Patch(
            contour=geo.rounded_square(c, 0.675, 9.0, rotation=beta - np.pi / 4),
            material=PATCH_MATERIAL,
            covers=(f"L{i + 1}",),
        )
        for i, c in enumerate(centers)
    }
    return md.ProblemSpec(
        plate=PLATE,
        far_field=md.FarField(sigma1=1.0, sigma2=0.0, alpha=0.0),
        holes=holes,
        patches=patches,
    )


def concentric_circles_spec(alpha: float = 0.0) -> md.ProblemSpec:
    """One circular hole under a concentric circular bonded patch."""
    return md.ProblemSpec(
        plate=PLATE,
        far_field=md.FarField(sigma1=1.0, sigma2=0.0, alpha=alpha),
        holes={"L1": md.Hole(contour=geo.circle(0.0, 0.5))},
        patches={
            "G1": md.Patch(
                contour=geo.circle(0.0, 0.8), material=PATCH_MATERIAL, covers=("L1",)
            )
        },
    )


@pytest.fixture(scope="session")
def kirsch_solution() -> Solution:
    return solve(kirsch_spec(), 12)


@pytest.fixture(scope="session")
def two_squares_solution() -> Solution:
    return solve(two_squares_spec(), 20)


@pytest.fixture(scope="session")
def two_squares_solution_fine() -> Solution:
    return solve(two_squares_spec(), 60)


@pytest.fixture(scope="session")
def two_squares_symmetric_solution() -> Solution:
    return solve(two_squares_spec(alpha=0.0), 80)
