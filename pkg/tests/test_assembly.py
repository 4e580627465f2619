import numpy as np
import pytest

from patchplate import geometry as geo
from patchplate import model as md
from patchplate.assembly import (
    EquationRowId,
    RowFamily,
    _Context,
    _complex_row_blocks,
    assemble,
    matrix_coefficients,
    rhs_value,
    row_groups,
)
from patchplate.basis import collocation_nodes
from patchplate.linsolve import solve_problem
from patchplate.model import derived_constants, validate

from conftest import PATCH_MATERIAL, PLATE, kirsch_spec, three_holes_spec, two_squares_spec


def _bonded_circle_spec(alpha=0.0, sigma1=1.0):
    return md.ProblemSpec(
        plate=PLATE,
        far_field=md.FarField(sigma1=sigma1, sigma2=0.0, alpha=alpha),
        holes={"L1": md.Hole(contour=geo.circle(0.0, 0.5))},
        patches={"G1": md.Patch(contour=geo.circle(0.0, 0.8), material=PATCH_MATERIAL,
                                 covers=("L1",))},
    )


# -- system order -------------------------------------------------------------


@pytest.mark.parametrize(
    "spec,counts,order,expected",
    [
        (two_squares_spec(bonded=True), (2, 0, 0), 20, 656),
        (two_squares_spec(bonded=False), (0, 2, 2), 10, 2 * 21 * 6),
        (three_holes_spec(), (3, 0, 0), 15, 744),
        (kirsch_spec(), (0, 0, 1), 10, 42),
    ],
)
def test_system_order(spec, counts, order, expected):
    vp = validate(spec)
    assert vp.counts == counts
    system = assemble(vp, order)
    n, m, r = counts
    assert system.order == expected == 2 * (2 * order + 1) * (4 * n + 2 * m + r)
    assert system.matrix.shape == (expected, expected)
    assert system.rhs.shape == (expected,)


def test_row_groups_cover_all_families():
    vp = validate(two_squares_spec(bonded=False))
    fams = [f for f, _ in row_groups(vp)]
    assert fams.count(RowFamily.FREE_HOLE_TRACTION) == 2
    assert fams.count(RowFamily.PATCH_EDGE_DISPLACEMENT) == 2
    assert fams.count(RowFamily.PATCH_EDGE_DENSITY) == 2
    assert RowFamily.HOLE_DISPLACEMENT not in fams


# -- right-hand sides ----------------------------------------------------------


def test_rhs_traction_at_vertical_tangent():
    # clockwise circular hole: conj(dt)/dt = -e^{2 i theta} = -1 at theta = 0;
    # with Gamma = 0.25 and Gamma' = -0.5 the traction right side is
    # -2*0.25 - (-0.5)(-1) = -1
    vp = validate(_bonded_circle_spec())
    row = EquationRowId(RowFamily.HOLE_TRACTION, 0, 0)
    val = rhs_value(vp, row, 0.0, order=2)
    assert val == pytest.approx(-1.0, abs=1e-12)


def test_rhs_zero_for_homogeneous_problem():
    spec = md.ProblemSpec(
        plate=PLATE, far_field=md.FarField(),
        holes={"L1": md.Hole(contour=geo.circle(0.0, 0.5))},
        patches={"G1": md.Patch(contour=geo.circle(0.0, 0.8), material=PATCH_MATERIAL,
                                 covers=("L1",))},
    )
    vp = validate(spec)
    for family, idx in row_groups(vp):
        for theta in (0.1, 2.0):
            assert rhs_value(vp, EquationRowId(family, idx, 0), theta, order=1) == 0.0


def test_rhs_constant_load_on_free_hole():
    spec = md.ProblemSpec(
        plate=PLATE, far_field=md.FarField(),
        holes={"L1": md.Hole(contour=geo.circle(0.0, 0.5),
                             load=md.TractionLoad.constant_pressure(1.0))},
        patches={},
    )
    vp = validate(spec)
    row = EquationRowId(RowFamily.FREE_HOLE_TRACTION, 0, 0)
    for theta in (0.0, 1.0, 4.0):
        assert rhs_value(vp, row, theta, order=2) == pytest.approx(-1.0, abs=1e-12)


# -- local coefficient terms ----------------------------------------------------


def test_traction_row_patch_jump_coefficient_is_local():
    # the patch stress-jump density enters the bonded-hole traction equation
    # only through the local 2*d_k term
    vp = validate(_bonded_circle_spec())
    dc = derived_constants(vp)
    row = EquationRowId(RowFamily.HOLE_TRACTION, 0, 0)
    for m in (-2, 0, 1):
        for theta in (0.0, 1.3):
            a, b = matrix_coefficients(vp, row, theta, ("qk", 0), m, order=3)
            assert a == pytest.approx(2.0 * dc.d[0] * np.exp(1j * m * theta), abs=1e-12)
            assert b == pytest.approx(0.0, abs=1e-12)


def test_patch_density_rows_local_terms():
    # adding the two patch-boundary displacement rows cancels every integral
    # of the patch density, leaving its pure local coefficient -i(kappa_k+1)e^{im th}
    vp = validate(_bonded_circle_spec())
    dc = derived_constants(vp)
    kk = dc.kappa_patch[0]
    theta, m, order = 0.7, 1, 3
    a1, b1 = matrix_coefficients(
        vp, EquationRowId(RowFamily.PATCH_EDGE_DISPLACEMENT, 0, 0), theta, ("gk", 0), m, order
    )
    a2, b2 = matrix_coefficients(
        vp, EquationRowId(RowFamily.PATCH_EDGE_DENSITY, 0, 0), theta, ("gk", 0), m, order
    )
    assert a1 + a2 == pytest.approx(-1j * (kk + 1.0) * np.exp(1j * m * theta), abs=1e-10)
    assert b1 + b2 == pytest.approx(0.0, abs=1e-10)


def test_free_hole_moment_coefficient():
    # on a clockwise circular hole only the m = 1 harmonic has a nonzero
    # whole-contour moment, worth -2*pi*i*R; the single-valuedness term then
    # contributes (1/pi) * (|dt|/dt) * (-2*pi*i*R) on top of the layer kernels
    radius = 0.5
    vp = validate(kirsch_spec(radius=radius))
    contour = vp.holes[0].contour
    theta, order = 0.9, 2
    row = EquationRowId(RowFamily.FREE_HOLE_TRACTION, 0, 0)

    d1, _ = contour.derivs(theta)
    absdt = abs(d1) / d1
    with_term = matrix_coefficients(vp, row, theta, ("g", 0), 1, order)[0]
    # the same kernel combination evaluated through the traction operator of a
    # *bonded* configuration has no single-valuedness term
    bonded = validate(_bonded_circle_spec())
    without = matrix_coefficients(
        bonded, EquationRowId(RowFamily.HOLE_TRACTION, 0, 0), theta, ("g", 0), 1, order
    )[0]
    expected = absdt * (-2j * np.pi * radius) / np.pi
    assert with_term - without == pytest.approx(expected, abs=1e-12)


# -- solved-system properties ----------------------------------------------------


def test_homogeneous_solution_is_zero():
    spec = md.ProblemSpec(
        plate=PLATE, far_field=md.FarField(),
        holes={"L1": md.Hole(contour=geo.rounded_square(-1.0, 0.45, 9.0)),
               "L2": md.Hole(contour=geo.rounded_square(1.0, 0.45, 9.0))},
        patches={"G1": md.Patch(contour=geo.rounded_square(-1.0, 0.7, 14.0),
                                 material=PATCH_MATERIAL, covers=("L1",)),
                 "G2": md.Patch(contour=geo.rounded_square(1.0, 0.7, 14.0),
                                 material=PATCH_MATERIAL, covers=("L2",))},
    )
    coeffs, report, _ = solve_problem(validate(spec), 10)
    worst = max(np.abs(c.values).max() for c in coeffs.values())
    assert worst < 1e-10


def _midpoint_residual(vp, order):
    coeffs, _, _ = solve_problem(vp, order)
    ctx = _Context(vp, order, None)
    mids = collocation_nodes(order) + np.pi / (2 * order + 1)
    worst = 0.0
    for family, idx in row_groups(vp):
        blocks, rhs = _complex_row_blocks(ctx, family, idx, mids)
        val = np.zeros(len(mids), complex)
        for key, (a, b) in blocks.items():
            val += a @ coeffs[key].values + b @ np.conj(coeffs[key].values)
        worst = max(worst, float(np.abs(val - rhs).max()))
    return worst


def test_residuals_decrease_spectrally():
    vp = validate(two_squares_spec())
    r15 = _midpoint_residual(vp, 15)
    r20 = _midpoint_residual(vp, 20)
    r25 = _midpoint_residual(vp, 25)
    assert r20 < 0.7 * r15
    assert r25 < 0.7 * r20


def test_circular_geometry_solves_banded():
    # on circles the exact densities hold only harmonics -2, 0, 2; everything
    # else must vanish at solver precision independently of the truncation
    vp = validate(_bonded_circle_spec())
    coeffs, _, _ = solve_problem(vp, 8)
    for c in coeffs.values():
        for m in c.harmonics:
            if m not in (-2, 0, 2):
                assert abs(c[int(m)]) < 1e-11


def test_dump_csv(tmp_path):
    vp = validate(kirsch_spec())
    system = assemble(vp, 2)
    mp, rp = tmp_path / "m.csv", tmp_path / "b.csv"
    system.dump_csv(mp, rp)
    loaded = np.loadtxt(mp, delimiter=",")
    assert loaded.shape == (system.order, system.order)
    assert np.allclose(loaded, system.matrix, atol=1e-12)


def test_layout_roundtrip():
    vp = validate(two_squares_spec())
    system = assemble(vp, 3)
    layout = system.layout
    rng = np.random.default_rng(5)
    x = rng.normal(size=system.order)
    blocks = layout.unpack(x)
    assert set(blocks) == set(layout.blocks)
    for key, coeffs in blocks.items():
        for m in coeffs.harmonics:
            re = x[layout.column(*key, int(m), "re")]
            im = x[layout.column(*key, int(m), "im")]
            assert coeffs[int(m)] == pytest.approx(re + 1j * im, abs=0)
