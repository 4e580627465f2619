"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Every criterion asserts its stated tolerance at its stated resolution.  Two
checks are known not to hold on the rounded-square benchmark geometry at the
pinned truncation N=20, because the exact solution's Fourier tail there is
larger than the demanded tolerances (the coefficient decay rate is set by the
complex singularity of the curve parametrization at Im theta = ln(3)/4).
They are asserted as stated and fail honestly; companion checks demonstrate
that the very same quantities pass the same tolerances once the truncation is
raised (N=60), i.e. the implementation converges to the required accuracy.
The per-check docstrings and the printed ACCEPTANCE lines carry the measured
numbers.
"""

import numpy as np
import pytest

from patchplate import geometry as geo
from patchplate.basis import collocation_nodes, eval_series
from patchplate.kernels import KernelId, OnContourPV, layer_integral, smooth_pair_diagonal
from patchplate.assembly import assemble
from patchplate.model import FarField, validate
from patchplate.verify import apply_parameter, convergence_study, kirsch_hoop, solve

from conftest import (
    kirsch_spec,
    three_holes_spec,
    two_squares_spec,
)

_LINES: list[str] = []


def _report(name: str, ok: bool, detail: str = ""):
    line = f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}  {detail}"
    _LINES.append(line)
    print(line)
    assert ok, line


# -- fixtures shared between criteria -------------------------------------------


@pytest.fixture(scope="module")
def beta_sweep_solutions():
    """Patch-orientation grid solves of the three-hole configuration."""
    values = np.radians(np.arange(0.0, 91.0, 5.0))
    return {
        float(np.degrees(v)): solve(three_holes_spec(beta=float(v)), 30) for v in values
    }


@pytest.fixture(scope="module")
def scale_sweep_solutions():
    values = (0.66, 0.70, 0.75, 0.80, 0.85, 0.90)
    base = two_squares_spec()
    return {r: solve(apply_parameter(base, "patch_scale", r), 25) for r in values}


# -- criterion 10 first: kernel gates used by everything downstream ---------------


def test_criterion_10_kernel_oracle_gates():
    worst_pv = 0.0
    for contour in (geo.circle(0.0, 1.0), geo.circle(0.0, 1.0).reversed(),
                    geo.rounded_square(-1.0, 0.45, 9.0),
                    geo.rounded_square(-1.0, 0.45, 9.0).reversed()):
        sigma = contour.orientation_sign()
        val = layer_integral(contour, 0, KernelId.CAUCHY, OnContourPV(0.8))
        worst_pv = max(worst_pv, abs(val - sigma * 1j * np.pi))
    ok_pv = worst_pv < 1e-10

    c = geo.rounded_square(0.0, 1.0, 9.0)
    th0 = np.pi / 4
    t = c.point(th0)
    d1, _ = c.derivs(th0)
    tau = c.point(th0 + 1e-4)
    near = -1.0 / np.conj(tau - t) + (tau - t) * (np.conj(d1) / d1) / np.conj(tau - t) ** 2
    diag_err = abs(near - smooth_pair_diagonal(c, th0))
    ok_diag = diag_err < 1e-7

    fp = abs(layer_integral(geo.circle(0.0, 1.0), 0, KernelId.SECOND_ORDER, OnContourPV(0.8)))
    ok_fp = fp < 1e-8
    _report(
        "10 kernel gates",
        ok_pv and ok_diag and ok_fp,
        f"pv err {worst_pv:.1e}, diagonal err {diag_err:.1e}, finite part {fp:.1e}",
    )


# -- criterion 1: system order identity --------------------------------------------


def test_criterion_01_system_order():
    cases = [
        (two_squares_spec(bonded=True), (2, 0, 0)),
        (two_squares_spec(bonded=False), (0, 2, 2)),
        (three_holes_spec(), (3, 0, 0)),
        (kirsch_spec(), (0, 0, 1)),
    ]
    ok = True
    details = []
    for spec, (n, m, r) in cases:
        vp = validate(spec)
        for order in (10, 20):
            system = assemble(vp, order)
            expected = 2 * (2 * order + 1) * (4 * n + 2 * m + r)
            ok = ok and system.order == expected
            if (n, m, r) == (2, 0, 0) and order == 20:
                ok = ok and system.order == 656
                details.append(f"(2,0,0)@20 -> {system.order}")
    _report("1 system order", ok, "; ".join(details))


# -- criterion 2: closed-form hoop stress -------------------------------------------


def test_criterion_02_kirsch(kirsch_solution):
    tr = kirsch_solution.evaluator().trace("L1", "plate", "plus", 360, "normal")
    err = np.abs(tr.sigma_n - kirsch_hoop(tr.theta, 1.0)).max()
    peak_err = abs(tr.max_sigma - 3.0)
    loc_err = abs(tr.argmax_sigma - np.pi / 2)
    ok = err < 1e-6 and peak_err < 1e-6 and loc_err < 1e-6
    _report(
        "2 closed-form hoop benchmark",
        ok,
        f"pointwise {err:.1e}, peak {peak_err:.1e}, location {loc_err:.1e}",
    )


# -- criterion 3: collocation nodes ---------------------------------------------------


def test_criterion_03_collocation_nodes():
    ok = True
    for order in range(41):
        s = np.arange(1, 2 * order + 2)
        ok = ok and np.array_equal(collocation_nodes(order), np.pi * (2 * s - 1) / (2 * order + 1))
    _report("3 collocation nodes", ok, "exact for N <= 40")


# -- criterion 4: auxiliary conditions on solved problems ------------------------------


def test_criterion_04_auxiliary_conditions(
    kirsch_solution,
    two_squares_solution,
    two_squares_symmetric_solution,
    beta_sweep_solutions,
    scale_sweep_solutions,
):
    """Single-valuedness and zero-resultant conditions after every solve.

    Covers each acceptance problem at its defining truncation (the
    convergence study of criterion 6 deliberately re-solves under-resolved
    copies and is excluded).
    """
    solutions = [kirsch_solution, two_squares_solution, two_squares_symmetric_solution]
    solutions += list(beta_sweep_solutions.values())
    solutions += list(scale_sweep_solutions.values())
    worst = 0.0
    for sol in solutions:
        moms = sol.evaluator().density_moments()
        for group in moms.values():
            for v in group.values():
                worst = max(worst, v)
    _report("4 auxiliary conditions", worst < 1e-8, f"worst contour moment {worst:.1e}")


# -- criterion 5: junction residuals at the pinned truncation ---------------------------


def test_criterion_05_boundary_condition_residuals(two_squares_solution):
    """As stated: N=20, residuals < 1e-5, patch-side identity within 1e-8.

    Known to fail: the exact densities of this geometry carry a Fourier tail
    of about 2e-4 at |m|=20, so no 41-mode representation can push the
    junction residuals below roughly 4e-3.  The companion test below shows
    both tolerances are met by the same code at N=60.
    """
    ev = two_squares_solution.evaluator()
    res = ev.bc_residuals()
    worst = max(res.values())  # far-field magnitude is 1
    th = np.linspace(0, 2 * np.pi, 61, endpoint=False) + 0.007
    ps = ev.boundary_stress("G1", th, "patch", "plus")
    q = eval_series(two_squares_solution.densities.q["G1"], th)
    ident = np.abs(ps + 2.0 * q / ev.dc.d[0]).max()
    ok = worst < 1e-5 and ident < 1e-8
    _report(
        "5 junction residuals at N=20",
        ok,
        f"worst residual {worst:.1e} (need <1e-5), patch-side identity {ident:.1e} (need <1e-8)",
    )


def test_criterion_05_companion_residuals_converge(two_squares_solution_fine):
    ev = two_squares_solution_fine.evaluator()
    res = ev.bc_residuals()
    worst = max(res.values())
    th = np.linspace(0, 2 * np.pi, 61, endpoint=False) + 0.007
    ps = ev.boundary_stress("G1", th, "patch", "plus")
    q = eval_series(two_squares_solution_fine.densities.q["G1"], th)
    ident = np.abs(ps + 2.0 * q / ev.dc.d[0]).max()
    ok = worst < 1e-5 and ident < 1e-8
    _report(
        "5b companion at N=60",
        ok,
        f"worst residual {worst:.1e} < 1e-5, patch-side identity {ident:.1e} < 1e-8",
    )


# -- criterion 6: convergence claim ------------------------------------------------------


def test_criterion_06_convergence():
    report = convergence_study(
        two_squares_spec(), [10, 15, 20], contours=("L1", "G1"), resolution=360
    )
    d10, d15 = report.trace_deltas[0], report.trace_deltas[1]
    rel15 = d15 / report.trace_scale
    ok = rel15 < 0.01 and d10 > d15
    _report(
        "6 convergence claim",
        ok,
        f"N=15 vs N=20 delta {rel15 * 100:.2f}% of max trace; N=10 delta {d10:.2e} > {d15:.2e}",
    )


# -- criterion 7: mirror symmetry ----------------------------------------------------------


def test_criterion_07_symmetry(two_squares_symmetric_solution):
    """Mirror symmetry of the axis-aligned configuration.

    The collocation node family is not itself mirror-invariant, so the
    symmetry defect tracks the truncation error; the truncation is chosen
    high enough (N=80) that it sits below the 1e-8 tolerance.
    """
    ev = two_squares_symmetric_solution.evaluator()
    K = 256
    idx = (K // 2 - np.arange(K)) % K
    worst = 0.0
    for left, right in (("L1", "L2"), ("G1", "G2")):
        a = ev.trace(left, "plate", "plus", K)
        b = ev.trace(right, "plate", "plus", K)
        worst = max(worst, np.abs(a.sigma_n - b.sigma_n[idx]).max())
        worst = max(worst, np.abs(a.tau_n + b.tau_n[idx]).max())
    _report("7 mirror symmetry", worst < 1e-8, f"worst mirrored mismatch {worst:.1e}")


# -- criterion 8: qualitative sweeps ----------------------------------------------------------


def test_criterion_08a_patch_size_sweep(scale_sweep_solutions):
    values = sorted(scale_sweep_solutions)
    hole_sigma, hole_tau, patch_sigma = [], [], []
    for r in values:
        ev = scale_sweep_solutions[r].evaluator()
        tl = ev.trace("L1", "plate", "plus", 256)
        tg = ev.trace("G1", "plate", "plus", 256)
        hole_sigma.append(tl.max_sigma)
        hole_tau.append(tl.max_tau)
        patch_sigma.append(tg.max_sigma)
    dec = all(b < a for a, b in zip(hole_sigma, hole_sigma[1:])) and all(
        b < a for a, b in zip(hole_tau, hole_tau[1:])
    )
    inc = all(b > a for a, b in zip(patch_sigma, patch_sigma[1:]))
    _report(
        "8a patch-size sweep",
        dec and inc,
        f"hole maxima decrease {hole_sigma[0]:.3f}->{hole_sigma[-1]:.3f}, "
        f"patch maxima increase {patch_sigma[0]:.3f}->{patch_sigma[-1]:.3f}",
    )


def test_criterion_08b_patch_orientation_sweep(beta_sweep_solutions):
    """As stated: minima near 0 degrees and maxima near 60 degrees.

    Known to fail on the maxima: identical square patches make the response
    exactly 90-degree periodic, and the computed curves are dominated by the
    cos(4 beta) harmonic, so the extremes sit at 0/45/90 degrees.  A maximum
    at 60 degrees (i.e. 60 distinct from 30) would need a strong chirality of
    the response, which the solved configuration does not show; a coarse
    sampling of a 45-degree-peaked curve does report its largest value at 60.
    """
    betas = sorted(beta_sweep_solutions)
    curves = {"hole sigma": [], "hole tau": [], "patch sigma": [], "patch tau": []}
    for b in betas:
        ev = beta_sweep_solutions[b].evaluator()
        hs = ht = ps = pt = 0.0
        for i in range(3):
            tr = ev.trace(f"L{i + 1}", "plate", "plus", 180)
            hs, ht = max(hs, tr.max_sigma), max(ht, tr.max_tau)
            tr = ev.trace(f"G{i + 1}", "plate", "plus", 180)
            ps, pt = max(ps, tr.max_sigma), max(pt, tr.max_tau)
        curves["hole sigma"].append(hs)
        curves["hole tau"].append(ht)
        curves["patch sigma"].append(ps)
        curves["patch tau"].append(pt)
    ok = True
    details = []
    for name, vals in curves.items():
        arr = np.asarray(vals)
        bmin = betas[int(np.argmin(arr))]
        bmax = betas[int(np.argmax(arr))]
        details.append(f"{name}: min@{bmin:g} max@{bmax:g}")
        near_zero = min(bmin % 90.0, 90.0 - bmin % 90.0) <= 10.0
        near_sixty = abs(bmax - 60.0) <= 10.0
        ok = ok and near_zero and near_sixty
    _report("8b patch-orientation sweep", ok, "; ".join(details))


# -- criterion 9: homogeneous uniqueness probe -------------------------------------------------


def test_criterion_09_homogeneous_uniqueness():
    from dataclasses import replace

    worst = 0.0
    for spec in (
        kirsch_spec(),
        two_squares_spec(bonded=True),
        two_squares_spec(bonded=False),
        three_holes_spec(),
    ):
        quiet = replace(spec, far_field=FarField())
        sol = solve(quiet, 10)
        for group in (sol.densities.g, sol.densities.q, sol.densities.qk, sol.densities.gk):
            for coeffs in group.values():
                worst = max(worst, float(np.abs(coeffs.values).max()))
    _report("9 homogeneous uniqueness", worst < 1e-10, f"largest coefficient {worst:.1e}")


# -- summary -----------------------------------------------------------------------------------


def test_zz_acceptance_summary(capsys):
    with capsys.disabled():
        print("\n--- acceptance summary ---")
        for line in _LINES:
            print(line)
