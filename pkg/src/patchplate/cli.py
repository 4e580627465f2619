"""Config-driven command line: solve, trace, sweep, convergence.

The problem is described in a TOML document with sections [plate],
[farfield], [[hole]], [[patch]], [numerics], [output].  Angles are radians
unless the enclosing table sets ``degrees = true``.  Unknown keys are
rejected with the offending section named, so typos cannot silently change a
computation.

Exit codes: 0 success, 2 config error, 3 validation/geometry error,
4 singular system, 5 unknown contour id.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import geometry, model
from .geometry import GeometryError
from .linsolve import SingularSystemError
from .field import FieldDomainError
from .verify import SWEEP_PARAMETERS, convergence_study, solve, sweep

__all__ = ["main", "ConfigError", "UnknownContourError", "load_config", "RunConfig"]


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


class UnknownContourError(ValueError):
    """A contour id was requested that the problem does not define."""


# ---------------------------------------------------------------------------
# Config parsing.
# ---------------------------------------------------------------------------


class RunConfig:
    def __init__(self, spec: model.ProblemSpec, order: int, quad_size, out_dir: str,
                 formats: tuple[str, ...], trace_resolution: int):
        self.spec = spec
        self.order = order
        self.quad_size = quad_size
        self.out_dir = out_dir
        self.formats = formats
        self.trace_resolution = trace_resolution


def _check_keys(table: dict, allowed: set[str], where: str):
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def _need(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"missing key {key!r} in {where}")
    return table[key]


def _as_complex(value, where: str) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)):
        return complex(value)
    raise ConfigError(f"{where}: expected [re, im] or a number, got {value!r}")


def _angle(table: dict, key: str, where: str, default=None) -> float:
    if key not in table:
        if default is None:
            raise ConfigError(f"missing key {key!r} in {where}")
        return default
    val = float(table[key])
    return float(np.radians(val)) if table.get("degrees", False) else val


def _contour(table: dict, where: str) -> geometry.Contour:
    kind = _need(table, "kind", where)
    common = {"kind", "id", "degrees"}
    try:
        if kind == "circle":
            _check_keys(table, common | {"center", "radius", "load", "z_ref",
                                         "covers", "shear_modulus", "poisson", "thickness"}, where)
            return geometry.circle(_as_complex(_need(table, "center", where), where),
                                   float(_need(table, "radius", where)))
        if kind == "rounded_square":
            _check_keys(table, common | {"center", "scale", "corner_divisor", "rotation",
                                         "load", "z_ref", "covers",
                                         "shear_modulus", "poisson", "thickness"}, where)
            return geometry.rounded_square(
                _as_complex(_need(table, "center", where), where),
                float(_need(table, "scale", where)),
                float(_need(table, "corner_divisor", where)),
                _angle(table, "rotation", where, default=0.0),
            )
        if kind == "fourier":
            _check_keys(table, common | {"coeffs", "load", "z_ref", "covers",
                                         "shear_modulus", "poisson", "thickness"}, where)
            entries = _need(table, "coeffs", where)
            coeffs = {}
            for row in entries:
                if len(row) != 3:
                    raise ConfigError(f"{where}: coeffs rows must be [k, re, im]")
                coeffs[int(row[0])] = complex(float(row[1]), float(row[2]))
            return geometry.fourier_curve(coeffs)
    except GeometryError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}: unknown contour kind {kind!r}")


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error in {path}: {exc}") from exc

    _check_keys(doc, {"plate", "farfield", "hole", "patch", "numerics", "output"}, "top level")

    plate_tbl = _need(doc, "plate", "config")
    _check_keys(plate_tbl, {"shear_modulus", "poisson", "thickness"}, "[plate]")
    try:
        plate = model.Material(
            shear_modulus=float(_need(plate_tbl, "shear_modulus", "[plate]")),
            poisson=float(_need(plate_tbl, "poisson", "[plate]")),
            thickness=float(plate_tbl.get("thickness", 1.0)),
        )
    except model.ValidationError as exc:
        raise ConfigError(f"[plate]: {exc}") from exc

    ff_tbl = doc.get("farfield", {})
    _check_keys(ff_tbl, {"sigma1", "sigma2", "alpha", "degrees"}, "[farfield]")
    far_field = model.FarField(
        sigma1=float(ff_tbl.get("sigma1", 0.0)),
        sigma2=float(ff_tbl.get("sigma2", 0.0)),
        alpha=_angle(ff_tbl, "alpha", "[farfield]", default=0.0),
    )

    holes: dict[str, model.Hole] = {}
    for i, tbl in enumerate(doc.get("hole", [])):
        where = f"[[hole]] #{i + 1}"
        hid = str(tbl.get("id", f"L{i + 1}"))
        if hid in holes:
            raise ConfigError(f"{where}: duplicate hole id {hid!r}")
        if "covers" in tbl or "shear_modulus" in tbl or "poisson" in tbl:
            raise ConfigError(f"{where}: material/covers keys belong to patches")
        load = model.TractionLoad.zero()
        if "load" in tbl:
            entries = {}
            for row in tbl["load"]:
                if len(row) != 3:
                    raise ConfigError(f"{where}: load rows must be [m, re, im]")
                entries[int(row[0])] = complex(float(row[1]), float(row[2]))
            load = model.TractionLoad.from_dict(entries)
        z_ref = _as_complex(tbl["z_ref"], where) if "z_ref" in tbl else None
        holes[hid] = model.Hole(contour=_contour(tbl, where), load=load, z_ref=z_ref)

    patches: dict[str, model.Patch] = {}
    for i, tbl in enumerate(doc.get("patch", [])):
        where = f"[[patch]] #{i + 1}"
        pid = str(tbl.get("id", f"G{i + 1}"))
        if pid in patches:
            raise ConfigError(f"{where}: duplicate patch id {pid!r}")
        if "load" in tbl or "z_ref" in tbl:
            raise ConfigError(f"{where}: load/z_ref keys belong to holes")
        try:
            material = model.Material(
                shear_modulus=float(_need(tbl, "shear_modulus", where)),
                poisson=float(_need(tbl, "poisson", where)),
                thickness=float(tbl.get("thickness", 1.0)),
            )
        except model.ValidationError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
        covers = tuple(str(h) for h in tbl.get("covers", []))
        patches[pid] = model.Patch(contour=_contour(tbl, where), material=material, covers=covers)

    num_tbl = doc.get("numerics", {})
    _check_keys(num_tbl, {"N", "quadrature"}, "[numerics]")
    order = int(num_tbl.get("N", 15))
    if order < 0:
        raise ConfigError("[numerics]: N must be nonnegative")
    quad = num_tbl.get("quadrature", "auto")
    if quad == "auto":
        quad_size = None
    elif isinstance(quad, int) and quad >= 16:
        quad_size = quad
    else:
        raise ConfigError("[numerics]: quadrature must be 'auto' or an integer >= 16")

    out_tbl = doc.get("output", {})
    _check_keys(out_tbl, {"directory", "formats", "trace_resolution"}, "[output]")
    formats = tuple(out_tbl.get("formats", ["csv"]))
    for f in formats:
        if f not in ("csv", "svg"):
            raise ConfigError(f"[output]: unknown format {f!r}")
    resolution = int(out_tbl.get("trace_resolution", 256))
    if resolution < 4:
        raise ConfigError("[output]: trace_resolution must be at least 4")

    spec = model.ProblemSpec(plate=plate, far_field=far_field, holes=holes, patches=patches)
    return RunConfig(
        spec=spec,
        order=order,
        quad_size=quad_size,
        out_dir=str(out_tbl.get("directory", "out")),
        formats=formats,
        trace_resolution=resolution,
    )


# ---------------------------------------------------------------------------
# Output writers.
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17e")


def _write_atomic(path: str, text: str):
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def trace_svg(csv_text: str, width: int = 640, height: int = 420) -> str:
    """Two-line plot of a trace.csv document; a pure function of the text."""
    rows = list(csv.reader(io.StringIO(csv_text)))
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    theta, series = data[:, 0], [data[:, 1], data[:, 2]]
    labels = rows[0][1:]
    colors = ["#1f77b4", "#d62728"]
    lo = min(s.min() for s in series)
    hi = max(s.max() for s in series)
    if hi - lo < 1e-30:
        hi = lo + 1.0
    mx, my = 50.0, 30.0
    sx = (width - 2 * mx) / (theta.max() - theta.min() if theta.size > 1 else 1.0)
    sy = (height - 2 * my) / (hi - lo)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    zero_y = height - my - (0.0 - lo) * sy
    if lo <= 0.0 <= hi:
        parts.append(
            f'<line x1="{mx:.1f}" y1="{zero_y:.1f}" x2="{width - mx:.1f}" '
            f'y2="{zero_y:.1f}" stroke="#999999" stroke-width="1"/>'
        )
    for values, label, color in zip(series, labels, colors):
        pts = " ".join(
            f"{mx + (t - theta.min()) * sx:.2f},{height - my - (v - lo) * sy:.2f}"
            for t, v in zip(theta, values)
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
    for i, (label, color) in enumerate(zip(labels, colors)):
        y = 16 + 16 * i
        parts.append(f'<text x="{mx + 4:.1f}" y="{y}" fill="{color}" font-size="12">{label}</text>')
    parts.append(
        f'<text x="{width / 2:.1f}" y="{height - 6}" fill="#333333" font-size="12" '
        f'text-anchor="middle">theta</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _write_solution_outputs(cfg: RunConfig, sol, out_dir: str):
    os.makedirs(out_dir, exist_ok=True)
    dens = sol.densities
    rows = []
    for block, group in (("g", dens.g), ("q", dens.q), ("qk", dens.qk), ("gk", dens.gk)):
        for cid in sorted(group):
            coeffs = group[cid]
            for m in coeffs.harmonics:
                c = coeffs[int(m)]
                rows.append([cid, block, int(m), _fmt(c.real), _fmt(c.imag)])
    _write_atomic(os.path.join(out_dir, "densities.csv"),
                  _csv_text(["contour_id", "block", "m", "re", "im"], rows))

    ev = sol.evaluator(cfg.quad_size)
    moms = ev.density_moments()
    report = [
        ["order", "", _fmt(sol.order)],
        ["residual_norm", "", _fmt(sol.residual_norm)],
        ["condition_estimate", "", _fmt(sol.condition_estimate)],
    ]
    for cid, v in sorted(moms["single_valuedness"].items()):
        report.append(["single_valuedness", cid, _fmt(v)])
    for cid, v in sorted(moms["zero_resultant"].items()):
        report.append(["zero_resultant", cid, _fmt(v)])
    for (cond, cid), v in sorted(ev.bc_residuals().items()):
        report.append([f"bc_residual:{cond}", cid, _fmt(v)])
    _write_atomic(os.path.join(out_dir, "report.csv"),
                  _csv_text(["metric", "contour_id", "value"], report))
    return ev


# ---------------------------------------------------------------------------
# Commands.
# ---------------------------------------------------------------------------


def _cmd_solve(args) -> int:
    cfg = load_config(args.config)
    sol = solve(cfg.spec, cfg.order, cfg.quad_size)
    out_dir = args.out or cfg.out_dir
    _write_solution_outputs(cfg, sol, out_dir)
    print(f"solved: order {sol.order}, residual {sol.residual_norm:.3e}, "
          f"condition estimate {sol.condition_estimate:.3e}")
    return 0


def _known_ids(problem):
    return tuple(problem.hole_ids) + tuple(problem.patch_ids)


def _cmd_trace(args) -> int:
    cfg = load_config(args.config)
    sol = solve(cfg.spec, cfg.order, cfg.quad_size)
    if args.contour not in _known_ids(sol.problem):
        raise UnknownContourError(
            f"unknown contour {args.contour!r}; known: {_known_ids(sol.problem)}")
    out_dir = args.out or cfg.out_dir
    ev = _write_solution_outputs(cfg, sol, out_dir)
    tr = ev.trace(args.contour, args.region, args.side, cfg.trace_resolution, args.direction)
    rows = [[_fmt(t), _fmt(s), _fmt(tau)] for t, s, tau in zip(tr.theta, tr.sigma_n, tr.tau_n)]
    csv_text = _csv_text(["theta", "sigma_n", "tau_n"], rows)
    _write_atomic(os.path.join(out_dir, "trace.csv"), csv_text)
    if "svg" in (args.format.split(",") if args.format else cfg.formats):
        _write_atomic(os.path.join(out_dir, "trace.svg"), trace_svg(csv_text))
    print(f"trace {args.contour} ({args.region}/{args.side}/{args.direction}): "
          f"max |sigma_n| {tr.max_sigma:.9g} at theta {tr.argmax_sigma:.9g}, "
          f"max |tau_n| {tr.max_tau:.9g} at theta {tr.argmax_tau:.9g}")
    return 0


def _parse_values(text: str):
    vals = [v for v in (text or "").split(",") if v.strip()]
    if not vals:
        raise ConfigError("empty value list")
    return [float(v) for v in vals]


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.param not in SWEEP_PARAMETERS:
        raise ConfigError(f"unknown sweep parameter {args.param!r}; use one of {SWEEP_PARAMETERS}")
    values = _parse_values(args.values)
    if args.degrees:
        values = [float(np.radians(v)) for v in values]
    rows_out = []
    for row in sweep(cfg.spec, args.param, values, cfg.order, cfg.quad_size,
                     region=args.region, side=args.side,
                     resolution=cfg.trace_resolution):
        for cid in sorted(row.max_sigma):
            rows_out.append([_fmt(row.value), cid, _fmt(row.max_sigma[cid]), _fmt(row.max_tau[cid])])
    out_dir = args.out or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    _write_atomic(os.path.join(out_dir, "sweep.csv"),
                  _csv_text(["value", "contour_id", "max_sigma_n", "max_tau_n"], rows_out))
    print(f"sweep {args.param}: {len(values)} values written")
    return 0


def _cmd_convergence(args) -> int:
    cfg = load_config(args.config)
    orders = [int(v) for v in _parse_values(args.n_list)]
    if any(n < 0 for n in orders):
        raise ConfigError("N values must be nonnegative")
    report = convergence_study(cfg.spec, orders, cfg.quad_size,
                               resolution=cfg.trace_resolution)
    rows = [[str(n), _fmt(t), _fmt(d)]
            for n, t, d in zip(report.orders, report.tails, report.trace_deltas)]
    out_dir = args.out or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    _write_atomic(os.path.join(out_dir, "convergence.csv"),
                  _csv_text(["N", "tail", "trace_delta"], rows))
    print(f"convergence on {', '.join(report.contours)}: trace scale {report.trace_scale:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patchplate",
        description="Elastic equilibrium of an infinite plate with holes "
                    "reinforced by bonded patches.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML problem description")
        p.add_argument("--out", help="output directory (overrides [output].directory)")

    p = sub.add_parser("solve", help="solve and write densities.csv / report.csv")
    common(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("trace", help="stress trace along one contour")
    common(p)
    p.add_argument("--contour", required=True, help="contour id, e.g. L1 or G1")
    p.add_argument("--region", default="plate", choices=["plate", "patch"])
    p.add_argument("--side", default="plus", choices=["plus", "minus"])
    p.add_argument("--direction", default="tangent", choices=["tangent", "normal"],
                   help="tangent: traction across the contour; normal: hoop stress")
    p.add_argument("--format", help="comma list overriding [output].formats, e.g. csv,svg")
    p.set_defaults(func=_cmd_trace)

    p = sub.add_parser("sweep", help="re-solve over a parameter range")
    common(p)
    p.add_argument("--param", required=True, help="|".join(SWEEP_PARAMETERS))
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--degrees", action="store_true", help="interpret angle values in degrees")
    p.add_argument("--region", default="plate", choices=["plate", "patch"])
    p.add_argument("--side", default="plus", choices=["plus", "minus"])
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("convergence", help="trace deltas over a list of truncations")
    common(p)
    p.add_argument("--N-list", dest="n_list", required=True, help="comma-separated N values")
    p.set_defaults(func=_cmd_convergence)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config-error: {exc}", file=sys.stderr)
        return 2
    except (model.ValidationError, GeometryError) as exc:
        print(f"validation-error: {exc}", file=sys.stderr)
        return 3
    except SingularSystemError as exc:
        print(f"singular-system: {exc}", file=sys.stderr)
        return 4
    except (UnknownContourError, FieldDomainError) as exc:
        print(f"unknown-contour: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
