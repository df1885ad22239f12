"""Command-line surface: analyses, reports, SVG figures, system generation.

Exit codes: 0 success, 2 input validation failure, 3 inclusion violation in
``verify`` for a rigorous method.  Reports are line-oriented ``key: value``
text; ``--json`` prints the same fields as a JSON document.  All numeric
output uses 17 significant digits so files round-trip bit-exactly.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import overdamped as od
from .errors import (
    CriticalModePresent,
    EpsilonTooLarge,
    InputError,
    NonPositiveFrequency,
    NotPositiveDefinite,
    OvalBoundsError,
    SingularFit,
)
from .matdense import DampedSystem, Spectrum, SymMatrix, load_system, save_system
from .modal import (
    CLUSTER_RELTOL,
    ModalForm,
    cluster_frequencies,
    is_modally_damped,
    modal_split,
    mode_foci,
    proportional_fit,
    to_modal,
)
from .regions import (
    Box,
    Disk,
    Method,
    QuasiOval,
    RegionUnion,
    boundary_polyline,
    build_regions,
)
from .verify import check_inclusion, true_spectrum

PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#7f7f7f",
)


def _f17(x) -> str:
    return format(float(x), ".17g")


def _f6(x) -> str:
    return format(float(x), ".6g")


# ---------------------------------------------------------------------------
# Random system generation


def random_system(
    n: int, seed: int, gamma: float = 1.0, overdamped: bool = False
) -> DampedSystem:
    """Reproducible random system: M, K are shifted Gram matrices, C a scaled
    Gram matrix; with ``overdamped`` the damping is doubled until the exact
    definiteness test passes."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    M = SymMatrix(A @ A.T + n * np.eye(n))
    B = rng.standard_normal((n, n))
    K = SymMatrix(B @ B.T + n * np.eye(n))
    G = rng.standard_normal((n, n))
    C = gamma * (G @ G.T)
    sys_ = DampedSystem(M, SymMatrix(C), K)
    if overdamped:
        for _ in range(60):
            if not od.exact_definiteness_interval(sys_).empty:
                return sys_
            C = 2.0 * C
            sys_ = DampedSystem(M, SymMatrix(C), K)
        raise InputError("could not reach an overdamped system by scaling C")
    return sys_


# ---------------------------------------------------------------------------
# SVG emission


def _svg_path(loop, fmt=_f6) -> str:
    cmds = [f"M {fmt(loop[0][0])} {fmt(-loop[0][1])}"]
    cmds += [f"L {fmt(x)} {fmt(-y)}" for x, y in loop[1:-1]]
    cmds.append("Z")
    return " ".join(cmds)


def emit_svg(
    unions: list[RegionUnion],
    spectrum: Spectrum | None,
    path,
    resolution: int = 512,
) -> None:
    """Write an SVG 1.1 figure of the unions with eigenvalue markers.

    One path element per boundary polyline, small dots for degenerate
    primitives, crosses at eigenvalues, axes with Re/Im labels; the viewBox
    is the joint bounding box padded by 10%.  Output bytes depend only on
    the inputs.
    """
    if not unions and (spectrum is None or len(spectrum) == 0):
        box = None
    else:
        box = None
        for u in unions:
            box = u.bounding_box() if box is None else box.merge(u.bounding_box())
        if spectrum is not None and len(spectrum):
            vals = spectrum.values
            pts = Box(
                float(np.min(vals.real)),
                float(np.max(vals.real)),
                float(np.min(vals.imag)),
                float(np.max(vals.imag)),
            )
            box = pts if box is None else box.merge(pts)
    if box is None:
        box = Box(-1.0, 1.0, -1.0, 1.0)
    box = box.padded(0.10)
    w = box.xmax - box.xmin
    h = box.ymax - box.ymin
    stroke = 0.0025 * max(w, h)
    font = 0.04 * max(w, h)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{_f6(box.xmin)} {_f6(-box.ymax)} {_f6(w)} {_f6(h)}" '
        f'width="720" height="{_f6(720 * h / w)}">',
        f'<rect x="{_f6(box.xmin)}" y="{_f6(-box.ymax)}" width="{_f6(w)}" '
        f'height="{_f6(h)}" fill="white"/>',
    ]
    axis_style = f'stroke="#999999" stroke-width="{_f6(stroke)}"'
    if box.xmin <= 0.0 <= box.xmax:
        lines.append(
            f'<line x1="0" y1="{_f6(-box.ymax)}" x2="0" y2="{_f6(-box.ymin)}" {axis_style}/>'
        )
        lines.append(
            f'<text x="{_f6(0.01 * w)}" y="{_f6(-box.ymax + 1.2 * font)}" '
            f'font-size="{_f6(font)}" fill="#555555">Im</text>'
        )
    if box.ymin <= 0.0 <= box.ymax:
        lines.append(
            f'<line x1="{_f6(box.xmin)}" y1="0" x2="{_f6(box.xmax)}" y2="0" {axis_style}/>'
        )
        lines.append(
            f'<text x="{_f6(box.xmax - 2.0 * font)}" y="{_f6(-0.01 * h - 0.3 * font)}" '
            f'font-size="{_f6(font)}" fill="#555555">Re</text>'
        )
    for ui, u in enumerate(unions):
        color = PALETTE[ui % len(PALETTE)]
        style = f'fill="none" stroke="{color}" stroke-width="{_f6(stroke)}"'
        for p in u.primitives:
            if p.is_degenerate:
                for focus in p.foci:
                    lines.append(
                        f'<circle cx="{_f6(focus.real)}" cy="{_f6(-focus.imag)}" '
                        f'r="{_f6(1.2 * stroke)}" fill="{color}"/>'
                    )
                continue
            for loop in boundary_polyline(p, resolution):
                lines.append(f'<path d="{_svg_path(loop)}" {style}/>')
    if spectrum is not None:
        arm = 0.012 * max(w, h)
        style = f'stroke="black" stroke-width="{_f6(stroke)}"'
        for lam in spectrum.values:
            x, y = lam.real, -lam.imag
            lines.append(
                f'<path d="M {_f6(x - arm)} {_f6(y - arm)} L {_f6(x + arm)} {_f6(y + arm)} '
                f'M {_f6(x - arm)} {_f6(y + arm)} L {_f6(x + arm)} {_f6(y - arm)}" {style}/>'
            )
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Reports


def _render_text(report: dict) -> str:
    out = []
    for key, value in report.items():
        if isinstance(value, float):
            out.append(f"{key}: {_f17(value)}")
        elif isinstance(value, (list, tuple)):
            out.append(
                f"{key}: "
                + " ".join(_f17(v) if isinstance(v, float) else str(v) for v in value)
            )
        else:
            out.append(f"{key}: {value}")
    return "\n".join(out)


def _emit(report: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(report, indent=2))
    else:
        print(_render_text(report))


def _modal_pipeline(sys_: DampedSystem):
    form = to_modal(sys_)
    split = modal_split(form, "diagonal")
    foci = mode_foci(form, split)
    return form, split, foci


def _build_with_override(form, split, foci, method, extension):
    union = build_regions(form, split, foci, method)
    if extension is None:
        return union
    prims = []
    for p in union.primitives:
        if isinstance(p, QuasiOval):
            prims.append(QuasiOval(p.focus_plus, p.focus_minus, extension, p.q))
        elif isinstance(p, Disk):
            prims.append(Disk(p.center, extension))
        else:
            prims.append(p)
    return RegionUnion(union.method, tuple(prims), union.mode_labels)


def _cmd_analyze(args) -> int:
    sys_ = load_system(args.input)
    form, split, foci = _modal_pipeline(sys_)
    tol = args.rtol if args.rtol is not None else 1e-8
    report: dict = {"n": sys_.order}
    report["omega"] = [float(w) for w in form.omega]
    report["modally_damped"] = bool(is_modally_damped(sys_, tol))
    report["damping_norm"] = float(np.linalg.norm(form.D.array, 2))
    report["dprime_norm_diagonal"] = split.dprime_norm
    maximal = modal_split(form, "maximal")
    report["dprime_norm_maximal"] = maximal.dprime_norm
    report["frequency_clusters"] = [
        f"{lo}:{hi}" for lo, hi in cluster_frequencies(form.omega, CLUSTER_RELTOL)
    ]
    try:
        fit = proportional_fit(form)
        report["proportional_alpha"] = fit.alpha
        report["proportional_beta"] = fit.beta
        report["proportional_residual_norm"] = fit.residual_norm
    except SingularFit as exc:
        report["proportional_fit"] = f"singular ({exc})"
    for j in range(sys_.order):
        report[f"mode{j}.d"] = float(split.diag[j])
        report[f"mode{j}.theta"] = float(foci.theta[j])
        report[f"mode{j}.critical"] = bool(foci.critical[j])
        if not foci.critical[j]:
            report[f"mode{j}.kappa"] = float(foci.kappa[j])
        report[f"mode{j}.lambda_plus"] = str(complex(foci.lambda_plus[j]))
        report[f"mode{j}.lambda_minus"] = str(complex(foci.lambda_minus[j]))
    _emit(report, args.json)
    return 0


def _cmd_regions(args) -> int:
    sys_ = load_system(args.input)
    form, split, foci = _modal_pipeline(sys_)
    report: dict = {"n": sys_.order}
    for name in args.methods:
        method = Method(name)
        try:
            union = _build_with_override(form, split, foci, method, args.extension)
        except CriticalModePresent as exc:
            report[f"{name}.skipped"] = str(exc)
            continue
        report[f"{name}.primitives"] = len(union.primitives)
        report[f"{name}.rigorous"] = union.rigorous
        for k, p in enumerate(union.primitives):
            if isinstance(p, Disk):
                desc = f"disk center={complex(p.center)} radius={_f17(p.radius)}"
            elif isinstance(p, QuasiOval):
                desc = (
                    f"oval foci=({complex(p.focus_plus)}, {complex(p.focus_minus)}) "
                    f"r={_f17(p.r)} q={_f17(p.q)}"
                )
            else:
                desc = f"double-oval foci={tuple(map(complex, p.foci))} bound={_f17(p.bound)}"
            report[f"{name}.primitive{k}"] = desc
    _emit(report, args.json)
    return 0


def _cmd_overdamped(args) -> int:
    sys_ = load_system(args.input)
    form, split, foci = _modal_pipeline(sys_)
    tol = args.rtol if args.rtol is not None else 1e-10
    interval = od.exact_definiteness_interval(sys_, tol)
    report: dict = {"n": sys_.order}
    if interval.empty:
        report["exact_interval"] = "empty"
    else:
        report["exact_interval_lo"] = interval.lo
        report["exact_interval_hi"] = interval.hi
    for variant in ("norm", "gershgorin"):
        cert = od.sufficient_certificate(form, split, variant)
        if isinstance(cert, od.CertificateRefusal):
            where = "" if cert.mode is None else f" at mode {cert.mode}"
            report[f"certificate_{variant}"] = f"refused: {cert.reason}{where}"
            continue
        report[f"certificate_{variant}"] = "success"
        report[f"certificate_{variant}_p_minus"] = cert.p_minus
        report[f"certificate_{variant}_p_plus"] = cert.p_plus
        bounds = od.eigenvalue_intervals(form, split, variant)
        for j, (lo, hi) in enumerate(bounds.lower):
            report[f"intervals_{variant}.mode{j}.lower"] = [lo, hi]
        for j, (lo, hi) in enumerate(bounds.upper):
            report[f"intervals_{variant}.mode{j}.upper"] = [lo, hi]
    if args.epsilon is not None:
        try:
            env = od.eta_envelope(form, args.epsilon)
            report["envelope_epsilon"] = env.epsilon
            report["envelope_minus_lower"] = [float(v) for v in env.minus_lower]
            report["envelope_minus_upper"] = [float(v) for v in env.minus_upper]
            report["envelope_plus_lower"] = [float(v) for v in env.plus_lower]
            report["envelope_plus_upper"] = [float(v) for v in env.plus_upper]
        except (EpsilonTooLarge, ValueError) as exc:
            report["envelope"] = f"unavailable: {exc}"
    _emit(report, args.json)
    return 0


def _cmd_plot(args) -> int:
    sys_ = load_system(args.input)
    form, split, foci = _modal_pipeline(sys_)
    unions = []
    for name in args.methods:
        unions.append(
            _build_with_override(form, split, foci, Method(name), args.extension)
        )
    spectrum = true_spectrum(form)
    emit_svg(unions, spectrum, args.output, args.resolution)
    print(f"written: {args.output}")
    return 0


def _cmd_verify(args) -> int:
    sys_ = load_system(args.input)
    form, split, foci = _modal_pipeline(sys_)
    spectrum = true_spectrum(form)
    report: dict = {"n": sys_.order, "eigenvalues": [str(complex(v)) for v in spectrum.values]}
    failed = False
    for name in args.methods:
        method = Method(name)
        try:
            union = build_regions(form, split, foci, method)
        except CriticalModePresent as exc:
            report[f"{name}.skipped"] = str(exc)
            continue
        audit = check_inclusion(spectrum, union)
        report[f"{name}.all_contained"] = audit.all_contained
        report[f"{name}.min_margin"] = audit.min_margin
        if union.rigorous and not audit.all_contained:
            failed = True
    _emit(report, args.json)
    return 3 if failed else 0


def _cmd_gen(args) -> int:
    sys_ = random_system(args.n, args.seed, args.gamma, args.overdamped)
    save_system(sys_, args.output)
    print(f"written: {args.output}")
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ovalbounds",
        description="Eigenvalue inclusion regions for damped second-order systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, methods_default=None):
        p.add_argument("--input", required=True, help="system JSON file")
        p.add_argument(
            "--method",
            action="append",
            dest="methods",
            choices=[m.value for m in Method],
            default=None,
            help="region method (repeatable)",
        )
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--rtol", type=float, default=None, help="tolerance override")
        p.add_argument(
            "--extension", type=float, default=None, help="override region extension"
        )
        p.set_defaults(methods_default=methods_default)

    p = sub.add_parser("analyze", help="modal form, splits, proportional fit")
    p.add_argument("--input", required=True)
    p.add_argument("--json", action="store_true")
    p.add_argument("--rtol", type=float, default=None)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("regions", help="build region unions and report them")
    common(p, ["MODAL_OVAL_NORM"])
    p.set_defaults(func=_cmd_regions)

    p = sub.add_parser("overdamped", help="certificates and interval bounds")
    p.add_argument("--input", required=True)
    p.add_argument("--json", action="store_true")
    p.add_argument("--rtol", type=float, default=None)
    p.add_argument(
        "--epsilon",
        type=float,
        default=None,
        help="also report the relative-perturbation envelope (modally damped systems)",
    )
    p.set_defaults(func=_cmd_overdamped)

    p = sub.add_parser("plot", help="render selected unions to SVG")
    common(p, ["MODAL_OVAL_NORM"])
    p.add_argument("--output", required=True, help="SVG output path")
    p.add_argument("--resolution", type=int, default=512)
    p.set_defaults(func=_cmd_plot)

    p = sub.add_parser("verify", help="audit inclusion of the true spectrum")
    common(p, [m.value for m in Method if m is not Method.MODAL_DISK_APPROX])
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("gen", help="write a random test system")
    p.add_argument("--output", required=True)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma", type=float, default=1.0, help="damping scale")
    p.add_argument(
        "--overdamped", action="store_true", help="scale damping until overdamped"
    )
    p.set_defaults(func=_cmd_gen)
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if getattr(args, "methods", None) is None and hasattr(args, "methods_default"):
        args.methods = args.methods_default
    if getattr(args, "resolution", None) is not None and args.resolution < 32:
        print("error: resolution must be at least 32", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (InputError, NotPositiveDefinite, NonPositiveFrequency, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OvalBoundsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
