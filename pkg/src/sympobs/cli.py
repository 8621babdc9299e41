"""Command-line interface: ``sympobs <command> ...``.

Commands and exit codes:

check-manifold  0 criterion satisfied, 1 not satisfied or not applicable, 2 inconclusive
factor          0 factorization found, 1 none (proved), 2 none within the bound
perturb-matrix  0 success
blend-verify    0 all defects within tolerance, 1 otherwise
calabi          0 the requested identity holds within the error bound, 1 otherwise

Every command exits with 3 on invalid input or usage.  ``--format structured``
prints sorted-key JSON without timings; text output ends with the run time.
The default coefficient bound can be set with ``SYMPOBS_BOUND``.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import blend as B
from . import calabi as C
from . import catalog
from . import linear as L
from .factor import SearchConfig, decide_even_factorization, obstruction_report
from .report import obstruction_text, structured, verdict_lines
from .ringspec import RingSpecError, load_ring_spec

EXIT_INPUT = 3
BOUND_ENV = "SYMPOBS_BOUND"


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _default_bound() -> int:
    raw = os.environ.get(BOUND_ENV)
    if raw is None:
        return SearchConfig().coeff_bound
    try:
        return _positive_int(raw)
    except argparse.ArgumentTypeError as exc:
        raise InputError(f"{BOUND_ENV}: {exc}") from None


def _emit(args, doc: dict, text: str, t0: float):
    if args.format == "structured":
        sys.stdout.write(structured(doc))
    else:
        sys.stdout.write(text)
        sys.stdout.write(f"time: {time.perf_counter() - t0:.3f} s\n")


# ----------------------------------------------------------------------
# manifolds


def _resolve_manifold(args):
    if args.catalog:
        try:
            return catalog.lookup(args.catalog).data
        except KeyError as exc:
            raise InputError(exc.args[0]) from None
    target = args.spec or args.target
    if target is None:
        raise InputError("give --catalog NAME or --spec FILE")
    if not args.spec and target in catalog.names():
        return catalog.lookup(target).data
    path = Path(target)
    if not path.is_file():
        raise InputError(f"{target}: not a catalog name and no such file")
    try:
        return load_ring_spec(path).manifold
    except RingSpecError as exc:
        raise InputError(str(exc)) from None


def _config(args) -> SearchConfig:
    bound = args.bound if args.bound is not None else _default_bound()
    return SearchConfig(
        coeff_bound=bound,
        enable_gcd_criterion=not args.no_gcd,
        enable_elimination=not args.no_elimination,
        max_alpha_unknowns_for_elimination=args.elimination_limit,
    )


def cmd_check_manifold(args) -> int:
    t0 = time.perf_counter()
    M = _resolve_manifold(args)
    rep = obstruction_report(M, _config(args))
    text = obstruction_text(rep)
    _emit(args, rep.to_dict(), text, t0)
    return {"satisfied": 0, "not satisfied": 1, "not applicable": 1, "inconclusive": 2}[rep.criterion]


def cmd_factor(args) -> int:
    t0 = time.perf_counter()
    M = _resolve_manifold(args)
    v = decide_even_factorization(M, _config(args))
    text = "\n".join([f"manifold: {M.name or '(unnamed)'} (n = {M.n})", f"chern: {M.chern}"] + verdict_lines(v)) + "\n"
    _emit(args, {"manifold": M.name, "n": M.n, "chern": M.chern.format(), **v.to_dict()}, text, t0)
    return {"yes": 0, "no_proved": 1, "no_within_bound": 2}[v.kind]


# ----------------------------------------------------------------------
# matrices


def cmd_perturb_matrix(args) -> int:
    t0 = time.perf_counter()
    try:
        M = L.parse_matrix(Path(args.input).read_text(), args.input)
    except OSError as exc:
        raise InputError(f"{args.input}: {exc.strerror}") from None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    try:
        L.SymplecticMatrix(M, args.symplectic_tol)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    cls = L.classify(M)
    if not cls.elliptic:
        doc = {"error": "matrix is not elliptic", "classification": cls.to_dict()}
        text = "matrix is not elliptic\n" + "\n".join(
            f"  {L._fmt(z)}  {lab}" for z, lab in zip(cls.eigenvalues, cls.labels)
        ) + "\n"
        _emit(args, doc, text, t0)
        return EXIT_INPUT
    try:
        res = L.perturb_to_rational_angles(M, args.eps)
    except L.NotEllipticError as exc:
        raise InputError(str(exc)) from None
    doc = res.to_dict()
    doc["distance"] = float(np.max(np.abs(res.T - M)))
    doc["symplectic_defect"] = L.symplectic_defect(res.T)
    text = (
        L.format_matrix(res.T)
        + "angles: " + " ".join(str(a) for a in res.angles) + "\n"
        + f"order: {res.order}\n"
        + f"distance: {doc['distance']:.3g}\n"
    )
    _emit(args, doc, text, t0)
    return 0


# ----------------------------------------------------------------------
# blending


def _resolve_map(args) -> B.PolySymplecticMap:
    if args.map_file:
        lines = [ln.split("#", 1)[0].strip() for ln in Path(args.map_file).read_text().splitlines()]
        exprs = [ln.split("=", 1)[1] if "=" in ln else ln for ln in lines if ln]
        if len(exprs) not in (2, 4):
            raise InputError(f"{args.map_file}: expected 2 or 4 component lines")
        try:
            return B.PolySymplecticMap.from_strings(len(exprs) // 2, exprs, Path(args.map_file).stem)
        except ValueError as exc:
            raise InputError(f"{args.map_file}: {exc}") from None
    if args.map not in B.TEST_MAPS:
        raise InputError(f"unknown map {args.map!r}; choose from {', '.join(B.TEST_MAPS)}")
    return B.TEST_MAPS[args.map]()


def cmd_blend_verify(args) -> int:
    t0 = time.perf_counter()
    f = _resolve_map(args)
    try:
        B.check_map(f, args.box)
        S = B.generating_function_from_map(f, args.box)
    except (ValueError, B.NewtonError) as exc:
        raise InputError(str(exc)) from None
    reports = []
    for d in args.delta:
        try:
            g = B.map_from_generating_function(B.blend(S, d))
            reports.append(B.verify_blend(f, g, d, args.box))
        except (ValueError, B.NewtonError) as exc:
            raise InputError(str(exc)) from None
    ratios = []
    for a, b in zip(reports, reports[1:]):
        ratios.append({
            "deltas": [a.delta, b.delta],
            "c1_ratio": b.c1_distance / a.c1_distance if a.c1_distance else None,
            "c2_ratio": b.c2_distance / a.c2_distance if a.c2_distance else None,
        })
    ok = all(r.inside_defect <= 1e-8 and r.outside_defect <= 1e-8 and r.symplectic_defect <= 1e-5 for r in reports)
    doc = {"map": f.name, "reports": [r.to_dict() for r in reports], "ratios": ratios, "ok": ok}
    lines = [f"map: {f.name}"]
    for r in reports:
        lines.append(
            f"delta {r.delta:g}: inside {r.inside_defect:.3g}  outside {r.outside_defect:.3g}  "
            f"symplectic {r.symplectic_defect:.3g}  C1 {r.c1_distance:.4g}  C2 {r.c2_distance:.4g}"
        )
    for q in ratios:
        lines.append(f"ratio {q['deltas'][1]:g}/{q['deltas'][0]:g}: C1 {q['c1_ratio']:.3f}  C2 {q['c2_ratio']:.3f}")
    _emit(args, doc, "\n".join(lines) + "\n", t0)
    return 0 if ok else 1


# ----------------------------------------------------------------------
# Calabi


def _floats(text: str, key: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise InputError(f"{key}: expected comma-separated numbers, got {text!r}") from None


def parse_hamiltonian(text: str, box=None) -> C.CompactHamiltonian:
    """``FAMILY[:key=value...]`` with families bump, smooth, rotator, grid.

    Keys: ``center=x,y``, ``radius``, ``amplitude``, ``m`` (bump), ``inner`` and
    ``outer`` (rotator), ``file`` (grid), and ``profile=constant|linear|sine``
    for any family.
    """
    family, *items = text.split(":")
    kv = {}
    for item in items:
        if "=" not in item:
            raise InputError(f"hamiltonian description item {item!r} is not key=value")
        k, v = item.split("=", 1)
        kv[k.strip()] = v.strip()
    profile = kv.pop("profile", None)
    try:
        center = _floats(kv.pop("center", "0,0"), "center")
        amp = float(kv.pop("amplitude", "1"))
        if family == "bump":
            H = C.PolynomialBump(center, float(kv.pop("radius", "0.5")), amp, n=len(center) // 2, box=box, m=int(kv.pop("m", "4")))
        elif family == "smooth":
            H = C.SmoothBump(center, float(kv.pop("radius", "0.5")), amp, n=len(center) // 2, box=box)
        elif family == "rotator":
            H = C.Rotator(center, float(kv.pop("inner", "0.25")), float(kv.pop("outer", "0.5")), amp, n=len(center) // 2, box=box)
        elif family == "grid":
            H = _load_grid(kv.pop("file"))
        else:
            raise InputError(f"unknown hamiltonian family {family!r}; choose bump, smooth, rotator or grid")
    except KeyError as exc:
        raise InputError(f"hamiltonian description is missing {exc.args[0]}") from None
    except ValueError as exc:
        raise InputError(f"hamiltonian description {text!r}: {exc}") from None
    if kv:
        raise InputError(f"unknown keys in hamiltonian description: {', '.join(sorted(kv))}")
    if profile:
        try:
            H = C.TimeProfiled(H, profile)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    try:
        H.validate()
    except C.SupportError as exc:
        raise InputError(str(exc)) from None
    return H


def _load_grid(path: str) -> C.GridHamiltonian:
    """Grid file: ``nt nx ny`` header, ``xlo xhi ylo yhi`` line, then ``nt * nx`` rows of ``ny`` samples."""
    try:
        rows = [ln.split("#", 1)[0].split() for ln in Path(path).read_text().splitlines()]
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    rows = [r for r in rows if r]
    try:
        nt, nx, ny = (int(x) for x in rows[0])
        xlo, xhi, ylo, yhi = (float(x) for x in rows[1])
        data = np.array([[float(x) for x in r] for r in rows[2:]])
    except (ValueError, IndexError):
        raise InputError(f"{path}: malformed grid file") from None
    if data.shape != (nt * nx, ny):
        raise InputError(f"{path}: expected {nt * nx} rows of {ny} samples, found shape {data.shape}")
    return C.GridHamiltonian(data.reshape(nt, nx, ny), ((xlo, ylo), (xhi, yhi)))


def cmd_calabi(args) -> int:
    t0 = time.perf_counter()
    F = parse_hamiltonian(args.hamiltonian)
    kw = {"points": args.points, "time_steps": args.time_steps}
    doc: dict = {"op": args.op, "hamiltonian": args.hamiltonian}
    lines = []
    try:
        cF = C.calabi(F, **kw)
        doc["calabi"] = cF.to_dict()
        lines.append(f"Cal(F) = {cF}")
        ok = True
        if args.op == "cal":
            if args.volume is not None:
                doc["sigma"] = -cF.value / args.volume
                lines.append(f"sigma = -Cal/V = {doc['sigma']:.12g}")
        elif args.op == "compose":
            if not args.second:
                raise InputError("--op compose needs --second DESCRIPTION")
            G = parse_hamiltonian(args.second)
            cG = C.calabi(G, **kw)
            H = C.compose_hamiltonians(F, G, args.steps)
            cH = C.calabi(H, **kw)
            defect = abs(cH.value - cF.value - cG.value)
            tol = 2 * (cH.error + cF.error + cG.error)
            ok = defect <= tol
            doc.update(second=args.second, calabi_second=cG.to_dict(), calabi_composed=cH.to_dict(), defect=defect, tolerance=tol, holds=ok)
            lines += [f"Cal(G) = {cG}", f"Cal(F#G) = {cH}", f"|Cal(F#G) - Cal(F) - Cal(G)| = {defect:.3g} (tolerance {tol:.3g})"]
        else:
            sup = F.support()
            radius = float(np.max(sup[1] - sup[0]) / 2)
            center = (sup[0] + sup[1]) / 2
            spacing = args.spacing if args.spacing is not None else 2.2 * radius
            offsets = []
            for j in range(args.k):
                o = np.zeros_like(center)
                o[0] = (j - (args.k - 1) / 2) * spacing
                offsets.append(o)
            cfg = C.OrbitCopyConfig.translates(args.k, offsets, center, radius)
            reach = np.max(np.abs(offsets), axis=0) + np.maximum(np.abs(sup[0]), np.abs(sup[1]))
            half = max(float(np.max(F.box[1])), float(np.max(reach)) / (1 - 2 * C.COLLAR))
            H = C.orbit_copy(F, cfg, (-half, half))
            cH = C.calabi(H, **kw)
            defect = abs(cH.value - args.k * cF.value)
            tol = args.k * cF.error + cH.error
            ok = defect <= tol
            doc.update(k=args.k, spacing=spacing, calabi_copies=cH.to_dict(), defect=defect, tolerance=tol, holds=ok)
            lines += [f"Cal(copies) = {cH}", f"k Cal(F) = {args.k * cF.value:.12g}", f"defect {defect:.3g} (tolerance {tol:.3g})"]
    except (C.SupportError, ValueError) as exc:
        raise InputError(str(exc)) from None
    _emit(args, doc, "\n".join(lines) + "\n", t0)
    return 0 if ok else 1


# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sympobs", description="Chern-class obstructions, symplectic matrices and Calabi invariants.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp):
        sp.add_argument("--format", choices=["text", "structured"], default="text")

    for name, func, help_ in (
        ("check-manifold", cmd_check_manifold, "obstruction report for a manifold"),
        ("factor", cmd_factor, "search for an even factorization of the Chern class"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("target", nargs="?", help="catalog name or ring-spec file")
        sp.add_argument("--catalog", help=f"one of {', '.join(catalog.names())}")
        sp.add_argument("--spec", help="ring-spec file")
        sp.add_argument("--bound", type=_positive_int, help=f"coefficient bound (default ${BOUND_ENV} or 50)")
        sp.add_argument("--no-gcd", action="store_true", help="skip the gcd criterion")
        sp.add_argument("--no-elimination", action="store_true", help="skip exact elimination")
        sp.add_argument("--elimination-limit", type=int, default=4, help="max alpha unknowns for elimination")
        common(sp)
        sp.set_defaults(func=func)

    sp = sub.add_parser("perturb-matrix", help="rational-angle perturbation of an elliptic matrix")
    sp.add_argument("--input", required=True, help="matrix file (dimension line, then rows)")
    sp.add_argument("--eps", type=_positive_float, default=1e-3)
    sp.add_argument("--symplectic-tol", type=_positive_float, default=1e-8)
    common(sp)
    sp.set_defaults(func=cmd_perturb_matrix)

    sp = sub.add_parser("blend-verify", help="blend a map to its linearization and report defects")
    sp.add_argument("--map", default="cubic-shear", help=f"one of {', '.join(B.TEST_MAPS)}")
    sp.add_argument("--map-file", help="file with component lines 'Q = ...', 'P = ...' in q, p (or q1, q2, p1, p2)")
    sp.add_argument("--delta", type=_positive_float, action="append", help="may be repeated")
    sp.add_argument("--box", type=_positive_float, default=1.0)
    common(sp)
    sp.set_defaults(func=cmd_blend_verify)

    sp = sub.add_parser("calabi", help="Calabi invariant and its identities")
    sp.add_argument("--hamiltonian", required=True, help="e.g. rotator:center=0,0:inner=0.2:outer=0.5:amplitude=1")
    sp.add_argument("--op", choices=["cal", "compose", "orbit-copy"], default="cal")
    sp.add_argument("--second", help="second hamiltonian for --op compose")
    sp.add_argument("--k", type=_positive_int, default=3, help="number of copies for --op orbit-copy")
    sp.add_argument("--spacing", type=_positive_float, help="distance between copy centers")
    sp.add_argument("--volume", type=_positive_float, help="total volume V for sigma = -Cal/V")
    sp.add_argument("--points", type=_positive_int, default=128)
    sp.add_argument("--time-steps", type=_positive_int, default=64)
    sp.add_argument("--steps", type=_positive_int, default=C.DEFAULT_STEPS, help="flow steps per unit time")
    common(sp)
    sp.set_defaults(func=cmd_calabi)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    if getattr(args, "command", None) == "blend-verify" and not args.delta:
        args.delta = [0.2, 0.1, 0.05]
    try:
        return args.func(args)
    except InputError as exc:
        print(f"sympobs: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
