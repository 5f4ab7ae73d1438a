"""Batch command-line interface: one job per invocation, one JSON report out."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
import warnings
from fractions import Fraction
from typing import Callable

from . import filtered_complex as fc
from .affine_geom import check_admissible_inclusion, characteristic_limit, validate_polygon
from .errors import NovsyzError, SchemaError
from .io import Document, canonical_json, digest, load_json, parse_document, write_text
from .novikov import GroundField
from .smoothing import smooth_polygon
from .spectral import limit_page, spectral_sequence
from .svg import render_svg
from .symbols import ExponentScalar, scalar_to_json
from .telescope import build_telescope
from .tropical import (
    build_fan,
    e1_page,
    laurent_check,
    period_spectrum,
    restriction_map,
    rh_module,
    stanley_reisner_presentation,
    torsion_criterion,
)

DEFAULT_PRECISION = "5"
EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2


class Job:
    """Parsed inputs and options of one invocation."""

    def __init__(self, args: argparse.Namespace, doc: Document):
        self.args = args
        self.doc = doc
        self.status = EXIT_OK

    def scalar(self, text: str | None, name: str) -> ExponentScalar:
        if text is None:
            raise SchemaError(f"--{name} is required for this command", "")
        text = text.strip()
        try:
            if text.startswith("{"):
                return self.doc.table.scalar(json.loads(text))
            return ExponentScalar.rational(Fraction(text))
        except (ValueError, ZeroDivisionError, json.JSONDecodeError) as exc:
            raise SchemaError(f"bad value for --{name}: {text!r}", "") from exc

    @property
    def precision(self) -> ExponentScalar:
        return self.scalar(self.args.precision or os.environ.get("NOVSYZ_PRECISION") or DEFAULT_PRECISION,
                           "precision")

    @property
    def field(self) -> GroundField:
        text = self.args.field.strip()
        if text in ("Q", "QQ"):
            return GroundField.rationals()
        if text.startswith("F") and text[1:].isdigit():
            try:
                return GroundField.prime(int(text[1:]))
            except ValueError as exc:
                raise SchemaError(str(exc), "") from exc
        raise SchemaError(f"bad --field {text!r}: use Q or F<p>", "")

    def expect(self, *kinds: str):
        if self.doc.kind not in kinds:
            raise SchemaError(f"command {self.args.command!r} needs a {' or '.join(kinds)} document, "
                              f"got {self.doc.kind}", "")
        return self.doc.value

    def svg(self, obj, **kwargs):
        if self.args.svg:
            render_svg(obj, self.args.svg, **kwargs)


# -- commands ----------------------------------------------------------------------


def cmd_validate(job: Job) -> dict:
    kind, v = job.doc.kind, job.doc.value
    if kind == "polygon":
        rep = validate_polygon(v)
        job.status = EXIT_OK if rep.valid else EXIT_NEGATIVE
        job.svg(v)
        return rep.to_json()
    if kind == "complex":
        rep = fc.validate_complex(v)
        job.status = EXIT_OK if rep.valid else EXIT_NEGATIVE
        return rep.to_json()
    if kind == "ray":
        errors = v.validation_errors()
        job.status = EXIT_OK if not errors else EXIT_NEGATIVE
        return {"valid": not errors, "errors": errors}
    if kind == "inclusion":
        P, Q = v
        return check_admissible_inclusion(Q, P).to_json()
    P, pieces = v
    return {"pieces": [check_admissible_inclusion(p.polygon, P).to_json() for p in pieces]}


def cmd_fan(job: Job) -> dict:
    fan = build_fan(job.expect("polygon"))
    job.svg(fan)
    return fan.to_json()


def cmd_periods(job: Job) -> dict:
    P = job.expect("polygon")
    spectrum = period_spectrum(P, job.scalar(job.args.bound, "bound"))
    out = spectrum.to_json()
    out["gap_float"] = round(float(spectrum.gap), 12)
    return out


def _betti(job: Job):
    if job.args.betti is None:
        return None
    try:
        return tuple(int(x) for x in job.args.betti.split(","))
    except ValueError as exc:
        raise SchemaError(f"bad --betti {job.args.betti!r}", "") from exc


def cmd_rh(job: Job) -> dict:
    P = job.expect("polygon")
    return rh_module(P, job.scalar(job.args.bound, "bound"), _betti(job), job.args.injective).to_json()


def cmd_e1(job: Job) -> dict:
    P = job.expect("polygon")
    rh = rh_module(P, job.scalar(job.args.bound, "bound"), _betti(job), job.args.injective)
    page = e1_page(rh, job.scalar(job.args.hbar, "hbar"), job.args.levels)
    return {"module_ranks": [rh.rank(d) for d in range(3)],
            "entries": [{"p": p, "q": q, "rank": page.free_rank(p, q)} for p, q in sorted(page.entries)],
            "differentials": len(page.differentials)}


def cmd_restrict(job: Job) -> dict:
    P, Q = job.expect("inclusion")
    betti_map = None
    if job.args.betti_map:
        raw = json.loads(job.args.betti_map)
        betti_map = {int(k): v for k, v in raw.items()}
    inc = check_admissible_inclusion(Q, P)
    return restriction_map(P, Q, inc, job.scalar(job.args.bound, "bound"), betti_map).to_json()


def cmd_presentation(job: Job) -> dict:
    return stanley_reisner_presentation(job.expect("polygon"), job.field).to_json()


def cmd_laurent(job: Job) -> dict:
    P, Q = job.expect("inclusion")
    return laurent_check(P, Q, field=job.field).to_json()


def cmd_torsion(job: Job) -> dict:
    P, pieces = job.expect("cover")
    return {"verdicts": [v.to_json() for v in torsion_criterion(P, pieces)]}


def cmd_barcode(job: Job) -> dict:
    c = job.expect("complex")
    bc = fc.barcode(c, job.precision)
    job.svg(bc)
    out = bc.to_json()
    out["torsion_free"] = {str(d): fc.is_torsion_free(bc, d) for d in c.degrees()}
    return out


def cmd_telescope(job: Job) -> dict:
    ray = job.expect("ray")
    mu = job.precision
    tel = build_telescope(ray, mu)
    bc = fc.barcode(tel, mu)
    job.svg(bc)
    acyclic = not bc.bars
    summary = f"acyclic modulo T^{mu}" if acyclic else f"{len(bc.bars)} bars modulo T^{mu}"
    return {"generators": len(tel), "acyclic": acyclic, "summary": summary, "barcode": bc.to_json()}


def cmd_ss(job: Job) -> dict:
    c = job.expect("complex")
    hbar = job.scalar(job.args.hbar, "hbar")
    mu = job.precision
    if float(hbar) >= float(mu):
        raise SchemaError("--hbar must be below the working precision", "")
    pages = spectral_sequence(c, hbar, job.args.pages, mu)
    limit = limit_page(c, hbar, mu)
    return {"pages": [p.to_json() for p in pages], "limit": limit.to_json()}


def cmd_smooth(job: Job) -> dict:
    P = job.expect("polygon")
    s = job.scalar(job.args.s, "s")
    sp = smooth_polygon(P, float(s), mode=job.args.mode, tau=job.args.tau)
    pts = sp.boundary(job.args.samples)
    limits = [sp.argmax(v, job.args.samples) for v in ((1, 0), (0, 1), (-1, 0), (0, -1))]
    job.svg(P, samples=pts, limit_points=limits)
    return {"s": scalar_to_json(s), "mode": job.args.mode, "tau": round(sp.tau, 12),
            "strictly_convex": sp.is_strictly_convex(job.args.samples),
            "samples": [[round(x, 9), round(y, 9)] for x, y in pts],
            "characteristic_limits": [{"covector": list(v), "face": str(characteristic_limit(P, v)),
                                       "argmax": [round(x, 9), round(y, 9)]}
                                      for v, (x, y) in zip(((1, 0), (0, 1), (-1, 0), (0, -1)), limits)]
            if P.is_regular else []}


COMMANDS: dict[str, Callable[[Job], dict]] = {
    "validate": cmd_validate, "fan": cmd_fan, "periods": cmd_periods, "rh": cmd_rh, "e1": cmd_e1,
    "restrict": cmd_restrict, "presentation": cmd_presentation, "laurent": cmd_laurent,
    "torsion": cmd_torsion, "barcode": cmd_barcode, "telescope": cmd_telescope, "ss": cmd_ss,
    "smooth": cmd_smooth,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="novsyz", description="Barcodes, spectral sequences and tropical "
                                     "invariants of polygons over integral affine bases.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("input", help="path to a JSON document, or inline JSON")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--svg", help="also write an SVG plot")
        p.add_argument("--precision", help="working precision mu (default: $NOVSYZ_PRECISION or 5)")
        p.add_argument("--field", default="Q", help="ground field for coefficients: Q or Fp (e.g. F2)")
        if name in ("periods", "rh", "e1", "restrict"):
            p.add_argument("--bound", help="action bound a")
        if name in ("rh", "e1"):
            p.add_argument("--betti", help="comma separated betti numbers of the preimage")
            p.add_argument("--injective", action="store_true", help="restriction to the boundary is injective")
        if name in ("e1", "ss"):
            p.add_argument("--hbar", help="filtration step")
        if name == "e1":
            p.add_argument("--levels", type=int, help="number of filtration levels")
        if name == "ss":
            p.add_argument("--pages", type=int, default=3, help="number of pages")
        if name == "restrict":
            p.add_argument("--betti-map", help='JSON map degree -> matrix, e.g. {"1": [[1,0],[0,1]]}')
        if name == "smooth":
            p.add_argument("--s", default="1/2", help="smoothing parameter")
            p.add_argument("--samples", type=int, default=360)
            p.add_argument("--mode", choices=("coupled", "decoupled"), default="coupled")
            p.add_argument("--tau", type=float, help="log-sum-exp temperature (decoupled mode)")
    return parser


def _options(args: argparse.Namespace) -> dict:
    skip = {"input", "out", "svg", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def run(args: argparse.Namespace) -> tuple[dict, int]:
    start = time.perf_counter()
    report: dict = {"command": args.command, "options": _options(args)}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            raw = load_json(args.input)
            report["input_digest"] = digest(raw)
            job = Job(args, parse_document(raw))
            report["input_kind"] = job.doc.kind
            report["results"] = COMMANDS[args.command](job)
            status = job.status
        except (NovsyzError, ValueError, ArithmeticError) as exc:
            report.setdefault("input_digest", None)
            report["results"] = None
            report["error"] = {"type": type(exc).__name__, "message": str(exc)}
            if isinstance(exc, SchemaError):
                report["error"]["pointer"] = exc.pointer
            status = EXIT_ERROR
    report["warnings"] = [{"category": w.category.__name__, "message": str(w.message)} for w in caught]
    report["status"] = status
    report["timing"] = {"seconds": round(time.perf_counter() - start, 6)}
    return report, status


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    report, status = run(args)
    text = canonical_json(report) + "\n"
    if args.out:
        try:
            write_text(args.out, text)
        except NovsyzError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_ERROR
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
