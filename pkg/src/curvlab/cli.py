"""``curvlab`` command-line front end.

Commands::

    verify --suite identities|closedform|all
    eval --kernel k0|kh|kh-star --part full|re|im --triple "x1,y1;x2,y2;x3,y3"
    sweep remark-c|remark-d|collapse|deficit
    search sign-change
    probe bound

Exit status: 0 on success, 1 when a verified invariant fails (or a search
runs out of budget), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .closedform import closed_forms_batch, product_c2hfactor, product_c2rh
from .errors import CurvlabError, SearchExhausted
from .experiments import (
    Box, ConstantCertificate, Disk, bound_probe, collapse_family_probe, interpolation_deficits,
    random_triples, remark_counterexample_sweep, sign_change_search,
)
from .geometry import Point, menger_curvature, menger_curvature_batch
from .hfunc import Constant, load_registry, resolve_h
from .kernels import Kind, KernelSpec, Part
from .symmform import Mode, symmetrize, symmetrize_batch

IDENTITY_TOL = 1e-9
CLOSED_FORM_TOL = 1e-8
VERIFY_BOX = Box(-10.0, 10.0, -10.0, 10.0)


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# Argument parsing helpers
# --------------------------------------------------------------------------

def _real(text: str) -> float:
    """A real number; constant expressions such as ``pi/2`` are accepted."""
    try:
        return float(text)
    except ValueError:
        pass
    try:
        h = resolve_h(text, {})
    except CurvlabError as exc:
        raise UsageError(f"not a real number: {text!r}") from exc
    if not isinstance(h, Constant):
        raise UsageError(f"not a constant: {text!r}")
    return h.value


def _reals(text: str) -> list[float]:
    items = [s for s in (t.strip() for t in text.split(",")) if s]
    if not items:
        raise UsageError("empty list")
    return [_real(s) for s in items]


def _point(text: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"malformed point {text!r}; expected 'x,y'")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise UsageError(f"malformed point {text!r}") from exc


def parse_triple(text: str) -> tuple[complex, complex, complex]:
    """``"x1,y1;x2,y2;x3,y3"`` to three complex numbers."""
    parts = text.split(";")
    if len(parts) != 3:
        raise UsageError(f"malformed triple {text!r}; expected 'x1,y1;x2,y2;x3,y3'")
    return tuple(_point(p) for p in parts)


def parse_domain(text: str):
    """``box:xmin,xmax,ymin,ymax`` or ``disk:cx,cy,r``."""
    kind, _, rest = text.partition(":")
    vals = _reals(rest) if rest else []
    if kind == "box" and len(vals) == 4 and vals[0] < vals[1] and vals[2] < vals[3]:
        return Box(*vals)
    if kind == "disk" and len(vals) == 3 and vals[2] > 0:
        return Disk(complex(vals[0], vals[1]), vals[2])
    raise UsageError(f"malformed domain {text!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--h", dest="h", help="registry name, expression, or 'base | x,y=value; ...'")
    common.add_argument("--registry", help="path to an h registry JSON file")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, help="override the verification tolerance")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))

    parser = _Parser(prog="curvlab", description="Symmetrized Cauchy-type kernels and Menger curvature.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", parents=[common], help="run an identity verification suite")
    p.add_argument("--suite", choices=("identities", "closedform", "all"), default="identities")
    p.add_argument("--samples", type=int, default=10_000)

    p = sub.add_parser("eval", parents=[common], help="evaluate one symmetrized form")
    p.add_argument("--kernel", choices=[k.value for k in Kind], default="kh")
    p.add_argument("--part", choices=[k.value for k in Part], default="full")
    p.add_argument("--triple", required=True)
    p.add_argument("--form", choices=("brute", "closed", "both"), default="both")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="full")
    p.add_argument("--compensated", action="store_true")

    sweep = sub.add_parser("sweep", help="parameter sweeps").add_subparsers(
        dest="sweep", required=True, parser_class=_Parser)
    for name, eps in (("remark-c", "pi/2"), ("remark-d", "pi/4")):
        p = sweep.add_parser(name, parents=[common])
        p.add_argument("--eps0", default=eps)
        p.add_argument("--lambda", dest="lambdas", default="10,1,0.1,0.01")
    p = sweep.add_parser("collapse", parents=[common])
    p.add_argument("--z2", default="1,0")
    p.add_argument("--beta", default="0.5")
    p.add_argument("--theta", default="1e-1,1e-2,1e-3,1e-4,1e-5,1e-6")
    p.add_argument("--side", choices=("rh", "h"), default="rh")
    p = sweep.add_parser("deficit", parents=[common])
    p.add_argument("--z1", default="0,0")
    p.add_argument("--z2", default="1,0")
    p.add_argument("--beta", default="0.1,0.25,0.5,0.75,0.9")

    search = sub.add_parser("search", help="searches").add_subparsers(
        dest="search", required=True, parser_class=_Parser)
    p = search.add_parser("sign-change", parents=[common])
    p.add_argument("--budget", type=int, default=200_000)
    p.add_argument("--domain", default="box:-1,1,-1,1")

    probe = sub.add_parser("probe", help="probes").add_subparsers(
        dest="probe", required=True, parser_class=_Parser)
    p = probe.add_parser("bound", parents=[common])
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--floor", default="1e-2")
    p.add_argument("--domain", default="disk:0,0,1")
    return parser


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def to_csv(rows: list[dict]) -> str:
    header: list[str] = []
    for row in rows:
        header.extend(k for k in row if k not in header)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(row.get(k)) for k in header])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Point):
        return [v.x, v.y]
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out!r}: {exc.strerror}") from exc


def _render(obj, rows, fmt: str) -> str:
    return to_csv(rows) if fmt == "csv" else to_json(obj)


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def _registry(args):
    try:
        return load_registry(args.registry)
    except OSError as exc:
        raise UsageError(f"cannot read registry: {exc}") from exc


def _h(args, registry=None, required=True):
    if args.h is None:
        if required:
            raise UsageError("--h is required")
        return None
    return resolve_h(args.h, _registry(args) if registry is None else registry)


def _tol(args, default: float) -> float:
    return default if args.tol is None else args.tol


def _check(name, samples, residuals, tol):
    m = float(np.max(residuals)) if len(residuals) else 0.0
    return {"name": name, "samples": int(samples), "max_residual": m, "tolerance": tol,
            "pass": bool(math.isfinite(m) and m <= tol)}


def _identity_checks(hs, z, c2, tol):
    scale = np.maximum(1.0, c2)
    n = len(z)
    k0 = KernelSpec("k0")
    full, imag = symmetrize_batch(k0, z)
    re, _ = symmetrize_batch(k0.with_part("re"), z)
    im, _ = symmetrize_batch(k0.with_part("im"), z)
    red, _ = symmetrize_batch(k0, z, Mode.REDUCED)
    checks = [
        _check("melnikov_k0", n, np.abs(full - c2) / scale, tol),
        _check("real_valued_k0", n, imag / scale, tol),
        _check("split_re_k0", n, np.abs(re - c2 / 2) / scale, tol),
        _check("split_im_k0", n, np.abs(im - c2 / 2) / scale, tol),
        _check("reduced_form_k0", n, np.abs(red - full) / scale, tol),
    ]
    for name, h in hs.items():
        s, _ = symmetrize_batch(KernelSpec("kh", h), z)
        checks.append(_check(f"phase_invariance:{name}", n, np.abs(s - c2) / scale, tol))
    return checks


def _closed_form_checks(hs, z, c2, tol):
    scale = np.maximum(1.0, c2)
    n = len(z)
    checks = []
    for name, h in hs.items():
        cf = closed_forms_batch(h, z)
        re, _ = symmetrize_batch(KernelSpec("kh", h, "re"), z)
        im, _ = symmetrize_batch(KernelSpec("kh", h, "im"), z)
        st, _ = symmetrize_batch(KernelSpec("kh-star", h), z)
        checks += [
            _check(f"closed_re_kh:{name}", n, np.abs(re - c2 * (0.5 + cf["rh"])) / scale, tol),
            _check(f"closed_im_kh:{name}", n, np.abs(im - c2 * (0.5 - cf["rh"])) / scale, tol),
            _check(f"closed_kh_star:{name}", n, np.abs(st - c2 * cf["hfactor"]) / scale, tol),
        ]
        if h.is_constant:
            checks += [
                _check(f"constant_rh_zero:{name}", n, np.abs(cf["rh"]), tol),
                _check(f"constant_h_one:{name}", n, np.abs(cf["hfactor"] - 1.0), tol),
            ]
    return checks


def cmd_verify(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    registry = _registry(args)
    hs = {args.h: _h(args, registry)} if args.h is not None else registry
    rng = np.random.default_rng(args.seed)
    z = random_triples(rng, VERIFY_BOX, args.samples, 1e-2)
    c2 = menger_curvature_batch(z) ** 2
    checks = []
    if args.suite in ("identities", "all"):
        checks += _identity_checks(hs, z, c2, _tol(args, IDENTITY_TOL))
    if args.suite in ("closedform", "all"):
        checks += _closed_form_checks(hs, z, c2, _tol(args, CLOSED_FORM_TOL))
    report = {"suite": args.suite, "seed": args.seed, "checks": checks}
    _emit(_render(report, checks, args.format or "json"), args.out)
    return 0 if all(c["pass"] for c in checks) else 1


def _closed_value(spec: KernelSpec, triple):
    """Closed form of S[K] through the collinear-safe products, or None."""
    c2 = menger_curvature(*triple) ** 2
    if spec.kind is Kind.K0 or (spec.kind is Kind.KH and spec.part is Part.FULL):
        return c2 if spec.part is Part.FULL else c2 / 2
    if spec.kind is Kind.KH:
        p = product_c2rh(spec.h, triple)
        return c2 / 2 + p if spec.part is Part.RE else c2 / 2 - p
    if spec.part is Part.FULL:
        return product_c2hfactor(spec.h, triple)
    return None


def cmd_eval(args) -> int:
    triple = parse_triple(args.triple)
    h = _h(args, required=args.kernel != "k0")
    spec = KernelSpec(args.kernel, h, args.part)
    row = {"kernel": spec.kind.value, "part": spec.part.value, "h": args.h, "triple": args.triple}
    brute = closed = None
    if args.form in ("brute", "both"):
        sv = symmetrize(spec, triple, args.mode, args.compensated)
        brute = sv.value
        row.update(brute_force=brute, imag_residual=sv.imag_residual)
    if args.form in ("closed", "both"):
        closed = _closed_value(spec, triple)
        row["closed_form"] = closed
    ok = True
    if brute is not None and closed is not None:
        residual = abs(brute - closed)
        tol = _tol(args, CLOSED_FORM_TOL)
        ok = residual <= tol * max(1.0, abs(closed))
        row.update(residual=residual, tolerance=tol, **{"pass": ok})
    _emit(_render(row, [row], args.format or "json"), args.out)
    return 0 if ok else 1


def _sweep_status(records, tol):
    return 0 if all(r.condition_flag or r.residual <= tol * max(1.0, abs(r.s_bruteforce)) for r in records) else 1


def cmd_sweep(args) -> int:
    registry = _registry(args)
    if args.sweep in ("remark-c", "remark-d"):
        records = remark_counterexample_sweep(args.sweep[-1], _real(args.eps0), _reals(args.lambdas))
    elif args.sweep == "collapse":
        records = collapse_family_probe(_h(args, registry), _point(args.z2), _real(args.beta),
                                        _reals(args.theta), args.side)
    else:
        z1, z2 = _point(args.z1), _point(args.z2)
        betas = _reals(args.beta)
        d = interpolation_deficits(_h(args, registry), z1, z2, betas)
        rows = [{"beta": b, "deficit": float(v)} for b, v in zip(betas, d)]
        report = {"z1": z1, "z2": z2, "max_deficit": float(np.max(d)), "rows": rows}
        _emit(_render(report, rows, args.format or "csv"), args.out)
        return 0
    rows = [r.as_row() for r in records]
    _emit(_render(rows, rows, args.format or "csv"), args.out)
    return _sweep_status(records, _tol(args, CLOSED_FORM_TOL))


def cmd_search(args) -> int:
    h = _h(args)
    try:
        result = sign_change_search(h, parse_domain(args.domain), args.budget, args.seed)
    except SearchExhausted as exc:
        report = {"result": "SearchExhausted", "message": str(exc), "partial": exc.partial}
        _emit(to_json(report), args.out)
        return 1
    if isinstance(result, ConstantCertificate):
        report = {"result": "ConstantCertificate", "pairs_tested": result.pairs_tested,
                  "max_gap": result.max_gap, "evaluations": result.evaluations}
    else:
        z1, z2, z0, t0 = result.seed_pair
        report = {
            "result": "SignChangeWitness",
            "triple_pos": result.triple_pos, "triple_neg": result.triple_neg,
            "rh_pos": result.values[0], "rh_neg": result.values[1],
            "half_plus_rh_pos": 0.5 + result.values[0], "half_plus_rh_neg": 0.5 + result.values[1],
            "s_re_kh_pos": result.verified[0], "s_re_kh_neg": result.verified[1],
            "seed_pair": {"z1": z1, "z2": z2, "z0": z0, "t0": t0},
            "params": result.params, "evaluations": result.evaluations,
        }
    if (args.format or "json") == "csv":
        flat = {k: v for k, v in report.items() if not isinstance(v, (dict, tuple))}
        _emit(to_csv([flat]), args.out)
    else:
        _emit(to_json(report), args.out)
    return 0


def cmd_probe(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    res = bound_probe(_h(args), parse_domain(args.domain), args.samples, _real(args.floor), args.seed)
    row = {"h": args.h, "samples": res.count, "min_angle_floor": res.min_angle_floor,
           "sup_abs_rh": res.sup_abs_rh}
    for k, p in enumerate(res.argmax_triple, start=1):
        row[f"z{k}_x"], row[f"z{k}_y"] = p.x, p.y
    _emit(_render(row, [row], args.format or "json"), args.out)
    return 0


COMMANDS = {"verify": cmd_verify, "eval": cmd_eval, "sweep": cmd_sweep, "search": cmd_search, "probe": cmd_probe}


def run_command(argv: list[str] | None = None) -> int:
    """Run one command and return its exit status."""
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"curvlab: error: {exc}", file=sys.stderr)
        return 2
    except CurvlabError as exc:
        print(f"curvlab: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
