"""Command-line front end.

    fmbounds eval    --kind c0 --B 1/2 433013/500000
    fmbounds global  --kind c1 --out c1.json
    fmbounds tables
    fmbounds contour --kind ccr --nx 11 --ny 11 --out ccr.csv
    fmbounds selftest

Exit codes: 0 success, 1 incomplete or uncertified result, 2 usage error,
3 soundness violation (a certified lower bound above a certified upper one).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from fractions import Fraction

from . import __version__
from .constants import ConstantKind, SoundnessError, constant_bounds
from .interval import BoundInterval, decimal_str, parse_rational

EXIT_OK, EXIT_INCOMPLETE, EXIT_USAGE, EXIT_SOUNDNESS = 0, 1, 2, 3

DEFAULTS = {
    "kind": "c0",
    "B": None,
    "level": None,  # per verb: eval 4, global 5, contour 3
    "degree": 7,
    "rel_tol": "1/10000000",
    "mode": "certified",
    "grid_mult": 1,
    "workers": 1,
    "out": None,
    "format": "json",
    "digits": 9,
    "nx": 11,
    "ny": 11,
    "bootstrap": False,
    "exact": False,
    "timing": False,
}
VERB_LEVEL = {"eval": 4, "global": 5, "tables": None, "contour": 3, "selftest": 1}
KINDS = [k.value for k in ConstantKind]


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ parsing


def _rational_arg(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # defaults are None so that config files can fill the gaps
    common.add_argument("--kind", choices=KINDS)
    common.add_argument("--B", nargs=2, metavar=("X", "Y"), type=_rational_arg,
                        help="vertex B of the triangle O(0,0) A(1,0) B (p/q or decimal)")
    common.add_argument("--level", type=_positive_int, help="red-refinement level")
    common.add_argument("--degree", type=_positive_int, help="polynomial degree for the lower bound (0: none)")
    common.add_argument("--rel-tol", dest="rel_tol", type=_rational_arg)
    common.add_argument("--mode", choices=["approx", "certified"])
    common.add_argument("--grid-mult", dest="grid_mult", type=_positive_int)
    common.add_argument("--workers", type=_positive_int)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--digits", type=_positive_int, help="decimal digits in output (directed rounding)")
    common.add_argument("--config", help="flat key=value file; flags take precedence")
    common.add_argument("--bootstrap", action="store_true", default=None,
                        help="use the re-proved global constants in C_h")
    common.add_argument("--exact", action="store_true", default=None, help="also emit exact p/q bounds")
    common.add_argument("--timing", action="store_true", default=None,
                        help="include wall times (breaks byte-identical output)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="fmbounds", description="Guaranteed bounds of interpolation error constants.")
    p.add_argument("--version", action="version", version=f"fmbounds {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("eval", parents=[common], help="two-sided bound on one triangle")
    sub.add_parser("global", parents=[common], help="certified sup over all shapes (c0 or c1)")
    sub.add_parser("tables", parents=[common], help="Lagrange and Fujino-Morley constants on four triangles")
    c = sub.add_parser("contour", parents=[common], help="approximate values on a grid (CSV)")
    c.add_argument("--nx", type=_positive_int)
    c.add_argument("--ny", type=_positive_int)
    sub.add_parser("selftest", parents=[common], help="quick internal consistency checks")
    return p


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment; B takes two values."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"--config: {exc}") from None
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"--config {path}:{n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"--config {path}:{n}: unknown key {key!r}")
        out[key] = _config_value(key, val, f"{path}:{n}")
    return out


def _config_value(key, val, where):
    try:
        if key == "B":
            parts = val.replace(",", " ").split()
            if len(parts) != 2:
                raise ValueError("B needs two numbers")
            return [parse_rational(x) for x in parts]
        if key in ("level", "degree", "grid_mult", "workers", "digits", "nx", "ny"):
            return int(val)
        if key == "rel_tol":
            return parse_rational(val)
        if key in ("bootstrap", "exact", "timing"):
            if val.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(f"not a boolean: {val!r}")
            return val.lower() in ("true", "1", "yes")
        if key == "kind" and val not in KINDS:
            raise ValueError(f"unknown kind {val!r}")
        if key == "mode" and val not in ("approx", "certified"):
            raise ValueError(f"unknown mode {val!r}")
        if key == "format" and val not in ("json", "csv"):
            raise ValueError(f"unknown format {val!r}")
        return val
    except ValueError as exc:
        raise UsageError(f"--config {where}: {key}: {exc}") from None


def resolve(ns: argparse.Namespace) -> dict:
    """Merge flags > config file > defaults."""
    cfg = dict(DEFAULTS)
    cfg["level"] = VERB_LEVEL.get(ns.command)
    if ns.command == "contour":
        cfg["format"] = "csv"
    if getattr(ns, "config", None):
        cfg.update(read_config(ns.config))
    for key in DEFAULTS:
        v = getattr(ns, key, None)
        if v is not None:
            cfg[key] = v
    cfg["command"] = ns.command
    cfg["rel_tol"] = parse_rational(cfg["rel_tol"]) if isinstance(cfg["rel_tol"], str) else cfg["rel_tol"]
    if cfg["rel_tol"] <= 0:
        raise UsageError("--rel-tol must be positive")
    if cfg["grid_mult"] < 1:
        raise UsageError("--grid-mult must be >= 1")
    return cfg


def config_record(cfg: dict) -> dict:
    out = {}
    for k in sorted(cfg):
        v = cfg[k]
        if isinstance(v, Fraction):
            v = str(v)
        elif isinstance(v, (list, tuple)):
            v = [str(x) for x in v]
        out[k] = v
    return out


# --------------------------------------------------------------- rendering


def bound_record(b: BoundInterval, digits: int, exact: bool = False) -> dict:
    rec = {"lo": decimal_str(b.lo, digits, "down"), "hi": decimal_str(b.hi, digits, "up")}
    if exact:
        rec["lo_exact"] = str(b.lo)
        rec["hi_exact"] = str(b.hi)
    return rec


def _frac(x) -> str:
    return str(Fraction(x))


def result_record(res, cfg) -> dict:
    t = res.triangle
    rec = {
        "triangle": [[_frac(p.x), _frac(p.y)] for p in t.vertices],
        "kind": res.kind.value,
        **bound_record(res.bound, cfg["digits"], cfg["exact"]),
        "level": res.level,
        "degree": res.degree,
        "certified": res.certified,
        "notes": list(res.notes),
    }
    if cfg["timing"]:
        rec["wall_time"] = round(res.wall_time, 3)
    return rec


def report_record(rep, cfg) -> dict:
    d = cfg["digits"]
    segs = []
    for k, s in enumerate(rep.segments):
        segs.append({
            "index": k,
            "part": s.part,
            "interval": [_frac(s.interval[0]), _frac(s.interval[1])],
            "sample": [_frac(s.sample[0]), _frac(s.sample[1])],
            "point_hi": decimal_str(s.point.hi, d, "up"),
            "factor_hi": decimal_str(s.factor.factor.hi, d, "up"),
            "rule": s.factor.rule,
            "covered_hi": decimal_str(s.covered.hi, d, "up"),
            "certified": s.certified,
        })
    parts = {name: decimal_str(rep.part_sup(name), d, "up") for name in rep.domains}
    return {
        "constant": rep.constant.value,
        "level": rep.level,
        "global_sup": bound_record(rep.global_sup, d, cfg["exact"]),
        "part_sup": parts,
        "complete": rep.complete,
        "domains": {k: [_frac(a), _frac(b)] for k, (a, b) in rep.domains.items()},
        "notes": list(rep.notes),
        "segments": segs,
    }


def dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def emit(text: str, cfg: dict) -> None:
    if cfg["out"]:
        with open(cfg["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def envelope(cfg: dict, result) -> dict:
    return {"meta": {"version": __version__, "config": config_record(cfg)}, "result": result}


# ----------------------------------------------------------------- verbs


def cmd_eval(cfg: dict) -> int:
    if cfg["B"] is None:
        raise UsageError("eval needs --B X Y")
    if cfg["format"] != "json":
        raise UsageError("--format csv is only available for contour")
    bx, by = cfg["B"]
    degree = cfg["degree"] or None
    res = constant_bounds((bx, by), cfg["kind"], cfg["level"], degree, cfg["rel_tol"], cfg["mode"],
                          cfg["bootstrap"])
    emit(dump_json(envelope(cfg, result_record(res, cfg))), cfg)
    return EXIT_OK if res.certified else EXIT_INCOMPLETE


def cmd_global(cfg: dict) -> int:
    from .sweep import optimize_c0, optimize_c1

    if cfg["format"] != "json":
        raise UsageError("--format csv is only available for contour")
    kind = cfg["kind"]
    if kind not in ("c0", "c1"):
        raise UsageError(f"--kind: global sweeps exist for c0 and c1, not {kind}")
    fn = optimize_c0 if kind == "c0" else optimize_c1
    start = time.perf_counter()
    rep = fn(level=cfg["level"], rel_tol=cfg["rel_tol"], mode=cfg["mode"], grid_mult=cfg["grid_mult"],
             workers=cfg["workers"])
    rec = report_record(rep, cfg)
    if cfg["timing"]:
        rec["wall_time"] = round(time.perf_counter() - start, 3)
    emit(dump_json(envelope(cfg, rec)), cfg)
    hi = decimal_str(rep.global_sup.hi, cfg["digits"], "up")
    print(f"SUP {kind} <= {hi} certified={str(rep.complete).lower()}", file=sys.stderr)
    return EXIT_OK if rep.complete else EXIT_INCOMPLETE


def cmd_tables(cfg: dict) -> int:
    from .tables import TABLE_ENTRIES, agreement, evaluate_entry

    if cfg["format"] != "json":
        raise UsageError("--format csv is only available for contour")
    rows = []
    all_ok = True
    for e in TABLE_ENTRIES:
        # a --level flag overrides the per-row levels
        res = evaluate_entry(e, level=cfg["level"], rel_tol=cfg["rel_tol"], mode=cfg["mode"])
        agr = agreement(res.bound, e)
        all_ok = all_ok and agr["ok"] and res.certified
        rec = result_record(res, cfg)
        rec.update({"table": e.table, "vertex": e.vertex, "printed": e.printed,
                    "underlined": e.underlined, **agr})
        rows.append(rec)
        log.info("%s %s %s [%s, %s] ok=%s", e.table, e.vertex, e.kind.value, rec["lo"], rec["hi"], agr["ok"])
    emit(dump_json(envelope(cfg, {"rows": rows, "all_ok": all_ok})), cfg)
    return EXIT_OK if all_ok else EXIT_INCOMPLETE


def contour_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "b", "value"])
    for a, b, v in rows:
        w.writerow([_decimal(a), _decimal(b), "" if v is None else f"{v:.9f}"])
    return buf.getvalue()


def _decimal(q: Fraction) -> str:
    return decimal_str(q, 9, "down") if q.denominator != 1 else str(q.numerator)


def cmd_contour(cfg: dict) -> int:
    from .sweep import contour_grid

    rows = contour_grid(cfg["kind"], cfg["nx"], cfg["ny"], cfg["level"], cfg["workers"])
    if cfg["format"] == "csv":
        emit(contour_csv(rows), cfg)
    else:
        grid = [{"a": _frac(a), "b": _frac(b), "value": None if v is None else f"{v:.9f}"} for a, b, v in rows]
        emit(dump_json(envelope(cfg, {"kind": cfg["kind"], "grid": grid})), cfg)
    return EXIT_OK


def cmd_selftest(cfg: dict) -> int:
    from .constants import scaling_check
    from .eigencert import certify_lower, eig_enclose
    from .assembly import FormPair
    from .geometry import canonical_triangle
    from .sparse import RationalMatrix

    checks = []
    t = canonical_triangle(Fraction(1, 2), Fraction(7, 8))
    for kind in ("c0", "c1", "ccr"):
        r = scaling_check(t, 2, kind, level=1)
        checks.append((f"scaling {kind}", r.matrices_scale_exactly and r.bound_ratio_exact))
    m = RationalMatrix.from_dense([[2, 1], [1, 2]])
    pair = FormPair(m, RationalMatrix.identity(2), None, "selftest")
    checks.append(("certify 2x2 below", certify_lower(pair, Fraction(99, 100))))
    checks.append(("reject 2x2 above", not certify_lower(pair, Fraction(101, 100))))
    enc = eig_enclose(pair)
    checks.append(("enclose 2x2", enc.value.contains(1)))
    res = constant_bounds((Fraction(1, 2), Fraction(7, 8)), "c0", 2, 5)
    checks.append(("c0 two-sided", res.bound.lo <= res.bound.hi and res.certified))
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return EXIT_OK if all(ok for _, ok in checks) else EXIT_INCOMPLETE


VERBS = {"eval": cmd_eval, "global": cmd_global, "tables": cmd_tables, "contour": cmd_contour,
         "selftest": cmd_selftest}
log = logging.getLogger("fmbounds")


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(ns)
        return VERBS[ns.command](cfg)
    except UsageError as exc:
        print(f"fmbounds: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SoundnessError as exc:
        print(f"fmbounds: soundness violation: {exc}", file=sys.stderr)
        return EXIT_SOUNDNESS
    except ValueError as exc:
        # domain errors such as degenerate triangles are usage errors
        print(f"fmbounds: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
