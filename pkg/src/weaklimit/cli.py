"""Command-line harness: ``weaklimit {verify,table,density,coeffs}``.

Exit codes: 0 success, 1 internal error or failed verification,
2 invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import List, Optional, Sequence

import numpy as np

from .errors import ParameterDomainError
from .families import build_family, numeric_limit
from .limits import TestFunction, convergence_table
from .spectral import density_table, write_density_csv

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
MAX_N_ENV = "WEAKLIMIT_MAX_N"


class ConfigError(Exception):
    pass


def _int_list(text: str) -> List[int]:
    try:
        ns = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--ns expects comma-separated integers, got {text!r}")
    if not ns:
        raise ConfigError("--ns is empty")
    return ns


def _cap_ns(ns: List[int]) -> List[int]:
    cap = os.environ.get(MAX_N_ENV)
    if not cap:
        return ns
    try:
        cap_n = int(cap)
    except ValueError:
        raise ConfigError(f"{MAX_N_ENV} must be an integer, got {cap!r}")
    kept = [n for n in ns if n <= cap_n]
    if not kept:
        raise ConfigError(f"every n in {ns} exceeds {MAX_N_ENV}={cap_n}")
    return kept


def _family_params(args) -> dict:
    p = {}
    for key in ("a", "b", "c", "alpha", "base", "member", "scaling"):
        v = getattr(args, key)
        if v is not None:
            p[key] = v
    if args.beta is not None:
        p["beta"] = args.beta if args.beta == "half" else _float(args.beta, "--beta")
    if args.mode is not None:
        if args.family != "dual-hahn":
            raise ConfigError("--mode only applies to --family dual-hahn")
        if args.mode == "hermite":
            p["beta"] = "half"
        else:
            p.setdefault("beta", 1.0)
            if p["beta"] == "half":
                raise ConfigError("--mode laguerre needs a numeric --beta")
    return p


def _float(text: str, flag: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{flag} expects a number, got {text!r}")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table(args, family, limit):
    try:
        f = TestFunction.parse(args.f)
    except ValueError as exc:
        raise ConfigError(str(exc))
    ns = _cap_ns(_int_list(args.ns))
    return convergence_table(family, limit, args.k, args.l, f, ns)


def cmd_table(args, family, limit) -> int:
    table = _table(args, family, limit)
    _emit(table.to_csv() if args.format == "csv" else table.to_json(), args.out)
    for r in table.records:
        if r.failed:
            print(f"row n={r.n} failed: {r.error}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args, family, limit) -> int:
    table = _table(args, family, limit)
    ok = table.passes(args.threshold)
    verdict = (f"{'PASS' if ok else 'FAIL'}: final abs_error={table.final_error!r} "
               f"(threshold {args.threshold!r}), trend "
               f"{'decreasing' if table.trend_decreasing else 'not decreasing'}\n")
    if args.format == "csv":
        body = table.to_csv()
    else:
        body = json.dumps({"records": json.loads(table.to_json()), "pass": ok,
                           "threshold": args.threshold}, sort_keys=True, indent=1) + "\n"
    _emit(body, args.out)
    sys.stdout.write(verdict)
    for r in table.records:
        if r.failed:
            print(f"row n={r.n} failed: {r.error}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def _default_grid(limit) -> np.ndarray:
    if limit.bilateral.one_sided:
        lo, hi = (0.0, 20.0) if limit.classical[0] == "laguerre" else (-4.0, 4.0)
    else:
        a_half, b = limit.bilateral.constant
        lo, hi = b - 2.5 * a_half, b + 2.5 * a_half
    return np.linspace(lo, hi, 41)


def _classical_rows(limit, grid) -> np.ndarray:
    """Closed-form mu11 of a one-sided limit; mu12 and mu22 vanish on the continuum."""
    if limit.classical[0] == "laguerre":
        beta = limit.classical[1]
        pos = np.clip(grid, 0.0, None)
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = np.where(grid > 0, np.exp(beta * np.log(np.where(pos > 0, pos, 1.0))
                                             - pos - math.lgamma(beta + 1)), 0.0)
    else:
        dens = np.exp(-grid ** 2) / math.sqrt(math.pi)
    zero = np.zeros_like(grid)
    return np.column_stack([grid, dens, zero, zero])


def cmd_density(args, family, limit) -> int:
    if args.grid:
        parts = args.grid.split(",")
        if len(parts) != 3:
            raise ConfigError("--grid expects lo,hi,count")
        lo, hi = _float(parts[0], "--grid"), _float(parts[1], "--grid")
        count = int(_float(parts[2], "--grid"))
        if count < 1 or not hi >= lo:
            raise ConfigError(f"bad grid {args.grid!r}")
        grid = np.linspace(lo, hi, count)
    else:
        grid = _default_grid(limit)
    if args.epsilon <= 0:
        raise ConfigError("--epsilon must be positive")
    if limit.bilateral.one_sided:
        rows = _classical_rows(limit, grid)
    else:
        rows = density_table(limit.bilateral, grid, epsilon=args.epsilon)
    if args.format == "csv":
        buf = io.StringIO()
        write_density_csv(rows, buf)
        text = buf.getvalue()
    else:
        keys = ("x", "mu11", "mu12", "mu22")
        text = json.dumps([dict(zip(keys, map(float, r))) for r in rows], indent=1) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_coeffs(args, family, limit) -> int:
    ns = _cap_ns(_int_list(args.ns))
    window = range(-args.window, args.window + 1)
    rows = []
    for n in ns:
        c = family.coefficients(n)
        for j in window:
            if n + j < 1:
                continue
            rows.append({"n": n, "j": j, "a": c.a(n + j), "b": c.b(n + j)})
    limits = []
    for j in window:
        est = numeric_limit(family, j)
        limits.append({"j": j, "numeric_a": est.a, "numeric_b": est.b,
                       "limit_a": limit.bilateral.a(j), "limit_b": limit.bilateral.b(j),
                       "converged": est.converged})
    flags = []
    est0 = numeric_limit(family, 0)
    for key, value in sorted(limit.printed.items()):
        numeric = est0.a if key == "a" else est0.b
        agree = abs(numeric - value) <= 1e-3 * max(1.0, abs(value))
        flags.append({"coefficient": key, "printed": value, "numeric": numeric,
                      "status": "ok" if agree else "MISMATCH"})
    if args.format == "json":
        text = json.dumps({"family": family.descriptor(), "rows": rows, "limits": limits,
                           "printed": flags, "note": limit.closed_form_note},
                          sort_keys=True, indent=1) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "j", "a", "b"])
        for r in rows:
            w.writerow([r["n"], r["j"], repr(r["a"]), repr(r["b"])])
        buf.write("\n")
        w.writerow(["j", "numeric_a", "numeric_b", "limit_a", "limit_b", "converged"])
        for r in limits:
            w.writerow([r["j"], repr(r["numeric_a"]), repr(r["numeric_b"]),
                        repr(r["limit_a"]), repr(r["limit_b"]), r["converged"]])
        if flags:
            buf.write("\n")
            w.writerow(["coefficient", "printed", "numeric", "status"])
            for r in flags:
                w.writerow([r["coefficient"], repr(r["printed"]), repr(r["numeric"]), r["status"]])
        text = buf.getvalue()
    _emit(text, args.out)
    for r in flags:
        if r["status"] != "ok":
            print(f"note: limit of {r['coefficient']} is {r['numeric']:.10g}, "
                  f"printed value {r['printed']:g} does not match", file=sys.stderr)
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "table": cmd_table, "density": cmd_density, "coeffs": cmd_coeffs}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weaklimit",
                                     description="Weak limits of orthogonal polynomial families.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--family", required=True,
                       choices=["mab", "rescaled", "wall", "jacobi", "laguerre", "dual-hahn"])
        for key in ("a", "b", "c", "alpha"):
            p.add_argument(f"--{key}", type=float)
        p.add_argument("--beta", help="number, or 'half' for the dual Hahn Hermite mode")
        p.add_argument("--mode", choices=["laguerre", "hermite"], help="dual Hahn limit type")
        p.add_argument("--scaling", choices=["linear", "hermite"])
        p.add_argument("--base", choices=["laguerre", "hermite"], help="rescaled family base")
        p.add_argument("--member", choices=["exact", "perturbed"], help="M(a,b) member")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--out")
        p.add_argument("--ns", default="50,100,200,400")
        if name in ("verify", "table"):
            p.add_argument("--k", type=int, default=0)
            p.add_argument("--l", type=int, default=0)
            p.add_argument("--f", default="x^2")
        if name == "verify":
            p.add_argument("--threshold", type=float, default=1e-2)
        if name == "density":
            p.add_argument("--epsilon", type=float, default=1e-4)
            p.add_argument("--grid", help="lo,hi,count")
        if name == "coeffs":
            p.add_argument("--window", type=int, default=2)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        family, limit = build_family(args.family, **_family_params(args))
        return COMMANDS[args.command](args, family, limit)
    except (ConfigError, ParameterDomainError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
