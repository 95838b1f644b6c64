"""Command-line front end.

Every command writes a table: CSV with a ``#`` preamble by default, or a
JSON document with ``--format json``.  Exit status is 0 on success, 1 on
bad input and 2 when an internal consistency check fails.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from fractions import Fraction
from typing import Any, Callable, Sequence

from . import __version__
from .analytic import discrepancy_scan, dl_summatory, ds_summatory, main_term_report
from .arith import as_fraction, is_prime
from .buchstab import (
    ExponentRegion,
    build_region_U,
    buchstab_grid,
    buchstab_integral,
    omega,
    omega_upper,
    sieve_plan,
)
from .cache import ApCache, default_cache_path
from .curves import CurveFp, GroupStructureError, enumerate_d1_values, group_structure
from .quadrature import QuadratureError
from .torsion import (
    PROXY_MODES,
    SieveConfig,
    admissible_traces,
    admissible_trace,
    d1_set,
    dl_set,
    ds_set,
    dx_count,
    scan_outside,
)

# flags that change how a run executes but not what it computes
_NOT_ECHOED = {"command", "config", "output", "format", "threads", "cache", "handler"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with status 2
        self.print_usage(sys.stderr)
        raise UsageError(message)


# -- output -----------------------------------------------------------------------


def _cell(v: Any) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (set, frozenset, list, tuple)):
        return ";".join(str(x) for x in sorted(v))
    if v is None:
        return ""
    return str(v)


def _jsonable(v: Any) -> Any:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (set, frozenset)):
        return sorted(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


class Table:
    def __init__(self, columns: Sequence[str], rows: list[Sequence[Any]], meta: dict | None = None):
        self.columns = list(columns)
        self.rows = rows
        self.meta = meta or {}


def _render(table: Table, args: argparse.Namespace) -> str:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED}
    if args.format == "json":
        doc = {
            "command": args.command,
            "version": __version__,
            "seed": args.seed,
            "config": _jsonable(config),
            "meta": _jsonable(table.meta),
            "columns": table.columns,
            "rows": [_jsonable(list(r)) for r in table.rows],
        }
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"
    lines = [
        f"# command: {args.command}",
        f"# version: {__version__}",
        f"# seed: {args.seed}",
        "# config: " + " ".join(f"{k}={_cell(v)}" for k, v in config.items()),
    ]
    lines += [f"# {k}: {_cell(v)}" for k, v in table.meta.items()]
    lines.append(",".join(table.columns))
    lines += [",".join(_cell(c) for c in r) for r in table.rows]
    return "\n".join(lines) + "\n"


# -- commands ---------------------------------------------------------------------


def _prime(p: int) -> int:
    if p < 5 or not is_prime(p):
        raise ValueError(f"{p} is not a prime >= 5")
    return p


def _cache(args) -> ApCache | None:
    path = args.cache or default_cache_path()
    return ApCache(path) if path else None


def cmd_scan_outside(args) -> Table:
    if args.mode not in PROXY_MODES:
        raise ValueError(f"mode must be one of {PROXY_MODES}")
    recs = scan_outside(
        args.a, args.b, args.p_max, args.mode, args.method, args.threads, _cache(args), seed=args.seed
    )
    rows = [(r.p, r.d, r.a, r.galois_proxy, r.mode) for r in recs]
    return Table(["p", "d", "a", "galois_proxy", "mode"], rows, {"outside_primes": len({r.p for r in recs})})


def cmd_group_structure(args) -> Table:
    p = _prime(args.p)
    if (4 * args.a**3 + 27 * args.b**2) % p == 0:
        raise ValueError(f"the curve is singular mod {p}")
    curve = CurveFp(p, args.a, args.b)
    cache = _cache(args)
    cached = cache.get(p, args.a, args.b) if cache else None
    gs = group_structure(curve, seed=args.seed, a_p=cached)
    if cache is not None and cached is None:
        cache.put(p, args.a, args.b, gs.a_p)
    return Table(["p", "A", "B", "N", "a_p", "d1", "d2"], [(p, args.a, args.b, gs.N, gs.a_p, gs.d1, gs.d2)])


def cmd_trace(args) -> Table:
    p = _prime(args.p)
    if args.d < 1:
        raise ValueError("d must be positive")
    return Table(["p", "d", "a", "all"], [(p, args.d, admissible_trace(p, args.d), admissible_traces(p, args.d))])


def cmd_dsets(args) -> Table:
    p = _prime(args.p)
    return Table(["p", "ds", "dl", "d1"], [(p, ds_set(p), dl_set(p), d1_set(p))])


def cmd_ds_sum(args) -> Table:
    v, c = ds_summatory(args.x)
    return Table(["X", "value", "normalized", "c"], [(args.x, v, v / (args.x / 4), c)])


def cmd_dl_sum(args) -> Table:
    v, m = dl_summatory(args.x)
    return Table(["X", "value", "main"], [(args.x, v, m)])


def cmd_main_term(args) -> Table:
    r = main_term_report(args.x, args.theta)
    return Table(["X", "theta", "sum_value", "closed_form", "ratio", "empty"], [tuple(asdict(r).values())])


def cmd_discrepancy(args) -> Table:
    cfg = SieveConfig(as_fraction(args.theta), as_fraction(args.eta))
    rows, summary = discrepancy_scan(args.x, cfg, args.family)
    meta = {f"summary.{k}": v for k, v in asdict(summary).items()}
    return Table(
        ["d", "observed", "expected", "relative_error"],
        [(r.d, r.observed, r.expected, r.relative_error) for r in rows],
        meta,
    )


def cmd_buchstab_eval(args) -> Table:
    rows = []
    for u in args.u:
        if u < 1:
            raise ValueError("omega needs u >= 1")
        rows.append((u, omega(u), omega_upper(u)))
    return Table(["u", "omega", "omega_upper"], rows)


def cmd_buchstab_integral(args) -> Table:
    if args.region:
        with open(args.region, encoding="utf-8") as fh:
            region = ExponentRegion.from_text(fh.read())
    else:
        region = build_region_U(as_fraction(args.theta), as_fraction(args.eta))
    value, err = buchstab_integral(region, args.method, args.tol)
    return Table(["method", "value", "error"], [(args.method, value, err)])


def cmd_sieve_plan(args) -> Table:
    plan = sieve_plan(as_fraction(args.theta), as_fraction(args.eta), args.tol)
    return Table(["quantity", "value"], [(k, v) for k, v in asdict(plan).items()])


def _selftest_checks() -> list[tuple[str, Callable[[], bool]]]:
    from .analytic import inner_sum_collapsed, inner_sum_naive
    from .arith import sieve_primes
    from .torsion import count_Pd

    def lemma_equivalence():
        ps = [int(p) for p in sieve_primes(5, 201).primes]
        return all(d1_set(p) == enumerate_d1_values(p) for p in ps)

    def omega_closed_forms():
        g = buchstab_grid()
        ok = True
        for lo, hi, f, tol in ((1, 2, lambda u: 1 / u, 1e-8), (2, 3, lambda u: (1 + math.log(u - 1)) / u, 1e-6)):
            m = (g.u >= lo) & (g.u < hi)
            ok &= bool(max(abs(w - f(u)) for u, w in zip(g.u[m], g.values[m])) <= tol)
        return ok

    def double_counting():
        X, cfg = 10_000, SieveConfig(Fraction(51, 100))
        from .analytic import _levels

        lhs = sum(dx_count(int(p), X, cfg) for p in sieve_primes(X + 1, 2 * X + 1).primes)
        return lhs == sum(count_Pd(d, X) for d in _levels(X, cfg.theta))

    def ds_identity():
        v, _ = ds_summatory(10_000)
        return v == sum(len(ds_set(int(p))) for p in sieve_primes(2, 10_001).primes)

    def inner_sums():
        return all(
            math.isclose(inner_sum_collapsed(d, X), inner_sum_naive(d, X), rel_tol=1e-9)
            for d in (1, 7, 30, 141)
            for X in (1000, 54321, 10**6)
        )

    def example_curve():
        gs = group_structure(CurveFp(196561, 6, -2))
        return (gs.d1, gs.a_p) == (140, 562)

    return [
        ("d1_set_equals_enumeration_p_le_200", lemma_equivalence),
        ("omega_closed_forms", omega_closed_forms),
        ("double_counting_X_1e4", double_counting),
        ("ds_summatory_brute_force_X_1e4", ds_identity),
        ("main_term_inner_sums", inner_sums),
        ("example_curve_d1", example_curve),
    ]


def cmd_selftest(args) -> Table:
    rows = []
    for name, check in _selftest_checks():
        try:
            ok = bool(check())
        except Exception as exc:  # report and keep going
            ok = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        rows.append((name, "pass" if ok else "FAIL"))
    table = Table(["check", "status"], rows)
    table.meta["failures"] = sum(r[1] != "pass" for r in rows)
    return table


# -- parser -----------------------------------------------------------------------


def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--config", help="key=value file; command-line flags win")
    common.add_argument("--cache", help="a_p cache file (default: $SPLITPRIMES_CACHE)")

    parser = _Parser(prog="splitprimes", description="Totally split primes in torsion fields.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, handler, help_text, columns):
        sp = sub.add_parser(name, parents=[common], help=help_text, description=f"{help_text} Columns: {columns}.")
        sp.set_defaults(handler=handler)
        return sp

    sp = add("scan-outside", cmd_scan_outside, "Outside primes of y^2 = x^3 + ax + b.", "p,d,a,galois_proxy,mode")
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--b", type=int, required=True)
    sp.add_argument("--p-max", type=int, required=True)
    sp.add_argument("--mode", default="gl2", choices=PROXY_MODES)
    sp.add_argument("--method", default="filter", choices=("filter", "exhaustive"))

    sp = add("group-structure", cmd_group_structure, "E(F_p) = Z/d1 + Z/d1*d2.", "p,A,B,N,a_p,d1,d2")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--b", type=int, required=True)

    sp = add("trace", cmd_trace, "Canonical and all admissible traces for (p, d).", "p,d,a,all")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)

    sp = add("dsets", cmd_dsets, "The sets D_s, D_l and D_1 of a prime.", "p,ds,dl,d1")
    sp.add_argument("--p", type=int, required=True)

    sp = add("ds-sum", cmd_ds_sum, "Sum of |D_s(p)| over p <= X.", "X,value,normalized,c")
    sp.add_argument("--x", type=int, required=True)

    sp = add("dl-sum", cmd_dl_sum, "Sum of |D_l(p)| over p <= X with its main term.", "X,value,main")
    sp.add_argument("--x", type=int, required=True)

    sp = add("main-term", cmd_main_term, "Window main term against its closed form.", "X,theta,sum_value,closed_form,ratio,empty")
    sp.add_argument("--x", type=int, required=True)
    sp.add_argument("--theta", type=str, required=True)

    sp = add("discrepancy", cmd_discrepancy, "Per-level counts of P(d) against the main term.", "d,observed,expected,relative_error")
    sp.add_argument("--x", type=int, required=True)
    sp.add_argument("--theta", type=str, required=True)
    sp.add_argument("--eta", type=str, default="1/10000")
    sp.add_argument("--family", default="all_window", choices=("all_window", "deta"))

    sp = add("buchstab-eval", cmd_buchstab_eval, "The Buchstab function and its majorant.", "u,omega,omega_upper")
    sp.add_argument("--u", type=float, nargs="+", required=True)

    sp = add("buchstab-integral", cmd_buchstab_integral, "Buchstab integral over U(theta, eta) or a region file.", "method,value,error")
    sp.add_argument("--theta", type=str, default="0.5388")
    sp.add_argument("--eta", type=str, default="1/10000")
    sp.add_argument("--region", help="region in text form")
    sp.add_argument("--method", default="upper_bound", choices=("upper_bound", "solver"))
    sp.add_argument("--tol", type=float, default=1e-4)

    sp = add("sieve-plan", cmd_sieve_plan, "Exponent ranges, c0 and the deficit at level theta.", "quantity,value")
    sp.add_argument("--theta", type=str, required=True)
    sp.add_argument("--eta", type=str, default="1/10000")
    sp.add_argument("--tol", type=float, default=1e-4)

    add("selftest", cmd_selftest, "Small-scale oracle checks.", "check,status")
    return parser


def _read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{n}: expected key=value")
            k, v = (t.strip() for t in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def _parse(argv: Sequence[str]) -> argparse.Namespace:
    parser = _build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    early, _ = pre.parse_known_args(argv)
    if early.config:
        choices = parser._subparsers._group_actions[0].choices
        command = next((a for a in argv if a in choices), None)
        if command is not None:
            sub = choices[command]
            conf = _read_config(early.config)
            known = {a.dest: a for a in sub._actions}
            unknown = set(conf) - set(known)
            if unknown:
                raise UsageError(f"unknown config keys: {sorted(unknown)}")
            defaults = {}
            for k, v in conf.items():
                act = known[k]
                conv = act.type or str
                defaults[k] = [conv(x) for x in v.split()] if act.nargs in ("+", "*") else conv(v)
                # the file satisfies the requirement; a flag still overrides it
                act.required = False
            sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def dispatch(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.threads < 1:
            raise ValueError("--threads must be at least 1")
        table = args.handler(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (AssertionError, GroupStructureError, QuadratureError) as exc:
        print(f"internal check failed: {exc}", file=sys.stderr)
        return 2
    text = _render(table, args)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "selftest" and table.meta.get("failures"):
        return 2
    return 0


def main() -> None:
    sys.exit(dispatch())
