#!/usr/bin/env python3
"""
meancut command line.

Subcommands:
  eval     P(k, l) by every method for a single pair or a rectangular grid
  compare  the same values in long format with errors against the oracle
  verify   run the verification suites, exit 1 if any fails
  fit      log-log error exponent fit of one approximant
  scan     list pairs outside 1/4 <= P <= 1/2

CSV goes to stdout (or --output); progress lines go to stderr.

Run:
  python -m meancut eval --k 3 --l 5 --method exact
  python -m meancut fit --kind eq1 --k 2 --lgrid 100:1600:x2
  python -m meancut verify --suite all --kmax 30 --lmax 30
"""

import argparse
import enum
import logging
import sys
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd
from joblib import Parallel, delayed

from meancut import analysis, raab
from meancut.config import Settings, load_settings
from meancut.errors import ConfigError, DomainError, MeanCutError
from meancut.exact_core import ParamPair, exact_p, format_rational
from meancut.float_eval import log_p
from meancut.reporting import write_csv, write_json

logger = logging.getLogger(__name__)


class Subcommand(enum.Enum):
    EVAL = "eval"
    COMPARE = "compare"
    VERIFY = "verify"
    FIT = "fit"
    SCAN = "scan"


class Method(enum.Enum):
    EXACT = "exact"
    FLOAT = "float"
    RAAB = "raab"
    APPROX1 = "approx1"
    APPROX2 = "approx2"
    APPROX3 = "approx3"
    ALL = "all"


EVAL_COLUMNS = ["k", "l", "exact_rational", "exact_decimal", "float_p", "raab_p",
                "approx1", "approx2", "approx3", "abs_err_raab", "abs_err1", "abs_err2", "abs_err3"]
COMPARE_COLUMNS = ["k", "l", "method", "value", "abs_err", "rel_err"]
VERIFY_COLUMNS = ["suite", "passed", "n_checks", "n_failed", "detail"]
FIT_COLUMNS = ["kind", "fixed_param", "n_points", "slope", "intercept", "r2", "pass"]
SCAN_COLUMNS = ["k", "l", "method", "value", "bound"]

_APPROX_KINDS = {
    Method.APPROX1: analysis.ApproxKind.POISSON_LOWER,
    Method.APPROX2: analysis.ApproxKind.POISSON_UPPER,
    Method.APPROX3: analysis.ApproxKind.HALF,
}


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


# --- Grid syntax -----------------------------------------------------------
def parse_grid(text: str) -> List[int]:
    """'n', 'a:b', 'a:b:s' (arithmetic) or 'a:b:xF' (geometric, factor F)"""
    parts = text.strip().split(":")
    try:
        if len(parts) == 1:
            return [int(parts[0])]
        if len(parts) not in (2, 3):
            raise ValueError
        start, stop = int(parts[0]), int(parts[1])
        step = parts[2] if len(parts) == 3 else "1"
        if step.lower().startswith("x"):
            factor = float(step[1:])
            if not factor > 1:
                raise DomainError(f"geometric factor must be > 1 in {text!r}")
            values, v = [], float(start)
            while v <= stop * (1 + 1e-12):
                r = int(round(v))
                if not values or r != values[-1]:
                    values.append(r)
                v *= factor
        else:
            s = int(step)
            if s < 1:
                raise DomainError(f"grid step must be >= 1 in {text!r}")
            values = list(range(start, stop + 1, s))
    except DomainError:
        raise
    except ValueError as exc:
        raise DomainError(f"bad grid {text!r}; expected n, a:b, a:b:s or a:b:xF") from exc
    if not values:
        raise DomainError(f"empty grid {text!r}")
    return values


# --- Run configuration -----------------------------------------------------
@dataclass
class RunConfig:
    subcommand: Subcommand
    k_grid: List[int] = field(default_factory=list)
    l_grid: List[int] = field(default_factory=list)
    method: Method = Method.ALL
    tol: Optional[float] = None
    output: Optional[str] = None
    suites: List[str] = field(default_factory=lambda: ["all"])
    kmax: int = 30
    lmax: int = 30
    json_path: Optional[str] = None
    kind: Optional[analysis.ApproxKind] = None
    fixed_param: Optional[int] = None
    fit_grid: List[int] = field(default_factory=list)
    exact_max: Optional[int] = None
    margin: Optional[float] = None

    def __post_init__(self):
        if self.tol is not None and not self.tol > 0:
            raise DomainError("tol must be > 0")
        if self.subcommand in (Subcommand.EVAL, Subcommand.COMPARE):
            if not self.k_grid or not self.l_grid:
                raise DomainError("k and l ranges must be nonempty")

    def pairs(self) -> List[ParamPair]:
        return sorted(ParamPair(k, l) for k, l in product(self.k_grid, self.l_grid))  # noqa: E741


# --- Row evaluation --------------------------------------------------------
def _raab_value(p: ParamPair, settings: Settings) -> float:
    return raab.raab_p(p, settings.series_tol, settings.quadrature_spec(), tail=settings.tail_mode,
                       cap=settings.series_cap, c_max=settings.c_max).p


def _eval_row(p: ParamPair, method: Method, settings: Settings) -> Dict[str, object]:
    want = {m for m in Method if m is not Method.ALL} if method is Method.ALL else {method}
    row: Dict[str, object] = {c: None for c in EVAL_COLUMNS}
    row["k"], row["l"] = p.k, p.l
    exact_wanted = Method.EXACT in want and (method is Method.EXACT or p.n <= settings.exact_switchover)
    if exact_wanted:
        exact = exact_p(p)
        row["exact_rational"] = format_rational(exact)
        row["exact_decimal"] = float(exact)
    if Method.FLOAT in want:
        row["float_p"] = log_p(p)
    if Method.RAAB in want:
        row["raab_p"] = _raab_value(p, settings)
    for m, col in ((Method.APPROX1, "approx1"), (Method.APPROX2, "approx2"), (Method.APPROX3, "approx3")):
        if m in want:
            row[col] = analysis.approximant(p, _APPROX_KINDS[m])

    # errors against the exact value, or the float value where exact was skipped
    reference = row["exact_decimal"] if row["exact_decimal"] is not None else row["float_p"]
    if reference is not None:
        for col, err in (("raab_p", "abs_err_raab"), ("approx1", "abs_err1"),
                         ("approx2", "abs_err2"), ("approx3", "abs_err3")):
            if row[col] is not None:
                row[err] = abs(row[col] - reference)
    return row


def _compare_rows(p: ParamPair, settings: Settings) -> List[Dict[str, object]]:
    reference = analysis.oracle_p(p, settings.exact_switchover)
    values: List[Tuple[str, float]] = []
    if p.n <= settings.exact_switchover:
        values.append(("exact", reference))
    values.append(("float", log_p(p)))
    values.append(("raab", _raab_value(p, settings)))
    for m, kind in _APPROX_KINDS.items():
        values.append((m.value, analysis.approximant(p, kind)))
    return [
        {"k": p.k, "l": p.l, "method": name, "value": v,
         "abs_err": abs(v - reference), "rel_err": abs(v - reference) / reference}
        for name, v in values
    ]


# --- Subcommands -----------------------------------------------------------
def cmd_eval(cfg: RunConfig, settings: Settings) -> Tuple[pd.DataFrame, int]:
    pairs = cfg.pairs()
    _say(f"▶ Evaluating {len(pairs)} pair(s), method={cfg.method.value}")
    rows = Parallel(n_jobs=settings.n_jobs)(delayed(_eval_row)(p, cfg.method, settings) for p in pairs)
    return pd.DataFrame(rows, columns=EVAL_COLUMNS), 0


def cmd_compare(cfg: RunConfig, settings: Settings) -> Tuple[pd.DataFrame, int]:
    pairs = cfg.pairs()
    _say(f"▶ Comparing methods on {len(pairs)} pair(s)")
    chunks = Parallel(n_jobs=settings.n_jobs)(delayed(_compare_rows)(p, settings) for p in pairs)
    return pd.DataFrame([r for chunk in chunks for r in chunk], columns=COMPARE_COLUMNS), 0


def cmd_verify(cfg: RunConfig, settings: Settings) -> Tuple[pd.DataFrame, int]:
    names = list(analysis.SUITES) if "all" in cfg.suites else cfg.suites
    results = []
    for name in names:
        _say(f"▶ Suite {name}")
        (result,) = analysis.run_suites([name], settings, cfg.kmax, cfg.lmax)
        mark = "✅" if result.passed else "❌"
        _say(f"{mark} {name}: {result.n_checks - result.n_failed}/{result.n_checks} "
             f"in {result.seconds:.1f}s {result.detail}")
        results.append(result)
    rows = [{"suite": r.name, "passed": r.passed, "n_checks": r.n_checks,
             "n_failed": r.n_failed, "detail": r.detail} for r in results]
    df = pd.DataFrame(rows, columns=VERIFY_COLUMNS)
    if cfg.json_path:
        summary = {
            "kmax": cfg.kmax,
            "lmax": cfg.lmax,
            "passed": bool(df["passed"].all()),
            "suites": [vars(r) for r in results],
        }
        write_json(summary, cfg.json_path)
        _say(f"▶ Summary written to {cfg.json_path}")
    failed = int((~df["passed"]).sum())
    _say("🎉 All suites passed." if not failed else f"❌ {failed} suite(s) failed.")
    return df, 0 if not failed else 1


def cmd_fit(cfg: RunConfig, settings: Settings) -> Tuple[pd.DataFrame, int]:
    _say(f"▶ Fitting {cfg.kind.value} error exponent on {len(cfg.fit_grid)} points")
    fit = analysis.error_fit(cfg.kind, cfg.fixed_param, cfg.fit_grid,
                             settings.exact_switchover, settings.n_jobs)
    ok = fit.passed(settings.slope_window, settings.r2_min)
    df = pd.DataFrame([{
        "kind": fit.kind.value, "fixed_param": fit.fixed_param, "n_points": fit.n_points,
        "slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2, "pass": ok,
    }], columns=FIT_COLUMNS)
    _say(f"{'✅' if ok else '❌'} slope={fit.slope:.4f} r2={fit.r2:.5f}")
    return df, 0 if ok else 1


def cmd_scan(cfg: RunConfig, settings: Settings) -> Tuple[pd.DataFrame, int]:
    exact_max = cfg.exact_max if cfg.exact_max is not None else settings.exact_scan_max
    margin = cfg.margin if cfg.margin is not None else settings.float_margin
    _say(f"▶ Scanning 1/4 <= P <= 1/2 on [1,{cfg.kmax}]x[1,{cfg.lmax}] (exact up to {exact_max})")
    violations = analysis.bounds_scan(cfg.kmax, cfg.lmax, exact_max, margin, settings.n_jobs)
    df = pd.DataFrame([vars(v) for v in violations], columns=SCAN_COLUMNS)
    _say("✅ no violations" if df.empty else f"❌ {len(df)} violation(s)")
    return df, 0 if df.empty else 1


COMMANDS = {
    Subcommand.EVAL: cmd_eval,
    Subcommand.COMPARE: cmd_compare,
    Subcommand.VERIFY: cmd_verify,
    Subcommand.FIT: cmd_fit,
    Subcommand.SCAN: cmd_scan,
}


# --- Argument parsing ------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--env-file", default=None, help="optional .env file with MEANCUT_* settings")
    common.add_argument("--jobs", type=int, default=None, help="parallel workers for grids (-1 = all cores)")
    common.add_argument("--output", default=None, help="CSV destination; '-' or absent means stdout")
    common.add_argument("--verbose", action="store_true", help="debug logging on stderr")

    parser = argparse.ArgumentParser(prog="meancut", description="Mean-cut incomplete beta P(k, l)")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    methods = [m.value for m in Method]
    p_eval = sub.add_parser("eval", parents=[common], help="evaluate P(k, l)")
    p_eval.add_argument("--k", required=True, help="k value or grid")
    p_eval.add_argument("--l", required=True, help="l value or grid")
    p_eval.add_argument("--method", choices=methods, default="all")
    p_eval.add_argument("--tol", type=float, default=None, help="V-series tolerance for raab")

    p_cmp = sub.add_parser("compare", parents=[common], help="compare methods against the oracle")
    p_cmp.add_argument("--k", required=True)
    p_cmp.add_argument("--l", required=True)
    p_cmp.add_argument("--tol", type=float, default=None)

    p_ver = sub.add_parser("verify", parents=[common], help="run verification suites")
    p_ver.add_argument("--suite", nargs="+", default=["all"], choices=["all"] + list(analysis.SUITES))
    p_ver.add_argument("--kmax", type=int, default=30)
    p_ver.add_argument("--lmax", type=int, default=30)
    p_ver.add_argument("--json", dest="json_path", default=None, help="also write a JSON summary")

    p_fit = sub.add_parser("fit", parents=[common], help="fit an error exponent")
    p_fit.add_argument("--kind", required=True, choices=[k.value for k in analysis.ApproxKind])
    p_fit.add_argument("--k", type=int, default=None, help="fixed k (eq1)")
    p_fit.add_argument("--l", type=int, default=None, help="fixed l (eq2)")
    p_fit.add_argument("--lgrid", default=None, help="l grid (eq1)")
    p_fit.add_argument("--kgrid", default=None, help="k grid (eq2)")
    p_fit.add_argument("--diag", default=None, help="n grid along k = l (eq3)")

    p_scan = sub.add_parser("scan", parents=[common], help="scan the 1/4 <= P <= 1/2 bounds")
    p_scan.add_argument("--kmax", type=int, default=200)
    p_scan.add_argument("--lmax", type=int, default=200)
    p_scan.add_argument("--exact-max", type=int, default=None)
    p_scan.add_argument("--margin", type=float, default=None)
    return parser


def _fit_inputs(args) -> Tuple[analysis.ApproxKind, Optional[int], Optional[str]]:
    kind = analysis.ApproxKind(args.kind)
    if kind is analysis.ApproxKind.POISSON_LOWER:
        if args.k is None or args.lgrid is None:
            raise DomainError("fit --kind eq1 needs --k and --lgrid")
        return kind, args.k, args.lgrid
    if kind is analysis.ApproxKind.POISSON_UPPER:
        if args.l is None or args.kgrid is None:
            raise DomainError("fit --kind eq2 needs --l and --kgrid")
        return kind, args.l, args.kgrid
    if args.diag is None:
        raise DomainError("fit --kind eq3 needs --diag")
    return kind, None, args.diag


def config_from_args(args) -> RunConfig:
    sub = Subcommand(args.subcommand)
    if sub in (Subcommand.EVAL, Subcommand.COMPARE):
        return RunConfig(sub, k_grid=parse_grid(args.k), l_grid=parse_grid(args.l),
                         method=Method(getattr(args, "method", "all")), tol=args.tol, output=args.output)
    if sub is Subcommand.VERIFY:
        return RunConfig(sub, suites=args.suite, kmax=args.kmax, lmax=args.lmax,
                         json_path=args.json_path, output=args.output)
    if sub is Subcommand.FIT:
        kind, fixed, grid = _fit_inputs(args)
        return RunConfig(sub, kind=kind, fixed_param=fixed, fit_grid=parse_grid(grid), output=args.output)
    return RunConfig(sub, kmax=args.kmax, lmax=args.lmax, exact_max=args.exact_max,
                     margin=args.margin, output=args.output)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = config_from_args(args)
        settings = load_settings(args.env_file, n_jobs=args.jobs, series_tol=cfg.tol)
    except (DomainError, ConfigError) as exc:
        parser.error(str(exc))

    try:
        df, code = COMMANDS[cfg.subcommand](cfg, settings)
    except DomainError as exc:
        parser.error(str(exc))
    except MeanCutError as exc:
        _say(f"❌ {type(exc).__name__}: {exc}")
        return 1
    write_csv(df, cfg.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
