"""Command-line front end: ``fplab <command> [flags]``.

Every run writes one data file (CSV or JSON, stdout by default) and appends one
JSON manifest line to the runs log.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .arith import cached_tables, mobius_log_sum, mobius_sq_sum, psi
from .battery import validate_battery
from .correlations import (
    RULES,
    divisor_corr_sum,
    lambda_corr_sum,
    required_limit,
    sigma_corr_sum,
    simultaneous_prime_count,
    squarefree_corr_sum,
)
from .equidist import (
    CongruenceSpec,
    count_direct,
    etk_bound_sequence,
    etk_default_m,
)
from .errors import FPLabError, InvalidArgument
from .expsum import ExpSumParams, exp_sum, fit_growth, proved_exponent, sample_lemma2_family, lemma2_check
from .floorpow import ExponentTuple, as_exponent, fallback_counter

COMMANDS = ("sieve", "expsum", "equidist", "primes", "squarefree", "divisor", "sigma", "conditions", "lemma2", "validate")
CORRELATION_COLUMNS = ["N", "measured", "main_term", "ratio", "error_reference"]

ROWS_SCHEMA = {
    "type": "object",
    "required": ["command", "columns", "rows"],
    "properties": {
        "command": {"type": "string"},
        "columns": {"type": "array", "items": {"type": "string"}},
        "rows": {"type": "array", "items": {"type": "array"}},
    },
}

CONDITIONS_SCHEMA = {
    "type": "object",
    "required": ["rule", "admissible"],
    "properties": {
        "rule": {"enum": sorted(RULES)},
        "alpha": {"oneOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}}]},
        "beta": {"type": "number"},
        "admissible": {"type": "boolean"},
    },
}


@dataclass
class ExperimentConfig:
    command: str
    alpha: List[str] = field(default_factory=list)
    shifts: List[int] = field(default_factory=list)
    moduli: List[int] = field(default_factory=list)
    residues: List[int] = field(default_factory=list)
    frequencies: List[float] = field(default_factory=list)
    n_grid: List[int] = field(default_factory=list)
    seed: int = 0
    count: int = 50
    rule: Optional[str] = None
    etk: bool = True
    etk_m: Optional[int] = None
    output: Optional[str] = None
    format: str = "csv"
    exact_mode: bool = False
    table_cache: Optional[str] = None
    runs_log: Optional[str] = "runs.log"

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise InvalidArgument(f"unknown command {self.command!r}")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise InvalidArgument("--N-grid must be strictly increasing")
        if any(n < 1 for n in self.n_grid):
            raise InvalidArgument("--N-grid values must be positive")

    def exponents(self) -> ExponentTuple:
        if not self.alpha:
            raise InvalidArgument("--alpha is required")
        return ExponentTuple(tuple(self.alpha))


@dataclass
class ExperimentReport:
    """Tabular result of one run plus the timing and fit metadata for the manifest."""

    command: str
    columns: List[str]
    rows: List[List[Any]] = field(default_factory=list)
    wall_time: Dict[str, float] = field(default_factory=dict)
    fit: Optional[Dict[str, Any]] = None
    document: Optional[Dict[str, Any]] = None
    ok: bool = True


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.15g}"
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(f"{value:.15g}")
    if isinstance(value, (np.integer,)):
        return int(value)
    return value


def render(report: ExperimentReport, fmt: str) -> str:
    if report.document is not None:
        return json.dumps({k: _json_value(v) if not isinstance(v, list) else [_json_value(x) for x in v]
                           for k, v in report.document.items()}) + "\n"
    if fmt == "json":
        doc = {
            "command": report.command,
            "columns": report.columns,
            "rows": [[_json_value(v) for v in row] for row in report.rows],
        }
        return json.dumps(doc) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _timed(report: ExperimentReport, key: Any):
    class _T:
        def __enter__(self):
            self.t = time.perf_counter()

        def __exit__(self, *exc):
            report.wall_time[str(key)] = round(time.perf_counter() - self.t, 6)

    return _T()


def _grid(config: ExperimentConfig) -> List[int]:
    if not config.n_grid:
        raise InvalidArgument("--N-grid is required")
    return config.n_grid


def _tables_for(config: ExperimentConfig, alpha: ExponentTuple, shifts: Sequence[int]):
    need = max(2, required_limit(max(_grid(config)), alpha, shifts))
    return cached_tables(need, config.table_cache)


def _cmd_sieve(config: ExperimentConfig) -> ExperimentReport:
    grid = _grid(config)
    tables = cached_tables(max(2, grid[-1]), config.table_cache)
    report = ExperimentReport("sieve", ["x", "psi", "psi_ratio", "mobius_log_sum", "mobius_sq_sum"])
    for x in grid:
        with _timed(report, x):
            value = psi(x, tables)
            report.rows.append([x, value, value / x, mobius_log_sum(x, tables), mobius_sq_sum(x, tables)])
    return report


def _cmd_expsum(config: ExperimentConfig) -> ExperimentReport:
    alpha = config.exponents()
    report = ExperimentReport("expsum", ["N", "re", "im", "modulus", "bound_shape", "ratio"])
    moduli = []
    for n in _grid(config):
        with _timed(report, n):
            r = exp_sum(ExpSumParams(tuple(config.frequencies), alpha, n))
        moduli.append(r.modulus)
        report.rows.append([n, r.value.real, r.value.imag, r.modulus, r.prop1_reference, r.ratio])
    grid = config.n_grid
    if len(grid) >= 4 and grid[-1] >= 100 * grid[0]:
        slope, used = fit_growth(grid, moduli)
        report.fit = {"slope": slope, "proved_exponent": proved_exponent(alpha), "used": used}
    return report


def _cmd_equidist(config: ExperimentConfig) -> ExperimentReport:
    alpha = config.exponents()
    spec = CongruenceSpec(tuple(config.moduli), tuple(config.residues))
    columns = ["N", "k", "moduli", "residues", "count", "main_term", "error", "thm2_reference", "etk_m", "etk_bound"]
    report = ExperimentReport("equidist", columns)
    for n in _grid(config):
        with _timed(report, n):
            r = count_direct(n, spec, alpha, exact=config.exact_mode)
            m, bound = "", ""
            if config.etk and n >= 2:
                m = config.etk_m or etk_default_m(n, alpha)
                bound = etk_bound_sequence(n, alpha, spec.moduli, m)
        report.rows.append([
            n, len(alpha), ";".join(map(str, spec.moduli)), ";".join(map(str, spec.residues)),
            r.count, r.main_term, r.error, r.thm2_reference, m, bound,
        ])
    return report


def _correlation(config: ExperimentConfig, name: str, fn) -> ExperimentReport:
    alpha = config.exponents()
    tables = _tables_for(config, alpha, [0] * len(alpha))
    report = ExperimentReport(name, list(CORRELATION_COLUMNS))
    for n in _grid(config):
        with _timed(report, n):
            r = fn(n, alpha, tables, exact=config.exact_mode)
        report.rows.append([n, r.measured, r.main_term, r.ratio, r.error_reference])
    return report


def _cmd_primes(config: ExperimentConfig) -> ExperimentReport:
    alpha = config.exponents()
    shifts = config.shifts or [0] * len(alpha)
    tables = _tables_for(config, alpha, shifts)
    report = ExperimentReport("primes", CORRELATION_COLUMNS + ["prime_count"])
    for n in _grid(config):
        with _timed(report, n):
            r = lambda_corr_sum(n, alpha, shifts, tables, exact=config.exact_mode)
            count = simultaneous_prime_count(n, alpha, shifts, tables, exact=config.exact_mode).measured
        report.rows.append([n, r.measured, r.main_term, r.ratio, r.error_reference, count])
    return report


def _cmd_conditions(config: ExperimentConfig) -> ExperimentReport:
    rule = config.rule or "thm1"
    if rule not in RULES:
        raise InvalidArgument(f"unknown rule {rule!r}; choose from {sorted(RULES)}")
    report = ExperimentReport("conditions", [])
    if rule in ("corollary", "short-interval"):
        if len(config.alpha) != 2:
            raise InvalidArgument(f"rule {rule} takes --alpha as an ordered pair alpha,beta")
        a, b = (as_exponent(v) for v in config.alpha)
        report.document = {"rule": rule, "alpha": float(a), "beta": float(b), "admissible": RULES[rule](a, b)}
    else:
        alpha = config.exponents()
        report.document = {"rule": rule, "alpha": [float(a) for a in alpha], "admissible": RULES[rule](alpha)}
    return report


def _cmd_lemma2(config: ExperimentConfig) -> ExperimentReport:
    rng = np.random.default_rng(config.seed)
    report = ExperimentReport("lemma2", ["case", "a", "b", "m", "measured", "bound", "holds"])
    for i, case in enumerate(sample_lemma2_family(rng, config.count)):
        with _timed(report, i):
            r = lemma2_check(case.phase, case.a, case.b, case.m)
        report.rows.append([case.phase.label, case.a, case.b, case.m, r.measured, r.bound, r.holds])
    return report


def _cmd_validate(config: ExperimentConfig) -> ExperimentReport:
    battery = validate_battery(config.seed)
    report = ExperimentReport("validate", ["suite", "passed", "checks", "first_failure"])
    for line in battery.lines():
        print(line, file=sys.stderr)
    for s in battery.suites:
        report.rows.append([s.name, s.passed, s.checked, s.failures[0] if s.failures else ""])
    report.ok = battery.passed
    return report


DISPATCH = {
    "sieve": _cmd_sieve,
    "expsum": _cmd_expsum,
    "equidist": _cmd_equidist,
    "primes": _cmd_primes,
    "squarefree": lambda c: _correlation(c, "squarefree", squarefree_corr_sum),
    "divisor": lambda c: _correlation(c, "divisor", divisor_corr_sum),
    "sigma": lambda c: _correlation(c, "sigma", sigma_corr_sum),
    "conditions": _cmd_conditions,
    "lemma2": _cmd_lemma2,
    "validate": _cmd_validate,
}


def run(config: ExperimentConfig, stdout=None) -> int:
    """Execute one command, write its data file and append the manifest line."""
    stdout = stdout or sys.stdout
    fallback_counter.reset()
    report = DISPATCH[config.command](config)
    text = render(report, config.format)
    if config.output:
        Path(config.output).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)
    if config.runs_log:
        manifest = {
            "config": asdict(config),
            "version": __version__,
            "wall_time": report.wall_time,
            "fallback_triggers": fallback_counter.fallback,
            "fast_evaluations": fallback_counter.fast,
            "output_sha256": hashlib.sha256(text.encode("utf-8")).hexdigest(),
        }
        if report.fit is not None:
            manifest["fit"] = report.fit
        with open(config.runs_log, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(manifest, sort_keys=True) + "\n")
    return 0 if report.ok else 1


# --- argument parsing ---------------------------------------------------------


def _list(conv):
    def parse(text: str):
        try:
            return [conv(part.strip()) for part in text.split(",") if part.strip()]
        except (ValueError, FPLabError) as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    return parse


def _grid_value(text: str) -> int:
    value = float(text) if ("e" in text.lower() or "." in text) else int(text)
    if value != int(value):
        raise ValueError(f"non-integer N {text}")
    return int(value)


def _decimal(text: str) -> str:
    as_exponent(text)
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fplab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fplab {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--alpha", type=_list(_decimal), default=[], help="comma list of decimal exponents")
    parser.add_argument("--shifts", type=_list(int), default=[])
    parser.add_argument("--moduli", type=_list(int), default=[])
    parser.add_argument("--residues", type=_list(int), default=[])
    parser.add_argument("--h", dest="frequencies", type=_list(float), default=[], help="comma list of frequencies")
    parser.add_argument("--N-grid", dest="n_grid", type=_list(_grid_value), default=[])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--count", type=int, default=50, help="family size for lemma2")
    parser.add_argument("--rule", choices=sorted(RULES))
    parser.add_argument("--etk-m", type=int, default=None, help="override the default truncation m")
    parser.add_argument("--no-etk", dest="etk", action="store_false")
    parser.add_argument("--exact", dest="exact_mode", action="store_true", help="force exact floor powers")
    parser.add_argument("--table-cache", default=None)
    parser.add_argument("--output", "-o", default=None)
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--runs-log", default="runs.log", help="manifest log ('' disables)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = args.format or ("json" if args.command == "conditions" else "csv")
    try:
        config = ExperimentConfig(
            command=args.command, alpha=args.alpha, shifts=args.shifts, moduli=args.moduli,
            residues=args.residues, frequencies=args.frequencies, n_grid=args.n_grid, seed=args.seed,
            count=args.count, rule=args.rule, etk=args.etk, etk_m=args.etk_m, output=args.output,
            format=fmt, exact_mode=args.exact_mode, table_cache=args.table_cache,
            runs_log=args.runs_log or None,
        )
    except InvalidArgument as exc:
        parser.error(str(exc))
    try:
        return run(config)
    except FPLabError as exc:
        print(f"fplab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
