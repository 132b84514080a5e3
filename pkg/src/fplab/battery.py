"""Seeded cross-module consistency suites behind ``fplab validate``."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List

import numpy as np

from . import equidist
from .arith import build_tables
from .correlations import (
    divisor_corr_sum,
    lambda_corr_sum,
    sigma_corr_sum,
    simultaneous_prime_count,
    squarefree_corr_sum,
)
from .floorpow import ExponentTuple

EXPONENT_POOL = [Fraction(p, 1000) for p in range(50, 1000, 7)] + [
    Fraction(1, 2), Fraction(1, 3), Fraction(3, 10), Fraction(2, 3), Fraction(1, 4),
]


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checked: int
    failures: List[str] = field(default_factory=list)


@dataclass
class BatteryReport:
    seed: int
    suites: List[SuiteResult]

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def lines(self) -> List[str]:
        out = []
        for s in self.suites:
            verdict = "PASS" if s.passed else "FAIL"
            extra = f" first failure: {s.failures[0]}" if s.failures else ""
            out.append(f"[{verdict}] {s.name}: {s.checked} checks{extra}")
        return out


def random_exponents(rng: np.random.Generator, k: int) -> ExponentTuple:
    picks = rng.choice(len(EXPONENT_POOL), size=k, replace=False)
    return ExponentTuple.sorted(EXPONENT_POOL[i] for i in picks)


def random_config(rng: np.random.Generator, max_n: int, max_k: int = 3, max_d: int = 12):
    k = int(rng.integers(1, max_k + 1))
    alpha = random_exponents(rng, k)
    moduli = tuple(int(d) for d in rng.integers(1, max_d + 1, size=k))
    residues = tuple(int(rng.integers(0, d)) for d in moduli)
    n = int(rng.integers(1, max_n + 1))
    return n, equidist.CongruenceSpec(moduli, residues), alpha


def dual_algorithm_suite(rng, configs: int, max_n: int) -> SuiteResult:
    res = SuiteResult("dual-algorithm", True, 0)
    for _ in range(configs):
        n, spec, alpha = random_config(rng, max_n)
        a = equidist.count_direct(n, spec, alpha).count
        b = equidist.count_fracparts(n, spec, alpha).count
        res.checked += 1
        if a != b:
            res.passed = False
            res.failures.append(f"N={n} alpha={alpha} d={spec.moduli} c={spec.residues}: {a} != {b}")
    return res


def partition_suite(rng, configs: int, max_n: int) -> SuiteResult:
    res = SuiteResult("partition", True, 0)
    for _ in range(configs):
        n, spec, alpha = random_config(rng, max_n, max_d=4)
        total = 0
        for residues in itertools.product(*(range(d) for d in spec.moduli)):
            total += equidist.count_direct(n, equidist.CongruenceSpec(spec.moduli, residues), alpha).count
        res.checked += 1
        if total != n:
            res.passed = False
            res.failures.append(f"N={n} alpha={alpha} d={spec.moduli}: residues sum to {total}")
    return res


def _point_sets(rng, count: int, max_n: int):
    for i in range(count):
        n = int(rng.integers(2, max_n + 1))
        kind = i % 3
        if kind == 0:
            k = int(rng.integers(1, 3))
            alpha = random_exponents(rng, k)
            moduli = tuple(int(d) for d in rng.integers(1, 8, size=k))
            m = equidist.etk_default_m(n, alpha)
            yield f"fractional N={n} alpha={alpha} d={moduli}", equidist.fractional_points(n, alpha, moduli), m
        elif kind == 1:
            k = int(rng.integers(1, 3))
            yield f"uniform N={n} k={k}", rng.random((n, k)), int(rng.integers(1, 6))
        else:
            k = int(rng.integers(1, 3))
            pts = np.repeat(rng.random((1, k)), n, axis=0)
            yield f"clustered N={n} k={k}", pts, int(rng.integers(1, 6))


def etk_soundness_suite(rng, count: int, max_n: int, grid_q: int = 16) -> SuiteResult:
    res = SuiteResult("etk-soundness", True, 0)
    for label, pts, m in _point_sets(rng, count, max_n):
        bound = equidist.etk_bound(pts, m)
        disc = equidist.aligned_box_discrepancy(pts, grid_q)
        res.checked += 1
        if not bound >= disc:
            res.passed = False
            res.failures.append(f"{label} m={m}: bound {bound} < discrepancy {disc}")
    return res


def block_sum(n: int, values: Callable[[int], float]) -> list:
    """Terms (multiplicity, f(j)) for floor(sqrt(n)) = j on [j^2, (j+1)^2) truncated at N."""
    terms = []
    j = 1
    while j * j <= n:
        mult = min((j + 1) ** 2 - 1, n) - j * j + 1
        terms.append((mult, values(j)))
        j += 1
    return terms


def block_oracle_suite(rng, count: int, max_n: int) -> SuiteResult:
    res = SuiteResult("block-oracle", True, 0)
    half = ExponentTuple.of(Fraction(1, 2))
    tables = build_tables(max(2, math.isqrt(max_n) + 1))
    checks = [
        ("lambda", lambda n: lambda_corr_sum(n, half, [0], tables).measured, tables.von_mangoldt, 1e-9),
        ("squarefree", lambda n: squarefree_corr_sum(n, half, tables).measured, tables.mobius_sq, 0),
        ("divisor", lambda n: divisor_corr_sum(n, half, tables).measured, tables.divisor_count, 0),
        ("sigma", lambda n: sigma_corr_sum(n, half, tables).measured, tables.divisor_sum, 0),
        ("prime-count", lambda n: simultaneous_prime_count(n, half, [0], tables).measured,
         (tables.divisor_count == 2).astype(np.int64), 0),
    ]
    for _ in range(count):
        n = int(rng.integers(1, max_n + 1))
        for name, fn, table, tol in checks:
            terms = block_sum(n, lambda j: table[j])
            if tol:
                expected = math.fsum(m * float(v) for m, v in terms)
            else:
                expected = sum(m * int(v) for m, v in terms)
            got = fn(n)
            res.checked += 1
            if abs(got - expected) > tol * max(1.0, abs(expected)):
                res.passed = False
                res.failures.append(f"{name} N={n}: {got} != {expected}")
    return res


def validate_battery(seed: int, *, configs: int = 40, max_n: int = 20000) -> BatteryReport:
    rng = np.random.default_rng(seed)
    suites = [
        dual_algorithm_suite(rng, configs, max_n),
        partition_suite(rng, max(1, configs // 4), max_n),
        etk_soundness_suite(rng, max(3, configs // 4), min(max_n, 2000)),
        block_oracle_suite(rng, max(1, configs // 4), max_n),
    ]
    return BatteryReport(seed, suites)
