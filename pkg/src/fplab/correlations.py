"""Correlation sums of arithmetic functions along floor(n^a_i) + c_i, and admissibility rules."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .arith import ArithTables
from .errors import InvalidArgument, RangeError
from .floorpow import ExponentTuple, RationalLike, as_exponent, floor_pow_array, floor_pow_exact
from .parallel import fsum, map_chunks

ZETA2 = math.pi**2 / 6


@dataclass(frozen=True)
class CorrelationReport:
    n_limit: int
    measured: float
    main_term: float
    error_reference: float

    @property
    def ratio(self) -> float:
        return self.measured / self.main_term if self.main_term > 0 else math.nan


def _shifts(alpha: ExponentTuple, shifts: Optional[Sequence[int]]) -> tuple:
    if shifts is None:
        return (0,) * len(alpha)
    shifts = tuple(int(c) for c in shifts)
    if len(shifts) != len(alpha):
        raise InvalidArgument(f"{len(shifts)} shifts for {len(alpha)} exponents")
    return shifts


def required_limit(n: int, alpha: ExponentTuple, shifts: Sequence[int]) -> int:
    return max(floor_pow_exact(n, a) + c for a, c in zip(alpha, shifts))


def _check_table(n: int, alpha: ExponentTuple, shifts: Sequence[int], tables: ArithTables) -> None:
    if n < 1:
        raise InvalidArgument(f"N must be >= 1, got {n}")
    need = required_limit(n, alpha, shifts)
    if need > tables.limit:
        raise RangeError(f"table limit {tables.limit} too small: need at least {need}")


def _arguments(lo: int, hi: int, alpha: ExponentTuple, shifts: Sequence[int], exact: bool):
    ns = np.arange(lo, hi, dtype=np.int64)
    return [floor_pow_array(ns, a, exact=exact) + c for a, c in zip(alpha, shifts)]


def _real_product_sum(n, alpha, shifts, table: np.ndarray, exact: bool) -> float:
    def chunk(lo: int, hi: int) -> float:
        prod = np.ones(hi - lo, dtype=np.float64)
        for m in _arguments(lo, hi, alpha, shifts, exact):
            # arguments <= 1 carry weight 0 (Lambda(1) = 0, and nothing below 1)
            prod *= np.where(m >= 2, table[np.maximum(m, 0)], 0.0)
        return fsum(prod)

    return fsum(map_chunks(chunk, 1, n + 1))


def _int_product_sum(n, alpha, table: np.ndarray, exact: bool) -> int:
    shifts = (0,) * len(alpha)

    def chunk(lo: int, hi: int) -> int:
        args = _arguments(lo, hi, alpha, shifts, exact)
        vals = [table[m] for m in args]
        bound = math.prod(int(v.max()) for v in vals) * (hi - lo)
        if bound < 2**63:
            prod = np.ones(hi - lo, dtype=np.int64)
            for v in vals:
                prod *= v.astype(np.int64)
            return int(prod.sum())
        prod = np.ones(hi - lo, dtype=object)
        for v in vals:
            prod = prod * v.astype(object)
        return int(sum(prod.tolist()))

    return sum(map_chunks(chunk, 1, n + 1))


def _log_power(n: int, k: int) -> float:
    return math.log(n) ** k if n > 1 else 0.0


def thm1_error_exponent(alpha: ExponentTuple) -> float:
    return (3 + 2 * alpha.gamma) / 5 - 9 * alpha.delta / 20 + float(alpha.total)


def lambda_corr_sum(n: int, alpha: ExponentTuple, shifts: Optional[Sequence[int]], tables: ArithTables,
                    *, exact: bool = False) -> CorrelationReport:
    """sum_{n <= N} prod_i Lambda(floor(n^a_i) + c_i), with Lambda(m) = 0 for m <= 1."""
    shifts = _shifts(alpha, shifts)
    _check_table(n, alpha, shifts, tables)
    measured = _real_product_sum(n, alpha, shifts, tables.von_mangoldt, exact)
    err = n ** thm1_error_exponent(alpha) * _log_power(n, 2 * len(alpha) + 1)
    return CorrelationReport(n, measured, float(n), err)


def simultaneous_prime_count(n: int, alpha: ExponentTuple, shifts: Optional[Sequence[int]],
                             tables: ArithTables, *, exact: bool = False) -> CorrelationReport:
    """#{n <= N : floor(n^a_i) + c_i is prime for every i}; report-only, main term 0."""
    shifts = _shifts(alpha, shifts)
    _check_table(n, alpha, shifts, tables)

    def chunk(lo: int, hi: int) -> int:
        ok = np.ones(hi - lo, dtype=bool)
        for m in _arguments(lo, hi, alpha, shifts, exact):
            ok &= (m >= 2) & (tables.divisor_count[np.maximum(m, 0)] == 2)
        return int(ok.sum())

    return CorrelationReport(n, sum(map_chunks(chunk, 1, n + 1)), 0.0, math.nan)


def squarefree_corr_sum(n: int, alpha: ExponentTuple, tables: ArithTables, *, exact: bool = False) -> CorrelationReport:
    shifts = (0,) * len(alpha)
    _check_table(n, alpha, shifts, tables)
    measured = _int_product_sum(n, alpha, tables.mobius_sq, exact)
    k = len(alpha)
    expo = max(1 - alpha.delta / 2, float(alpha.total) / 2 + (3 + 2 * alpha.gamma) / 5 - 9 * alpha.delta / 20)
    return CorrelationReport(n, measured, n / ZETA2**k, n**expo * _log_power(n, k + 1))


def divisor_corr_sum(n: int, alpha: ExponentTuple, tables: ArithTables, *, exact: bool = False) -> CorrelationReport:
    shifts = (0,) * len(alpha)
    _check_table(n, alpha, shifts, tables)
    measured = _int_product_sum(n, alpha, tables.divisor_count, exact)
    k = len(alpha)
    main = float(math.prod(alpha.exponents)) * n * _log_power(n, k)
    return CorrelationReport(n, measured, main, n ** thm1_error_exponent(alpha) * _log_power(n, k + 1))


def sigma_corr_sum(n: int, alpha: ExponentTuple, tables: ArithTables, *, exact: bool = False) -> CorrelationReport:
    shifts = (0,) * len(alpha)
    _check_table(n, alpha, shifts, tables)
    measured = _int_product_sum(n, alpha, tables.divisor_sum, exact)
    k = len(alpha)
    total = float(alpha.total)
    main = float(n) ** (1 + total)
    expo = (3 + 2 * alpha.gamma) / 5 - 9 * alpha.delta / 20 + 2 * total
    return CorrelationReport(n, measured, main, n**expo * _log_power(n, k + 1))


# --- admissibility, all in exact rational arithmetic --------------------------


def thm1_admissible(alpha: ExponentTuple) -> bool:
    """sum a_i <= 9 delta/20 - 2 gamma/5 + 2/5."""
    rhs = Fraction(9, 20) * alpha.delta_exact - Fraction(2, 5) * alpha.gamma_exact + Fraction(2, 5)
    return alpha.total <= rhs


def squarefree_admissible(alpha: ExponentTuple) -> bool:
    """sum a_i < (4 - 4 gamma)/5 + 9 delta/20 (strict)."""
    rhs = (4 - 4 * alpha.gamma_exact) / 5 + Fraction(9, 20) * alpha.delta_exact
    return alpha.total < rhs


def _ordered_pair(alpha: RationalLike, beta: RationalLike) -> tuple:
    a, b = as_exponent(alpha), as_exponent(beta)
    if not b < a:
        raise InvalidArgument(f"need 0 < beta < alpha < 1, got alpha={a}, beta={b}")
    return a, b


def corollary_admissible(alpha: RationalLike, beta: RationalLike) -> bool:
    """28 alpha + 11 beta <= 8."""
    a, b = _ordered_pair(alpha, beta)
    return 28 * a + 11 * b <= 8


def short_interval_admissible(alpha: RationalLike, beta: RationalLike) -> bool:
    """beta < 0.475 alpha, with 0.475 taken as exactly 19/40."""
    a, b = _ordered_pair(alpha, beta)
    return b < Fraction(19, 40) * a


RULES: dict = {
    "thm1": thm1_admissible,
    "squarefree": squarefree_admissible,
    "corollary": corollary_admissible,
    "short-interval": short_interval_admissible,
}
