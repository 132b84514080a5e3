"""Exact and fast evaluation of floor(n**alpha) for rational 0 < alpha < 1.

Exponents are exact rationals p/q, so floor(n**(p/q)) is the unique integer k
with k**q <= n**p < (k+1)**q.  The fast path evaluates n**alpha in binary64
and only falls back to integer arithmetic when the float lands within a
relative distance ``GUARD`` of an integer.
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

from .errors import InvalidArgument

GUARD = 1e-6
MAX_DENOMINATOR = 10**6

RationalLike = Union[Fraction, str, int]

_DECIMAL_RE = re.compile(r"^\s*0?\.(\d{1,6})\s*$")


class _FallbackCounter:
    """Process-wide tally of exact fallbacks taken by the fast paths."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.fast = 0
        self.fallback = 0

    def add(self, fast: int, fallback: int) -> None:
        with self._lock:
            self.fast += fast
            self.fallback += fallback

    def reset(self) -> None:
        with self._lock:
            self.fast = 0
            self.fallback = 0

    @property
    def rate(self) -> float:
        total = self.fast + self.fallback
        return self.fallback / total if total else 0.0


fallback_counter = _FallbackCounter()


def parse_exponent(text: str) -> Fraction:
    """Parse a decimal string such as ``"0.475"`` into an exact Fraction.

    Only values strictly inside (0, 1) with at most six fractional digits
    are accepted.
    """
    m = _DECIMAL_RE.match(text)
    if not m:
        raise InvalidArgument(
            f"exponent {text!r} must be a decimal in (0, 1) with at most 6 fractional digits"
        )
    value = Fraction(int(m.group(1)), 10 ** len(m.group(1)))
    if value <= 0:
        raise InvalidArgument(f"exponent {text!r} must be positive")
    return value


def as_exponent(value: RationalLike) -> Fraction:
    if isinstance(value, str):
        if "/" in value:
            value = Fraction(value)
        else:
            return parse_exponent(value)
    if isinstance(value, float):
        raise InvalidArgument("binary floats are not accepted as exponents; pass a decimal string")
    value = Fraction(value)
    if not 0 < value < 1:
        raise InvalidArgument(f"exponent {value} outside (0, 1)")
    if value.denominator > MAX_DENOMINATOR:
        raise InvalidArgument(f"exponent {value} has denominator above {MAX_DENOMINATOR}")
    return value


@dataclass(frozen=True)
class ExponentTuple:
    """Strictly increasing exponents 0 < a_1 < ... < a_k < 1."""

    exponents: tuple

    def __post_init__(self) -> None:
        exps = tuple(as_exponent(a) for a in self.exponents)
        if not exps:
            raise InvalidArgument("at least one exponent is required")
        for lo, hi in zip(exps, exps[1:]):
            if not lo < hi:
                raise InvalidArgument(
                    f"exponents must be strictly increasing and distinct, got {lo} then {hi}"
                )
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def of(cls, *values: RationalLike) -> "ExponentTuple":
        return cls(tuple(values))

    @classmethod
    def parse(cls, text: str) -> "ExponentTuple":
        return cls(tuple(part for part in text.split(",") if part.strip()))

    @classmethod
    def sorted(cls, values: Iterable[RationalLike]) -> "ExponentTuple":
        return cls(tuple(sorted(as_exponent(v) for v in values)))

    def __len__(self) -> int:
        return len(self.exponents)

    def __iter__(self):
        return iter(self.exponents)

    def __getitem__(self, i: int) -> Fraction:
        return self.exponents[i]

    @property
    def k(self) -> int:
        return len(self.exponents)

    @property
    def gamma_exact(self) -> Fraction:
        return self.exponents[-1]

    @property
    def delta_exact(self) -> Fraction:
        return self.exponents[0]

    @property
    def gamma(self) -> float:
        return float(self.exponents[-1])

    @property
    def delta(self) -> float:
        return float(self.exponents[0])

    @property
    def total(self) -> Fraction:
        return sum(self.exponents, Fraction(0))

    def __str__(self) -> str:
        return ",".join(_fraction_to_decimal(a) for a in self.exponents)


def _fraction_to_decimal(a: Fraction) -> str:
    for digits in range(1, 7):
        scaled = a * 10 ** digits
        if scaled.denominator == 1:
            return f"0.{scaled.numerator:0{digits}d}"
    return f"{a.numerator}/{a.denominator}"


def _check(n: int, alpha: Fraction) -> None:
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    if not 0 < alpha < 1:
        raise InvalidArgument(f"exponent {alpha} outside (0, 1)")


def iroot(y: int, q: int) -> int:
    """Largest integer k >= 0 with k**q <= y."""
    if y < 0:
        raise InvalidArgument("iroot of a negative number")
    if y < 2 or q == 1:
        return y
    k = int(math.exp(math.log(y) / q))
    while k ** q > y:
        k -= 1
    while (k + 1) ** q <= y:
        k += 1
    return k


def floor_pow_exact(n: int, alpha: Fraction) -> int:
    """Return floor(n**alpha) as the unique k with k**q <= n**p < (k+1)**q."""
    alpha = Fraction(alpha)
    _check(n, alpha)
    p, q = alpha.numerator, alpha.denominator
    target = n ** p
    # binary64 estimate is almost always within one of the answer
    k = int(math.exp(p * math.log(n) / q))
    while k ** q > target:
        k -= 1
    while (k + 1) ** q <= target:
        k += 1
    return k


def _near_integer(x: float) -> bool:
    return abs(x - round(x)) <= GUARD * max(1.0, x)


def floor_pow_fast(n: int, alpha: Fraction) -> int:
    alpha = Fraction(alpha)
    _check(n, alpha)
    x = math.exp(float(alpha) * math.log(n))
    if _near_integer(x):
        fallback_counter.add(0, 1)
        return floor_pow_exact(n, alpha)
    fallback_counter.add(1, 0)
    return int(x)


def floor_pow_array(n: np.ndarray, alpha: Fraction, *, exact: bool = False) -> np.ndarray:
    """Vectorised floor(n**alpha) over an int64 array, same guard as the fast path."""
    alpha = Fraction(alpha)
    n = np.asarray(n, dtype=np.int64)
    if exact:
        return np.fromiter((floor_pow_exact(int(v), alpha) for v in n), dtype=np.int64, count=n.size)
    if n.size and n.min() < 1:
        raise InvalidArgument("n must be >= 1")
    x = np.exp(float(alpha) * np.log(n.astype(np.float64)))
    out = np.floor(x).astype(np.int64)
    suspect = np.abs(x - np.rint(x)) <= GUARD * np.maximum(1.0, x)
    idx = np.flatnonzero(suspect)
    for i in idx:
        out[i] = floor_pow_exact(int(n[i]), alpha)
    fallback_counter.add(n.size - idx.size, idx.size)
    return out


def frac_part_criterion(n: int, alpha: Fraction, d: int, r: int) -> bool:
    """Decide r/d <= {n**alpha / d} < (r+1)/d exactly.

    With t = floor(n**alpha / d) the condition reads d*t + r <= n**alpha < d*t + r + 1,
    which is settled by comparing n**p against q-th powers of the two endpoints.
    """
    alpha = Fraction(alpha)
    _check(n, alpha)
    if d < 1:
        raise InvalidArgument(f"modulus must be >= 1, got {d}")
    if not 0 <= r < d:
        raise InvalidArgument(f"residue {r} outside [0, {d})")
    p, q = alpha.numerator, alpha.denominator
    target = n ** p
    t = iroot(target // d ** q, q)
    lo = d * t + r
    return lo ** q <= target < (lo + 1) ** q


def frac_part_mask(n: np.ndarray, alpha: Fraction, d: int, r: int, *, exact: bool = False) -> np.ndarray:
    """Vectorised frac_part_criterion.

    Evaluates {n**alpha / d} in binary64 and resolves any value whose scaled
    fractional part sits within the guard of a grid point j/d exactly.
    """
    alpha = Fraction(alpha)
    if d < 1:
        raise InvalidArgument(f"modulus must be >= 1, got {d}")
    if not 0 <= r < d:
        raise InvalidArgument(f"residue {r} outside [0, {d})")
    n = np.asarray(n, dtype=np.int64)
    if exact:
        return np.fromiter((frac_part_criterion(int(v), alpha, d, r) for v in n), dtype=bool, count=n.size)
    x = np.exp(float(alpha) * np.log(n.astype(np.float64)))
    y = x / d
    frac = y - np.floor(y)
    scaled = frac * d
    out = (scaled >= r) & (scaled < r + 1)
    suspect = np.abs(scaled - np.rint(scaled)) <= GUARD * np.maximum(1.0, x)
    idx = np.flatnonzero(suspect)
    for i in idx:
        out[i] = frac_part_criterion(int(n[i]), alpha, d, r)
    fallback_counter.add(n.size - idx.size, idx.size)
    return out

