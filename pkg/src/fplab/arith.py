"""Sieved tables of von Mangoldt, Moebius, squarefree indicator, d(n) and sigma(n).

Memory cost is 22 bytes per entry: float64 Lambda, int8 mu, uint8 mu^2,
uint32 d(n) and uint64 sigma(n), held as five parallel arrays indexed 0..M
(index 0 is unused and zero).
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from .errors import InvalidArgument, RangeError, ResourceError
from .parallel import fsum

BYTES_PER_ENTRY = 8 + 1 + 1 + 4 + 8
MAX_LIMIT = 10**12
CACHE_MAGIC = b"FPLAB01"

_LAYOUT = (
    ("von_mangoldt", "<f8"),
    ("mobius", "<i1"),
    ("mobius_sq", "<u1"),
    ("divisor_count", "<u4"),
    ("divisor_sum", "<u8"),
)


@dataclass(frozen=True)
class ArithTables:
    limit: int
    von_mangoldt: np.ndarray
    mobius: np.ndarray
    mobius_sq: np.ndarray
    divisor_count: np.ndarray
    divisor_sum: np.ndarray

    def __post_init__(self) -> None:
        for name, _ in _LAYOUT:
            getattr(self, name).flags.writeable = False

    def check(self, n: int) -> None:
        if not 1 <= n <= self.limit:
            raise RangeError(f"argument {n} outside table range [1, {self.limit}]")

    def is_prime(self, n: np.ndarray) -> np.ndarray:
        return self.divisor_count[n] == 2

    def truncated(self, limit: int) -> "ArithTables":
        if limit > self.limit:
            raise RangeError(f"cannot extend table of limit {self.limit} to {limit}")
        return ArithTables(limit, *(getattr(self, name)[: limit + 1] for name, _ in _LAYOUT))


def prime_sieve(limit: int) -> np.ndarray:
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime)


def build_tables(limit: int) -> ArithTables:
    """Sieve Lambda, mu, mu^2, d and sigma on [1, limit].

    Every prime p touches its multiples once per prime power p^a <= limit, so
    the work is O(M log log M) strided array updates.
    """
    if limit < 2:
        raise InvalidArgument(f"table limit must be >= 2, got {limit}")
    if limit > MAX_LIMIT:
        raise InvalidArgument(f"table limit {limit} above {MAX_LIMIT} risks sigma overflow")
    size = limit + 1
    try:
        lam = np.zeros(size, dtype=np.float64)
        mu = np.ones(size, dtype=np.int8)
        dcount = np.ones(size, dtype=np.uint32)
        dsum = np.ones(size, dtype=np.uint64)
        primes = prime_sieve(limit)
    except MemoryError as exc:
        raise ResourceError(
            f"cannot allocate tables for limit {limit} ({size * BYTES_PER_ENTRY} bytes)"
        ) from exc

    lam[primes] = np.log(primes.astype(np.float64))
    for p in primes.tolist():
        mu[p::p] *= -1
        dcount[p::p] *= 2
        dsum[p::p] *= np.uint64(1 + p)
        if p * p > limit:
            continue
        mu[p * p :: p * p] = 0
        logp = math.log(p)
        pk, a, prev = p * p, 2, 1 + p
        while pk <= limit:
            cur = prev + pk
            lam[pk] = logp
            # multiples of p^a currently carry the factor for exponent a-1
            dcount[pk::pk] = dcount[pk::pk] // np.uint32(a) * np.uint32(a + 1)
            dsum[pk::pk] = dsum[pk::pk] // np.uint64(prev) * np.uint64(cur)
            pk, a, prev = pk * p, a + 1, cur

    mu[0] = 0
    dcount[0] = 0
    dsum[0] = 0
    mu_sq = (mu != 0).astype(np.uint8)
    return ArithTables(limit, lam, mu, mu_sq, dcount, dsum)


def divisors(n: int) -> List[int]:
    small, large = [], []
    for e in range(1, math.isqrt(n) + 1):
        if n % e == 0:
            small.append(e)
            if e != n // e:
                large.append(n // e)
    return small + large[::-1]


def lambda_via_mobius(n: int, tables: ArithTables) -> float:
    """-sum_{e | n} mu(e) log e by direct divisor enumeration."""
    tables.check(n)
    return -fsum(int(tables.mobius[e]) * math.log(e) for e in divisors(n))


def psi(x: int, tables: ArithTables) -> float:
    """Chebyshev psi(x) = sum_{n <= x} Lambda(n)."""
    tables.check(x)
    return fsum(tables.von_mangoldt[1 : x + 1])


def mobius_log_sum(x: int, tables: ArithTables) -> float:
    tables.check(x)
    n = np.arange(1, x + 1, dtype=np.float64)
    return -fsum(tables.mobius[1 : x + 1] * np.log(n) / n)


def mobius_sq_sum(x: int, tables: ArithTables) -> float:
    """sum_{n <= x} mu(n) / n^2, which tends to 6 / pi^2."""
    tables.check(x)
    n = np.arange(1, x + 1, dtype=np.float64)
    return fsum(tables.mobius[1 : x + 1] / (n * n))


def save_tables(tables: ArithTables, path: Union[str, Path]) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<Q", tables.limit))
        for name, dtype in _LAYOUT:
            fh.write(np.ascontiguousarray(getattr(tables, name), dtype=dtype).tobytes())
    os.replace(tmp, path)


def load_tables(path: Union[str, Path]) -> ArithTables:
    with open(path, "rb") as fh:
        magic = fh.read(len(CACHE_MAGIC))
        if magic != CACHE_MAGIC:
            raise InvalidArgument(f"{path}: not a table cache (bad magic {magic!r})")
        (limit,) = struct.unpack("<Q", fh.read(8))
        arrays = []
        for name, dtype in _LAYOUT:
            count = limit + 1
            arr = np.fromfile(fh, dtype=dtype, count=count)
            if arr.size != count:
                raise InvalidArgument(f"{path}: truncated array {name}")
            arrays.append(arr.astype(np.dtype(dtype).newbyteorder("=")))
    return ArithTables(limit, *arrays)


def cached_tables(limit: int, cache: Optional[Union[str, Path]] = None) -> ArithTables:
    """Build tables, reusing a cache file that covers the requested limit."""
    if cache is not None and Path(cache).exists():
        try:
            tables = load_tables(cache)
        except (InvalidArgument, OSError):
            tables = None
        if tables is not None and tables.limit >= limit:
            return tables.truncated(max(limit, 2))
    tables = build_tables(max(limit, 2))
    if cache is not None:
        save_tables(tables, cache)
    return tables
