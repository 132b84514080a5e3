"""Deterministic chunked map-reduce over integer ranges.

Chunk boundaries depend only on the range and ``CHUNK``; partial results are
combined in chunk order, so the answer is the same for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, Tuple, TypeVar

T = TypeVar("T")

CHUNK = 1 << 16


def worker_count() -> int:
    """Worker cap from FPLAB_THREADS, defaulting to the CPU count."""
    raw = os.environ.get("FPLAB_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def chunk_ranges(start: int, stop: int, size: int = CHUNK) -> List[Tuple[int, int]]:
    """Half-open ranges [lo, hi) covering [start, stop), aligned to multiples of size."""
    out = []
    lo = start
    while lo < stop:
        hi = min(stop, (lo // size + 1) * size)
        out.append((lo, hi))
        lo = hi
    return out


def map_chunks(fn: Callable[[int, int], T], start: int, stop: int, size: int = CHUNK) -> List[T]:
    ranges = chunk_ranges(start, stop, size)
    workers = min(worker_count(), len(ranges))
    if workers <= 1:
        return [fn(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: fn(*r), ranges))


def fsum(values) -> float:
    """Compensated sum of an iterable or array (exactly rounded, order independent)."""
    if hasattr(values, "tolist"):
        values = values.tolist()
    return math.fsum(values)


def complex_fsum(parts: Sequence[complex]) -> complex:
    return complex(math.fsum(z.real for z in parts), math.fsum(z.imag for z in parts))
