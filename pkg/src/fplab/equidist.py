"""Counting n <= N with floor(n^a_i) = c_i (mod d_i) for all i, and discrepancy tools."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from .errors import InvalidArgument, ResourceError
from .expsum import exp_sum_range, fit_growth
from .floorpow import ExponentTuple, floor_pow_array, floor_pow_fast, frac_part_mask
from .parallel import fsum, map_chunks

LATTICE_BUDGET = 10**7
BOX_BUDGET = 2 * 10**8
_WORK_BLOCK = 1 << 22


@dataclass(frozen=True)
class CongruenceSpec:
    moduli: Tuple[int, ...]
    residues: Tuple[int, ...]

    def __post_init__(self) -> None:
        moduli = tuple(int(d) for d in self.moduli)
        residues = tuple(int(c) for c in self.residues)
        object.__setattr__(self, "moduli", moduli)
        object.__setattr__(self, "residues", residues)
        if len(moduli) != len(residues):
            raise InvalidArgument(f"{len(moduli)} moduli but {len(residues)} residues")
        for d, c in zip(moduli, residues):
            if d < 1:
                raise InvalidArgument(f"modulus {d} must be positive")
            if not 0 <= c < d:
                raise InvalidArgument(f"residue {c} outside [0, {d})")

    @property
    def k(self) -> int:
        return len(self.moduli)


@dataclass(frozen=True)
class EquidistResult:
    count: int
    main_term: float
    error: float
    thm2_reference: float


def thm2_reference(n: int, alpha: ExponentTuple, moduli: Sequence[int]) -> float:
    """N^((3 + 2 gamma - delta)/5) (log N)^(k+1) / min(d)^(1/4), constant 1."""
    expo = (3 + 2 * alpha.gamma - alpha.delta) / 5
    return n**expo * math.log(n) ** (len(alpha) + 1) / min(moduli) ** 0.25


def thm2_exponent(alpha: ExponentTuple) -> float:
    return (3 + 2 * alpha.gamma - alpha.delta) / 5


def _validate(n: int, spec: CongruenceSpec, alpha: ExponentTuple) -> None:
    if spec.k != len(alpha):
        raise InvalidArgument(f"{spec.k} congruences for {len(alpha)} exponents")
    if n < 1:
        raise InvalidArgument(f"N must be >= 1, got {n}")


def _result(n: int, count: int, spec: CongruenceSpec, alpha: ExponentTuple) -> EquidistResult:
    main = n / math.prod(spec.moduli)
    return EquidistResult(count, main, count - main, thm2_reference(n, alpha, spec.moduli))


def count_direct(n: int, spec: CongruenceSpec, alpha: ExponentTuple, *, exact: bool = False) -> EquidistResult:
    """S(N, d, c, alpha) by reducing floor(n^a_i) modulo d_i."""
    _validate(n, spec, alpha)

    def chunk(lo: int, hi: int) -> int:
        ns = np.arange(lo, hi, dtype=np.int64)
        ok = np.ones(ns.size, dtype=bool)
        for a, d, c in zip(alpha, spec.moduli, spec.residues):
            ok &= floor_pow_array(ns, a, exact=exact) % d == c
        return int(ok.sum())

    return _result(n, sum(map_chunks(chunk, 1, n + 1)), spec, alpha)


def count_fracparts(n: int, spec: CongruenceSpec, alpha: ExponentTuple, *, exact: bool = False) -> EquidistResult:
    """S(N, d, c, alpha) via c_i/d_i <= {n^a_i / d_i} < (c_i + 1)/d_i."""
    _validate(n, spec, alpha)

    def chunk(lo: int, hi: int) -> int:
        ns = np.arange(lo, hi, dtype=np.int64)
        ok = np.ones(ns.size, dtype=bool)
        for a, d, c in zip(alpha, spec.moduli, spec.residues):
            ok &= frac_part_mask(ns, a, d, c, exact=exact)
        return int(ok.sum())

    return _result(n, sum(map_chunks(chunk, 1, n + 1)), spec, alpha)


def error_slope(grid: Sequence[int], spec: CongruenceSpec, alpha: ExponentTuple) -> Tuple[float, List[int]]:
    """Log-log slope of |count - main term| over grid; points with |error| < 1 are dropped."""
    errors = [count_direct(n, spec, alpha).error for n in grid]
    return fit_growth(grid, errors, floor=1.0)


def fractional_points(n: int, alpha: ExponentTuple, moduli: Sequence[int]) -> np.ndarray:
    """The points ({n^a_1/d_1}, ..., {n^a_k/d_k}) for n = 1..N, shape (N, k)."""
    ns = np.arange(1, n + 1, dtype=np.float64)
    cols = []
    for a, d in zip(alpha, moduli):
        y = np.exp(float(a) * np.log(ns)) / d
        cols.append(y - np.floor(y))
    return np.stack(cols, axis=1)


# --- Erdos-Turan-Koksma ------------------------------------------------------


def etk_constant(k: int) -> int:
    return 2 * k * k * 3 ** (k + 1)


def lattice(m: int, k: int) -> Iterator[Tuple[int, ...]]:
    """Non-zero integer points with sup-norm <= m, in lexicographic order."""
    for ell in itertools.product(range(-m, m + 1), repeat=k):
        if any(ell):
            yield ell


def _check_lattice(m: int, k: int) -> None:
    if m < 1:
        raise InvalidArgument(f"m must be >= 1, got {m}")
    if not 1 <= k <= 4:
        raise InvalidArgument(f"dimension {k} outside 1..4")
    size = (2 * m + 1) ** k - 1
    if size > LATTICE_BUDGET:
        raise ResourceError(f"(2m+1)^k = {(2 * m + 1) ** k} lattice points exceed budget {LATTICE_BUDGET}")


def _weight(ell: Sequence[int]) -> float:
    return 1.0 / math.prod(max(abs(l), 1) for l in ell)


def etk_bound(points, m: int) -> float:
    """2 k^2 3^(k+1) (1/m + sum_{0 < |l|_inf <= m} |mean e(<l, x_n>)| / r(l))."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    n, k = pts.shape
    if n < 1:
        raise InvalidArgument("need at least one point")
    _check_lattice(m, k)
    ells = np.array(list(lattice(m, k)), dtype=np.float64)
    step = max(1, _WORK_BLOCK // n)
    terms = []
    for s in range(0, len(ells), step):
        block = ells[s : s + step]
        theta = 2.0 * math.pi * (pts @ block.T)
        mean = np.abs(np.exp(1j * theta).sum(axis=0)) / n
        weights = np.array([_weight(ell) for ell in block.astype(int).tolist()])
        terms.extend((weights * mean).tolist())
    return etk_constant(k) * (1.0 / m + fsum(terms))


def etk_bound_sequence(n: int, alpha: ExponentTuple, moduli: Sequence[int], m: int) -> float:
    """etk_bound for the points {n^a_i / d_i}, with inner sums as exponential sums.

    e(<l, x_n>) = e(sum l_i n^a_i / d_i), and l, -l give conjugate sums, so only
    lattice points whose first non-zero coordinate is positive are evaluated.
    """
    k = len(alpha)
    if len(moduli) != k:
        raise InvalidArgument(f"{len(moduli)} moduli for {k} exponents")
    _check_lattice(m, k)
    terms = []
    for ell in lattice(m, k):
        lead = next(l for l in ell if l)
        if lead < 0:
            continue
        freqs = [l / d for l, d in zip(ell, moduli)]
        s = exp_sum_range(freqs, alpha, 1, n + 1)
        terms.append(2.0 * _weight(ell) * abs(s) / n)
    return etk_constant(k) * (1.0 / m + fsum(terms))


def etk_default_m(n: int, alpha: ExponentTuple) -> int:
    """max(1, floor(N^(delta/5 - 2 gamma/5 + 2/5)))."""
    if n < 2:
        raise InvalidArgument(f"N must be >= 2, got {n}")
    expo = alpha.delta_exact / 5 - 2 * alpha.gamma_exact / 5 + Fraction(2, 5)
    return max(1, floor_pow_fast(n, expo))


# --- grid-restricted discrepancy --------------------------------------------


def _pairs(q: int) -> Tuple[np.ndarray, np.ndarray]:
    a, b = np.triu_indices(q + 1, k=1)
    return a, b


def aligned_box_discrepancy(points, grid_q: int) -> float:
    """max |A(J)/N - vol(J)| over boxes with corners on the grid (1/q) Z^k.

    A lower bound for the discrepancy D_N, which takes the sup over all boxes.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    n, k = pts.shape
    q = int(grid_q)
    if n < 1 or q < 1:
        raise InvalidArgument("need at least one point and grid_q >= 1")
    boxes = (q * (q + 1) // 2) ** k
    if k > 3 or q > 32 or boxes > BOX_BUDGET:
        raise ResourceError(f"{boxes} grid boxes in dimension {k} with q={q} exceed the budget (k <= 3, q <= 32)")
    cells = np.clip(np.floor(pts * q).astype(np.int64), 0, q - 1)
    flat = np.ravel_multi_index(tuple(cells.T), (q,) * k)
    hist = np.bincount(flat, minlength=q**k).reshape((q,) * k)
    prefix = np.zeros((q + 1,) * k, dtype=np.int64)
    prefix[(slice(1, None),) * k] = hist
    for ax in range(k):
        prefix = np.cumsum(prefix, axis=ax)

    a, b = _pairs(q)
    lengths = (b - a) / q
    table = prefix
    vol = np.ones((1,) * (k - 1))
    for ax in range(1, k):
        table = np.take(table, b, axis=ax) - np.take(table, a, axis=ax)
        shape = [1] * (k - 1)
        shape[ax - 1] = lengths.size
        vol = vol * lengths.reshape(shape)
    worst = 0.0
    step = max(1, _WORK_BLOCK // max(1, vol.size))
    for s in range(0, a.size, step):
        a0, b0 = a[s : s + step], b[s : s + step]
        counts = table[b0] - table[a0]
        v = lengths[s : s + step].reshape((-1,) + (1,) * (k - 1)) * vol
        worst = max(worst, float(np.abs(counts / n - v).max()))
    return worst
