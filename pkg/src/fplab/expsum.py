"""Multi-frequency exponential sums S(N, h, alpha) = sum_{n<=N} e(sum_i h_i n^alpha_i).

Also: the growth-exponent fit against the proved bound shape, and a numerical
check of the second-derivative bound |int_a^b exp(iF)| <= 8/sqrt(m).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Sequence, Tuple

import mpmath
import numpy as np

from .errors import DegenerateFitError, FPLabError, InvalidArgument, NumericError
from .floorpow import ExponentTuple
from .parallel import complex_fsum, fsum, map_chunks

TWO_PI = 2.0 * math.pi
PRECISION_CLIFF = 2.0**52


@dataclass(frozen=True)
class ExpSumParams:
    frequencies: Tuple[float, ...]
    exponents: ExponentTuple
    n_limit: int

    def __post_init__(self) -> None:
        freqs = tuple(float(h) for h in self.frequencies)
        object.__setattr__(self, "frequencies", freqs)
        if len(freqs) != len(self.exponents):
            raise InvalidArgument(
                f"{len(freqs)} frequencies for {len(self.exponents)} exponents"
            )
        if all(h == 0 for h in freqs):
            raise InvalidArgument("at least one frequency must be non-zero")
        if self.n_limit < 1:
            raise InvalidArgument(f"N must be >= 1, got {self.n_limit}")


@dataclass(frozen=True)
class ExpSumResult:
    value: complex
    modulus: float
    prop1_reference: float

    @property
    def ratio(self) -> float:
        """|S| divided by the bound shape (the empirical implied constant)."""
        return self.modulus / self.prop1_reference if self.prop1_reference > 0 else math.nan


def prop1_reference(frequencies: Sequence[float], alpha: ExponentTuple, n: int) -> float:
    """(sum|h|)^(1/4) N^(1/2 + gamma/2 - delta/4) log(N sum|h|) log N, constant 1."""
    hsum = fsum(abs(h) for h in frequencies)
    expo = 0.5 + alpha.gamma / 2 - alpha.delta / 4
    return hsum**0.25 * n**expo * math.log(n * hsum) * math.log(n)


def proved_exponent(alpha: ExponentTuple) -> float:
    return 0.5 + alpha.gamma / 2 - alpha.delta / 4


def _frac(y: np.ndarray) -> np.ndarray:
    return y - np.floor(y)


def _exact_phase(n: int, h: float, a: Fraction) -> float:
    """frac(h * n^a) in high precision, for terms beyond the binary64 cliff."""
    mag = abs(h) * math.exp(float(a) * math.log(n))
    with mpmath.workdps(int(math.log10(mag + 1)) + 30):
        y = mpmath.mpf(h) * mpmath.power(n, mpmath.mpf(a.numerator) / a.denominator)
        return float(y - mpmath.floor(y))


def phases(n: np.ndarray, frequencies: Sequence[float], alpha: ExponentTuple) -> np.ndarray:
    """sum_i h_i n^alpha_i reduced mod 1, per n."""
    logn = np.log(n.astype(np.float64))
    total = np.zeros(n.size, dtype=np.float64)
    for h, a in zip(frequencies, alpha):
        if h == 0:
            continue
        y = h * np.exp(float(a) * logn)
        term = _frac(y)
        for i in np.flatnonzero(np.abs(y) >= PRECISION_CLIFF):
            term[i] = _exact_phase(int(n[i]), h, a)
        total += term
    return _frac(total)


def _chunk_sum(frequencies, alpha, lo: int, hi: int) -> complex:
    n = np.arange(lo, hi, dtype=np.int64)
    theta = TWO_PI * phases(n, frequencies, alpha)
    return complex(fsum(np.cos(theta)), fsum(np.sin(theta)))


def exp_sum_range(frequencies: Sequence[float], alpha: ExponentTuple, start: int, stop: int) -> complex:
    """Sum of e(sum h_i n^alpha_i) over start <= n < stop."""
    parts = map_chunks(lambda lo, hi: _chunk_sum(frequencies, alpha, lo, hi), start, stop)
    return complex_fsum(parts)


def exp_sum(params: ExpSumParams) -> ExpSumResult:
    value = exp_sum_range(params.frequencies, params.exponents, 1, params.n_limit + 1)
    return ExpSumResult(
        value=value,
        modulus=abs(value),
        prop1_reference=prop1_reference(params.frequencies, params.exponents, params.n_limit),
    )


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    lx = [math.log(x) for x in xs]
    ly = [math.log(y) for y in ys]
    mx = fsum(lx) / len(lx)
    my = fsum(ly) / len(ly)
    sxx = fsum((u - mx) ** 2 for u in lx)
    sxy = fsum((u - mx) * (v - my) for u, v in zip(lx, ly))
    return sxy / sxx


def fit_growth(grid: Sequence[int], values: Sequence[float], *, floor: float = 0.0) -> Tuple[float, List[int]]:
    """Slope over the points with |value| > floor; returns (slope, kept N values)."""
    kept = [(n, abs(v)) for n, v in zip(grid, values) if abs(v) > floor]
    dropped = [n for n, v in zip(grid, values) if abs(v) <= floor]
    if dropped:
        warnings.warn(f"dropping grid points {dropped} with |value| <= {floor}", RuntimeWarning)
    if len(kept) < 3:
        raise DegenerateFitError(f"only {len(kept)} usable grid points, need 3")
    ns = [n for n, _ in kept]
    return loglog_slope(ns, [v for _, v in kept]), ns


@dataclass(frozen=True)
class GrowthFit:
    slope: float
    proved_exponent: float
    grid: Tuple[int, ...]
    moduli: Tuple[float, ...]
    used: Tuple[int, ...]

    def __float__(self) -> float:
        return self.slope


def check_grid(grid: Sequence[int]) -> List[int]:
    grid = list(grid)
    if len(grid) < 4:
        raise InvalidArgument("growth fits need at least 4 grid points")
    if any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
        raise InvalidArgument("grid must be strictly increasing positive integers")
    if grid[-1] < 100 * grid[0]:
        raise InvalidArgument("grid must span at least two decades")
    return grid


def growth_exponent(frequencies: Sequence[float], alpha: ExponentTuple, grid: Sequence[int]) -> GrowthFit:
    grid = check_grid(grid)
    moduli = [exp_sum(ExpSumParams(tuple(frequencies), alpha, n)).modulus for n in grid]
    slope, used = fit_growth(grid, moduli)
    return GrowthFit(slope, proved_exponent(alpha), tuple(grid), tuple(moduli), tuple(used))


# --- second-derivative test --------------------------------------------------

_GL_LO = np.polynomial.legendre.leggauss(16)
_GL_HI = np.polynomial.legendre.leggauss(32)
_MAX_SAMPLES = 1 << 24
_BATCH = 1 << 14


class BoundViolation(FPLabError, AssertionError):
    pass


@dataclass(frozen=True)
class PhaseFunction:
    """A real phase F with vectorised F and F'' evaluators."""

    value: Callable[[np.ndarray], np.ndarray]
    second: Callable[[np.ndarray], np.ndarray]
    label: str = ""


def quadratic_phase(c: float) -> PhaseFunction:
    return PhaseFunction(lambda x: c * x * x, lambda x: np.full_like(x, 2.0 * c), f"{c:g}*x^2")


def power_phase(frequencies: Sequence[float], alpha: ExponentTuple, linear: float = 0.0) -> PhaseFunction:
    """F(t) = 2 pi (sum h_i t^a_i + linear * t), as in the dyadic-block argument."""
    hs = [float(h) for h in frequencies]
    als = [float(a) for a in alpha]

    def value(t):
        return TWO_PI * (sum(h * t**a for h, a in zip(hs, als)) + linear * t)

    def second(t):
        return TWO_PI * sum(h * a * (a - 1.0) * t ** (a - 2.0) for h, a in zip(hs, als))

    return PhaseFunction(value, second, f"h={hs} alpha={alpha} linear={linear:g}")


@dataclass(frozen=True)
class Lemma2Result:
    measured: float
    bound: float
    intervals: int
    error_estimate: float

    @property
    def holds(self) -> bool:
        return self.measured <= self.bound


def _gl(phase: PhaseFunction, lo: np.ndarray, hi: np.ndarray, rule) -> np.ndarray:
    nodes, weights = rule
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * nodes[None, :]
    f = np.exp(1j * phase.value(x))
    return half * (f @ weights)


def oscillatory_integral(phase: PhaseFunction, a: float, b: float, tol: float = 1e-8) -> Tuple[complex, int, float]:
    """Adaptive Gauss-Legendre integral of exp(iF) over [a, b].

    The interval is first cut so that F moves by at most pi/2 per piece, then
    16- and 32-point rules are compared per piece; pieces whose disagreement
    exceeds their share of ``tol`` are bisected.
    """
    samples = 1025
    while True:
        x = np.linspace(a, b, samples)
        jumps = np.abs(np.diff(phase.value(x)))
        if jumps.max(initial=0.0) <= math.pi / 2:
            break
        samples = 2 * samples - 1
        if samples > _MAX_SAMPLES:
            raise NumericError(f"phase too oscillatory on [{a}, {b}]: over {_MAX_SAMPLES} intervals")
    lo, hi = x[:-1], x[1:]
    total = []
    err_total = 0.0
    pieces = 0
    for depth in range(30):
        if lo.size == 0:
            break
        share = tol * (hi - lo) / (b - a)
        next_lo, next_hi = [], []
        for s in range(0, lo.size, _BATCH):
            blo, bhi = lo[s : s + _BATCH], hi[s : s + _BATCH]
            coarse = _gl(phase, blo, bhi, _GL_LO)
            fine = _gl(phase, blo, bhi, _GL_HI)
            err = np.abs(fine - coarse)
            # the rules cannot agree closer than the rounding error of F itself
            noise = 64.0 * np.finfo(float).eps * (bhi - blo) * (1.0 + np.abs(phase.value(0.5 * (blo + bhi))))
            ok = err <= np.maximum(share[s : s + _BATCH], noise)
            total.extend(fine[ok].tolist())
            err_total += fsum(err[ok])
            pieces += int(ok.sum())
            mids = 0.5 * (blo[~ok] + bhi[~ok])
            next_lo += [blo[~ok], mids]
            next_hi += [mids, bhi[~ok]]
        lo = np.concatenate(next_lo) if next_lo else np.empty(0)
        hi = np.concatenate(next_hi) if next_hi else np.empty(0)
    if lo.size:
        raise NumericError(f"quadrature did not converge: {lo.size} of {pieces + lo.size} intervals unresolved")
    return complex_fsum(total), pieces, err_total


def lemma2_check(phase: PhaseFunction, a: float, b: float, m: float, tol: float = 1e-8) -> Lemma2Result:
    """Measure |int_a^b exp(iF)| and compare with 8/sqrt(m).

    ``m`` must be a certified lower bound for |F''| on [a, b].
    """
    if not b > a:
        raise InvalidArgument(f"empty interval [{a}, {b}]")
    if not m > 0:
        raise InvalidArgument(f"m must be positive, got {m}")
    value, pieces, err = oscillatory_integral(phase, a, b, tol)
    result = Lemma2Result(abs(value), 8.0 / math.sqrt(m), pieces, err)
    if not result.holds:
        raise BoundViolation(
            f"|integral| = {result.measured:.6g} exceeds 8/sqrt(m) = {result.bound:.6g} for {phase.label}"
        )
    return result


@dataclass(frozen=True)
class Lemma2Case:
    phase: PhaseFunction
    a: float
    b: float
    m: float
    proof_shape: float = field(default=math.nan)


def dyadic_case(frequencies: Sequence[float], alpha: ExponentTuple, w: float, linear: float = 0.0) -> Lemma2Case:
    """Phase on [W, 2W] with m = min |F''| certified at the endpoints.

    With all h_i of one sign every term of F'' has the same sign and decreasing
    magnitude, so the minimum of |F''| sits at an endpoint.
    """
    signs = {math.copysign(1.0, h) for h in frequencies if h != 0}
    if len(signs) != 1:
        raise InvalidArgument("dyadic family needs non-zero frequencies of a single sign")
    phase = power_phase(frequencies, alpha, linear)
    ends = np.abs(phase.second(np.array([w, 2.0 * w])))
    shape = abs(sum(frequencies)) * w ** (alpha.delta - 2.0)
    return Lemma2Case(phase, w, 2.0 * w, float(ends.min()), shape)


def sample_lemma2_family(rng: np.random.Generator, count: int) -> List[Lemma2Case]:
    """Random dyadic blocks plus scaled quadratics, all with certified m."""
    choices = ["0.1", "0.25", "0.3", "0.5", "0.7", "0.75", "0.9"]
    cases = []
    for i in range(count):
        if i % 5 == 4:
            c = float(10 ** rng.uniform(-1, 6))
            cases.append(Lemma2Case(quadratic_phase(c), 0.0, 1.0, 2.0 * c, 2.0 * c))
            continue
        k = int(rng.integers(1, 4))
        alpha = ExponentTuple.sorted(rng.choice(choices, size=k, replace=False).tolist())
        sign = 1.0 if rng.random() < 0.5 else -1.0
        freqs = [sign * float(10 ** rng.uniform(-1, 1)) for _ in range(k)]
        w = float(10 ** rng.uniform(1, 4))
        linear = float(rng.integers(0, 2))
        cases.append(dyadic_case(freqs, alpha, w, linear))
    return cases
