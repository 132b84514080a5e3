"""Acceptance criteria, one test per criterion; each prints a PASS/FAIL line."""

import itertools
import math
import os
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from fplab.arith import build_tables, divisors, lambda_via_mobius
from fplab.battery import block_sum, random_config, random_exponents
from fplab.correlations import (
    ZETA2,
    corollary_admissible,
    lambda_corr_sum,
    short_interval_admissible,
    squarefree_corr_sum,
    thm1_admissible,
)
from fplab.equidist import (
    CongruenceSpec,
    aligned_box_discrepancy,
    count_direct,
    count_fracparts,
    error_slope,
    etk_bound,
    etk_default_m,
    fractional_points,
)
from fplab.expsum import growth_exponent, lemma2_check, sample_lemma2_family
from fplab.floorpow import ExponentTuple, floor_pow_exact, floor_pow_fast

HALF = ExponentTuple.of("0.5")
GRID = [10**3, 10**4, 10**5, 10**6]


@pytest.fixture
def verdict(capsys):
    def emit(number, name, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {name}: {detail}")
        assert ok, detail

    return emit


def test_c01_floor_pow_exactness(verdict):
    exponents = [Fraction(1, 2), Fraction(1, 3), Fraction(3, 10), Fraction(2, 3), Fraction(1, 4),
                 Fraction(3, 4), Fraction(1, 5), Fraction(2, 5), Fraction(1, 7), Fraction(5, 7),
                 Fraction(1, 10), Fraction(9, 10), Fraction(7, 20), Fraction(11, 12), Fraction(1, 6),
                 Fraction(5, 6), Fraction(123, 1000), Fraction(997, 1000), Fraction(3, 8), Fraction(8, 19)]
    assert len(set(exponents)) == 20
    start = time.perf_counter()
    mismatches = sum(1 for a in exponents for n in range(1, 10**5 + 1) if floor_pow_fast(n, a) != floor_pow_exact(n, a))
    elapsed = time.perf_counter() - start
    verdict(1, "floor_pow_fast == floor_pow_exact", mismatches == 0 and elapsed < 60,
            f"{mismatches} mismatches over 20 exponents x 1e5, {elapsed:.1f}s (limit 60s)")


def test_c02_dual_algorithm_and_partition(verdict):
    rng = np.random.default_rng(2024)
    bad = []
    for _ in range(200):
        n, spec, alpha = random_config(rng, 10**5, max_k=3, max_d=12)
        a, b = count_direct(n, spec, alpha).count, count_fracparts(n, spec, alpha).count
        if a != b:
            bad.append((n, spec, alpha, a, b))
    part_bad = []
    for _ in range(20):
        n, spec, alpha = random_config(rng, 10**5, max_k=3, max_d=5)
        total = sum(count_direct(n, CongruenceSpec(spec.moduli, c), alpha).count
                    for c in itertools.product(*(range(d) for d in spec.moduli)))
        if total != n:
            part_bad.append((n, spec, alpha, total))
    verdict(2, "dual-algorithm and partition", not bad and not part_bad,
            f"{len(bad)}/200 dual mismatches, {len(part_bad)}/20 partition failures")


def test_c03_identities(verdict):
    t = build_tables(10**4)
    worst = max(abs(t.von_mangoldt[n] - lambda_via_mobius(n, t)) for n in range(1, 10**4 + 1))
    sq_bad = 0
    for n in range(1, 10**4 + 1):
        s = sum(int(t.mobius[d]) for d in divisors(n) if n % (d * d) == 0)
        sq_bad += s != int(t.mobius_sq[n])
    verdict(3, "Lambda = -sum mu(d) log d, mu^2 = sum_{d^2|n} mu(d)", worst <= 1e-9 and sq_bad == 0,
            f"max |Lambda + sum mu log d| = {worst:.2e} (tol 1e-9), {sq_bad} squarefree mismatches")


def test_c04_theorem2_trend(verdict):
    start = time.perf_counter()
    slope, used = error_slope(GRID, CongruenceSpec((3,), (1,)), HALF)
    elapsed = time.perf_counter() - start
    verdict(4, "equidistribution error trend", slope <= 0.85 and elapsed < 300,
            f"slope {slope:.4f} (limit 0.85) over {used}, {elapsed:.1f}s (limit 300s)")


def test_c05_prop1_exponent(verdict):
    one = growth_exponent([1.0], HALF, GRID)
    two = growth_exponent([1.0, 1.0], ExponentTuple.of("0.3", "0.7"), GRID)
    verdict(5, "exponential-sum growth exponent", one.slope <= 0.725 and two.slope <= 0.875,
            f"h=1, a=1/2: {one.slope:.4f} (limit 0.725); h=(1,1), a=(0.3,0.7): {two.slope:.4f} (limit 0.875)")


def test_c06_lambda_ratio(verdict):
    t = build_tables(1001)
    r = lambda_corr_sum(10**6, HALF, [0], t)
    oracle = math.fsum(m * float(v) for m, v in block_sum(10**6, lambda j: t.von_mangoldt[j]))
    ok = 0.97 <= r.ratio <= 1.03 and abs(r.measured - oracle) <= 1e-9 * oracle
    verdict(6, "Lambda correlation ratio at N=1e6", ok,
            f"ratio {r.ratio:.6f} in [0.97, 1.03]; block oracle diff {abs(r.measured - oracle):.2e}")


def test_c07_squarefree_ratio(verdict):
    t = build_tables(1001)
    r = squarefree_corr_sum(10**6, HALF, t)
    small = squarefree_corr_sum(100, HALF, t).measured
    oracle = sum((2 * j + 1) * int(t.mobius_sq[j]) for j in range(1, 10)) + int(t.mobius_sq[10])
    ratio = r.measured / (10**6 / ZETA2)
    verdict(7, "squarefree correlation ratio at N=1e6", 0.95 <= ratio <= 1.05 and small == 55 == oracle,
            f"ratio {ratio:.6f} in [0.95, 1.05]; N=100 value {small} (oracle {oracle})")


def test_c08_etk_soundness(verdict):
    rng = np.random.default_rng(8)
    violations, checked, tight = [], 0, math.inf
    for i in range(40):
        k = 1 + i % 2
        n = int(rng.integers(2, 10**4 + 1))
        alpha = random_exponents(rng, k)
        moduli = tuple(int(d) for d in rng.integers(1, 13, size=k))
        pts = fractional_points(n, alpha, moduli)
        m = etk_default_m(n, alpha)
        bound, disc = etk_bound(pts, m), aligned_box_discrepancy(pts, 16)
        checked += 1
        tight = min(tight, bound - disc)
        if not bound >= disc:
            violations.append((n, alpha, moduli, m, bound, disc))
    verdict(8, "ETK bound >= aligned-box discrepancy", not violations,
            f"{len(violations)} violations over {checked} point sets, min margin {tight:.3g}")


def test_c09_lemma2(verdict):
    rng = np.random.default_rng(9)
    results = [lemma2_check(c.phase, c.a, c.b, c.m) for c in sample_lemma2_family(rng, 50)]
    bad = sum(not r.holds for r in results)
    worst = max(r.measured / r.bound for r in results)
    verdict(9, "oscillatory integral bound 8/sqrt(m)", bad == 0 and len(results) == 50,
            f"{bad} violations over {len(results)} members, max measured/bound {worst:.3f}")


def test_c10_condition_algebra(verdict):
    rng = np.random.default_rng(10)
    agree = []
    for _ in range(100):
        beta, alpha = sorted(Fraction(int(x), 1000) for x in rng.choice(np.arange(1, 1000), 2, replace=False))
        agree.append(corollary_admissible(alpha, beta) == thm1_admissible(ExponentTuple.of(beta, alpha)))
    boundary = corollary_admissible(Fraction(1, 4), Fraction(1, 11))
    assert 28 * Fraction(1, 4) + 11 * Fraction(1, 11) == 8
    strict = short_interval_admissible("0.4", "0.19")
    ok = all(agree) and boundary and not strict
    verdict(10, "condition-checker algebra", ok,
            f"{sum(agree)}/{len(agree)} pairs agree; 28a+11b=8 -> {boundary}; b=0.475a -> {strict}")


def _run_threads(tmp_path, threads, args):
    out = tmp_path / f"out{threads}_{args[0]}.csv"
    env = dict(os.environ, FPLAB_THREADS=str(threads))
    subprocess.run([sys.executable, "-m", "fplab", *args, "-o", str(out), "--runs-log", ""],
                   check=True, env=env, cwd=tmp_path)
    return out.read_bytes()


def test_c11_thread_determinism(verdict, tmp_path):
    experiments = [
        ["equidist", "--alpha", "0.3,0.7", "--moduli", "3,5", "--residues", "1,2", "--N-grid", "1000,300000"],
        ["expsum", "--alpha", "0.3,0.7", "--h", "1,1", "--N-grid", "1e3,1e4,1e5,1e6"],
        ["primes", "--alpha", "0.5", "--N-grid", "1000,500000"],
        ["sigma", "--alpha", "0.4,0.6", "--N-grid", "200000"],
    ]
    same = [_run_threads(tmp_path, 1, e) == _run_threads(tmp_path, 4, e) for e in experiments]
    verdict(11, "byte-identical CSV for FPLAB_THREADS 1 vs 4", all(same),
            f"{sum(same)}/{len(same)} experiments identical")
