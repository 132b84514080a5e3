"""Desk-scale experiments on floor(n^alpha): counting, exponential sums, discrepancy and correlations."""

__version__ = "0.1.0"

from .arith import ArithTables, build_tables, lambda_via_mobius, mobius_log_sum, mobius_sq_sum, psi
from .correlations import (
    CorrelationReport,
    corollary_admissible,
    divisor_corr_sum,
    lambda_corr_sum,
    short_interval_admissible,
    sigma_corr_sum,
    simultaneous_prime_count,
    squarefree_admissible,
    squarefree_corr_sum,
    thm1_admissible,
)
from .equidist import (
    CongruenceSpec,
    EquidistResult,
    aligned_box_discrepancy,
    count_direct,
    count_fracparts,
    etk_bound,
    etk_default_m,
)
from .expsum import ExpSumParams, ExpSumResult, exp_sum, growth_exponent, lemma2_check
from .floorpow import ExponentTuple, floor_pow_exact, floor_pow_fast, frac_part_criterion

__all__ = [
    "ArithTables",
    "build_tables",
    "lambda_via_mobius",
    "mobius_log_sum",
    "mobius_sq_sum",
    "psi",
    "CorrelationReport",
    "corollary_admissible",
    "divisor_corr_sum",
    "lambda_corr_sum",
    "short_interval_admissible",
    "sigma_corr_sum",
    "simultaneous_prime_count",
    "squarefree_admissible",
    "squarefree_corr_sum",
    "thm1_admissible",
    "CongruenceSpec",
    "EquidistResult",
    "aligned_box_discrepancy",
    "count_direct",
    "count_fracparts",
    "etk_bound",
    "etk_default_m",
    "ExpSumParams",
    "ExpSumResult",
    "exp_sum",
    "growth_exponent",
    "lemma2_check",
    "ExponentTuple",
    "floor_pow_exact",
    "floor_pow_fast",
    "frac_part_criterion",
]
