"""Counting-based ranking models for kill matrices.

Each scorer maps every method that hosts at least one mutant to a
suspiciousness score; higher is more suspicious.  The per-method prior and
the normalising constant of Bayes' rule cancel out of the argmax, so what
remains are plain counts over the mutants of a method:

========== =====================================================
em_f       mutants whose kill set equals the failing set
em_fp      as em_f, additionally killed by no passing test
pm_add_f   sum over failing tests of mutants killed by the test
pm_mult_f  product over failing tests of (kill count + eps)
pm_add_fp  sum over all snapshot tests of agreeing mutants
pm_mult_fp product over all snapshot tests of (agreeing + eps)
========== =====================================================

A mutant *agrees* with a test when the test fails and kills it, or the test
passes and does not kill it.  The multiplicative scores are returned as the
natural log of the product; ranking is unaffected.
"""

from __future__ import annotations

import math
from collections import Counter

from .corpus import FailureSnapshot, KillMatrix

DEFAULT_EPSILON = 1e-4


def check_epsilon(eps: float) -> float:
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
    return eps


def _kill_sets(km: KillMatrix):
    for method, idx in km.by_method.items():
        yield method, [km.mutants[i].kill_set for i in idx]


def score_em_f(km: KillMatrix, snap: FailureSnapshot) -> dict:
    target = snap.failing
    return {method: sum(1 for ks in kill_sets if ks == target)
            for method, kill_sets in _kill_sets(km)}


def score_em_fp(km: KillMatrix, snap: FailureSnapshot) -> dict:
    # Exact match on the failing set and no kill by any passing test.  The
    # snapshot may hold only a subset of the suite, so "passes everything
    # else" is checked against the supplied passing set.
    target, passing = snap.failing, snap.passing
    return {method: sum(1 for ks in kill_sets
                        if ks == target and not (ks & passing))
            for method, kill_sets in _kill_sets(km)}


def _failing_counts(kill_sets, failing) -> list:
    return [sum(1 for ks in kill_sets if t in ks) for t in failing]


def _agreement_counts(kill_sets, failing, passing) -> list:
    counts = _failing_counts(kill_sets, failing)
    counts.extend(sum(1 for ks in kill_sets if t not in ks) for t in passing)
    return counts


def log_product(counts, eps: float) -> float:
    """``log(prod(c + eps))`` for integer counts.

    Grouping equal counts and summing with ``math.fsum`` makes the result
    depend only on the multiset of counts, so exact ties stay exact ties.
    """
    tally = Counter(counts)
    return math.fsum(k * math.log(c + eps) for c, k in sorted(tally.items()))


def score_pm_add_f(km: KillMatrix, snap: FailureSnapshot) -> dict:
    return {method: sum(_failing_counts(kill_sets, snap.failing))
            for method, kill_sets in _kill_sets(km)}


def score_pm_mult_f(km: KillMatrix, snap: FailureSnapshot,
                    eps: float = DEFAULT_EPSILON) -> dict:
    eps = check_epsilon(eps)
    return {method: log_product(_failing_counts(kill_sets, snap.failing), eps)
            for method, kill_sets in _kill_sets(km)}


def score_pm_add_fp(km: KillMatrix, snap: FailureSnapshot) -> dict:
    return {method: sum(_agreement_counts(kill_sets, snap.failing, snap.passing))
            for method, kill_sets in _kill_sets(km)}


def score_pm_mult_fp(km: KillMatrix, snap: FailureSnapshot,
                     eps: float = DEFAULT_EPSILON) -> dict:
    eps = check_epsilon(eps)
    return {method: log_product(
                _agreement_counts(kill_sets, snap.failing, snap.passing), eps)
            for method, kill_sets in _kill_sets(km)}
