"""Probabilistic mutant-fault coupling and the method score built on it."""

from __future__ import annotations

from fractions import Fraction

from .corpus import FailureSnapshot, KillMatrix, Mutant


def pc(mutant: Mutant, snap: FailureSnapshot) -> Fraction:
    """Degree to which ``mutant`` is coupled to the observed fault.

    1 when every killing test also fails on the fault, the fraction of
    killing tests that fail when only some do, and 0 when none do.  A mutant
    no test kills scores 0: it carries no evidence either way.
    """
    kills = mutant.kill_set
    if not kills:
        return Fraction(0)
    shared = len(kills & snap.failing)
    if shared == len(kills):
        return Fraction(1)
    return Fraction(shared, len(kills))


def score_pc_fp(km: KillMatrix, snap: FailureSnapshot) -> dict:
    return {method: sum((pc(km.mutants[i], snap) for i in idx), Fraction(0))
            for method, idx in km.by_method.items()}
