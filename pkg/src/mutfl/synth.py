"""Synthetic kill matrices with a planted fault.

One method is picked as faulty.  Each failing test kills each of its mutants
with probability ``coupling``; every other (mutant, test) pair is a spurious
kill with probability ``noise``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import FailureSnapshot, KillMatrix, KillReason, Mutant
from .evaluation import GroundTruth

REASONS = (KillReason.ASSERTION, KillReason.TIMEOUT, KillReason.EXCEPTION)


@dataclass(frozen=True)
class SynthSpec:
    n_methods: int = 20
    mutants_per_method: tuple = (5, 5)
    n_tests: int = 30
    coupling: float = 0.9
    noise: float = 0.05
    n_failing: int = 3
    seed: int = 0
    reason_weights: tuple = (0.7, 0.1, 0.2)

    def __post_init__(self):
        lo, hi = self.mutants_per_method
        if self.n_methods < 1 or self.n_tests < 1 or self.n_failing < 1 or lo < 1:
            raise ValueError("counts must be >= 1")
        if hi < lo:
            raise ValueError("mutants_per_method range is empty")
        if self.n_failing > self.n_tests:
            raise ValueError("n_failing cannot exceed n_tests")
        for name in ("coupling", "noise"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        w = self.reason_weights
        if len(w) != 3 or min(w) < 0 or sum(w) <= 0:
            raise ValueError("reason_weights needs three non-negative weights")

    def to_json(self) -> dict:
        return {
            "n_methods": self.n_methods,
            "mutants_per_method": list(self.mutants_per_method),
            "n_tests": self.n_tests,
            "coupling": self.coupling,
            "noise": self.noise,
            "n_failing": self.n_failing,
            "seed": self.seed,
            "reason_weights": list(self.reason_weights),
        }


def method_name(i: int) -> str:
    return f"synth.Class{i // 10}#method{i}()"


def generate(spec: SynthSpec):
    """Return ``(KillMatrix, FailureSnapshot, GroundTruth)`` for ``spec``."""
    rng = np.random.default_rng(spec.seed)
    width = len(str(spec.n_tests))
    tests = [f"t{i + 1:0{width}d}" for i in range(spec.n_tests)]
    methods = [method_name(i) for i in range(spec.n_methods)]
    faulty = int(rng.integers(spec.n_methods))
    failing_idx = np.sort(rng.choice(spec.n_tests, size=spec.n_failing, replace=False))
    is_failing = np.zeros(spec.n_tests, dtype=bool)
    is_failing[failing_idx] = True

    weights = np.asarray(spec.reason_weights, dtype=float)
    weights = weights / weights.sum()
    lo, hi = spec.mutants_per_method

    mutants = []
    for mi, method in enumerate(methods):
        count = int(rng.integers(lo, hi + 1))
        for _ in range(count):
            p = np.full(spec.n_tests, spec.noise)
            if mi == faulty:
                p[is_failing] = spec.coupling
            kills = rng.random(spec.n_tests) < p
            reasons = rng.choice(3, size=spec.n_tests, p=weights)
            mutants.append(Mutant(
                f"m{len(mutants) + 1}", method,
                {tests[t]: REASONS[reasons[t]] for t in np.flatnonzero(kills)}))

    km = KillMatrix(tests, mutants)
    failing = frozenset(tests[i] for i in failing_idx)
    snap = FailureSnapshot(failing, frozenset(tests) - failing, frozenset(methods))
    return km, snap, GroundTruth(frozenset({methods[faulty]}))
