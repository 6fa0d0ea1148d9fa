"""Rankings with max tie-breaking, and the acc@n / wef / MAP metrics."""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

DEFAULT_ACC_N = (1, 3, 5, 10)


@dataclass(frozen=True)
class RankedMethod:
    method: str
    score: object
    rank: int


@dataclass(frozen=True)
class Ranking:
    entries: tuple

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def rank_of(self, method) -> float:
        """Rank of ``method``, or ``math.inf`` if it was not ranked."""
        for e in self.entries:
            if e.method == method:
                return e.rank
        return math.inf

    def ranks(self) -> dict:
        return {e.method: e.rank for e in self.entries}


@dataclass(frozen=True)
class GroundTruth:
    faulty_methods: frozenset

    def __post_init__(self):
        object.__setattr__(self, "faulty_methods", frozenset(self.faulty_methods))
        if not self.faulty_methods:
            raise ValueError("ground truth needs at least one faulty method")

    def to_json(self) -> dict:
        return {"faulty_methods": sorted(self.faulty_methods)}


def load_ground_truth(path) -> GroundTruth:
    data = json.loads(Path(path).read_text())
    return GroundTruth(frozenset(data["faulty_methods"]))


def save_ground_truth(truth: GroundTruth, path) -> None:
    Path(path).write_text(json.dumps(truth.to_json(), indent=2) + "\n")


def rank(scores: Mapping) -> Ranking:
    """Sort by descending score; tied methods all take the last position of
    their tie group.  Within a group methods are listed by name."""
    ordered = sorted(scores.items(), key=lambda kv: kv[0])
    ordered.sort(key=lambda kv: kv[1], reverse=True)
    entries = []
    i = 0
    while i < len(ordered):
        j = i
        while j + 1 < len(ordered) and ordered[j + 1][1] == ordered[i][1]:
            j += 1
        for method, score in ordered[i:j + 1]:
            entries.append(RankedMethod(method, score, j + 1))
        i = j + 1
    return Ranking(tuple(entries))


def best_rank(ranking: Ranking, truth: GroundTruth) -> float:
    return min(ranking.rank_of(m) for m in truth.faulty_methods)


def acc_at_n(pairs: Iterable, n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return sum(1 for ranking, truth in pairs if best_rank(ranking, truth) <= n)


def wef(ranking: Ranking, truth: GroundTruth) -> int:
    """Non-faulty methods inspected before the first faulty one.

    Tie partners count as inspected.  An unranked fault costs the whole list.
    """
    r = best_rank(ranking, truth)
    if math.isinf(r):
        return len(ranking)
    return int(r) - 1


def average_precision(ranking: Ranking, truth: GroundTruth) -> float:
    found = sorted(r for r in (ranking.rank_of(m) for m in truth.faulty_methods)
                   if not math.isinf(r))
    total = sum((Fraction(i, r) for i, r in enumerate(found, start=1)), Fraction(0))
    return float(total / len(truth.faulty_methods))


def mean_average_precision(pairs: Iterable) -> float:
    aps = [average_precision(r, t) for r, t in pairs]
    return math.fsum(aps) / len(aps) if aps else 0.0


@dataclass
class FaultResult:
    fault_id: str
    best_rank: float
    wef: int
    ap: float

    def to_json(self) -> dict:
        return {
            "fault": self.fault_id,
            "best_rank": None if math.isinf(self.best_rank) else int(self.best_rank),
            "wef": self.wef,
            "ap": self.ap,
        }


@dataclass
class EvalReport:
    acc: dict
    wef_per_fault: list
    map_score: float
    faults: list = field(default_factory=list)
    excluded: int = 0

    @property
    def n_faults(self) -> int:
        return len(self.wef_per_fault)

    @property
    def wef_median(self):
        return statistics.median(self.wef_per_fault) if self.wef_per_fault else None

    def to_json(self) -> dict:
        return {
            "n_faults": self.n_faults,
            "excluded": self.excluded,
            "acc": {str(n): c for n, c in self.acc.items()},
            "wef": list(self.wef_per_fault),
            "wef_median": self.wef_median,
            "map": self.map_score,
            "faults": [f.to_json() for f in self.faults],
        }

    def table(self) -> str:
        lines = [f"faults evaluated: {self.n_faults} (excluded: {self.excluded})"]
        lines.append("  ".join(f"acc@{n}={c}" for n, c in self.acc.items()))
        med = self.wef_median
        lines.append(f"wef median={'-' if med is None else med}  MAP={self.map_score:.4f}")
        if self.faults:
            lines.append("")
            lines.append(f"{'fault':<24}{'best':>6}{'wef':>6}{'AP':>8}")
            for f in self.faults:
                best = "-" if math.isinf(f.best_rank) else str(int(f.best_rank))
                lines.append(f"{f.fault_id:<24}{best:>6}{f.wef:>6}{f.ap:>8.4f}")
        return "\n".join(lines)


def evaluate(results: Sequence, ns: Sequence[int] = DEFAULT_ACC_N,
             excluded: int = 0) -> EvalReport:
    """Aggregate ``(fault_id, Ranking, GroundTruth)`` triples."""
    pairs = [(r, t) for _, r, t in results]
    faults = [FaultResult(fid, best_rank(r, t), wef(r, t), average_precision(r, t))
              for fid, r, t in results]
    return EvalReport(
        acc={n: acc_at_n(pairs, n) for n in sorted(ns)},
        wef_per_fault=[f.wef for f in faults],
        map_score=mean_average_precision(pairs),
        faults=faults,
        excluded=excluded,
    )
