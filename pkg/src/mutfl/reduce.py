"""Mutant-set reduction: sampling, kill-reason filtering, subsumption."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .corpus import KillMatrix, KillReason


@dataclass(frozen=True)
class SamplingSpec:
    kind: str
    rate: Optional[float] = None
    cap_n: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.kind == "uniform":
            if self.rate is None or not 0.0 < self.rate <= 1.0:
                raise ValueError("uniform sampling needs a rate in (0, 1]")
        elif self.kind == "stratified":
            if self.cap_n is None or self.cap_n < 1:
                raise ValueError("stratified sampling needs cap_n >= 1")
        else:
            raise ValueError(f"unknown sampling kind {self.kind!r}")

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "SamplingSpec":
        """Parse ``uniform:<rate>`` or ``stratified:<n>``."""
        kind, _, arg = text.partition(":")
        if not arg:
            raise ValueError(f"bad sampling spec {text!r}")
        if kind == "uniform":
            return cls("uniform", rate=float(arg), seed=seed)
        if kind == "stratified":
            return cls("stratified", cap_n=int(arg), seed=seed)
        raise ValueError(f"unknown sampling kind {kind!r}")

    def apply(self, km: KillMatrix) -> KillMatrix:
        if self.kind == "uniform":
            return sample_uniform(km, self.rate, self.seed)
        return sample_stratified(km, self.cap_n, self.seed)

    def to_json(self) -> dict:
        d = {"kind": self.kind, "seed": self.seed}
        if self.kind == "uniform":
            d["rate"] = self.rate
        else:
            d["cap_n"] = self.cap_n
        return d


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def sample_size(rate: float, count: int) -> int:
    # round half up
    return min(count, int(math.floor(rate * count + 0.5)))


def sample_uniform(km: KillMatrix, rate: float, seed: int) -> KillMatrix:
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate must lie in (0, 1], got {rate}")
    n = len(km.mutants)
    k = sample_size(rate, n)
    if k == n:
        return km
    chosen = set(_rng(seed).choice(n, size=k, replace=False).tolist())
    return km.replace_mutants(m for i, m in enumerate(km.mutants) if i in chosen)


def sample_stratified(km: KillMatrix, cap_n: int, seed: int) -> KillMatrix:
    if cap_n < 1:
        raise ValueError(f"cap_n must be >= 1, got {cap_n}")
    rng = _rng(seed)
    chosen = set()
    for idx in km.by_method.values():
        if len(idx) <= cap_n:
            chosen.update(idx)
        else:
            picks = rng.choice(len(idx), size=cap_n, replace=False)
            chosen.update(idx[p] for p in picks.tolist())
    if len(chosen) == len(km.mutants):
        return km
    return km.replace_mutants(m for i, m in enumerate(km.mutants) if i in chosen)


def filter_kill_reason(km: KillMatrix, keep: KillReason) -> KillMatrix:
    """Drop every kill not caused by ``keep``.  Mutants stay, possibly unkilled."""
    return km.replace_mutants(
        m.with_reasons({t: r for t, r in m.reasons.items() if r == keep})
        for m in km.mutants)


@dataclass(frozen=True)
class SubsumptionNode:
    kill_set: frozenset
    mutants: tuple  # mutant indices into the source matrix


@dataclass(frozen=True)
class SubsumptionGraph:
    """Dynamic subsumption over killed mutants.

    Mutants with the same kill set share a node.  An edge ``(a, b)`` means
    node ``a`` subsumes node ``b``: a's kill set is a strict subset of b's, so
    any test that kills a also kills b.  All such pairs are stored, so the
    edge set is transitively closed.
    """

    nodes: tuple
    edges: frozenset
    most_subsuming: tuple  # node indices with no incoming edge

    def hasse_edges(self) -> list:
        """Edges with the transitive ones removed."""
        succ = {}
        for a, b in self.edges:
            succ.setdefault(a, set()).add(b)
        reduced = []
        for a, b in sorted(self.edges):
            if not any(b in succ.get(c, ()) for c in succ[a] if c != b):
                reduced.append((a, b))
        return reduced

    def to_dot(self, km: KillMatrix) -> str:
        lines = ["digraph subsumption {", "  rankdir=TB;"]
        sources = set(self.most_subsuming)
        for i, node in enumerate(self.nodes):
            label = "\\n".join(km.mutants[j].id for j in node.mutants)
            style = ", style=bold" if i in sources else ""
            lines.append(f'  n{i} [label="{label}"{style}];')
        for a, b in self.hasse_edges():
            lines.append(f"  n{a} -> n{b};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_subsumption_graph(km: KillMatrix) -> SubsumptionGraph:
    groups: dict = {}
    for i, m in enumerate(km.mutants):
        if m.kill_set:
            groups.setdefault(m.kill_set, []).append(i)
    nodes = tuple(SubsumptionNode(ks, tuple(idx)) for ks, idx in groups.items())
    edges = set()
    for a, na in enumerate(nodes):
        for b, nb in enumerate(nodes):
            if a != b and na.kill_set < nb.kill_set:
                edges.add((a, b))
    targets = {b for _, b in edges}
    sources = tuple(i for i in range(len(nodes)) if i not in targets)
    return SubsumptionGraph(nodes, frozenset(edges), sources)


def keep_most_subsuming(km: KillMatrix, dedup_indistinguishable: bool = False) -> KillMatrix:
    """Retain the mutants of source nodes; survivors are dropped.

    By default every member of an indistinguishable group is kept; with
    ``dedup_indistinguishable`` only its first mutant survives.
    """
    graph = build_subsumption_graph(km)
    keep = set()
    for n in graph.most_subsuming:
        members = graph.nodes[n].mutants
        keep.update(members[:1] if dedup_indistinguishable else members)
    return km.replace_mutants(m for i, m in enumerate(km.mutants) if i in keep)
