"""Mutation-based fault localisation from precomputed kill matrices."""

from .corpus import (
    FailureSnapshot,
    KillMatrix,
    KillReason,
    Mutant,
    load_failure_snapshot,
    load_kill_matrix,
    restrict_to_coverage,
    save_kill_matrix,
)
from .evaluation import GroundTruth, Ranking, rank
from .pipeline import MODELS, RunConfig, run

__version__ = "0.1.0"

__all__ = [
    "FailureSnapshot",
    "GroundTruth",
    "KillMatrix",
    "KillReason",
    "MODELS",
    "Mutant",
    "Ranking",
    "RunConfig",
    "load_failure_snapshot",
    "load_kill_matrix",
    "rank",
    "restrict_to_coverage",
    "run",
    "save_kill_matrix",
]
