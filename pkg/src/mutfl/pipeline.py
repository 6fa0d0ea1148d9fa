"""Model registry and the fixed reduction/scoring pipeline.

Stages run in this order: coverage filter, kill-reason filter, subsumption
reduction, sampling, scoring, ranking.  Coverage and reason filters change
kill sets, so they must precede subsumption; sampling goes last so it draws
from the pool the earlier stages leave behind.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from . import bayes, classify, coupling
from .corpus import CorpusError, FailureSnapshot, KillMatrix, KillReason, restrict_to_coverage
from .evaluation import Ranking, rank
from .reduce import SamplingSpec, filter_kill_reason, keep_most_subsuming

BAYES_MODELS = {
    "em_f": bayes.score_em_f,
    "em_fp": bayes.score_em_fp,
    "pm_add_f": bayes.score_pm_add_f,
    "pm_add_fp": bayes.score_pm_add_fp,
    "pc_fp": coupling.score_pc_fp,
}
EPSILON_MODELS = {
    "pm_mult_f": bayes.score_pm_mult_f,
    "pm_mult_fp": bayes.score_pm_mult_fp,
}
CLASSIFIER_MODELS = {
    "lr_f": (classify.LOGISTIC_REGRESSION, classify.FAILING_ONLY),
    "lr_fp": (classify.LOGISTIC_REGRESSION, classify.ALL_TESTS),
    "mlp_f": (classify.MLP, classify.FAILING_ONLY),
    "mlp_fp": (classify.MLP, classify.ALL_TESTS),
}
MODELS = ("em_f", "em_fp", "pm_mult_f", "pm_add_f", "pm_mult_fp", "pm_add_fp",
          "pc_fp", "lr_f", "lr_fp", "mlp_f", "mlp_fp")


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class RunConfig:
    model: str
    epsilon: float = bayes.DEFAULT_EPSILON
    sampling: Optional[SamplingSpec] = None
    reason_filter: Optional[KillReason] = None
    subsuming_only: bool = False
    dedup_indistinguishable: bool = False
    coverage_filter: bool = True
    classifier: Optional[classify.ClassifierConfig] = None
    output: str = "json"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        bayes.check_epsilon(self.epsilon)
        if self.model in CLASSIFIER_MODELS:
            kind = CLASSIFIER_MODELS[self.model][0]
            cfg = self.classifier or classify.ClassifierConfig(kind=kind)
            object.__setattr__(self, "classifier", replace(cfg, kind=kind))
        elif self.classifier is not None:
            raise ValueError(f"classifier settings do not apply to model {self.model!r}")
        if self.output not in ("json", "table"):
            raise ValueError(f"unknown output format {self.output!r}")

    def to_json(self) -> dict:
        d = {
            "model": self.model,
            "coverage_filter": self.coverage_filter,
            "reason_filter": None if self.reason_filter is None else self.reason_filter.value,
            "subsuming_only": self.subsuming_only,
            "dedup_indistinguishable": self.dedup_indistinguishable,
            "sampling": None if self.sampling is None else self.sampling.to_json(),
        }
        if self.model in EPSILON_MODELS:
            d["epsilon"] = self.epsilon
        if self.classifier is not None:
            d["classifier"] = self.classifier.to_json()
        return d


def _stage(name, fn, *args):
    try:
        return fn(*args)
    except StageError:
        raise
    except (CorpusError, ValueError, ArithmeticError) as exc:
        raise StageError(name, exc) from exc


def reduce_matrix(km: KillMatrix, snap: Optional[FailureSnapshot],
                  config: RunConfig) -> KillMatrix:
    """Apply the configured reductions in pipeline order."""
    if config.coverage_filter and snap is not None and snap.covered_methods is not None:
        km = _stage("coverage-filter", restrict_to_coverage, km, snap)
    if config.reason_filter is not None:
        km = _stage("reason-filter", filter_kill_reason, km, config.reason_filter)
    if config.subsuming_only:
        km = _stage("subsumption", keep_most_subsuming, km, config.dedup_indistinguishable)
    if config.sampling is not None:
        km = _stage("sampling", config.sampling.apply, km)
    return km


def score(km: KillMatrix, snap: FailureSnapshot, config: RunConfig,
          model: Optional[classify.TrainedModel] = None) -> dict:
    if config.model in BAYES_MODELS:
        return _stage("scoring", BAYES_MODELS[config.model], km, snap)
    if config.model in EPSILON_MODELS:
        return _stage("scoring", EPSILON_MODELS[config.model], km, snap, config.epsilon)
    if model is None:
        model = train_classifier(km, snap, config)
    return _stage("scoring", classify.score_classifier, model, snap)


def train_classifier(km: KillMatrix, snap: FailureSnapshot,
                     config: RunConfig) -> classify.TrainedModel:
    _, selection = CLASSIFIER_MODELS[config.model]
    ts = _stage("training", classify.build_training_set, km, snap, selection)
    return _stage("training", classify.train, ts, config.classifier)


def run(km: KillMatrix, snap: FailureSnapshot, config: RunConfig) -> Ranking:
    _stage("load", snap.check_against, km)
    km = reduce_matrix(km, snap, config)
    return _stage("ranking", rank, score(km, snap, config))
