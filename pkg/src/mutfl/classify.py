"""Classifier ranking models trained on mutant kill vectors.

Every killed mutant becomes one training row: a 0/1 vector over the selected
tests (1 where the test kills the mutant) labelled with the mutant's method.
At serving time the observed failure is encoded the same way (1 for failing
tests) and the per-class softmax probabilities become method scores.

Two models share one softmax head:

* ``logistic_regression``: logits = x W + b
* ``mlp``: logits = relu(x W1 + b1) W2 + b2

Both are trained by full-batch gradient descent on mean cross-entropy with
an L2 penalty on the weight matrices (biases are not penalised).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import FailureSnapshot, KillMatrix

FAILING_ONLY = "failing_only"
ALL_TESTS = "all_tests"
SELECTIONS = (FAILING_ONLY, ALL_TESTS)

LOGISTIC_REGRESSION = "logistic_regression"
MLP = "mlp"
KINDS = (LOGISTIC_REGRESSION, MLP)

MODEL_FORMAT = "mutfl-classifier"
MODEL_VERSION = 1


class EmptyTrainingSet(ValueError):
    pass


class NonFiniteLoss(ArithmeticError):
    pass


class ColumnMismatch(ValueError):
    pass


def selected_tests(km_tests, snap: FailureSnapshot, selection: str) -> tuple:
    """Snapshot tests to use as features, in canonical matrix order."""
    if selection == FAILING_ONLY:
        wanted = snap.failing
    elif selection == ALL_TESTS:
        wanted = snap.failing | snap.passing
    else:
        raise ValueError(f"unknown test selection {selection!r}")
    return tuple(t for t in km_tests if t in wanted)


@dataclass
class TrainingSet:
    X: np.ndarray
    y: np.ndarray
    columns: tuple
    selection: str
    classes: tuple
    methods: tuple  # every method in the source matrix, classes first-seen order

    @property
    def class_index(self) -> dict:
        return {m: i for i, m in enumerate(self.classes)}


def build_training_set(km: KillMatrix, snap: FailureSnapshot,
                       selection: str = ALL_TESTS) -> TrainingSet:
    columns = selected_tests(km.tests, snap, selection)
    rows, labels = [], []
    classes: dict = {}
    for m in km.mutants:
        kills = m.kill_set
        if not kills:
            continue
        rows.append([1.0 if t in kills else 0.0 for t in columns])
        labels.append(classes.setdefault(m.method, len(classes)))
    if not rows:
        raise EmptyTrainingSet("no killed mutants to train on")
    X = np.array(rows, dtype=np.float64).reshape(len(rows), len(columns))
    return TrainingSet(X, np.array(labels, dtype=np.int64), columns, selection,
                       tuple(classes), km.methods)


@dataclass(frozen=True)
class ClassifierConfig:
    kind: str = LOGISTIC_REGRESSION
    hidden_units: int = 50
    learning_rate: float = 0.1
    epochs: int = 500
    seed: int = 0
    l2: float = 1e-4

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown classifier kind {self.kind!r}")
        if self.hidden_units < 1:
            raise ValueError("hidden_units must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")

    def to_json(self) -> dict:
        d = {"kind": self.kind, "learning_rate": self.learning_rate,
             "epochs": self.epochs, "seed": self.seed, "l2": self.l2}
        if self.kind == MLP:
            d["hidden_units"] = self.hidden_units
        return d


# ---------- numerics ----------

def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def init_params(kind: str, n_in: int, n_out: int, hidden: int, seed: int) -> dict:
    """Weights uniform in +-1/sqrt(fan_in), biases zero."""
    rng = np.random.default_rng(seed)

    def layer(fan_in, fan_out):
        bound = 1.0 / np.sqrt(max(fan_in, 1))
        return rng.uniform(-bound, bound, size=(fan_in, fan_out))

    if kind == LOGISTIC_REGRESSION:
        return {"W": layer(n_in, n_out), "b": np.zeros(n_out)}
    return {"W1": layer(n_in, hidden), "b1": np.zeros(hidden),
            "W2": layer(hidden, n_out), "b2": np.zeros(n_out)}


def forward(kind: str, params: dict, X: np.ndarray):
    if kind == LOGISTIC_REGRESSION:
        return X @ params["W"] + params["b"], None
    pre = X @ params["W1"] + params["b1"]
    hidden = np.maximum(pre, 0.0)
    return hidden @ params["W2"] + params["b2"], (pre, hidden)


def _weight_names(kind):
    return ("W",) if kind == LOGISTIC_REGRESSION else ("W1", "W2")


def loss_and_grad(kind: str, params: dict, X: np.ndarray, y: np.ndarray,
                  l2: float) -> tuple:
    """Mean cross-entropy plus ``l2/2 * ||W||^2`` and its gradient."""
    n = X.shape[0]
    logits, cache = forward(kind, params, X)
    z = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    loss = float(np.mean(log_norm - z[np.arange(n), y]))
    loss += 0.5 * l2 * sum(float(np.sum(params[w] ** 2)) for w in _weight_names(kind))

    d_logits = softmax(logits)
    d_logits[np.arange(n), y] -= 1.0
    d_logits /= n
    if kind == LOGISTIC_REGRESSION:
        grads = {"W": X.T @ d_logits + l2 * params["W"], "b": d_logits.sum(axis=0)}
    else:
        pre, hidden = cache
        d_hidden = (d_logits @ params["W2"].T) * (pre > 0)
        grads = {
            "W2": hidden.T @ d_logits + l2 * params["W2"],
            "b2": d_logits.sum(axis=0),
            "W1": X.T @ d_hidden + l2 * params["W1"],
            "b1": d_hidden.sum(axis=0),
        }
    return loss, grads


@dataclass
class TrainedModel:
    kind: str
    params: dict
    columns: tuple
    selection: str
    classes: tuple
    methods: tuple
    config: ClassifierConfig
    losses: list = field(default_factory=list)

    def predict_proba(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != len(self.columns):
            raise ColumnMismatch(
                f"expected {len(self.columns)} features, got {X.shape[1]}")
        logits, _ = forward(self.kind, self.params, X)
        return softmax(logits)

    def to_json(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "kind": self.kind,
            "config": self.config.to_json(),
            "selection": self.selection,
            "columns": list(self.columns),
            "classes": list(self.classes),
            "methods": list(self.methods),
            "params": {k: {"shape": list(v.shape), "data": v.ravel().tolist()}
                       for k, v in self.params.items()},
            "losses": list(self.losses),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "TrainedModel":
        if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
            raise ValueError("not a supported classifier model file")
        params = {k: np.array(v["data"], dtype=np.float64).reshape(v["shape"])
                  for k, v in doc["params"].items()}
        return cls(doc["kind"], params, tuple(doc["columns"]), doc["selection"],
                   tuple(doc["classes"]), tuple(doc["methods"]),
                   ClassifierConfig(**doc["config"]), list(doc.get("losses", [])))


def save_model(model: TrainedModel, path) -> None:
    Path(path).write_text(json.dumps(model.to_json()) + "\n")


def load_model(path) -> TrainedModel:
    return TrainedModel.from_json(json.loads(Path(path).read_text()))


def train(ts: TrainingSet, cfg: ClassifierConfig = ClassifierConfig()) -> TrainedModel:
    if len(ts.y) == 0:
        raise EmptyTrainingSet("training set is empty")
    # Canonical row order makes the full-batch sums independent of input order.
    order = np.lexsort(tuple(ts.X.T[::-1]) + (ts.y,))
    X, y = ts.X[order], ts.y[order]

    params = init_params(cfg.kind, X.shape[1], len(ts.classes), cfg.hidden_units, cfg.seed)
    losses = []
    for _ in range(cfg.epochs):
        with np.errstate(over="ignore", invalid="ignore"):
            loss, grads = loss_and_grad(cfg.kind, params, X, y, cfg.l2)
        if not np.isfinite(loss):
            raise NonFiniteLoss(
                f"training diverged at epoch {len(losses)}; lower the learning rate")
        losses.append(loss)
        for k in params:
            params[k] = params[k] - cfg.learning_rate * grads[k]
    return TrainedModel(cfg.kind, params, ts.columns, ts.selection, ts.classes,
                        ts.methods, cfg, losses)


def encode_snapshot(model: TrainedModel, snap: FailureSnapshot) -> np.ndarray:
    wanted = snap.failing if model.selection == FAILING_ONLY else snap.failing | snap.passing
    if wanted != set(model.columns):
        missing = sorted(wanted - set(model.columns))
        extra = sorted(set(model.columns) - wanted)
        raise ColumnMismatch(
            f"snapshot tests differ from training columns "
            f"(not in model: {missing}, not in snapshot: {extra})")
    return np.array([1.0 if t in snap.failing else 0.0 for t in model.columns])


def score_classifier(model: TrainedModel, snap: FailureSnapshot) -> dict:
    """Per-method probabilities; methods with no killed mutant score 0."""
    probs = model.predict_proba(encode_snapshot(model, snap))[0]
    scores = {m: 0.0 for m in model.methods}
    scores.update({m: float(p) for m, p in zip(model.classes, probs)})
    return scores
