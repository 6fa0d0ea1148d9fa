"""Kill-matrix data model and on-disk formats.

A kill matrix records, for each mutant, which tests kill it and why.  Files
come in two flavours:

* CSV: ``mutant_id,method,test_id,outcome,reason`` rows plus a sibling
  ``tests.txt`` listing the suite in canonical order, one test per line.
* JSON: ``{"tests": [...], "rows": [{...same fields...}]}``.

Failure snapshots are JSON: ``{"failing": [...], "passing": [...],
"covered_methods": [...] | null}``.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Optional

TestId = str
MethodId = str

CSV_HEADER = ("mutant_id", "method", "test_id", "outcome", "reason")
TESTS_FILENAME = "tests.txt"

KILLED = "KILLED"
SURVIVED = "SURVIVED"


class CorpusError(ValueError):
    """Base class for malformed or inconsistent corpus input."""


class ParseError(CorpusError):
    pass


class ValidationError(CorpusError):
    pass


class EmptyCorpus(CorpusError):
    pass


class EmptyFailing(ValidationError):
    pass


class NoCoverage(CorpusError):
    pass


class KillReason(enum.Enum):
    ASSERTION = "ASSERTION"
    TIMEOUT = "TIMEOUT"
    EXCEPTION = "EXCEPTION"

    @classmethod
    def parse(cls, text: str) -> "KillReason":
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise ParseError(f"unknown kill reason {text!r}") from None


@dataclass(frozen=True)
class Mutant:
    """A mutant located in ``method``.

    ``reasons`` maps every killing test to the reason it failed; the kill set
    is its key set, so the two can never disagree.
    """

    id: str
    method: MethodId
    reasons: Mapping[TestId, KillReason] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise ValidationError("mutant id must be non-empty")
        if not self.method:
            raise ValidationError(f"mutant {self.id!r} has an empty method")
        object.__setattr__(self, "reasons", MappingProxyType(dict(self.reasons)))

    @property
    def kill_set(self) -> frozenset:
        return frozenset(self.reasons)

    def __eq__(self, other):
        if not isinstance(other, Mutant):
            return NotImplemented
        return (self.id, self.method, dict(self.reasons)) == (
            other.id,
            other.method,
            dict(other.reasons),
        )

    def __hash__(self):
        return hash((self.id, self.method, frozenset(self.reasons.items())))

    def with_reasons(self, reasons: Mapping[TestId, KillReason]) -> "Mutant":
        return Mutant(self.id, self.method, reasons)


def killed_by(mutant_id: str, method: MethodId, tests: Iterable[TestId],
              reason: KillReason = KillReason.ASSERTION) -> Mutant:
    """Shorthand for a mutant whose kills all share one reason."""
    return Mutant(mutant_id, method, {t: reason for t in tests})


@dataclass(frozen=True, eq=False)
class KillMatrix:
    """Immutable mutants x tests kill records.

    ``by_method`` maps each method to the indices of its mutants, in mutant
    order; methods are ordered by first appearance.  A matrix may hold zero
    mutants (e.g. after filtering); the loaders reject that case on input.
    """

    tests: tuple
    mutants: tuple
    by_method: Mapping[MethodId, tuple] = field(init=False, repr=False)

    def __init__(self, tests: Iterable[TestId], mutants: Iterable[Mutant]):
        tests = tuple(tests)
        mutants = tuple(mutants)
        object.__setattr__(self, "tests", tests)
        object.__setattr__(self, "mutants", mutants)
        self._validate()
        object.__setattr__(self, "by_method", MappingProxyType(index_by_method(mutants)))

    def _validate(self):
        seen = set()
        for t in self.tests:
            if not isinstance(t, str) or not t:
                raise ValidationError(f"invalid test id {t!r}")
            if t in seen:
                raise ValidationError(f"duplicate test id {t!r}")
            seen.add(t)
        ids = set()
        for m in self.mutants:
            if m.id in ids:
                raise ValidationError(f"duplicate mutant id {m.id!r}")
            ids.add(m.id)
            unknown = m.kill_set - seen
            if unknown:
                raise ValidationError(
                    f"mutant {m.id!r} references unknown tests {sorted(unknown)}")

    def __eq__(self, other):
        if not isinstance(other, KillMatrix):
            return NotImplemented
        return self.tests == other.tests and self.mutants == other.mutants

    def __hash__(self):
        return hash((self.tests, self.mutants))

    def __len__(self):
        return len(self.mutants)

    @property
    def methods(self) -> tuple:
        return tuple(self.by_method)

    def mutants_of(self, method: MethodId) -> list:
        return [self.mutants[i] for i in self.by_method.get(method, ())]

    def filter_mutants(self, keep) -> "KillMatrix":
        """New matrix holding the mutants for which ``keep(mutant)`` is true."""
        return KillMatrix(self.tests, [m for m in self.mutants if keep(m)])

    def replace_mutants(self, mutants: Iterable[Mutant]) -> "KillMatrix":
        return KillMatrix(self.tests, mutants)


def index_by_method(mutants) -> dict:
    index: dict = {}
    for i, m in enumerate(mutants):
        index.setdefault(m.method, []).append(i)
    return {k: tuple(v) for k, v in index.items()}


@dataclass(frozen=True)
class FailureSnapshot:
    """Observed outcome of the suite on the faulty program."""

    failing: frozenset
    passing: frozenset = frozenset()
    covered_methods: Optional[frozenset] = None

    def __post_init__(self):
        object.__setattr__(self, "failing", frozenset(self.failing))
        object.__setattr__(self, "passing", frozenset(self.passing))
        if self.covered_methods is not None:
            object.__setattr__(self, "covered_methods", frozenset(self.covered_methods))
        if not self.failing:
            raise EmptyFailing("failure snapshot has no failing tests")
        overlap = self.failing & self.passing
        if overlap:
            raise ValidationError(f"tests both failing and passing: {sorted(overlap)}")

    @property
    def tests(self) -> frozenset:
        return self.failing | self.passing

    def check_against(self, km: KillMatrix) -> None:
        unknown = self.tests - set(km.tests)
        if unknown:
            raise ValidationError(f"snapshot references unknown tests {sorted(unknown)}")

    def to_json(self) -> dict:
        return {
            "failing": sorted(self.failing),
            "passing": sorted(self.passing),
            "covered_methods": (None if self.covered_methods is None
                                else sorted(self.covered_methods)),
        }


def restrict_to_coverage(km: KillMatrix, snap: FailureSnapshot) -> KillMatrix:
    """Keep only mutants on methods covered by the failing tests."""
    if snap.covered_methods is None:
        raise NoCoverage("snapshot carries no coverage information")
    covered = snap.covered_methods
    return km.filter_mutants(lambda m: m.method in covered)


# ---------- reading ----------

def _rows_to_matrix(tests, rows, source) -> KillMatrix:
    """Build a matrix from parsed row dicts (shared by CSV and JSON)."""
    test_set = set(tests)
    order = []
    methods = {}
    reasons: dict = {}
    seen_pairs = set()
    for lineno, row in rows:
        where = f"{source}:{lineno}"
        try:
            mid = (row["mutant_id"] or "").strip()
            method = (row["method"] or "").strip()
            test = (row["test_id"] or "").strip()
            outcome = (row["outcome"] or "").strip().upper()
            reason = (row.get("reason") or "").strip()
        except (KeyError, AttributeError, TypeError):
            raise ParseError(f"{where}: malformed row {row!r}") from None
        if not mid or not method or not test:
            raise ParseError(f"{where}: empty mutant_id, method or test_id")
        if outcome == KILLED:
            if not reason:
                raise ParseError(f"{where}: KILLED row without a reason")
            kind = KillReason.parse(reason)
        elif outcome == SURVIVED:
            if reason:
                raise ParseError(f"{where}: SURVIVED row with reason {reason!r}")
            kind = None
        else:
            raise ParseError(f"{where}: unknown outcome {outcome!r}")
        if test not in test_set:
            raise ValidationError(f"{where}: test {test!r} not in the test list")
        if (mid, test) in seen_pairs:
            raise ValidationError(f"{where}: duplicate row for ({mid}, {test})")
        seen_pairs.add((mid, test))
        if mid not in methods:
            methods[mid] = method
            order.append(mid)
            reasons[mid] = {}
        elif methods[mid] != method:
            raise ValidationError(
                f"{where}: mutant {mid!r} assigned to both {methods[mid]!r} and {method!r}")
        if kind is not None:
            reasons[mid][test] = kind
    if not tests:
        raise EmptyCorpus(f"{source}: no tests")
    if not order:
        raise EmptyCorpus(f"{source}: no mutants")
    return KillMatrix(tests, [Mutant(mid, methods[mid], reasons[mid]) for mid in order])


def read_tests_file(path) -> list:
    lines = Path(path).read_text().splitlines()
    return [line.strip() for line in lines if line.strip()]


def _detect_format(path: Path, fmt: Optional[str]) -> str:
    if fmt is None:
        fmt = path.suffix.lstrip(".").lower()
    if fmt not in ("csv", "json"):
        raise ParseError(f"unsupported kill matrix format {fmt!r} for {path}")
    return fmt


def load_kill_matrix(path, fmt: Optional[str] = None, tests_path=None) -> KillMatrix:
    """Load and validate a kill matrix.

    ``fmt`` defaults to the file extension.  For CSV the canonical test list
    is read from ``tests_path``, or ``tests.txt`` next to the matrix.
    """
    path = Path(path)
    fmt = _detect_format(path, fmt)
    if fmt == "csv":
        tests_path = Path(tests_path) if tests_path else path.parent / TESTS_FILENAME
        if not tests_path.exists():
            raise ParseError(f"test list {tests_path} not found")
        tests = read_tests_file(tests_path)
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or tuple(
                    f.strip() for f in reader.fieldnames) != CSV_HEADER:
                raise ParseError(f"{path}: expected header {','.join(CSV_HEADER)}")
            rows = []
            for row in reader:
                if None in row or any(v is None for v in row.values()):
                    raise ParseError(f"{path}:{reader.line_num}: wrong field count")
                rows.append((reader.line_num, row))
        return _rows_to_matrix(tests, rows, path)

    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if not isinstance(data, dict) or not isinstance(data.get("tests"), list) \
            or not isinstance(data.get("rows"), list):
        raise ParseError(f"{path}: expected an object with 'tests' and 'rows' lists")
    rows = []
    for i, row in enumerate(data["rows"]):
        if not isinstance(row, dict):
            raise ParseError(f"{path}: row {i} is not an object")
        rows.append((i, row))
    return _rows_to_matrix([str(t) for t in data["tests"]], rows, path)


def load_failure_snapshot(path) -> FailureSnapshot:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise ParseError(f"{path}: expected a JSON object")
    failing = data.get("failing", [])
    passing = data.get("passing", [])
    covered = data.get("covered_methods")
    if not isinstance(failing, list) or not isinstance(passing, list) \
            or not (covered is None or isinstance(covered, list)):
        raise ParseError(f"{path}: failing/passing must be lists, covered_methods a list or null")
    for name, group in (("failing", failing), ("passing", passing)):
        if len(set(group)) != len(group):
            raise ValidationError(f"{path}: duplicate entries in {name}")
    return FailureSnapshot(frozenset(failing), frozenset(passing),
                           None if covered is None else frozenset(covered))


# ---------- writing ----------

def matrix_rows(km: KillMatrix):
    """Dense rows: one per (mutant, test) pair, in mutant then test order."""
    for m in km.mutants:
        for t in km.tests:
            reason = m.reasons.get(t)
            if reason is None:
                yield (m.id, m.method, t, SURVIVED, "")
            else:
                yield (m.id, m.method, t, KILLED, reason.value)


def save_kill_matrix(km: KillMatrix, path, fmt: Optional[str] = None,
                     tests_path=None) -> None:
    path = Path(path)
    fmt = _detect_format(path, fmt)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        tests_path = Path(tests_path) if tests_path else path.parent / TESTS_FILENAME
        tests_path.write_text("".join(t + "\n" for t in km.tests))
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            writer.writerows(matrix_rows(km))
        return
    doc = {
        "tests": list(km.tests),
        "rows": [dict(zip(CSV_HEADER, row)) for row in matrix_rows(km)],
    }
    path.write_text(json.dumps(doc, indent=1) + "\n")


def save_failure_snapshot(snap: FailureSnapshot, path) -> None:
    Path(path).write_text(json.dumps(snap.to_json(), indent=2) + "\n")
