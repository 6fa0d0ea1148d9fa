"""Command-line entry point: ``mutfl {rank,eval,reduce,synth}``.

Exit codes: 0 success, 1 pipeline failure (the message names the stage),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import classify
from .bayes import DEFAULT_EPSILON
from .corpus import (
    CorpusError,
    KillReason,
    load_failure_snapshot,
    load_kill_matrix,
    save_failure_snapshot,
    save_kill_matrix,
)
from .evaluation import DEFAULT_ACC_N, evaluate, load_ground_truth, rank, save_ground_truth
from .pipeline import (
    CLASSIFIER_MODELS,
    MODELS,
    RunConfig,
    StageError,
    reduce_matrix,
    run,
    score,
    train_classifier,
)
from .reduce import SamplingSpec, build_subsumption_graph
from .synth import SynthSpec, generate

log = logging.getLogger("mutfl")

MATRIX_NAMES = ("matrix.csv", "matrix.json")
SNAPSHOT_NAME = "snapshot.json"
TRUTH_NAME = "truth.json"


class UsageError(Exception):
    pass


# ---------- argument types ----------

def positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return value


def probability(text):
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1], got {text}")
    return value


def int_range(text):
    lo, sep, hi = text.partition(":")
    try:
        lo = int(lo)
        hi = int(hi) if sep else lo
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LO:HI, got {text}") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad range {text}")
    return (lo, hi)


def reason_arg(text):
    try:
        return KillReason(text.upper())
    except ValueError:
        raise argparse.ArgumentTypeError(
            "reason must be one of assertion, timeout, exception") from None


def _add_reduction_flags(p):
    p.add_argument("--sample", metavar="uniform:<rate>|stratified:<n>",
                   help="mutant sampling applied after the other reductions")
    p.add_argument("--seed", type=int, default=0, help="seed for sampling and training")
    p.add_argument("--reason", type=reason_arg, metavar="assertion|timeout|exception",
                   help="keep only kills with this reason")
    p.add_argument("--subsuming-only", action="store_true",
                   help="keep only the most subsuming mutants")
    p.add_argument("--dedup-indistinguishable", action="store_true",
                   help="with --subsuming-only, keep one mutant per indistinguishable group")
    p.add_argument("--no-coverage-filter", action="store_true",
                   help="ignore covered_methods in the snapshot")


def _add_model_flags(p):
    p.add_argument("--model", choices=MODELS, required=True)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--hidden-units", type=positive_int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--epochs", type=positive_int)
    p.add_argument("--l2", type=float)
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.add_argument("--out", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mutfl", description="Mutation-based fault localisation over kill matrices.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rank", help="rank methods for one observed failure")
    p.add_argument("matrix")
    p.add_argument("snapshot")
    p.add_argument("--tests", help="test list for CSV matrices (default: tests.txt beside it)")
    p.add_argument("--save-model", help="write the trained classifier as JSON")
    p.add_argument("--load-model", help="score with a saved classifier instead of training")
    _add_model_flags(p)
    _add_reduction_flags(p)

    p = sub.add_parser("eval", help="rank and score every fault in a corpus directory")
    p.add_argument("corpus_dir")
    p.add_argument("--acc", type=positive_int, nargs="+", default=list(DEFAULT_ACC_N),
                   help="cut-offs for acc@n")
    _add_model_flags(p)
    _add_reduction_flags(p)

    p = sub.add_parser("reduce", help="write a reduced kill matrix (or corpus)")
    p.add_argument("matrix", help="matrix file, or a corpus directory")
    p.add_argument("--out", required=True, help="output matrix file, or directory for a corpus")
    p.add_argument("--tests", help="test list for CSV matrices")
    p.add_argument("--snapshot", help="snapshot whose coverage restricts the matrix")
    p.add_argument("--graph", help="write the subsumption graph as DOT")
    _add_reduction_flags(p)

    p = sub.add_parser("synth", help="generate a synthetic corpus with planted faults")
    p.add_argument("out_dir")
    p.add_argument("--faults", type=positive_int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-methods", type=positive_int, default=20)
    p.add_argument("--mutants-per-method", type=int_range, default=(5, 5), metavar="N|LO:HI")
    p.add_argument("--n-tests", type=positive_int, default=30)
    p.add_argument("--n-failing", type=positive_int, default=3)
    p.add_argument("--coupling", type=probability, default=0.9)
    p.add_argument("--noise", type=probability, default=0.05)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


# ---------- helpers ----------

def _sampling_from_args(args):
    if not args.sample:
        return None
    try:
        return SamplingSpec.parse(args.sample, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _config_from_args(args, model=None) -> RunConfig:
    sampling = _sampling_from_args(args)
    clf_flags = {k: getattr(args, k) for k in ("hidden_units", "learning_rate", "epochs", "l2")
                 if getattr(args, k, None) is not None}
    classifier = None
    model = model or args.model
    if model in CLASSIFIER_MODELS:
        try:
            classifier = classify.ClassifierConfig(
                kind=CLASSIFIER_MODELS[model][0], seed=args.seed, **clf_flags)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    elif clf_flags:
        raise UsageError(f"--{'/--'.join(k.replace('_', '-') for k in clf_flags)} "
                         f"only apply to classifier models")
    try:
        return RunConfig(
            model=model, epsilon=getattr(args, "epsilon", DEFAULT_EPSILON), sampling=sampling,
            reason_filter=args.reason, subsuming_only=args.subsuming_only,
            dedup_indistinguishable=args.dedup_indistinguishable,
            coverage_filter=not args.no_coverage_filter, classifier=classifier,
            output=getattr(args, "format", "json"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def json_score(value):
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return int(value)
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else float(value)
    return float(value)


def ranking_json(ranking) -> list:
    return [{"method": e.method, "score": json_score(e.score), "rank": e.rank}
            for e in ranking]


def ranking_table(ranking) -> str:
    width = max([len(e.method) for e in ranking] + [6])
    lines = [f"{'rank':>5}  {'method':<{width}}  score"]
    for e in ranking:
        s = e.score
        text = str(s) if isinstance(s, (int, Fraction)) else f"{s:.6g}"
        lines.append(f"{e.rank:>5}  {e.method:<{width}}  {text}")
    return "\n".join(lines)


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _load(stage, fn, *args):
    try:
        return fn(*args)
    except (CorpusError, OSError, ValueError, KeyError) as exc:
        raise StageError(stage, exc) from exc


def find_matrix(fault_dir: Path):
    for name in MATRIX_NAMES:
        if (fault_dir / name).exists():
            return fault_dir / name
    return None


def corpus_faults(corpus_dir: Path) -> list:
    if not corpus_dir.is_dir():
        raise UsageError(f"{corpus_dir} is not a directory")
    faults = [d for d in sorted(corpus_dir.iterdir()) if d.is_dir() and find_matrix(d)]
    if not faults:
        raise UsageError(f"no fault directories with a matrix file under {corpus_dir}")
    return faults


# ---------- commands ----------

def cmd_rank(args) -> int:
    config = _config_from_args(args)
    if args.load_model and args.model not in CLASSIFIER_MODELS:
        raise UsageError("--load-model needs a classifier model")
    km = _load("load", load_kill_matrix, args.matrix, None, args.tests)
    snap = _load("load", load_failure_snapshot, args.snapshot)
    if args.model in CLASSIFIER_MODELS:
        _load("load", snap.check_against, km)
        reduced = reduce_matrix(km, snap, config)
        if args.load_model:
            model = _load("load", classify.load_model, args.load_model)
        else:
            model = train_classifier(reduced, snap, config)
        if args.save_model:
            classify.save_model(model, args.save_model)
        ranking = rank(score(reduced, snap, config, model))
    else:
        ranking = run(km, snap, config)
    if config.output == "json":
        text = _dumps({"config": config.to_json(), "ranking": ranking_json(ranking)})
    else:
        text = f"# config: {json.dumps(config.to_json())}\n{ranking_table(ranking)}\n"
    _emit(text, args.out)
    return 0


def cmd_eval(args) -> int:
    config = _config_from_args(args)
    faults = corpus_faults(Path(args.corpus_dir))
    results, excluded = [], 0
    for fault_dir in faults:
        try:
            km = _load("load", load_kill_matrix, find_matrix(fault_dir))
            snap = _load("load", load_failure_snapshot, fault_dir / SNAPSHOT_NAME)
            truth = _load("load", load_ground_truth, fault_dir / TRUTH_NAME)
            results.append((fault_dir.name, run(km, snap, config), truth))
        except StageError as exc:
            excluded += 1
            log.warning("skipping %s: %s", fault_dir.name, exc)
    if excluded:
        log.warning("%d of %d faults excluded", excluded, len(faults))
    report = evaluate(results, ns=args.acc, excluded=excluded)
    if config.output == "json":
        text = _dumps({"config": config.to_json(), "report": report.to_json()})
    else:
        text = f"# config: {json.dumps(config.to_json())}\n{report.table()}\n"
    _emit(text, args.out)
    return 0


def _reduce_one(config, matrix_path, out_path, snapshot_path, tests_path=None):
    km = _load("load", load_kill_matrix, matrix_path, None, tests_path)
    snap = _load("load", load_failure_snapshot, snapshot_path) if snapshot_path else None
    reduced = reduce_matrix(km, snap, config)
    save_kill_matrix(reduced, out_path)
    before = sum(len(m.kill_set) for m in km.mutants)
    after = sum(len(m.kill_set) for m in reduced.mutants)
    return km, reduced, before, after


def cmd_reduce(args) -> int:
    # Reductions do not depend on the model; any non-classifier one will do.
    config = _config_from_args(args, model="em_f")
    src = Path(args.matrix)
    if src.is_dir():
        if args.graph:
            raise UsageError("--graph needs a single matrix file")
        out_dir = Path(args.out)
        for fault_dir in corpus_faults(src):
            dest = out_dir / fault_dir.name
            dest.mkdir(parents=True, exist_ok=True)
            snap_path = fault_dir / SNAPSHOT_NAME
            km, reduced, before, after = _reduce_one(
                config, find_matrix(fault_dir), dest / find_matrix(fault_dir).name,
                snap_path if snap_path.exists() else None)
            for name in (SNAPSHOT_NAME, TRUTH_NAME):
                if (fault_dir / name).exists():
                    (dest / name).write_bytes((fault_dir / name).read_bytes())
            print(f"{fault_dir.name}: retained {len(reduced)} of {len(km)} mutants "
                  f"(removed {len(km) - len(reduced)}); kills {before} -> {after}")
        return 0
    km, reduced, before, after = _reduce_one(
        config, src, Path(args.out), args.snapshot, args.tests)
    print(f"retained {len(reduced)} of {len(km)} mutants "
          f"(removed {len(km) - len(reduced)}); kills {before} -> {after}")
    if args.graph:
        # Graph of the matrix entering the subsumption step.
        snap = _load("load", load_failure_snapshot, args.snapshot) if args.snapshot else None
        pre = reduce_matrix(km, snap, replace(config, subsuming_only=False, sampling=None))
        Path(args.graph).write_text(build_subsumption_graph(pre).to_dot(pre))
    return 0


def fault_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def cmd_synth(args) -> int:
    try:
        base = SynthSpec(
            n_methods=args.n_methods, mutants_per_method=args.mutants_per_method,
            n_tests=args.n_tests, coupling=args.coupling, noise=args.noise,
            n_failing=args.n_failing, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    width = max(3, len(str(args.faults - 1)))
    for i in range(args.faults):
        spec = replace(base, seed=fault_seed(args.seed, i))
        km, snap, truth = generate(spec)
        d = out / f"fault_{i:0{width}d}"
        d.mkdir(exist_ok=True)
        save_kill_matrix(km, d / f"matrix.{args.format}")
        save_failure_snapshot(snap, d / SNAPSHOT_NAME)
        save_ground_truth(truth, d / TRUTH_NAME)
    (out / "synth.json").write_text(_dumps({"faults": args.faults, "spec": base.to_json()}))
    print(f"wrote {args.faults} faults to {out}")
    return 0


COMMANDS = {"rank": cmd_rank, "eval": cmd_eval, "reduce": cmd_reduce, "synth": cmd_synth}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"mutfl: error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"mutfl: {args.command} failed at stage {exc.stage}: {exc.cause}",
              file=sys.stderr)
        return 1
    except classify.NonFiniteLoss as exc:
        print(f"mutfl: {args.command} failed at stage training: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
