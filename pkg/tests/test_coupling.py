import random
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import GET_TYPE, RESOLVE_TYPE, snap
from mutfl.corpus import KillMatrix, Mutant, killed_by
from mutfl.coupling import pc, score_pc_fp
from mutfl.evaluation import rank


def test_perfectly_coupled(toy):
    m2 = toy.mutants[1]
    assert pc(m2, snap(["t2", "t3"])) == 1


def test_partially_coupled(toy):
    m1 = toy.mutants[0]
    assert pc(m1, snap(["t2", "t3"])) == Fraction(1, 2)


def test_survivor_scores_zero():
    assert pc(Mutant("s", "A#f"), snap(["t1"])) == 0


def test_decoupled():
    assert pc(killed_by("d", "A#f", ["t2"]), snap(["t1"])) == 0


def test_pc_fp_toy(toy):
    scores = score_pc_fp(toy, snap(["t2", "t3"]))
    assert scores == {GET_TYPE: Fraction(5, 2), RESOLVE_TYPE: Fraction(5, 3)}
    assert rank(scores).entries[0].method == GET_TYPE


def test_all_tests_failing_counts_killed_mutants(toy):
    km = KillMatrix(toy.tests, toy.mutants + (Mutant("dead", GET_TYPE),))
    scores = score_pc_fp(km, snap(toy.tests))
    assert scores == {GET_TYPE: 3, RESOLVE_TYPE: 2}


def test_all_decoupled_method_scores_zero():
    km = KillMatrix(["t1", "t2"], [killed_by("a", "A#f", ["t2"]),
                                   killed_by("b", "B#g", ["t1"])])
    assert score_pc_fp(km, snap(["t1"]))["A#f"] == 0


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@given(seeds)
@settings(max_examples=150, deadline=None)
def test_matches_oracle(seed):
    km, s = oracles.random_case(random.Random(seed))
    assert score_pc_fp(km, s) == oracles.pc_fp(km, s)
    for m in km.mutants:
        assert pc(m, s) == oracles.pc(m, s)


@given(seeds)
@settings(max_examples=100, deadline=None)
def test_bounds_and_perfect_coupling(seed):
    km, s = oracles.random_case(random.Random(seed))
    scores = score_pc_fp(km, s)
    for e, idx in km.by_method.items():
        assert 0 <= scores[e] <= len(idx)
    for m in km.mutants:
        v = pc(m, s)
        assert 0 <= v <= 1
        assert (v == 1) == (bool(m.kill_set) and m.kill_set <= s.failing)


@given(seeds)
@settings(max_examples=100, deadline=None)
def test_monotone_in_failing_set(seed):
    rnd = random.Random(seed)
    km, s = oracles.random_case(rnd)
    extra = {t for t in km.tests if rnd.random() < 0.5}
    bigger = snap(s.failing | extra)
    for m in km.mutants:
        assert pc(m, bigger) >= pc(m, s)
