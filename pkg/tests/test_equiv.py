import time

import pytest

from conftest import C_REF, E1, E2, E_TYPE, lt
from linkc.equiv import (
    Distinguished,
    IllTyped,
    NotDistinguished,
    ProbeContext,
    builtin_suites,
    load_suite,
    probe,
    suite_for,
)
from linkc.errors import TypeCheckError
from linkc.syntax import IntLit, Lang

A = "(lam f (-> int int) 1)"
B = "(lam f (-> int int) (seq (app f 0) 1))"
C = "(lam f (-> int int) (seq (app f 0) (seq (app f 0) 1)))"
PROGRAMS = {"A": A, "B": B, "C": C}
PAIRS = [("A", "B"), ("A", "C"), ("B", "C")]


def hole(arg, body):
    return lt(f"(-> (-> int (R {arg} int)) (R {body} int))")


def test_e1_e2_distinguished_by_counter_context():
    ty = lt(E_TYPE)
    verdict = probe(E1, E2, ty, suite_for(ty))
    assert isinstance(verdict, Distinguished)
    assert verdict.witness.name == "C^ref"
    assert (verdict.outcome1.term, verdict.outcome2.term) == (IntLit(1), IntLit(2))


def test_same_component_not_distinguished():
    ty = lt(E_TYPE)
    verdict = probe(E1, E1, ty, suite_for(ty))
    assert isinstance(verdict, NotDistinguished)
    assert "C^ref" in verdict.tried


@pytest.mark.parametrize("arg, body", [("pure", "pure"), ("pure", "impure")])
def test_no_distinctions_when_argument_is_pure(arg, body):
    ty = hole(arg, body)
    for x, y in PAIRS:
        assert isinstance(probe(PROGRAMS[x], PROGRAMS[y], ty, suite_for(ty)), NotDistinguished)


def test_all_distinguished_when_impure():
    ty = hole("impure", "impure")
    for x, y in PAIRS:
        assert isinstance(probe(PROGRAMS[x], PROGRAMS[y], ty, suite_for(ty)), Distinguished), (x, y)


def test_impure_argument_pure_body_rules_out_calls():
    ty = hole("impure", "pure")
    suite = suite_for(ty)
    assert isinstance(probe(A, A, ty, suite), NotDistinguished)
    left, right = probe(B, A, ty, suite), probe(A, C, ty, suite)
    assert isinstance(left, IllTyped) and left.which == 1 and "impure" in left.reason
    assert isinstance(right, IllTyped) and right.which == 2


def test_builtin_suites_cover_both_bases():
    suites = builtin_suites()
    assert len(suites) == 8
    for ty, ctxs in suites.items():
        assert ctxs and all(c.hole_type == ty for c in ctxs)


def test_context_must_be_function():
    with pytest.raises(TypeCheckError):
        ProbeContext.from_text("bad", "1")


def test_context_hole_type_must_match():
    ctx = ProbeContext.from_text("c", C_REF, Lang.LAMREF)
    with pytest.raises(ValueError):
        probe(A, A, hole("pure", "pure"), [ctx])


def test_load_suite(demo, tmp_path):
    suite = load_suite(demo / "contexts")
    assert [c.name for c in suite] == ["count-calls"]
    (tmp_path / "c.lref").write_text(C_REF)
    (tmp_path / "notes.txt").write_text("ignored")
    loaded = load_suite(tmp_path)
    assert [c.name for c in loaded] == ["c"]
    verdict = probe(E1, E2, lt(E_TYPE), loaded)
    assert isinstance(verdict, Distinguished)


def test_exhausted_contexts_reported():
    ty = lt(E_TYPE)
    verdict = probe(E1, E2, ty, suite_for(ty), fuel=2)
    assert isinstance(verdict, NotDistinguished)
    assert set(verdict.exhausted) == set(verdict.tried)


def test_probe_is_fast():
    start = time.perf_counter()
    for arg in ("pure", "impure"):
        for body in ("pure", "impure"):
            ty = hole(arg, body)
            for x, y in PAIRS:
                probe(PROGRAMS[x], PROGRAMS[y], ty, suite_for(ty))
    assert time.perf_counter() - start < 5
