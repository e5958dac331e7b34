import random

import pytest

from conftest import C_REF, E1, E2, st, term
from linkc.errors import TypeCheckError, UnboundVariable
from linkc.gen import source_term
from linkc.machine import OutOfFuel, Store, Stuck, Value, evaluate, wrap64
from linkc.source import eval_source, typecheck_source
from linkc.syntax import INT, UNIT, App, IntLit, Lang, term_size

LANDIN = (
    "(let r (ref (lam x int x))"
    " (seq (assign r (lam x int (app (deref r) x))) (app (deref r) 0)))"
)


def test_e1_type():
    assert typecheck_source({}, term(E1, Lang.STLC), Lang.STLC) == st("(-> (-> unit int) int)")


def test_unit_type():
    assert typecheck_source({}, term("unit", Lang.STLC), Lang.STLC) == UNIT


def test_cref_types_only_with_references():
    assert typecheck_source({}, term(C_REF, Lang.LAMREF), Lang.LAMREF) == st("(-> (-> (-> unit int) int) int)")
    with pytest.raises(Exception):
        typecheck_source({}, term(C_REF, Lang.STLC), Lang.STLC)


@pytest.mark.parametrize(
    "text, error",
    [
        ("(+ 1 unit)", TypeCheckError),
        ("(app 1 2)", TypeCheckError),
        ("(lam x int y)", UnboundVariable),
        ("(app (lam x int x) unit)", TypeCheckError),
        ("(deref 1)", TypeCheckError),
        ("(assign (ref 1) unit)", TypeCheckError),
    ],
)
def test_type_errors(text, error):
    with pytest.raises(error):
        typecheck_source({}, term(text, Lang.LAMREF), Lang.LAMREF)


def test_type_error_carries_position():
    with pytest.raises(TypeCheckError) as info:
        typecheck_source({}, term("(lam x int\n (+ x unit))", Lang.STLC), Lang.STLC)
    assert info.value.pos == (2, 7)


def test_env_lookup():
    assert typecheck_source({"y": INT}, term("(+ y 1)", Lang.STLC), Lang.STLC) == INT


def test_simple_evaluation():
    out = eval_source(term("(app (lam x int (+ x 1)) 2)", Lang.STLC), Lang.STLC)
    assert isinstance(out, Value) and out.term == IntLit(3)


@pytest.mark.parametrize("client, expected", [(E1, 1), (E2, 2)])
def test_cref_counter(client, expected):
    prog = App(term(C_REF, Lang.LAMREF), term(client, Lang.LAMREF))
    out = eval_source(prog, Lang.LAMREF)
    assert isinstance(out, Value) and out.term == IntLit(expected)
    assert out.store.cells  # the counter cell survives in the final store


@pytest.mark.parametrize("fuel", [10**2, 10**3, 10**4, 10**5])
def test_landin_knot_diverges(fuel):
    t = term(LANDIN, Lang.LAMREF)
    assert typecheck_source({}, t, Lang.LAMREF) == INT
    out = eval_source(t, Lang.LAMREF, fuel=fuel)
    assert isinstance(out, OutOfFuel)
    assert out.stats.steps == fuel


def test_evaluation_is_deterministic():
    t = App(term(C_REF, Lang.LAMREF), term(E2, Lang.LAMREF))
    assert eval_source(t, Lang.LAMREF, fuel=40) == eval_source(t, Lang.LAMREF, fuel=40)
    assert eval_source(t, Lang.LAMREF) == eval_source(t, Lang.LAMREF)


def test_arithmetic_wraps_at_64_bits():
    big = 2**63 - 1
    out = eval_source(term(f"(+ {big} 1)", Lang.STLC), Lang.STLC)
    assert out.term == IntLit(-(2**63))
    assert wrap64(2**64 + 5) == 5


def test_source_rejects_foreign_constructs():
    assert isinstance(eval_source(term("(ref 1)", Lang.LAMREF), Lang.STLC), Stuck)
    assert isinstance(evaluate(term("(throw 1)", Lang.TARGET), exceptions=False), Stuck)


def test_store_threading():
    store = Store()
    out = eval_source(term("(let r (ref 1) (seq (assign r 5) (deref r)))", Lang.LAMREF), Lang.LAMREF, store=store)
    assert out.term == IntLit(5)
    assert out.stats.store_ops == 3


@pytest.mark.parametrize("lang", [Lang.STLC, Lang.LAMREF])
def test_well_typed_terms_never_get_stuck(lang):
    rng = random.Random(11)
    for _ in range(500):
        t, ty = source_term(rng, lang)
        assert typecheck_source({}, t, lang) == ty
        out = eval_source(t, lang)
        assert not isinstance(out, Stuck), out


def test_stlc_terms_terminate():
    rng = random.Random(5)
    count = 0
    while count < 200:
        t, _ = source_term(rng, Lang.STLC)
        if term_size(t) > 30:
            continue
        count += 1
        assert isinstance(eval_source(t, Lang.STLC, fuel=10**6), Value)
