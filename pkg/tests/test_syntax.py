import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st_

from conftest import E1
from linkc.errors import ParseError
from linkc.gen import TermGen, gen_heap_type, gen_link_type, gen_source_type, target_term
from linkc.syntax import (
    IMPURE,
    INT,
    PURE,
    UNIT,
    VOID,
    App,
    Arrow,
    ArrowCost,
    ArrowR,
    ArrowTerm,
    Assign,
    BinOp,
    Comp,
    Deref,
    Effect,
    Ext,
    IntLit,
    Lam,
    Lang,
    Linear,
    Loc,
    Ref,
    TArrow,
    UnitVal,
    Var,
    is_let,
    join,
    make_seq,
    parse,
    parse_lang,
    parse_type,
    print_term,
    print_type,
    show_comp,
    show_type,
    term_depth,
)


def test_parse_e1():
    assert parse(E1, Lang.STLC) == Lam("c", Arrow(UNIT, INT), App(Var("c"), UnitVal()))


def test_parse_seq_desugars_to_application():
    t = parse("(seq (assign x (+ (deref x) 1)) (deref x))", Lang.LAMREF)
    expected = make_seq(Assign(Var("x"), BinOp("+", Deref(Var("x")), IntLit(1))), Deref(Var("x")))
    assert t == expected
    assert is_let(t)


def test_positions_are_recorded():
    t = parse("(lam x int\n  (+ x y))", Lang.STLC)
    assert t.body.pos == (2, 3)
    assert t.body.right.pos == (2, 8)


@pytest.mark.parametrize(
    "text, lang",
    [
        ("(ref 0)", Lang.STLC),
        ("(deref x)", Lang.STLC),
        ("(lam x (ref int) x)", Lang.STLC),
        ("(throw 1)", Lang.LAMREF),
        ("(catch 1 (val x x) (exc y y))", Lang.STLCK),
        ("(: 1 int)", Lang.STLC),
        ("(lam x void x)", Lang.LAMREF),
        ("(lam x (-> int (R pure int)) x)", Lang.LAMREF),
        ("(lam x (-> int int) x)", Lang.TARGET),
        ("#loc0", Lang.LAMREF),
        ("(lam lam int 1)", Lang.STLC),
        ("(app f)", Lang.STLC),
        ("(+ 1 2", Lang.STLC),
        ("(+ 1 2))", Lang.STLC),
    ],
)
def test_grammar_exclusions(text, lang):
    with pytest.raises(ParseError) as info:
        parse(text, lang)
    assert info.value.line >= 1 and info.value.col >= 1


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse("(lam x int\n   (ref 0))", Lang.STLC)
    assert (info.value.line, info.value.col) == (2, 4)


def test_extension_type_constructors():
    assert parse_type("(lin (-> int int))", Lang.LAMREFK, Ext.LINEAR) == Linear(Arrow(INT, INT))
    assert parse_type("(-> int (term int))", Lang.STLCK, Ext.TERMINATING) == ArrowTerm(INT, INT)
    assert parse_type("(-> int (C 3 int))", Lang.STLCK, Ext.COST) == ArrowCost(INT, 3, INT)
    assert parse_type("(-> int (C ? int))", Lang.STLCK, Ext.COST) == ArrowCost(INT, None, INT)
    with pytest.raises(ParseError):
        parse_type("(lin int)", Lang.LAMREFK, Ext.HEAP)
    with pytest.raises(ParseError):
        parse_type("(-> int (C -1 int))", Lang.STLCK, Ext.COST)


def test_target_types():
    ty = parse_type("(-> unit (E impure void int))", Lang.TARGET)
    assert ty == TArrow(UNIT, Comp(IMPURE, VOID, INT))
    assert show_type(ty) == "unit → E•_0 int"
    assert show_comp(Comp(PURE, INT, UNIT)) == "E∘_int unit"
    assert show_type(ArrowR(UNIT, PURE, INT)) == "unit → R∘ int"


def test_print_unit_and_loc():
    assert print_term(UnitVal()) == "unit"
    assert print_term(Loc(3)) == "#loc3"


def test_deep_nesting_round_trips():
    t = IntLit(0)
    for i in range(50):
        t = BinOp("+", t, IntLit(i))
    assert term_depth(t) == 51
    assert parse(print_term(t), Lang.STLC) == t
    ty = INT
    for _ in range(50):
        ty = Ref(ty)
    assert parse_type(print_type(ty), Lang.LAMREF) == ty


def test_parse_lang_aliases():
    assert parse_lang("lref") is Lang.LAMREF
    assert parse_lang("lamrefk") is Lang.LAMREFK
    with pytest.raises(ValueError):
        parse_lang("cobol")


@settings(max_examples=150, deadline=None)
@given(seed=st_.integers(0, 2**32), lang=st_.sampled_from([Lang.STLC, Lang.LAMREF]))
def test_source_type_round_trip(seed, lang):
    ty = gen_source_type(random.Random(seed), lang, 6)
    assert parse_type(print_type(ty), lang) == ty


@settings(max_examples=150, deadline=None)
@given(seed=st_.integers(0, 2**32), ext=st_.sampled_from(list(Ext)))
def test_link_type_round_trip(seed, ext):
    ty = gen_link_type(random.Random(seed), Lang.LAMREFK, ext, 6)
    assert parse_type(print_type(ty), Lang.LAMREFK, ext) == ty


@settings(max_examples=150, deadline=None)
@given(seed=st_.integers(0, 2**32), lang=st_.sampled_from([Lang.STLCK, Lang.LAMREFK]), source=st_.booleans())
def test_term_round_trip(seed, lang, source):
    gen = TermGen(random.Random(seed), lang, source=source, max_depth=8)
    ty = gen_heap_type(random.Random(seed), 2, refs=False)
    t = gen.closed(ty)
    plang = lang.base if source else lang
    assert parse(print_term(t), plang) == t


@settings(max_examples=100, deadline=None)
@given(seed=st_.integers(0, 2**32))
def test_target_term_round_trip(seed):
    t = target_term(random.Random(seed), INT, INT, depth=5)
    assert parse(print_term(t), Lang.TARGET) == t


effects = st_.sampled_from([PURE, IMPURE])


@given(effects, effects)
def test_join_commutative(a, b):
    assert join(a, b) is join(b, a)


@given(effects, effects, effects)
def test_join_associative(a, b, c):
    assert join(join(a, b), c) is join(a, join(b, c))


@given(effects)
def test_join_idempotent_with_pure_identity(a):
    assert join(a, a) is a
    assert join(PURE, a) is a
    assert join() is PURE


@pytest.mark.parametrize("a", list(Effect))
@pytest.mark.parametrize("b", list(Effect))
def test_join_is_pure_iff_both_pure(a, b):
    assert (join(a, b) is PURE) == (a is PURE and b is PURE)
    assert (a <= b) == (join(a, b) is b)
