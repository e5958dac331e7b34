import random

import pytest

from conftest import E1, E_TYPE, lt, st
from linkc.errors import (
    CostMismatch,
    ExtensionConflict,
    IllegalType,
    LinearityViolation,
    TerminationCheckFailed,
    TypeCheckError,
)
from linkc.gen import gen_source_type, perturb_type, source_term
from linkc.linking import (
    check_programmer_source,
    check_termination,
    erase_annotations,
    infer_cost,
    kappa_minus,
    kappa_plus,
    typecheck_linked,
)
from linkc.source import typecheck_source
from linkc.syntax import (
    IMPURE,
    INT,
    PURE,
    UNIT,
    Arrow,
    ArrowCost,
    ArrowR,
    ArrowTerm,
    Ext,
    Lang,
    Linear,
    Ref,
    RefNew,
    STORE_OPS,
    Var,
    parse,
    walk,
)

STLCK, LAMREFK = Lang.STLCK, Lang.LAMREFK
A = "(lam f (-> int int) 1)"
B = "(lam f (-> int int) (seq (app f 0) 1))"


def check(text, lang=STLCK, ext=Ext.HEAP, ann=None, env=None):
    t = parse(text, lang, ext)
    a = lt(ann, lang, ext) if ann else None
    return typecheck_linked(env or {}, t, lang, ext, a)


# κ tables


@pytest.mark.parametrize(
    "lang, expected",
    [(Lang.STLC, ArrowR(UNIT, PURE, INT)), (Lang.LAMREF, ArrowR(UNIT, IMPURE, INT))],
)
def test_kappa_plus_heap_arrows(lang, expected):
    assert kappa_plus(Arrow(UNIT, INT), lang, Ext.HEAP) == expected


@pytest.mark.parametrize("ext", list(Ext))
@pytest.mark.parametrize("lang", [Lang.STLC, Lang.LAMREF])
def test_kappa_identity_on_base_types(ext, lang):
    for ty in (UNIT, INT):
        assert kappa_plus(ty, lang, ext) == ty
        assert kappa_minus(ty, lang, ext) == ty


def test_kappa_plus_other_extensions():
    arrow = Arrow(INT, INT)
    assert kappa_plus(arrow, Lang.LAMREF, Ext.LINEAR) == arrow
    assert kappa_plus(arrow, Lang.LAMREF, Ext.TERMINATING) == arrow
    assert kappa_plus(arrow, Lang.LAMREF, Ext.COST) == ArrowCost(INT, None, INT)


def test_kappa_plus_rejects_ref_under_stlc():
    with pytest.raises(IllegalType):
        kappa_plus(Ref(INT), Lang.STLC, Ext.HEAP)


def test_kappa_minus_examples():
    assert kappa_minus(ArrowR(UNIT, IMPURE, INT), Lang.LAMREF, Ext.HEAP) == Arrow(UNIT, INT)
    assert kappa_minus(Ref(INT), Lang.STLC, Ext.HEAP) == INT
    assert kappa_minus(Ref(INT), Lang.LAMREF, Ext.HEAP) == Ref(INT)
    assert kappa_minus(Linear(Arrow(INT, INT)), Lang.LAMREF, Ext.LINEAR) == Arrow(INT, INT)
    assert kappa_minus(ArrowTerm(INT, UNIT), Lang.STLC, Ext.TERMINATING) == Arrow(INT, UNIT)
    assert kappa_minus(ArrowCost(INT, 7, UNIT), Lang.STLC, Ext.COST) == Arrow(INT, UNIT)


def test_kappa_minus_rejects_foreign_constructors():
    with pytest.raises(IllegalType):
        kappa_minus(ArrowTerm(INT, INT), Lang.LAMREF, Ext.HEAP)


@pytest.mark.parametrize("ext", list(Ext))
@pytest.mark.parametrize("lang", [Lang.STLC, Lang.LAMREF])
def test_round_trip(ext, lang):
    fixed = st("(-> (-> int int) int)", lang)
    assert kappa_minus(kappa_plus(fixed, lang, ext), lang, ext) == fixed
    rng = random.Random(f"{lang}{ext}")
    for _ in range(300):
        ty = gen_source_type(rng, lang, 6)
        assert kappa_minus(kappa_plus(ty, lang, ext), lang, ext) == ty


# heap-effect checking


def test_e1_annotated():
    j = check(E1, ann=E_TYPE)
    assert j.type == lt(E_TYPE)
    assert j.effect is PURE


def test_program_a_accepted_program_b_rejected():
    ann = "(-> (-> int (R impure int)) (R pure int))"
    assert check(A, ann=ann).type == lt(ann)
    with pytest.raises(TypeCheckError, match="impure"):
        check(B, ann=ann)


def test_subeffecting_pure_argument_in_impure_body():
    ann = "(-> (-> int (R pure int)) (R impure int))"
    j = check("(lam f (-> int (R pure int)) (seq (app f 0) 1))", ann=ann)
    assert j.type == lt(ann)


def test_unannotated_gets_default_embedding():
    assert check(E1).type == kappa_plus(st("(-> (-> unit int) int)", Lang.STLC), Lang.STLC, Ext.HEAP)
    assert check(E1, LAMREFK).type == kappa_plus(st("(-> (-> unit int) int)"), Lang.LAMREF, Ext.HEAP)


def test_store_operations_are_impure():
    j = check("(let r (ref 0) (deref r))", LAMREFK)
    assert j.effect is IMPURE
    j = check("(lam u unit (ref 0))", LAMREFK)
    assert j.effect is PURE and j.type == ArrowR(UNIT, IMPURE, Ref(INT))


def test_application_joins_latent_effect():
    env = {"g": ArrowR(INT, IMPURE, INT)}
    assert typecheck_linked(env, parse("(app g 1)", LAMREFK), LAMREFK).effect is IMPURE
    env = {"g": ArrowR(INT, PURE, INT)}
    assert typecheck_linked(env, parse("(app g 1)", LAMREFK), LAMREFK).effect is PURE


def test_synthesized_function_keeps_source_meaning():
    # λ^ref code passes a pure-bodied function where κ+ expects an impure arrow
    text = "(let g (lam h (-> int int) (app h 1)) (let i (lam x int x) (app g i)))"
    assert check(text, LAMREFK).type == INT


def test_annotation_mismatch_is_an_error():
    with pytest.raises(TypeCheckError):
        check("(: 1 unit)", LAMREFK)


# programmer-source discipline


def test_reasoning_only_terms_flagged_in_stlck():
    bad = check_programmer_source(parse("(lam x int (ref 0))", STLCK), STLCK)
    assert len(bad) == 1 and isinstance(bad[0], RefNew)
    assert check_programmer_source(parse("(ref 0)", LAMREFK), LAMREFK) == []


def test_annotations_always_allowed():
    assert check_programmer_source(parse(f"(: {E1} {E_TYPE})", STLCK), STLCK) == []
    assert check_programmer_source(parse("(lam x int x)", STLCK), STLCK) == []


# effect honesty


def test_pure_judgments_run_without_store_operations():
    from linkc.compiler import compile
    from linkc.gen import linked_term
    from linkc.machine import Value
    from linkc.target import eval_target

    rng = random.Random(3)
    seen = 0
    while seen < 100:
        t, ty = linked_term(rng, LAMREFK, INT, eff=PURE)
        j = typecheck_linked({}, t, LAMREFK, Ext.HEAP, ty)
        assert j.effect is PURE
        out = eval_target(compile(t, LAMREFK, j))
        assert isinstance(out, Value) and out.stats.store_ops == 0
        seen += 1


# the other extensions


def test_linear_exactly_once():
    check("(lam x (lin int) x)", LAMREFK, Ext.LINEAR)
    with pytest.raises(LinearityViolation) as info:
        check("(lam x (lin int) (+ x x))", LAMREFK, Ext.LINEAR)
    assert info.value.uses == 2
    with pytest.raises(LinearityViolation) as info:
        check("(lam x (lin int) 1)", LAMREFK, Ext.LINEAR)
    assert info.value.uses == 0


def test_linear_values_cannot_be_stored():
    with pytest.raises(TypeCheckError):
        check("(lam x (lin int) (ref x))", LAMREFK, Ext.LINEAR)


def test_unrestricted_value_fits_linear_slot():
    j = check("(app (lam f (lin (-> int int)) (app f 1)) (lam y int y))", LAMREFK, Ext.LINEAR)
    assert j.type == INT


def _count_uses(t, name):
    return sum(1 for node in walk(t) if isinstance(node, Var) and node.name == name)


@pytest.mark.parametrize(
    "text",
    ["(lam x (lin int) (+ 1 x))", "(lam x (lin int) (let y x y))", "(lam f (lin (-> int int)) (app f 2))"],
)
def test_linear_usage_matches_independent_count(text):
    t = parse(text, LAMREFK, Ext.LINEAR)
    typecheck_linked({}, t, LAMREFK, Ext.LINEAR)
    assert _count_uses(t.body, t.param) == 1


def test_mixing_linear_with_heap_effects_is_a_conflict():
    with pytest.raises(ExtensionConflict):
        typecheck_linked({}, parse("(lam x int x)", LAMREFK), LAMREFK, Ext.LINEAR, ArrowR(INT, PURE, INT))
    with pytest.raises(ExtensionConflict):
        typecheck_linked({}, parse("(lam x int x)", LAMREFK), LAMREFK, Ext.HEAP, Linear(Arrow(INT, INT)))


def test_terminating_annotation_runs_the_check():
    assert check("(lam x int (+ x 1))", LAMREFK, Ext.TERMINATING, "(-> int (term int))").type == ArrowTerm(INT, INT)
    with pytest.raises(TerminationCheckFailed):
        check("(lam x int (seq (ref 1) x))", LAMREFK, Ext.TERMINATING, "(-> int (term int))")


def test_check_termination_examples():
    assert check_termination(parse("(lam x int (+ x 1))", LAMREFK))
    assert not check_termination(parse("(lam r (ref int) (assign r 0))", LAMREFK))
    body = parse("(app g 1)", LAMREFK)
    assert check_termination(body, {"g": ArrowTerm(INT, INT)})
    assert not check_termination(body, {"g": Arrow(INT, INT)})


def test_infer_cost_examples():
    env = {"x": INT}
    assert infer_cost(parse("x", LAMREFK), env) == 0
    assert infer_cost(parse("(+ x 1)", LAMREFK), env) == 1
    assert infer_cost(parse("(app f x)", LAMREFK), {**env, "f": ArrowCost(INT, None, INT)}) is None
    assert infer_cost(parse("(app f x)", LAMREFK), {**env, "f": ArrowCost(INT, 4, INT)}) == 5
    assert infer_cost(parse("(deref r)", LAMREFK), {"r": Ref(INT)}) is None


def test_cost_annotation_checked():
    assert check("(lam x int (+ x 1))", LAMREFK, Ext.COST, "(-> int (C 1 int))").type == ArrowCost(INT, 1, INT)
    with pytest.raises(CostMismatch) as info:
        check("(lam x int (+ x 1))", LAMREFK, Ext.COST, "(-> int (C 2 int))")
    assert (info.value.expected, info.value.found) == (2, 1)
    check("(lam x int (+ x 1))", LAMREFK, Ext.COST, "(-> int (C ? int))")


# subset and projection properties


@pytest.mark.parametrize("lang", [Lang.STLC, Lang.LAMREF])
def test_subset_property(lang):
    rng = random.Random(19)
    for _ in range(300):
        t, ty = source_term(rng, lang)
        j = typecheck_linked({}, t, lang.extended(), Ext.HEAP, kappa_plus(ty, lang, Ext.HEAP))
        assert kappa_minus(j.type, lang, Ext.HEAP) == ty


@pytest.mark.parametrize("lang", [Lang.STLC, Lang.LAMREF])
def test_projection_property(lang):
    rng = random.Random(23)
    accepted = 0
    while accepted < 100:
        t, ty = source_term(rng, lang)
        target = perturb_type(rng, kappa_plus(ty, lang, Ext.HEAP))
        try:
            j = typecheck_linked({}, t, lang.extended(), Ext.HEAP, target)
        except TypeCheckError:
            continue
        accepted += 1
        assert typecheck_source({}, t, lang) == kappa_minus(j.type, lang, Ext.HEAP)


def test_erase_annotations_projects_to_source():
    t = parse(f"(: {E1} {E_TYPE})", STLCK)
    erased = erase_annotations(t, STLCK)
    assert typecheck_source({}, erased, Lang.STLC) == st("(-> (-> unit int) int)", Lang.STLC)
    assert not any(isinstance(n, STORE_OPS) for n in walk(erased))


def test_linear_alias_inherits_linearity():
    with pytest.raises(LinearityViolation):
        check("(lam x (lin int) (let y x (+ y y)))", LAMREFK, Ext.LINEAR)
