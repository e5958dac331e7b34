"""Type checking and evaluation for the unextended source languages λ and λ^ref."""

from __future__ import annotations

from .errors import IllegalType, TypeCheckError, UnboundVariable
from .machine import DEFAULT_FUEL, Outcome, Store, Stuck, evaluate
from .syntax import (
    INT,
    UNIT,
    Ann,
    App,
    Arrow,
    Assign,
    BinOp,
    Catch,
    Deref,
    Int,
    IntLit,
    Lam,
    Lang,
    Loc,
    Ref,
    RefNew,
    Throw,
    Unit,
    UnitVal,
    Var,
    print_type,
    walk,
)

TypeEnv = dict


def check_source_type(ty, lang: Lang, node=None):
    match ty:
        case Unit() | Int():
            return
        case Ref(inner):
            if lang is Lang.STLC:
                raise IllegalType(f"ref type {print_type(ty)} in the simply typed language", node)
            check_source_type(inner, lang, node)
        case Arrow(d, c):
            check_source_type(d, lang, node)
            check_source_type(c, lang, node)
        case _:
            raise IllegalType(f"{print_type(ty)} is not a type of {lang.value}", node)


def _expect(node, expected, found):
    if expected != found:
        raise TypeCheckError(
            f"expected {print_type(expected)}, found {print_type(found)}", node, expected, found
        )


def typecheck_source(env: TypeEnv, t, lang: Lang):
    """Return the type of ``t`` under ``env`` in λ (``Lang.STLC``) or λ^ref (``Lang.LAMREF``)."""
    if lang not in (Lang.STLC, Lang.LAMREF):
        raise ValueError(f"typecheck_source handles stlc/lamref, not {lang.value}")
    return _synth(dict(env), t, lang)


def _synth(env, t, lang):
    match t:
        case UnitVal():
            return UNIT
        case IntLit():
            return INT
        case Var(name):
            if name not in env:
                raise UnboundVariable(name, t)
            return env[name]
        case App(Lam(x, None, body), bound):
            bound_ty = _synth(env, bound, lang)
            return _synth({**env, x: bound_ty}, body, lang)
        case Lam(x, None, _):
            raise TypeCheckError(f"binder {x} has no type annotation", t)
        case Lam(x, ty, body):
            check_source_type(ty, lang, t)
            return Arrow(ty, _synth({**env, x: ty}, body, lang))
        case App(f, a):
            fty = _synth(env, f, lang)
            if not isinstance(fty, Arrow):
                raise TypeCheckError(f"applying a non-function of type {print_type(fty)}", t, "arrow", fty)
            _expect(a, fty.dom, _synth(env, a, lang))
            return fty.cod
        case BinOp(_, l, r):
            _expect(l, INT, _synth(env, l, lang))
            _expect(r, INT, _synth(env, r, lang))
            return INT
        case RefNew(e) if lang is Lang.LAMREF:
            return Ref(_synth(env, e, lang))
        case Deref(e) if lang is Lang.LAMREF:
            rty = _synth(env, e, lang)
            if not isinstance(rty, Ref):
                raise TypeCheckError(f"dereferencing a non-reference {print_type(rty)}", t, "ref", rty)
            return rty.inner
        case Assign(r, v) if lang is Lang.LAMREF:
            rty = _synth(env, r, lang)
            if not isinstance(rty, Ref):
                raise TypeCheckError(f"assigning to a non-reference {print_type(rty)}", t, "ref", rty)
            _expect(v, rty.inner, _synth(env, v, lang))
            return UNIT
    raise TypeCheckError(f"{type(t).__name__} is not a term of {lang.value}", t)


def eval_source(t, lang: Lang, fuel: int = DEFAULT_FUEL, store: Store | None = None) -> Outcome:
    """Left-to-right call-by-value evaluation of a closed source term.

    Linking-types terms evaluate the same way; annotations are transparent.
    """
    if lang is Lang.TARGET:
        raise ValueError("use eval_target for target programs")
    for node in walk(t):
        if isinstance(node, (Throw, Catch)):
            return Stuck("exceptions are not part of the source languages")
        if lang is Lang.STLC and isinstance(node, (RefNew, Assign, Deref, Loc)):
            return Stuck("store operation in a simply typed program")
        if isinstance(node, Ann) and not lang.is_linking:
            return Stuck("annotation outside a linking-types language")
    return evaluate(t, fuel=fuel, exceptions=False, store=store)
