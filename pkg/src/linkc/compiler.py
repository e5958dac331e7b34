"""Type-directed compilation of heap-effect linking-types programs to λ^ref_exc."""

from __future__ import annotations

from .errors import CompileError, NotExpressible, UnsupportedExtension
from .linking import LinkJudgment, check_programmer_source
from .syntax import (
    VOID,
    Ann,
    App,
    Arrow,
    ArrowCost,
    ArrowR,
    ArrowTerm,
    Assign,
    BinOp,
    Comp,
    Deref,
    Ext,
    Int,
    IntLit,
    Lam,
    Lang,
    Linear,
    Ref,
    RefNew,
    TArrow,
    Unit,
    UnitVal,
    Var,
    print_type,
)

COERCE_BINDER = "coerce"


def translate_type(ty):
    """⟦·⟧: heap-effect linking types to target types; every arrow gets exception type 0."""
    match ty:
        case Unit() | Int():
            return ty
        case Ref(inner):
            return Ref(translate_type(inner))
        case ArrowR(d, eff, c):
            return TArrow(translate_type(d), Comp(eff, VOID, translate_type(c)))
        case Linear() | ArrowTerm() | ArrowCost() | Arrow():
            raise UnsupportedExtension(
                f"{print_type(ty)} has no target translation; only heap-effect linking types compile"
            )
    raise UnsupportedExtension(f"{print_type(ty)} is not a linking type")


def backtranslate_type(ty, lang: Lang = Lang.STLCK):
    """Invert :func:`translate_type`; raises :class:`NotExpressible` outside its image."""
    if lang is Lang.TARGET:
        raise ValueError("back-translation targets a source language")
    match ty:
        case Unit() | Int():
            return ty
        case Ref(inner):
            return Ref(backtranslate_type(inner, lang))
        case TArrow(d, Comp(eff, exn, res)):
            if exn != VOID:
                raise NotExpressible(
                    f"exception type {print_type(exn)} is not 0; no source arrow raises exceptions", ty
                )
            return ArrowR(backtranslate_type(d, lang), eff, backtranslate_type(res, lang))
    raise NotExpressible(f"{print_type(ty)} has no source counterpart", ty)


def _coerce(term, ty):
    return App(Lam(COERCE_BINDER, ty, Var(COERCE_BINDER)), term)


def compile(t, lang: Lang, judgment: LinkJudgment):
    """Elaborate a checked linking-types term into a target term.

    The mapping is homomorphic; the only inserted code is an identity
    application where a term is given a less precise type than the one it
    naturally has (an annotation, or an unannotated function widened to its
    κ+ meaning), so the target checker sees the intended type.
    """
    if judgment.ext is not Ext.HEAP:
        raise UnsupportedExtension(f"terms of the {judgment.ext.value} extension are checked but not compiled")
    bad = check_programmer_source(t, lang, judgment.ext)
    if bad:
        raise CompileError(f"{type(bad[0]).__name__} is reasoning-only in {lang.value}", getattr(bad[0], "pos", None))

    binders, coerce = judgment.binder_types, judgment.coerce

    def go(node):
        match node:
            case UnitVal() | IntLit() | Var():
                return node
            case Lam(x, None, body):
                return Lam(x, None, go(body), pos=node.pos)
            case Lam(x, _, body):
                out = Lam(x, translate_type(binders[id(node)]), go(body), pos=node.pos)
                if id(node) in coerce:
                    return _coerce(out, translate_type(coerce[id(node)]))
                return out
            case App(f, a):
                return App(go(f), go(a), pos=node.pos)
            case BinOp(op, l, r):
                return BinOp(op, go(l), go(r), pos=node.pos)
            case RefNew(e):
                return RefNew(go(e), pos=node.pos)
            case Deref(e):
                return Deref(go(e), pos=node.pos)
            case Assign(r, v):
                return Assign(go(r), go(v), pos=node.pos)
            case Ann(e, ty):
                inner = go(e)
                if id(node) in coerce:
                    return _coerce(inner, translate_type(coerce[id(node)]))
                return inner
        raise CompileError(f"cannot compile {type(node).__name__}", getattr(node, "pos", None))

    out = go(t)
    if judgment.natural is not None and judgment.natural != judgment.type:
        out = _coerce(out, translate_type(judgment.type))
    return out
