"""Linking-types extensions: κ+/κ−, the extended type checker, and its side checks.

Four extensions are supported, each over λ and λ^ref:

* ``Ext.HEAP``        arrows ``τ → R^ε τ`` tracking heap effects
* ``Ext.LINEAR``      ``φ | φ^L`` with exactly-once use of linear variables
* ``Ext.TERMINATING`` terminating arrows ``τ → τ↾`` next to ordinary ones
* ``Ext.COST``        ``τ → C^N τ`` (known cost) and ``τ → C^• τ`` (unknown)

Types written in a linking-types program may mix plain source arrows with
extension arrows; a plain arrow is read through the default κ+ embedding, so
unannotated positions keep their source meaning.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    CostMismatch,
    ExtensionConflict,
    IllegalType,
    LinearityViolation,
    TerminationCheckFailed,
    TypeCheckError,
    UnboundVariable,
)
from .syntax import (
    IMPURE,
    INT,
    PURE,
    UNIT,
    Ann,
    App,
    Arrow,
    ArrowCost,
    ArrowR,
    ArrowTerm,
    Assign,
    BinOp,
    Catch,
    Deref,
    Effect,
    Ext,
    Int,
    IntLit,
    Lam,
    Lang,
    Linear,
    Loc,
    Ref,
    RefNew,
    Throw,
    Unit,
    UnitVal,
    Var,
    children,
    join,
    print_type,
    walk,
)

_EXT_CTORS = {
    Ext.HEAP: (ArrowR,),
    Ext.LINEAR: (Linear,),
    Ext.TERMINATING: (ArrowTerm,),
    Ext.COST: (ArrowCost,),
}


def _base(lang: Lang) -> Lang:
    base = lang.base
    if base not in (Lang.STLC, Lang.LAMREF):
        raise ValueError(f"{lang.value} has no linking-types extension")
    return base


def default_effect(lang: Lang) -> Effect:
    """Latent effect κ+ gives to arrows of ``lang``."""
    return PURE if _base(lang) is Lang.STLC else IMPURE


# ---------------------------------------------------------------------------
# κ+ and κ−


def kappa_plus(ty, lang: Lang, ext: Ext):
    """Embed a source type of ``lang`` into the linking types of ``ext``."""
    base = _base(lang)
    match ty:
        case Unit() | Int():
            return ty
        case Ref(inner):
            if base is Lang.STLC:
                raise IllegalType(f"{print_type(ty)} is not a type of the simply typed language")
            return Ref(kappa_plus(inner, lang, ext))
        case Arrow(d, c):
            d, c = kappa_plus(d, lang, ext), kappa_plus(c, lang, ext)
            if ext is Ext.HEAP:
                return ArrowR(d, default_effect(base), c)
            if ext is Ext.COST:
                return ArrowCost(d, None, c)
            return Arrow(d, c)
    raise IllegalType(f"{print_type(ty)} is not a source type")


def kappa_minus(ty, lang: Lang, ext: Ext):
    """Project a linking type of ``ext`` back to a source type of ``lang``."""
    base = _base(lang)
    match ty:
        case Unit() | Int():
            return ty
        case Ref(inner):
            # λ has no references: the heap-effect table projects ref τ to κ−(τ).
            if base is Lang.STLC:
                return kappa_minus(inner, lang, ext)
            return Ref(kappa_minus(inner, lang, ext))
        case ArrowR(d, _, c) if ext is Ext.HEAP:
            return Arrow(kappa_minus(d, lang, ext), kappa_minus(c, lang, ext))
        case Arrow(d, c) if ext in (Ext.LINEAR, Ext.TERMINATING):
            return Arrow(kappa_minus(d, lang, ext), kappa_minus(c, lang, ext))
        case ArrowTerm(d, c) if ext is Ext.TERMINATING:
            return Arrow(kappa_minus(d, lang, ext), kappa_minus(c, lang, ext))
        case ArrowCost(d, _, c) if ext is Ext.COST:
            return Arrow(kappa_minus(d, lang, ext), kappa_minus(c, lang, ext))
        case Linear(inner) if ext is Ext.LINEAR:
            return kappa_minus(inner, lang, ext)
    raise IllegalType(f"{print_type(ty)} is not a linking type of the {ext.value} extension")


def check_link_type(ty, ext: Ext, node=None):
    """Reject types outside the grammar of ``ext``."""
    match ty:
        case Unit() | Int():
            return
        case Ref(inner):
            check_link_type(inner, ext, node)
            return
        case Arrow(d, c) if ext in (Ext.LINEAR, Ext.TERMINATING):
            pass
        case ArrowR(d, _, c) if ext is Ext.HEAP:
            pass
        case ArrowTerm(d, c) if ext is Ext.TERMINATING:
            pass
        case ArrowCost(d, n, c) if ext is Ext.COST:
            if n is not None and n < 0:
                raise IllegalType(f"negative cost in {print_type(ty)}", node)
        case Linear(inner) if ext is Ext.LINEAR:
            if isinstance(inner, Linear):
                raise IllegalType("nested linearity marker", node)
            check_link_type(inner, ext, node)
            return
        case _:
            _foreign(ty, ext, node)
    check_link_type(ty.dom, ext, node)
    check_link_type(ty.cod, ext, node)


def _foreign(ty, ext: Ext, node):
    for other, ctors in _EXT_CTORS.items():
        if other is not ext and isinstance(ty, ctors):
            raise ExtensionConflict(
                f"{print_type(ty)} belongs to the {other.value} extension, not {ext.value}", node
            )
    raise IllegalType(f"{print_type(ty)} is not a linking type of the {ext.value} extension", node)


def elaborate(ty, lang: Lang, ext: Ext, node=None):
    """Read a written type: plain arrows go through κ+, extension types stay as written."""
    match ty:
        case Unit() | Int():
            return ty
        case Ref(inner):
            return Ref(elaborate(inner, lang, ext, node))
        case Arrow(d, c):
            d, c = elaborate(d, lang, ext, node), elaborate(c, lang, ext, node)
            if ext is Ext.HEAP:
                return ArrowR(d, default_effect(lang), c)
            if ext is Ext.COST:
                return ArrowCost(d, None, c)
            return Arrow(d, c)
        case ArrowR(d, eff, c) if ext is Ext.HEAP:
            return ArrowR(elaborate(d, lang, ext, node), eff, elaborate(c, lang, ext, node))
        case ArrowTerm(d, c) if ext is Ext.TERMINATING:
            return ArrowTerm(elaborate(d, lang, ext, node), elaborate(c, lang, ext, node))
        case ArrowCost(d, n, c) if ext is Ext.COST:
            if n is not None and n < 0:
                raise IllegalType(f"negative cost in {print_type(ty)}", node)
            return ArrowCost(elaborate(d, lang, ext, node), n, elaborate(c, lang, ext, node))
        case Linear(inner) if ext is Ext.LINEAR:
            inner = elaborate(inner, lang, ext, node)
            if isinstance(inner, Linear):
                raise IllegalType("nested linearity marker", node)
            return Linear(inner)
    _foreign(ty, ext, node)


def strip_linear(ty):
    return ty.inner if isinstance(ty, Linear) else ty


def latent_effect(arrow) -> Effect:
    """Effect of calling a function of this arrow type."""
    match arrow:
        case ArrowR(_, eff, _):
            return eff
        case ArrowTerm() | ArrowCost(_, int(), _):
            return PURE
    return IMPURE


def _is_ext_arrow(ty, ext: Ext) -> bool:
    if ext is Ext.HEAP:
        return isinstance(ty, ArrowR)
    if ext is Ext.TERMINATING:
        return isinstance(ty, (Arrow, ArrowTerm))
    if ext is Ext.COST:
        return isinstance(ty, ArrowCost)
    return isinstance(ty, Arrow)


def compatible(actual, expected, ext: Ext) -> bool:
    """May a value of type ``actual`` flow where ``expected`` is required?"""
    if actual == expected:
        return True
    match ext, actual, expected:
        case Ext.LINEAR, _, Linear(inner):
            return actual == inner
        case Ext.TERMINATING, ArrowTerm(d, c), Arrow(d2, c2):
            return d == d2 and c == c2
        case Ext.COST, ArrowCost(d, int(), c), ArrowCost(d2, None, c2):
            return d == d2 and c == c2
    return False


# ---------------------------------------------------------------------------
# Judgments


@dataclass
class LinkJudgment:
    """``subject : type`` with top-level computation effect ``effect``.

    ``natural`` is the type the subject has before the top-level annotation
    is applied; ``binder_types`` and ``coerce`` record what the type-directed
    compiler needs (parameter types chosen by the checker, and the nodes
    whose natural type is more precise than the type they are used at,
    mapped to that type).
    """

    subject: object
    type: object
    effect: Effect
    lang: Lang = Lang.STLCK
    ext: Ext = Ext.HEAP
    natural: object = None
    binder_types: dict[int, object] = field(default_factory=dict, repr=False)
    coerce: dict[int, object] = field(default_factory=dict, repr=False)


class _Checker:
    def __init__(self, lang: Lang, ext: Ext):
        _base(lang)
        self.lang = lang
        self.ext = ext
        self.binder_types: dict[int, object] = {}
        self.coerce: dict[int, object] = {}
        self.uses: dict[int, int] = {}
        self._next_key = 0

    # env entries are (type, key); key indexes the linear-use counter
    def bind(self, env, name, ty):
        self._next_key += 1
        key = self._next_key
        self.uses[key] = 0
        return {**env, name: (ty, key)}, key

    def release(self, name, ty, key, node):
        if self.ext is Ext.LINEAR and isinstance(ty, Linear) and self.uses[key] != 1:
            raise LinearityViolation(name, self.uses[key], node)

    def elab(self, ty, node):
        return elaborate(ty, self.lang, self.ext, node)

    def synth(self, env, t):
        match t:
            case UnitVal():
                return UNIT, PURE
            case IntLit():
                return INT, PURE
            case Var(name):
                if name not in env:
                    raise UnboundVariable(name, t)
                ty, key = env[name]
                self.uses[key] = self.uses.get(key, 0) + 1
                return ty, PURE
            case App(Lam(x, None, body) as fn, bound):
                bty, beff = self.synth(env, bound)
                self.binder_types[id(fn)] = bty
                inner, key = self.bind(env, x, bty)
                ty, eff = self.synth(inner, body)
                self.release(x, bty, key, fn)
                return ty, join(beff, eff)
            case Lam(x, None, _):
                raise TypeCheckError(f"binder {x} has no type annotation", t)
            case Lam(x, ty, body):
                dom = self.elab(ty, t)
                self.binder_types[id(t)] = dom
                inner, key = self.bind(env, x, dom)
                cod, eff = self.synth(inner, body)
                self.release(x, dom, key, t)
                if self.ext is Ext.HEAP:
                    # an unannotated function means what its source type means under κ+
                    latent = join(eff, default_effect(self.lang))
                    if latent != eff:
                        self.coerce[id(t)] = ArrowR(dom, latent, cod)
                    return ArrowR(dom, latent, cod), PURE
                if self.ext is Ext.COST:
                    return ArrowCost(dom, None, cod), PURE
                return Arrow(dom, cod), PURE
            case App(f, a):
                fty, feff = self.synth(env, f)
                arrow = strip_linear(fty)
                if not _is_ext_arrow(arrow, self.ext):
                    raise TypeCheckError(
                        f"applying a non-function of type {print_type(fty)}", t, "arrow", fty
                    )
                aeff, _ = self.check(env, a, arrow.dom)
                return arrow.cod, join(feff, aeff, latent_effect(arrow))
            case BinOp(_, l, r):
                leff = self.eliminate(env, l, Int)
                reff = self.eliminate(env, r, Int)
                return INT, join(leff, reff)
            case RefNew(e):
                ty, _ = self.synth(env, e)
                if isinstance(ty, Linear):
                    raise TypeCheckError("a linear value cannot be stored in a reference", t)
                return Ref(ty), IMPURE
            case Deref(e):
                ty, _ = self.synth(env, e)
                ty = strip_linear(ty)
                if not isinstance(ty, Ref):
                    raise TypeCheckError(f"dereferencing a non-reference {print_type(ty)}", t, "ref", ty)
                return ty.inner, IMPURE
            case Assign(r, v):
                rty, _ = self.synth(env, r)
                rty = strip_linear(rty)
                if not isinstance(rty, Ref):
                    raise TypeCheckError(f"assigning to a non-reference {print_type(rty)}", t, "ref", rty)
                self.check(env, v, rty.inner)
                return UNIT, IMPURE
            case Ann(e, ty):
                want = self.elab(ty, t)
                eff, natural = self.check(env, e, want)
                if natural != want:
                    self.coerce[id(t)] = want
                return want, eff
        raise TypeCheckError(f"{type(t).__name__} is not a term of {self.lang.value}", t)

    def eliminate(self, env, t, kind) -> Effect:
        ty, eff = self.synth(env, t)
        if not isinstance(strip_linear(ty), kind):
            raise TypeCheckError(f"expected {kind.__name__.lower()}, found {print_type(ty)}", t, kind, ty)
        return eff

    def check(self, env, t, expected):
        """Check ``t`` against ``expected``; returns (effect, natural type)."""
        target = strip_linear(expected) if self.ext is Ext.LINEAR else expected
        if isinstance(t, Lam) and t.ty is not None and _is_ext_arrow(target, self.ext):
            return PURE, self.check_lam(env, t, target)
        ty, eff = self.synth(env, t)
        if not compatible(ty, expected, self.ext):
            raise TypeCheckError(
                f"expected {print_type(expected)}, found {print_type(ty)}", t, expected, ty
            )
        return eff, ty

    def check_lam(self, env, t: Lam, expected):
        declared = self.elab(t.ty, t)
        dom = expected.dom
        if declared != dom and not self._refines(declared, dom):
            raise TypeCheckError(
                f"parameter {t.param}: {print_type(t.ty)} does not match {print_type(dom)}",
                t,
                dom,
                declared,
            )
        self.binder_types[id(t)] = dom
        inner, key = self.bind(env, t.param, dom)
        body_eff, body_nat = self.check(inner, t.body, expected.cod)
        self.release(t.param, dom, key, t)
        match expected:
            case ArrowR(_, eff, cod):
                if not body_eff <= eff:
                    raise TypeCheckError(
                        f"body of {t.param} is impure but the annotation requires a pure arrow",
                        t,
                        eff,
                        body_eff,
                    )
                return ArrowR(dom, body_eff, body_nat)
            case ArrowTerm():
                if not check_termination(t.body, self._plain_env(inner), self.lang):
                    raise TerminationCheckFailed(
                        f"function of {t.param} is not in the terminating fragment", t
                    )
            case ArrowCost(_, int(n), _):
                inferred = infer_cost(t.body, self._plain_env(inner), self.lang)
                if inferred != n:
                    raise CostMismatch(n, "unknown" if inferred is None else inferred, t)
        return expected

    def _refines(self, declared, annotated) -> bool:
        # an annotation may refine a parameter whose written type has the same source shape
        try:
            return kappa_minus(declared, self.lang, self.ext) == kappa_minus(annotated, self.lang, self.ext)
        except IllegalType:
            return False

    @staticmethod
    def _plain_env(env):
        return {name: ty for name, (ty, _) in env.items()}


def _prepare_env(checker: _Checker, env):
    out = {}
    for name, ty in (env or {}).items():
        out, _ = checker.bind(out, name, checker.elab(ty, None))
    return out


def typecheck_linked(env, t, lang: Lang, ext: Ext = Ext.HEAP, annotation=None) -> LinkJudgment:
    """Type ``t`` in the linking-types extension ``ext`` of ``lang``.

    With ``annotation`` the term is checked against it (top-level linking
    type); otherwise its type is synthesized.
    """
    checker = _Checker(lang, ext)
    cenv = _prepare_env(checker, env)
    if annotation is not None:
        want = checker.elab(annotation, t)
        eff, natural = checker.check(cenv, t, want)
        ty = want
    else:
        ty, eff = checker.synth(cenv, t)
        natural = ty
    return LinkJudgment(t, ty, eff, lang, ext, natural, checker.binder_types, checker.coerce)


# ---------------------------------------------------------------------------
# Programmer-source discipline and side checks


def reasoning_only_constructors(lang: Lang) -> tuple[type, ...]:
    """Term constructors a linking-types extension adds only for reasoning."""
    return (RefNew, Assign, Deref) if _base(lang) is Lang.STLC else ()


def check_programmer_source(t, lang: Lang, ext: Ext = Ext.HEAP) -> list:
    """Nodes that may not appear in code a programmer writes (empty list means OK).

    Linking-type annotations are always allowed.
    """
    banned = reasoning_only_constructors(lang) + (Loc, Throw, Catch)
    return [node for node in walk(t) if isinstance(node, banned)]


def check_termination(t, env=None, lang: Lang = Lang.LAMREFK) -> bool:
    """Syntactic termination check for a function body of the terminating extension.

    Accepts bodies in the pure fragment: no store operations, and every
    applied function has a terminating arrow type.
    """
    checker = _Checker(lang, Ext.TERMINATING)
    try:
        cenv = _prepare_env(checker, env)
    except TypeCheckError:
        return False

    def ok(node, env) -> bool:
        match node:
            case UnitVal() | IntLit() | Var():
                return True
            case RefNew() | Assign() | Deref() | Loc() | Throw() | Catch():
                return False
            case App(Lam(x, None, body), bound):
                if not ok(bound, env):
                    return False
                bty, _ = checker.synth(env, bound)
                inner, _ = checker.bind(env, x, bty)
                return ok(body, inner)
            case Lam(x, ty, body):
                inner, _ = checker.bind(env, x, checker.elab(ty, node))
                return ok(body, inner)
            case App(f, a):
                fty, _ = checker.synth(env, f)
                return isinstance(strip_linear(fty), ArrowTerm) and ok(f, env) and ok(a, env)
            case _:
                return all(ok(c, env) for c in children(node))

    try:
        return ok(t, cenv)
    except TypeCheckError:
        return False


def infer_cost(t, env=None, lang: Lang = Lang.LAMREFK) -> int | None:
    """Known cost of a straight-line body, or ``None`` when the cost is unknown.

    One unit per arithmetic operation and per beta step; a call through
    ``τ → C^N τ`` costs ``N + 1``.
    """
    checker = _Checker(lang, Ext.COST)
    try:
        cenv = _prepare_env(checker, env)
    except TypeCheckError:
        return None

    def cost(node, env):
        match node:
            case UnitVal() | IntLit() | Var():
                return 0
            case Lam(_, ty, _) if ty is not None:
                return 0
            case App(Lam(x, None, body), bound):
                cb = cost(bound, env)
                if cb is None:
                    return None
                bty, _ = checker.synth(env, bound)
                inner, _ = checker.bind(env, x, bty)
                rest = cost(body, inner)
                return None if rest is None else 1 + cb + rest
            case App(f, a):
                fty, _ = checker.synth(env, f)
                if not (isinstance(fty, ArrowCost) and fty.cost is not None):
                    return None
                cf, ca = cost(f, env), cost(a, env)
                if cf is None or ca is None:
                    return None
                return cf + ca + 1 + fty.cost
            case BinOp(_, l, r):
                cl, cr = cost(l, env), cost(r, env)
                if cl is None or cr is None:
                    return None
                return 1 + cl + cr
            case Ann(e, _):
                return cost(e, env)
        return None

    try:
        return cost(t, cenv)
    except TypeCheckError:
        return None


def erase_annotations(t, lang: Lang, ext: Ext = Ext.HEAP):
    """Project a linking-types program to its base source language."""
    match t:
        case Ann(e, _):
            return erase_annotations(e, lang, ext)
        case Lam(x, ty, body):
            ty = None if ty is None else kappa_minus(elaborate(ty, lang, ext), lang, ext)
            return Lam(x, ty, erase_annotations(body, lang, ext), pos=t.pos)
        case App(f, a):
            return App(erase_annotations(f, lang, ext), erase_annotations(a, lang, ext), pos=t.pos)
        case BinOp(op, l, r):
            return BinOp(op, erase_annotations(l, lang, ext), erase_annotations(r, lang, ext), pos=t.pos)
        case RefNew(e):
            return RefNew(erase_annotations(e, lang, ext), pos=t.pos)
        case Deref(e):
            return Deref(erase_annotations(e, lang, ext), pos=t.pos)
        case Assign(r, v):
            return Assign(erase_annotations(r, lang, ext), erase_annotations(v, lang, ext), pos=t.pos)
    return t
