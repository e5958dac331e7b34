"""Seeded random generators for types and well-typed terms.

Every generator takes a :class:`random.Random`, so a corpus is reproducible
from its seed.  They back registration checks, property tests and the
acceptance suite.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .linking import default_effect, kappa_minus
from .syntax import (
    IMPURE,
    INT,
    PURE,
    UNIT,
    VOID,
    Ann,
    App,
    Arrow,
    ArrowCost,
    ArrowR,
    ArrowTerm,
    Assign,
    BinOp,
    Catch,
    Comp,
    Deref,
    Effect,
    Ext,
    Int,
    IntLit,
    Lam,
    Lang,
    Linear,
    Ref,
    RefNew,
    TArrow,
    Throw,
    Unit,
    UnitVal,
    Var,
    make_let,
    make_seq,
)

OPS = ("+", "-", "*")


# ---------------------------------------------------------------------------
# Types


def gen_source_type(rng: random.Random, lang: Lang, depth: int = 6):
    """A source type of ``lang`` (λ or λ^ref) with nesting depth at most ``depth``."""
    refs = lang.base is Lang.LAMREF
    if depth <= 0 or rng.random() < 0.3:
        return rng.choice((UNIT, INT))
    roll = rng.random()
    if refs and roll < 0.3:
        return Ref(gen_source_type(rng, lang, depth - 1))
    return Arrow(gen_source_type(rng, lang, depth - 1), gen_source_type(rng, lang, depth - 1))


def gen_heap_type(rng: random.Random, depth: int = 6, *, refs: bool = True):
    """A heap-effect linking type ``τ ::= unit | int | ref τ | τ → R^ε τ``."""
    if depth <= 0 or rng.random() < 0.3:
        return rng.choice((UNIT, INT))
    if refs and rng.random() < 0.3:
        return Ref(gen_heap_type(rng, depth - 1, refs=refs))
    eff = rng.choice((PURE, IMPURE))
    return ArrowR(gen_heap_type(rng, depth - 1, refs=refs), eff, gen_heap_type(rng, depth - 1, refs=refs))


def gen_link_type(rng: random.Random, lang: Lang, ext: Ext, depth: int = 6):
    """A linking type of ``ext`` over the base of ``lang``."""
    refs = lang.base is Lang.LAMREF
    if depth <= 0 or rng.random() < 0.3:
        return rng.choice((UNIT, INT))
    sub = lambda: gen_link_type(rng, lang, ext, depth - 1)  # noqa: E731
    if refs and rng.random() < 0.25:
        return Ref(sub())
    match ext:
        case Ext.HEAP:
            return ArrowR(sub(), rng.choice((PURE, IMPURE)), sub())
        case Ext.LINEAR:
            ty = Arrow(sub(), sub())
            return Linear(ty) if rng.random() < 0.3 else ty
        case Ext.TERMINATING:
            return rng.choice((Arrow, ArrowTerm))(sub(), sub())
        case Ext.COST:
            return ArrowCost(sub(), rng.choice((None, rng.randrange(0, 20))), sub())
    raise ValueError(ext)


def shrink_type(ty):
    """Candidate smaller types, simplest first (unit before int)."""
    yield UNIT
    yield INT
    match ty:
        case Ref(inner):
            yield inner
            for s in shrink_type(inner):
                yield Ref(s)
        case Arrow(d, c) | ArrowR(d, _, c) | ArrowTerm(d, c) | ArrowCost(d, _, c):
            yield d
            yield c
            for s in shrink_type(d):
                yield _rebuild(ty, s, c)
            for s in shrink_type(c):
                yield _rebuild(ty, d, s)
        case Linear(inner):
            yield inner


def _rebuild(ty, d, c):
    match ty:
        case Arrow():
            return Arrow(d, c)
        case ArrowR(_, eff, _):
            return ArrowR(d, eff, c)
        case ArrowTerm():
            return ArrowTerm(d, c)
        case ArrowCost(_, n, _):
            return ArrowCost(d, n, c)


def _shrink_key(ty):
    from .syntax import type_size

    ints = sum(1 for n in _leaves(ty) if isinstance(n, Int))
    return type_size(ty), ints


def _leaves(ty):
    match ty:
        case Ref(inner) | Linear(inner):
            yield from _leaves(inner)
        case Arrow(d, c) | ArrowR(d, _, c) | ArrowTerm(d, c) | ArrowCost(d, _, c):
            yield from _leaves(d)
            yield from _leaves(c)
        case _:
            yield ty


def shrink(ty, fails):
    """Greedily shrink ``ty`` to a minimal type on which ``fails`` still holds.

    Smaller means fewer constructors, then fewer ``int`` leaves.
    """
    while True:
        for cand in shrink_type(ty):
            if _shrink_key(cand) < _shrink_key(ty) and fails(cand):
                ty = cand
                break
        else:
            return ty


# ---------------------------------------------------------------------------
# Heap-effect terms


class _Dead(Exception):
    """The requested type has no inhabitant under the current budget."""


@dataclass
class TermGen:
    """Type-directed generator of well-typed heap-effect linking-types terms.

    ``term(ty, env, eff)`` produces a closed-over-``env`` term of type ``ty``
    whose computation effect is at most ``eff``.  In ``source`` mode every
    arrow carries the language's default effect and no annotation is
    emitted, so the result is also a term of the base source language.
    """

    rng: random.Random
    lang: Lang = Lang.LAMREFK
    source: bool = False
    max_depth: int = 4
    _names: itertools.count = field(default_factory=itertools.count, repr=False)

    @property
    def store(self) -> bool:
        return self.lang.base is Lang.LAMREF

    def fresh(self, stem: str = "x") -> str:
        return f"{stem}{next(self._names)}"

    def effect(self, cap: Effect) -> Effect:
        if self.source:
            return default_effect(self.lang)
        return PURE if cap is PURE else self.rng.choice((PURE, IMPURE))

    def small_type(self, eff: Effect, depth: int = 2):
        """A type to bind or pass; references only where they can be built."""
        roll = self.rng.random()
        if depth > 0 and roll < 0.2:
            return ArrowR(self.small_type(eff, depth - 1), self.effect(IMPURE), self.small_type(eff, depth - 1))
        if depth > 0 and roll < 0.3 and self.store and eff is IMPURE:
            return Ref(self.rng.choice((INT, UNIT)))
        return INT if roll < 0.8 else UNIT

    def written(self, ty):
        return kappa_minus(ty, self.lang, Ext.HEAP) if self.source else ty

    def term(self, ty, env: dict, eff: Effect, depth: int | None = None, checked: bool = False):
        """``checked`` says the checker will meet this term in checking mode."""
        depth = self.max_depth if depth is None else depth
        rng = self.rng
        options = []
        same = [n for n, t in env.items() if t == ty]
        if same:
            options.append(lambda: Var(rng.choice(same)))
        callers = [
            (n, t) for n, t in env.items() if isinstance(t, ArrowR) and t.cod == ty and t.effect <= eff
        ]
        if depth > 0:
            options.append(lambda: self._let(ty, env, eff, depth))
            options.append(lambda: self._app(ty, env, eff, depth))
            if callers:
                options.append(lambda: self._call(rng.choice(callers), env, eff, depth))
        options.extend(self._intro(ty, env, eff, depth, checked))
        if not options:
            raise _Dead(ty)
        rng.shuffle(options)
        for opt in options:
            try:
                return opt()
            except _Dead:
                continue
        raise _Dead(ty)

    def _intro(self, ty, env, eff, depth, checked):
        rng = self.rng
        impure = self.store and eff is IMPURE and depth > 0
        match ty:
            case Unit():
                out = [lambda: UnitVal()]
                refs = [n for n, t in env.items() if isinstance(t, Ref)]
                if impure and refs:
                    def assign():
                        r = rng.choice(refs)
                        return Assign(Var(r), self.term(env[r].inner, env, eff, depth - 1, True))
                    out.append(assign)
                return out
            case Int():
                out = [lambda: IntLit(rng.randrange(-5, 20))]
                if depth > 0:
                    out.append(
                        lambda: BinOp(
                            rng.choice(OPS),
                            self.term(INT, env, eff, depth - 1),
                            self.term(INT, env, eff, depth - 1),
                        )
                    )
                if impure:
                    out.append(lambda: Deref(self.term(Ref(INT), env, eff, depth - 1)))
                return out
            case Ref(inner):
                return [lambda: RefNew(self.term(inner, env, eff, depth - 1))] if impure else []
            case ArrowR(d, e, c):
                def lam():
                    x = self.fresh()
                    body = self.term(c, {**env, x: d}, e, max(depth - 1, 0), True)
                    out = Lam(x, self.written(d), body)
                    # a literal met in synthesis mode gets its intended type pinned
                    return out if checked or self.source else Ann(out, ty)
                return [lam]
        raise ValueError(ty)

    def _let(self, ty, env, eff, depth):
        bty = self.small_type(eff)
        bound = self.term(bty, env, eff, depth - 1)
        if isinstance(bty, Unit) and self.rng.random() < 0.5:
            return make_seq(bound, self.term(ty, env, eff, depth - 1))
        x = self.fresh()
        return make_let(x, bound, self.term(ty, {**env, x: bty}, eff, depth - 1))

    def _app(self, ty, env, eff, depth):
        dom = self.small_type(eff, 1)
        fty = ArrowR(dom, self.effect(eff), ty)
        fn = self.term(fty, env, eff, depth - 1)
        return App(fn, self.term(dom, env, eff, depth - 1, True))

    def _call(self, entry, env, eff, depth):
        name, fty = entry
        return App(Var(name), self.term(fty.dom, env, eff, depth - 1, True))

    def closed(self, ty, eff: Effect = IMPURE, tries: int = 50):
        for _ in range(tries):
            try:
                return self.term(ty, {}, eff, self.max_depth)
            except _Dead:
                continue
        raise RuntimeError(f"could not inhabit {ty}")


def source_term(rng: random.Random, lang: Lang, ty=None, max_depth: int = 4):
    """A closed term of ``lang``'s base language and its source type."""
    klang = lang.extended()
    gen = TermGen(rng, klang, source=True, max_depth=max_depth)
    if ty is None:
        ty = gen_source_type(rng, lang, 3)
        while lang.base is Lang.LAMREF and _has_ref(ty):
            ty = gen_source_type(rng, lang, 3)
    from .linking import kappa_plus

    lty = kappa_plus(ty, lang.base, Ext.HEAP)
    return gen.closed(lty, default_effect(klang)), ty


def _has_ref(ty) -> bool:
    match ty:
        case Ref():
            return True
        case Arrow(d, c):
            return _has_ref(d) or _has_ref(c)
    return False


def linked_term(rng: random.Random, lang: Lang = Lang.LAMREFK, ty=None, eff: Effect = IMPURE, max_depth: int = 4):
    """A closed linking-types term with heap-effect annotations, and its intended type."""
    gen = TermGen(rng, lang, max_depth=max_depth)
    if ty is None:
        ty = gen.small_type(IMPURE, 2)
        while isinstance(ty, Ref):
            ty = gen.small_type(IMPURE, 2)
    return gen.closed(ty, eff), ty


def perturb_type(rng: random.Random, ty):
    """Flip some arrow effects of a heap-effect type, keeping its κ− projection."""
    match ty:
        case ArrowR(d, eff, c):
            if rng.random() < 0.4:
                eff = PURE if eff is IMPURE else IMPURE
            return ArrowR(perturb_type(rng, d), eff, perturb_type(rng, c))
        case Ref(inner):
            return Ref(perturb_type(rng, inner))
    return ty


# ---------------------------------------------------------------------------
# Target terms with exceptions


def target_term(rng: random.Random, ty=INT, exn=VOID, env=None, depth: int = 4):
    """A target term of result ``ty`` that may only throw ``exn`` (``VOID`` means never)."""
    env = dict(env or {})
    ints = [n for n, t in env.items() if t == INT]
    options = []
    if isinstance(ty, Int):
        options.append(lambda: IntLit(rng.randrange(-5, 20)))
        if ints:
            options.append(lambda: Var(rng.choice(ints)))
    else:
        options.append(lambda: UnitVal())
    if depth > 0:
        sub = lambda t=ty, x=exn, e=env: target_term(rng, t, x, e, depth - 1)  # noqa: E731
        if isinstance(ty, Int):
            options.append(lambda: BinOp(rng.choice(OPS), sub(), sub()))
        if exn == INT:
            options.append(lambda: Throw(target_term(rng, INT, VOID, env, depth - 1)))

        def catch():
            x, y = f"v{depth}", f"e{depth}"
            body = target_term(rng, INT, INT, env, depth - 1)
            return Catch(
                body,
                x,
                target_term(rng, ty, exn, {**env, x: INT}, depth - 1),
                y,
                target_term(rng, ty, exn, {**env, y: INT}, depth - 1),
            )

        options.append(catch)

        def let():
            x = f"l{depth}{rng.randrange(100)}"
            return make_let(x, target_term(rng, INT, exn, env, depth - 1), target_term(rng, ty, exn, {**env, x: INT}, depth - 1))

        options.append(let)

        def app():
            x = f"p{depth}"
            fn = Lam(x, INT, target_term(rng, ty, exn, {**env, x: INT}, depth - 1))
            return App(fn, target_term(rng, INT, exn, env, depth - 1))

        options.append(app)
    return rng.choice(options)()


def target_fn_type(exn=VOID):
    return TArrow(INT, Comp(PURE, exn, INT))


# ---------------------------------------------------------------------------
# Terminating and cost-annotated functions


def terminating_function(rng: random.Random, depth: int = 4) -> Lam:
    """``λn:int. body`` built only from arithmetic and calls to terminating helpers."""
    helpers: dict[str, object] = {}

    def body(env, d):
        roll = rng.random()
        ints = [n for n, t in env.items() if t == INT]
        fns = [n for n, t in env.items() if isinstance(t, ArrowTerm)]
        if d <= 0 or roll < 0.2:
            return Var(rng.choice(ints)) if ints and rng.random() < 0.6 else IntLit(rng.randrange(-5, 20))
        if roll < 0.45:
            return BinOp(rng.choice(OPS), body(env, d - 1), body(env, d - 1))
        if roll < 0.7:
            f = f"g{len(helpers)}"
            y = f"y{len(helpers)}"
            helpers[f] = None
            lam = Lam(y, INT, body({**env, y: INT}, d - 1))
            return make_let(f, Ann(lam, ArrowTerm(INT, INT)), body({**env, f: ArrowTerm(INT, INT)}, d - 1))
        if fns:
            return App(Var(rng.choice(fns)), body(env, d - 1))
        x = f"z{len(helpers)}"
        helpers[x] = None
        return make_let(x, body(env, d - 1), body({**env, x: INT}, d - 1))

    return Lam("n", INT, body({"n": INT}, depth))


def landin_knot() -> Lam:
    """Recursion through the store: a reference holding a function that calls itself."""
    f = ArrowTerm(INT, INT)
    knot = make_let(
        "r",
        RefNew(Ann(Lam("x", INT, Var("x")), f)),
        make_seq(
            Assign(Var("r"), Ann(Lam("x", INT, App(Deref(Var("r")), Var("x"))), f)),
            App(Deref(Var("r")), Var("n")),
        ),
    )
    return Lam("n", INT, knot)


@dataclass(frozen=True)
class CostCase:
    params: tuple[str, ...]
    body: object


def cost_body(rng: random.Random, arity: int | None = None, depth: int = 4) -> CostCase:
    """A straight-line body over int parameters, with calls to known-cost helpers."""
    arity = rng.randrange(1, 4) if arity is None else arity
    params = tuple(f"a{i}" for i in range(arity))
    counter = itertools.count()

    def helper(d):
        y = f"y{next(counter)}"
        inner = body({y: INT}, d)
        from .linking import infer_cost

        n = infer_cost(inner, {y: INT}, Lang.LAMREFK)
        return Ann(Lam(y, INT, inner), ArrowCost(INT, n, INT)), n

    def body(env, d):
        ints = [n for n, t in env.items() if t == INT]
        fns = [n for n, t in env.items() if isinstance(t, ArrowCost)]
        roll = rng.random()
        if d <= 0 or roll < 0.2:
            return Var(rng.choice(ints)) if ints and rng.random() < 0.7 else IntLit(rng.randrange(-5, 20))
        if roll < 0.5:
            return BinOp(rng.choice(OPS), body(env, d - 1), body(env, d - 1))
        if roll < 0.65:
            x = f"t{next(counter)}"
            return make_let(x, body(env, d - 1), body({**env, x: INT}, d - 1))
        if roll < 0.8 or not fns:
            f = f"h{next(counter)}"
            lam, n = helper(d - 1)
            return make_let(f, lam, body({**env, f: ArrowCost(INT, n, INT)}, d - 1))
        return App(Var(rng.choice(fns)), body(env, d - 1))

    return CostCase(params, body({p: INT for p in params}, depth))


def argument_vectors(rng: random.Random, arity: int, count: int = 50) -> list[tuple[int, ...]]:
    return [tuple(rng.randrange(-1000, 1000) for _ in range(arity)) for _ in range(count)]


__all__ = [
    "CostCase",
    "TermGen",
    "argument_vectors",
    "cost_body",
    "gen_heap_type",
    "gen_link_type",
    "gen_source_type",
    "landin_knot",
    "linked_term",
    "perturb_type",
    "shrink",
    "shrink_type",
    "source_term",
    "target_fn_type",
    "target_term",
    "terminating_function",
]
