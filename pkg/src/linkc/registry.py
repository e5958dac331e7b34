"""Registration of linking-types extensions.

An extension is accepted only if its checkable properties hold on a seeded
corpus of generated source types:

* ``kappa-total``   κ+ is defined on every source type
* ``round-trip``    κ−(κ+(τ)) = τ
* ``embedding``     κ+ lands in the base grammar plus the extension's constructors
* ``projection``    κ− maps every generated linking type to a source type
* ``disjoint``      reasoning-only term constructors are not part of the programmer grammar

A failure is shrunk to a smallest counterexample before it is reported.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

from .errors import LinkcError, RegistrationError
from .gen import gen_link_type, gen_source_type, shrink
from .linking import kappa_minus, kappa_plus, reasoning_only_constructors
from .source import check_source_type
from .syntax import (
    INT,
    Ann,
    App,
    Arrow,
    ArrowCost,
    ArrowR,
    ArrowTerm,
    Assign,
    BinOp,
    Deref,
    Ext,
    Int,
    IntLit,
    Lam,
    Lang,
    Linear,
    Ref,
    RefNew,
    Unit,
    UnitVal,
    Var,
    print_type,
)

DEFAULT_SEED = 20170
CORPUS_SIZE = 1000
BASE_LANGS = (Lang.STLC, Lang.LAMREF)

PROGRAMMER_GRAMMAR = {
    Lang.STLC: (UnitVal, IntLit, Var, Lam, App, BinOp, Ann),
    Lang.LAMREF: (UnitVal, IntLit, Var, Lam, App, BinOp, Ann, RefNew, Assign, Deref),
}
_BASE_TYPES = {Lang.STLC: (Unit, Int, Arrow), Lang.LAMREF: (Unit, Int, Ref, Arrow)}


@dataclass(frozen=True)
class ExtensionSpec:
    """Everything the toolchain needs to know about one extension."""

    id: str
    constructors: tuple[type, ...]
    kappa_plus: Callable
    kappa_minus: Callable
    reasoning_only: Callable[[Lang], tuple[type, ...]] = lambda lang: ()
    obligations: tuple[str, ...] = ()
    translatable: bool = False
    link_types: Callable | None = field(default=None, repr=False)
    table: tuple[tuple[str, str], ...] = ()
    description: str = ""


@dataclass(frozen=True)
class Registration:
    spec: ExtensionSpec
    seed: int
    corpus_size: int
    properties: tuple[str, ...]


def _nodes(ty):
    yield ty
    match ty:
        case Ref(inner) | Linear(inner):
            yield from _nodes(inner)
        case Arrow(d, c) | ArrowR(d, _, c) | ArrowTerm(d, c) | ArrowCost(d, _, c):
            yield from _nodes(d)
            yield from _nodes(c)


def _type_properties(spec: ExtensionSpec, lang: Lang):
    allowed = _BASE_TYPES[lang] + tuple(spec.constructors)

    def kappa_total(ty):
        try:
            spec.kappa_plus(ty, lang)
            return None
        except LinkcError as err:
            return err.message

    def round_trip(ty):
        try:
            back = spec.kappa_minus(spec.kappa_plus(ty, lang), lang)
        except LinkcError as err:
            return err.message
        if back != ty:
            return f"κ−(κ+(τ)) = {print_type(back)}"
        return None

    def embedding(ty):
        try:
            image = spec.kappa_plus(ty, lang)
        except LinkcError as err:
            return err.message
        for node in _nodes(image):
            if not isinstance(node, allowed):
                return f"κ+(τ) = {print_type(image)} uses {type(node).__name__}"
        return None

    return (("kappa-total", kappa_total), ("round-trip", round_trip), ("embedding", embedding))


def _projection(spec: ExtensionSpec, lang: Lang):
    def projection(ty):
        try:
            check_source_type(spec.kappa_minus(ty, lang), lang)
            return None
        except LinkcError as err:
            return err.message

    return projection


def register(spec: ExtensionSpec, seed: int = DEFAULT_SEED, corpus_size: int = CORPUS_SIZE) -> Registration:
    """Check ``spec`` on a generated corpus; raises :class:`RegistrationError` on a counterexample."""
    checked: list[str] = []
    for lang in BASE_LANGS:
        overlap = set(spec.reasoning_only(lang)) & set(PROGRAMMER_GRAMMAR[lang])
        if overlap:
            names = ", ".join(sorted(c.__name__ for c in overlap))
            raise RegistrationError("disjoint", INT, f"{names} is both reasoning-only and programmer syntax in {lang.value}")
    checked.append("disjoint")

    for lang in BASE_LANGS:
        rng = random.Random(f"{seed}:{spec.id}:{lang.value}")
        corpus = [gen_source_type(rng, lang, 6) for _ in range(corpus_size)]
        for name, prop in _type_properties(spec, lang):
            for ty in corpus:
                if prop(ty) is not None:
                    small = shrink(ty, lambda t: prop(t) is not None)
                    raise RegistrationError(name, small, f"{prop(small)} (in {lang.value}, seed {seed})")
            if name not in checked:
                checked.append(name)
        if spec.link_types is not None:
            prop = _projection(spec, lang)
            for _ in range(corpus_size):
                ty = spec.link_types(rng, lang)
                if prop(ty) is not None:
                    small = shrink(ty, lambda t: prop(t) is not None)
                    raise RegistrationError("projection", small, f"{prop(small)} (in {lang.value}, seed {seed})")
            if "projection" not in checked:
                checked.append("projection")
    return Registration(spec, seed, corpus_size, tuple(checked))


# ---------------------------------------------------------------------------
# Shipped extensions


def _builtin(ext: Ext, constructors, obligations, translatable, table, description) -> ExtensionSpec:
    return ExtensionSpec(
        id=ext.value,
        constructors=constructors,
        kappa_plus=lambda ty, lang: kappa_plus(ty, lang, ext),
        kappa_minus=lambda ty, lang: kappa_minus(ty, lang, ext),
        reasoning_only=reasoning_only_constructors if ext is Ext.HEAP else (lambda lang: ()),
        obligations=obligations,
        translatable=translatable,
        link_types=lambda rng, lang: gen_link_type(rng, lang, ext, 6),
        table=table,
        description=description,
    )


HEAP = _builtin(
    Ext.HEAP,
    (ArrowR,),
    ("effect",),
    True,
    (
        ("κ+ λ", "τ1 → τ2 ↦ κ+(τ1) → R∘ κ+(τ2)"),
        ("κ+ λref", "ref τ ↦ ref κ+(τ);  τ1 → τ2 ↦ κ+(τ1) → R• κ+(τ2)"),
        ("κ− λ", "ref τ ↦ κ−(τ);  τ1 → R^ε τ2 ↦ κ−(τ1) → κ−(τ2)"),
        ("κ− λref", "ref τ ↦ ref κ−(τ);  τ1 → R^ε τ2 ↦ κ−(τ1) → κ−(τ2)"),
    ),
    "heap effects: arrows τ → R^ε τ with ε ∈ {∘, •}",
)

LINEAR = _builtin(
    Ext.LINEAR,
    (Linear,),
    ("linear-usage",),
    False,
    (("κ+", "τ ↦ τ (unrestricted)"), ("κ−", "φ^L ↦ κ−(φ);  ref τ ↦ κ−(τ) in λ")),
    "linearity: φ | φ^L, linear variables used exactly once",
)

TERMINATING = _builtin(
    Ext.TERMINATING,
    (ArrowTerm,),
    ("termination",),
    False,
    (("κ+", "τ1 → τ2 ↦ κ+(τ1) → κ+(τ2)"), ("κ−", "τ1 → τ2↾ ↦ κ−(τ1) → κ−(τ2)")),
    "termination: τ → τ↾ for functions in the terminating fragment",
)

COST = _builtin(
    Ext.COST,
    (ArrowCost,),
    ("cost",),
    False,
    (("κ+", "τ1 → τ2 ↦ κ+(τ1) → C^• κ+(τ2)"), ("κ−", "τ1 → C^N τ2, τ1 → C^• τ2 ↦ κ−(τ1) → κ−(τ2)")),
    "cost: τ → C^N τ (known cost N) and τ → C^• τ (unknown)",
)


def _identity(ty, lang):
    return ty


IDENTITY = ExtensionSpec(
    id="identity",
    constructors=(),
    kappa_plus=_identity,
    kappa_minus=_identity,
    table=(("κ+", "τ ↦ τ"), ("κ−", "τ ↦ τ")),
    description="no new types",
)

SHIPPED = (HEAP, LINEAR, TERMINATING, COST)


def broken_heap_spec() -> ExtensionSpec:
    """The heap-effect extension with a κ− that forgets references (for testing the gate)."""
    def bad_minus(ty, lang):
        match ty:
            case Ref():
                return INT
            case ArrowR(d, _, c):
                return Arrow(bad_minus(d, lang), bad_minus(c, lang))
        return ty

    return replace(HEAP, id="heap-broken", kappa_minus=bad_minus, link_types=None)


@lru_cache(maxsize=None)
def registry(seed: int = DEFAULT_SEED) -> dict[str, Registration]:
    """All shipped extensions, registered once; read-only afterwards."""
    return {spec.id: register(spec, seed) for spec in SHIPPED}


def describe(reg: Registration) -> str:
    spec = reg.spec
    lines = [
        f"{spec.id}: {spec.description}",
        f"  constructors: {', '.join(c.__name__ for c in spec.constructors) or '-'}",
        f"  obligations: {', '.join(spec.obligations) or '-'}",
        f"  compiles to target: {'yes' if spec.translatable else 'no'}",
        f"  checked: {', '.join(reg.properties)} (seed {reg.seed}, {reg.corpus_size} types per language)",
    ]
    lines += [f"  {k}: {v}" for k, v in spec.table]
    return "\n".join(lines)
