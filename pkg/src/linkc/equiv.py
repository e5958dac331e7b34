"""Probe contextual equivalence by running components inside suites of contexts.

A context is a λ^{ref,κ} function of the hole: ``(lam h HOLE body)``.  Both
components are compiled, each context is applied to each of them with its
own fresh store, and the first pair of differing values is a witness that
the components are *not* equivalent.  Failing to find one says nothing
beyond the suite that was tried.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from .compiler import compile
from .errors import LinkcError, TypeCheckError
from .linking import elaborate, typecheck_linked
from .machine import DEFAULT_FUEL, OutOfFuel, Store, Value
from .syntax import (
    FILE_LANGS,
    App,
    ArrowR,
    Ext,
    Int,
    Lam,
    Lang,
    Unit,
    parse,
    parse_type,
    print_type,
)
from .target import eval_target, typecheck_target_comp


@dataclass(frozen=True)
class ProbeContext:
    name: str
    term: Lam
    lang: Lang = Lang.LAMREFK

    @property
    def hole_type(self):
        return elaborate(self.term.ty, self.lang, Ext.HEAP, self.term)

    @classmethod
    def from_text(cls, name: str, text: str, lang: Lang = Lang.LAMREFK) -> "ProbeContext":
        term = parse(text, lang, Ext.HEAP)
        if not isinstance(term, Lam) or term.ty is None:
            raise TypeCheckError(f"context {name} must be a function of the hole", term)
        return cls(name, term, lang)


@dataclass(frozen=True)
class Distinguished:
    witness: ProbeContext
    outcome1: Value
    outcome2: Value
    exhausted: tuple[str, ...] = ()


@dataclass(frozen=True)
class NotDistinguished:
    """No context in ``tried`` told the components apart (relative to that suite only)."""

    tried: tuple[str, ...]
    exhausted: tuple[str, ...] = ()


@dataclass(frozen=True)
class IllTyped:
    which: int
    reason: str


EquivVerdict = Distinguished | NotDistinguished | IllTyped


@dataclass
class _Prepared:
    term: object
    judgment: object = field(repr=False)


def _prepare(term, lang: Lang, ty):
    if isinstance(term, str):
        term = parse(term, lang, Ext.HEAP)
    judgment = typecheck_linked({}, term, lang, Ext.HEAP, ty)
    return _Prepared(compile(term, lang, judgment), judgment)


def _compile_context(ctx: ProbeContext, hole):
    judgment = typecheck_linked({}, ctx.term, ctx.lang, Ext.HEAP)
    ty = judgment.type
    if not isinstance(ty, ArrowR) or ty.dom != hole:
        raise ValueError(f"context {ctx.name} does not have hole type {print_type(hole)}")
    if not isinstance(ty.cod, (Int, Unit)):
        raise ValueError(f"context {ctx.name} must produce int or unit, not {print_type(ty.cod)}")
    return compile(ctx.term, ctx.lang, judgment)


def run_context(ctx_term, component, fuel: int):
    program = App(ctx_term, component)
    typecheck_target_comp({}, program)
    return eval_target(program, Store(), fuel)


def probe(e1, e2, ty, suite, fuel: int = DEFAULT_FUEL, lang: Lang = Lang.STLCK) -> EquivVerdict:
    """Search ``suite`` for a context that separates ``e1`` from ``e2`` at linking type ``ty``.

    The components are terms or source text in ``lang``.
    """
    prepared = []
    for which, e in ((1, e1), (2, e2)):
        try:
            prepared.append(_prepare(e, lang, ty))
        except LinkcError as err:
            return IllTyped(which, err.message)
    tried: list[str] = []
    exhausted: list[str] = []
    for ctx in suite:
        cterm = _compile_context(ctx, ty)
        tried.append(ctx.name)
        o1 = run_context(cterm, prepared[0].term, fuel)
        o2 = run_context(cterm, prepared[1].term, fuel)
        if isinstance(o1, OutOfFuel) or isinstance(o2, OutOfFuel):
            exhausted.append(ctx.name)
            continue
        if not (isinstance(o1, Value) and isinstance(o2, Value)):
            raise RuntimeError(f"context {ctx.name} ended in {o1!r} / {o2!r}")
        if o1.term != o2.term:
            return Distinguished(ctx, o1, o2, tuple(exhausted))
    return NotDistinguished(tuple(tried), tuple(exhausted))


# ---------------------------------------------------------------------------
# Built-in suites

_COUNTER_BODY = "(seq (assign x (+ (deref x) 1)) (deref x))"

_UNIT_HOLE = {
    "C^ref": f"(lam h HOLE (let x (ref 0) (let c (lam u unit {_COUNTER_BODY}) (app h c))))",
    "count-calls": f"(lam h HOLE (let x (ref 0) (let c (lam u unit {_COUNTER_BODY}) (seq (app h c) (deref x)))))",
}
_UNIT_HOLE_PURE = {
    "const-7": "(lam h HOLE (app h (lam u unit 7)))",
    "const-0-plus": "(lam h HOLE (+ (app h (lam u unit 0)) 1))",
}

_INT_HOLE = {
    "count-calls": f"(lam h HOLE (let x (ref 0) (let f (lam n int {_COUNTER_BODY}) (seq (app h f) (deref x)))))",
    "counter-result": f"(lam h HOLE (let x (ref 0) (let f (lam n int {_COUNTER_BODY}) (app h f))))",
    "accumulate": (
        "(lam h HOLE (let x (ref 1) (let f (lam n int (seq (assign x (* (deref x) 2)) n))"
        " (+ (app h f) (deref x)))))"
    ),
}
_INT_HOLE_PURE = {
    "succ": "(lam h HOLE (app h (lam n int (+ n 1))))",
    "zero": "(lam h HOLE (app h (lam n int 0)))",
    "square-plus-10": "(lam h HOLE (+ (app h (lam n int (* n n))) 10))",
    "store-result": "(lam h HOLE (let x (ref 5) (seq (assign x (app h (lam n int n))) (deref x))))",
}


def _contexts(hole_text: str, table: dict) -> list[ProbeContext]:
    return [ProbeContext.from_text(name, text.replace("HOLE", hole_text)) for name, text in table.items()]


def _hole(arg_eff: str, body_eff: str, base: str) -> str:
    return f"(-> (-> {base} (R {arg_eff} int)) (R {body_eff} int))"


@lru_cache(maxsize=None)
def _builtin():
    suites = {}
    for base, impure_tbl, pure_tbl in (("unit", _UNIT_HOLE, _UNIT_HOLE_PURE), ("int", _INT_HOLE, _INT_HOLE_PURE)):
        for arg_eff in ("pure", "impure"):
            for body_eff in ("pure", "impure"):
                text = _hole(arg_eff, body_eff, base)
                ty = parse_type(text, Lang.LAMREFK, Ext.HEAP)
                ctxs = _contexts(text, pure_tbl)
                if arg_eff == "impure":
                    ctxs = _contexts(text, impure_tbl) + ctxs
                suites[ty] = tuple(ctxs)
    return suites


def builtin_suites() -> dict:
    """Context suites keyed by hole type.

    Covers ``(unit → R^a int) → R^b int`` and ``(int → R^a int) → R^b int``
    for all four effect pairs.  Impure-argument holes get the counting
    contexts (including C^ref); every hole gets contexts that pass pure
    functions.
    """
    return {ty: list(ctxs) for ty, ctxs in _builtin().items()}


def suite_for(ty) -> list[ProbeContext]:
    return builtin_suites().get(ty, [])


def load_suite(directory: str | Path) -> list[ProbeContext]:
    """Read every source file in ``directory`` as a context (file stem = name)."""
    out = []
    for path in sorted(Path(directory).iterdir()):
        lang = FILE_LANGS.get(path.suffix)
        if lang is None or lang is Lang.TARGET:
            continue
        out.append(ProbeContext.from_text(path.stem, path.read_text(), lang.extended()))
    return out
