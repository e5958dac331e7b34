"""ASTs, s-expression reader and printer for all five languages.

Every language shares one term AST and one type AST; a ``Lang`` (plus an
``Ext`` for the linking-types languages) decides which constructors are legal.

Concrete syntax::

    unit  42  x
    (lam x TYPE BODY)       (app F A ...)         (+ A B)  (* A B)  (- A B)
    (ref E)  (assign R E)  (deref R)
    (let x E BODY)          (seq E1 E2 ...)       (: E LINKTYPE)
    (throw E)               (catch E (val x E1) (exc y E2))

Types::

    unit  int  void  (ref T)  (-> A B)
    (-> A (R pure|impure B))    heap-effect linking arrows
    (lin T)                     linear
    (-> A (term B))             terminating
    (-> A (C ? B))  (-> A (C 3 B))   unknown / known cost
    (-> A (E pure|impure EXN B))     target computation arrows
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterator, Union

from .errors import ParseError


class Lang(enum.Enum):
    STLC = "stlc"
    LAMREF = "lamref"
    STLCK = "stlck"
    LAMREFK = "lamrefk"
    TARGET = "target"

    @property
    def base(self) -> "Lang":
        """The unextended source language underneath a linking-types language."""
        return {Lang.STLCK: Lang.STLC, Lang.LAMREFK: Lang.LAMREF}.get(self, self)

    @property
    def is_linking(self) -> bool:
        return self in (Lang.STLCK, Lang.LAMREFK)

    @property
    def is_source(self) -> bool:
        return self is not Lang.TARGET

    def extended(self) -> "Lang":
        return {Lang.STLC: Lang.STLCK, Lang.LAMREF: Lang.LAMREFK}.get(self, self)


class Ext(enum.Enum):
    HEAP = "heap"
    LINEAR = "linear"
    TERMINATING = "terminating"
    COST = "cost"


FILE_LANGS = {
    ".stlc": Lang.STLC,
    ".lref": Lang.LAMREF,
    ".stlck": Lang.STLCK,
    ".lrefk": Lang.LAMREFK,
    ".tgt": Lang.TARGET,
}


def parse_lang(name: str) -> Lang:
    key = name.lower().lstrip(".")
    aliases = {"lref": "lamref", "lrefk": "lamrefk", "tgt": "target"}
    return Lang(aliases.get(key, key))


class Effect(enum.Enum):
    PURE = "pure"
    IMPURE = "impure"

    def join(self, other: "Effect") -> "Effect":
        return Effect.PURE if self is Effect.PURE and other is Effect.PURE else Effect.IMPURE

    def __le__(self, other: "Effect") -> bool:
        return self is Effect.PURE or other is Effect.IMPURE

    def __lt__(self, other: "Effect") -> bool:
        return self is Effect.PURE and other is Effect.IMPURE

    @property
    def symbol(self) -> str:
        return "∘" if self is Effect.PURE else "•"


PURE = Effect.PURE
IMPURE = Effect.IMPURE


def join(*effects: Effect) -> Effect:
    out = PURE
    for e in effects:
        out = out.join(e)
    return out


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class Unit:
    pass


@dataclass(frozen=True)
class Int:
    pass


@dataclass(frozen=True)
class Void:
    """The empty target type 0."""


@dataclass(frozen=True)
class Bot:
    """Result type of ``throw``: a subtype of every target type. Never written by users."""


@dataclass(frozen=True)
class Ref:
    inner: "Type"


@dataclass(frozen=True)
class Arrow:
    """Source arrow; also the plain arrow of the linear and terminating extensions."""

    dom: "Type"
    cod: "Type"


@dataclass(frozen=True)
class ArrowR:
    dom: "Type"
    effect: Effect
    cod: "Type"


@dataclass(frozen=True)
class Linear:
    inner: "Type"


@dataclass(frozen=True)
class ArrowTerm:
    dom: "Type"
    cod: "Type"


@dataclass(frozen=True)
class ArrowCost:
    """Cost arrow; ``cost`` is ``None`` for the unknown-cost modality."""

    dom: "Type"
    cost: int | None
    cod: "Type"


@dataclass(frozen=True)
class Comp:
    effect: Effect
    exn: "Type"
    result: "Type"


@dataclass(frozen=True)
class TArrow:
    dom: "Type"
    comp: Comp


Type = Union[Unit, Int, Void, Bot, Ref, Arrow, ArrowR, Linear, ArrowTerm, ArrowCost, TArrow]

UNIT = Unit()
INT = Int()
VOID = Void()
BOT = Bot()

ARROW_TYPES = (Arrow, ArrowR, ArrowTerm, ArrowCost, TArrow)


def type_size(ty) -> int:
    match ty:
        case Ref(inner) | Linear(inner):
            return 1 + type_size(inner)
        case Arrow(d, c) | ArrowR(d, _, c) | ArrowTerm(d, c) | ArrowCost(d, _, c):
            return 1 + type_size(d) + type_size(c)
        case TArrow(d, comp):
            return 1 + type_size(d) + type_size(comp.exn) + type_size(comp.result)
        case _:
            return 1


def type_depth(ty) -> int:
    match ty:
        case Ref(inner) | Linear(inner):
            return 1 + type_depth(inner)
        case Arrow(d, c) | ArrowR(d, _, c) | ArrowTerm(d, c) | ArrowCost(d, _, c):
            return 1 + max(type_depth(d), type_depth(c))
        case TArrow(d, comp):
            return 1 + max(type_depth(d), type_depth(comp.exn), type_depth(comp.result))
        case _:
            return 0


# ---------------------------------------------------------------------------
# Terms

Pos = tuple[int, int]


def _pos():
    return field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class UnitVal:
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class IntLit:
    n: int
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Lam:
    """``ty`` is ``None`` only for binders introduced by ``let``/``seq``."""

    param: str
    ty: Type | None
    body: "Term"
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + * -
    left: "Term"
    right: "Term"
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class RefNew:
    init: "Term"
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Assign:
    ref: "Term"
    value: "Term"
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Deref:
    ref: "Term"
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Loc:
    addr: int
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Throw:
    value: "Term"
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Catch:
    body: "Term"
    val_name: str
    val_body: "Term"
    exc_name: str
    exc_body: "Term"
    pos: Pos | None = _pos()


@dataclass(frozen=True)
class Ann:
    term: "Term"
    ty: Type
    pos: Pos | None = _pos()


Term = Union[UnitVal, IntLit, Var, Lam, App, BinOp, RefNew, Assign, Deref, Loc, Throw, Catch, Ann]

STORE_OPS = (RefNew, Assign, Deref)
SEQ_BINDER = "_"

# Def: let x = e1 in e2  ==  (λx. e2) e1, binder type filled in by the checker.


def make_let(name: str, bound: Term, body: Term, pos: Pos | None = None) -> App:
    return App(Lam(name, None, body, pos=pos), bound, pos=pos)


def make_seq(first: Term, second: Term, pos: Pos | None = None) -> App:
    return make_let(SEQ_BINDER, first, second, pos)


def is_let(t) -> bool:
    return isinstance(t, App) and isinstance(t.fn, Lam) and t.fn.ty is None


def is_value(t) -> bool:
    return isinstance(t, (UnitVal, IntLit, Lam, Loc))


def children(t) -> Iterator[Term]:
    match t:
        case Lam(_, _, body):
            yield body
        case App(f, a):
            yield f
            yield a
        case BinOp(_, l, r):
            yield l
            yield r
        case RefNew(e) | Deref(e) | Throw(e):
            yield e
        case Assign(r, v):
            yield r
            yield v
        case Catch(b, _, vb, _, eb):
            yield b
            yield vb
            yield eb
        case Ann(e, _):
            yield e


def walk(t) -> Iterator[Term]:
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(list(children(node))))


def term_size(t) -> int:
    return sum(1 for _ in walk(t))


def term_depth(t) -> int:
    kids = list(children(t))
    return 1 + (max(map(term_depth, kids)) if kids else 0)


def free_vars(t) -> set[str]:
    match t:
        case Var(name):
            return {name}
        case Lam(x, _, body):
            return free_vars(body) - {x}
        case Catch(b, x, vb, y, eb):
            return free_vars(b) | (free_vars(vb) - {x}) | (free_vars(eb) - {y})
        case _:
            out: set[str] = set()
            for c in children(t):
                out |= free_vars(c)
            return out


def subst(t, name: str, value):
    """Replace free occurrences of ``name``; ``value`` must be closed."""
    match t:
        case Var(x):
            return value if x == name else t
        case Lam(x, ty, body):
            if x == name:
                return t
            return Lam(x, ty, subst(body, name, value), pos=t.pos)
        case App(f, a):
            return App(subst(f, name, value), subst(a, name, value), pos=t.pos)
        case BinOp(op, l, r):
            return BinOp(op, subst(l, name, value), subst(r, name, value), pos=t.pos)
        case RefNew(e):
            return RefNew(subst(e, name, value), pos=t.pos)
        case Deref(e):
            return Deref(subst(e, name, value), pos=t.pos)
        case Throw(e):
            return Throw(subst(e, name, value), pos=t.pos)
        case Assign(r, v):
            return Assign(subst(r, name, value), subst(v, name, value), pos=t.pos)
        case Catch(b, x, vb, y, eb):
            return Catch(
                subst(b, name, value),
                x,
                vb if x == name else subst(vb, name, value),
                y,
                eb if y == name else subst(eb, name, value),
                pos=t.pos,
            )
        case Ann(e, ty):
            return Ann(subst(e, name, value), ty, pos=t.pos)
        case _:
            return t


# ---------------------------------------------------------------------------
# Reader

_TOKEN = re.compile(r"(?P<ws>\s+)|(?P<comment>;[^\n]*)|(?P<open>\()|(?P<close>\))|(?P<atom>[^\s();]+)")
_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_']*\Z")
_INT = re.compile(r"-?[0-9]+\Z")

KEYWORDS = frozenset(
    "unit int void ref lam app let seq assign deref throw catch val exc lin term "
    "pure impure R C E".split()
)


@dataclass
class Atom:
    text: str
    pos: Pos


@dataclass
class SList:
    items: list
    pos: Pos


def read_sexprs(text: str) -> list:
    stack: list[SList] = [SList([], (1, 1))]
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        col = m.start() - line_start + 1
        kind = m.lastgroup
        if kind == "open":
            stack.append(SList([], (line, col)))
        elif kind == "close":
            if len(stack) == 1:
                raise ParseError(line, col, "no unmatched ')'")
            done = stack.pop()
            stack[-1].items.append(done)
        elif kind == "atom":
            stack[-1].items.append(Atom(m.group(), (line, col)))
        chunk = m.group()
        if "\n" in chunk:
            line += chunk.count("\n")
            line_start = m.start() + chunk.rindex("\n") + 1
    if len(stack) > 1:
        open_pos = stack[-1].pos
        raise ParseError(open_pos[0], open_pos[1], "')' to close this list")
    return stack[0].items


def _err(node, expected: str) -> ParseError:
    return ParseError(node.pos[0], node.pos[1], expected)


class _Reader:
    def __init__(self, lang: Lang, ext: Ext | None):
        self.lang = lang
        self.ext = ext

    # types ------------------------------------------------------------
    def type(self, s):
        lang = self.lang
        if isinstance(s, Atom):
            if s.text == "unit":
                return UNIT
            if s.text == "int":
                return INT
            if s.text == "void":
                if lang is Lang.TARGET:
                    return VOID
                raise _err(s, "a type of this language (void exists only in the target)")
            raise _err(s, "a type")
        if not s.items or not isinstance(s.items[0], Atom):
            raise _err(s, "a type constructor")
        head = s.items[0].text
        args = s.items[1:]
        if head == "ref":
            self._arity(s, args, 1)
            if lang is Lang.STLC:
                raise _err(s, "a type of the simply typed language (no ref)")
            return Ref(self.type(args[0]))
        if head == "lin":
            self._arity(s, args, 1)
            if not (lang.is_linking and self.ext is Ext.LINEAR):
                raise _err(s, "a type of this language (lin needs the linear extension)")
            inner = self.type(args[0])
            if isinstance(inner, Linear):
                raise _err(args[0], "an unrestricted type under lin")
            return Linear(inner)
        if head == "->":
            self._arity(s, args, 2)
            dom = self.type(args[0])
            return self._arrow(s, dom, args[1])
        raise _err(s.items[0], "a type constructor (ref, ->, lin)")

    def _arrow(self, s, dom, cod_s):
        lang, ext = self.lang, self.ext
        if isinstance(cod_s, SList) and cod_s.items and isinstance(cod_s.items[0], Atom):
            head = cod_s.items[0].text
            args = cod_s.items[1:]
            if head == "R":
                self._need(cod_s, lang.is_linking and ext is Ext.HEAP, "R needs the heap-effect extension")
                self._arity(cod_s, args, 2)
                return ArrowR(dom, self.effect(args[0]), self.type(args[1]))
            if head == "term":
                self._need(cod_s, lang.is_linking and ext is Ext.TERMINATING, "term needs the terminating extension")
                self._arity(cod_s, args, 1)
                return ArrowTerm(dom, self.type(args[0]))
            if head == "C":
                self._need(cod_s, lang.is_linking and ext is Ext.COST, "C needs the cost extension")
                self._arity(cod_s, args, 2)
                cost_s = args[0]
                if isinstance(cost_s, Atom) and cost_s.text == "?":
                    cost = None
                elif isinstance(cost_s, Atom) and cost_s.text.isdigit():
                    cost = int(cost_s.text)
                else:
                    raise _err(cost_s, "'?' or a non-negative cost")
                return ArrowCost(dom, cost, self.type(args[1]))
            if head == "E":
                self._need(cod_s, lang is Lang.TARGET, "E arrows exist only in the target")
                self._arity(cod_s, args, 3)
                return TArrow(dom, Comp(self.effect(args[0]), self.type(args[1]), self.type(args[2])))
        if lang is Lang.TARGET:
            raise _err(cod_s, "a computation type (E eff exn T)")
        return Arrow(dom, self.type(cod_s))

    def effect(self, s) -> Effect:
        if isinstance(s, Atom) and s.text in ("pure", "impure"):
            return Effect(s.text)
        raise _err(s, "pure or impure")

    def _need(self, s, ok: bool, expected: str):
        if not ok:
            raise _err(s, f"a type of {self.lang.value} ({expected})")

    def _arity(self, s, args, n: int):
        if len(args) != n:
            raise _err(s, f"{n} argument(s) to {s.items[0].text}")

    # terms ------------------------------------------------------------
    def ident(self, s) -> str:
        if isinstance(s, Atom) and _IDENT.match(s.text) and s.text not in KEYWORDS:
            return s.text
        raise _err(s, "an identifier")

    def term(self, s):
        lang = self.lang
        if isinstance(s, Atom):
            if s.text == "unit":
                return UnitVal(pos=s.pos)
            if _INT.match(s.text):
                return IntLit(int(s.text), pos=s.pos)
            return Var(self.ident(s), pos=s.pos)
        if not s.items or not isinstance(s.items[0], Atom):
            raise _err(s, "a term form")
        head = s.items[0].text
        args = s.items[1:]
        pos = s.pos
        match head:
            case "lam":
                self._arity(s, args, 3)
                return Lam(self.ident(args[0]), self.type(args[1]), self.term(args[2]), pos=pos)
            case "app":
                if len(args) < 2:
                    raise _err(s, "a function and at least one argument")
                out = self.term(args[0])
                for a in args[1:]:
                    out = App(out, self.term(a), pos=pos)
                return out
            case "+" | "*" | "-":
                self._arity(s, args, 2)
                return BinOp(head, self.term(args[0]), self.term(args[1]), pos=pos)
            case "let":
                self._arity(s, args, 3)
                return make_let(self.ident(args[0]), self.term(args[1]), self.term(args[2]), pos)
            case "seq":
                if len(args) < 2:
                    raise _err(s, "at least two terms to seq")
                terms = [self.term(a) for a in args]
                out = terms[-1]
                for t in reversed(terms[:-1]):
                    out = make_seq(t, out, pos)
                return out
            case "ref" | "assign" | "deref":
                if lang is Lang.STLC:
                    raise _err(s, "a term of the simply typed language (no references)")
                if head == "assign":
                    self._arity(s, args, 2)
                    return Assign(self.term(args[0]), self.term(args[1]), pos=pos)
                self._arity(s, args, 1)
                ctor = RefNew if head == "ref" else Deref
                return ctor(self.term(args[0]), pos=pos)
            case ":":
                if not lang.is_linking:
                    raise _err(s, "a term of this language (annotations need a linking-types language)")
                self._arity(s, args, 2)
                return Ann(self.term(args[0]), self.type(args[1]), pos=pos)
            case "throw":
                if lang is not Lang.TARGET:
                    raise _err(s, "a source term (throw exists only in the target)")
                self._arity(s, args, 1)
                return Throw(self.term(args[0]), pos=pos)
            case "catch":
                if lang is not Lang.TARGET:
                    raise _err(s, "a source term (catch exists only in the target)")
                self._arity(s, args, 3)
                vx, vb = self._handler(args[1], "val")
                ey, eb = self._handler(args[2], "exc")
                return Catch(self.term(args[0]), vx, vb, ey, eb, pos=pos)
        raise _err(s.items[0], "a term form")

    def _handler(self, s, kw: str):
        if (
            isinstance(s, SList)
            and len(s.items) == 3
            and isinstance(s.items[0], Atom)
            and s.items[0].text == kw
        ):
            return self.ident(s.items[1]), self.term(s.items[2])
        raise _err(s, f"({kw} NAME TERM)")


def _default_ext(lang: Lang, ext: Ext | None) -> Ext | None:
    if lang.is_linking:
        return ext or Ext.HEAP
    return None


def _one(text: str):
    forms = read_sexprs(text)
    if len(forms) != 1:
        if not forms:
            raise ParseError(1, 1, "one form, found empty input")
        raise _err(forms[1], "end of input after one form")
    return forms[0]


def parse(text: str, lang: Lang, ext: Ext | None = None):
    """Parse one term of ``lang``; constructs outside its grammar raise ``ParseError``."""
    return _Reader(lang, _default_ext(lang, ext)).term(_one(text))


def parse_type(text: str, lang: Lang, ext: Ext | None = None):
    return _Reader(lang, _default_ext(lang, ext)).type(_one(text))


# ---------------------------------------------------------------------------
# Printer


def print_type(ty) -> str:
    match ty:
        case Unit():
            return "unit"
        case Int():
            return "int"
        case Void():
            return "void"
        case Bot():
            return "!bot"
        case Ref(inner):
            return f"(ref {print_type(inner)})"
        case Linear(inner):
            return f"(lin {print_type(inner)})"
        case Arrow(d, c):
            return f"(-> {print_type(d)} {print_type(c)})"
        case ArrowR(d, eff, c):
            return f"(-> {print_type(d)} (R {eff.value} {print_type(c)}))"
        case ArrowTerm(d, c):
            return f"(-> {print_type(d)} (term {print_type(c)}))"
        case ArrowCost(d, cost, c):
            n = "?" if cost is None else str(cost)
            return f"(-> {print_type(d)} (C {n} {print_type(c)}))"
        case TArrow(d, comp):
            return f"(-> {print_type(d)} {print_comp(comp)})"
    raise TypeError(f"not a type: {ty!r}")


def print_comp(comp: Comp) -> str:
    return f"(E {comp.effect.value} {print_type(comp.exn)} {print_type(comp.result)})"


def print_term(t) -> str:
    match t:
        case UnitVal():
            return "unit"
        case IntLit(n):
            return str(n)
        case Var(name):
            return name
        case Loc(addr):
            return f"#loc{addr}"
        case App(Lam(x, None, body), arg):
            if x == SEQ_BINDER:
                return f"(seq {print_term(arg)} {print_term(body)})"
            return f"(let {x} {print_term(arg)} {print_term(body)})"
        case Lam(x, None, _):
            raise ValueError(f"binder {x} without a type outside let")
        case Lam(x, ty, body):
            return f"(lam {x} {print_type(ty)} {print_term(body)})"
        case App(f, a):
            return f"(app {print_term(f)} {print_term(a)})"
        case BinOp(op, l, r):
            return f"({op} {print_term(l)} {print_term(r)})"
        case RefNew(e):
            return f"(ref {print_term(e)})"
        case Deref(e):
            return f"(deref {print_term(e)})"
        case Assign(r, v):
            return f"(assign {print_term(r)} {print_term(v)})"
        case Throw(e):
            return f"(throw {print_term(e)})"
        case Catch(b, x, vb, y, eb):
            return f"(catch {print_term(b)} (val {x} {print_term(vb)}) (exc {y} {print_term(eb)}))"
        case Ann(e, ty):
            return f"(: {print_term(e)} {print_type(ty)})"
    raise TypeError(f"not a term: {t!r}")


def show_type(ty) -> str:
    """Mathematical rendering used in diagnostics, e.g. ``unit → E•_0 int``."""
    match ty:
        case Unit():
            return "unit"
        case Int():
            return "int"
        case Void():
            return "0"
        case Bot():
            return "⊥"
        case Ref(inner):
            return f"ref {_show_atom(inner)}"
        case Linear(inner):
            return f"{_show_atom(inner)}^L"
        case Arrow(d, c):
            return f"{_show_atom(d)} → {show_type(c)}"
        case ArrowR(d, eff, c):
            return f"{_show_atom(d)} → R{eff.symbol} {_show_atom(c)}"
        case ArrowTerm(d, c):
            return f"{_show_atom(d)} → {_show_atom(c)}↾"
        case ArrowCost(d, cost, c):
            n = "•" if cost is None else str(cost)
            return f"{_show_atom(d)} → C^{n} {_show_atom(c)}"
        case TArrow(d, comp):
            return f"{_show_atom(d)} → {show_comp(comp)}"
    raise TypeError(f"not a type: {ty!r}")


def show_comp(comp: Comp) -> str:
    return f"E{comp.effect.symbol}_{show_type(comp.exn)} {_show_atom(comp.result)}"


def _show_atom(ty) -> str:
    s = show_type(ty)
    return f"({s})" if isinstance(ty, ARROW_TYPES + (Ref, Linear)) and " " in s else s
