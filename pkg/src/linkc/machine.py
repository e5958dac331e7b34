"""Fuel-bounded CEK machine shared by the source and target evaluators.

The machine keeps an explicit continuation stack, so divergent programs
(e.g. Landin's knot) exhaust fuel instead of the Python stack.  Each beta
step, arithmetic operation, store operation and ``throw`` costs one unit of
fuel and is tallied in :class:`Stats`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .syntax import (
    Ann,
    App,
    Assign,
    BinOp,
    Catch,
    Deref,
    IntLit,
    Lam,
    Loc,
    RefNew,
    Throw,
    UnitVal,
    Var,
    free_vars,
    subst,
)

DEFAULT_FUEL = 100_000

_MASK = (1 << 64) - 1
_SIGN = 1 << 63


def wrap64(n: int) -> int:
    n &= _MASK
    return n - (1 << 64) if n & _SIGN else n


@dataclass
class Stats:
    steps: int = 0
    beta: int = 0
    arith: int = 0
    store_ops: int = 0
    throws: int = 0

    @property
    def cost(self) -> int:
        """Cost model of the cost extension: beta steps plus arithmetic."""
        return self.beta + self.arith


@dataclass
class Store:
    cells: dict[int, object] = field(default_factory=dict)
    next_loc: int = 0

    def alloc(self, value) -> int:
        addr = self.next_loc
        self.cells[addr] = value
        self.next_loc += 1
        return addr


@dataclass(frozen=True)
class Value:
    term: object
    store: Store = field(compare=False)
    stats: Stats = field(default_factory=Stats, compare=False, repr=False)


@dataclass(frozen=True)
class Raised:
    """An uncaught target exception carrying the thrown value."""

    term: object
    store: Store = field(compare=False)
    stats: Stats = field(default_factory=Stats, compare=False, repr=False)


@dataclass(frozen=True)
class OutOfFuel:
    stats: Stats = field(default_factory=Stats, compare=False, repr=False)


@dataclass(frozen=True)
class Stuck:
    reason: str
    stats: Stats = field(default_factory=Stats, compare=False, repr=False)


Outcome = Value | Raised | OutOfFuel | Stuck


# runtime values ------------------------------------------------------------


class _UnitV:
    __slots__ = ()

    def __repr__(self):
        return "()"


UNIT_V = _UnitV()


@dataclass(frozen=True)
class Closure:
    param: str
    ty: object
    body: object
    env: "Env | None"


@dataclass(frozen=True)
class LocV:
    addr: int


@dataclass(frozen=True)
class Env:
    name: str
    value: object
    parent: "Env | None"


def _lookup(env: Env | None, name: str):
    while env is not None:
        if env.name == name:
            return env.value
        env = env.parent
    raise KeyError(name)


class _Stuck(Exception):
    pass


class _NoFuel(Exception):
    pass


def readback(v):
    """Turn a runtime value back into a closed value term."""
    if v is UNIT_V:
        return UnitVal()
    if isinstance(v, bool):
        raise _Stuck("boolean leaked into the machine")
    if isinstance(v, int):
        return IntLit(v)
    if isinstance(v, LocV):
        return Loc(v.addr)
    if isinstance(v, Closure):
        body = v.body
        for name in sorted(free_vars(body) - {v.param}):
            try:
                inner = _lookup(v.env, name)
            except KeyError:
                continue
            body = subst(body, name, readback(inner))
        return Lam(v.param, v.ty, body)
    raise _Stuck(f"not a runtime value: {v!r}")


def reify(t):
    """Turn a closed value term into a runtime value."""
    match t:
        case UnitVal():
            return UNIT_V
        case IntLit(n):
            return wrap64(n)
        case Loc(addr):
            return LocV(addr)
        case Lam(x, ty, body):
            return Closure(x, ty, body, None)
    raise _Stuck(f"store holds a non-value {t!r}")


class Machine:
    def __init__(self, fuel: int, *, exceptions: bool, store: Store | None = None):
        if fuel <= 0:
            raise ValueError("fuel must be positive")
        self.fuel = fuel
        self.exceptions = exceptions
        self.stats = Stats()
        self.cells: dict[int, object] = {}
        self.next_loc = 0
        if store is not None:
            self.cells = {a: reify(v) for a, v in store.cells.items()}
            self.next_loc = store.next_loc

    def _tick(self, kind: str):
        if self.stats.steps >= self.fuel:
            raise _NoFuel
        self.stats.steps += 1
        s = self.stats
        if kind == "beta":
            s.beta += 1
        elif kind == "arith":
            s.arith += 1
        elif kind == "store":
            s.store_ops += 1
        else:
            s.throws += 1

    def _store_out(self) -> Store:
        return Store({a: readback(v) for a, v in self.cells.items()}, self.next_loc)

    def run(self, term) -> Outcome:
        try:
            kind, payload = self._loop(term)
        except _NoFuel:
            return OutOfFuel(self.stats)
        except _Stuck as e:
            return Stuck(str(e), self.stats)
        try:
            out_term = readback(payload)
            store = self._store_out()
        except _Stuck as e:
            return Stuck(str(e), self.stats)
        if kind == "value":
            return Value(out_term, store, self.stats)
        return Raised(out_term, store, self.stats)

    def _loop(self, term):
        stack: list[tuple] = []
        mode = "eval"
        ctrl = term
        env: Env | None = None
        val = None
        while True:
            if mode == "eval":
                match ctrl:
                    case UnitVal():
                        val, mode = UNIT_V, "ret"
                    case IntLit(n):
                        val, mode = wrap64(n), "ret"
                    case Var(name):
                        try:
                            val = _lookup(env, name)
                        except KeyError:
                            raise _Stuck(f"unbound variable {name}") from None
                        mode = "ret"
                    case Lam(x, ty, body):
                        val, mode = Closure(x, ty, body, env), "ret"
                    case Loc(addr):
                        if addr not in self.cells:
                            raise _Stuck(f"dangling location {addr}")
                        val, mode = LocV(addr), "ret"
                    case App(f, a):
                        stack.append(("arg", a, env))
                        ctrl = f
                    case BinOp(op, l, r):
                        stack.append(("rhs", op, r, env))
                        ctrl = l
                    case RefNew(e):
                        stack.append(("ref",))
                        ctrl = e
                    case Deref(e):
                        stack.append(("deref",))
                        ctrl = e
                    case Assign(r, v):
                        stack.append(("assign_val", v, env))
                        ctrl = r
                    case Throw(e):
                        if not self.exceptions:
                            raise _Stuck("throw in a source program")
                        stack.append(("throw",))
                        ctrl = e
                    case Catch(b, x, vb, y, eb):
                        if not self.exceptions:
                            raise _Stuck("catch in a source program")
                        stack.append(("catch", x, vb, y, eb, env))
                        ctrl = b
                    case Ann(e, _):
                        ctrl = e
                    case _:
                        raise _Stuck(f"unknown term {ctrl!r}")
                continue

            # mode == "ret": deliver val to the top frame
            if not stack:
                return "value", val
            frame = stack.pop()
            tag = frame[0]
            if tag == "arg":
                stack.append(("call", val))
                ctrl, env, mode = frame[1], frame[2], "eval"
            elif tag == "call":
                fn = frame[1]
                if not isinstance(fn, Closure):
                    raise _Stuck(f"application of non-function {fn!r}")
                self._tick("beta")
                env = Env(fn.param, val, fn.env)
                ctrl, mode = fn.body, "eval"
            elif tag == "rhs":
                stack.append(("binop", frame[1], val))
                ctrl, env, mode = frame[2], frame[3], "eval"
            elif tag == "binop":
                op, left = frame[1], frame[2]
                if not (_is_int(left) and _is_int(val)):
                    raise _Stuck(f"arithmetic on non-integers {left!r} {op} {val!r}")
                self._tick("arith")
                if op == "+":
                    val = wrap64(left + val)
                elif op == "*":
                    val = wrap64(left * val)
                else:
                    val = wrap64(left - val)
            elif tag == "ref":
                self._tick("store")
                addr = self.next_loc
                self.cells[addr] = val
                self.next_loc += 1
                val = LocV(addr)
            elif tag == "deref":
                if not isinstance(val, LocV) or val.addr not in self.cells:
                    raise _Stuck(f"dereference of non-location {val!r}")
                self._tick("store")
                val = self.cells[val.addr]
            elif tag == "assign_val":
                stack.append(("assign", val))
                ctrl, env, mode = frame[1], frame[2], "eval"
            elif tag == "assign":
                loc = frame[1]
                if not isinstance(loc, LocV) or loc.addr not in self.cells:
                    raise _Stuck(f"assignment to non-location {loc!r}")
                self._tick("store")
                self.cells[loc.addr] = val
                val = UNIT_V
            elif tag == "throw":
                self._tick("throw")
                while stack and stack[-1][0] != "catch":
                    stack.pop()
                if not stack:
                    return "raised", val
                _, _, _, y, eb, cenv = stack.pop()
                env = Env(y, val, cenv)
                ctrl, mode = eb, "eval"
            elif tag == "catch":
                _, x, vb, _, _, cenv = frame
                env = Env(x, val, cenv)
                ctrl, mode = vb, "eval"
            else:  # pragma: no cover
                raise _Stuck(f"bad frame {tag}")


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def evaluate(term, *, fuel: int = DEFAULT_FUEL, exceptions: bool, store: Store | None = None) -> Outcome:
    return Machine(fuel, exceptions=exceptions, store=store).run(term)
