"""The target language λ^ref_exc: modal type checker and evaluator.

Computation types ``E^ε_exn τ`` are :class:`~linkc.syntax.Comp` values.  The
checker synthesizes the least computation type (value inclusion gives
``E^∘_0``) and uses subsumption

    E^ρ_exn τ  ≤  E^ρ'_exn' τ   when ρ ⊑ ρ' and (exn = 0 or exn = exn')

wherever a computation meets an expected type.  ``throw`` has result type
:data:`~linkc.syntax.BOT`, which fits every expected result type.
"""

from __future__ import annotations

from .errors import ExnMismatch, IllegalType, TypeCheckError, UnboundVariable
from .machine import DEFAULT_FUEL, Outcome, Store, evaluate
from .syntax import (
    BOT,
    IMPURE,
    INT,
    PURE,
    UNIT,
    VOID,
    App,
    Assign,
    BinOp,
    Bot,
    Catch,
    Comp,
    Deref,
    Int,
    IntLit,
    Lam,
    Loc,
    Ref,
    RefNew,
    TArrow,
    Throw,
    Unit,
    UnitVal,
    Var,
    Void,
    join,
    print_comp,
    print_type,
)


def check_target_type(ty, node=None):
    match ty:
        case Unit() | Int() | Void():
            return
        case Ref(inner):
            check_target_type(inner, node)
        case TArrow(d, Comp(_, exn, res)):
            check_target_type(d, node)
            check_target_type(exn, node)
            check_target_type(res, node)
        case _:
            raise IllegalType(f"{print_type(ty)} is not a target type", node)


def is_subtype(a, b) -> bool:
    # nothing has type void or ⊥, so either fits anywhere
    return a == b or isinstance(a, (Bot, Void))


def subsumes(actual: Comp, expected: Comp) -> bool:
    """``actual ≤ expected`` under the subsumption rule."""
    return (
        actual.effect <= expected.effect
        and (actual.exn in (VOID, BOT) or actual.exn == expected.exn)
        and is_subtype(actual.result, expected.result)
    )


def exn_join(*exns, node=None):
    out = VOID
    for exn in exns:
        if exn in (VOID, BOT):
            continue
        if out == VOID:
            out = exn
        elif out != exn:
            raise ExnMismatch(
                f"exception types {print_type(out)} and {print_type(exn)} do not agree", node, out, exn
            )
    return out


def _result_join(a, b, node):
    if isinstance(a, (Bot, Void)):
        return b
    if isinstance(b, (Bot, Void)) or a == b:
        return a
    raise TypeCheckError(
        f"branches disagree: {print_type(a)} vs {print_type(b)}", node, a, b
    )


class _TargetChecker:
    def __init__(self, store_typing=None):
        self.store_typing = dict(store_typing or {})

    def value(self, env, v):
        match v:
            case UnitVal():
                return UNIT
            case IntLit():
                return INT
            case Var(name):
                if name not in env:
                    raise UnboundVariable(name, v)
                return env[name]
            case Loc(addr):
                if addr not in self.store_typing:
                    raise TypeCheckError(f"location {addr} has no store typing", v)
                return Ref(self.store_typing[addr])
            case Lam(x, None, _):
                raise TypeCheckError(f"binder {x} has no type annotation", v)
            case Lam(x, ty, body):
                check_target_type(ty, v)
                return TArrow(ty, self.comp({**env, x: ty}, body))
        raise TypeCheckError(f"{type(v).__name__} is not a value", v)

    def comp(self, env, e) -> Comp:
        match e:
            case UnitVal() | IntLit() | Var() | Loc():
                return Comp(PURE, VOID, self.value(env, e))
            case Lam(_, ty, _) if ty is not None:
                return Comp(PURE, VOID, self.value(env, e))
            case App(Lam(x, None, body), bound):
                cb = self.comp(env, bound)
                cr = self.comp({**env, x: cb.result}, body)
                return Comp(join(cb.effect, cr.effect), exn_join(cb.exn, cr.exn, node=e), cr.result)
            case App(f, a):
                cf = self.comp(env, f)
                fty = cf.result
                if isinstance(fty, Bot):
                    ca = self.comp(env, a)
                    return Comp(join(cf.effect, ca.effect), exn_join(cf.exn, ca.exn, node=e), BOT)
                if not isinstance(fty, TArrow):
                    raise TypeCheckError(f"applying a non-function of type {print_type(fty)}", e, "arrow", fty)
                ca = self.check(env, a, fty.dom)
                latent = fty.comp
                return Comp(
                    join(cf.effect, ca.effect, latent.effect),
                    exn_join(cf.exn, ca.exn, latent.exn, node=e),
                    latent.result,
                )
            case BinOp(_, l, r):
                cl = self.check(env, l, INT)
                cr = self.check(env, r, INT)
                return Comp(join(cl.effect, cr.effect), exn_join(cl.exn, cr.exn, node=e), INT)
            case RefNew(init):
                c = self.comp(env, init)
                if isinstance(c.result, Bot):
                    raise TypeCheckError("cannot allocate a reference to a thrown value", e)
                return Comp(IMPURE, c.exn, Ref(c.result))
            case Deref(r):
                c = self.comp(env, r)
                if isinstance(c.result, Bot):
                    return Comp(IMPURE, c.exn, BOT)
                if not isinstance(c.result, Ref):
                    raise TypeCheckError(f"dereferencing a non-reference {print_type(c.result)}", e)
                return Comp(IMPURE, c.exn, c.result.inner)
            case Assign(r, v):
                cr = self.comp(env, r)
                if isinstance(cr.result, Bot):
                    cv = self.comp(env, v)
                elif isinstance(cr.result, Ref):
                    cv = self.check(env, v, cr.result.inner)
                else:
                    raise TypeCheckError(f"assigning to a non-reference {print_type(cr.result)}", e)
                return Comp(IMPURE, exn_join(cr.exn, cv.exn, node=e), UNIT)
            case Throw(payload):
                c = self.comp(env, payload)
                return Comp(c.effect, exn_join(c.exn, c.result, node=e), BOT)
            case Catch(body, x, vbody, y, ebody):
                c = self.comp(env, body)
                cv = self.comp({**env, x: c.result}, vbody)
                ce = self.comp({**env, y: c.exn}, ebody)
                return Comp(
                    join(c.effect, cv.effect, ce.effect),
                    exn_join(cv.exn, ce.exn, node=e),
                    _result_join(cv.result, ce.result, e),
                )
        raise TypeCheckError(f"{type(e).__name__} is not a target term", e)

    def check(self, env, e, expected) -> Comp:
        """Computation type of ``e`` whose result must fit ``expected``."""
        if isinstance(e, Lam) and e.ty is not None and isinstance(expected, TArrow):
            self.check_lam(env, e, expected)
            return Comp(PURE, VOID, expected)
        c = self.comp(env, e)
        if not is_subtype(c.result, expected):
            raise TypeCheckError(
                f"expected {print_type(expected)}, found {print_type(c.result)}", e, expected, c.result
            )
        return c

    def check_lam(self, env, lam: Lam, expected: TArrow):
        check_target_type(lam.ty, lam)
        if lam.ty != expected.dom:
            raise TypeCheckError(
                f"parameter {lam.param}: {print_type(lam.ty)} does not match {print_type(expected.dom)}",
                lam,
                expected.dom,
                lam.ty,
            )
        body = self.check({**env, lam.param: lam.ty}, lam.body, expected.comp.result)
        if not subsumes(body, expected.comp):
            raise TypeCheckError(
                f"body computation {print_comp(body)} does not fit {print_comp(expected.comp)}",
                lam,
                expected.comp,
                body,
            )


def typecheck_target_value(env, v, store_typing=None):
    """``Γ ⊢ v : τ`` for a syntactic value."""
    return _TargetChecker(store_typing).value(dict(env), v)


def typecheck_target_comp(env, e, declared_exn=VOID, store_typing=None) -> Comp:
    """Least ``E^ε_exn τ`` for ``e``; its exception type must be 0 or ``declared_exn``.

    A result type of ``BOT`` means every result type fits (the term always throws).
    """
    c = _TargetChecker(store_typing).comp(dict(env), e)
    if c.exn not in (VOID, BOT) and c.exn != declared_exn:
        raise ExnMismatch(
            f"may raise {print_type(c.exn)} but the declared exception type is {print_type(declared_exn)}",
            e,
            declared_exn,
            c.exn,
        )
    return c


def check_target_comp(env, e, expected: Comp, store_typing=None) -> Comp:
    """Check ``e`` against an expected computation type (checking mode, with subsumption)."""
    c = _TargetChecker(store_typing).check(dict(env), e, expected.result)
    if not subsumes(c, expected):
        raise TypeCheckError(
            f"computation {print_comp(c)} does not fit {print_comp(expected)}", e, expected, c
        )
    return c


def eval_target(e, store: Store | None = None, fuel: int = DEFAULT_FUEL) -> Outcome:
    """Call-by-value, left to right; ``throw`` unwinds to the nearest ``catch``."""
    return evaluate(e, fuel=fuel, exceptions=True, store=store)
