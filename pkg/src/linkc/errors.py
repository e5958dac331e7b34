"""Exception hierarchy shared by every stage of the toolchain."""

from __future__ import annotations


class LinkcError(Exception):
    """Base class. ``pos`` is a ``(line, col)`` pair when the error has a source anchor."""

    def __init__(self, message: str, pos: tuple[int, int] | None = None):
        super().__init__(message)
        self.message = message
        self.pos = pos

    def where(self, filename: str = "<input>") -> str:
        if self.pos is None:
            return f"{filename}:1:1"
        return f"{filename}:{self.pos[0]}:{self.pos[1]}"


class ParseError(LinkcError):
    def __init__(self, line: int, col: int, expected: str):
        super().__init__(f"expected {expected}", (line, col))
        self.line = line
        self.col = col
        self.expected = expected


class TypeCheckError(LinkcError):
    def __init__(self, message: str, node=None, expected=None, found=None):
        super().__init__(message, getattr(node, "pos", None))
        self.node = node
        self.expected = expected
        self.found = found


class UnboundVariable(TypeCheckError):
    def __init__(self, name: str, node=None):
        super().__init__(f"unbound variable {name}", node)
        self.name = name


class IllegalType(TypeCheckError):
    """A type constructor used outside the grammar it belongs to."""


class ExtensionConflict(TypeCheckError):
    """Type constructors of two different linking-type extensions were mixed."""


class LinearityViolation(TypeCheckError):
    def __init__(self, var: str, uses: int, node=None):
        super().__init__(f"linear variable {var} used {uses} times (must be exactly once)", node)
        self.var = var
        self.uses = uses


class TerminationCheckFailed(TypeCheckError):
    pass


class CostMismatch(TypeCheckError):
    def __init__(self, expected, inferred, node=None):
        super().__init__(f"declared cost {expected} but body has cost {inferred}", node, expected, inferred)


class ExnMismatch(TypeCheckError):
    pass


class UnsupportedExtension(LinkcError):
    pass


class NotExpressible(LinkcError):
    def __init__(self, reason: str, offending=None):
        super().__init__(reason)
        self.reason = reason
        self.offending = offending


class CompileError(LinkcError):
    pass


class LinkError(LinkcError):
    def __init__(self, message: str, verdict=None, pos=None):
        super().__init__(message, pos)
        self.verdict = verdict


class RegistrationError(LinkcError):
    def __init__(self, prop: str, counterexample, detail: str = ""):
        from .syntax import print_type

        msg = f"property {prop!r} fails on {print_type(counterexample)}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.property = prop
        self.counterexample = counterexample
