"""linkc: linking types for multi-language software.

Source languages λ (simply typed) and λ^ref (with references) are extended
with linking types so that a programmer can state, and have checked, how a
component behaves when linked with code from the other language.  Both
compile to the exception-and-effect target λ^ref_exc.
"""

from .compiler import backtranslate_type, compile, translate_type
from .equiv import Distinguished, IllTyped, NotDistinguished, ProbeContext, builtin_suites, probe
from .errors import (
    CompileError,
    CostMismatch,
    ExnMismatch,
    ExtensionConflict,
    IllegalType,
    LinearityViolation,
    LinkcError,
    LinkError,
    NotExpressible,
    ParseError,
    RegistrationError,
    TerminationCheckFailed,
    TypeCheckError,
    UnboundVariable,
    UnsupportedExtension,
)
from .linker import Compatible, Incompatible, LinkManifest, check_compat, link, read_manifest, run
from .linking import (
    check_programmer_source,
    check_termination,
    infer_cost,
    kappa_minus,
    kappa_plus,
    typecheck_linked,
)
from .machine import DEFAULT_FUEL, OutOfFuel, Raised, Store, Stuck, Value
from .registry import ExtensionSpec, register, registry
from .source import eval_source, typecheck_source
from .syntax import Effect, Ext, Lang, parse, parse_type, print_term, print_type
from .target import check_target_comp, eval_target, typecheck_target_comp, typecheck_target_value

__all__ = [
    "Compatible",
    "CompileError",
    "CostMismatch",
    "DEFAULT_FUEL",
    "Distinguished",
    "Effect",
    "ExnMismatch",
    "Ext",
    "ExtensionConflict",
    "ExtensionSpec",
    "IllTyped",
    "IllegalType",
    "Incompatible",
    "Lang",
    "LinearityViolation",
    "LinkError",
    "LinkManifest",
    "LinkcError",
    "NotDistinguished",
    "NotExpressible",
    "OutOfFuel",
    "ParseError",
    "ProbeContext",
    "Raised",
    "RegistrationError",
    "Store",
    "Stuck",
    "TerminationCheckFailed",
    "TypeCheckError",
    "UnboundVariable",
    "UnsupportedExtension",
    "Value",
    "backtranslate_type",
    "builtin_suites",
    "check_compat",
    "check_programmer_source",
    "check_target_comp",
    "check_termination",
    "compile",
    "eval_source",
    "eval_target",
    "infer_cost",
    "kappa_minus",
    "kappa_plus",
    "link",
    "parse",
    "parse_type",
    "print_term",
    "print_type",
    "probe",
    "read_manifest",
    "register",
    "registry",
    "run",
    "translate_type",
    "typecheck_linked",
    "typecheck_source",
    "typecheck_target_comp",
    "typecheck_target_value",
]
