from pathlib import Path

import pytest

from linkc.syntax import Lang, parse, parse_type

DEMO = Path(__file__).resolve().parent.parent / "demo"

E1 = "(lam c (-> unit int) (app c unit))"
E2 = "(lam c (-> unit int) (seq (app c unit) (app c unit)))"
COUNTER = "(let x (ref 0) (lam u unit (seq (assign x (+ (deref x) 1)) (deref x))))"
C_REF = (
    "(lam h (-> (-> unit int) int) (let x (ref 0)"
    " (let c (lam u unit (seq (assign x (+ (deref x) 1)) (deref x))) (app h c))))"
)
E_TYPE = "(-> (-> unit (R impure int)) (R impure int))"


@pytest.fixture
def demo() -> Path:
    return DEMO


def lt(text: str, lang: Lang = Lang.LAMREFK, ext=None):
    """Parse a linking type."""
    return parse_type(text, lang, ext)


def st(text: str, lang: Lang = Lang.LAMREF):
    """Parse a source type."""
    return parse_type(text, lang)


def term(text: str, lang: Lang):
    return parse(text, lang)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(REPORT, key=lambda s: s[6:9]):
            terminalreporter.write_line(line)
