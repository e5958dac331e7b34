import json

import pytest

from conftest import COUNTER, E1, E_TYPE, lt, st
from linkc.errors import LinkError
from linkc.linker import (
    MANIFEST_FORMAT,
    Compatible,
    Component,
    Incompatible,
    LinkManifest,
    check_compat,
    compile_component,
    export_type,
    import_type,
    link,
    read_manifest,
    run,
)
from linkc.machine import OutOfFuel, Value
from linkc.syntax import IntLit, Lang


def manifest(client_source, client_lang=Lang.STLCK, annotation=None):
    return LinkManifest(
        [
            Component("counter", Lang.LAMREF, COUNTER),
            Component("client", client_lang, client_source, annotation=annotation),
        ],
        "(app client counter)",
    )


def test_annotated_client_links_and_runs():
    out = run(manifest(E1, annotation=E_TYPE))
    assert isinstance(out, Value) and out.term == IntLit(1)


def test_unannotated_client_fails_with_both_types():
    with pytest.raises(LinkError) as info:
        link(manifest(E1))
    err = info.value
    assert isinstance(err.verdict, Incompatible)
    assert "unit → E∘_0 int vs unit → E•_0 int" in err.message
    assert "counter" in err.message and "client" in err.message


def test_compat_source_types_pure_vs_impure():
    verdict = check_compat(st("(-> unit int)", Lang.STLC), Lang.STLC, st("(-> unit int)"), Lang.LAMREF)
    assert isinstance(verdict, Incompatible)
    lines = verdict.explanation
    assert lines[0].startswith("client:") and "κ+" in lines[0] and "⟦·⟧" in lines[0]
    assert lines[1].startswith("provider:")


def test_compat_annotation_matches_provider():
    verdict = check_compat(lt("(-> unit (R impure int))"), Lang.STLCK, st("(-> unit int)"), Lang.LAMREF)
    assert isinstance(verdict, Compatible)
    assert verdict.client_type == lt("(-> unit (R impure int))")


def test_compat_base_types_always_agree():
    assert isinstance(check_compat(st("int"), Lang.STLC, st("int"), Lang.LAMREF), Compatible)


def test_import_and_export_types():
    client = compile_component(Component("client", Lang.STLCK, E1, annotation=E_TYPE))
    assert import_type(client) == (lt("(-> unit (R impure int))"), Lang.STLCK.extended())
    plain = compile_component(Component("client", Lang.STLCK, E1))
    assert import_type(plain) == (st("(-> unit int)", Lang.STLC), Lang.STLC)
    counter = compile_component(Component("counter", Lang.LAMREF, COUNTER))
    assert export_type(counter) == (st("(-> unit int)"), Lang.LAMREF)
    assert not counter.annotated


def test_interface_record():
    cc = compile_component(Component("client", Lang.STLCK, E1, annotation=E_TYPE))
    rec = cc.interface()
    assert rec["annotated"] and rec["link_type"] == E_TYPE
    assert rec["source_type"] == "(-> (-> unit int) int)"
    json.dumps(rec)


def test_target_component_links():
    m = LinkManifest(
        [
            Component("counter", Lang.LAMREF, COUNTER),
            Component("client", Lang.TARGET, "(lam c (-> unit (E impure void int)) (+ (app c unit) (app c unit)))"),
        ],
        "(app client counter)",
    )
    assert run(m).term == IntLit(3)


def test_manifest_round_trip(demo):
    m = read_manifest(demo / "counter-manifest.json")
    again = read_manifest(json.dumps(m.to_json(inline=True)))
    assert [c.source for c in again.components] == [c.source for c in m.components]
    assert run(again).term == IntLit(1)


def test_demo_manifests(demo):
    assert run(read_manifest(demo / "counter-manifest.json")).term == IntLit(1)
    assert run(read_manifest(demo / "e2-manifest.json")).term == IntLit(2)
    with pytest.raises(LinkError):
        run(read_manifest(demo / "client-manifest.json"))


def test_fuel_limit():
    assert isinstance(run(manifest(E1, annotation=E_TYPE), fuel=3), OutOfFuel)


@pytest.mark.parametrize(
    "data, fragment",
    [
        ({"format": "other"}, "format"),
        ({"format": MANIFEST_FORMAT, "components": [{"name": "a"}]}, "bad component"),
        ({"format": MANIFEST_FORMAT, "components": [], "main": "(app x y)"}, "undeclared"),
        ({"format": MANIFEST_FORMAT, "components": [{"name": "a", "language": "stlc"}], "main": "a"}, "path"),
        (
            {
                "format": MANIFEST_FORMAT,
                "components": [{"name": "a", "language": "stlc", "source": "1"}] * 2,
                "main": "a",
            },
            "duplicate",
        ),
    ],
)
def test_bad_manifests(data, fragment):
    with pytest.raises(LinkError, match=fragment):
        read_manifest(data)


def test_component_errors_are_link_errors():
    m = LinkManifest([Component("bad", Lang.STLC, "(+ 1 unit)")], "bad")
    with pytest.raises(LinkError, match="component bad"):
        link(m)


def test_non_function_client():
    m = LinkManifest([Component("a", Lang.STLC, "1"), Component("b", Lang.STLC, "2")], "(app a b)")
    with pytest.raises(LinkError, match="not a function"):
        link(m)
