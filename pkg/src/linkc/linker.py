"""Cross-language compatibility checking, linking and running of manifests.

A manifest (JSON, format ``linkc-manifest-v1``)::

    {
      "format": "linkc-manifest-v1",
      "components": [
        {"name": "counter", "language": "lamref", "path": "counter.lref"},
        {"name": "client", "language": "stlck", "path": "e1.stlck",
         "extension": "heap",
         "annotation": "(-> (-> unit (R impure int)) (R impure int))"}
      ],
      "main": "(app client counter)"
    }

Components give either ``path`` (relative to the manifest) or inline
``source``.  ``main`` is a target-language term whose free variables are
component exports (``export``, defaulting to ``name``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .compiler import backtranslate_type, compile, translate_type
from .errors import LinkcError, LinkError, NotExpressible, TypeCheckError
from .linking import (
    check_programmer_source,
    elaborate,
    erase_annotations,
    kappa_minus,
    kappa_plus,
    typecheck_linked,
)
from .machine import DEFAULT_FUEL, Outcome, Store
from .source import check_source_type, typecheck_source
from .syntax import (
    Ann,
    App,
    ArrowR,
    Ext,
    Lam,
    Lang,
    TArrow,
    Var,
    free_vars,
    parse,
    parse_lang,
    parse_type,
    print_type,
    show_type,
    subst,
    walk,
)
from .target import eval_target, typecheck_target_comp

MANIFEST_FORMAT = "linkc-manifest-v1"


# ---------------------------------------------------------------------------
# Compatibility


@dataclass(frozen=True)
class Compatible:
    shared: object
    client_type: object


@dataclass(frozen=True)
class Incompatible:
    client_type: object
    provider_type: object
    client_chain: tuple
    provider_chain: tuple

    @property
    def explanation(self) -> list[str]:
        return [render_chain("client", self.client_chain), render_chain("provider", self.provider_chain)]

    def message(self, client_lang: str = "", provider_lang: str = "") -> str:
        left = show_type(self.client_type) + (f" ({client_lang})" if client_lang else "")
        right = show_type(self.provider_type) + (f" ({provider_lang})" if provider_lang else "")
        targets = f"{show_type(self.client_chain[-1][1])} vs {show_type(self.provider_chain[-1][1])}"
        return f"{left} is not compatible with {right} (target types {targets})"


CompatVerdict = Compatible | Incompatible


def render_chain(role: str, chain) -> str:
    parts = [f"{role}: {show_type(chain[0][1])} [{chain[0][0]}]"]
    for label, ty in chain[1:]:
        parts.append(f"--{label}--> {show_type(ty)}")
    return " ".join(parts)


def _is_source_type(ty, lang: Lang) -> bool:
    try:
        check_source_type(ty, lang.base)
    except TypeCheckError:
        return False
    return True


def interface_chain(ty, lang: Lang, ext: Ext = Ext.HEAP):
    """Translation steps from a component's interface type to its target type.

    Source types are lifted by κ+ first; linking types are used as written.
    Returns ``(source-level type, chain)``.
    """
    if lang is Lang.TARGET:
        try:
            src = kappa_minus(backtranslate_type(ty), Lang.LAMREF, Ext.HEAP)
        except (NotExpressible, LinkcError):
            src = ty
        return src, ((lang.value, ty),)
    if _is_source_type(ty, lang):
        link = kappa_plus(ty, lang, ext)
        chain = ((lang.base.value, ty), ("κ+", link))
        src = ty
    else:
        link = elaborate(ty, lang, ext)
        chain = ((f"{lang.extended().value} annotation", link),)
        src = kappa_minus(link, lang, ext)
    return src, chain + (("⟦·⟧", translate_type(link)),)


def check_compat(
    client_ty, client_lang: Lang, provider_ty, provider_lang: Lang,
    client_ext: Ext = Ext.HEAP, provider_ext: Ext = Ext.HEAP,
) -> CompatVerdict:
    """Can a provider of ``provider_ty`` be used where the client expects ``client_ty``?"""
    client_src, client_chain = interface_chain(client_ty, client_lang, client_ext)
    provider_src, provider_chain = interface_chain(provider_ty, provider_lang, provider_ext)
    left, right = client_chain[-1][1], provider_chain[-1][1]
    if left == right:
        back = backtranslate_type(left, client_lang) if client_lang is not Lang.TARGET else left
        return Compatible(left, back)
    return Incompatible(client_src, provider_src, client_chain, provider_chain)


# ---------------------------------------------------------------------------
# Manifests


@dataclass
class Component:
    name: str
    lang: Lang
    source: str
    ext: Ext | None = None
    annotation: str | None = None
    path: str | None = None
    export: str | None = None

    @property
    def binding(self) -> str:
        return self.export or self.name

    def to_json(self, inline: bool = False) -> dict:
        out: dict = {"name": self.name, "language": self.lang.value}
        if self.path and not inline:
            out["path"] = self.path
        else:
            out["source"] = self.source
        if self.ext is not None:
            out["extension"] = self.ext.value
        if self.annotation is not None:
            out["annotation"] = self.annotation
        if self.export is not None:
            out["export"] = self.export
        return out


@dataclass
class LinkManifest:
    components: list[Component]
    main: str

    def to_json(self, inline: bool = True) -> dict:
        return {
            "format": MANIFEST_FORMAT,
            "components": [c.to_json(inline) for c in self.components],
            "main": self.main,
        }


def read_manifest(data, base_dir: str | Path | None = None) -> LinkManifest:
    """Build a manifest from a path, a JSON string, or an already-decoded dict."""
    if isinstance(data, (str, Path)) and not str(data).lstrip().startswith("{"):
        path = Path(data)
        base_dir = path.parent if base_dir is None else base_dir
        data = json.loads(path.read_text())
    elif isinstance(data, str):
        data = json.loads(data)
    base = Path(base_dir) if base_dir is not None else Path(".")
    if data.get("format") != MANIFEST_FORMAT:
        raise LinkError(f"manifest format must be {MANIFEST_FORMAT!r}, got {data.get('format')!r}")
    comps = []
    seen: set[str] = set()
    for raw in data.get("components", []):
        try:
            name = raw["name"]
            lang = parse_lang(raw["language"])
        except (KeyError, ValueError) as e:
            raise LinkError(f"bad component entry {raw!r}: {e}") from None
        if name in seen:
            raise LinkError(f"duplicate component name {name!r}")
        seen.add(name)
        if "source" in raw:
            text, path = raw["source"], None
        elif "path" in raw:
            path = raw["path"]
            try:
                text = (base / path).read_text()
            except OSError as e:
                raise LinkError(f"component {name}: cannot read {path}: {e}") from None
        else:
            raise LinkError(f"component {name} needs a path or inline source")
        ext = Ext(raw["extension"]) if raw.get("extension") else None
        comps.append(Component(name, lang, text, ext, raw.get("annotation"), path, raw.get("export")))
    if "main" not in data:
        raise LinkError("manifest has no main expression")
    manifest = LinkManifest(comps, data["main"])
    exports = {c.binding for c in comps}
    try:
        main = parse(manifest.main, Lang.TARGET)
    except LinkcError as e:
        raise LinkError(f"main: {e.message}", pos=e.pos) from None
    unknown = free_vars(main) - exports
    if unknown:
        raise LinkError(f"main references undeclared component(s): {', '.join(sorted(unknown))}")
    return manifest


# ---------------------------------------------------------------------------
# Compilation and linking


@dataclass
class CompiledComponent:
    component: Component
    term: object
    target_type: object
    link_type: object | None
    source_type: object | None
    annotated: bool
    judgment: object = None

    def interface(self) -> dict:
        """Sidecar interface record."""
        return {
            "name": self.component.name,
            "language": self.component.lang.value,
            "extension": (self.component.ext or Ext.HEAP).value if self.component.lang.is_source else None,
            "annotated": self.annotated,
            "source_type": print_type(self.source_type) if self.source_type is not None else None,
            "link_type": print_type(self.link_type) if self.link_type is not None else None,
            "target_type": print_type(self.target_type),
        }


def _has_link_annotations(t) -> bool:
    for node in walk(t):
        if isinstance(node, Ann):
            return True
        if isinstance(node, Lam) and node.ty is not None and not _is_source_type(node.ty, Lang.LAMREF):
            return True
    return False


def compile_component(comp: Component) -> CompiledComponent:
    lang = comp.lang
    term = parse(comp.source, lang, comp.ext)
    if lang is Lang.TARGET:
        c = typecheck_target_comp({}, term)
        try:
            link = backtranslate_type(c.result)
        except NotExpressible:
            link = None
        return CompiledComponent(comp, term, c.result, link, None, True)
    ext = comp.ext or Ext.HEAP
    kappa_lang = lang.extended()
    bad = check_programmer_source(term, lang, ext)
    if bad:
        node = bad[0]
        raise TypeCheckError(f"{type(node).__name__} is reasoning-only and may not appear in {lang.value} code", node)
    if comp.annotation is not None:
        annotation = parse_type(comp.annotation, kappa_lang, ext)
        annotated = True
    elif isinstance(term, Ann):
        annotation, annotated = None, True
    elif lang.is_linking and _has_link_annotations(term):
        annotation, annotated = None, True
    else:
        # unannotated: the interface is the default κ+ embedding of the source type
        src = typecheck_source({}, erase_annotations(term, lang, ext), lang.base)
        annotation, annotated = kappa_plus(src, lang, ext), False
    judgment = typecheck_linked({}, term, lang, ext, annotation)
    compiled = compile(term, lang, judgment)
    return CompiledComponent(
        comp,
        compiled,
        translate_type(judgment.type),
        judgment.type,
        kappa_minus(judgment.type, lang, ext),
        annotated,
        judgment,
    )


def import_type(cc: CompiledComponent):
    """The interface a component expects from what it is applied to, as (type, lang)."""
    comp = cc.component
    if comp.lang is Lang.TARGET:
        if isinstance(cc.target_type, TArrow):
            return cc.target_type.dom, Lang.TARGET
        return None, None
    if not isinstance(cc.link_type, ArrowR):
        return None, None
    ext = comp.ext or Ext.HEAP
    if cc.annotated:
        return cc.link_type.dom, comp.lang.extended()
    return kappa_minus(cc.link_type.dom, comp.lang, ext), comp.lang.base


def export_type(cc: CompiledComponent):
    comp = cc.component
    if comp.lang is Lang.TARGET:
        return cc.target_type, Lang.TARGET
    if cc.annotated:
        return cc.link_type, comp.lang.extended()
    return cc.source_type, comp.lang.base


@dataclass
class LinkedProgram:
    term: object
    comp: object
    components: dict[str, CompiledComponent]
    verdicts: list = field(default_factory=list)


def link(manifest: LinkManifest) -> LinkedProgram:
    """Compile every component, check each linking point, and substitute into main."""
    compiled: dict[str, CompiledComponent] = {}
    for comp in manifest.components:
        try:
            compiled[comp.binding] = compile_component(comp)
        except LinkcError as e:
            raise LinkError(f"component {comp.name}: {e.message}", pos=e.pos) from e
    main = parse(manifest.main, Lang.TARGET)
    verdicts = []
    for node in walk(main):
        if not (isinstance(node, App) and isinstance(node.fn, Var) and isinstance(node.arg, Var)):
            continue
        client, provider = compiled.get(node.fn.name), compiled.get(node.arg.name)
        if client is None or provider is None:
            continue
        want, want_lang = import_type(client)
        if want is None:
            raise LinkError(f"component {client.component.name} is not a function and cannot be applied", pos=node.pos)
        have, have_lang = export_type(provider)
        verdict = check_compat(
            want, want_lang, have, have_lang,
            client.component.ext or Ext.HEAP, provider.component.ext or Ext.HEAP,
        )
        verdicts.append((client.component.name, provider.component.name, verdict))
        if isinstance(verdict, Incompatible):
            msg = verdict.message(want_lang.value, have_lang.value)
            raise LinkError(
                f"cannot link {provider.component.name} into {client.component.name}: {msg}",
                verdict=verdict,
                pos=node.pos,
            )
    program = main
    for name, cc in compiled.items():
        program = subst(program, name, cc.term)
    try:
        comp_type = typecheck_target_comp({}, program)
    except TypeCheckError as e:
        raise LinkError(f"linked program does not type check: {e.message}") from e
    return LinkedProgram(program, comp_type, compiled, verdicts)


def run(manifest: LinkManifest, fuel: int = DEFAULT_FUEL) -> Outcome:
    return eval_target(link(manifest).term, Store(), fuel)
