"""``linkc``: check, compile, link, run and probe multi-language programs.

Exit codes: 0 ok, 1 type error, 2 link error, 3 out of fuel, 4 usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .compiler import compile
from .equiv import Distinguished, IllTyped, NotDistinguished, builtin_suites, load_suite, probe
from .errors import LinkcError, LinkError
from .linker import (
    Compatible,
    Component,
    Incompatible,
    check_compat,
    compile_component,
    export_type,
    import_type,
    link,
    read_manifest,
)
from .linking import check_programmer_source, typecheck_linked
from .machine import DEFAULT_FUEL, OutOfFuel, Raised, Store, Stuck, Value
from .registry import describe, registry
from .source import eval_source, typecheck_source
from .syntax import (
    FILE_LANGS,
    Ext,
    Lang,
    parse,
    parse_lang,
    parse_type,
    print_comp,
    print_term,
    print_type,
    show_type,
)
from .target import eval_target, typecheck_target_comp

OK, TYPE_ERROR, LINK_ERROR, OUT_OF_FUEL, USAGE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class _Out:
    json: bool

    def emit(self, code: int, text: str, **data) -> int:
        if self.json:
            print(json.dumps({"exit": code, **data}, ensure_ascii=False))
        elif text:
            print(text)
        return code

    def fail(self, code: int, err: LinkcError, filename: str, **data) -> int:
        where = err.where(filename)
        if self.json:
            print(json.dumps({"exit": code, "error": err.message, "where": where, **data}, ensure_ascii=False))
        else:
            print(f"{where}: error: {err.message}", file=sys.stderr)
        return code


def _lang_of(path: str) -> Lang:
    lang = FILE_LANGS.get(Path(path).suffix)
    if lang is None:
        raise UsageError(f"{path}: unknown file type (expected one of {', '.join(FILE_LANGS)})")
    return lang


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"{path}: {e.strerror}") from None


def _ext(args) -> Ext | None:
    return Ext(args.ext) if getattr(args, "ext", None) else None


def _fuel(args) -> int:
    if args.fuel is not None:
        return args.fuel
    env = os.environ.get("LINKC_FUEL")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"LINKC_FUEL must be an integer, got {env!r}") from None
    return DEFAULT_FUEL


def _component(path: str, args, annotation: str | None = None) -> Component:
    return Component(Path(path).stem, _lang_of(path), _read(path), _ext(args), annotation, path)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_check(args, out: _Out) -> int:
    lang, text = _lang_of(args.file), _read(args.file)
    ext = _ext(args)
    try:
        term = parse(text, lang, ext)
        if lang is Lang.TARGET:
            c = typecheck_target_comp({}, term)
            return out.emit(OK, f"{args.file}: {print_comp(c)}", type=print_comp(c))
        if not lang.is_linking:
            ty = typecheck_source({}, term, lang)
            return out.emit(OK, f"{args.file}: {print_type(ty)}", type=print_type(ty))
        bad = check_programmer_source(term, lang, ext or Ext.HEAP)
        if bad:
            node = bad[0]
            raise LinkcError(f"{type(node).__name__} is reasoning-only and may not appear in {lang.value} code", node.pos)
        ann = parse_type(args.at, lang, ext) if args.at else None
        j = typecheck_linked({}, term, lang, ext or Ext.HEAP, ann)
    except LinkcError as err:
        return out.fail(TYPE_ERROR, err, args.file)
    text = f"{args.file}: {print_type(j.type)} ({j.effect.value})"
    return out.emit(OK, text, type=print_type(j.type), effect=j.effect.value)


def cmd_compile(args, out: _Out) -> int:
    comp = _component(args.file, args, args.at)
    try:
        cc = compile_component(comp)
    except LinkcError as err:
        return out.fail(TYPE_ERROR, err, args.file)
    code = print_term(cc.term)
    iface = cc.interface()
    if args.emit:
        Path(args.emit).write_text(code + "\n")
        Path(args.emit + ".json").write_text(json.dumps(iface, indent=2, ensure_ascii=False) + "\n")
        return out.emit(OK, f"wrote {args.emit} ({iface['target_type']})", interface=iface, output=args.emit)
    return out.emit(OK, code, interface=iface, term=code)


@dataclass
class _Endpoint:
    name: str
    imports: tuple | None
    exports: tuple
    ext: Ext


def _inline_endpoint(spec: str) -> _Endpoint:
    lang_name, sep, ty_text = spec.partition(":")
    if not sep:
        raise UsageError(f"{spec}: expected a file or LANG:TYPE")
    try:
        lang = parse_lang(lang_name)
    except ValueError as e:
        raise UsageError(str(e)) from None
    ty = parse_type(ty_text, lang)
    return _Endpoint(spec, (ty, lang), (ty, lang), Ext.HEAP)


def _sidecar_endpoint(path: str) -> _Endpoint:
    try:
        data = json.loads(_read(path))
        lang = parse_lang(data["language"])
    except (ValueError, KeyError) as e:
        raise UsageError(f"{path}: not an interface file ({e})") from None
    ext = Ext(data.get("extension") or "heap")
    if lang is Lang.TARGET:
        ty = parse_type(data["target_type"], Lang.TARGET)
        dom = (ty.dom, Lang.TARGET) if hasattr(ty, "dom") else None
        return _Endpoint(data["name"], dom, (ty, Lang.TARGET), ext)
    if data.get("annotated"):
        ty = parse_type(data["link_type"], lang.extended(), ext)
        tl = lang.extended()
    else:
        ty = parse_type(data["source_type"], lang.base)
        tl = lang.base
    dom = (ty.dom, tl) if hasattr(ty, "dom") else None
    return _Endpoint(data["name"], dom, (ty, tl), ext)


def _endpoint(spec: str, args) -> _Endpoint:
    if spec.endswith(".json"):
        return _sidecar_endpoint(spec)
    if Path(spec).suffix in FILE_LANGS:
        comp = _component(spec, args)
        cc = compile_component(comp)
        imp = import_type(cc)
        return _Endpoint(comp.name, imp if imp[0] is not None else None, export_type(cc), comp.ext or Ext.HEAP)
    return _inline_endpoint(spec)


def cmd_compat(args, out: _Out) -> int:
    try:
        client = _endpoint(args.client, args)
        provider = _endpoint(args.provider, args)
    except LinkcError as err:
        return out.fail(TYPE_ERROR, err, args.client)
    if client.imports is None:
        return out.fail(TYPE_ERROR, LinkcError(f"{client.name} is not a function and imports nothing"), args.client)
    (want, want_lang), (have, have_lang) = client.imports, provider.exports
    try:
        verdict = check_compat(want, want_lang, have, have_lang, client.ext, provider.ext)
    except LinkcError as err:
        return out.fail(TYPE_ERROR, err, args.client)
    match verdict:
        case Compatible(shared, client_type):
            text = f"compatible: {show_type(client_type)} ~ {show_type(shared)}"
            return out.emit(OK, text, compatible=True, target_type=print_type(shared))
        case Incompatible():
            msg = verdict.message(want_lang.value, have_lang.value)
            lines = [f"{args.client}:1:1: error: {verdict.__class__.__name__.lower()}: {msg}"]
            if args.explain:
                lines += ["  " + line for line in verdict.explanation]
            if not out.json:
                print("\n".join(lines), file=sys.stderr)
                return TYPE_ERROR
            return out.emit(TYPE_ERROR, "", compatible=False, error=msg, explanation=verdict.explanation)


def _load_manifest(path: str):
    try:
        return read_manifest(_read(path), Path(path).parent)
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})") from None


def cmd_link(args, out: _Out) -> int:
    try:
        prog = link(_load_manifest(args.manifest))
    except LinkError as err:
        return _link_failure(out, err, args)
    code = print_term(prog.term)
    if args.emit:
        Path(args.emit).write_text(code + "\n")
    text = code if not args.emit else f"wrote {args.emit}"
    return out.emit(OK, f"{text}\n: {print_comp(prog.comp)}", term=code, type=print_comp(prog.comp))


def _link_failure(out: _Out, err: LinkError, args) -> int:
    extra = {}
    if isinstance(err.verdict, Incompatible):
        extra["explanation"] = err.verdict.explanation
        if args.explain and not out.json:
            err = LinkError(err.message + "\n" + "\n".join("  " + x for x in err.verdict.explanation), pos=err.pos)
    return out.fail(LINK_ERROR, err, args.manifest, **extra)


def _report(out: _Out, outcome, filename: str) -> int:
    match outcome:
        case Value(term):
            shown = print_term(term)
            return out.emit(OK, shown, value=shown, steps=outcome.stats.steps, cost=outcome.stats.cost)
        case OutOfFuel(stats):
            return out.fail(OUT_OF_FUEL, LinkcError(f"out of fuel after {stats.steps} steps"), filename, steps=stats.steps)
        case Raised(term):
            return out.fail(TYPE_ERROR, LinkcError(f"uncaught exception {print_term(term)}"), filename)
        case Stuck(reason):
            return out.fail(TYPE_ERROR, LinkcError(f"stuck: {reason}"), filename)


def cmd_run(args, out: _Out) -> int:
    fuel = _fuel(args)
    path = args.program
    if path.endswith(".json"):
        try:
            prog = link(_load_manifest(path))
        except LinkError as err:
            args.manifest = path
            return _link_failure(out, err, args)
        return _report(out, eval_target(prog.term, Store(), fuel), path)
    lang = _lang_of(path)
    try:
        term = parse(_read(path), lang, _ext(args))
        if lang is Lang.TARGET:
            typecheck_target_comp({}, term)
            outcome = eval_target(term, Store(), fuel)
        elif not lang.is_linking:
            typecheck_source({}, term, lang)
            outcome = eval_source(term, lang, fuel)
        else:
            j = typecheck_linked({}, term, lang, _ext(args) or Ext.HEAP)
            outcome = eval_target(compile(term, lang, j), Store(), fuel)
    except LinkcError as err:
        return out.fail(TYPE_ERROR, err, path)
    return _report(out, outcome, path)


def cmd_equiv(args, out: _Out) -> int:
    lang = _lang_of(args.e1)
    if lang is Lang.TARGET:
        raise UsageError("equiv compares source components")
    klang = lang.extended()
    try:
        ty = parse_type(args.at, klang, Ext.HEAP)
        e1 = parse(_read(args.e1), klang, Ext.HEAP)
        e2 = parse(_read(args.e2), _lang_of(args.e2).extended(), Ext.HEAP)
        if args.suite == "builtin":
            suite = builtin_suites().get(ty, [])
        else:
            if not Path(args.suite).is_dir():
                raise UsageError(f"{args.suite}: not a directory")
            suite = load_suite(args.suite)
        verdict = probe(e1, e2, ty, suite, _fuel(args), klang)
    except LinkcError as err:
        return out.fail(TYPE_ERROR, err, args.e1)
    except ValueError as err:
        raise UsageError(str(err)) from None
    match verdict:
        case IllTyped(which, reason):
            path = args.e1 if which == 1 else args.e2
            return out.fail(TYPE_ERROR, LinkcError(f"ill-typed at {show_type(ty)}: {reason}"), path, verdict="ill-typed", which=which)
        case Distinguished(ctx, o1, o2):
            v1, v2 = print_term(o1.term), print_term(o2.term)
            text = f"distinguished by context {ctx.name}: {v1} vs {v2}"
            return out.emit(OK, text, verdict="distinguished", context=ctx.name, outcomes=[v1, v2], exhausted=list(verdict.exhausted))
        case NotDistinguished(tried, exhausted):
            text = f"not distinguished relative to suite ({len(tried)} contexts: {', '.join(tried) or 'none'})"
            if exhausted:
                text += f"; out of fuel in {', '.join(exhausted)}"
            return out.emit(OK, text, verdict="not-distinguished", relative_to_suite=list(tried), exhausted=list(exhausted))


def cmd_extensions(args, out: _Out) -> int:
    regs = registry()
    text = "\n\n".join(describe(r) for r in regs.values())
    data = [
        {"id": r.spec.id, "constructors": [c.__name__ for c in r.spec.constructors],
         "obligations": list(r.spec.obligations), "translatable": r.spec.translatable,
         "properties": list(r.properties), "seed": r.seed,
         "table": [list(row) for row in r.spec.table]}
        for r in regs.values()
    ]
    return out.emit(OK, text, extensions=data)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="linkc", description="Linking types toolchain for λ, λ^ref and their κ extensions.")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    exts = [e.value for e in Ext]

    c = sub.add_parser("check", help="type check a file")
    c.add_argument("file")
    c.add_argument("--ext", choices=exts)
    c.add_argument("--at", help="linking type to check against")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("compile", help="compile a component to the target language")
    c.add_argument("file")
    c.add_argument("--ext", choices=exts)
    c.add_argument("--at", help="linking-type annotation for the component")
    c.add_argument("--emit", metavar="OUT.tgt", help="write the target term (and OUT.tgt.json interface)")
    c.set_defaults(func=cmd_compile)

    c = sub.add_parser("compat", help="can PROVIDER be passed to CLIENT?")
    c.add_argument("client", help="source file, interface .json, or LANG:TYPE (the type CLIENT expects)")
    c.add_argument("provider", help="source file, interface .json, or LANG:TYPE")
    c.add_argument("--ext", choices=exts)
    c.add_argument("--explain", action="store_true", help="show the type translation chains")
    c.set_defaults(func=cmd_compat)

    c = sub.add_parser("link", help="link a manifest")
    c.add_argument("manifest")
    c.add_argument("--emit", metavar="OUT.tgt")
    c.add_argument("--explain", action="store_true")
    c.set_defaults(func=cmd_link)

    c = sub.add_parser("run", help="run a manifest or a single program")
    c.add_argument("program")
    c.add_argument("--fuel", type=int, help=f"step budget (default $LINKC_FUEL or {DEFAULT_FUEL})")
    c.add_argument("--ext", choices=exts)
    c.add_argument("--explain", action="store_true")
    c.set_defaults(func=cmd_run)

    c = sub.add_parser("equiv", help="look for a context distinguishing two components")
    c.add_argument("e1")
    c.add_argument("e2")
    c.add_argument("--at", required=True, help="linking type to compare at")
    c.add_argument("--suite", default="builtin", help="'builtin' or a directory of context files")
    c.add_argument("--fuel", type=int)
    c.set_defaults(func=cmd_equiv)

    c = sub.add_parser("extensions", help="registered linking-types extensions")
    c.add_argument("action", choices=["list"])
    c.set_defaults(func=cmd_extensions)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "fuel", None) is not None and args.fuel <= 0:
            raise UsageError("--fuel must be positive")
        return args.func(args, _Out(args.json))
    except UsageError as e:
        print(f"linkc: error: {e}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
