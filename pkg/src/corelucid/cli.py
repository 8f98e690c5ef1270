"""Command-line front end.

Commands: run, parse, translate, segments, check, repl.  Exit status is 0
on success, 1 on a program error (parse failures, unbound providers, or a
special top-level value), and 2 on usage errors.  Default output is plain
text; --json switches every command to structured output.
"""

from __future__ import annotations

import argparse
import json
import sys

from .engine import Evaluator, EvaluatorConfig
from .errors import CoreLucidError
from .parser import parse_core
from .pipeline import (
    DIALECTS,
    PipelineOptions,
    check_source,
    format_value,
    is_hybrid,
    load_program,
    parse_context_argument,
    run_source,
    translate_source,
)
from .preprocessor import Segment, split_segments
from .providers import load_manifest
from .syntax import to_data, to_text
from .values import is_special

# in-band segment lines are 1-based; a synthetic expression segment has no
# marker line, so its body starts on line 1
EXPRESSION_TAG = "EXPRESSION"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corelucid",
        description="Evaluate context-aware dataflow programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, engine=False):
        sp.add_argument("input", nargs="?", default="-",
                        help="source file, or - for standard input")
        sp.add_argument("--dialect", choices=DIALECTS, default="indexical",
                        help="surface dialect for bare expressions")
        sp.add_argument("--tag", action="append", default=[],
                        metavar="NAME[:imperative]",
                        help="register an extra segment tag")
        sp.add_argument("--json", action="store_true",
                        help="structured output")
        if engine:
            sp.add_argument("--context", default="{}", metavar="LITERAL",
                            help="evaluation context, e.g. {t:7}")
            sp.add_argument("--trace", action="store_true",
                            help="print demand/store events to stderr")
            sp.add_argument("--warehouse-stats", action="store_true",
                            help="print cache statistics to stderr")
            sp.add_argument("--eager-mode",
                            choices=("context", "dimension"),
                            help="context-literal evaluation order")
            sp.add_argument("--max-depth", type=int, metavar="N",
                            help="demand nesting limit")
            sp.add_argument("--providers", metavar="PATH",
                            help="provider manifest file")

    common(sub.add_parser("run", help="evaluate each intensional segment"),
           engine=True)
    common(sub.add_parser("parse", help="print the syntax tree"))
    common(sub.add_parser("translate", help="print core-dialect text"))
    common(sub.add_parser("segments", help="list segment tags and lines"))
    common(sub.add_parser("check", help="print dictionary and diagnostics"))

    repl = sub.add_parser("repl",
                          help="evaluate core expressions line by line")
    repl.add_argument("--context", default="{}", metavar="LITERAL")
    repl.add_argument("--max-depth", type=int, metavar="N")
    repl.add_argument("--warehouse-stats", action="store_true")
    return parser


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _options(args) -> PipelineOptions:
    eagerness = None
    if getattr(args, "eager_mode", None):
        eagerness = {"context": "contextEager",
                     "dimension": "dimensionEager"}[args.eager_mode]
    registry = None
    if getattr(args, "providers", None):
        registry = load_manifest(args.providers)
    return PipelineOptions(
        dialect=args.dialect,
        eagerness=eagerness,
        max_depth=getattr(args, "max_depth", None),
        trace=getattr(args, "trace", False),
        extra_tags=tuple(args.tag),
        registry=registry)


def _segment_span(segment: Segment) -> tuple:
    first = segment.start_line if segment.marker else segment.start_line + 1
    return first, max(segment.end_line, first)


def _format_ast(node, indent: int = 0) -> list:
    """Indented one-node-per-line rendering of a syntax tree."""
    data = to_data(node)
    return _format_data(data, indent)


def _format_data(data, indent) -> list:
    pad = "  " * indent
    head = data.pop("node")
    atoms = {k: v for k, v in data.items()
             if not isinstance(v, (dict, list))}
    label = " ".join([head] + [f"{k}={v!r}" for k, v in atoms.items()])
    lines = [pad + label]
    for key, value in data.items():
        if isinstance(value, dict):
            lines.extend(_format_data(value, indent + 1))
        elif isinstance(value, list):
            for item in value:
                if isinstance(item, dict):
                    lines.extend(_format_data(item, indent + 1))
                else:
                    lines.append("  " * (indent + 1) + repr(item))
    return lines


def _emit_json(payload) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def cmd_run(args) -> int:
    try:
        context = parse_context_argument(args.context)
    except CoreLucidError as exc:
        print(f"corelucid: bad --context: {exc}", file=sys.stderr)
        return 2
    text = _read_input(args.input)
    filename = "<stdin>" if args.input == "-" else args.input
    outcome = run_source(text, context, _options(args), filename)

    status = 0
    results_json = []
    for result in outcome.results:
        entry = {"tag": result.tag}
        if not result.report.ok:
            for diag in result.report.diagnostics:
                print(f"{filename}:{diag}", file=sys.stderr)
            entry["diagnostics"] = [str(d) for d in result.report.diagnostics]
            status = 1
        else:
            rendered = format_value(result.value, filename)
            special = is_special(result.value)
            if not args.json:
                print(rendered)
            if special:
                status = 1
            entry["value"] = rendered
            entry["special"] = special
            if args.trace:
                if not args.json:
                    for line in result.trace_lines:
                        print(line, file=sys.stderr)
                entry["trace"] = result.trace_lines
                entry["traceEvents"] = len(result.trace_lines)
            if args.warehouse_stats:
                if not args.json:
                    print(json.dumps(result.stats, sort_keys=True),
                          file=sys.stderr)
                entry["stats"] = result.stats
        results_json.append(entry)
    if args.json:
        _emit_json({"ok": status == 0, "results": results_json})
    return status


def cmd_parse(args) -> int:
    text = _read_input(args.input)
    filename = "<stdin>" if args.input == "-" else args.input
    _, _, parsed = load_program(text, _options(args), filename)
    if args.json:
        _emit_json({"segments": [{"tag": segment.tag, "ast": to_data(ast)}
                                 for segment, ast in parsed]})
        return 0
    many = len(parsed) > 1
    for segment, ast in parsed:
        if many or segment.tag != EXPRESSION_TAG:
            print(f"#{segment.tag}")
        print("\n".join(_format_ast(ast)))
    return 0


def cmd_translate(args) -> int:
    text = _read_input(args.input)
    filename = "<stdin>" if args.input == "-" else args.input
    translated = translate_source(text, _options(args), filename)
    if args.json:
        _emit_json({"segments": [{"tag": tag, "core": core}
                                 for tag, core in translated]})
        return 0
    many = len(translated) > 1
    for tag, core in translated:
        if many or tag != EXPRESSION_TAG:
            print(f"#{tag}")
        print(core)
    return 0


def cmd_segments(args) -> int:
    text = _read_input(args.input)
    if is_hybrid(text, tuple(args.tag)):
        program = split_segments(text, tuple(args.tag))
        segments = program.segments
    else:
        segments = (Segment(EXPRESSION_TAG, text, start_line=0),)
    if args.json:
        _emit_json({"segments": [
            {"tag": s.tag, "start": _segment_span(s)[0],
             "end": _segment_span(s)[1]} for s in segments]})
        return 0
    for segment in segments:
        first, last = _segment_span(segment)
        print(f"{segment.tag} {first}-{last}")
    return 0


def cmd_check(args) -> int:
    text = _read_input(args.input)
    filename = "<stdin>" if args.input == "-" else args.input
    dictionary, reports = check_source(text, _options(args), filename)

    status = 0
    if args.json:
        payload = {
            "types": sorted(dictionary.user_types),
            "functions": [_prototype_data(p)
                          for _, p in sorted(dictionary.prototypes.items())],
            "segments": [],
        }
        for tag, report in reports:
            payload["segments"].append({
                "tag": tag,
                "ok": report.ok,
                "annotations": [
                    {"line": node.location.line,
                     "column": node.location.column,
                     "expr": to_text(node), "type": str(kind)}
                    for node, kind in report.annotations],
                "diagnostics": [
                    {"kind": d.kind, "message": d.message,
                     "line": d.line, "column": d.column}
                    for d in report.diagnostics],
            })
            if not report.ok:
                status = 1
        _emit_json(payload)
        return status

    print("types: " + (", ".join(sorted(dictionary.user_types)) or "(none)"))
    print("functions:")
    for _, proto in sorted(dictionary.prototypes.items()):
        print("  " + _prototype_text(proto))
    for tag, report in reports:
        print(f"segment {tag}: {'ok' if report.ok else 'diagnostics'}")
        for node, kind in report.annotations:
            loc = node.location
            print(f"  {loc.line}:{loc.column} {to_text(node)} : {kind}")
        for diag in report.diagnostics:
            print(f"  {diag}")
        if not report.ok:
            status = 1
    return status


def _prototype_text(proto) -> str:
    params = ", ".join(str(t) for t in proto.param_types)
    text = f"{proto.name}: {proto.return_type}({params})"
    if proto.alias:
        text += f" alias {proto.alias}"
    if proto.language_tag:
        text += f" [{proto.language_tag}]"
    if proto.source_url:
        text += f' from "{proto.source_url}"'
    return text


def _prototype_data(proto) -> dict:
    return {"name": proto.name,
            "returns": str(proto.return_type),
            "params": [str(t) for t in proto.param_types],
            "tag": proto.language_tag,
            "url": proto.source_url,
            "alias": proto.alias}


def cmd_repl(args) -> int:
    try:
        context = parse_context_argument(args.context)
    except CoreLucidError as exc:
        print(f"corelucid: bad --context: {exc}", file=sys.stderr)
        return 2
    kwargs = {}
    if args.max_depth:
        kwargs["max_depth"] = args.max_depth
    evaluator = Evaluator(EvaluatorConfig(**kwargs))
    # identical lines reuse the same tree, so their stored demands are
    # warehouse hits instead of fresh evaluations
    parsed = {}
    prompt = sys.stdin.isatty()
    while True:
        if prompt:
            print("> ", end="", file=sys.stderr, flush=True)
        line = sys.stdin.readline()
        if not line:
            break
        line = line.strip()
        if not line:
            continue
        try:
            if line not in parsed:
                parsed[line] = parse_core(line, filename="<repl>")
            value = evaluator.evaluate(parsed[line], context)
            print(format_value(value, "<repl>"))
        except CoreLucidError as exc:
            print(f"error: {exc}", file=sys.stderr)
    if args.warehouse_stats:
        print(json.dumps(evaluator.stats(), sort_keys=True), file=sys.stderr)
    return 0


_COMMANDS = {
    "run": cmd_run,
    "parse": cmd_parse,
    "translate": cmd_translate,
    "segments": cmd_segments,
    "check": cmd_check,
    "repl": cmd_repl,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return _COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"corelucid: {exc.filename}: no such file", file=sys.stderr)
        return 2
    except CoreLucidError as exc:
        kind = type(exc).__name__
        print(f"corelucid: {kind}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
