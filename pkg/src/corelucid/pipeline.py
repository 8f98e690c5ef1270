"""Shared orchestration: segment, parse, translate, check, evaluate.

The command-line front end and the HTTP service both call through here so
their behavior cannot drift apart.  Input text is either a hybrid program
(segment markers present) or a bare expression in the chosen dialect.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

from .contexts import ContextSet, ContextTree, SimpleContext, parse_context_text
from .engine import Evaluator, EvaluatorConfig
from .errors import CoreLucidError
from .parser import parse_core, parse_surface
from .preprocessor import (
    CORE_DIALECT_TAGS,
    Dictionary,
    EMPTY_DICTIONARY,
    Segment,
    SegmentedProgram,
    TypeReport,
    build_dictionary,
    split_segments,
    typecheck_calls,
)
from .providers import BoundEnvironment, ProviderRegistry, bind_providers, load_manifest
from .syntax import Expression, to_text
from .translate import translate_to_core
from .values import CoreValue, is_special, render

PROVIDERS_ENV_VAR = "CORELUCID_PROVIDERS"

# the surface dialect with stream operators is the indexical one; core is
# the translation target with @ and # only
DIALECTS = ("core", "indexical")


@dataclass
class PipelineOptions:
    dialect: str = "indexical"
    eagerness: Optional[str] = None
    max_depth: Optional[int] = None
    trace: bool = False
    cache_enabled: bool = True
    extra_tags: tuple = ()
    registry: Optional[ProviderRegistry] = None

    def engine_config(self) -> EvaluatorConfig:
        kwargs = {"trace_enabled": self.trace,
                  "cache_enabled": self.cache_enabled}
        if self.eagerness:
            kwargs["eagerness"] = self.eagerness
        if self.max_depth:
            kwargs["max_depth"] = self.max_depth
        return EvaluatorConfig(**kwargs)


@dataclass
class SegmentResult:
    """Evaluation outcome for one intensional segment."""

    tag: str
    start_line: int
    core: Expression
    report: TypeReport
    value: Optional[CoreValue] = None
    stats: dict = field(default_factory=dict)
    trace_lines: list = field(default_factory=list)


@dataclass
class RunOutcome:
    program: Optional[SegmentedProgram]
    dictionary: Dictionary
    results: list

    @property
    def ok(self) -> bool:
        return (all(r.report.ok for r in self.results)
                and all(r.value is not None and not is_special(r.value)
                        for r in self.results))


def parse_context_argument(text: str) -> SimpleContext:
    """A point context from command-line or request text.

    Tree literals evaluate at their top level; sets are rejected because
    evaluation needs a single point.
    """
    value = parse_context_text(text)
    if isinstance(value, SimpleContext):
        return value
    if isinstance(value, ContextTree):
        return value.cursor().effective_context()
    if isinstance(value, ContextSet):
        raise CoreLucidError("evaluation context must be a single point, "
                             "not a context set")
    raise CoreLucidError(f"not a context: {text!r}")


def is_hybrid(text: str, extra_tags=()) -> bool:
    """True when any known segment marker starts a line."""
    try:
        split_segments(text, extra_tags)
        return True
    except CoreLucidError:
        return any(_line_is_marker(line, extra_tags)
                   for line in text.splitlines())


def _line_is_marker(line: str, extra_tags) -> bool:
    from .preprocessor import (IMPERATIVE_TAGS, INTENSIONAL_TAGS, TYPEDECL,
                               FUNCDECL, _classify_marker)
    tag = _classify_marker(line.rstrip("\n"))
    if tag is None:
        return False
    known = (IMPERATIVE_TAGS | INTENSIONAL_TAGS | {TYPEDECL, FUNCDECL}
             | {t.partition(":")[0].upper() for t in extra_tags})
    return tag in known


def registry_from_environment() -> Optional[ProviderRegistry]:
    path = os.environ.get(PROVIDERS_ENV_VAR)
    if not path:
        return None
    return load_manifest(path)


def parse_segment(segment: Segment, filename: Optional[str] = None,
                  dialect: Optional[str] = None) -> Expression:
    """Parse one intensional segment with file-accurate line numbers."""
    chosen = dialect or ("core" if segment.tag in CORE_DIALECT_TAGS
                         else "indexical")
    parse = parse_core if chosen == "core" else parse_surface
    return parse(segment.body, filename, first_line=segment.start_line + 1)


def parse_expression(text: str, dialect: str,
                     filename: Optional[str] = None) -> Expression:
    if dialect not in DIALECTS:
        raise CoreLucidError(f"unknown dialect {dialect!r}; pick one of "
                             + ", ".join(DIALECTS))
    parse = parse_core if dialect == "core" else parse_surface
    return parse(text, filename)


def load_program(text: str, options: PipelineOptions,
                 filename: Optional[str] = None):
    """(program, dictionary, parsed segments) for hybrid input; for bare
    expressions the program is None and a synthetic segment is returned."""
    if is_hybrid(text, options.extra_tags):
        program = split_segments(text, options.extra_tags)
        dictionary = build_dictionary(program)
        parsed = [(segment, parse_segment(segment, filename))
                  for segment in program.intensional()]
        return program, dictionary, parsed
    segment = Segment("EXPRESSION", text, start_line=0)
    ast = parse_expression(text, options.dialect, filename)
    return None, EMPTY_DICTIONARY, [(segment, ast)]


def _providers_for(dictionary: Dictionary,
                   options: PipelineOptions) -> Optional[BoundEnvironment]:
    if not dictionary.prototypes:
        return None
    registry = options.registry
    if registry is None:
        registry = registry_from_environment() or ProviderRegistry()
    return bind_providers(dictionary, registry)


def run_source(text: str, context: SimpleContext,
               options: PipelineOptions = None,
               filename: Optional[str] = None) -> RunOutcome:
    """Full pipeline over hybrid or bare-expression input."""
    options = options or PipelineOptions()
    program, dictionary, parsed = load_program(text, options, filename)
    providers = _providers_for(dictionary, options)

    results = []
    for segment, ast in parsed:
        core = translate_to_core(ast)
        report = typecheck_calls(core, dictionary)
        result = SegmentResult(segment.tag, segment.start_line, core, report)
        if report.ok:
            evaluator = Evaluator(options.engine_config(), providers=providers)
            result.value = evaluator.evaluate(core, context)
            result.stats = evaluator.stats()
            result.trace_lines = evaluator.trace_lines()
        results.append(result)
    return RunOutcome(program, dictionary, results)


def translate_source(text: str, options: PipelineOptions = None,
                     filename: Optional[str] = None) -> list:
    """Core-dialect text for each intensional segment (or the expression)."""
    options = options or PipelineOptions()
    _, _, parsed = load_program(text, options, filename)
    return [(segment.tag, to_text(translate_to_core(ast)))
            for segment, ast in parsed]


def check_source(text: str, options: PipelineOptions = None,
                 filename: Optional[str] = None):
    """(dictionary, per-segment type reports) without evaluating."""
    options = options or PipelineOptions()
    _, dictionary, parsed = load_program(text, options, filename)
    reports = [(segment.tag, typecheck_calls(translate_to_core(ast),
                                             dictionary))
               for segment, ast in parsed]
    return dictionary, reports


def format_value(value: CoreValue, filename: Optional[str] = None) -> str:
    """Render a result; specials point at their origin when known."""
    if is_special(value):
        prov = value.payload.provenance
        name = filename or prov.file or "<input>"
        if prov.line is not None:
            return f"{render(value)} at {name}:{prov.line}"
        return f"{render(value)} at {name}"
    return render(value)
