"""HTTP service exposing the evaluation pipeline.

Each endpoint wraps one pipeline entry point; program errors map to 400
responses carrying the error kind and source position.  Provider stubs
come from manifest text in the request, never from server-side state.
"""

from __future__ import annotations

from typing import Literal, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .errors import CoreLucidError
from .pipeline import (
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
from .providers import parse_manifest
from .syntax import to_data, to_text
from .values import is_special

REQUEST_NAME = "<request>"


class SourceRequest(BaseModel):
    source: str
    dialect: Literal["core", "indexical"] = "indexical"
    tags: list[str] = Field(default_factory=list)

    def options(self, **extra) -> PipelineOptions:
        return PipelineOptions(dialect=self.dialect,
                               extra_tags=tuple(self.tags), **extra)


class RunRequest(SourceRequest):
    context: str = "{}"
    eager_mode: Optional[Literal["context", "dimension"]] = None
    max_depth: Optional[int] = Field(default=None, ge=1)
    trace: bool = False
    manifest: Optional[str] = None

    def options(self) -> PipelineOptions:
        eagerness = None
        if self.eager_mode:
            eagerness = {"context": "contextEager",
                         "dimension": "dimensionEager"}[self.eager_mode]
        registry = parse_manifest(self.manifest) if self.manifest else None
        return super().options(eagerness=eagerness, max_depth=self.max_depth,
                               trace=self.trace, registry=registry)


class SegmentInfo(BaseModel):
    tag: str
    start: int
    end: int


class SegmentsResponse(BaseModel):
    segments: list[SegmentInfo]


class ParsedSegment(BaseModel):
    tag: str
    ast: dict


class ParseResponse(BaseModel):
    segments: list[ParsedSegment]


class TranslatedSegment(BaseModel):
    tag: str
    core: str


class TranslateResponse(BaseModel):
    segments: list[TranslatedSegment]


class PrototypeInfo(BaseModel):
    name: str
    returns: str
    params: list[str]
    tag: str
    url: Optional[str]
    alias: Optional[str]


class AnnotationInfo(BaseModel):
    line: int
    column: int
    expr: str
    type: str


class DiagnosticInfo(BaseModel):
    kind: str
    message: str
    line: Optional[int]
    column: Optional[int]


class SegmentReport(BaseModel):
    tag: str
    ok: bool
    annotations: list[AnnotationInfo]
    diagnostics: list[DiagnosticInfo]


class CheckResponse(BaseModel):
    types: list[str]
    functions: list[PrototypeInfo]
    aliases: dict[str, str]
    segments: list[SegmentReport]


class SegmentValue(BaseModel):
    tag: str
    ok: bool
    value: Optional[str]
    special: bool
    diagnostics: list[DiagnosticInfo]
    stats: dict[str, int]
    trace: list[str]
    trace_events: int


class RunResponse(BaseModel):
    ok: bool
    results: list[SegmentValue]


def _prototype_info(proto) -> PrototypeInfo:
    return PrototypeInfo(
        name=proto.name,
        returns=str(proto.return_type),
        params=[str(t) for t in proto.param_types],
        tag=proto.language_tag,
        url=proto.source_url,
        alias=proto.alias)


def _report_model(tag, report) -> SegmentReport:
    return SegmentReport(
        tag=tag,
        ok=report.ok,
        annotations=[
            AnnotationInfo(line=node.location.line,
                           column=node.location.column,
                           expr=to_text(node), type=str(kind))
            for node, kind in report.annotations],
        diagnostics=[
            DiagnosticInfo(kind=d.kind, message=d.message,
                           line=d.line, column=d.column)
            for d in report.diagnostics])


def create_app() -> FastAPI:
    app = FastAPI(title="corelucid",
                  description="Context-aware dataflow evaluation")

    @app.exception_handler(CoreLucidError)
    async def program_error(request: Request, exc: CoreLucidError):
        detail = {"kind": type(exc).__name__, "message": str(exc)}
        line = getattr(exc, "line", None)
        if line is not None:
            detail["line"] = line
        return JSONResponse(status_code=400, content={"error": detail})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/segments", response_model=SegmentsResponse)
    def segments(request: SourceRequest):
        tags = tuple(request.tags)
        if is_hybrid(request.source, tags):
            found = split_segments(request.source, tags).segments
        else:
            found = (Segment("EXPRESSION", request.source, start_line=0),)
        return SegmentsResponse(segments=[
            SegmentInfo(tag=s.tag,
                        start=s.start_line if s.marker else s.start_line + 1,
                        end=max(s.end_line, 1))
            for s in found])

    @app.post("/parse", response_model=ParseResponse)
    def parse(request: SourceRequest):
        _, _, parsed = load_program(request.source, request.options(),
                                    REQUEST_NAME)
        return ParseResponse(segments=[
            ParsedSegment(tag=segment.tag, ast=to_data(ast))
            for segment, ast in parsed])

    @app.post("/translate", response_model=TranslateResponse)
    def translate(request: SourceRequest):
        translated = translate_source(request.source, request.options(),
                                      REQUEST_NAME)
        return TranslateResponse(segments=[
            TranslatedSegment(tag=tag, core=core)
            for tag, core in translated])

    @app.post("/check", response_model=CheckResponse)
    def check(request: SourceRequest):
        dictionary, reports = check_source(request.source, request.options(),
                                           REQUEST_NAME)
        return CheckResponse(
            types=sorted(dictionary.user_types),
            functions=[_prototype_info(p) for _, p in
                       sorted(dictionary.prototypes.items())],
            aliases=dict(sorted(dictionary.aliases.items())),
            segments=[_report_model(tag, report)
                      for tag, report in reports])

    @app.post("/run", response_model=RunResponse)
    def run(request: RunRequest):
        context = parse_context_argument(request.context)
        outcome = run_source(request.source, context, request.options(),
                             REQUEST_NAME)
        results = []
        for result in outcome.results:
            ok = result.report.ok and result.value is not None \
                and not is_special(result.value)
            results.append(SegmentValue(
                tag=result.tag,
                ok=ok,
                value=(format_value(result.value, REQUEST_NAME)
                       if result.value is not None else None),
                special=(result.value is not None
                         and is_special(result.value)),
                diagnostics=[
                    DiagnosticInfo(kind=d.kind, message=d.message,
                                   line=d.line, column=d.column)
                    for d in result.report.diagnostics],
                stats=result.stats,
                trace=result.trace_lines,
                trace_events=len(result.trace_lines)))
        return RunResponse(ok=all(r.ok for r in results), results=results)

    return app


app = create_app()
