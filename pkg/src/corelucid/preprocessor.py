"""Hybrid program preprocessing.

A hybrid source file interleaves declaration, imperative, and intensional
segments behind `#TAG` marker lines.  This module splits such a file,
builds the typed symbol dictionary from the `#typedecl` and `#funcdecl`
preambles, and statically checks intensional call sites against that
dictionary.  Foreign bodies are kept as opaque text; only the declared
prototypes govern typing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import (
    DuplicateDeclSegment,
    DuplicateSymbol,
    MalformedPrototype,
    NoIntensionalSegment,
    SegmentError,
    UnknownForeignType,
    UnknownTag,
    UnknownTypeName,
)
from .syntax import (
    Apply,
    Expression,
    FunDef,
    Identifier,
    Literal,
    Where,
    children,
)
from .typemap import FunctionPrototype, TypeMappingTable
from .values import CoreType, VOID

TYPEDECL = "TYPEDECL"
FUNCDECL = "FUNCDECL"

IMPERATIVE_TAGS = frozenset(
    {"JAVA", "CPP", "FORTRAN", "PERL", "PYTHON"})
INTENSIONAL_TAGS = frozenset(
    {"GIPL", "LUCX", "JOOIP", "INDEXICALLUCID", "JLUCID", "OBJECTIVELUCID",
     "TENSORLUCID", "ONYX", "FORENSICLUCID", "TRANSLUCID"})

# prototypes backed by a URL rather than an in-file imperative segment
EMBED_TAG = "EMBED"

# core dialect segments need no translation step; everything else in the
# intensional family is parsed as the indexical surface dialect
CORE_DIALECT_TAGS = frozenset({"GIPL"})

_MARKER_RE = re.compile(r"#([A-Za-z][A-Za-z0-9]*)\s*$")
_UPPER_TAG_RE = re.compile(r"[A-Z][A-Z0-9]*$")


@dataclass(frozen=True)
class Segment:
    """One language-tagged chunk.  start_line is the marker's line number;
    the body starts on the following line and excludes the marker."""

    tag: str
    body: str
    start_line: int
    # marker line exactly as written, so reconstruction keeps the original
    # casing and spacing; empty for synthetic segments
    marker: str = ""

    @property
    def body_line_count(self) -> int:
        if not self.body:
            return 0
        return self.body.count("\n") + (0 if self.body.endswith("\n") else 1)

    @property
    def end_line(self) -> int:
        return self.start_line + self.body_line_count


@dataclass(frozen=True)
class SegmentedProgram:
    segments: tuple
    preamble: str = ""
    imperative_tags: frozenset = IMPERATIVE_TAGS

    def with_tag(self, tag: str) -> tuple:
        return tuple(s for s in self.segments if s.tag == tag)

    def declaration(self, tag: str) -> Optional[Segment]:
        found = self.with_tag(tag)
        return found[0] if found else None

    def intensional(self) -> tuple:
        return tuple(s for s in self.segments
                     if s.tag not in (TYPEDECL, FUNCDECL)
                     and s.tag not in self.imperative_tags
                     and s.tag != EMBED_TAG)

    def imperative(self) -> tuple:
        return tuple(s for s in self.segments
                     if s.tag in self.imperative_tags)

    def reconstruct(self) -> str:
        parts = [self.preamble]
        parts.extend((s.marker or f"#{s.tag}\n") + s.body
                     for s in self.segments)
        return "".join(parts)


def _classify_marker(line: str):
    """Tag name when the line is a segment marker, else None."""
    if not line.startswith("#"):
        return None
    m = _MARKER_RE.match(line)
    if m is None:
        return None
    word = m.group(1)
    if word.upper() in (TYPEDECL, FUNCDECL):
        return word.upper()
    if _UPPER_TAG_RE.match(word):
        return word
    return None


def _is_comment_or_blank(lines, start):
    """Consume blank lines and comments from `start`; returns the first
    index that is neither, for validating text ahead of the first marker."""
    i = start
    n = len(lines)
    while i < n:
        text = lines[i].strip()
        if not text or text.startswith("//"):
            i += 1
        elif text.startswith("/*"):
            while i < n and "*/" not in lines[i]:
                i += 1
            i += 1
        else:
            break
    return i


def split_segments(source: str, extra_tags=()) -> SegmentedProgram:
    """Split hybrid source into ordered language-tagged segments.

    extra_tags entries are `NAME` (intensional) or `NAME:imperative`.
    """
    imperative = set(IMPERATIVE_TAGS)
    known = IMPERATIVE_TAGS | INTENSIONAL_TAGS | {TYPEDECL, FUNCDECL}
    for entry in extra_tags:
        name, _, kind = entry.partition(":")
        name = name.upper()
        known = known | {name}
        if kind.lower() == "imperative":
            imperative.add(name)

    lines = source.splitlines(keepends=True)
    markers = []  # (index, tag)
    for i, raw in enumerate(lines):
        tag = _classify_marker(raw.rstrip("\n"))
        if tag is None:
            continue
        if tag not in known:
            raise UnknownTag(f"unknown segment tag #{tag}", line=i + 1)
        markers.append((i, tag))

    if not markers:
        raise NoIntensionalSegment("no segment markers in input")

    first = markers[0][0]
    stray = _is_comment_or_blank(lines, 0)
    if stray < first:
        raise SegmentError("only blank lines and comments may precede the "
                           "first segment marker", line=stray + 1)

    segments = []
    for n, (i, tag) in enumerate(markers):
        stop = markers[n + 1][0] if n + 1 < len(markers) else len(lines)
        body = "".join(lines[i + 1:stop])
        segments.append(Segment(tag, body, start_line=i + 1,
                                marker=lines[i]))

    for decl_tag in (TYPEDECL, FUNCDECL):
        if sum(1 for s in segments if s.tag == decl_tag) > 1:
            raise DuplicateDeclSegment(f"more than one #{decl_tag} segment")

    program = SegmentedProgram(tuple(segments), "".join(lines[:first]),
                               frozenset(imperative))
    if not program.intensional():
        raise NoIntensionalSegment("program has no intensional segment")
    return program


# --- symbol dictionary -----------------------------------------------------

_IDENT_RE = re.compile(r"[A-Za-z_]\w*$")


def _strip_line_comment(text: str) -> str:
    # `//` inside a quoted URL is not a comment
    quoted = False
    for i, ch in enumerate(text):
        if ch == '"':
            quoted = not quoted
        elif not quoted and ch == "/" and text[i:i + 2] == "//":
            return text[:i]
    return text
_PROTO_RE = re.compile(
    r"""^\s*
        (?P<ret>[A-Za-z_]\w*(?:\[\])*)\s+
        (?P<name>[A-Za-z_]\w*)\s*
        \((?P<params>[^()]*)\)\s*
        (?::\s*"(?P<url>[^"]*)"\s*:\s*(?P<alias>[A-Za-z_]\w*)\s*)?
        ;\s*$""",
    re.VERBOSE)


@dataclass(frozen=True)
class Dictionary:
    """Typed symbols declared by the preamble segments."""

    user_types: frozenset
    prototypes: dict  # name -> FunctionPrototype
    aliases: dict     # alias -> name

    def resolve(self, name: str) -> Optional[FunctionPrototype]:
        if name in self.prototypes:
            return self.prototypes[name]
        if name in self.aliases:
            return self.prototypes[self.aliases[name]]
        return None


EMPTY_DICTIONARY = Dictionary(frozenset(), {}, {})


def parse_typedecl(body: str, start_line: int = 1) -> frozenset:
    """User type names, one `name;` per line."""
    names = []
    for offset, raw in enumerate(body.splitlines()):
        text = _strip_line_comment(raw).strip()
        if not text:
            continue
        if not text.endswith(";"):
            raise MalformedPrototype("type name must end with ';'",
                                     start_line + offset)
        name = text[:-1].strip()
        if not _IDENT_RE.match(name):
            raise MalformedPrototype(f"bad type name {name!r}",
                                     start_line + offset)
        if name in names:
            raise DuplicateSymbol(f"type {name!r} declared twice")
        names.append(name)
    return frozenset(names)


def parse_funcdecl(body: str, user_types=frozenset(),
                   table: TypeMappingTable = None,
                   start_line: int = 1) -> list:
    """Prototypes declared as `retType name(paramType,*);` with an optional
    `:"URL":alias` suffix ahead of the semicolon."""
    table = table or TypeMappingTable.with_defaults()
    for name in user_types:
        table.register_user_type("JAVA", name)

    def resolve(token: str, line: int) -> CoreType:
        try:
            return table.map_foreign_return(token, "JAVA")
        except UnknownForeignType:
            raise UnknownTypeName(
                f"line {line}: {token!r} is neither a basic type nor "
                f"declared in the typedecl segment") from None

    prototypes = []
    for offset, raw in enumerate(body.splitlines()):
        text = _strip_line_comment(raw).strip()
        if not text:
            continue
        line = start_line + offset
        m = _PROTO_RE.match(text)
        if m is None:
            raise MalformedPrototype(
                f"cannot parse prototype {text!r}", line)
        params_text = m.group("params").strip()
        params = tuple(resolve(p.strip(), line)
                       for p in params_text.split(",")) if params_text else ()
        url = m.group("url")
        prototypes.append(FunctionPrototype(
            name=m.group("name"),
            return_type=resolve(m.group("ret"), line),
            param_types=params,
            language_tag=EMBED_TAG if url else "",
            source_url=url,
            alias=m.group("alias"),
            line=line,
        ))
    return prototypes


def _definition_tag(name: str, program: SegmentedProgram) -> str:
    """Imperative segment whose body defines `name`, by token scan."""
    pattern = re.compile(rf"\b{re.escape(name)}\s*\(")
    for segment in program.imperative():
        if pattern.search(segment.body):
            return segment.tag
    return ""


def build_dictionary(program: SegmentedProgram,
                     table: TypeMappingTable = None) -> Dictionary:
    """Symbols from the declaration segments, with each prototype tagged by
    the imperative segment that defines it (or EMBED for URL-backed ones)."""
    typedecl = program.declaration(TYPEDECL)
    user_types = (parse_typedecl(typedecl.body, typedecl.start_line + 1)
                  if typedecl else frozenset())

    funcdecl = program.declaration(FUNCDECL)
    declared = (parse_funcdecl(funcdecl.body, user_types, table,
                               funcdecl.start_line + 1)
                if funcdecl else [])

    prototypes = {}
    aliases = {}
    for proto in declared:
        if proto.name in prototypes or proto.name in user_types:
            raise DuplicateSymbol(f"symbol {proto.name!r} declared twice")
        if not proto.language_tag:
            proto = replace(proto,
                            language_tag=_definition_tag(proto.name, program))
        prototypes[proto.name] = proto
        if proto.alias:
            if proto.alias in aliases or proto.alias in prototypes:
                raise DuplicateSymbol(f"alias {proto.alias!r} clashes")
            aliases[proto.alias] = proto.name
    for alias in aliases:
        if alias in prototypes:
            raise DuplicateSymbol(f"alias {alias!r} clashes")
    return Dictionary(user_types, prototypes, aliases)


# --- static call checking ----------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    kind: str  # ArityMismatch | TypeMismatch | UnknownFunction
    message: str
    line: Optional[int] = None
    column: Optional[int] = None

    def __str__(self):
        where = f"{self.line}:{self.column}: " if self.line else ""
        return f"{where}{self.kind}: {self.message}"


@dataclass
class TypeReport:
    """Per-call return-type annotations plus collected diagnostics."""

    annotations: list = field(default_factory=list)  # (Apply node, CoreType)
    diagnostics: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    def type_of(self, node) -> Optional[CoreType]:
        for known, core_type in self.annotations:
            if known is node:
                return core_type
        return None


def _static_type(node, dictionary: Dictionary) -> Optional[CoreType]:
    """Type known without evaluation: literals and known-prototype calls.
    Identifiers and other intensional expressions check against anything."""
    if isinstance(node, Literal):
        return node.value.type
    if isinstance(node, Apply) and isinstance(node.callee, Identifier):
        proto = dictionary.resolve(node.callee.name)
        if proto is not None:
            return proto.return_type
    return None


def typecheck_calls(e: Expression, dictionary: Dictionary) -> TypeReport:
    """Check every call site that names a declared prototype."""
    report = TypeReport()

    def at(node):
        loc = getattr(node, "location", None)
        return (loc.line, loc.column) if loc else (None, None)

    def walk(node, bound: frozenset):
        if isinstance(node, Where):
            names = set(bound)
            for decl in node.declarations:
                if isinstance(decl, FunDef):
                    names.add(decl.name)
                    names.update(decl.params)
                elif hasattr(decl, "name"):
                    names.add(decl.name)
                else:
                    names.add(decl.decl.name)
            bound = frozenset(names)
        elif isinstance(node, Apply) and isinstance(node.callee, Identifier):
            check_call(node, bound)
        for child in children(node):
            walk(child, bound)

    def check_call(node, bound):
        name = node.callee.name
        proto = dictionary.resolve(name)
        line, column = at(node)
        if proto is None:
            if name not in bound:
                report.diagnostics.append(Diagnostic(
                    "UnknownFunction",
                    f"{name!r} matches no prototype, alias, or "
                    f"where-clause function", line, column))
            return
        if len(node.args) != len(proto.param_types):
            report.diagnostics.append(Diagnostic(
                "ArityMismatch",
                f"{name} expects {len(proto.param_types)} arguments, "
                f"got {len(node.args)}", line, column))
            return
        for position, (arg, expected) in enumerate(
                zip(node.args, proto.param_types), start=1):
            actual = _static_type(arg, dictionary)
            if actual is not None and actual != expected:
                report.diagnostics.append(Diagnostic(
                    "TypeMismatch",
                    f"{name} argument {position}: expected {expected}, "
                    f"got {actual}", line, column))
        report.annotations.append((node, proto.return_type))

    walk(e, frozenset())
    return report


def prototype_result_is_void(proto: FunctionPrototype) -> bool:
    return proto.return_type == VOID
