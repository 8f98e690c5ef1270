"""corelucid: demand-driven evaluator for a core intensional language.

The library layers are importable separately; this module re-exports the
surface most callers need: context values, parsing and translation, the
evaluator, hybrid program preprocessing, and the one-call pipeline.
"""

from .contexts import (
    ContextCursor,
    ContextSet,
    ContextTree,
    SimpleContext,
    override,
    parse_context_text,
)
from .engine import Evaluator, EvaluatorConfig, Warehouse, evaluate
from .errors import CoreLucidError
from .parser import parse_core, parse_surface
from .pipeline import (
    PipelineOptions,
    RunOutcome,
    check_source,
    format_value,
    parse_context_argument,
    run_source,
    translate_source,
)
from .preprocessor import (
    Dictionary,
    Segment,
    SegmentedProgram,
    build_dictionary,
    split_segments,
    typecheck_calls,
)
from .providers import (
    BUILTIN_STUBS,
    ProviderRegistry,
    StubProvider,
    bind_providers,
    load_manifest,
    parse_manifest,
)
from .syntax import is_core, to_data, to_text
from .translate import translate_to_core
from .typemap import FunctionPrototype, TypeMappingTable
from .values import (
    CoreType,
    CoreValue,
    is_special,
    render,
    special,
    typed_literal,
)

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_STUBS",
    "ContextCursor",
    "ContextSet",
    "ContextTree",
    "CoreLucidError",
    "CoreType",
    "CoreValue",
    "Dictionary",
    "Evaluator",
    "EvaluatorConfig",
    "FunctionPrototype",
    "PipelineOptions",
    "ProviderRegistry",
    "RunOutcome",
    "Segment",
    "SegmentedProgram",
    "SimpleContext",
    "StubProvider",
    "TypeMappingTable",
    "Warehouse",
    "bind_providers",
    "build_dictionary",
    "check_source",
    "evaluate",
    "format_value",
    "is_core",
    "is_special",
    "load_manifest",
    "override",
    "parse_context_argument",
    "parse_context_text",
    "parse_core",
    "parse_manifest",
    "parse_surface",
    "render",
    "run_source",
    "special",
    "split_segments",
    "to_data",
    "to_text",
    "translate_source",
    "translate_to_core",
    "typecheck_calls",
    "typed_literal",
]
