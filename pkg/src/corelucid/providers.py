"""Pluggable dispatch for procedural calls out of intensional code.

A provider stands in for a foreign-language runtime: it resolves a
declared prototype plus argument values to a result value.  The built-in
stub catalog covers tests and examples; a manifest file maps
`TAG.name = stub-id` lines onto it.  Real compiler backends are out of
scope by design.
"""

from __future__ import annotations

import re

from . import values
from .errors import MissingProvider, ProviderError, ResultTypeMismatch
from .preprocessor import Dictionary
from .typemap import FunctionPrototype
from .values import VOID, CoreValue

FOREIGN = "foreign"  # payload marker for provider-produced objects


def foreign_object(proto: FunctionPrototype, payload) -> CoreValue:
    """Opaque object result remembering which provider family made it."""
    return CoreValue(proto.return_type, (FOREIGN, proto.language_tag, payload))


def _foreign_payload(receiver: CoreValue):
    p = receiver.payload
    if isinstance(p, tuple) and len(p) == 3 and p[0] == FOREIGN:
        return p[2]
    return p


def lift(raw) -> CoreValue:
    """Accept plain Python results from ad-hoc stub closures."""
    if isinstance(raw, CoreValue):
        return raw
    if isinstance(raw, bool):
        return values.boolean(raw)
    if isinstance(raw, int):
        return values.integer(raw)
    if isinstance(raw, float):
        return values.double(raw)
    if isinstance(raw, str):
        return values.string_value(raw)
    if raw is None:
        return values.void_result()
    raise ProviderError(f"provider returned unusable value {raw!r}")


class StubProvider:
    """In-process provider with explicit name→callable bindings.

    Function stubs are called as fn(prototype, args); member stubs as
    fn(receiver, args).  All bindings are installed up front, so instances
    are safe to share across threads.
    """

    def __init__(self, tag: str, functions=None, members=None):
        self.tag = tag
        self.functions = dict(functions or {})
        self.members = dict(members or {})

    def binds_function(self, name: str) -> bool:
        return name in self.functions

    def call_function(self, proto: FunctionPrototype, args) -> CoreValue:
        return lift(self.functions[proto.name](proto, args))

    def binds_member(self, name: str) -> bool:
        return name in self.members

    def call_member(self, receiver: CoreValue, method: str, args) -> CoreValue:
        return lift(self.members[method](receiver, args))


class ProviderRegistry:
    """Language tag → provider, fixed after setup."""

    def __init__(self):
        self.providers: dict = {}

    def register(self, provider) -> "ProviderRegistry":
        self.providers[provider.tag] = provider
        return self

    def get(self, tag: str):
        return self.providers.get(tag)


class BoundEnvironment:
    """Adapter the evaluator consults for calls that miss every scope.

    Construction fails with MissingProvider unless every prototype's
    language tag has a provider that actually binds the name.
    """

    def __init__(self, dictionary: Dictionary, registry: ProviderRegistry):
        self.dictionary = dictionary
        self.registry = registry
        unbound = []
        for name, proto in dictionary.prototypes.items():
            provider = registry.get(proto.language_tag)
            if provider is None or not provider.binds_function(name):
                unbound.append(name)
        if unbound:
            raise MissingProvider(unbound)

    def binds_function(self, name: str) -> bool:
        return self.dictionary.resolve(name) is not None

    def call_function(self, name: str, args) -> CoreValue:
        proto = self.dictionary.resolve(name)
        provider = self.registry.get(proto.language_tag)
        value = provider.call_function(proto, list(args))
        return self._admit(proto, value)

    def _admit(self, proto: FunctionPrototype, value: CoreValue) -> CoreValue:
        if proto.return_type == VOID:
            # a void result stands for successful completion
            return values.TRUE
        if value.type != proto.return_type:
            raise ResultTypeMismatch(
                f"{proto.name} declared {proto.return_type}, provider "
                f"returned {value.type}")
        return value

    def _provider_for_member(self, receiver: CoreValue, method: str):
        p = receiver.payload
        if isinstance(p, tuple) and len(p) == 3 and p[0] == FOREIGN:
            provider = self.registry.get(p[1])
            if provider is not None and provider.binds_member(method):
                return provider
            return None
        for provider in self.registry.providers.values():
            if provider.binds_member(method):
                return provider
        return None

    def binds_member(self, method: str) -> bool:
        return any(p.binds_member(method)
                   for p in self.registry.providers.values())

    def call_member(self, receiver: CoreValue, method: str, args) -> CoreValue:
        provider = self._provider_for_member(receiver, method)
        if provider is None:
            raise ProviderError(
                f"no provider accepts member {method!r} on this receiver")
        return provider.call_member(receiver, method, list(args))


def bind_providers(dictionary: Dictionary,
                   registry: ProviderRegistry) -> BoundEnvironment:
    """Executable environment dispatching prototype calls to providers."""
    return BoundEnvironment(dictionary, registry)


# --- built-in stub catalog ----------------------------------------------------

def _numeric(value: CoreValue):
    if not values.is_numeric(value.type):
        raise ProviderError(f"stub needs a numeric argument, got {value.type}")
    return value.payload


def _stub_zero(proto, args):
    return values.integer(0)


def _stub_one(proto, args):
    return values.integer(1)


def _stub_true(proto, args):
    return values.TRUE


def _stub_void(proto, args):
    return values.void_result()


def _stub_echo(proto, args):
    return args[0]


def _stub_sum_object(proto, args):
    return foreign_object(proto, sum(_numeric(a) for a in args))


def _stub_float32_sum(proto, args):
    return values.single(sum(_numeric(a) for a in args))


def _stub_int_sum(proto, args):
    return values.integer(int(sum(_numeric(a) for a in args)))


def _member_int_value(receiver, args):
    return values.integer(int(_foreign_payload(receiver)))


BUILTIN_STUBS = {
    "zero": ("function", _stub_zero),
    "one": ("function", _stub_one),
    "true": ("function", _stub_true),
    "void": ("function", _stub_void),
    "echo": ("function", _stub_echo),
    "sum-object": ("function", _stub_sum_object),
    "float32-sum": ("function", _stub_float32_sum),
    "int-sum": ("function", _stub_int_sum),
    "int-value": ("member", _member_int_value),
}

_MANIFEST_RE = re.compile(
    r"([A-Za-z][A-Za-z0-9]*)\.([A-Za-z_]\w*)\s*=\s*([\w-]+)$")


def parse_manifest(text: str) -> ProviderRegistry:
    """Registry from `TAG.name = stub-id` lines; `#` starts a comment."""
    functions: dict = {}
    members: dict = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#")[0].strip()
        if not line:
            continue
        m = _MANIFEST_RE.match(line)
        if m is None:
            raise ProviderError(f"manifest line {number}: cannot parse {raw!r}")
        tag, name, stub_id = m.group(1).upper(), m.group(2), m.group(3)
        entry = BUILTIN_STUBS.get(stub_id)
        if entry is None:
            raise ProviderError(
                f"manifest line {number}: unknown stub id {stub_id!r}")
        kind, fn = entry
        bucket = functions if kind == "function" else members
        bucket.setdefault(tag, {})[name] = fn

    registry = ProviderRegistry()
    for tag in sorted(set(functions) | set(members)):
        registry.register(StubProvider(tag, functions.get(tag),
                                       members.get(tag)))
    return registry


def load_manifest(path: str) -> ProviderRegistry:
    with open(path, encoding="utf-8") as handle:
        return parse_manifest(handle.read())
