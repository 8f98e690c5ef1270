"""First-class context values: points, sets, and hierarchical trees.

A *simple context* is a finite map from dimension names to tags (a point in
the multidimensional space).  A *context set* is a finite set of points
denoting an area.  A *context tree* nests contexts: leaves are tags, inner
nodes are sub-contexts, and every node may carry a default tag so the tree
is evaluable at any level, not only at its leaves.

All values here are immutable after construction and hashable; iteration and
serialization order is canonical (sorted by dimension name).
"""

from __future__ import annotations

import json
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

from .errors import (
    AtRoot,
    ContextSyntaxError,
    InvalidDimensionName,
    InvalidTag,
    NoSuchChild,
)

INT64_MIN = -(2 ** 63)
INT64_MAX = 2 ** 63 - 1

_DIMENSION_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

#: A tag is a signed 64-bit integer or a character string.  An integer tag
#: never compares equal to a string tag, even when the string spells the
#: integer (guaranteed by Python's int/str disjointness).
Tag = int | str


def check_dimension_name(name: str) -> str:
    if not isinstance(name, str) or not _DIMENSION_RE.match(name):
        raise InvalidDimensionName(f"invalid dimension name: {name!r}")
    return name


def check_tag(value: Tag) -> Tag:
    # bool is an int subclass but booleans are not tags
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise InvalidTag(f"tag must be int or str, got {value!r}")
    if isinstance(value, int) and not INT64_MIN <= value <= INT64_MAX:
        raise InvalidTag(f"integer tag out of 64-bit range: {value}")
    return value


def format_tag(tag: Tag) -> str:
    if isinstance(tag, str):
        return json.dumps(tag)
    return str(tag)


@dataclass(frozen=True)
class DimensionDecl:
    """A declared dimension with an optional default tag.

    When no default is declared the implicit default is integer 0.
    """

    name: str
    default_tag: Tag | None = None

    def __post_init__(self):
        check_dimension_name(self.name)
        if self.default_tag is not None:
            check_tag(self.default_tag)

    @property
    def effective_default(self) -> Tag:
        return 0 if self.default_tag is None else self.default_tag


class SimpleContext(Mapping):
    """An immutable point in the context space: dimension name -> tag."""

    __slots__ = ("_entries", "_index")

    def __init__(self, bindings: Mapping[str, Tag] | Iterable[tuple[str, Tag]] = ()):
        items = bindings.items() if isinstance(bindings, Mapping) else bindings
        index: dict[str, Tag] = {}
        for name, tag in items:
            check_dimension_name(name)
            check_tag(tag)
            index[name] = tag
        entries = tuple(sorted(index.items()))
        object.__setattr__(self, "_entries", entries)
        object.__setattr__(self, "_index", dict(entries))

    def __getitem__(self, name: str) -> Tag:
        return self._index[name]

    def __iter__(self):
        return iter(name for name, _ in self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __hash__(self) -> int:
        return hash(self._entries)

    def __eq__(self, other) -> bool:
        if isinstance(other, SimpleContext):
            return self._entries == other._entries
        return NotImplemented

    def __repr__(self) -> str:
        return f"SimpleContext({dict(self._entries)!r})"

    def __str__(self) -> str:
        inner = ", ".join(f"{d}:{format_tag(t)}" for d, t in self._entries)
        return "{" + inner + "}"

    @property
    def entries(self) -> tuple[tuple[str, Tag], ...]:
        return self._entries

    def restrict(self, dims: Iterable[str]) -> "SimpleContext":
        wanted = set(dims)
        return SimpleContext((d, t) for d, t in self._entries if d in wanted)

    def to_json_value(self):
        return dict(self._entries)

    @classmethod
    def from_json_value(cls, obj) -> "SimpleContext":
        if not isinstance(obj, dict):
            raise InvalidTag(f"expected JSON object for context, got {obj!r}")
        return cls(obj)

    def serialize(self) -> str:
        return json.dumps(self.to_json_value(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def deserialize(cls, text: str) -> "SimpleContext":
        return cls.from_json_value(json.loads(text))


EMPTY_CONTEXT = SimpleContext()


def override(lower: SimpleContext, upper: SimpleContext) -> SimpleContext:
    """Right-biased refinement: every binding of `upper` wins; bindings of
    `lower` survive only for dimensions absent from `upper`."""
    if not lower:
        return upper
    if not upper:
        return lower
    merged = dict(lower.entries)
    merged.update(upper.entries)
    return SimpleContext(merged)


def lookup_tag(ctx: SimpleContext, dim: str,
               decls: Iterable[DimensionDecl] = ()) -> Tag:
    """Tag of `dim` in `ctx`, falling back to the declared default and then
    to the implicit default of integer 0."""
    try:
        return ctx[dim]
    except KeyError:
        pass
    for decl in decls:
        if decl.name == dim:
            return decl.effective_default
    return 0


class ContextSet:
    """An immutable finite set of simple contexts (a context area).

    Elements may range over different dimension sets; duplicates collapse on
    construction.
    """

    __slots__ = ("_elements",)

    def __init__(self, elements: Iterable[SimpleContext] = ()):
        elems = []
        for e in elements:
            if not isinstance(e, SimpleContext):
                e = SimpleContext(e)
            elems.append(e)
        object.__setattr__(self, "_elements", frozenset(elems))

    @property
    def elements(self) -> frozenset:
        return self._elements

    def union(self, other: "ContextSet") -> "ContextSet":
        return ContextSet(self._elements | other._elements)

    def intersect(self, other: "ContextSet") -> "ContextSet":
        return ContextSet(self._elements & other._elements)

    def difference(self, other: "ContextSet") -> "ContextSet":
        return ContextSet(self._elements - other._elements)

    __or__ = union
    __and__ = intersect
    __sub__ = difference

    def __contains__(self, item) -> bool:
        return item in self._elements

    def __iter__(self):
        # canonical order: sorted by serialized form
        return iter(sorted(self._elements, key=lambda c: c.entries))

    def __len__(self) -> int:
        return len(self._elements)

    def __hash__(self) -> int:
        return hash(self._elements)

    def __eq__(self, other) -> bool:
        if isinstance(other, ContextSet):
            return self._elements == other._elements
        return NotImplemented

    def __repr__(self) -> str:
        return f"ContextSet({sorted(self._elements, key=lambda c: c.entries)!r})"

    def __str__(self) -> str:
        return "{" + ",".join(str(c) for c in self) + "}"

    def to_json_value(self):
        return [c.to_json_value() for c in self]

    @classmethod
    def from_json_value(cls, obj) -> "ContextSet":
        return cls(SimpleContext.from_json_value(e) for e in obj)

    def serialize(self) -> str:
        return json.dumps(self.to_json_value(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def deserialize(cls, text: str) -> "ContextSet":
        return cls.from_json_value(json.loads(text))


# reserved key for node defaults in the JSON form of a tree; not a valid
# dimension name, so it can never collide with a child entry
_DEFAULT_KEY = "@default"


class ContextTree:
    """A bi-directional hierarchical context.

    Children map dimension names to either a tag (leaf) or a nested
    ContextTree.  Nodes may carry a default tag, which stands in for the
    whole subtree when the context is viewed from the enclosing node.  Child
    nodes passed to the constructor are copied, which keeps every node owned
    by exactly one parent and makes cycles impossible.
    """

    __slots__ = ("_default", "_children", "_parent")

    def __init__(self, children: Mapping[str, object] | Iterable[tuple[str, object]] = (),
                 default: Tag | None = None):
        if default is not None:
            check_tag(default)
        items = children.items() if isinstance(children, Mapping) else children
        built: dict[str, object] = {}
        for name, child in items:
            check_dimension_name(name)
            if isinstance(child, ContextTree):
                built[name] = child._clone()
            elif isinstance(child, Mapping):
                built[name] = ContextTree(child)
            else:
                built[name] = check_tag(child)
        object.__setattr__(self, "_default", default)
        object.__setattr__(self, "_children", dict(sorted(built.items())))
        object.__setattr__(self, "_parent", None)
        for name, child in self._children.items():
            if isinstance(child, ContextTree):
                object.__setattr__(child, "_parent", (self, name))

    def _clone(self) -> "ContextTree":
        clone = ContextTree.__new__(ContextTree)
        object.__setattr__(clone, "_default", self._default)
        object.__setattr__(clone, "_parent", None)
        children = {}
        for name, child in self._children.items():
            if isinstance(child, ContextTree):
                sub = child._clone()
                object.__setattr__(sub, "_parent", (clone, name))
                children[name] = sub
            else:
                children[name] = child
        object.__setattr__(clone, "_children", children)
        return clone

    @property
    def default(self) -> Tag | None:
        return self._default

    @property
    def children(self) -> Mapping[str, object]:
        return dict(self._children)

    @property
    def parent(self) -> tuple["ContextTree", str] | None:
        """(enclosing node, dimension this node hangs under), or None at root."""
        return self._parent

    def child(self, name: str):
        return self._children[name]

    def _signature(self):
        return (self._default,
                tuple((n, c._signature() if isinstance(c, ContextTree) else c)
                      for n, c in self._children.items()))

    def __eq__(self, other) -> bool:
        if isinstance(other, ContextTree):
            return self._signature() == other._signature()
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._signature())

    def __repr__(self) -> str:
        return f"ContextTree({self._children_repr()})"

    def _children_repr(self) -> str:
        parts = []
        if self._default is not None:
            parts.append(f"default={self._default!r}")
        parts.append(repr(self._children))
        return ", ".join(parts)

    def __str__(self) -> str:
        parts = []
        if self._default is not None:
            parts.append(f"@:{format_tag(self._default)}")
        for name, child in self._children.items():
            if isinstance(child, ContextTree):
                parts.append(f"{name}:{child}")
            else:
                parts.append(f"{name}:{format_tag(child)}")
        return "{" + ", ".join(parts) + "}"

    def to_json_value(self):
        obj: dict[str, object] = {}
        if self._default is not None:
            obj[_DEFAULT_KEY] = self._default
        for name, child in self._children.items():
            obj[name] = child.to_json_value() if isinstance(child, ContextTree) else child
        return obj

    @classmethod
    def from_json_value(cls, obj) -> "ContextTree":
        if not isinstance(obj, dict):
            raise InvalidTag(f"expected JSON object for tree, got {obj!r}")
        default = obj.get(_DEFAULT_KEY)
        children: dict[str, object] = {}
        for name, child in obj.items():
            if name == _DEFAULT_KEY:
                continue
            children[name] = (cls.from_json_value(child)
                              if isinstance(child, dict) else child)
        return cls(children, default=default)

    def serialize(self) -> str:
        return json.dumps(self.to_json_value(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def deserialize(cls, text: str) -> "ContextTree":
        return cls.from_json_value(json.loads(text))

    def cursor(self) -> "ContextCursor":
        return ContextCursor(self, ())


@dataclass(frozen=True)
class ContextCursor:
    """A position inside a context tree, addressed by the dimension path from
    the root.  Cursors are cheap value objects; navigation never mutates the
    tree."""

    root: ContextTree
    path: tuple[str, ...] = ()

    @property
    def node(self) -> ContextTree:
        node = self.root
        for name in self.path:
            node = node.child(name)
        return node

    def descend(self, dim: str) -> "ContextCursor":
        node = self.node
        try:
            child = node.child(dim)
        except KeyError:
            raise NoSuchChild(f"no child context under dimension {dim!r}") from None
        if not isinstance(child, ContextTree):
            raise NoSuchChild(f"dimension {dim!r} is a leaf tag, not a subtree")
        return ContextCursor(self.root, self.path + (dim,))

    def ascend(self) -> "ContextCursor":
        if not self.path:
            raise AtRoot("cannot ascend above the tree root")
        return ContextCursor(self.root, self.path[:-1])

    def effective_context(self) -> SimpleContext:
        """The point visible at this node: leaf children contribute their
        tag; subtree children contribute their node default, if any."""
        bindings = {}
        for name, child in self.node.children.items():
            if isinstance(child, ContextTree):
                if child.default is not None:
                    bindings[name] = child.default
            else:
                bindings[name] = child
        return SimpleContext(bindings)


# --- textual context literals -------------------------------------------------
#
# The forms accepted here are the ones used on the command line and in
# configuration: `{d:1, e:"x"}` for points, `{{d:1},{d:2}}` for sets, and
# nested braces for trees, e.g. `{app:{cfg:{lang:"en"}}}`.  Inside tree
# braces an optional `@:tag` entry gives the node default, mirroring the
# JSON form.

class _LiteralScanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str):
        raise ContextSyntaxError(f"{message} (at offset {self.pos})", self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def accept(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def ident(self) -> str:
        self.skip_ws()
        m = re.match(r"[A-Za-z_][A-Za-z0-9_]*", self.text[self.pos:])
        if not m:
            self.error("expected dimension name")
        self.pos += m.end()
        return m.group(0)

    def tag(self) -> Tag:
        self.skip_ws()
        if self.peek() == '"':
            m = re.match(r'"(?:[^"\\]|\\.)*"', self.text[self.pos:])
            if not m:
                self.error("unterminated string tag")
            self.pos += m.end()
            return json.loads(m.group(0))
        m = re.match(r"[+-]?\d+", self.text[self.pos:])
        if not m:
            self.error("expected integer or string tag")
        self.pos += m.end()
        return check_tag(int(m.group(0)))


def parse_context_text(text: str) -> SimpleContext | ContextSet | ContextTree:
    """Parse a textual context literal into a point, set, or tree."""
    scanner = _LiteralScanner(text)
    value = _parse_braced(scanner)
    scanner.skip_ws()
    if scanner.pos != len(scanner.text):
        scanner.error("trailing characters after context literal")
    return value


def _parse_braced(s: _LiteralScanner):
    s.expect("{")
    if s.accept("}"):
        return SimpleContext()
    if s.peek() == "{":  # a set of points
        elements = [_parse_point_element(s)]
        while s.accept(","):
            elements.append(_parse_point_element(s))
        s.expect("}")
        return ContextSet(elements)

    entries: list[tuple[str, object]] = []
    default: Tag | None = None
    is_tree = False
    while True:
        if s.accept("@"):
            s.expect(":")
            default = s.tag()
            is_tree = True
        else:
            name = s.ident()
            s.expect(":")
            if s.peek() == "{":
                entries.append((name, _parse_subtree(s)))
                is_tree = True
            else:
                entries.append((name, s.tag()))
        if not s.accept(","):
            break
    s.expect("}")
    if is_tree:
        return ContextTree(entries, default=default)
    return SimpleContext(entries)  # type: ignore[arg-type]


def _parse_point_element(s: _LiteralScanner) -> SimpleContext:
    value = _parse_braced(s)
    if not isinstance(value, SimpleContext):
        s.error("context set elements must be simple contexts")
    return value


def _parse_subtree(s: _LiteralScanner) -> ContextTree:
    value = _parse_braced(s)
    if isinstance(value, SimpleContext):
        return ContextTree(dict(value))
    if isinstance(value, ContextTree):
        return value
    s.error("nested context must be a point or tree, not a set")
    raise AssertionError  # unreachable
