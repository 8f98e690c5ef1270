"""Demand-driven (eductive) evaluator with a write-once warehouse.

Evaluation of an expression at a context proceeds by issuing demands for
variable values.  Each demand records which dimensions were actually
queried while computing the value (its dynamic rank), and the warehouse
caches the value under the projection of the context onto exactly those
dimensions.  A later demand hits the cache when the current context agrees
with a stored projection on every recorded dimension, regardless of the
other dimensions.

Recorded projections materialize the tag a `#d` query actually returned,
including declared or implicit defaults, so a hit can never confuse a
defaulted tag with a bound one.
"""

from __future__ import annotations

import json
import sys
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import values
from .contexts import (
    ContextSet,
    ContextTree,
    DimensionDecl,
    SimpleContext,
    lookup_tag,
    override,
)
from .errors import (
    BudgetExceeded,
    DepthExceeded,
    NotCoreExpression,
    WarehouseConflict,
)
from .syntax import (
    Apply,
    BinaryOp,
    Conditional,
    ContextLiteral,
    ContextSetLiteral,
    ContextSwitch,
    DimDecl,
    Expression,
    FunDef,
    Identifier,
    Literal,
    MemberCall,
    SurfaceOp,
    TagQuery,
    TreeLiteral,
    UnaryOp,
    VarDef,
    Where,
    children,
)
from .values import CoreValue, Provenance, is_special

CONTEXT_EAGER = "contextEager"
DIMENSION_EAGER = "dimensionEager"


@dataclass
class EvaluatorConfig:
    """Evaluation knobs.

    eagerness picks the context-literal evaluation order; max_depth bounds
    demand/application nesting (runaway recursion raises DepthExceeded, a
    hard error distinct from in-language specials); eval_budget, when set,
    bounds the total number of demands issued.  cache_enabled turns the
    warehouse off entirely, which must not change any result.
    """

    eagerness: str = CONTEXT_EAGER
    max_depth: int = 2000
    trace_enabled: bool = False
    cache_enabled: bool = True
    eval_budget: Optional[int] = None
    # batching hook: called with (subject, context) on every cache miss so a
    # scheduler could group outstanding demands; no scheduler ships here
    demand_hook: Optional[Callable] = None

    def __post_init__(self):
        if self.max_depth <= 0:
            raise ValueError("max_depth must be positive")
        if self.eagerness not in (CONTEXT_EAGER, DIMENSION_EAGER):
            raise ValueError(f"unknown eagerness mode: {self.eagerness!r}")


@dataclass(frozen=True)
class TraceEvent:
    kind: str       # demandIssued | cacheHit | cacheMiss | store | dimensionQueried
    subject: str
    context: str    # canonical JSON, no embedded spaces
    depth: int

    def line(self) -> str:
        return f"{self.kind} {self.subject} {self.context} {self.depth}"


class Warehouse:
    """Write-once demand cache, shared across evaluations.

    Reads are unsynchronized; writes take a lock.  Overwriting a key with an
    equal value is a no-op; a different value is a hard error.
    """

    def __init__(self):
        self.entries = {}
        self.demands = 0
        self.hits = 0
        self.misses = 0
        self._lock = threading.Lock()

    def get(self, key):
        return self.entries.get(key)

    def store(self, key, value: CoreValue):
        with self._lock:
            existing = self.entries.get(key)
            if existing is None:
                self.entries[key] = value
            elif not (existing.type == value.type
                      and existing.payload == value.payload):
                raise WarehouseConflict(
                    f"warehouse key {key!r} already holds {existing}, "
                    f"refusing to overwrite with {value}")

    def stats(self) -> dict:
        return {"demands": self.demands, "hits": self.hits,
                "misses": self.misses, "entries": len(self.entries)}

    def stats_json(self) -> str:
        return json.dumps(self.stats(), sort_keys=True)


class _Binding:
    """A variable bound by a where-clause: its definition and the frame it
    closes over, plus every dimension set discovered so far."""

    __slots__ = ("name", "expr", "frame", "projections")

    def __init__(self, name, expr, frame):
        self.name = name
        self.expr = expr
        self.frame = frame
        self.projections = []  # frozensets of dimension names, oldest first

    def remember(self, dims: frozenset):
        if dims not in self.projections:
            self.projections.append(dims)


class _Thunk:
    """A call-by-name argument: an expression closed over the call site."""

    __slots__ = ("expr", "frame")

    def __init__(self, expr, frame):
        self.expr = expr
        self.frame = frame


class Frame:
    """One lexical scope: variables, functions, dimensions, parameters."""

    __slots__ = ("parent", "vars", "funcs", "dims", "params", "_children")

    def __init__(self, parent=None):
        self.parent = parent
        self.vars = {}
        self.funcs = {}
        self.dims = {}
        self.params = {}
        self._children = {}

    def child_for(self, node) -> "Frame":
        # one frame per where-node per enclosing frame: bindings do not
        # depend on the context, so demands through different contexts share
        # the frame and therefore the warehouse entries.  The node is kept
        # alongside the frame so its id cannot be recycled onto another node.
        cached = self._children.get(id(node))
        if cached is not None:
            return cached[1]
        frame = Frame(self)
        self._children[id(node)] = (node, frame)
        return frame

    def lookup(self, name):
        frame = self
        while frame is not None:
            if name in frame.params:
                return ("param", frame.params[name])
            if name in frame.vars:
                return ("var", frame.vars[name])
            if name in frame.funcs:
                return ("fun", frame.funcs[name])
            if name in frame.dims:
                return ("dim", frame.dims[name])
            frame = frame.parent
        return None

    def dimension_decl(self, name) -> Optional[DimensionDecl]:
        frame = self
        while frame is not None:
            if name in frame.dims:
                return frame.dims[name]
            frame = frame.parent
        return None

    def lookup_tag(self, context: SimpleContext, dim: str):
        decl = self.dimension_decl(dim)
        return lookup_tag(context, dim, (decl,) if decl else ())


class Evaluator:
    """One evaluation engine instance; reusable across expressions."""

    def __init__(self, config: EvaluatorConfig = None,
                 warehouse: Warehouse = None, providers=None,
                 constants: dict = None):
        self.config = config or EvaluatorConfig()
        self.warehouse = warehouse or Warehouse()
        self.providers = providers
        self.trace = []
        self.body_evals = {}      # variable name -> miss-evaluation count
        self.depth = 0
        self._dep_frames = []
        self.root = Frame()
        if constants:
            for name, value in constants.items():
                binding = _Binding(name, Literal(value), self.root)
                self.root.vars[name] = binding

    # --- public API ---------------------------------------------------------

    def evaluate(self, e: Expression, context: SimpleContext) -> CoreValue:
        _require_core(e)
        limit = min(20 * self.config.max_depth + 2000, 400_000)
        if sys.getrecursionlimit() < limit:
            sys.setrecursionlimit(limit)
        self._dep_frames.append({})
        try:
            return self._eval(e, context, self.root)
        finally:
            self._dep_frames.pop()

    def stats(self) -> dict:
        return self.warehouse.stats()

    def trace_lines(self) -> list:
        return [ev.line() for ev in self.trace]

    # --- dependency recording -------------------------------------------------

    def _record(self, dim: str, tag):
        if self._dep_frames:
            self._dep_frames[-1][dim] = tag

    def _merge(self, deps: dict, exclude=()):
        top = self._dep_frames[-1]
        for dim, tag in deps.items():
            if dim not in exclude:
                top[dim] = tag

    def _emit(self, kind, subject, context):
        # context is a SimpleContext or a projection entries tuple; text is
        # built only when tracing is on, keeping the demand path cheap
        if self.config.trace_enabled:
            if isinstance(context, SimpleContext):
                text = context.serialize()
            else:
                text = json.dumps(dict(context), sort_keys=True,
                                  separators=(",", ":"))
            self.trace.append(TraceEvent(kind, subject, text, self.depth))

    # --- evaluation -------------------------------------------------------------

    def _eval(self, e, c: SimpleContext, frame: Frame) -> CoreValue:
        if isinstance(e, Literal):
            return e.value
        if isinstance(e, Identifier):
            return self._eval_identifier(e, c, frame)
        if isinstance(e, TagQuery):
            return self._eval_tag_query(e, c, frame)
        if isinstance(e, BinaryOp):
            return self._eval_binary(e, c, frame)
        if isinstance(e, UnaryOp):
            return self._eval_unary(e, c, frame)
        if isinstance(e, Conditional):
            return self._eval_conditional(e, c, frame)
        if isinstance(e, ContextSwitch):
            return self._eval_switch(e, c, frame)
        if isinstance(e, ContextLiteral):
            ctx = self._eval_context_literal(e, c, frame)
            return ctx if isinstance(ctx, CoreValue) else values.context_value(ctx)
        if isinstance(e, ContextSetLiteral):
            return self._eval_set_literal(e, c, frame)
        if isinstance(e, TreeLiteral):
            return self._eval_tree_literal(e, c, frame)
        if isinstance(e, Where):
            return self._eval_where(e, c, frame)
        if isinstance(e, Apply):
            return self._eval_apply(e, c, frame)
        if isinstance(e, MemberCall):
            return self._eval_member(e, c, frame)
        if isinstance(e, SurfaceOp):
            raise NotCoreExpression(
                f"surface operator {e.op!r} reached the engine; translate first")
        raise NotCoreExpression(f"cannot evaluate node {type(e).__name__}")

    def _provenance(self, e, note=None) -> Provenance:
        loc = getattr(e, "location", None)
        if loc is None:
            return Provenance(note=note)
        return Provenance(None, loc.line, loc.column, note)

    # identifiers and demands

    def _eval_identifier(self, e: Identifier, c, frame) -> CoreValue:
        entry = frame.lookup(e.name)
        if entry is None:
            return values.special(
                "undecl", self._provenance(e, f"unbound identifier {e.name!r}"))
        kind, payload = entry
        if kind == "var":
            return self._demand(payload, c)
        if kind == "dim":
            return values.dimension_value(payload.name)
        if kind == "param":
            return self._eval(payload.expr, c, payload.frame)
        if kind == "fun":
            fundef, def_frame = payload
            closure = ("closure", fundef, def_frame)
            return CoreValue(values.FUNCTION, closure, fundef.name)
        raise AssertionError(kind)

    def _demand(self, binding: _Binding, c: SimpleContext) -> CoreValue:
        self.warehouse.demands += 1
        budget = self.config.eval_budget
        if budget is not None and self.warehouse.demands > budget:
            raise BudgetExceeded(f"demand budget of {budget} exhausted")
        self.depth += 1
        if self.depth > self.config.max_depth:
            self.depth -= 1
            raise DepthExceeded(
                f"demand depth exceeded {self.config.max_depth} "
                f"(likely unbounded recursion on {binding.name!r})")
        try:
            self._emit("demandIssued", binding.name, c)

            if self.config.cache_enabled:
                hit = self._probe(binding, c)
                if hit is not None:
                    self.warehouse.hits += 1
                    entries, value = hit
                    self._emit("cacheHit", binding.name, entries)
                    self._merge(dict(entries))
                    return value
                self.warehouse.misses += 1
                self._emit("cacheMiss", binding.name, c)
            if self.config.demand_hook is not None:
                self.config.demand_hook(binding.name, c)

            self.body_evals[binding.name] = self.body_evals.get(binding.name, 0) + 1
            self._dep_frames.append({})
            try:
                value = self._eval(binding.expr, c, binding.frame)
            finally:
                deps = self._dep_frames.pop()
            self._merge(deps)

            if self.config.cache_enabled:
                entries = tuple(sorted(deps.items()))
                binding.remember(frozenset(deps))
                self.warehouse.store((id(binding), entries), value)
                self._emit("store", binding.name, entries)
            return value
        finally:
            self.depth -= 1

    def _probe(self, binding: _Binding, c: SimpleContext):
        lookup = binding.frame.lookup_tag
        for dims in binding.projections:
            entries = tuple(sorted((d, lookup(c, d)) for d in dims))
            value = self.warehouse.get((id(binding), entries))
            if value is not None:
                return entries, value
        return None

    # tag queries

    def _eval_tag_query(self, e: TagQuery, c, frame) -> CoreValue:
        name = e.dimension
        entry = frame.lookup(name)
        if entry is not None:
            kind, payload = entry
            if kind == "dim":
                name = payload.name
            elif kind in ("var", "param"):
                # a variable or parameter may hold a first-class dimension
                if kind == "var":
                    value = self._demand(payload, c)
                else:
                    value = self._eval(payload.expr, c, payload.frame)
                if is_special(value):
                    return value
                if value.type.kind != values.K_DIMENSION:
                    return values.special("undefdim", self._provenance(
                        e, f"#{name} is not a dimension"))
                name = value.payload
            else:
                return values.special("undefdim", self._provenance(
                    e, f"#{name} is not a dimension"))
        tag = frame.lookup_tag(c, name)
        self._record(name, tag)
        self._emit("dimensionQueried", name, c)
        if isinstance(tag, str):
            return values.string_value(tag)
        return values.integer(tag)

    # operators

    def _eval_binary(self, e: BinaryOp, c, frame) -> CoreValue:
        if e.op in ("and", "or"):
            return self._eval_logical(e, c, frame)
        left = self._eval(e.lhs, c, frame)
        right = self._eval(e.rhs, c, frame)
        prov = self._provenance(e)
        if e.op in values.ARITH_OPS:
            return values.binary_arith(e.op, left, right, prov)
        return values.compare(e.op, left, right, prov)

    def _eval_logical(self, e: BinaryOp, c, frame) -> CoreValue:
        left = self._eval(e.lhs, c, frame)
        if is_special(left):
            return left
        lb = values.truth(left)
        if lb is None:
            return values.special("typeerr", self._provenance(
                e, f"{e.op} needs boolean operands, got {left.type}"))
        if e.op == "and" and not lb:
            return values.FALSE
        if e.op == "or" and lb:
            return values.TRUE
        right = self._eval(e.rhs, c, frame)
        if is_special(right):
            return right
        rb = values.truth(right)
        if rb is None:
            return values.special("typeerr", self._provenance(
                e, f"{e.op} needs boolean operands, got {right.type}"))
        return values.boolean(rb)

    def _eval_unary(self, e: UnaryOp, c, frame) -> CoreValue:
        v = self._eval(e.operand, c, frame)
        if e.op == "-":
            return values.negate(v, self._provenance(e))
        if e.op == "not":
            return values.logical_not(v, self._provenance(e))
        if e.op == "isspecial":
            return values.boolean(is_special(v, e.kind))
        raise NotCoreExpression(f"unknown unary operator {e.op!r}")

    def _eval_conditional(self, e: Conditional, c, frame) -> CoreValue:
        test = self._eval(e.test, c, frame)
        if is_special(test):
            return test
        b = values.truth(test)
        if b is None:
            return values.special("typeerr", self._provenance(
                e, f"conditional test must be boolean, got {test.type}"))
        branch = e.then_branch if b else e.else_branch
        return self._eval(branch, c, frame)

    # contexts

    def _eval_switch(self, e: ContextSwitch, c, frame) -> CoreValue:
        if isinstance(e.context_expr, ContextLiteral):
            ctx = self._eval_context_literal(e.context_expr, c, frame)
            if isinstance(ctx, CoreValue):  # a propagated special
                return ctx
        else:
            value = self._eval(e.context_expr, c, frame)
            if is_special(value):
                return value
            ctx = self._as_point(value, e)
            if isinstance(ctx, CoreValue):
                return ctx
        switched = override(c, ctx)
        self._dep_frames.append({})
        try:
            result = self._eval(e.body, switched, frame)
        finally:
            deps = self._dep_frames.pop()
        # dimensions pinned by the switch do not depend on the outer context
        self._merge(deps, exclude=set(ctx))
        return result

    def _as_point(self, value: CoreValue, e) -> object:
        if value.type.kind != values.K_CONTEXT:
            return values.special("typeerr", self._provenance(
                e, f"@ needs a context, got {value.type}"))
        payload = value.payload
        if isinstance(payload, SimpleContext):
            return payload
        if isinstance(payload, ContextTree):
            return payload.cursor().effective_context()
        if isinstance(payload, ContextSet):
            return values.special("typeerr", self._provenance(
                e, "@ needs a point context, not a context set"))
        raise AssertionError(type(payload))

    def _eval_dim_name(self, dim_expr, c, frame, site):
        """Dimension named by the left side of a context-literal pair."""
        if isinstance(dim_expr, Identifier):
            entry = frame.lookup(dim_expr.name)
            if entry is None:
                return dim_expr.name  # a free identifier names itself
        value = self._eval(dim_expr, c, frame)
        if is_special(value):
            return value
        if value.type.kind == values.K_DIMENSION:
            return value.payload
        if value.type.kind == values.K_IDENTIFIER:
            return value.payload
        return values.special("typeerr", self._provenance(
            site, f"context dimension must be a dimension, got {value.type}"))

    def _tag_of(self, value: CoreValue, site):
        if is_special(value):
            return value
        if values.is_integral(value.type):
            return value.payload
        if value.type.kind in (values.K_STRING, values.K_CHARACTER):
            return value.payload
        return values.special("typeerr", self._provenance(
            site, f"context tag must be an integer or string, got {value.type}"))

    def _eval_context_literal(self, e: ContextLiteral, c, frame):
        """Returns a SimpleContext, or a CoreValue special on failure."""
        bindings = {}
        if self.config.eagerness == CONTEXT_EAGER:
            for dim_expr, tag_expr in e.pairs:
                name = self._eval_dim_name(dim_expr, c, frame, e)
                if isinstance(name, CoreValue):
                    return name
                tag = self._tag_of(self._eval(tag_expr, c, frame), e)
                if isinstance(tag, CoreValue):
                    return tag
                bindings[name] = tag
        else:
            names = []
            for dim_expr, _ in e.pairs:
                name = self._eval_dim_name(dim_expr, c, frame, e)
                if isinstance(name, CoreValue):
                    return name
                names.append(name)
            for name, (_, tag_expr) in zip(names, e.pairs):
                tag = self._tag_of(self._eval(tag_expr, c, frame), e)
                if isinstance(tag, CoreValue):
                    return tag
                bindings[name] = tag
        return SimpleContext(bindings)

    def _eval_set_literal(self, e: ContextSetLiteral, c, frame) -> CoreValue:
        points = []
        for element in e.elements:
            ctx = self._eval_context_literal(element, c, frame)
            if isinstance(ctx, CoreValue):
                return ctx
            points.append(ctx)
        return values.context_value(ContextSet(points))

    def _eval_tree_literal(self, e: TreeLiteral, c, frame) -> CoreValue:
        built = self._build_tree(e, c, frame)
        if isinstance(built, CoreValue):
            return built
        return values.context_value(built)

    def _build_tree(self, e: TreeLiteral, c, frame):
        default = None
        if e.default is not None:
            default = self._tag_of(self._eval(e.default, c, frame), e)
            if isinstance(default, CoreValue):
                return default
        children = {}
        for dim_expr, child in e.entries:
            name = self._eval_dim_name(dim_expr, c, frame, e)
            if isinstance(name, CoreValue):
                return name
            if isinstance(child, TreeLiteral):
                sub = self._build_tree(child, c, frame)
                if isinstance(sub, CoreValue):
                    return sub
                children[name] = sub
            else:
                tag = self._tag_of(self._eval(child, c, frame), e)
                if isinstance(tag, CoreValue):
                    return tag
                children[name] = tag
        return ContextTree(children, default=default)

    # scopes and application

    def _eval_where(self, e: Where, c, frame) -> CoreValue:
        scope = frame.child_for(e)
        if not scope.vars and not scope.funcs and not scope.dims:
            for decl in e.declarations:
                if isinstance(decl, VarDef):
                    scope.vars[decl.name] = _Binding(decl.name, decl.expr, scope)
                elif isinstance(decl, FunDef):
                    scope.funcs[decl.name] = (decl, scope)
                elif isinstance(decl, DimDecl):
                    scope.dims[decl.decl.name] = decl.decl
        return self._eval(e.body, c, scope)

    def _eval_apply(self, e: Apply, c, frame) -> CoreValue:
        target = None
        if isinstance(e.callee, Identifier):
            entry = frame.lookup(e.callee.name)
            if entry is None:
                return self._call_provider(e.callee.name, e, c, frame)
            if entry[0] == "fun":
                target = entry[1]
        if target is None:
            value = self._eval(e.callee, c, frame)
            if is_special(value):
                return value
            if value.type.kind != values.K_FUNCTION or not isinstance(
                    value.payload, tuple) or value.payload[0] != "closure":
                return values.special("typeerr", self._provenance(
                    e, "callee is not a function"))
            target = (value.payload[1], value.payload[2])
        fundef, def_frame = target
        if len(e.args) != len(fundef.params):
            return values.special("typeerr", self._provenance(
                e, f"{fundef.name} expects {len(fundef.params)} arguments, "
                   f"got {len(e.args)}"))
        self.depth += 1
        if self.depth > self.config.max_depth:
            self.depth -= 1
            raise DepthExceeded(
                f"application depth exceeded {self.config.max_depth} "
                f"(likely unbounded recursion in {fundef.name!r})")
        try:
            call_frame = Frame(def_frame)
            for param, arg in zip(fundef.params, e.args):
                call_frame.params[param] = _Thunk(arg, frame)
            return self._eval(fundef.expr, c, call_frame)
        finally:
            self.depth -= 1

    def _call_provider(self, name: str, e: Apply, c, frame) -> CoreValue:
        if self.providers is not None and self.providers.binds_function(name):
            args = []
            for arg in e.args:
                v = self._eval(arg, c, frame)
                if is_special(v):
                    return v
                args.append(v)
            return self.providers.call_function(name, args)
        return values.special(
            "undecl", self._provenance(e, f"unbound identifier {name!r}"))

    def _eval_member(self, e: MemberCall, c, frame) -> CoreValue:
        receiver = self._eval(e.receiver, c, frame)
        if is_special(receiver):
            return receiver
        args = []
        for arg in e.args:
            v = self._eval(arg, c, frame)
            if is_special(v):
                return v
            args.append(v)
        if self.providers is not None and self.providers.binds_member(e.method):
            return self.providers.call_member(receiver, e.method, args)
        return values.special(
            "undecl", self._provenance(e, f"unbound member {e.method!r}"))


def _require_core(e: Expression):
    def walk(node):
        if isinstance(node, SurfaceOp):
            raise NotCoreExpression(
                f"surface operator {node.op!r} in input; translate first")
        for child in children(node):
            walk(child)

    walk(e)


def evaluate(e: Expression, context: SimpleContext, constants: dict = None,
             warehouse: Warehouse = None, config: EvaluatorConfig = None,
             providers=None):
    """Evaluate a core expression at a context; returns (value, warehouse)."""
    ev = Evaluator(config, warehouse, providers, constants)
    value = ev.evaluate(e, context)
    return value, ev.warehouse
