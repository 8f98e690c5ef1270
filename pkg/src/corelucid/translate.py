"""Rewrites surface stream operators into core @/# form.

Rules, over the operator's dimension d:

    first X   =>  X @ {d:0}
    next X    =>  X @ {d:#d+1}
    X fby Y   =>  if #d = 0 then X @ {d:0} else Y @ {d:#d-1}
    X wvr Y   =>  X @ {d:T} where T = U fby.d (U @ {d:T+1});
                               U = if Y then #d else next.d U; end
    X asa Y   =>  first.d (X wvr.d Y)
    X upon Y  =>  X @ {d:W} where W = 0 fby.d (if Y then W+1 else W); end

The where-encodings introduce only fresh variable names (never colliding
with names used in the program) and only operators that themselves expand
away, so the output contains no surface operators.  Translating an
already-core tree returns an equal tree.
"""

from __future__ import annotations

from dataclasses import replace

from .syntax import (
    Apply,
    BinaryOp,
    Conditional,
    ContextLiteral,
    ContextSetLiteral,
    ContextSwitch,
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
from .values import integer


def translate_to_core(e: Expression) -> Expression:
    """Remove every SurfaceOp node; idempotent on core trees."""
    return _Translator(_collect_names(e)).rewrite(e)


def _collect_names(e: Expression) -> set:
    names = set()

    def walk(node):
        if isinstance(node, Identifier):
            names.add(node.name)
        elif isinstance(node, Where):
            for d in node.declarations:
                if isinstance(d, VarDef):
                    names.add(d.name)
                elif isinstance(d, FunDef):
                    names.add(d.name)
                    names.update(d.params)
        for child in children(node):
            walk(child)

    walk(e)
    return names


class _Translator:
    def __init__(self, used_names: set):
        self.used = used_names
        self.counter = 0

    def fresh(self, stem: str) -> str:
        while True:
            self.counter += 1
            name = f"_{stem}{self.counter}"
            if name not in self.used:
                self.used.add(name)
                return name

    def rewrite(self, e: Expression) -> Expression:
        e = _map_children(e, self.rewrite)
        if isinstance(e, SurfaceOp):
            return self.rewrite(self.expand(e))
        return e

    def expand(self, e: SurfaceOp) -> Expression:
        d = e.dimension
        loc = e.location
        if e.op == "first":
            (x,) = e.operands
            return _switch(x, d, _int(0), loc)
        if e.op == "next":
            (x,) = e.operands
            return _switch(x, d, _plus(TagQuery(d), _int(1)), loc)
        if e.op == "fby":
            x, y = e.operands
            test = BinaryOp("=", TagQuery(d), _int(0), location=loc)
            then_branch = _switch(x, d, _int(0), loc)
            else_branch = _switch(y, d, BinaryOp("-", TagQuery(d), _int(1)), loc)
            return Conditional(test, then_branch, else_branch, location=loc)
        if e.op == "wvr":
            x, y = e.operands
            t, u = self.fresh("T"), self.fresh("U")
            t_def = SurfaceOp("fby", (
                Identifier(u),
                _switch(Identifier(u), d, _plus(Identifier(t), _int(1)), loc),
            ), d, location=loc)
            u_def = Conditional(
                y, TagQuery(d),
                SurfaceOp("next", (Identifier(u),), d, location=loc),
                location=loc)
            return Where(
                _switch(x, d, Identifier(t), loc),
                (VarDef(t, t_def), VarDef(u, u_def)),
                location=loc)
        if e.op == "asa":
            x, y = e.operands
            inner = SurfaceOp("wvr", (x, y), d, location=loc)
            return SurfaceOp("first", (inner,), d, location=loc)
        if e.op == "upon":
            x, y = e.operands
            w = self.fresh("W")
            w_def = SurfaceOp("fby", (
                _int(0),
                Conditional(y, _plus(Identifier(w), _int(1)), Identifier(w),
                            location=loc),
            ), d, location=loc)
            return Where(
                _switch(x, d, Identifier(w), loc),
                (VarDef(w, w_def),),
                location=loc)
        raise ValueError(f"unknown surface operator {e.op!r}")


def _int(n: int) -> Literal:
    return Literal(integer(n, str(n)))


def _plus(a: Expression, b: Expression) -> BinaryOp:
    return BinaryOp("+", a, b)


def _switch(body: Expression, dim: str, tag_expr: Expression, loc) -> ContextSwitch:
    literal = ContextLiteral(((Identifier(dim), tag_expr),))
    return ContextSwitch(body, literal, location=loc)


def _map_children(e: Expression, fn):
    if isinstance(e, (Literal, Identifier, TagQuery)):
        return e
    if isinstance(e, BinaryOp):
        return replace(e, lhs=fn(e.lhs), rhs=fn(e.rhs))
    if isinstance(e, UnaryOp):
        return replace(e, operand=fn(e.operand))
    if isinstance(e, Conditional):
        return replace(e, test=fn(e.test), then_branch=fn(e.then_branch),
                       else_branch=fn(e.else_branch))
    if isinstance(e, Apply):
        return replace(e, callee=fn(e.callee),
                       args=tuple(fn(a) for a in e.args))
    if isinstance(e, MemberCall):
        return replace(e, receiver=fn(e.receiver),
                       args=tuple(fn(a) for a in e.args))
    if isinstance(e, ContextSwitch):
        return replace(e, body=fn(e.body), context_expr=fn(e.context_expr))
    if isinstance(e, ContextLiteral):
        return replace(e, pairs=tuple((fn(d), fn(t)) for d, t in e.pairs))
    if isinstance(e, ContextSetLiteral):
        return replace(e, elements=tuple(fn(el) for el in e.elements))
    if isinstance(e, TreeLiteral):
        return replace(
            e,
            entries=tuple((fn(d), fn(v)) for d, v in e.entries),
            default=None if e.default is None else fn(e.default))
    if isinstance(e, Where):
        decls = tuple(
            replace(d, expr=fn(d.expr)) if isinstance(d, (VarDef, FunDef)) else d
            for d in e.declarations)
        return replace(e, body=fn(e.body), declarations=decls)
    if isinstance(e, SurfaceOp):
        return replace(e, operands=tuple(fn(o) for o in e.operands))
    raise TypeError(f"not an expression: {e!r}")
