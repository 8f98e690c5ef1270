"""Independent pointwise interpreter used as a semantics oracle in tests.

Stream operators are evaluated straight from their index-based
definitions: first and next shift the queried tag, fby picks the head at
tag zero and delegates to a shifted tail otherwise, wvr scans upward for
guard hits, asa takes the first hit, and upon advances a counter stream.
Nothing here goes through the core translation or the demand engine, so
agreement between the two on a program is real evidence and not a
tautology.

The oracle works on plain Python numbers and raises OracleError for
anything it does not model (specials, context values, member calls).
"""

from __future__ import annotations

from corelucid.syntax import (
    Apply,
    BinaryOp,
    Conditional,
    ContextLiteral,
    ContextSwitch,
    DimDecl,
    FunDef,
    Identifier,
    Literal,
    SurfaceOp,
    TagQuery,
    UnaryOp,
    VarDef,
    Where,
)
from corelucid.values import (
    K_BOOLEAN,
    K_DOUBLE,
    K_FLOAT,
    K_INTEGER,
    K_STRING,
    CoreValue,
)


class OracleError(Exception):
    """Raised for programs outside the oracle's modelled subset."""


class _Env:
    """Lexical scope chain with per-scope memo tables."""

    def __init__(self, parent: "_Env | None" = None):
        self.parent = parent
        self.vars: dict = {}
        self.funcs: dict = {}
        self.dims: dict = {}
        self.params: dict = {}
        self._children: dict = {}
        self._memo: dict = {}

    def child_for(self, node: Where) -> "_Env":
        # the node rides along so its id cannot be recycled onto another node
        cached = self._children.get(id(node))
        if cached is not None:
            return cached[1]
        env = _Env(self)
        for decl in node.declarations:
            if isinstance(decl, VarDef):
                env.vars[decl.name] = decl.expr
            elif isinstance(decl, FunDef):
                env.funcs[decl.name] = decl
            elif isinstance(decl, DimDecl):
                env.dims[decl.decl.name] = decl.decl.effective_default
        self._children[id(node)] = (node, env)
        return env

    def find(self, name: str):
        env = self
        while env is not None:
            if name in env.params:
                return "param", env.params[name], env
            if name in env.vars:
                return "var", env.vars[name], env
            if name in env.funcs:
                return "fun", env.funcs[name], env
            if name in env.dims:
                return "dim", env.dims[name], env
            env = env.parent
        raise OracleError(f"unbound identifier {name}")

    def default_tag(self, dim: str):
        env = self
        while env is not None:
            if dim in env.dims:
                return env.dims[dim]
            env = env.parent
        return 0


def _unwrap(value: CoreValue):
    kind = value.type.kind
    if kind in (K_INTEGER, K_DOUBLE, K_FLOAT, K_STRING):
        return value.payload
    if kind == K_BOOLEAN:
        return bool(value.payload)
    raise OracleError(f"literal of kind {kind} not modelled")


def _trunc_div(a, b):
    if b == 0:
        raise OracleError("division by zero reached the oracle")
    if isinstance(a, float) or isinstance(b, float):
        return a / b
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _require_bool(v, what: str) -> bool:
    if not isinstance(v, bool):
        raise OracleError(f"{what} must be boolean, got {v!r}")
    return v


def _same_group(a, b) -> bool:
    return isinstance(a, bool) == isinstance(b, bool)


def _eval(expr, ctx: dict, env: _Env):
    if isinstance(expr, Literal):
        return _unwrap(expr.value)

    if isinstance(expr, Identifier):
        kind, payload, owner = env.find(expr.name)
        if kind == "param":
            thunk_expr, thunk_env = payload
            return _eval(thunk_expr, ctx, thunk_env)
        if kind == "var":
            key = (expr.name, frozenset(ctx.items()))
            memo = owner._memo
            if key not in memo:
                memo[key] = _eval(payload, ctx, owner)
            return memo[key]
        raise OracleError(f"{expr.name} does not name a stream")

    if isinstance(expr, TagQuery):
        d = expr.dimension
        return ctx[d] if d in ctx else env.default_tag(d)

    if isinstance(expr, BinaryOp):
        return _eval_binary(expr, ctx, env)

    if isinstance(expr, UnaryOp):
        if expr.op == "-":
            return -_eval(expr.operand, ctx, env)
        if expr.op == "not":
            return not _require_bool(_eval(expr.operand, ctx, env), "not")
        if expr.op == "isspecial":
            _eval(expr.operand, ctx, env)
            return False
        raise OracleError(f"unary {expr.op} not modelled")

    if isinstance(expr, Conditional):
        if _require_bool(_eval(expr.test, ctx, env), "condition"):
            return _eval(expr.then_branch, ctx, env)
        return _eval(expr.else_branch, ctx, env)

    if isinstance(expr, ContextSwitch):
        target = expr.context_expr
        if not isinstance(target, ContextLiteral):
            raise OracleError("switch target must be a context literal")
        new = dict(ctx)
        for dim_expr, tag_expr in target.pairs:
            if not isinstance(dim_expr, Identifier):
                raise OracleError("computed dimension names not modelled")
            new[dim_expr.name] = _eval(tag_expr, ctx, env)
        return _eval(expr.body, new, env)

    if isinstance(expr, Where):
        return _eval(expr.body, ctx, env.child_for(expr))

    if isinstance(expr, Apply):
        if not isinstance(expr.callee, Identifier):
            raise OracleError("computed callees not modelled")
        kind, fundef, owner = env.find(expr.callee.name)
        if kind != "fun":
            raise OracleError(f"{expr.callee.name} is not a function")
        if len(fundef.params) != len(expr.args):
            raise OracleError(f"arity mismatch calling {fundef.name}")
        frame = _Env(owner)
        for param, arg in zip(fundef.params, expr.args):
            frame.params[param] = (arg, env)
        return _eval(fundef.expr, ctx, frame)

    if isinstance(expr, SurfaceOp):
        return _eval_stream_op(expr, ctx, env)

    raise OracleError(f"{type(expr).__name__} not modelled")


def _eval_binary(expr: BinaryOp, ctx, env):
    op = expr.op
    if op == "and":
        lhs = _require_bool(_eval(expr.lhs, ctx, env), "and")
        return lhs and _require_bool(_eval(expr.rhs, ctx, env), "and")
    if op == "or":
        lhs = _require_bool(_eval(expr.lhs, ctx, env), "or")
        return lhs or _require_bool(_eval(expr.rhs, ctx, env), "or")

    a = _eval(expr.lhs, ctx, env)
    b = _eval(expr.rhs, ctx, env)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return _trunc_div(a, b)
    if op == "mod":
        return a - _trunc_div(a, b) * b
    if op == "=":
        return _same_group(a, b) and a == b
    if op == "<>":
        return not (_same_group(a, b) and a == b)
    if op == "<":
        return a < b
    if op == ">":
        return a > b
    if op == "<=":
        return a <= b
    if op == ">=":
        return a >= b
    raise OracleError(f"operator {op} not modelled")


_SCAN_LIMIT = 100_000


def _at(expr, ctx, env, dim, tag):
    new = dict(ctx)
    new[dim] = tag
    return _eval(expr, new, env)


def _eval_stream_op(expr: SurfaceOp, ctx, env):
    op, d = expr.op, expr.dimension
    here = ctx[d] if d in ctx else env.default_tag(d)
    if not isinstance(here, int) or isinstance(here, bool):
        raise OracleError(f"stream operator over non-integer tag {here!r}")

    if op == "first":
        return _at(expr.operands[0], ctx, env, d, 0)

    if op == "next":
        return _at(expr.operands[0], ctx, env, d, here + 1)

    if op == "fby":
        head, tail = expr.operands
        if here == 0:
            return _at(head, ctx, env, d, 0)
        return _at(tail, ctx, env, d, here - 1)

    if op == "wvr":
        source, guard = expr.operands
        hits = -1
        for i in range(_SCAN_LIMIT):
            if _require_bool(_at(guard, ctx, env, d, i), "wvr guard"):
                hits += 1
                if hits == here:
                    return _at(source, ctx, env, d, i)
        raise OracleError("wvr guard scan exhausted")

    if op == "asa":
        source, guard = expr.operands
        for i in range(_SCAN_LIMIT):
            if _require_bool(_at(guard, ctx, env, d, i), "asa guard"):
                return _at(source, ctx, env, d, i)
        raise OracleError("asa guard scan exhausted")

    if op == "upon":
        source, guard = expr.operands
        counter = 0
        for i in range(here):
            if _require_bool(_at(guard, ctx, env, d, i), "upon guard"):
                counter += 1
        return _at(source, ctx, env, d, counter)

    raise OracleError(f"stream operator {op} not modelled")


def oracle_eval(expr, context: dict | None = None):
    """Evaluate a surface expression at an integer-tagged context."""
    return _eval(expr, dict(context or {}), _Env())


def oracle_stream(expr, dim: str = "t", count: int = 20, base: dict | None = None):
    """First `count` values of the expression along one dimension."""
    env = _Env()
    out = []
    for i in range(count):
        ctx = dict(base or {})
        ctx[dim] = i
        out.append(_eval(expr, ctx, env))
    return out
