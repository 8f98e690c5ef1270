"""AST for the intensional expression language, plus the canonical printer.

One node set serves both dialects: the core dialect (context switch `@`,
tag query `#d`, where-clauses) and the surface dialect, which additionally
has the stream operators first/next/fby/wvr/asa/upon as SurfaceOp nodes.
Translation removes every SurfaceOp.

Nodes are frozen dataclasses; source locations never participate in
equality, so structural comparison works across reprints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .contexts import DimensionDecl, format_tag
from .values import CoreValue, render


class Loc(NamedTuple):
    line: int
    column: int


def _loc_field():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Expression:
    pass


@dataclass(frozen=True)
class Literal(Expression):
    value: CoreValue
    location: Optional[Loc] = _loc_field()


@dataclass(frozen=True)
class Identifier(Expression):
    name: str
    location: Optional[Loc] = _loc_field()


@dataclass(frozen=True)
class BinaryOp(Expression):
    op: str
    lhs: Expression
    rhs: Expression
    location: Optional[Loc] = _loc_field()


@dataclass(frozen=True)
class UnaryOp(Expression):
    """op is '-', 'not', or 'isspecial' (optionally with a kind)."""

    op: str
    operand: Expression
    kind: Optional[str] = None
    location: Optional[Loc] = _loc_field()


@dataclass(frozen=True)
class Conditional(Expression):
    test: Expression
    then_branch: Expression
    else_branch: Expression
    location: Optional[Loc] = _loc_field()


@dataclass(frozen=True)
class Apply(Expression):
    callee: Expression
    args: tuple
    location: Optional[Loc] = _loc_field()


@dataclass(frozen=True)
class MemberCall(Expression):
    receiver: Expression
    method: str
    args: tuple
    location: Optional[Loc] = _loc_field()


@dataclass(frozen=True)
class TagQuery(Expression):
    dimension: str
    location: Optional[Loc] = _loc_field()


@dataclass(frozen=True)
class ContextSwitch(Expression):
    body: Expression
    context_expr: Expression
    location: Optional[Loc] = _loc_field()


@dataclass(frozen=True)
class ContextLiteral(Expression):
    """`{dimExpr: tagExpr, ...}`; both sides are expressions."""

    pairs: tuple
    location: Optional[Loc] = _loc_field()


@dataclass(frozen=True)
class ContextSetLiteral(Expression):
    elements: tuple  # of ContextLiteral
    location: Optional[Loc] = _loc_field()


@dataclass(frozen=True)
class TreeLiteral(Expression):
    """`{child: subtree-or-tag, ..., @: defaultTag}`; children keyed by
    dimension expressions, nested braces form subtrees."""

    entries: tuple  # of (dimExpr, TreeLiteral | tagExpr)
    default: Optional[Expression] = None
    location: Optional[Loc] = _loc_field()


@dataclass(frozen=True)
class Where(Expression):
    body: Expression
    declarations: tuple
    location: Optional[Loc] = _loc_field()


SURFACE_OPS = ("first", "next", "fby", "wvr", "asa", "upon")
DEFAULT_DIMENSION = "t"


@dataclass(frozen=True)
class SurfaceOp(Expression):
    op: str
    operands: tuple
    dimension: str = DEFAULT_DIMENSION
    location: Optional[Loc] = _loc_field()


@dataclass(frozen=True)
class Declaration:
    pass


@dataclass(frozen=True)
class VarDef(Declaration):
    name: str
    expr: Expression
    location: Optional[Loc] = _loc_field()


@dataclass(frozen=True)
class FunDef(Declaration):
    name: str
    params: tuple
    expr: Expression
    location: Optional[Loc] = _loc_field()


@dataclass(frozen=True)
class DimDecl(Declaration):
    decl: DimensionDecl
    location: Optional[Loc] = _loc_field()


def is_core(e: Expression) -> bool:
    """True when the expression tree contains no surface stream operators."""
    found = []

    def walk(node):
        if isinstance(node, SurfaceOp):
            found.append(node)
        for child in children(node):
            walk(child)

    walk(e)
    return not found


def children(node):
    """Child expressions of an AST node, in source order."""
    if isinstance(node, (Literal, Identifier, TagQuery)):
        return ()
    if isinstance(node, BinaryOp):
        return (node.lhs, node.rhs)
    if isinstance(node, UnaryOp):
        return (node.operand,)
    if isinstance(node, Conditional):
        return (node.test, node.then_branch, node.else_branch)
    if isinstance(node, Apply):
        return (node.callee, *node.args)
    if isinstance(node, MemberCall):
        return (node.receiver, *node.args)
    if isinstance(node, ContextSwitch):
        return (node.body, node.context_expr)
    if isinstance(node, ContextLiteral):
        return tuple(x for pair in node.pairs for x in pair)
    if isinstance(node, ContextSetLiteral):
        return node.elements
    if isinstance(node, TreeLiteral):
        out = [x for pair in node.entries for x in pair]
        if node.default is not None:
            out.append(node.default)
        return tuple(out)
    if isinstance(node, Where):
        out = [node.body]
        for decl in node.declarations:
            if isinstance(decl, (VarDef, FunDef)):
                out.append(decl.expr)
        return tuple(out)
    if isinstance(node, SurfaceOp):
        return node.operands
    raise TypeError(f"not an AST node: {node!r}")


def to_data(node):
    """Nested plain-data form of a tree, for serialization."""
    if isinstance(node, (Expression, Declaration)):
        from dataclasses import fields
        out = {"node": type(node).__name__}
        for f in fields(node):
            if f.name == "location":
                continue
            out[f.name] = to_data(getattr(node, f.name))
        return out
    if isinstance(node, tuple):
        return [to_data(x) for x in node]
    if isinstance(node, CoreValue):
        return str(node)
    if isinstance(node, DimensionDecl):
        out = {"node": "DimensionDecl", "name": node.name}
        if node.default_tag is not None:
            out["default_tag"] = node.default_tag
        return out
    return node


# ---------------------------------------------------------------------------
# canonical printing
#
# Precedence levels, loosest to tightest.  to_text(parse(s)) is a fixed
# point: reparsing printed text yields a structurally equal tree.

_LVL_WHERE = 0
_LVL_COND = 1
_LVL_SURFACE = 2
_LVL_OR = 3
_LVL_AND = 4
_LVL_CMP = 5
_LVL_ADD = 6
_LVL_MUL = 7
_LVL_UNARY = 8
_LVL_AT = 9
_LVL_POSTFIX = 10
_LVL_ATOM = 11

_BINARY_LEVEL = {
    "or": _LVL_OR,
    "and": _LVL_AND,
    "=": _LVL_CMP, "<>": _LVL_CMP, "<": _LVL_CMP,
    "<=": _LVL_CMP, ">": _LVL_CMP, ">=": _LVL_CMP,
    "+": _LVL_ADD, "-": _LVL_ADD,
    "*": _LVL_MUL, "/": _LVL_MUL, "mod": _LVL_MUL,
}

# comparisons do not chain, so both sides print one level tighter
_NON_ASSOC = {_LVL_CMP}


def to_text(e: Expression) -> str:
    return _print(e, _LVL_WHERE)


def _wrap(text: str, level: int, minimum: int) -> str:
    return f"({text})" if level < minimum else text


def _print_tag(t: Expression) -> str:
    # a brace literal in tag position would read back as a nested subtree,
    # so it takes explicit parentheses
    text = _print(t, _LVL_WHERE)
    if isinstance(t, (ContextLiteral, ContextSetLiteral, TreeLiteral)):
        return f"({text})"
    return text


def _print(e: Expression, minimum: int) -> str:
    if isinstance(e, Literal):
        return render(e.value)
    if isinstance(e, Identifier):
        return e.name
    if isinstance(e, TagQuery):
        return f"#{e.dimension}"
    if isinstance(e, BinaryOp):
        lvl = _BINARY_LEVEL[e.op]
        lhs_min = lvl + 1 if lvl in _NON_ASSOC else lvl
        lhs = _print(e.lhs, lhs_min)
        rhs = _print(e.rhs, lvl + 1)
        return _wrap(f"{lhs} {e.op} {rhs}", lvl, minimum)
    if isinstance(e, UnaryOp):
        inner = _print(e.operand, _LVL_UNARY)
        if e.op == "-":
            text = f"-{inner}"
        elif e.op == "isspecial" and e.kind:
            text = f"isspecial<{e.kind}> {inner}"
        else:
            text = f"{e.op} {inner}"
        return _wrap(text, _LVL_UNARY, minimum)
    if isinstance(e, Conditional):
        text = (f"if {_print(e.test, _LVL_COND)} "
                f"then {_print(e.then_branch, _LVL_COND)} "
                f"else {_print(e.else_branch, _LVL_COND)}")
        return _wrap(text, _LVL_COND, minimum)
    if isinstance(e, Apply):
        callee = _print(e.callee, _LVL_POSTFIX)
        args = ", ".join(_print(a, _LVL_WHERE) for a in e.args)
        return _wrap(f"{callee}({args})", _LVL_POSTFIX, minimum)
    if isinstance(e, MemberCall):
        recv = _print(e.receiver, _LVL_POSTFIX)
        args = ", ".join(_print(a, _LVL_WHERE) for a in e.args)
        return _wrap(f"{recv}.{e.method}({args})", _LVL_POSTFIX, minimum)
    if isinstance(e, ContextSwitch):
        body = _print(e.body, _LVL_AT)
        ctx = _print(e.context_expr, _LVL_AT + 1)
        return _wrap(f"{body} @ {ctx}", _LVL_AT, minimum)
    if isinstance(e, ContextLiteral):
        pairs = ", ".join(f"{_print(d, _LVL_WHERE)}:{_print_tag(t)}"
                          for d, t in e.pairs)
        return "{" + pairs + "}"
    if isinstance(e, ContextSetLiteral):
        return "{" + ", ".join(_print(el, _LVL_WHERE) for el in e.elements) + "}"
    if isinstance(e, TreeLiteral):
        parts = []
        if e.default is not None:
            parts.append(f"@:{_print_tag(e.default)}")
        for d, v in e.entries:
            if isinstance(v, TreeLiteral):
                parts.append(f"{_print(d, _LVL_WHERE)}:{_print(v, _LVL_WHERE)}")
            else:
                parts.append(f"{_print(d, _LVL_WHERE)}:{_print_tag(v)}")
        return "{" + ", ".join(parts) + "}"
    if isinstance(e, Where):
        decls = " ".join(print_declaration(d) for d in e.declarations)
        body = _print(e.body, _LVL_WHERE)
        middle = f" {decls} " if decls else " "
        return _wrap(f"{body} where{middle}end", _LVL_WHERE, minimum)
    if isinstance(e, SurfaceOp):
        suffix = "" if e.dimension == DEFAULT_DIMENSION else f".{e.dimension}"
        name = e.op + suffix
        if e.op in ("first", "next"):
            inner = _print(e.operands[0], _LVL_UNARY)
            return _wrap(f"{name} {inner}", _LVL_UNARY, minimum)
        lhs = _print(e.operands[0], _LVL_SURFACE + 1)
        rhs = _print(e.operands[1], _LVL_SURFACE)
        return _wrap(f"{lhs} {name} {rhs}", _LVL_SURFACE, minimum)
    raise TypeError(f"not an expression: {e!r}")


def print_declaration(d: Declaration) -> str:
    if isinstance(d, VarDef):
        return f"{d.name} = {_print(d.expr, _LVL_WHERE)};"
    if isinstance(d, FunDef):
        params = ", ".join(d.params)
        return f"{d.name}({params}) = {_print(d.expr, _LVL_WHERE)};"
    if isinstance(d, DimDecl):
        decl = d.decl
        if decl.default_tag is None:
            return f"dimension {decl.name};"
        return f"dimension {decl.name} default {format_tag(decl.default_tag)};"
    raise TypeError(f"not a declaration: {d!r}")
