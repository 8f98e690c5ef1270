"""Recursive-descent parser for the core and surface dialects.

Precedence, loosest to tightest:
    where < conditional < stream ops (fby, wvr, asa, upon) < or < and
    < comparison < additive < multiplicative < unary (-, not, isspecial,
    first, next) < @ < application and member call < atoms.

The two dialects differ only in whether first/next/fby/wvr/asa/upon act as
operators; in the core dialect they are ordinary identifiers.  A `.d`
suffix on a stream operator selects the dimension, which otherwise defaults
to `t`.
"""

from __future__ import annotations

import json
from typing import Optional

from .contexts import DimensionDecl
from .errors import CoreLucidError, ParseError
from .lexer import tokenize
from .syntax import (
    DEFAULT_DIMENSION,
    Apply,
    BinaryOp,
    Conditional,
    ContextLiteral,
    ContextSetLiteral,
    ContextSwitch,
    DimDecl,
    FunDef,
    Identifier,
    Literal,
    Loc,
    MemberCall,
    SurfaceOp,
    TagQuery,
    TreeLiteral,
    UnaryOp,
    VarDef,
    Where,
)
from .values import (
    SPECIAL_KINDS,
    Provenance,
    boolean,
    double,
    integer,
    special,
    string_value,
    typed_literal,
)

_COMPARISON_OPS = ("=", "<>", "<", "<=", ">", ">=")
_SURFACE_BINARY = ("fby", "wvr", "asa", "upon")
_SURFACE_UNARY = ("first", "next")


class Parser:
    def __init__(self, source: str, dialect: str, filename: Optional[str] = None,
                 first_line: int = 1):
        if dialect not in ("core", "surface"):
            raise ValueError(f"unknown dialect: {dialect!r}")
        self.tokens = tokenize(source, filename, first_line)
        self.dialect = dialect
        self.filename = filename
        self.index = 0

    # --- token plumbing ---------------------------------------------------

    @property
    def tok(self):
        return self.tokens[self.index]

    def at(self, *types: str) -> bool:
        return self.tok.type in types

    def advance(self):
        tok = self.tok
        if tok.type != "eof":
            self.index += 1
        return tok

    def expect(self, toktype: str):
        if not self.at(toktype):
            self.fail(f"expected {toktype!r}, found {self.tok.describe()}",
                      expected={toktype})
        return self.advance()

    def fail(self, message: str, expected=frozenset()):
        raise ParseError(message, self.tok.line, self.tok.column,
                         frozenset(expected))

    def loc(self) -> Loc:
        return Loc(self.tok.line, self.tok.column)

    # --- entry points -------------------------------------------------------

    def parse_program(self):
        e = self.parse_expr()
        if self.at(";"):
            self.advance()
        if not self.at("eof"):
            self.fail(f"unexpected {self.tok.describe()} after expression")
        return e

    # --- expression levels --------------------------------------------------

    def parse_expr(self):
        e = self.parse_conditional()
        while self.at("where"):
            loc = self.loc()
            self.advance()
            decls = self.parse_declarations()
            self.expect("end")
            e = Where(e, tuple(decls), location=loc)
        return e

    def parse_conditional(self):
        if self.at("if"):
            loc = self.loc()
            self.advance()
            test = self.parse_conditional()
            self.expect("then")
            then_branch = self.parse_conditional()
            self.expect("else")
            else_branch = self.parse_conditional()
            return Conditional(test, then_branch, else_branch, location=loc)
        return self.parse_stream_binary()

    def _surface_ident(self, names) -> bool:
        return (self.dialect == "surface" and self.at("ident")
                and self.tok.value in names)

    def _dimension_suffix(self) -> str:
        if self.at("."):
            self.advance()
            return self.expect("ident").value
        return DEFAULT_DIMENSION

    def parse_stream_binary(self):
        e = self.parse_or()
        if self._surface_ident(_SURFACE_BINARY):
            loc = self.loc()
            op = self.advance().value
            dim = self._dimension_suffix()
            rhs = self.parse_stream_binary()  # right-associative
            return SurfaceOp(op, (e, rhs), dim, location=loc)
        return e

    def parse_or(self):
        e = self.parse_and()
        while self.at("or"):
            loc = self.loc()
            self.advance()
            e = BinaryOp("or", e, self.parse_and(), location=loc)
        return e

    def parse_and(self):
        e = self.parse_comparison()
        while self.at("and"):
            loc = self.loc()
            self.advance()
            e = BinaryOp("and", e, self.parse_comparison(), location=loc)
        return e

    def parse_comparison(self):
        e = self.parse_additive()
        if self.at(*_COMPARISON_OPS):
            loc = self.loc()
            op = self.advance().type
            e = BinaryOp(op, e, self.parse_additive(), location=loc)
        return e

    def parse_additive(self):
        e = self.parse_multiplicative()
        while self.at("+", "-"):
            loc = self.loc()
            op = self.advance().type
            e = BinaryOp(op, e, self.parse_multiplicative(), location=loc)
        return e

    def parse_multiplicative(self):
        e = self.parse_unary()
        while self.at("*", "/", "mod"):
            loc = self.loc()
            op = self.advance().type
            e = BinaryOp(op, e, self.parse_unary(), location=loc)
        return e

    def parse_unary(self):
        loc = self.loc()
        if self.at("-"):
            self.advance()
            if self.at("int"):
                tok = self.advance()
                return self._int_literal("-" + tok.value, loc)
            if self.at("float"):
                tok = self.advance()
                return Literal(double(-float(tok.value), "-" + tok.value),
                               location=loc)
            return UnaryOp("-", self.parse_unary(), location=loc)
        if self.at("not"):
            self.advance()
            return UnaryOp("not", self.parse_unary(), location=loc)
        if self.at("isspecial"):
            kind = self.advance().value
            if kind is not None and kind not in SPECIAL_KINDS:
                raise ParseError(f"unknown special kind {kind!r}",
                                 loc.line, loc.column)
            return UnaryOp("isspecial", self.parse_unary(), kind=kind,
                           location=loc)
        if self._surface_ident(_SURFACE_UNARY):
            op = self.advance().value
            dim = self._dimension_suffix()
            return SurfaceOp(op, (self.parse_unary(),), dim, location=loc)
        return self.parse_switch()

    def parse_switch(self):
        e = self.parse_postfix()
        while self.at("@"):
            loc = self.loc()
            self.advance()
            e = ContextSwitch(e, self.parse_postfix(), location=loc)
        return e

    def parse_postfix(self):
        e = self.parse_atom()
        while True:
            if self.at("("):
                loc = self.loc()
                args = self.parse_arguments()
                e = Apply(e, args, location=loc)
            elif self.at("."):
                loc = self.loc()
                self.advance()
                method = self.expect("ident").value
                if not self.at("("):
                    self.fail("a member call needs an argument list",
                              expected={"("})
                args = self.parse_arguments()
                e = MemberCall(e, method, args, location=loc)
            else:
                return e

    def parse_arguments(self) -> tuple:
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.parse_expr())
            while self.at(","):
                self.advance()
                args.append(self.parse_expr())
        self.expect(")")
        return tuple(args)

    def _int_literal(self, text: str, loc: Loc):
        try:
            return Literal(integer(int(text), text), location=loc)
        except CoreLucidError as exc:
            raise ParseError(str(exc), loc.line, loc.column) from None

    def parse_atom(self):
        loc = self.loc()
        if self.at("int"):
            return self._int_literal(self.advance().value, loc)
        if self.at("float"):
            text = self.advance().value
            return Literal(double(float(text), text), location=loc)
        if self.at("string"):
            text = self.advance().value
            return Literal(string_value(text, json.dumps(text)), location=loc)
        if self.at("true", "false"):
            word = self.advance().type
            return Literal(boolean(word == "true", word), location=loc)
        if self.at("typed"):
            kind, lexeme = self.advance().value
            try:
                return Literal(typed_literal(kind, lexeme), location=loc)
            except CoreLucidError as exc:
                raise ParseError(str(exc), loc.line, loc.column) from None
        if self.at("speciallit"):
            kind = self.advance().value
            if kind not in SPECIAL_KINDS:
                raise ParseError(f"unknown special kind {kind!r}",
                                 loc.line, loc.column)
            prov = Provenance(self.filename, loc.line, loc.column)
            return Literal(special(kind, prov), location=loc)
        if self.at("hash"):
            return TagQuery(self.advance().value, location=loc)
        if self.at("ident"):
            return Identifier(self.advance().value, location=loc)
        if self.at("("):
            self.advance()
            e = self.parse_expr()
            self.expect(")")
            return e
        if self.at("{"):
            return self.parse_braced()
        self.fail(f"unexpected {self.tok.describe()}",
                  expected={"literal", "identifier", "(", "{", "#"})

    # --- context literals ---------------------------------------------------

    def parse_braced(self):
        loc = self.loc()
        self.expect("{")
        if self.at("}"):
            self.advance()
            return ContextLiteral((), location=loc)
        if self.at("{"):
            elements = [self._set_element()]
            while self.at(","):
                self.advance()
                elements.append(self._set_element())
            self.expect("}")
            return ContextSetLiteral(tuple(elements), location=loc)

        pairs = []
        default = None
        is_tree = False
        while True:
            if self.at("@"):
                at_loc = self.loc()
                self.advance()
                self.expect(":")
                if default is not None:
                    raise ParseError("duplicate @: default entry",
                                     at_loc.line, at_loc.column)
                default = self.parse_expr()
                is_tree = True
            else:
                dim = self.parse_expr()
                self.expect(":")
                if self.at("{"):
                    pairs.append((dim, self._subtree()))
                    is_tree = True
                else:
                    pairs.append((dim, self.parse_expr()))
            if self.at(","):
                self.advance()
            else:
                break
        self.expect("}")
        if is_tree:
            return TreeLiteral(tuple(pairs), default=default, location=loc)
        return ContextLiteral(tuple(pairs), location=loc)

    def _set_element(self):
        loc = self.loc()
        e = self.parse_braced()
        if not isinstance(e, ContextLiteral):
            raise ParseError("context set elements must be simple contexts",
                             loc.line, loc.column)
        return e

    def _subtree(self):
        loc = self.loc()
        e = self.parse_braced()
        if isinstance(e, ContextLiteral):
            return TreeLiteral(e.pairs, location=e.location)
        if isinstance(e, TreeLiteral):
            return e
        raise ParseError("a nested context must be a point or tree, not a set",
                         loc.line, loc.column)

    # --- declarations ---------------------------------------------------------

    def parse_declarations(self) -> list:
        decls = []
        seen = set()
        while not self.at("end"):
            if self.at("eof"):
                self.fail("unterminated where clause", expected={"end"})
            for decl in self.parse_declaration():
                name = (decl.decl.name if isinstance(decl, DimDecl)
                        else decl.name)
                if name in seen:
                    line = decl.location.line if decl.location else 0
                    col = decl.location.column if decl.location else 0
                    raise ParseError(f"duplicate declaration of {name!r}",
                                     line, col)
                seen.add(name)
                decls.append(decl)
        return decls

    def parse_declaration(self) -> list:
        loc = self.loc()
        if self.at("dimension"):
            self.advance()
            out = [self._dimension_item(loc)]
            while self.at(","):
                self.advance()
                out.append(self._dimension_item(self.loc()))
            self.expect(";")
            return out
        name = self.expect("ident").value
        if self.at("("):
            self.advance()
            params = []
            if not self.at(")"):
                params.append(self.expect("ident").value)
                while self.at(","):
                    self.advance()
                    params.append(self.expect("ident").value)
            self.expect(")")
            if len(set(params)) != len(params):
                raise ParseError(f"duplicate parameter names in {name!r}",
                                 loc.line, loc.column)
            self.expect("=")
            expr = self.parse_expr()
            self.expect(";")
            return [FunDef(name, tuple(params), expr, location=loc)]
        self.expect("=")
        expr = self.parse_expr()
        self.expect(";")
        return [VarDef(name, expr, location=loc)]

    def _dimension_item(self, loc: Loc) -> DimDecl:
        name = self.expect("ident").value
        default = None
        if self.at("default"):
            self.advance()
            default = self._tag_literal()
        return DimDecl(DimensionDecl(name, default), location=loc)

    def _tag_literal(self):
        if self.at("int"):
            return int(self.advance().value)
        if self.at("-"):
            self.advance()
            return -int(self.expect("int").value)
        if self.at("string"):
            return self.advance().value
        self.fail("a dimension default must be an integer or string tag",
                  expected={"int", "string"})


def parse_core(source: str, filename: Optional[str] = None,
               first_line: int = 1):
    """Parse core-dialect source: no stream operators, `@` and `#d` only."""
    return Parser(source, "core", filename, first_line).parse_program()


def parse_surface(source: str, filename: Optional[str] = None,
                  first_line: int = 1):
    """Parse surface-dialect source: core syntax plus the stream operators
    first/next/fby/wvr/asa/upon (default dimension `t`, `.d` to select)."""
    return Parser(source, "surface", filename, first_line).parse_program()
