"""Core type universe, runtime values, typed literals, and special values.

Types cover the natural-width numerics, sized integers, character data,
contexts and dimensions as first-class values, plus the internal kinds used
when binding foreign functions (Function, Operator, Object, Embed, Void,
Identifier).  Every literal value retains a lexeme that re-parses to an
equal value.

Error situations inside expression evaluation are represented by values of
the Special type (kinds undecl, arith, typeerr, undefdim) rather than by
host exceptions, so they can flow through data like any other value.  A
special carries the provenance of its first occurrence and absorbs through
operators left-to-right: the leftmost special operand is the result.
"""

from __future__ import annotations

import json
import math
import re
import struct
from dataclasses import dataclass, field
from typing import Any, Optional

from .errors import MalformedLexeme, OutOfRange, UnknownTypeName

# ---------------------------------------------------------------------------
# types

K_INTEGER = "Integer"
K_FLOAT = "Float"
K_DOUBLE = "Double"
K_BOOLEAN = "Boolean"
K_CHARACTER = "Character"
K_STRING = "String"
K_FUNCTION = "Function"
K_OPERATOR = "Operator"
K_ARRAY = "Array"
K_OBJECT = "Object"
K_EMBED = "Embed"
K_VOID = "Void"
K_IDENTIFIER = "Identifier"
K_CONTEXT = "Context"
K_DIMENSION = "Dimension"
K_SIZED_INTEGER = "SizedInteger"
K_SPECIAL = "Special"


@dataclass(frozen=True)
class CoreType:
    kind: str
    bits: Optional[int] = None            # SizedInteger only
    element_type: Optional["CoreType"] = None  # Array only
    type_name: Optional[str] = None       # Object only

    def __post_init__(self):
        if self.kind == K_SIZED_INTEGER and self.bits not in (8, 16, 32, 64):
            raise UnknownTypeName(f"sized integer width must be 8/16/32/64, got {self.bits}")
        if self.kind == K_ARRAY and self.element_type is None:
            raise UnknownTypeName("array type needs an element type")
        if self.kind == K_OBJECT and not self.type_name:
            raise UnknownTypeName("object type needs a type name")

    def __str__(self) -> str:
        if self.kind == K_SIZED_INTEGER:
            return f"int{self.bits}"
        if self.kind == K_ARRAY:
            return f"{self.element_type}[]"
        if self.kind == K_OBJECT:
            return f"object({self.type_name})"
        return self.kind.lower()


INTEGER = CoreType(K_INTEGER)
FLOAT = CoreType(K_FLOAT)
DOUBLE = CoreType(K_DOUBLE)
BOOLEAN = CoreType(K_BOOLEAN)
CHARACTER = CoreType(K_CHARACTER)
STRING = CoreType(K_STRING)
FUNCTION = CoreType(K_FUNCTION)
OPERATOR = CoreType(K_OPERATOR)
EMBED = CoreType(K_EMBED)
VOID = CoreType(K_VOID)
IDENTIFIER = CoreType(K_IDENTIFIER)
CONTEXT = CoreType(K_CONTEXT)
DIMENSION = CoreType(K_DIMENSION)
SPECIAL = CoreType(K_SPECIAL)


def sized_integer(bits: int) -> CoreType:
    return CoreType(K_SIZED_INTEGER, bits=bits)


def array_of(element: CoreType) -> CoreType:
    return CoreType(K_ARRAY, element_type=element)


def object_of(name: str) -> CoreType:
    return CoreType(K_OBJECT, type_name=name)


INT8 = sized_integer(8)
INT16 = sized_integer(16)
INT32 = sized_integer(32)
INT64 = sized_integer(64)

_INT_RANGE = {
    8: (-(2 ** 7), 2 ** 7 - 1),
    16: (-(2 ** 15), 2 ** 15 - 1),
    32: (-(2 ** 31), 2 ** 31 - 1),
    64: (-(2 ** 63), 2 ** 63 - 1),
}

SPECIAL_KINDS = ("undecl", "arith", "typeerr", "undefdim")


@dataclass(frozen=True)
class Provenance:
    """Source location of the first occurrence of a special value."""

    file: Optional[str] = None
    line: Optional[int] = None
    column: Optional[int] = None
    note: Optional[str] = None

    def __str__(self) -> str:
        place = f"{self.file or '<input>'}:{self.line if self.line is not None else '?'}"
        return f"{place}: {self.note}" if self.note else place


@dataclass(frozen=True)
class SpecialInfo:
    kind: str
    provenance: Optional[Provenance] = None

    def __post_init__(self):
        if self.kind not in SPECIAL_KINDS:
            raise UnknownTypeName(f"unknown special kind: {self.kind!r}")


@dataclass(frozen=True)
class CoreValue:
    """A typed runtime value.  The lexeme, when present, is the source text
    the value was written with; it never affects equality."""

    type: CoreType
    payload: Any
    lexeme: Optional[str] = field(default=None, compare=False)

    def __str__(self) -> str:
        return render(self)


# ---------------------------------------------------------------------------
# constructors


def integer(n: int, lexeme: str = None) -> CoreValue:
    lo, hi = _INT_RANGE[64]
    if not lo <= n <= hi:
        raise OutOfRange(f"integer literal out of 64-bit range: {n}")
    return CoreValue(INTEGER, n, lexeme)


def sized(bits: int, n: int, lexeme: str = None) -> CoreValue:
    lo, hi = _INT_RANGE[bits]
    if not lo <= n <= hi:
        raise OutOfRange(f"int{bits} literal out of range: {n}")
    return CoreValue(sized_integer(bits), n, lexeme)


def to_single(x: float) -> float:
    """Round a double to the nearest IEEE single-precision value."""
    try:
        return struct.unpack("<f", struct.pack("<f", x))[0]
    except OverflowError:
        return math.copysign(math.inf, x)


def single(x: float, lexeme: str = None) -> CoreValue:
    return CoreValue(FLOAT, to_single(x), lexeme)


def double(x: float, lexeme: str = None) -> CoreValue:
    return CoreValue(DOUBLE, float(x), lexeme)


def boolean(b: bool, lexeme: str = None) -> CoreValue:
    return CoreValue(BOOLEAN, bool(b), lexeme)


def character(c: str, lexeme: str = None) -> CoreValue:
    if len(c) != 1:
        raise MalformedLexeme(f"character value must be one character, got {c!r}")
    return CoreValue(CHARACTER, c, lexeme)


def string_value(s: str, lexeme: str = None) -> CoreValue:
    return CoreValue(STRING, s, lexeme)


def void_result() -> CoreValue:
    # the unit of foreign procedures: reads as boolean true
    return CoreValue(VOID, True)


def context_value(ctx) -> CoreValue:
    return CoreValue(CONTEXT, ctx)


def dimension_value(name: str) -> CoreValue:
    return CoreValue(DIMENSION, name)


def special(kind: str, provenance: Provenance = None) -> CoreValue:
    return CoreValue(SPECIAL, SpecialInfo(kind, provenance))


TRUE = boolean(True)
FALSE = boolean(False)


# ---------------------------------------------------------------------------
# typed literals

_INT_LEXEME = re.compile(r"[+-]?\d+\Z")
_FLOAT_LEXEME = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\Z")

LITERAL_KINDS = ("int8", "int16", "int32", "int64",
                 "float32", "float64", "bool", "char", "string")


def typed_literal(kind_token: str, lexeme: str) -> CoreValue:
    """Build the value denoted by `kind<lexeme>`.

    Distinct kinds never compare equal under the language's `=`, even for
    equal numerals, because equality is type-strict.
    """
    source = f"{kind_token}<{lexeme}>"
    if kind_token.startswith("int"):
        bits = {"int8": 8, "int16": 16, "int32": 32, "int64": 64}.get(kind_token)
        if bits is None:
            raise UnknownTypeName(f"unknown literal kind: {kind_token!r}")
        if not _INT_LEXEME.match(lexeme):
            raise MalformedLexeme(f"not an integer lexeme: {lexeme!r}")
        return sized(bits, int(lexeme), source)
    if kind_token in ("float32", "float64"):
        if not _FLOAT_LEXEME.match(lexeme):
            raise MalformedLexeme(f"not a float lexeme: {lexeme!r}")
        x = float(lexeme)
        if kind_token == "float32":
            x = to_single(x)
        if not math.isfinite(x):
            raise OutOfRange(f"{kind_token} literal out of range: {lexeme!r}")
        ctor = single if kind_token == "float32" else double
        return ctor(x, source)
    if kind_token == "bool":
        if lexeme not in ("true", "false"):
            raise MalformedLexeme(f"bool lexeme must be true or false, got {lexeme!r}")
        return boolean(lexeme == "true", source)
    if kind_token == "char":
        if len(lexeme) != 1:
            raise MalformedLexeme(f"char lexeme must be one character, got {lexeme!r}")
        return character(lexeme, source)
    if kind_token == "string":
        return string_value(lexeme, source)
    raise UnknownTypeName(f"unknown literal kind: {kind_token!r}")


# ---------------------------------------------------------------------------
# rendering


def render(v: CoreValue) -> str:
    if v.lexeme is not None:
        return v.lexeme
    t = v.type
    if t.kind == K_INTEGER:
        return str(v.payload)
    if t.kind == K_SIZED_INTEGER:
        return f"int{t.bits}<{v.payload}>"
    if t.kind == K_FLOAT:
        return f"float32<{repr(v.payload)}>"
    if t.kind == K_DOUBLE:
        return repr(v.payload)
    if t.kind == K_BOOLEAN:
        return "true" if v.payload else "false"
    if t.kind == K_CHARACTER:
        return f"char<{v.payload}>"
    if t.kind == K_STRING:
        return json.dumps(v.payload)
    if t.kind == K_SPECIAL:
        return f"special<{v.payload.kind}>"
    if t.kind == K_VOID:
        return "void"
    if t.kind == K_CONTEXT:
        return str(v.payload)
    if t.kind == K_DIMENSION:
        return v.payload
    if t.kind == K_ARRAY:
        return "[" + ", ".join(render(e) for e in v.payload) + "]"
    if t.kind == K_OBJECT:
        fields = ", ".join(f"{k}={render(x)}" for k, x in sorted(v.payload.items()))
        return f"{t.type_name}({fields})"
    return f"<{t}>"


# ---------------------------------------------------------------------------
# predicates and specials


def is_special(v: CoreValue, kind: str = None) -> bool:
    if v.type.kind != K_SPECIAL:
        return False
    return kind is None or v.payload.kind == kind


def combine_special(left: CoreValue, right: CoreValue) -> CoreValue:
    """Leftmost special absorbs; provenance is preserved unchanged."""
    if is_special(left):
        return left
    if is_special(right):
        return right
    raise ValueError("combine_special needs at least one special operand")


_NUMERIC_KINDS = (K_SIZED_INTEGER, K_INTEGER, K_FLOAT, K_DOUBLE)


def is_numeric(t: CoreType) -> bool:
    return t.kind in _NUMERIC_KINDS


def is_integral(t: CoreType) -> bool:
    return t.kind in (K_SIZED_INTEGER, K_INTEGER)


def _rank(t: CoreType) -> int:
    if t.kind == K_SIZED_INTEGER:
        return {8: 0, 16: 1, 32: 2, 64: 3}[t.bits]
    return {K_INTEGER: 4, K_FLOAT: 5, K_DOUBLE: 6}[t.kind]


def promote(a: CoreType, b: CoreType) -> CoreType:
    """Common type of mixed numeric operands: the higher of the two in
    int8 < int16 < int32 < int64 < integer < float32 < float64."""
    return a if _rank(a) >= _rank(b) else b


# ---------------------------------------------------------------------------
# arithmetic
#
# Every operator absorbs specials (leftmost wins).  Type errors and numeric
# failures (overflow past the result type's range, division by zero, any
# non-finite float result) produce fresh specials rather than exceptions, so
# they can be observed and filtered inside the evaluated program.

ARITH_OPS = ("+", "-", "*", "/", "mod")
ORDER_OPS = ("<", "<=", ">", ">=")
EQUALITY_OPS = ("=", "<>")


def _type_error(note: str, provenance: Provenance) -> CoreValue:
    prov = provenance or Provenance()
    if prov.note is None:
        prov = Provenance(prov.file, prov.line, prov.column, note)
    return special("typeerr", prov)


def _arith_error(note: str, provenance: Provenance) -> CoreValue:
    prov = provenance or Provenance()
    if prov.note is None:
        prov = Provenance(prov.file, prov.line, prov.column, note)
    return special("arith", prov)


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def _int_result(t: CoreType, n: int, provenance: Provenance) -> CoreValue:
    lo, hi = _INT_RANGE[t.bits if t.kind == K_SIZED_INTEGER else 64]
    if not lo <= n <= hi:
        return _arith_error(f"overflow in {t}", provenance)
    return CoreValue(t, n)


def _float_result(t: CoreType, x: float, provenance: Provenance) -> CoreValue:
    if t.kind == K_FLOAT:
        x = to_single(x)
    if not math.isfinite(x):
        return _arith_error(f"non-finite {t} result", provenance)
    return CoreValue(t, x)


def binary_arith(op: str, left: CoreValue, right: CoreValue,
                 provenance: Provenance = None) -> CoreValue:
    if is_special(left) or is_special(right):
        return combine_special(left, right)
    if not (is_numeric(left.type) and is_numeric(right.type)):
        return _type_error(f"operator {op} needs numeric operands, "
                           f"got {left.type} and {right.type}", provenance)
    t = promote(left.type, right.type)
    a, b = left.payload, right.payload
    if is_integral(t):
        if op == "+":
            return _int_result(t, a + b, provenance)
        if op == "-":
            return _int_result(t, a - b, provenance)
        if op == "*":
            return _int_result(t, a * b, provenance)
        if op == "/":
            if b == 0:
                return _arith_error("division by zero", provenance)
            return _int_result(t, _trunc_div(a, b), provenance)
        if op == "mod":
            if b == 0:
                return _arith_error("mod by zero", provenance)
            return _int_result(t, a - _trunc_div(a, b) * b, provenance)
    else:
        a, b = float(a), float(b)
        if op == "+":
            return _float_result(t, a + b, provenance)
        if op == "-":
            return _float_result(t, a - b, provenance)
        if op == "*":
            return _float_result(t, a * b, provenance)
        if op == "/":
            if b == 0.0:
                return _arith_error("division by zero", provenance)
            return _float_result(t, a / b, provenance)
        if op == "mod":
            if b == 0.0:
                return _arith_error("mod by zero", provenance)
            return _float_result(t, math.fmod(a, b), provenance)
    raise ValueError(f"unknown arithmetic operator: {op!r}")


def core_equal(left: CoreValue, right: CoreValue) -> bool:
    """Type-strict equality: distinct types are unequal even for equal
    numerals (`int8<42>` is not `int16<42>`)."""
    return left.type == right.type and left.payload == right.payload


def compare(op: str, left: CoreValue, right: CoreValue,
            provenance: Provenance = None) -> CoreValue:
    if is_special(left) or is_special(right):
        return combine_special(left, right)
    if op in EQUALITY_OPS:
        eq = core_equal(left, right)
        return boolean(eq if op == "=" else not eq)
    if op in ORDER_OPS:
        if not (is_numeric(left.type) and is_numeric(right.type)):
            return _type_error(f"operator {op} needs numeric operands, "
                               f"got {left.type} and {right.type}", provenance)
        a, b = left.payload, right.payload
        if op == "<":
            return boolean(a < b)
        if op == "<=":
            return boolean(a <= b)
        if op == ">":
            return boolean(a > b)
        return boolean(a >= b)
    raise ValueError(f"unknown comparison operator: {op!r}")


def negate(v: CoreValue, provenance: Provenance = None) -> CoreValue:
    if is_special(v):
        return v
    if not is_numeric(v.type):
        return _type_error(f"unary - needs a numeric operand, got {v.type}", provenance)
    if is_integral(v.type):
        return _int_result(v.type, -v.payload, provenance)
    return _float_result(v.type, -v.payload, provenance)


def logical_not(v: CoreValue, provenance: Provenance = None) -> CoreValue:
    if is_special(v):
        return v
    b = truth(v)
    if b is None:
        return _type_error(f"not needs a boolean operand, got {v.type}", provenance)
    return boolean(not b)


def truth(v: CoreValue):
    """Boolean reading of a value: booleans read as themselves, void reads
    as true, anything else has no boolean reading (None)."""
    if v.type.kind == K_BOOLEAN:
        return v.payload
    if v.type.kind == K_VOID:
        return True
    return None
