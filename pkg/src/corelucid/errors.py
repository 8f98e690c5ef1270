"""Exception hierarchy shared by all corelucid modules."""

from __future__ import annotations


class CoreLucidError(Exception):
    """Base class for all errors raised by this package."""


# --- context values ---------------------------------------------------------

class ContextError(CoreLucidError):
    pass


class InvalidDimensionName(ContextError):
    pass


class InvalidTag(ContextError):
    pass


class NoSuchChild(ContextError):
    """Cursor descent into a dimension that is absent or a leaf."""


class AtRoot(ContextError):
    """Cursor ascent attempted at the tree root."""


class ContextSyntaxError(ContextError):
    """Malformed textual context literal (CLI / manifest input)."""

    def __init__(self, message: str, position: int = 0):
        super().__init__(message)
        self.position = position


# --- type system ------------------------------------------------------------

class TypeSystemError(CoreLucidError):
    pass


class UnknownForeignType(TypeSystemError):
    pass


class UnmappableType(TypeSystemError):
    pass


class OutOfRange(TypeSystemError):
    """Typed literal lexeme outside the kind's value domain."""


class MalformedLexeme(TypeSystemError):
    """Typed literal lexeme that does not parse in the kind's domain."""


# --- parsing ----------------------------------------------------------------

class ParseError(CoreLucidError):
    """Source syntax error with position and the token set that was legal."""

    def __init__(self, message: str, line: int, column: int,
                 expected: frozenset[str] = frozenset()):
        super().__init__(f"{line}:{column}: {message}")
        self.bare_message = message
        self.line = line
        self.column = column
        self.expected = expected


# --- evaluation -------------------------------------------------------------

class EngineError(CoreLucidError):
    pass


class DepthExceeded(EngineError):
    """Demand nesting passed the configured limit; likely non-termination."""


class BudgetExceeded(EngineError):
    """Evaluation exceeded the configured work budget."""


class WarehouseConflict(EngineError):
    """Attempt to overwrite a stored demand with a different value."""


class NotCoreExpression(EngineError):
    """Evaluator received an untranslated surface operator."""


# --- hybrid program preprocessing -------------------------------------------

class SegmentError(CoreLucidError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class NoIntensionalSegment(SegmentError):
    pass


class DuplicateDeclSegment(SegmentError):
    pass


class UnknownTag(SegmentError):
    pass


class MalformedPrototype(CoreLucidError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownTypeName(CoreLucidError):
    pass


class DuplicateSymbol(CoreLucidError):
    pass


# --- provider dispatch --------------------------------------------------------

class ProviderError(CoreLucidError):
    pass


class MissingProvider(ProviderError):
    """Raised when prototypes have no provider bound for their language tag."""

    def __init__(self, unbound: list[str]):
        super().__init__("no provider for: " + ", ".join(sorted(unbound)))
        self.unbound = sorted(unbound)


class ResultTypeMismatch(ProviderError):
    pass
