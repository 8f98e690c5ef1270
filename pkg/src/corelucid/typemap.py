"""Foreign/core type matching for hybrid programs.

The mapping has two halves per language tag: return types of foreign
functions map into core types, and core parameter types map out to foreign
type names.  The JAVA tag ships fully populated; a small C++ set is
registered for the CPP tag; further tags (or extra rows) load from a plain
tab-separated file.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import values
from .errors import UnknownForeignType, UnknownTypeName, UnmappableType
from .values import CoreType

# Return rows: (foreign type names, usage hint, core type).  A hint
# disambiguates foreign names that map to several core types; resolution
# without a hint takes the first row that matches the name.
_JAVA_RETURN_ROWS = (
    (("int", "byte", "long"), None, values.INTEGER),
    (("float",), None, values.FLOAT),
    (("double",), None, values.DOUBLE),
    (("boolean",), None, values.BOOLEAN),
    (("char",), None, values.CHARACTER),
    (("String",), None, values.STRING),
    (("Method",), "function", values.FUNCTION),
    (("Method",), "operator", values.OPERATOR),
    (("[]",), None, values.array_of(values.INTEGER)),
    (("Object",), "class", values.object_of("Object")),
    (("Object",), "URL", values.EMBED),
    (("void",), None, values.VOID),
)

# Parameter rows: (core type, foreign type names).  A core type listing
# several foreign names picks the first unless the call site supplies a
# better fit (integer vs string dimension tags).
_JAVA_PARAM_ROWS = (
    (values.STRING, ("String",)),
    (values.FLOAT, ("float",)),
    (values.DOUBLE, ("double",)),
    (values.INTEGER, ("int",)),
    (values.DIMENSION, ("int", "String")),
    (values.BOOLEAN, ("boolean",)),
    (values.object_of("Object"), ("Object",)),
    (values.EMBED, ("Object",)),
    (values.array_of(values.INTEGER), ("[]",)),
    (values.OPERATOR, ("Method",)),
    (values.FUNCTION, ("Method",)),
)

_CPP_RETURN_ROWS = (
    (("int", "long"), None, values.INTEGER),
    (("float",), None, values.FLOAT),
    (("double",), None, values.DOUBLE),
    (("bool",), None, values.BOOLEAN),
    (("char",), None, values.CHARACTER),
    (("string", "std::string"), None, values.STRING),
    (("void",), None, values.VOID),
)

_CPP_PARAM_ROWS = (
    (values.STRING, ("std::string",)),
    (values.FLOAT, ("float",)),
    (values.DOUBLE, ("double",)),
    (values.INTEGER, ("int",)),
    (values.DIMENSION, ("int", "std::string")),
    (values.BOOLEAN, ("bool",)),
)


@dataclass(frozen=True)
class FunctionPrototype:
    """A declared foreign function: its name, signature, and where the body
    lives (a tagged segment, or a remote resource given by URL)."""

    name: str
    return_type: CoreType
    param_types: tuple
    language_tag: str
    source_url: Optional[str] = None
    alias: Optional[str] = None
    line: Optional[int] = None

    @property
    def call_name(self) -> str:
        return self.alias or self.name


@dataclass
class TypeMappingTable:
    """Per-tag return and parameter maps, extendable at runtime."""

    return_rows: dict = field(default_factory=dict)   # tag -> list of rows
    param_rows: dict = field(default_factory=dict)    # tag -> list of rows
    user_types: dict = field(default_factory=dict)    # tag -> set of names

    @classmethod
    def with_defaults(cls) -> "TypeMappingTable":
        table = cls()
        table.return_rows["JAVA"] = list(_JAVA_RETURN_ROWS)
        table.param_rows["JAVA"] = list(_JAVA_PARAM_ROWS)
        table.return_rows["CPP"] = list(_CPP_RETURN_ROWS)
        table.param_rows["CPP"] = list(_CPP_PARAM_ROWS)
        return table

    def known_tags(self):
        return sorted(set(self.return_rows) | set(self.param_rows))

    def register_user_type(self, tag: str, name: str):
        self.user_types.setdefault(tag, set()).add(name)

    def map_foreign_return(self, foreign: str, tag: str,
                           hint: str = None) -> CoreType:
        """Core type of a foreign return type name under `tag`.

        `hint` selects among multi-row foreign names ("function" vs
        "operator" for Method, "class" vs "URL" for Object).  `T[]` maps to
        an array of the mapping of `T`.
        """
        rows = self.return_rows.get(tag)
        if rows is None:
            raise UnknownForeignType(f"no type mapping registered for tag {tag!r}")
        if foreign.endswith("[]") and foreign != "[]":
            element = self.map_foreign_return(foreign[:-2], tag, hint)
            return values.array_of(element)
        fallback = None
        for names, row_hint, core in rows:
            if foreign not in names:
                continue
            if hint is not None and row_hint is not None:
                if row_hint == hint:
                    return core
                continue
            if fallback is None:
                fallback = core
        if fallback is not None:
            return fallback
        if foreign in self.user_types.get(tag, ()):
            return values.object_of(foreign)
        raise UnknownForeignType(f"no {tag} mapping for foreign type {foreign!r}")

    def map_core_param(self, t: CoreType, tag: str,
                       dimension_tag=None) -> str:
        """Foreign parameter type name for a core type under `tag`.

        Dimensions pass as the foreign integer type when the runtime tag is
        an integer and as the string type when it is a string."""
        rows = self.param_rows.get(tag)
        if rows is None:
            raise UnmappableType(f"no type mapping registered for tag {tag!r}")
        if t.kind == values.K_ARRAY:
            return self.map_core_param(t.element_type, tag, dimension_tag) + "[]"
        for core, names in rows:
            if not _param_matches(core, t):
                continue
            if t.kind == values.K_DIMENSION and isinstance(dimension_tag, str):
                if len(names) > 1:
                    return names[1]
            return names[0]
        raise UnmappableType(f"no {tag} parameter mapping for core type {t}")


def _param_matches(row_type: CoreType, t: CoreType) -> bool:
    if row_type == t:
        return True
    # any user object type matches the generic object row
    return row_type.kind == values.K_OBJECT and t.kind == values.K_OBJECT


_CORE_TYPE_NAMES = {
    "Integer": values.INTEGER,
    "Float": values.FLOAT,
    "Double": values.DOUBLE,
    "Boolean": values.BOOLEAN,
    "Character": values.CHARACTER,
    "String": values.STRING,
    "Function": values.FUNCTION,
    "Operator": values.OPERATOR,
    "Embed": values.EMBED,
    "Void": values.VOID,
    "Identifier": values.IDENTIFIER,
    "Context": values.CONTEXT,
    "Dimension": values.DIMENSION,
}


def parse_core_type_name(text: str) -> CoreType:
    text = text.strip()
    if text in _CORE_TYPE_NAMES:
        return _CORE_TYPE_NAMES[text]
    if text.startswith("int") and text[3:] in ("8", "16", "32", "64"):
        return values.sized_integer(int(text[3:]))
    if text.endswith("[]"):
        return values.array_of(parse_core_type_name(text[:-2]))
    if text.startswith("Object(") and text.endswith(")"):
        return values.object_of(text[len("Object("):-1])
    raise UnknownTypeName(f"unknown core type name: {text!r}")


def load_mapping_rows(table: TypeMappingTable, text: str, source: str = "<mapping>"):
    """Extend `table` from tab-separated rows.

    Line forms (blank lines and `#` comments ignored):
        return<TAB>TAG<TAB>foreignName[,name...]<TAB>CoreType[<TAB>hint]
        param<TAB>TAG<TAB>CoreType<TAB>foreignName[,name...]
    """
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in raw.split("\t")]
        where = f"{source}:{lineno}"
        if parts[0] == "return":
            if len(parts) not in (4, 5):
                raise UnknownTypeName(f"{where}: return row needs 4 or 5 fields")
            _, tag, names, core = parts[:4]
            hint = parts[4] if len(parts) == 5 else None
            table.return_rows.setdefault(tag, []).append(
                (tuple(n.strip() for n in names.split(",")), hint,
                 parse_core_type_name(core)))
        elif parts[0] == "param":
            if len(parts) != 4:
                raise UnknownTypeName(f"{where}: param row needs 4 fields")
            _, tag, core, names = parts
            table.param_rows.setdefault(tag, []).append(
                (parse_core_type_name(core),
                 tuple(n.strip() for n in names.split(","))))
        else:
            raise UnknownTypeName(f"{where}: row must start with return or param")


def load_mapping_file(table: TypeMappingTable, path: str):
    with open(path, encoding="utf-8") as fh:
        load_mapping_rows(table, fh.read(), source=path)
