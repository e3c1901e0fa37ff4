"""Exception hierarchy shared by every refcheck stage."""

from __future__ import annotations


class RefcheckError(Exception):
    """Base class; ``line``/``col`` are 1-based and may be ``None``."""

    kind = "error"

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(self.__str__())

    def __str__(self) -> str:
        if self.line is None:
            return f"{self.kind}: {self.message}"
        return f"{self.line}:{self.col}: {self.kind}: {self.message}"


class ParseError(RefcheckError):
    kind = "syntax error"

    def __init__(self, expected: str, line: int | None = None, col: int | None = None, found: str | None = None):
        self.expected = expected
        self.found = found
        msg = f"expected {expected}" if found is None else f"expected {expected}, found {found}"
        super().__init__(msg, line, col)


class RegexSyntaxError(RefcheckError):
    kind = "regex syntax error"

    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} (at offset {position})")


class UnsupportedConstruct(RefcheckError):
    kind = "unsupported regex construct"

    def __init__(self, construct: str, position: int):
        self.construct = construct
        self.position = position
        super().__init__(f"{construct} (at offset {position})")


class PredicateSyntaxError(RefcheckError):
    kind = "predicate syntax error"


class UnknownVariable(RefcheckError):
    kind = "unknown variable"


class NonlinearTerm(RefcheckError):
    kind = "nonlinear term"


class DuplicateName(RefcheckError):
    kind = "duplicate name"


class RefinementKindError(RefcheckError):
    """Regex refinement on a non-string, or predicate on a non-numeric kind."""

    kind = "refinement on wrong basic kind"


class UnresolvedName(RefcheckError):
    kind = "unresolved name"

    def __init__(self, name: str, line: int | None = None, col: int | None = None):
        self.name = name
        super().__init__(name, line, col)


class RecursiveType(RefcheckError):
    kind = "recursive type"

    def __init__(self, cycle: list[str], line: int | None = None, col: int | None = None):
        self.cycle = cycle
        super().__init__(" -> ".join(cycle), line, col)


class UndefinedVariable(RefcheckError):
    kind = "undefined variable"

    def __init__(self, var: str, line: int | None = None, col: int | None = None):
        self.var = var
        super().__init__(var, line, col)


class PathThroughScalar(RefcheckError):
    kind = "static type error"


class JsonSyntaxError(RefcheckError):
    kind = "invalid JSON value"


class NestingTooDeep(JsonSyntaxError):
    kind = "nesting too deep"


class UnknownTypeName(RefcheckError):
    kind = "unknown type"
