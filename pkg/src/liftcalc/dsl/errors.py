from __future__ import annotations


class DslError(ValueError):
    """Base class; ``pos`` is a 0-based character offset when known."""

    pos: int | None = None


class LexError(DslError):
    def __init__(self, pos: int, char: str, src: str = ""):
        self.pos, self.char, self.src = pos, char, src
        super().__init__(f"unexpected character {char!r} at position {pos}")


class ParseError(DslError):
    def __init__(self, pos: int, expected: list[str], got: str, src: str = ""):
        self.pos, self.expected, self.got, self.src = pos, expected, got, src
        super().__init__(f"at position {pos}: expected {' or '.join(expected)}, got {got}")


class UnknownVariable(DslError):
    def __init__(self, name: str, pos: int | None = None):
        self.name, self.pos = name, pos
        where = f" at position {pos}" if pos is not None else ""
        super().__init__(f"unknown variable {name!r}{where}")


class DomainError(ArithmeticError):
    """Evaluation left the domain of an operation; ``point`` is the offending sample."""

    def __init__(self, what: str, point: list[float]):
        self.what, self.point = what, point
        super().__init__(f"{what} at point ({', '.join(f'{c:.6g}' for c in point)})")


class SchemaError(ValueError):
    def __init__(self, field: str, reason: str):
        self.field, self.reason = field, reason
        super().__init__(f"{field}: {reason}")


class DimensionMismatch(ValueError):
    def __init__(self, obj: str, expected: int, got: int):
        self.obj, self.expected, self.got = obj, expected, got
        super().__init__(f"{obj}: expected {expected} entries, got {got}")
