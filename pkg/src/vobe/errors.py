"""Shared exception types."""


class VobeError(Exception):
    """Base class for all registry/engine errors."""


class ResolutionError(VobeError):
    """A reference does not resolve to a known entity."""


class NoVariantError(VobeError):
    """No capability variant matches the query and no default variant exists."""


class PropertyMissingError(VobeError):
    """The property a predicate is evaluated against is not defined."""


class EvalTypeError(VobeError):
    """Predicate operand and property value have incompatible types."""


class DslSyntaxError(VobeError):
    """Lexical or syntax error in a class definition file."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class SpecValidationError(VobeError):
    """A VO specification document failed validation."""


class AmbiguousServiceError(VobeError):
    """More than one service of an organization qualifies for a role."""


class CapExceededError(VobeError):
    """The raw assignment count exceeds the configured enumeration cap.

    Tighten role requirements (or raise the cap) and retry.
    """

    def __init__(self, count: int, cap: int):
        super().__init__(
            f"{count} assignments exceed the enumeration cap of {cap}; "
            "tighten requirements or raise the cap"
        )
        self.count = count
        self.cap = cap


class StorageError(VobeError):
    """The persistent store could not complete an operation."""
