"""Exception hierarchy shared across the package.

Everything raised on purpose derives from :class:`ZWError`, so callers (in
particular the command-line layer) can distinguish our failures from genuine
bugs and map them onto exit codes.
"""

from __future__ import annotations


class ZWError(Exception):
    """Base class for all errors raised by this package."""


class DiagramError(ZWError):
    """A structural operation received or would produce a malformed diagram."""


class TermSyntaxError(ZWError):
    """The term text could not be tokenized or parsed.

    Carries the 1-based ``line`` and ``column`` of the offending character.
    """

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class TermTypeError(ZWError):
    """A sequential composition's wire counts do not agree."""


class LegCapError(ZWError):
    """A diagram has more open legs than the configured cap allows."""


class MatchScopeError(ZWError):
    """A rule's left-hand side is outside the matcher's supported scope."""


class InvalidMatchError(ZWError):
    """A match object does not fit the host diagram it is applied to."""
