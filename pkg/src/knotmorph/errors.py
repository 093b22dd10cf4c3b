"""Exception types shared across the package."""


class KnotMorphError(Exception):
    """Base class for all errors raised by knotmorph."""


class DomainError(KnotMorphError):
    """An argument is outside an operation's domain, or the geometry it
    describes is degenerate for that operation."""


class Aborted(KnotMorphError):
    """A long-running computation was canceled through its abort hook."""


class ParseError(KnotMorphError):
    """A text document could not be parsed; carries the offending line."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class GenericityError(DomainError):
    """A projection direction is not generic for the given polygon.

    Carries the offending segment pair so callers can report it or retry
    with a jittered direction.
    """

    def __init__(self, message, segment_pair=None):
        super().__init__(message)
        self.segment_pair = segment_pair


class ValidationError(DomainError):
    """Raised at parse boundaries when a polygon fails input validation.

    ``verdict`` holds the full list of violations.
    """

    def __init__(self, verdict):
        lines = "; ".join(v.message for v in verdict.violations)
        super().__init__(f"invalid control polygon: {lines}")
        self.verdict = verdict
