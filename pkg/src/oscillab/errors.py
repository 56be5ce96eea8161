"""Exception types shared across the package."""


class OscillabError(Exception):
    """Base class for all package errors."""


class ParseError(OscillabError):
    """Syntax or validation error in an expression string.

    Carries the byte offset of the offending token in ``offset``.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class DomainError(OscillabError, ArithmeticError):
    """A singular sub-operation during expression evaluation.

    ``kind`` is one of 'division_by_zero', 'log_nonpositive',
    'sqrt_negative', 'overflow'.  ``t`` is the evaluation point.
    """

    def __init__(self, kind: str, t: float, detail: str = ""):
        msg = f"{kind} at t={t!r}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.kind = kind
        self.t = t
        self.detail = detail


class SystemDefinitionError(OscillabError):
    """Malformed system-definition document."""


class IntegrationError(OscillabError):
    """ODE integration could not complete (and not because of blow-up)."""


class QuadratureError(OscillabError):
    """Adaptive quadrature failed to converge within its subdivision cap."""
