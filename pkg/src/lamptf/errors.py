"""Exception hierarchy shared by the lamptf modules."""


class LampTFError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(LampTFError, ValueError):
    """The Lampariello parameter lies outside the supported range."""


class DegenerateParameterError(ParameterError):
    """p = 0: the family collapses to a linear equation."""


class UndefinedExponentError(ParameterError):
    """p = -1: the exponent maps divide by zero."""


class DomainError(LampTFError, ValueError):
    """An argument leaves the real domain of a fractional power."""


class SingularityError(LampTFError, ValueError):
    """Evaluation at a singular point or on a singular locus."""


class ExcludedPointError(SingularityError):
    """The Abel invariant vanishes, so the integrability ratio is undefined."""


class RhsDomainError(LampTFError, ValueError):
    """A right-hand side raised while the integrator evaluated it.

    The offending time and state are kept so callers can report where the
    trajectory left the domain.
    """

    def __init__(self, t, state, cause):
        self.t = t
        self.state = state
        super().__init__(f"rhs failed at t={t!r}, state={list(state)!r}: {cause}")


class StepUnderflowError(LampTFError, ArithmeticError):
    """The step controller drove the step size below the resolvable limit."""


class BracketError(LampTFError, RuntimeError):
    """No undershoot/overshoot pair could be found for the slope bisection."""
