"""Exception and warning types raised across the package."""


class StateDelayError(Exception):
    """Base class for all package errors."""


class NonFiniteError(StateDelayError, ArithmeticError):
    """A coefficient or scalar became NaN or infinite."""


class NonzeroInnerConstant(StateDelayError, ValueError):
    """Composition f(g) was requested with g(0) != 0."""


# the verifier speaks of the inner argument of x(p + b x'), same condition
InnerConstantNonzero = NonzeroInnerConstant


class NotInvertible(StateDelayError, ValueError):
    """Compositional inverse requested for a series with f0 != 0 or f1 == 0."""


class InvalidGamma(StateDelayError, ValueError):
    """The multiplier does not satisfy the invariants of its declared regime."""


class PrecisionExhausted(StateDelayError, ArithmeticError):
    """The working precision cannot certify the next partial quotient.

    ``certified`` holds the quotients that were certified before failing.
    """

    def __init__(self, message, certified=()):
        super().__init__(message)
        self.certified = list(certified)


class DegenerateGamma(StateDelayError, ValueError):
    """gamma == 1 makes the coefficient recurrence singular."""


class DegenerateA0(StateDelayError, ValueError):
    """a0 == 1 makes the closed form for x(0) singular."""


class InvalidInstance(StateDelayError, ValueError):
    """A problem instance violates its invariants."""


class NoAnalyticSolution(StateDelayError):
    """A resonant step has a nonzero right-hand side.

    Attributes
    ----------
    n : int
        Recurrence index (the obstructed coefficient is ``c_{n+2}``).
    theta : complex
        The nonvanishing right-hand side at that step.
    v : int
        Resonance multiple, ``n + 1 == v * p``.
    """

    def __init__(self, n, theta, v=None):
        self.n = n
        self.theta = theta
        self.v = v
        super().__init__(
            f"resonant step n={n} (v={v}) has |theta|={float(abs(theta)):.3e}; "
            "no analytic solution exists"
        )


class OracleTooLarge(StateDelayError, ValueError):
    """The literal partition-sum oracle was asked for an index beyond its cap."""


class NoFoldFound(StateDelayError):
    """The implicit branch stayed regular up to ``z_max``; that is a lower bound."""

    def __init__(self, z_max):
        self.z_max = z_max
        super().__init__(f"no singularity of the majorant branch below z={z_max:g}")


class InsufficientData(StateDelayError, ValueError):
    """Not enough nonzero coefficients for a growth fit."""


class ConfigError(StateDelayError, ValueError):
    """A run configuration could not be parsed or validated."""


class SmallDivisorWarning(RuntimeWarning):
    """|gamma^(n+1) - 1| fell below the conditioning threshold."""
