"""Problem data for ``a2 x'' + a1 x' + a0 x = x(p(z) + b x'(z)) + h(z)``."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Mapping

from .errors import InvalidInstance
from .gamma import (
    GammaSpec,
    InsideDisk,
    IrrationalRotation,
    Regime,
    RootOfUnity,
    classify,
    gamma_value,
)
from .series import TruncatedPowerSeries, get_field

__all__ = ["ProblemInstance", "worked_example"]

X0_RULES = ("balance", "a0p0")


@dataclass(frozen=True)
class ProblemInstance:
    """Full input of the solver pipeline.

    Parameters
    ----------
    a0, a1, a2, b : complex-like
        Equation constants.  ``a2`` and ``b`` must be nonzero.
    p, h : sequence or TruncatedPowerSeries
        The deviating-argument and forcing series.  A plain sequence is an
        exact polynomial and is zero-filled to ``order``; a series must already
        reach ``order``.
    gamma : GammaSpec
        The multiplier of the auxiliary conjugacy.
    eta : complex-like
        ``g'(0)``.  Zero is accepted and yields the trivial auxiliary solution.
    order : int
        Truncation order ``N`` of the auxiliary series ``g``.
    precision : str
        ``"double"`` or ``"extended:DIGITS"``.
    zero_tol, divisor_warn_tol : float, optional
        Resonance zero test and small-divisor warning threshold; defaults
        depend on the precision.
    free_coeffs : mapping
        Values for the coefficients left free at resonant steps, keyed by the
        resonance multiple ``v`` (the coefficient ``c_{v p + 1}``).  Missing
        entries default to zero.
    x0_rule : {"balance", "a0p0"}
        How ``x(0)`` is fixed, see :func:`statedelay.solution.x0_value`.

    Notes
    -----
    ``gamma`` may also be given as a plain number, which means
    :class:`InsideDisk`.
    """

    a0: object
    a1: object
    a2: object
    b: object
    p: object
    h: object
    gamma: GammaSpec
    eta: object = 1
    order: int = 20
    precision: str = "double"
    zero_tol: float = None
    divisor_warn_tol: float = None
    free_coeffs: Mapping = field(default_factory=dict)
    x0_rule: str = "balance"

    def __post_init__(self):
        fld = get_field(self.precision)
        object.__setattr__(self, "precision", fld.name)
        if not isinstance(self.gamma, (InsideDisk, IrrationalRotation, RootOfUnity)):
            object.__setattr__(self, "gamma", InsideDisk(self.gamma))
        if int(self.order) < 2:
            raise InvalidInstance("order must be at least 2")
        object.__setattr__(self, "order", int(self.order))
        for name in ("a0", "a1", "a2", "b", "eta"):
            object.__setattr__(self, name, fld.scalar(getattr(self, name)))
        for name in ("p", "h"):
            object.__setattr__(self, name, self._series(getattr(self, name), name, fld))
        if self.zero_tol is None:
            object.__setattr__(self, "zero_tol", fld.default_zero_tol)
        if self.divisor_warn_tol is None:
            object.__setattr__(self, "divisor_warn_tol", fld.default_divisor_warn_tol)
        object.__setattr__(
            self, "free_coeffs", {int(k): fld.scalar(v) for k, v in dict(self.free_coeffs).items()}
        )
        if self.x0_rule not in X0_RULES:
            raise InvalidInstance(f"x0_rule must be one of {X0_RULES}")
        if self.a2 == 0:
            raise InvalidInstance("a2 must be nonzero")
        if self.b == 0:
            raise InvalidInstance("b must be nonzero")
        classify(self.gamma)

    def _series(self, value, name, fld):
        if isinstance(value, TruncatedPowerSeries):
            if value.order < self.order:
                raise InvalidInstance(f"{name} has order {value.order} < {self.order}")
            return value.to_field(fld)
        coeffs = list(value)
        if len(coeffs) > self.order + 1:
            return TruncatedPowerSeries(coeffs, fld)
        return TruncatedPowerSeries.polynomial(coeffs, self.order, fld)

    @property
    def field(self):
        return get_field(self.precision)

    @cached_property
    def regime(self):
        return classify(self.gamma)

    @cached_property
    def gamma_value(self):
        return gamma_value(self.gamma, self.field)

    @property
    def on_unit_circle(self):
        return self.regime is not Regime.INSIDE_DISK

    def replace(self, **changes):
        return replace(self, **changes)


def worked_example(gamma=0.5, order=20, precision="double", eta=1, **kwargs):
    """The instance

    ``(1-2i) x'' + (1+i) x' + 3i x = x(2+i + 2iz + z^2 + (1+i) x') + 2 + (2-i) z + z^2``.
    """
    return ProblemInstance(
        a0=3j,
        a1=1 + 1j,
        a2=1 - 2j,
        b=1 + 1j,
        p=[2 + 1j, 2j, 1],
        h=[2, 2 - 1j, 1],
        gamma=gamma,
        eta=eta,
        order=order,
        precision=precision,
        **kwargs,
    )
