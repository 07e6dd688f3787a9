"""The multiplier gamma: regimes, continued fractions and small divisors.

Three regimes are distinguished:

* :class:`InsideDisk` -- ``0 < |gamma| < 1``; divisors ``|gamma^n - 1|`` tend to 1.
* :class:`IrrationalRotation` -- ``gamma = exp(2 pi i theta)`` with declared
  irrational ``theta``.  Whether ``theta`` is a Brjuno number cannot be decided
  from finitely many digits, so only partial sums of the Brjuno series are
  reported.
* :class:`RootOfUnity` -- ``gamma = exp(2 pi i q/p)`` in lowest terms.  The
  divisor ``gamma^n - 1`` vanishes exactly when ``p`` divides ``n``; that test
  is done on integers, never on floating values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Optional, Union

import mpmath

from .errors import InvalidGamma, PrecisionExhausted
from .series import DOUBLE, get_field

__all__ = [
    "ContinuedFraction",
    "GammaSpec",
    "InsideDisk",
    "IrrationalRotation",
    "Regime",
    "RootOfUnity",
    "SmallDivisorProfile",
    "brjuno_partial_sum",
    "brjuno_partial_sums",
    "classify",
    "continued_fraction",
    "continued_fraction_from_quotients",
    "gamma_power_minus_one",
    "gamma_value",
    "is_resonant",
    "log_divisor_growth",
    "rotation_number",
    "small_divisor_profile",
]


class Regime(str, enum.Enum):
    INSIDE_DISK = "inside_disk"
    IRRATIONAL_ROTATION = "irrational_rotation"
    ROOT_OF_UNITY = "root_of_unity"


@dataclass(frozen=True)
class InsideDisk:
    """``gamma`` strictly inside the punctured unit disk."""

    value: object


@dataclass(frozen=True)
class IrrationalRotation:
    """``gamma = exp(2 pi i theta)`` with ``theta`` in (0, 1) declared irrational.

    Give either ``theta`` (a decimal string, float, mpf or Fraction) or the
    partial quotients ``a1, a2, ...``.  With ``periodic=True`` the quotient
    list repeats forever, which represents quadratic irrationals exactly.
    """

    theta: object = None
    quotients: Optional[tuple] = None
    periodic: bool = False

    def __post_init__(self):
        if self.quotients is not None:
            object.__setattr__(self, "quotients", tuple(int(a) for a in self.quotients))


@dataclass(frozen=True)
class RootOfUnity:
    """``gamma = exp(2 pi i q / p)`` with ``gcd(|q|, p) == 1`` and ``p >= 2``."""

    q: int
    p: int


GammaSpec = Union[InsideDisk, IrrationalRotation, RootOfUnity]


def classify(spec):
    """Return the :class:`Regime` of a well-formed spec.

    Raises
    ------
    InvalidGamma
        ``|value|`` outside (0, 1), ``q/p`` not reduced, or an empty rotation.
    """
    if isinstance(spec, InsideDisk):
        modulus = abs(get_field("extended:40").scalar(spec.value))
        if not 0 < modulus < 1:
            raise InvalidGamma(f"|gamma| = {float(modulus):g} is not in (0, 1)")
        return Regime.INSIDE_DISK
    if isinstance(spec, IrrationalRotation):
        if spec.theta is None and not spec.quotients:
            raise InvalidGamma("irrational rotation needs theta or partial quotients")
        if spec.quotients is not None and any(a < 1 for a in spec.quotients):
            raise InvalidGamma("partial quotients must be positive integers")
        if spec.theta is not None:
            t = _as_fraction(spec.theta)[0]
            if not 0 < t < 1:
                raise InvalidGamma("theta must lie in (0, 1)")
        return Regime.IRRATIONAL_ROTATION
    if isinstance(spec, RootOfUnity):
        if spec.p < 2 or spec.q == 0:
            raise InvalidGamma("root of unity needs p >= 2 and q != 0")
        if math.gcd(abs(spec.q), spec.p) != 1:
            raise InvalidGamma(f"{spec.q}/{spec.p} is not in lowest terms")
        return Regime.ROOT_OF_UNITY
    raise InvalidGamma(f"not a gamma spec: {spec!r}")


# continued fractions ------------------------------------------------------


@dataclass(frozen=True)
class ContinuedFraction:
    """Partial quotients ``a_1..a_K`` of ``theta = [0; a_1, a_2, ...]``.

    ``convergents[n] = (p_n, q_n)`` for ``n = 0..K`` with ``(p_0, q_0) = (0, 1)``
    and ``q_{n+1} = a_{n+1} q_n + q_{n-1}``.
    """

    partial_quotients: tuple
    convergents: tuple
    rational: bool = False

    @property
    def denominators(self):
        return [q for _, q in self.convergents]

    def __len__(self):
        return len(self.partial_quotients)


def _convergents(quotients):
    p_prev, q_prev = 1, 0
    p, q = 0, 1
    out = [(p, q)]
    for a in quotients:
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        out.append((p, q))
    return tuple(out)


def continued_fraction_from_quotients(quotients, depth=None, periodic=False):
    """Build a :class:`ContinuedFraction` from explicit partial quotients."""
    quotients = [int(a) for a in quotients]
    if not quotients or any(a < 1 for a in quotients):
        raise ValueError("partial quotients must be a nonempty list of positive integers")
    if periodic:
        if depth is None:
            raise ValueError("a periodic expansion needs an explicit depth")
        quotients = [quotients[i % len(quotients)] for i in range(depth)]
    elif depth is not None:
        quotients = quotients[:depth]
    return ContinuedFraction(tuple(quotients), _convergents(quotients))


def _as_fraction(theta):
    """Exact midpoint and half-width of the interval ``theta`` stands for."""
    if isinstance(theta, Fraction):
        return theta, Fraction(0)
    if isinstance(theta, int):
        return Fraction(theta), Fraction(0)
    if isinstance(theta, str):
        s = theta.strip()
        if "/" in s:
            return Fraction(s), Fraction(0)
        try:
            dec = Decimal(s)
        except InvalidOperation as exc:
            raise ValueError(f"cannot parse theta {theta!r}") from exc
        exponent = dec.as_tuple().exponent
        return Fraction(dec), Fraction(1, 2) * Fraction(10) ** exponent
    if isinstance(theta, float):
        return Fraction(theta), Fraction(math.ulp(theta))
    if isinstance(theta, mpmath.mpf):
        man, exp = theta.man_exp
        value = Fraction(int(man)) * Fraction(2) ** int(exp)
        return value, Fraction(2) ** (int(exp) + int(theta.bc) - theta.context.prec)
    raise TypeError(f"unsupported theta type {type(theta).__name__}")


def continued_fraction(theta, depth):
    """First ``depth`` partial quotients of ``theta`` in (0, 1).

    ``theta`` may be a decimal string (taken to be accurate to half a unit in
    its last digit), an exact ``Fraction`` or ``"a/b"`` string, a float, an
    mpf, or a sequence of partial quotients.  Quotients are certified by
    running the Gauss map on both ends of the uncertainty interval.

    Raises
    ------
    PrecisionExhausted
        When the interval straddles a quotient boundary before ``depth``.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if isinstance(theta, (list, tuple)):
        return continued_fraction_from_quotients(theta, depth)
    mid, half = _as_fraction(theta)
    lo, hi = mid - half, mid + half
    if not (0 < lo and hi < 1):
        raise ValueError("theta must lie in (0, 1)")
    quotients = []
    rational = False
    while len(quotients) < depth:
        if lo == hi:
            if lo == 0:
                rational = True
                break
            inv = 1 / lo
            a = math.floor(inv)
            lo = hi = inv - a
        else:
            if lo <= 0:
                raise PrecisionExhausted(
                    f"input precision certifies only {len(quotients)} partial quotients", quotients
                )
            a_lo, a_hi = math.floor(1 / hi), math.floor(1 / lo)
            if a_lo != a_hi:
                raise PrecisionExhausted(
                    f"input precision certifies only {len(quotients)} partial quotients", quotients
                )
            a = a_lo
            lo, hi = 1 / hi - a, 1 / lo - a
        quotients.append(a)
    return ContinuedFraction(tuple(quotients), _convergents(quotients), rational=rational)


def brjuno_partial_sum(cf, terms):
    """``sum_{n=0}^{terms} log(q_{n+1}) / q_n`` with ``q_0 = 1``."""
    q = cf.denominators
    if terms < 0 or len(q) < terms + 2:
        raise ValueError(f"need {terms + 2} convergents, have {len(q)}")
    return math.fsum(math.log(q[n + 1]) / q[n] for n in range(terms + 1))


def brjuno_partial_sums(cf):
    """All partial sums ``B_0 .. B_{K-1}`` available from ``cf``."""
    q = cf.denominators
    out, acc = [], []
    for n in range(len(q) - 1):
        acc.append(math.log(q[n + 1]) / q[n])
        out.append(math.fsum(acc))
    return out


# gamma as a number --------------------------------------------------------


def _periodic_theta(spec, field):
    need = 10.0 ** (-(field.digits + 5))
    quotients = list(spec.quotients)
    depth = len(quotients)
    while True:
        cf = continued_fraction_from_quotients(quotients, depth, periodic=spec.periodic)
        p, q = cf.convergents[-1]
        if not spec.periodic or 1.0 / (q * q) < need:
            return Fraction(p, q)
        depth *= 2


def rotation_number(spec, field=DOUBLE):
    """``theta`` for unit-circle regimes: Fraction for roots of unity, else field real."""
    field = get_field(field)
    if isinstance(spec, RootOfUnity):
        return Fraction(spec.q, spec.p) % 1
    if isinstance(spec, IrrationalRotation):
        if spec.theta is not None:
            if isinstance(spec.theta, str) and "/" not in spec.theta:
                return field.real(spec.theta)
            return field.real(_as_fraction(spec.theta)[0])
        return field.real(_periodic_theta(spec, field))
    raise InvalidGamma("inside-disk gamma has no rotation number")


def gamma_value(spec, field=DOUBLE):
    """Materialize ``gamma`` as a scalar of ``field``."""
    field = get_field(field)
    if isinstance(spec, InsideDisk):
        return field.scalar(spec.value)
    theta = rotation_number(spec, field)
    if isinstance(theta, Fraction):
        if (4 * theta).denominator == 1:
            return field.scalar((1, 1j, -1, -1j)[int(4 * theta)])
        theta = field.real(theta)
    return field.exp(2 * field.pi * theta * field.scalar(1j))


def is_resonant(spec, n):
    """Exact test for ``gamma^n == 1`` (only possible for roots of unity)."""
    return isinstance(spec, RootOfUnity) and n % spec.p == 0


def gamma_power_minus_one(spec, n, field=DOUBLE):
    """``gamma^n - 1`` evaluated without cancellation on the unit circle.

    For rotations ``exp(2 pi i phi) - 1 = 2 i sin(pi phi) exp(i pi phi)`` with
    ``phi = frac(n theta)``; for roots of unity ``phi`` is an exact rational
    and the resonant case returns an exact zero.
    """
    field = get_field(field)
    if isinstance(spec, InsideDisk):
        return field.scalar(spec.value) ** n - 1
    if isinstance(spec, RootOfUnity):
        if is_resonant(spec, n):
            return field.scalar(0)
        phi = field.real(Fraction(n * spec.q % spec.p, spec.p))
    else:
        t = rotation_number(spec, field) * n
        phi = t - math.floor(t) if field is DOUBLE else t - field.ctx.floor(t)
    i = field.scalar(1j)
    return 2 * i * field.sin(field.pi * phi) * field.exp(i * field.pi * phi)


# small divisors -----------------------------------------------------------


@dataclass(frozen=True)
class SmallDivisorProfile:
    """``|gamma^n - 1|`` for ``n = 1..n_max`` plus regime-specific extras.

    ``divisors[n - 1]`` holds ``|gamma^n - 1|``.  ``gamma_cap`` is
    ``max_{1<=k<=p-1} 1/|gamma^k - 1|`` for roots of unity.
    """

    gamma: complex
    divisors: tuple
    min_divisor: float
    argmin: int
    regime: Regime
    brjuno_partial: Optional[float] = None
    brjuno_terms: Optional[int] = None
    gamma_cap: Optional[float] = None
    resonant: tuple = ()
    continued_fraction: Optional[ContinuedFraction] = field(default=None, repr=False)

    def divisor(self, n):
        return self.divisors[n - 1]


def _rotation_cf(spec, depth=60):
    if spec.quotients is not None:
        if spec.periodic:
            return continued_fraction_from_quotients(spec.quotients, depth, periodic=True)
        return continued_fraction_from_quotients(spec.quotients, min(depth, len(spec.quotients)))
    try:
        return continued_fraction(spec.theta, depth)
    except PrecisionExhausted as exc:
        if len(exc.certified) < 2:
            return None
        return continued_fraction_from_quotients(exc.certified)


def small_divisor_profile(spec, n_max, cf_depth=60):
    """Tabulate ``|gamma^n - 1|`` for ``n = 1..n_max``.

    Unit-circle divisors are computed as ``2 |sin(pi n theta)|`` at 40 digits;
    for roots of unity the zero set is the exact multiples of ``p``.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    regime = classify(spec)
    work = get_field("extended:40")
    divisors = []
    for n in range(1, n_max + 1):
        if regime is Regime.INSIDE_DISK:
            divisors.append(float(abs(gamma_power_minus_one(spec, n, work))))
        elif is_resonant(spec, n):
            divisors.append(0.0)
        else:
            divisors.append(float(abs(gamma_power_minus_one(spec, n, work))))
    argmin = min(range(n_max), key=lambda i: divisors[i]) + 1
    extras = {}
    if regime is Regime.ROOT_OF_UNITY:
        extras["gamma_cap"] = max(
            1.0 / float(abs(gamma_power_minus_one(spec, k, work))) for k in range(1, spec.p)
        )
        extras["resonant"] = tuple(n for n in range(1, n_max + 1) if is_resonant(spec, n))
    elif regime is Regime.IRRATIONAL_ROTATION:
        cf = _rotation_cf(spec, cf_depth)
        if cf is not None and len(cf.convergents) >= 2:
            terms = len(cf.convergents) - 2
            extras["brjuno_partial"] = brjuno_partial_sum(cf, terms)
            extras["brjuno_terms"] = terms
            extras["continued_fraction"] = cf
    return SmallDivisorProfile(
        gamma=complex(gamma_value(spec, work)),
        divisors=tuple(divisors),
        min_divisor=divisors[argmin - 1],
        argmin=argmin,
        regime=regime,
        **extras,
    )


def log_divisor_growth(profile):
    """Cumulative ``S(n) = sum_{j<=n} -log|gamma^j - 1|`` over nonresonant ``j``.

    ``S`` is the smallest function with ``-log|gamma^n - 1| <= S(n) - S(n-1)``.
    The report counts pairs with ``S(n1) + S(n2) > S(n1 + n2)`` (failures of
    superadditivity) and gives ``max S(n)/n``, an empirical lower estimate for
    the exponential rate that small divisors contribute.
    """
    s, cumulative = 0.0, []
    for d in profile.divisors:
        if d > 0:
            s += -math.log(d)
        cumulative.append(s)
    n_max = len(cumulative)
    violations = 0
    for n1 in range(1, n_max):
        for n2 in range(n1, n_max - n1 + 1):
            if cumulative[n1 - 1] + cumulative[n2 - 1] > cumulative[n1 + n2 - 1] + 1e-12:
                violations += 1
    rate = max(cumulative[n - 1] / n for n in range(1, n_max + 1))
    return {"cumulative": cumulative, "superadditivity_violations": violations, "max_rate": rate}
