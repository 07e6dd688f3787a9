"""Truncated formal power series over complex coefficients.

A :class:`TruncatedPowerSeries` stores ``c_0 .. c_N`` and nothing beyond: a
coefficient is either fully determined or absent.  Binary operations truncate
to the smaller operand order, composition needs a zero inner constant, and
differentiation/integration move the order by one.

Two coefficient fields are supported.  :data:`DOUBLE` keeps coefficients in a
``complex128`` array; :class:`ExtendedField` keeps ``mpmath`` complex numbers
in an object array, each field owning a private ``MPContext`` so different
precisions never share the global mpmath state.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Number

import gmpy2
import mpmath
import numpy as np
from mpmath.libmp import fzero, from_man_exp

from .errors import NonFiniteError, NonzeroInnerConstant, NotInvertible

__all__ = [
    "DOUBLE",
    "DoubleField",
    "ExtendedField",
    "TruncatedPowerSeries",
    "add",
    "compose",
    "compose_many",
    "differentiate",
    "dilate",
    "evaluate",
    "get_field",
    "integrate",
    "invert",
    "mul",
    "reciprocal",
]


class DoubleField:
    """Machine double precision complex coefficients."""

    name = "double"
    dtype = np.complex128
    digits = 15
    default_zero_tol = 1e-12
    default_divisor_warn_tol = 1e-8

    def scalar(self, x):
        if isinstance(x, (mpmath.mpc, mpmath.mpf)):
            x = complex(x)
        elif isinstance(x, str):
            x = complex(x.replace(" ", "").replace("i", "j"))
        elif isinstance(x, Fraction):
            x = float(x)
        elif isinstance(x, (tuple, list)):
            x = complex(float(x[0]), float(x[1]))
        x = complex(x)
        if not cmath.isfinite(x):
            raise NonFiniteError(f"non-finite scalar {x!r}")
        return x

    def real(self, x):
        if isinstance(x, str):
            x = float(x)
        return float(x)

    def array(self, values):
        if isinstance(values, np.ndarray) and values.dtype == np.complex128:
            return values.copy()
        return np.array([self.scalar(v) for v in values], dtype=np.complex128)

    def zeros(self, n):
        return np.zeros(n, dtype=np.complex128)

    def all_finite(self, arr):
        return bool(np.all(np.isfinite(arr)))

    def exp(self, x):
        return cmath.exp(x)

    def sin(self, x):
        return math.sin(x)

    @property
    def pi(self):
        return math.pi

    def pair(self, x):
        """``[re, im]`` for serialization."""
        return [float(x.real), float(x.imag)]

    def __repr__(self):
        return "DOUBLE"


def _mpf_to_mpfr(t):
    sign, man, exp, bc = t
    if not man:
        if bc:
            raise NonFiniteError("non-finite value in an extended-precision kernel")
        return gmpy2.mpfr(0)
    v = gmpy2.mul_2exp(gmpy2.mpfr(man), exp)
    return -v if sign else v


def _mpfr_to_mpf(v, prec):
    if not gmpy2.is_finite(v):
        raise NonFiniteError("non-finite value in an extended-precision kernel")
    if not v:
        return fzero
    man, exp = v.as_mantissa_exp()
    return from_man_exp(int(man), int(exp), prec, "n")


class ExtendedField:
    """Software complex arithmetic at ``digits`` significant decimal digits."""

    dtype = object

    def __init__(self, digits=50):
        if digits < 16:
            raise ValueError("extended precision needs at least 16 digits")
        self.digits = int(digits)
        self.ctx = mpmath.MPContext()
        self.ctx.dps = self.digits
        self.default_zero_tol = 10.0 ** (-self.digits + 10)
        self.default_divisor_warn_tol = 10.0 ** (-self.digits // 2)

    @property
    def name(self):
        return f"extended:{self.digits}"

    def scalar(self, x):
        ctx = self.ctx
        if isinstance(x, (tuple, list)):
            return ctx.mpc(self.real(x[0]), self.real(x[1]))
        if isinstance(x, str):
            s = x.replace(" ", "")
            try:
                return ctx.mpc(ctx.mpf(s))
            except (ValueError, TypeError):
                z = complex(s.replace("i", "j"))
                return ctx.mpc(z.real, z.imag)
        if isinstance(x, Fraction):
            return ctx.mpc(ctx.mpf(x.numerator) / x.denominator)
        if isinstance(x, mpmath.mpc):
            return ctx.mpc(x.real, x.imag)
        v = ctx.mpc(x)
        if not ctx.isfinite(v):
            raise NonFiniteError(f"non-finite scalar {x!r}")
        return v

    # Kernels (convolution, power tables, inversion) run on gmpy2 numbers at
    # the same binary precision; conversion both ways is exact.

    def fast_context(self):
        return gmpy2.context(precision=self.ctx.prec)

    def to_fast(self, arr):
        out = np.empty(len(arr), dtype=object)
        for i, z in enumerate(arr):
            re, im = z._mpc_
            out[i] = gmpy2.mpc(_mpf_to_mpfr(re), _mpf_to_mpfr(im))
        return out

    def from_fast(self, arr):
        prec, make = self.ctx.prec, self.ctx.make_mpc
        out = np.empty(len(arr), dtype=object)
        for i, z in enumerate(arr):
            out[i] = make((_mpfr_to_mpf(z.real, prec), _mpfr_to_mpf(z.imag, prec)))
        return out

    def real(self, x):
        if isinstance(x, Fraction):
            return self.ctx.mpf(x.numerator) / x.denominator
        return self.ctx.mpf(x)

    def array(self, values):
        out = np.empty(len(values), dtype=object)
        for i, v in enumerate(values):
            out[i] = self.scalar(v)
        return out

    def zeros(self, n):
        out = np.empty(n, dtype=object)
        zero = self.ctx.mpc(0)
        for i in range(n):
            out[i] = zero
        return out

    def all_finite(self, arr):
        isfinite = self.ctx.isfinite
        return all(isfinite(v) for v in arr)

    def exp(self, x):
        return self.ctx.exp(x)

    def sin(self, x):
        return self.ctx.sin(x)

    @property
    def pi(self):
        return +self.ctx.pi

    def pair(self, x):
        n = self.digits
        return [mpmath.nstr(x.real, n, strip_zeros=False), mpmath.nstr(x.imag, n, strip_zeros=False)]

    def __repr__(self):
        return f"ExtendedField({self.digits})"


DOUBLE = DoubleField()


@lru_cache(maxsize=None)
def _extended(digits):
    return ExtendedField(digits)


def get_field(spec="double"):
    """Field from a precision string: ``"double"`` or ``"extended:DIGITS"``."""
    if isinstance(spec, (DoubleField, ExtendedField)):
        return spec
    spec = str(spec).strip().lower()
    if spec == "double":
        return DOUBLE
    if spec.startswith("extended"):
        _, _, digits = spec.partition(":")
        return _extended(int(digits) if digits else 50)
    raise ValueError(f"unknown precision {spec!r}")


def _wider(f1, f2):
    if f1 is f2:
        return f1
    d1 = f1.digits if isinstance(f1, ExtendedField) else 0
    d2 = f2.digits if isinstance(f2, ExtendedField) else 0
    return f1 if d1 >= d2 else f2


def _conv(a, b, n, field=None):
    """Cauchy product of coefficient arrays, truncated to order ``n``."""
    if field is None or field is DOUBLE:
        return np.convolve(a[: n + 1], b[: n + 1])[: n + 1]
    with field.fast_context():
        arr = np.convolve(field.to_fast(a[: n + 1]), field.to_fast(b[: n + 1]))[: n + 1]
        return field.from_fast(arr)


class TruncatedPowerSeries:
    """Coefficients ``c_0..c_N`` of a power series known through order ``N``.

    Instances are immutable; the coefficient array is read-only.

    >>> f = TruncatedPowerSeries([1, 1])
    >>> (f * TruncatedPowerSeries([1, -1])).order
    1
    """

    __slots__ = ("_c", "field")

    def __init__(self, coeffs, field=None):
        if field is None:
            field = _infer_field(coeffs)
        else:
            field = get_field(field)
        arr = field.array(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs)
        if arr.ndim != 1 or len(arr) == 0:
            raise ValueError("a truncated series needs at least the constant coefficient")
        self._set(arr, field)

    def _set(self, arr, field):
        if not field.all_finite(arr):
            raise NonFiniteError("series operation produced a non-finite coefficient")
        arr.setflags(write=False)
        self._c = arr
        self.field = field

    @classmethod
    def _wrap(cls, arr, field):
        obj = cls.__new__(cls)
        obj._set(arr, field)
        return obj

    # constructors -------------------------------------------------------

    @classmethod
    def zeros(cls, order, field=DOUBLE):
        field = get_field(field)
        return cls._wrap(field.zeros(order + 1), field)

    @classmethod
    def identity(cls, order, field=DOUBLE):
        """The series ``z`` at the given order."""
        field = get_field(field)
        arr = field.zeros(order + 1)
        if order >= 1:
            arr[1] = field.scalar(1)
        return cls._wrap(arr, field)

    @classmethod
    def constant(cls, value, order, field=DOUBLE):
        field = get_field(field)
        arr = field.zeros(order + 1)
        arr[0] = field.scalar(value)
        return cls._wrap(arr, field)

    @classmethod
    def polynomial(cls, coeffs, order, field=DOUBLE):
        """Exact polynomial, zero-filled up to ``order`` (coefficients above are truly zero)."""
        field = get_field(field)
        coeffs = list(coeffs)
        if len(coeffs) > order + 1:
            coeffs = coeffs[: order + 1]
        arr = field.zeros(order + 1)
        for i, c in enumerate(coeffs):
            arr[i] = field.scalar(c)
        return cls._wrap(arr, field)

    # basic access -------------------------------------------------------

    @property
    def coeffs(self):
        return self._c

    @property
    def order(self):
        return len(self._c) - 1

    def __len__(self):
        return len(self._c)

    def __getitem__(self, n):
        return self._c[n]

    def __iter__(self):
        return iter(self._c)

    def tolist(self):
        return list(self._c)

    def __repr__(self):
        if self.field is DOUBLE:
            body = np.array2string(self._c, precision=6, separator=", ")
        else:
            body = "[" + ", ".join(mpmath.nstr(c, 8) for c in self._c) + "]"
        return f"TruncatedPowerSeries({body}, order={self.order}, field={self.field.name})"

    def max_abs(self, upto=None):
        """Largest coefficient magnitude through order ``upto`` (default: all)."""
        c = self._c if upto is None else self._c[: upto + 1]
        if len(c) == 0:
            return 0.0
        return float(max(abs(v) for v in c))

    def allclose(self, other, tol=1e-12):
        n = min(self.order, other.order)
        return self.coefficient_distance(other, n) <= tol

    def coefficient_distance(self, other, upto=None):
        n = min(self.order, other.order)
        if upto is not None:
            n = min(n, upto)
        return float(max(abs(a - b) for a, b in zip(self._c[: n + 1], other._c[: n + 1])))

    # conversions --------------------------------------------------------

    def to_field(self, field):
        field = get_field(field)
        if field is self.field:
            return self
        if field is DOUBLE:
            arr = np.array([complex(c) for c in self._c], dtype=np.complex128)
        else:
            arr = field.array(self._c)
        return TruncatedPowerSeries._wrap(arr, field)

    def truncate(self, order):
        if order > self.order:
            raise ValueError(f"cannot truncate order {self.order} series to larger order {order}")
        return TruncatedPowerSeries._wrap(self._c[: order + 1].copy(), self.field)

    def pad(self, order):
        """Zero-extend to ``order``.  Only meaningful when the tail is known to vanish."""
        if order <= self.order:
            return self.truncate(order)
        arr = self.field.zeros(order + 1)
        arr[: len(self._c)] = self._c
        return TruncatedPowerSeries._wrap(arr, self.field)

    def with_coefficient(self, n, value):
        arr = self._c.copy()
        arr[n] = self.field.scalar(value)
        return TruncatedPowerSeries._wrap(arr, self.field)

    # arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, TruncatedPowerSeries):
            field = _wider(self.field, other.field)
            return self.to_field(field), other.to_field(field), field
        return None

    def __add__(self, other):
        if isinstance(other, TruncatedPowerSeries):
            return add(self, other)
        arr = self._c.copy()
        arr[0] = arr[0] + self.field.scalar(other)
        return TruncatedPowerSeries._wrap(arr, self.field)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedPowerSeries._wrap(-self._c, self.field)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TruncatedPowerSeries):
            return mul(self, other)
        if not isinstance(other, (Number, mpmath.mpc, mpmath.mpf)):
            return NotImplemented
        with np.errstate(over="ignore", invalid="ignore"):
            arr = self._c * self.field.scalar(other)
        return TruncatedPowerSeries._wrap(arr, self.field)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TruncatedPowerSeries):
            return NotImplemented
        s = self.field.scalar(other)
        if s == 0:
            raise ZeroDivisionError("series divided by zero scalar")
        return self * (1 / s)

    def derivative(self):
        return differentiate(self)

    def integral(self):
        return integrate(self)

    def dilate(self, gamma):
        return dilate(self, gamma)

    def compose(self, inner):
        return compose(self, inner)

    def invert(self):
        return invert(self)

    def __call__(self, z):
        if isinstance(z, TruncatedPowerSeries):
            return compose(self, z)
        return evaluate(self, z)


def _infer_field(coeffs):
    for c in coeffs:
        if isinstance(c, mpmath.mpc):
            return _extended(max(16, c.context.dps))
        if isinstance(c, mpmath.mpf):
            return _extended(max(16, c.context.dps))
    return DOUBLE


# operations -------------------------------------------------------------


def add(f, g):
    """Coefficientwise sum, truncated to the smaller order."""
    f, g, field = f._coerce(g)
    n = min(f.order, g.order)
    with np.errstate(over="ignore", invalid="ignore"):
        arr = f._c[: n + 1] + g._c[: n + 1]
    return TruncatedPowerSeries._wrap(arr, field)


def mul(f, g):
    """Cauchy product truncated at the smaller order."""
    f, g, field = f._coerce(g)
    n = min(f.order, g.order)
    with np.errstate(over="ignore", invalid="ignore"):
        arr = _conv(f._c, g._c, n, field)
    return TruncatedPowerSeries._wrap(arr, field)


def differentiate(f):
    if f.order < 1:
        raise ValueError("an order-0 series has no determined derivative")
    field = f.field
    if field is DOUBLE:
        arr = f._c[1:] * np.arange(1, f.order + 1)
    else:
        arr = np.empty(f.order, dtype=object)
        for k in range(1, f.order + 1):
            arr[k - 1] = f._c[k] * k
    return TruncatedPowerSeries._wrap(arr, field)


def integrate(f):
    """Antiderivative with zero constant term; the order rises by one."""
    field = f.field
    arr = field.zeros(f.order + 2)
    if field is DOUBLE:
        arr[1:] = f._c / np.arange(1, f.order + 2)
    else:
        for k in range(f.order + 1):
            arr[k + 1] = f._c[k] / (k + 1)
    return TruncatedPowerSeries._wrap(arr, field)


def _powers_of(field, gamma, n):
    gamma = field.scalar(gamma)
    if field is DOUBLE:
        pw = np.empty(n + 1, dtype=np.complex128)
        pw[0] = 1.0
        if n:
            pw[1:] = gamma
            pw = np.cumprod(pw)
        return pw
    pw = np.empty(n + 1, dtype=object)
    acc = field.ctx.mpc(1)
    for k in range(n + 1):
        pw[k] = acc
        acc = acc * gamma
    return pw


def dilate(f, gamma):
    """The series of ``f(gamma z)``: coefficient n times ``gamma**n``."""
    with np.errstate(over="ignore", invalid="ignore"):
        arr = f._c * _powers_of(f.field, gamma, f.order)
    return TruncatedPowerSeries._wrap(arr, f.field)


def _power_table(g_arr, n, field, kmax=None):
    """Rows ``k = 0..kmax`` hold ``g**k`` truncated to order ``n``.

    For an extended field the table holds gmpy2 numbers; call it inside
    ``field.fast_context()``.
    """
    kmax = n if kmax is None else min(kmax, n)
    if field is DOUBLE:
        table = np.zeros((kmax + 1, n + 1), dtype=np.complex128)
        table[0, 0] = 1.0
        g = g_arr[: n + 1]
    else:
        table = np.empty((kmax + 1, n + 1), dtype=object)
        table[:, :] = gmpy2.mpc(0)
        table[0, 0] = gmpy2.mpc(1)
        g = field.to_fast(g_arr[: n + 1])
    if kmax >= 1:
        table[1, :] = g
        # g(0) == 0, so g**k starts at z**k; only the tail needs convolving
        for k in range(2, kmax + 1):
            table[k, k:] = np.convolve(table[k - 1, k - 1 :], g[1 : n + 2 - k])[: n + 1 - k]
    return table


def _degree(arr):
    """Index of the last nonzero coefficient (0 for the zero series)."""
    nz = np.flatnonzero(arr != 0)
    return int(nz[-1]) if len(nz) else 0


def compose(f, g):
    """Coefficients of ``f(g(z))`` through ``min(f.order, g.order)``.

    Raises
    ------
    NonzeroInnerConstant
        If ``g[0] != 0``; truncated composition is then not determined termwise.
    """
    return compose_many([f], g)[0]


def compose_many(fs, g):
    """Compose several outer series with one inner series, sharing powers of ``g``."""
    field = g.field
    for f in fs:
        field = _wider(field, f.field)
    g = g.to_field(field)
    if g._c[0] != 0:
        raise NonzeroInnerConstant(f"inner series has constant term {g._c[0]}")
    fs = [f.to_field(field) for f in fs]
    orders = [min(f.order, g.order) for f in fs]
    degrees = [min(_degree(f._c[: m + 1]), m) for f, m in zip(fs, orders)]
    n = max(orders)
    if field is DOUBLE:
        with np.errstate(over="ignore", invalid="ignore"):
            # rows beyond the largest outer degree are never used
            table = _power_table(g._c, n, field, max(degrees))
            return [
                TruncatedPowerSeries._wrap(f._c[: d + 1] @ table[: d + 1, : m + 1], field)
                for f, m, d in zip(fs, orders, degrees)
            ]
    out = []
    with field.fast_context():
        table = _power_table(g._c, n, field, max(degrees))
        for f, m, d in zip(fs, orders, degrees):
            arr = field.to_fast(f._c[: d + 1]) @ table[: d + 1, : m + 1]
            out.append(TruncatedPowerSeries._wrap(field.from_fast(np.atleast_1d(arr)), field))
    return out


def reciprocal(f):
    """Multiplicative inverse ``1/f``; needs ``f[0] != 0``."""
    if f._c[0] == 0:
        raise ZeroDivisionError("reciprocal of a series with zero constant term")
    field = f.field
    if field is DOUBLE:
        with np.errstate(over="ignore", invalid="ignore"):
            r = _reciprocal(f._c, np.zeros(f.order + 1, dtype=np.complex128))
        return TruncatedPowerSeries._wrap(r, field)
    with field.fast_context():
        r = _reciprocal(field.to_fast(f._c), np.empty(f.order + 1, dtype=object))
        return TruncatedPowerSeries._wrap(field.from_fast(r), field)


def _reciprocal(a, r):
    inv0 = 1 / a[0]
    r[0] = inv0
    for k in range(1, len(a)):
        r[k] = -np.dot(a[1 : k + 1], r[k - 1 :: -1]) * inv0
    return r


def invert(f):
    """Compositional inverse ``q`` with ``f(q(z)) = z`` through ``f.order``.

    Uses Lagrange inversion: ``q_n = [w^(n-1)] (w / f(w))**n / n``.
    """
    if f._c[0] != 0:
        raise NotInvertible(f"constant term {f._c[0]} is not zero")
    if f.order < 1 or f._c[1] == 0:
        raise NotInvertible("linear coefficient vanishes")
    field = f.field
    n = f.order
    shifted = TruncatedPowerSeries._wrap(f._c[1:].copy(), field)
    phi = reciprocal(shifted)._c
    if field is DOUBLE:
        with np.errstate(over="ignore", invalid="ignore"):
            q = _lagrange(phi, np.zeros(n + 1, dtype=np.complex128))
        return TruncatedPowerSeries._wrap(q, field)
    with field.fast_context():
        q = np.empty(n + 1, dtype=object)
        q[0] = gmpy2.mpc(0)
        q = _lagrange(field.to_fast(phi), q)
        return TruncatedPowerSeries._wrap(field.from_fast(q), field)


def _lagrange(phi, q):
    n = len(q) - 1
    power = phi
    for k in range(1, n + 1):
        q[k] = power[k - 1] / k
        if k < n:
            power = np.convolve(power, phi)[:n]
    return q


def evaluate(f, z):
    """Horner evaluation of the truncated polynomial at ``z``."""
    z = f.field.scalar(z)
    acc = f.field.scalar(0)
    for c in reversed(f._c):
        acc = acc * z + c
    return acc
