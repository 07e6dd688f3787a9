"""Assemble ``y = g(gamma g^{-1}(z))`` and the solution ``x`` of the delay equation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .auxiliary import (
    AuxiliarySolution,
    auxiliary_defect,
    auxiliary_differential_defect,
    solve_g,
)
from .errors import DegenerateA0, InnerConstantNonzero, NonFiniteError
from .series import TruncatedPowerSeries, compose, dilate, invert

__all__ = [
    "SolutionBundle",
    "build_solution",
    "build_x",
    "build_y",
    "delay_defect",
    "leading_coefficients",
    "residual_norms",
    "verify_coefficients",
    "x0_balanced",
    "x0_closed_form",
    "x0_value",
    "y_equation_defect",
]

log = logging.getLogger(__name__)

# decimal digits the conjugation should retain after amplification
GUARD_TARGET_DIGITS = 13


def build_y(g, gamma):
    """``y = g(gamma g^{-1}(z))``, truncated at the order of ``g``.

    Raises
    ------
    NotInvertible
        If ``g`` has no compositional inverse (``g_0 != 0`` or ``g_1 == 0``).
    """
    return compose(dilate(g, gamma), invert(g))


def x0_closed_form(inst):
    """``x(0) = (a0 p0 - a2 (gamma - p1) + b h0) / (b (a0 - 1))``, the published form.

    Note that this value does not make the constant coefficient of the delay
    equation vanish unless ``(a0 - a1) p0 == 0``; see :func:`x0_balanced`.
    """
    return _x0(inst, inst.a0)


def x0_balanced(inst):
    """``x(0) = (a1 p0 - a2 (gamma - p1) + b h0) / (b (a0 - 1))``.

    This is the constant-term balance of the delay equation: with
    ``x'(0) = -p0/b`` and ``x''(0) = (gamma - p1)/b`` the equation at
    ``z = 0`` reads ``a2 x''(0) + a1 x'(0) + a0 x(0) = x(0) + h0``.
    """
    return _x0(inst, inst.a1)


def _x0(inst, p0_factor):
    if inst.a0 == 1:
        raise DegenerateA0("a0 == 1: x(0) is not determined by the equation; supply it")
    gamma = inst.gamma_value
    p, h = inst.p.coeffs, inst.h.coeffs
    num = p0_factor * p[0] - inst.a2 * (gamma - p[1]) + inst.b * h[0]
    return num / (inst.b * (inst.a0 - 1))


def x0_value(inst):
    """``x(0)`` according to ``inst.x0_rule`` (``"balance"`` or ``"a0p0"``)."""
    if inst.x0_rule == "a0p0":
        return x0_closed_form(inst)
    return x0_balanced(inst)


def build_x(y, inst, x0):
    """``x = x0 + (1/b) int_0^z (y - p)``; order is one more than the common order."""
    n = min(y.order, inst.p.order)
    diff = y.truncate(n) - inst.p.truncate(n)
    return diff.integral() * (1 / inst.b) + x0


def leading_coefficients(inst):
    """Closed forms of ``x_1, x_2, x_3``.

    ``x_1 = -p0/b``, ``x_2 = (gamma - p1)/(2b)`` and
    ``x_3 = (a0 p0 - p0 gamma - a1 (gamma - p1) + b h1) / (6 b a2)``.
    """
    gamma = inst.gamma_value
    p, h = inst.p.coeffs, inst.h.coeffs
    b, a0, a1, a2 = inst.b, inst.a0, inst.a1, inst.a2
    return (
        -p[0] / b,
        (gamma - p[1]) / (2 * b),
        (a0 * p[0] - p[0] * gamma - a1 * (gamma - p[1]) + b * h[1]) / (6 * b * a2),
    )


def _snap_inner(u, inst):
    """Zero the constant of ``p + b x'`` when it is rounding noise, else refuse."""
    c0 = u[0]
    scale = max(1.0, float(abs(inst.p[0])))
    if c0 != 0:
        if abs(c0) > inst.zero_tol * scale:
            raise InnerConstantNonzero(
                f"p(0) + b x'(0) = {complex(c0)} != 0; composition at a nonzero base point"
            )
        u = u.with_coefficient(0, 0)
    return u


def delay_defect(x, inst):
    """``a2 x'' + a1 x' + a0 x - x(p + b x') - h``, through ``x.order - 2``.

    Raises
    ------
    InnerConstantNonzero
        If ``p(0) + b x'(0)`` is not zero within tolerance.
    """
    dx = x.derivative()
    ddx = dx.derivative()
    n = ddx.order
    u = _snap_inner(inst.p.truncate(min(n, inst.p.order)) + dx * inst.b, inst)
    xu = compose(x, u)
    return (
        ddx * inst.a2
        + dx * inst.a1
        + x * inst.a0
        - xu
        - inst.h.truncate(min(n, inst.h.order))
    )


def y_equation_defect(y, inst):
    """``a2 (y'' - p'') + a1 (y' - p') + a0 (y - p) - (y(y) - p(y)) y' - b h'``."""
    n = min(y.order, inst.p.order)
    w = y.truncate(n) - inst.p.truncate(n)
    dy = y.derivative()
    yy = compose(y, y)
    py = compose(inst.p.truncate(n), y.truncate(n))
    dh = inst.h.derivative()
    dw = w.derivative()
    return (
        dw.derivative() * inst.a2
        + dw * inst.a1
        + w * inst.a0
        - (yy - py) * dy
        - dh * inst.b
    )


@dataclass
class SolutionBundle:
    """Every series of the pipeline plus residual diagnostics.

    ``residuals`` maps a check name to the largest coefficient magnitude of the
    corresponding defect over its reported range; ``residual_orders`` records
    that range.
    """

    g: TruncatedPowerSeries
    g_inverse: Optional[TruncatedPowerSeries]
    y: Optional[TruncatedPowerSeries]
    x: Optional[TruncatedPowerSeries]
    x0: object
    auxiliary: AuxiliarySolution
    residuals: Dict[str, float] = field(default_factory=dict)
    residual_orders: Dict[str, int] = field(default_factory=dict)
    radius: Optional[object] = None
    guard_precision: Optional[str] = None


def normalizing_scale(g):
    """``lambda`` with ``max_n |c_n| lambda^n == 1``.

    The auxiliary equation is invariant under ``g(z) -> g(lambda z)`` (that
    maps the solution with ``g'(0) = eta`` to the one with
    ``g'(0) = lambda eta``), so defects are measured on ``g(lambda z)``,
    whose coefficients are of unit size.
    """
    lam = None
    for n in range(1, g.order + 1):
        a = float(abs(g[n]))
        if a > 0:
            r = a ** (-1.0 / n)
            lam = r if lam is None else min(lam, r)
    return 1.0 if lam is None else lam


def conjugation_condition(g, gamma):
    """Amplification bound for rounding errors in ``y = g(gamma g^{-1})``.

    Returns the largest coefficient of ``|g|(|gamma| Q(z))`` where ``Q`` is
    the compositional inverse of ``|c_1| z - sum_{k>=2} |c_k| z^k``.  ``Q``
    has nonnegative coefficients and dominates every term of the Lagrange
    inversion of ``g``, so it also dominates how errors in ``c_k`` spread
    through the inverse; ``|g|`` then does the same for the outer
    composition.  The coefficients of ``y`` come from heavily cancelling
    sums of such terms, which is why they can lose this many digits.
    """
    a = np.abs(np.array([complex(v) for v in g.coeffs]))
    m = -a
    m[0] = 0.0
    m[1] = a[1]
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            Q = invert(TruncatedPowerSeries(m.astype(complex)))
            val = compose(
                dilate(TruncatedPowerSeries(a.astype(complex)), abs(complex(gamma))),
                TruncatedPowerSeries(np.abs(Q.coeffs).astype(complex)),
            ).max_abs()
        except NonFiniteError:
            return math.inf
    return val


def guard_precision(inst, g, target_digits=GUARD_TARGET_DIGITS):
    """Working precision that keeps ``y`` accurate, or ``None`` if ``inst``'s suffices."""
    kappa = conjugation_condition(g, inst.gamma_value)
    if not math.isfinite(kappa):
        kappa = 10.0 ** (4 * inst.order)
    need = int(math.ceil(math.log10(max(kappa, 1.0)))) + target_digits
    if need <= inst.field.digits:
        return None
    return f"extended:{max(need, 20)}"


def residual_norms(inst, g, y, x, y_inst=None):
    """Defect norms of the four equations over the ranges they are determined on.

    The auxiliary defects are evaluated on the normalized series
    ``g(lambda z)``, see :func:`normalizing_scale`.  ``y_inst`` (default
    ``inst``) supplies the data and precision for the ``y`` and ``x`` checks.
    """
    N = inst.order
    y_inst = inst if y_inst is None else y_inst
    out, orders = {}, {}
    lam = normalizing_scale(g)
    gn = dilate(g, lam)
    inst_n = inst.replace(eta=inst.eta * lam)
    checks = [
        ("auxiliary_integrated", lambda: auxiliary_defect(gn, inst_n), N - 1),
        ("auxiliary_equation", lambda: auxiliary_differential_defect(gn, inst_n), N - 2),
    ]
    if y is not None:
        checks.append(("y_equation", lambda: y_equation_defect(y, y_inst), N - 3))
    if x is not None:
        checks.append(("delay_equation", lambda: delay_defect(x, y_inst), N - 3))
    for name, fn, upto in checks:
        if upto < 0:
            continue
        out[name] = fn().max_abs(upto)
        orders[name] = upto
    return out, orders


def build_solution(inst, aux=None, verify=True, guard=True):
    """Run the auxiliary solver (unless ``aux`` is given) and assemble ``x``.

    When the conjugation ``y = g(gamma g^{-1})`` is too ill-conditioned for
    the instance precision (see :func:`conjugation_condition`), ``g``, ``y``
    and ``x`` are recomputed at a higher guard precision and rounded back;
    the reported ``g`` is always the one from the instance precision.
    Residuals are evaluated on the series at the precision they were built
    in; :func:`residual_norms` on the rounded series measures the delivered
    coefficients instead.

    With the trivial auxiliary solution (``eta == 0``) there is no conjugacy,
    so ``y`` and ``x`` are left as ``None``.
    """
    if aux is None:
        aux = solve_g(inst)
    g = aux.g
    if aux.trivial:
        return SolutionBundle(g=g, g_inverse=None, y=None, x=None, x0=None, auxiliary=aux)
    work_prec = guard_precision(inst, g) if guard else None
    if work_prec is None:
        work, g_work = inst, g
    else:
        log.info("conjugation recomputed at %s", work_prec)
        work = inst.replace(precision=work_prec, zero_tol=inst.zero_tol,
                            divisor_warn_tol=inst.divisor_warn_tol)
        g_work = solve_g(work, warn=False).g
    g_inv = invert(g_work)
    y = compose(dilate(g_work, work.gamma_value), g_inv)
    x = build_x(y, work, x0_value(work))
    fld = inst.field
    x_out = x.to_field(fld)
    bundle = SolutionBundle(
        g=g,
        g_inverse=g_inv.to_field(fld),
        y=y.to_field(fld),
        x=x_out,
        x0=x_out[0],
        auxiliary=aux,
        guard_precision=work_prec,
    )
    if verify:
        bundle.residuals, bundle.residual_orders = residual_norms(inst, g, y, x, y_inst=work)
    return bundle


def verify_coefficients(inst, g):
    """Residual norms of supplied coefficients of ``g``, at ``inst``'s precision.

    ``y`` and ``x`` are rebuilt from ``g`` as given, without a guard
    precision, so the result depends only on the coefficients and the
    instance; it is what a coefficient file re-imported for checking yields.
    """
    g = g.to_field(inst.field)
    if g.order != inst.order:
        inst = inst.replace(order=g.order)
    y = build_y(g, inst.gamma_value)
    x = build_x(y, inst, x0_value(inst))
    return residual_norms(inst, g, y, x)
