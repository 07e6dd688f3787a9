"""Order-by-order solution of the auxiliary equation for ``g``.

The integrated auxiliary equation reads

    a2 gamma g'(gamma z) = g'(z) [a2 gamma + int_0^z F(s) ds]

with

    F = (g(gamma^2 s) - p(g(gamma s))) gamma g'(gamma s)
        + (a2 p''(g) + a1 p'(g) + a0 p(g)) g'
        - a1 gamma g'(gamma s) - a0 g(gamma s) g' + b h'(g) g'.

The coefficient ``c_{n+2}`` enters the ``z^{n+1}`` coefficient of
``E = g' [a2 gamma + int F] - a2 gamma g'(gamma z)`` only through the two
linear terms, with total factor ``(n+2) a2 gamma (1 - gamma^{n+1})``.  So
evaluating that coefficient with ``c_{n+2} = 0`` gives the right-hand side
``theta(n)`` and ``c_{n+2} = theta(n) / ((n+2) a2 gamma (gamma^{n+1} - 1))``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from math import prod
from typing import List, Optional

import numpy as np

from .errors import (
    DegenerateGamma,
    NoAnalyticSolution,
    OracleTooLarge,
    SmallDivisorWarning,
)
from .gamma import Regime, gamma_power_minus_one, is_resonant
from .series import DOUBLE, TruncatedPowerSeries, compose_many, dilate

__all__ = [
    "AuxiliarySolution",
    "ResonanceEntry",
    "auxiliary_defect",
    "auxiliary_differential_defect",
    "auxiliary_integrand",
    "c2_closed_form",
    "oracle_check",
    "rhs_accumulate",
    "solve_g",
    "theta_resonance_literal",
    "tune_resonances",
]

log = logging.getLogger(__name__)

LITERAL_CAP = 8


@dataclass(frozen=True)
class ResonanceEntry:
    """One resonant step: ``gamma^{n+1} == 1`` exactly, ``n + 1 == v p``."""

    n: int
    v: int
    theta: complex
    abs_theta: float
    action: str  # "free" or "obstructed"
    value: Optional[complex] = None
    scale: float = 1.0  # sum of |summands|; the zero test is |theta| <= zero_tol * scale


@dataclass
class AuxiliarySolution:
    """Output of :func:`solve_g`.

    Attributes
    ----------
    g : TruncatedPowerSeries
        ``c_0 = 0``, ``c_1 = eta`` and ``c_2..c_N``.
    resonance_log : list of ResonanceEntry
    regime : Regime
    theta_values : list
        ``theta_values[n - 1]`` is the right-hand side at step ``n``.
    verified_resonances : list of int
        Resonance multiples ``v`` whose obstruction was checked to vanish.
    trivial : bool
        True when ``eta == 0`` and ``g`` is identically zero.
    warnings : list of str
    """

    g: TruncatedPowerSeries
    resonance_log: List[ResonanceEntry] = field(default_factory=list)
    regime: Regime = Regime.INSIDE_DISK
    theta_values: list = field(default_factory=list)
    verified_resonances: List[int] = field(default_factory=list)
    trivial: bool = False
    warnings: List[str] = field(default_factory=list)

    @property
    def coeffs(self):
        return self.g.coeffs


def c2_closed_form(inst):
    """``c_2`` from the first nontrivial coefficient balance.

    ``(p0 a0 + p1 a1 + 2 p2 a2 + b h1 - p0 gamma - a1 gamma) eta^2 / (2 a2 gamma (gamma - 1))``
    """
    gamma = inst.gamma_value
    if gamma == 1:
        raise DegenerateGamma("gamma == 1")
    p, h = inst.p.coeffs, inst.h.coeffs
    num = (
        p[0] * inst.a0
        + p[1] * inst.a1
        + 2 * p[2] * inst.a2
        + inst.b * h[1]
        - p[0] * gamma
        - inst.a1 * gamma
    )
    return num / (2 * inst.a2 * gamma * (gamma - 1)) * inst.eta**2


def _pieces(g, inst, order):
    """Series shared by the integrand and the differential defect."""
    gamma = inst.gamma_value
    p = inst.p.truncate(order)
    dp = p.derivative()
    ddp = dp.derivative() if dp.order >= 1 else dp
    dh = inst.h.truncate(order).derivative()
    pg, dpg, ddpg, dhg = compose_many([p, dp, ddp, dh], g)
    gd = g.derivative()
    return gamma, pg, dpg, ddpg, dhg, gd


def auxiliary_integrand(g, inst):
    """The integrand ``F`` of the integrated auxiliary equation.

    ``g`` must have ``g(0) = 0``; the result is known through ``g.order - 2``.
    """
    gamma, pg, dpg, ddpg, dhg, gd = _pieces(g, inst, g.order)
    gd_g = dilate(gd, gamma)
    return (
        (dilate(g, gamma * gamma) - dilate(pg, gamma)) * gd_g * gamma
        + (ddpg * inst.a2 + dpg * inst.a1 + pg * inst.a0) * gd
        - gd_g * (inst.a1 * gamma)
        - dilate(g, gamma) * gd * inst.a0
        + dhg * gd * inst.b
    )


def auxiliary_bracket(g, inst):
    """``a2 gamma + int_0^z F``."""
    return auxiliary_integrand(g, inst).integral() + inst.a2 * inst.gamma_value


def rhs_accumulate(g_partial, inst):
    """``E = g' [a2 gamma + int F] - a2 gamma g'(gamma z)`` through ``g_partial.order - 1``.

    With ``g_partial`` holding ``c_1..c_{n+1}`` and a zero at ``c_{n+2}``
    (order ``n + 2``), coefficient ``n + 1`` of the result is the right-hand
    side ``theta(n)`` of the recurrence.
    """
    gamma = inst.gamma_value
    gd = g_partial.derivative()
    return gd * auxiliary_bracket(g_partial, inst) - dilate(gd, gamma) * (inst.a2 * gamma)


def auxiliary_defect(g, inst):
    """Residual of the integrated auxiliary equation, through ``g.order - 1``."""
    return rhs_accumulate(g, inst)


def auxiliary_differential_defect(g, inst):
    """Residual of the differentiated auxiliary equation, through ``g.order - 2``.

    ``a2 gamma^2 g''(gamma z) g' - a2 gamma g'(gamma z) g'' - F g'^2``; this is
    the integrated equation differentiated and multiplied by ``g'``, so it is
    an independent check on the solver, which works from the integrated form.
    """
    gamma = inst.gamma_value
    gd = g.derivative()
    gdd = gd.derivative()
    F = auxiliary_integrand(g, inst)
    a2 = inst.a2
    return (
        dilate(gdd, gamma) * gd * (a2 * gamma * gamma)
        - dilate(gd, gamma) * gdd * (a2 * gamma)
        - F * gd * gd
    )


class _Accumulator:
    """Coefficients of every factor of ``F``, extended one index at a time.

    Column ``j`` of the power table ``(g^k)_j`` and the composed series
    ``p(g), p'(g), p''(g), h'(g)`` at index ``j`` depend only on
    ``c_1..c_j``; ``F_j`` additionally needs ``c_{j+1}`` through ``g'``.  Each
    quantity is computed once, so a full solve costs ``O(N^3)`` operations
    instead of recomposing series at every step.
    """

    def __init__(self, inst, magnitudes=False):
        # with magnitudes=True every input is replaced by its modulus and all
        # subtractions become additions, which bounds the sum of |terms|
        N = inst.order
        self.inst = inst
        self.magnitudes = magnitudes
        if magnitudes:
            fld = DOUBLE
            mod = lambda v: complex(abs(complex(v)))
            self.gamma = mod(inst.gamma_value)
            p = [mod(v) for v in inst.p.coeffs]
            h = [mod(v) for v in inst.h.coeffs]
            self.a0, self.a1, self.a2, self.b = (mod(v) for v in (inst.a0, inst.a1, inst.a2, inst.b))
        else:
            fld = inst.field
            self.gamma = inst.gamma_value
            p, h = inst.p.coeffs, inst.h.coeffs
            self.a0, self.a1, self.a2, self.b = inst.a0, inst.a1, inst.a2, inst.b
        self.sign = 1 if magnitudes else -1
        self.fld = fld
        self.c = fld.zeros(N + 2)
        self.powers = _powers(fld, self.gamma, 2 * N + 2)
        self.table = fld.zeros((N + 2) * (N + 2)).reshape(N + 2, N + 2)
        self.table[0, 0] = fld.scalar(1)
        zero = fld.scalar(0)
        self.outer = {
            "p": [p[k] for k in range(N + 1)],
            "dp": [(k + 1) * p[k + 1] for k in range(N)] + [zero],
            "ddp": [(k + 2) * (k + 1) * p[k + 2] for k in range(N - 1)] + [zero, zero],
            "dh": [(k + 1) * h[k + 1] for k in range(N)] + [zero],
        }
        self.comp = {name: [] for name in self.outer}
        self.known = 0  # c_0..c_known are set and their table columns filled
        self.F = []

    def set(self, j, value):
        if j != self.known + 1:
            raise RuntimeError("coefficients must be set in order")
        if self.magnitudes:
            value = complex(abs(complex(value)))
        self.c[j] = value
        self.known = j
        c, T = self.c, self.table
        T[1, j] = value
        for k in range(2, j + 1):
            T[k, j] = np.dot(c[1 : j - k + 2], T[k - 1, j - 1 : k - 2 : -1])

    def _composed(self, j):
        """Coefficient ``j`` of each composed outer series (needs ``c_1..c_j``)."""
        for name, f in self.outer.items():
            if j == 0:
                val = f[0]
            else:
                val = np.dot(np.array(f[1 : j + 1], dtype=self.c.dtype), self.table[1 : j + 1, j])
            self.comp[name].append(val)

    def extend_integrand(self, upto):
        """Compute ``F_j`` for all ``j <= upto``; needs ``c_1..c_{upto+1}``."""
        gm, pw, sg = self.gamma, self.powers, self.sign
        c = self.c
        while len(self.F) <= upto:
            j = len(self.F)
            self._composed(j)
            # factors through index j
            idx = np.arange(j + 1)
            gd = c[1 : j + 2] * (idx + 1)
            gd_g = gd * pw[: j + 1]
            g_g = c[: j + 1] * pw[: j + 1]
            g_g2 = c[: j + 1] * pw[: 2 * j + 1 : 2]
            pg = np.array(self.comp["p"], dtype=c.dtype)
            pg_g = pg * pw[: j + 1]
            lin = (
                np.array(self.comp["ddp"], dtype=c.dtype) * self.a2
                + np.array(self.comp["dp"], dtype=c.dtype) * self.a1
                + pg * self.a0
                + g_g * (sg * self.a0)
                + np.array(self.comp["dh"], dtype=c.dtype) * self.b
            )
            Fj = (
                np.dot(g_g2 + pg_g * sg, gd_g[::-1]) * gm
                + np.dot(lin, gd[::-1])
                + gd_g[j] * (sg * self.a1 * gm)
            )
            self.F.append(Fj)

    def theta(self, n):
        """Right-hand side of step ``n``: coefficient ``n+1`` of ``E`` with ``c_{n+2} = 0``.

        With ``g'_{n+1} = 0`` both terms carrying ``a2 gamma`` drop out and
        ``E_{n+1} = sum_{i<=n} g'_i F_{n-i} / (n+1-i)``.
        """
        self.extend_integrand(n)
        c, F = self.c, self.F
        acc = self.fld.scalar(0)
        for i in range(n + 1):
            acc = acc + (i + 1) * c[i + 1] * (F[n - i] / (n + 1 - i))
        return acc


def _powers(fld, gamma, n):
    out = fld.zeros(n + 1)
    acc = fld.scalar(1)
    for k in range(n + 1):
        out[k] = acc
        acc = acc * gamma
    return out


def solve_g(inst, warn=True):
    """Solve for ``c_0..c_N`` of the auxiliary series.

    Parameters
    ----------
    inst : ProblemInstance
    warn : bool
        Emit :class:`SmallDivisorWarning` for ill-conditioned steps.  The
        message is recorded in the result either way.

    Returns
    -------
    AuxiliarySolution

    Raises
    ------
    NoAnalyticSolution
        At a resonant step whose right-hand side exceeds ``inst.zero_tol``.
    DegenerateGamma
        If ``gamma == 1``.
    """
    fld = inst.field
    N = inst.order
    regime = inst.regime
    if inst.eta == 0:
        log.info("eta == 0: the auxiliary series is identically zero")
        return AuxiliarySolution(
            g=TruncatedPowerSeries.zeros(N, fld), regime=regime, trivial=True
        )
    gamma = inst.gamma_value
    c2 = c2_closed_form(inst)
    acc = _Accumulator(inst)
    # magnitudes of the summands, for a scale-aware zero test at resonances
    bound = _Accumulator(inst, magnitudes=True) if regime is Regime.ROOT_OF_UNITY else None
    for a in (acc, bound):
        if a is not None:
            a.set(1, inst.eta)
            a.set(2, c2)
    out = AuxiliarySolution(g=None, regime=regime)
    for n in range(1, N - 1):
        m = n + 2
        theta = acc.theta(n)
        out.theta_values.append(theta)
        if regime is Regime.ROOT_OF_UNITY and is_resonant(inst.gamma, n + 1):
            v = (n + 1) // inst.gamma.p
            scale = max(1.0, float(abs(bound.theta(n))))
            if abs(theta) > inst.zero_tol * scale:
                out.resonance_log.append(
                    ResonanceEntry(n, v, complex(theta), float(abs(theta)), "obstructed", None, scale)
                )
                exc = NoAnalyticSolution(n, theta, v)
                exc.resonance_log = list(out.resonance_log)
                raise exc
            value = inst.free_coeffs.get(v, fld.scalar(0))
            acc.set(m, value)
            bound.set(m, value)
            out.resonance_log.append(
                ResonanceEntry(n, v, complex(theta), float(abs(theta)), "free", complex(value), scale)
            )
            out.verified_resonances.append(v)
            log.info("resonance n=%d (v=%d): |theta|=%.3e, c_%d set free", n, v, abs(theta), m)
            continue
        divisor = gamma_power_minus_one(inst.gamma, n + 1, fld)
        if abs(divisor) < inst.divisor_warn_tol:
            msg = f"small divisor |gamma^{n + 1} - 1| = {float(abs(divisor)):.3e} at step n={n}"
            out.warnings.append(msg)
            if warn:
                warnings.warn(msg, SmallDivisorWarning, stacklevel=2)
        cm = theta / (m * inst.a2 * gamma * divisor)
        acc.set(m, cm)
        if bound is not None:
            bound.set(m, cm)
    out.g = TruncatedPowerSeries(acc.c[: N + 1].copy(), fld)
    return out


# literal oracle -----------------------------------------------------------


def _compositions(total):
    """All tuples of positive integers summing to ``total``."""
    if total == 0:
        yield ()
        return
    for first in range(1, total + 1):
        for rest in _compositions(total - first):
            yield (first,) + rest


def _partition_sum(c, total, weight):
    """``sum over l_1 + ... + l_m = total of weight(m) c_{l_1} ... c_{l_m}``."""
    acc = 0
    for comp in _compositions(total):
        acc += weight(len(comp)) * prod(c[l] for l in comp)
    return acc


def theta_resonance_literal(n, inst, coeffs):
    """Right-hand side of step ``n`` by direct enumeration of every sum.

    Thirteen groups: a pure self-composition term, the ``p0``, ``p2``,
    ``p1``, ``a0 p0``, ``a1`` and ``h1`` single sums, and partition sums over
    all compositions of ``k - i + 1`` weighted by ``p_m``, ``(m+2)(m+1)
    p_{m+2}``, ``(m+1) p_{m+1}`` and ``(m+1) h_{m+1}``.  The cost grows like
    ``2^n``; this is a test oracle and refuses ``n > 8``.

    Parameters
    ----------
    n : int
        Step index, ``n >= 1``.
    inst : ProblemInstance
    coeffs : sequence
        ``c_1 .. c_{n+1}``.
    """
    if n > LITERAL_CAP:
        raise OracleTooLarge(f"literal oracle is capped at n <= {LITERAL_CAP}")
    if n < 1:
        raise ValueError("n must be at least 1")
    if len(coeffs) < n + 1:
        raise ValueError(f"need c_1..c_{n + 1}")
    c = [0] + [complex(x) for x in coeffs[: n + 1]]
    gamma = complex(inst.gamma_value)
    a0, a1, a2, b = (complex(x) for x in (inst.a0, inst.a1, inst.a2, inst.b))
    P = [complex(x) for x in inst.p.coeffs] + [0] * (n + 4)
    H = [complex(x) for x in inst.h.coeffs] + [0] * (n + 4)

    single = 0
    for k in range(1, n + 2):
        j = n - k + 2
        cc = k * c[k] * c[j]
        single += (
            -P[0] * gamma**j
            + 2 * P[2] * a2
            + P[1] * a1
            + P[0] * a0
            - a1 * gamma**j
            + b * H[1]
        ) * cc

    double = 0
    for k in range(1, n + 1):
        for i in range(1, k + 1):
            K = k - i + 1
            w = i * (n - k + 1) / (k + 1)
            ci, cr = c[i], c[n - k + 1]
            s_p = _partition_sum(c, K, lambda m: P[m])
            s_pp = _partition_sum(c, K, lambda m: (m + 2) * (m + 1) * P[m + 2])
            s_dp = _partition_sum(c, K, lambda m: (m + 1) * P[m + 1])
            s_dh = _partition_sum(c, K, lambda m: (m + 1) * H[m + 1])
            double += w * (
                gamma ** (2 * k - i + 2) * ci * c[K] * cr
                - gamma ** (k + 1) * ci * cr * s_p
                + a2 * ci * cr * s_pp
                + a1 * ci * cr * s_dp
                + a0 * ci * cr * s_p
                - a0 * ci * c[K] * cr * gamma**K
                + b * ci * cr * s_dh
            )
    return single + double


# resonance tuning ---------------------------------------------------------


def tune_resonances(inst, max_rounds=3):
    """Adjust the forcing so every resonant step up to the order is solvable.

    For ``n >= 1`` the right-hand side at step ``n`` is affine in ``h_{n+1}``
    with slope ``b eta^{n+2}``, and ``h_{n+1}`` does not influence any earlier
    coefficient.  Each obstructed resonance is removed by shifting
    ``h_{n+1}``; a few correction rounds absorb rounding.

    Returns
    -------
    ProblemInstance
        A copy of ``inst`` with modified ``h``.
    """
    if inst.eta == 0:
        return inst
    current = inst
    for _ in range(max_rounds * max(1, inst.order)):
        try:
            solve_g(current, warn=False)
            return current
        except NoAnalyticSolution as exc:
            n = exc.n
            slope = current.b * current.eta ** (n + 2)
            h = current.h.with_coefficient(n + 1, current.h[n + 1] - exc.theta / slope)
            current = current.replace(h=h)
    return current


def oracle_check(inst, g, depth=4):
    """Largest relative gap between ``c_3 .. c_{depth+2}`` of ``g`` and the literal oracle.

    The oracle chain starts from ``c_1 = eta`` and the closed form of ``c_2``
    and is evaluated in double precision; resonant coefficients are copied
    from ``g``.  Gaps are measured as ``|c - c_oracle| / max(1, |c_oracle|)``.
    Returns 0.0 when ``depth < 1``.
    """
    depth = min(int(depth), LITERAL_CAP, inst.order - 2)
    if depth < 1:
        return 0.0
    gamma = complex(inst.gamma_value)
    a2 = complex(inst.a2)
    chain = [complex(inst.eta), complex(c2_closed_form(inst))]
    worst = 0.0
    for n in range(1, depth + 1):
        if is_resonant(inst.gamma, n + 1):
            chain.append(complex(g[n + 2]))
            continue
        theta = theta_resonance_literal(n, inst, chain)
        div = complex(gamma_power_minus_one(inst.gamma, n + 1))
        ref = theta / ((n + 2) * a2 * gamma * div)
        chain.append(ref)
        worst = max(worst, abs(complex(g[n + 2]) - ref) / max(1.0, abs(ref)))
    return worst
