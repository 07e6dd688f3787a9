"""Majorant sequences, implicit-equation radius and empirical growth fits.

The majorant recurrence

    d_{n+2} = M [ 2 sum d_i d_{k-i+1} d_{n-k+1} + 6 sum d_k d_{n-k+2}
                  + 2 sum d_i d_{n-k+1} S_1(k-i+1)
                  + 2 sum d_i d_{n-k+1} S_2(k-i+1)
                  +   sum d_i d_{n-k+1} S_3(k-i+1) ]

with partition sums ``S_w(K) = sum_{l_1+..+l_m=K} w(m) d_{l_1}..d_{l_m}`` is
the coefficient of ``z^{n+2}`` in

    Phi(D) = 2 D^3 + 6 (D^2 - d_1^2 z^2) + D^2 [2 W_1(D) + 2 W_2(D) + W_3(D)]

where ``W_1(t) = sum_{m>=1} t^m``, ``W_2 = sum (m+1) t^m`` and
``W_3 = sum (m+2)(m+1) t^m``.  Summing the geometric series gives the closed
implicit equation used by :func:`implicit_radius`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import InsufficientData, NoFoldFound
from .gamma import Regime, small_divisor_profile

__all__ = [
    "MajorantConfig",
    "RadiusReport",
    "GrowthFit",
    "bound_constant_for",
    "branch_value",
    "brjuno_radius_bound",
    "check_free_coefficients",
    "empirical_radius",
    "implicit_defect",
    "implicit_radius",
    "majorant_coeffs",
    "majorant_config_for",
    "radius_report",
]


@dataclass(frozen=True)
class MajorantConfig:
    """Constants of a majorant sequence.

    Parameters
    ----------
    bound_constant : float
        The prefactor ``M`` (inside the disk and for irrational rotations) or
        the base constant that is multiplied by ``gamma_cap`` for roots of
        unity.
    d1, d2 : float
        First two terms of the sequence.
    order : int
        Last index computed.
    gamma_cap : float, optional
        ``max_{1<=k<p} 1/|gamma^k - 1|`` for roots of unity.
    """

    bound_constant: float
    d1: float
    d2: float
    order: int
    gamma_cap: Optional[float] = None

    def __post_init__(self):
        if self.bound_constant < 0 or self.d1 < 0 or self.d2 < 0:
            raise ValueError("majorant constants must be nonnegative")
        if self.order < 2:
            raise ValueError("order must be at least 2")
        if self.gamma_cap is not None and self.gamma_cap <= 0:
            raise ValueError("gamma_cap must be positive")

    @property
    def effective_constant(self):
        """The factor in front of the bracket of the recurrence."""
        if self.gamma_cap is None:
            return self.bound_constant
        return self.gamma_cap * self.bound_constant


# real power series helpers -------------------------------------------------


def _mul(a, b, n):
    return np.convolve(a[: n + 1], b[: n + 1])[: n + 1]


def _compose(w, d, n):
    """``sum_m w[m] d^m`` through order ``n`` for ``d[0] == 0``."""
    out = np.zeros(n + 1)
    out[0] = w[0]
    power = np.zeros(n + 1)
    power[0] = 1.0
    for m in range(1, n + 1):
        power = _mul(power, d, n)
        if w[m] != 0:
            out += w[m] * power
    return out


def _phi_coefficients(d, n):
    """Coefficients of ``Phi(D)`` through order ``n`` (the ``-6 d1^2 z^2`` included)."""
    m = np.arange(n + 1, dtype=float)
    W = 2.0 * np.ones(n + 1) + 2.0 * (m + 1) + (m + 2) * (m + 1)
    W[0] = 0.0
    d2 = _mul(d, d, n)
    out = 2.0 * _mul(d2, d, n) + 6.0 * d2 + _mul(d2, _compose(W, d, n), n)
    if n >= 2:
        out[2] -= 6.0 * d[1] ** 2
    return out


def majorant_coeffs(cfg):
    """``d_0 = 0, d_1, ..., d_N`` of the majorant recurrence.

    Built with series composition: at each step the unknown ``d_{n+2}`` is
    still zero, and coefficient ``n + 2`` of ``Phi`` only involves
    ``d_1..d_{n+1}``.
    """
    N = cfg.order
    K = cfg.effective_constant
    d = np.zeros(N + 1)
    d[1] = cfg.d1
    d[2] = cfg.d2
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, N - 1):
            d[n + 2] = K * _phi_coefficients(d[: n + 3], n + 2)[n + 2]
    return d


def majorant_coeffs_literal(cfg):
    """Direct evaluation of the five nested sums; a test oracle."""
    N = cfg.order
    K = cfg.effective_constant
    d = [0.0] * (N + 1)
    d[1], d[2] = cfg.d1, cfg.d2

    def compositions(total):
        if total == 0:
            yield ()
            return
        for first in range(1, total + 1):
            for rest in compositions(total - first):
                yield (first,) + rest

    def S(total, w):
        return sum(w(len(c)) * math.prod(d[l] for l in c) for c in compositions(total))

    for n in range(1, N - 1):
        acc = 0.0
        for k in range(1, n + 1):
            for i in range(1, k + 1):
                K_ = k - i + 1
                acc += 2 * d[i] * d[K_] * d[n - k + 1]
                pair = d[i] * d[n - k + 1]
                acc += 2 * pair * S(K_, lambda m: 1)
                acc += 2 * pair * S(K_, lambda m: m + 1)
                acc += pair * S(K_, lambda m: (m + 2) * (m + 1))
        for k in range(1, n + 2):
            acc += 6 * d[k] * d[n - k + 2]
        d[n + 2] = K * acc
    return d


# bound constant ------------------------------------------------------------


def bound_constant_for(inst, profile=None):
    """A constant that provably dominates the recurrence on the computed range.

    ``M = F / (|a2| |gamma| delta)`` with

    ``F = max(1, |a0|, |a1||gamma|, |p0||gamma|, |p0||a0|, |p1||a1|,
    2|p2||a2|, |b||h1|, P max(1,|a0|), |a1| P, |b| H, |a2| P)``,

    ``P = max_{m>=1} |p_m|``, ``H = max_{m>=1} |h_m|`` over the truncated
    data and ``delta = min_{1<=n<=N} |gamma^{n+1} - 1|``.  Every term of the
    right-hand side is bounded by one of these products times a majorant
    group, and the weights ``i (n-k+1)/(k+1)`` and ``k`` are at most
    ``n + 2``, which the divisor absorbs.

    For roots of unity ``delta`` is not used: the returned value is the base
    constant ``F / (|a2||gamma|)`` and :class:`MajorantConfig` multiplies it
    by ``gamma_cap``.

    Returns
    -------
    (float, SmallDivisorProfile)
    """
    N = inst.order
    if profile is None:
        profile = small_divisor_profile(inst.gamma, N + 1)
    g = abs(complex(inst.gamma_value))
    a0, a1, a2, b = (abs(complex(v)) for v in (inst.a0, inst.a1, inst.a2, inst.b))
    p = [abs(complex(v)) for v in inst.p.coeffs[: N + 1]]
    h = [abs(complex(v)) for v in inst.h.coeffs[: N + 1]]
    P = max(p[1:], default=0.0)
    H = max(h[1:], default=0.0)
    F = max(
        1.0,
        a0,
        a1 * g,
        p[0] * g,
        p[0] * a0,
        p[1] * a1,
        2 * p[2] * a2,
        b * h[1],
        P * max(1.0, a0),
        a1 * P,
        b * H,
        a2 * P,
    )
    base = F / (a2 * g)
    if profile.regime is Regime.ROOT_OF_UNITY:
        return base, profile
    delta = min(profile.divisors[1 : N])  # |gamma^{n+1} - 1| for n = 1..N-1
    return base / delta, profile


def majorant_config_for(inst, aux=None):
    """The documented majorant for ``inst``: ``d1 = |eta|``, ``d2 = |c2|``.

    For roots of unity ``d2 = gamma_cap * A`` with
    ``A = |c2| |gamma - 1|``, i.e. the numerator of ``c2`` over ``|2 a2 gamma|``.
    """
    from .auxiliary import c2_closed_form

    M, profile = bound_constant_for(inst)
    c2 = abs(complex(c2_closed_form(inst)))
    if profile.regime is Regime.ROOT_OF_UNITY:
        A = c2 * abs(complex(inst.gamma_value) - 1)
        return MajorantConfig(M, abs(complex(inst.eta)), profile.gamma_cap * A, inst.order,
                              gamma_cap=profile.gamma_cap)
    return MajorantConfig(M, abs(complex(inst.eta)), c2, inst.order)


def check_free_coefficients(aux, d):
    """Resonance entries whose free coefficient exceeds the majorant term.

    Returns the list of offending ``(v, |value|, bound)`` triples.
    """
    bad = []
    for entry in aux.resonance_log:
        if entry.action != "free":
            continue
        idx = entry.n + 2
        val = abs(entry.value)
        if idx < len(d) and val > d[idx]:
            bad.append((entry.v, val, float(d[idx])))
    return bad


# implicit equation ---------------------------------------------------------


def _phi0(D):
    u = 1.0 - D
    return (
        2 * D**3
        + 6 * D**2
        + 2 * D**3 / u
        + 2 * (2 - D) * D**3 / u**2
        + 2 * D**3 * (3 - 3 * D + D**2) / u**3
    )


def _phi0_prime(D):
    # Phi0 = 2D^3 + 2D^2 + 2D^3/u + 2D^2/u^2 + 2D^2/u^3 with u = 1 - D
    u = 1.0 - D
    return (
        6 * D**2
        + 4 * D
        + 2 * (3 * D**2 * u + D**3) / u**2
        + 2 * (2 * D * u + 2 * D**2) / u**3
        + 2 * (2 * D * u + 3 * D**2) / u**4
    )


def implicit_defect(cfg, z, D):
    """``T(z, D) = D - d1 z - d2 z^2 - K [Phi0(D) - 6 d1^2 z^2]``."""
    K = cfg.effective_constant
    return D - cfg.d1 * z - cfg.d2 * z * z - K * (_phi0(D) - 6 * cfg.d1**2 * z * z)


def _fold_point(K):
    """``D`` in (0, 1) where ``1 - K Phi0'(D) = 0``; 1.0 when ``K == 0``."""
    if K <= 0:
        return 1.0
    f = lambda D: 1.0 - K * _phi0_prime(D)
    hi = 1.0 - 1e-15
    while f(hi) > 0:  # pragma: no cover - Phi0' blows up at 1
        hi = 1.0 - (1.0 - hi) / 10
    return brentq(f, 0.0, hi, xtol=1e-15, rtol=1e-14, maxiter=500)


def _branch_exists(cfg, z, Df):
    if Df >= 1.0:
        # no fold: the only obstruction is the pole at D = 1
        return cfg.d1 * z + cfg.d2 * z * z - 6 * cfg.effective_constant * cfg.d1**2 * z * z < 1.0
    return implicit_defect(cfg, z, Df) >= 0.0


def implicit_radius(cfg, eta_abs=None, z_max=1e6, rtol=1e-8):
    """Radius of the analytic branch ``D(z)`` of ``T(z, D) = 0`` with ``D(0) = 0``.

    ``T`` is concave in ``D`` on ``[0, 1)``, so the branch exists at ``z``
    exactly when ``max_D T(z, D) >= 0``; the maximum sits at the fold
    ``D_f`` solving ``T_D = 0``.  Writing ``T = D - K Phi0(D) - q(z)`` with
    ``q(z) = d1 z + (d2 - 6 K d1^2) z^2``, the branch has nonnegative
    coefficients and so increases along ``[0, radius)``; that confines the
    search to the part where ``q`` increases, on which existence is monotone
    in ``z``.  A geometric sweep brackets the first failure and bisection
    refines it to relative tolerance ``rtol``.  With a vanishing bound
    constant there is no fold and the pole ``D -> 1`` is the limit.

    Raises
    ------
    NoFoldFound
        If the branch survives up to ``z_max`` (or the turning point of
        ``q``, whichever is smaller).
    """
    if eta_abs is not None and eta_abs != cfg.d1:
        cfg = MajorantConfig(cfg.bound_constant, eta_abs, cfg.d2, cfg.order, cfg.gamma_cap)
    Df = _fold_point(cfg.effective_constant)
    beta = cfg.d2 - 6 * cfg.effective_constant * cfg.d1**2
    z_top = z_max
    if beta < 0 and cfg.d1 > 0:
        z_top = min(z_max, cfg.d1 / (-2 * beta))
    if cfg.d1 == 0 and beta <= 0:
        raise NoFoldFound(z_top)
    if _branch_exists(cfg, z_top, Df):
        raise NoFoldFound(z_top)
    lo, hi = 0.0, z_top
    z = min(1e-12, z_top / 2)
    while z < z_top:
        if not _branch_exists(cfg, z, Df):
            hi = z
            break
        lo = z
        z *= 2.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if _branch_exists(cfg, mid, Df):
            lo = mid
        else:
            hi = mid
    return lo


def branch_value(cfg, z):
    """``D(z)`` on the analytic branch, for ``0 <= z`` below the radius."""
    if z == 0:
        return 0.0
    Df = _fold_point(cfg.effective_constant)
    top = min(Df, 1.0 - 1e-15)
    f = lambda D: implicit_defect(cfg, z, D)
    if f(top) < 0:
        raise ValueError(f"z={z} is beyond the radius of the branch")
    return brentq(f, 0.0, top, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)


# empirical growth ------------------------------------------------------------


@dataclass
class GrowthFit:
    """Least-squares fit of ``log|c_n| ~ intercept + slope n``."""

    slope: float
    intercept: float
    r_squared: float
    indices: tuple
    radius: float
    oscillatory: bool = False
    entire: bool = False


def empirical_radius(coeffs, window):
    """Estimate the radius of convergence from the trailing coefficients.

    Fits ``log|c_n|`` against ``n`` over the last ``window`` nonzero
    coefficients; the radius is ``exp(-slope)``.  Fits with ``R^2 < 0.9``
    are flagged oscillatory.  If ``log|c_n|`` is strictly concave across the
    window and ``|c_n|^{1/n}`` keeps decreasing, the decay is faster than
    geometric; the radius is reported as infinite and flagged entire.

    Raises
    ------
    InsufficientData
        Fewer than ``window`` nonzero coefficients, or ``window < 3``.
    """
    if window < 3:
        raise InsufficientData("window must be at least 3")
    mags = [float(abs(complex(c))) for c in coeffs]
    idx = [n for n in range(1, len(mags)) if mags[n] > 0]
    if len(idx) < window:
        raise InsufficientData(f"need {window} nonzero coefficients, have {len(idx)}")
    idx = idx[-window:]
    n = np.array(idx, dtype=float)
    y = np.log([mags[i] for i in idx])
    slope, intercept = np.polyfit(n, y, 1)
    resid = y - (intercept + slope * n)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    fit = GrowthFit(float(slope), float(intercept), r2, tuple(idx), math.exp(-slope))
    contiguous = idx[-1] - idx[0] == len(idx) - 1
    if contiguous:
        second = np.diff(y, 2)
        roots = y / n
        if np.all(second < -1e-9) and np.all(np.diff(roots) < 0):
            fit.entire = True
            fit.radius = math.inf
    if not fit.entire and r2 < 0.9:
        fit.oscillatory = True
    return fit


def brjuno_radius_bound(d, brjuno_partial):
    """``(T e^{B_K})^{-1}`` with ``T = max_n d_n^{1/n}``.

    The true lower bound carries an extra factor ``e^{-xi}`` with an
    unspecified constant ``xi > 0``, and ``B_K`` is only a partial sum, so the
    value is reported as a parametric expression, never as a certified bound.
    """
    T = max(float(d[n]) ** (1.0 / n) for n in range(1, len(d)) if d[n] > 0)
    return {
        "T": T,
        "brjuno_partial": brjuno_partial,
        "prefactor": 1.0 / (T * math.exp(brjuno_partial)),
        "expression": "prefactor * exp(-xi), xi > 0 unspecified",
    }


@dataclass
class RadiusReport:
    """Radius diagnostics for one auxiliary series."""

    empirical_radius: float
    majorant_radius: Optional[float] = None
    majorant_lower_bound: bool = False  # True when NoFoldFound: value is z_max
    brjuno_bound: Optional[dict] = None
    coefficient_growth_fit: Optional[GrowthFit] = None
    windows: dict = field(default_factory=dict)
    domination_ok: Optional[bool] = None
    domination_violations: list = field(default_factory=list)


def default_windows(order):
    """Two nested fit windows for :func:`empirical_radius`."""
    return tuple(sorted({max(3, order // 4), max(3, order // 2)}))


def radius_report(inst, aux, windows=None, majorant=True):
    """Collect empirical, majorant and Brjuno radius diagnostics for ``aux.g``.

    The empirical radius is taken from the widest window that has enough
    nonzero coefficients.  With ``majorant=True`` the documented majorant is
    built, checked for termwise domination of ``|c_n|`` and its implicit
    radius computed; a branch that never folds is reported with
    ``majorant_lower_bound=True``.
    """
    g = aux.g
    windows = default_windows(inst.order) if windows is None else tuple(windows)
    fits = {}
    for w in windows:
        try:
            fits[w] = empirical_radius(g.coeffs, w)
        except InsufficientData:
            continue
    best = fits[max(fits)] if fits else None
    rep = RadiusReport(
        empirical_radius=best.radius if best else math.nan,
        coefficient_growth_fit=best,
        windows={w: f.radius for w, f in fits.items()},
    )
    if not majorant:
        return rep
    cfg = majorant_config_for(inst, aux)
    d = majorant_coeffs(cfg)
    mags = [float(abs(complex(c))) for c in g.coeffs]
    rep.domination_violations = [
        n for n in range(1, min(len(d), len(mags))) if mags[n] > d[n] * (1 + 1e-12)
    ]
    rep.domination_violations += [v for v, _, _ in check_free_coefficients(aux, d)
                                  if v not in rep.domination_violations]
    rep.domination_ok = not rep.domination_violations
    try:
        rep.majorant_radius = implicit_radius(cfg)
    except NoFoldFound as exc:
        rep.majorant_radius = exc.z_max
        rep.majorant_lower_bound = True
    if aux.regime is Regime.IRRATIONAL_ROTATION:
        profile = small_divisor_profile(inst.gamma, inst.order + 1)
        if profile.brjuno_partial is not None:
            rep.brjuno_bound = brjuno_radius_bound(d, profile.brjuno_partial)
    return rep
