import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from statedelay.errors import InvalidGamma, PrecisionExhausted
from statedelay.gamma import (
    InsideDisk,
    IrrationalRotation,
    Regime,
    RootOfUnity,
    brjuno_partial_sum,
    brjuno_partial_sums,
    classify,
    continued_fraction,
    continued_fraction_from_quotients,
    gamma_power_minus_one,
    gamma_value,
    is_resonant,
    log_divisor_growth,
    small_divisor_profile,
)
from statedelay.series import get_field

PROPERTY = settings(max_examples=200, deadline=None)


def test_regimes():
    assert classify(InsideDisk(0.5)) is Regime.INSIDE_DISK
    assert classify(IrrationalRotation(quotients=[1], periodic=True)) is Regime.IRRATIONAL_ROTATION
    assert classify(RootOfUnity(1, 2)) is Regime.ROOT_OF_UNITY


@pytest.mark.parametrize(
    "spec",
    [InsideDisk(1.0), InsideDisk(0), InsideDisk(1.5j), RootOfUnity(2, 4), RootOfUnity(1, 1),
     IrrationalRotation(), IrrationalRotation(theta="1.5"), IrrationalRotation(quotients=[0, 1])],
)
def test_invalid_specs(spec):
    with pytest.raises(InvalidGamma):
        classify(spec)


def test_golden_mean_gives_fibonacci_denominators():
    cf = continued_fraction_from_quotients([1], depth=40, periodic=True)
    fib = [1, 1]
    while len(fib) < 41:
        fib.append(fib[-1] + fib[-2])
    assert cf.denominators == fib[:41]


def test_decimal_theta_certifies_quotients():
    theta = "0.6180339887498948482045868343656381177203091798058"
    cf = continued_fraction(theta, 40)
    assert set(cf.partial_quotients) == {1}
    with pytest.raises(PrecisionExhausted) as exc:
        continued_fraction("0.6180339887", 40)
    assert set(exc.value.certified) == {1}
    assert 0 < len(exc.value.certified) < 40


def test_sqrt2_quotients():
    mpmath.mp.dps = 60
    theta = str(mpmath.sqrt(2) - 1)
    mpmath.mp.dps = 15
    cf = continued_fraction(theta, 30)
    assert set(cf.partial_quotients) == {2}


def test_rational_terminates():
    cf = continued_fraction(Fraction(5, 13), 10)
    assert cf.rational
    p, q = cf.convergents[-1]
    assert Fraction(p, q) == Fraction(5, 13)


@PROPERTY
@given(st.lists(st.integers(1, 50), min_size=2, max_size=30))
def test_convergent_recurrence_exact(quotients):
    cf = continued_fraction_from_quotients(quotients)
    q = cf.denominators
    p = [c[0] for c in cf.convergents]
    for n in range(1, len(quotients)):
        prev_q = q[n - 1] if n >= 1 else 0
        assert q[n + 1] == quotients[n] * q[n] + prev_q
    # determinant identity p_{n+1} q_n - p_n q_{n+1} = +-1
    for n in range(len(quotients)):
        assert abs(p[n + 1] * q[n] - p[n] * q[n + 1]) == 1


@PROPERTY
@given(st.integers(1, 10**12), st.integers(2, 10**12))
def test_convergents_approximate(a, b):
    theta = Fraction(min(a, b - 1) if a < b else a % b or 1, b)
    if not 0 < theta < 1:
        return
    cf = continued_fraction(theta, 60)
    conv = cf.convergents
    last = len(conv) - 2
    for n in range(1, last + 1):
        p, q = conv[n]
        _, q_next = conv[n + 1]
        err = abs(Fraction(p, q) - theta)
        # strict except at the final step of a terminating expansion
        if n < last:
            assert err < Fraction(1, q * q_next)
        else:
            assert err <= Fraction(1, q * q_next)


@PROPERTY
@given(st.lists(st.integers(1, 20), min_size=3, max_size=30))
def test_brjuno_partial_sums_nondecreasing(quotients):
    cf = continued_fraction_from_quotients(quotients)
    sums = brjuno_partial_sums(cf)
    assert all(b >= a for a, b in zip(sums, sums[1:]))
    assert sums[-1] == pytest.approx(brjuno_partial_sum(cf, len(sums) - 1))


@PROPERTY
@given(st.integers(-20, 20), st.integers(2, 30), st.integers(1, 200))
def test_resonance_decided_on_integers(q, p, n):
    if q == 0 or math.gcd(abs(q), p) != 1:
        return
    spec = RootOfUnity(q, p)
    assert is_resonant(spec, n) == (n % p == 0)
    d = gamma_power_minus_one(spec, n)
    if n % p == 0:
        assert d == 0
    else:
        assert abs(d) > 0


def test_divisor_without_cancellation():
    spec = IrrationalRotation(quotients=[1], periodic=True)
    fld = get_field("extended:50")
    g = gamma_value(spec, fld)
    for n in (1, 13, 89):
        direct = g**n - 1
        assert abs(gamma_power_minus_one(spec, n, fld) - direct) < 1e-40


def test_gamma_values():
    assert gamma_value(RootOfUnity(1, 2)) == -1
    assert gamma_value(RootOfUnity(1, 4)) == 1j
    assert abs(gamma_value(RootOfUnity(1, 3)) - np.exp(2j * np.pi / 3)) < 1e-15


def test_small_divisor_profile_root_of_unity():
    prof = small_divisor_profile(RootOfUnity(1, 3), 10)
    assert prof.resonant == (3, 6, 9)
    assert prof.divisor(3) == 0.0
    assert prof.gamma_cap == pytest.approx(1 / math.sqrt(3))


def test_small_divisor_profile_golden():
    prof = small_divisor_profile(IrrationalRotation(quotients=[1], periodic=True), 60)
    # the closest returns happen at Fibonacci indices
    assert prof.argmin == 55
    growth = log_divisor_growth(prof)
    jump = growth["cumulative"][54] - growth["cumulative"][53]
    assert jump == pytest.approx(-math.log(prof.min_divisor))
    assert growth["superadditivity_violations"] >= 0
    assert prof.brjuno_partial > 3.2
