from math import factorial

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from statedelay.errors import NonzeroInnerConstant, NotInvertible
from statedelay.series import (
    TruncatedPowerSeries,
    add,
    compose,
    differentiate,
    dilate,
    evaluate,
    get_field,
    integrate,
    invert,
    mul,
    reciprocal,
)

TOL = 1e-12
PROPERTY = settings(max_examples=200, deadline=None)


def _close(f, g, upto=None, tol=TOL):
    n = min(f.order, g.order) if upto is None else upto
    a = np.array([complex(v) for v in f.coeffs[: n + 1]])
    b = np.array([complex(v) for v in g.coeffs[: n + 1]])
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / scale))


@st.composite
def series(draw, min_order=1, max_order=30, decay=0.5, zero_constant=False):
    """Random series with ``|c_k| <= decay**k``, which keeps compositions well scaled."""
    n = draw(st.integers(min_order, max_order))
    parts = draw(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=n + 1, max_size=n + 1))
    coeffs = [complex(re, im) * decay**k for k, (re, im) in enumerate(parts)]
    if zero_constant:
        coeffs[0] = 0
    return TruncatedPowerSeries(coeffs)


@st.composite
def invertible(draw, max_order=30):
    f = draw(series(min_order=1, max_order=max_order, decay=0.3, zero_constant=True))
    mod = draw(st.floats(0.5, 2.0))
    arg = draw(st.floats(0, 2 * np.pi))
    return f.with_coefficient(1, mod * np.exp(1j * arg))


@PROPERTY
@given(invertible())
def test_inverse_is_two_sided(f):
    q = invert(f)
    ident = TruncatedPowerSeries.identity(f.order)
    assert _close(compose(f, q), ident) < TOL
    assert _close(compose(q, f), ident) < TOL


@PROPERTY
@given(series(), series())
def test_product_rule(f, g):
    lhs = differentiate(f * g)
    rhs = differentiate(f) * g + f * differentiate(g)
    assert _close(lhs, rhs) < TOL


@PROPERTY
@given(series(), series(zero_constant=True, decay=0.4))
def test_chain_rule(f, g):
    lhs = differentiate(compose(f, g))
    rhs = compose(differentiate(f), g) * differentiate(g)
    assert _close(lhs, rhs) < TOL


@PROPERTY
@given(series(min_order=0), series(min_order=0), st.floats(0, 2 * np.pi), st.floats(0.1, 1.0))
def test_dilation_is_multiplicative(f, g, arg, mod):
    gamma = mod * np.exp(1j * arg)
    assert _close(dilate(f * g, gamma), dilate(f, gamma) * dilate(g, gamma)) < TOL


@PROPERTY
@given(series(), series(zero_constant=True, decay=0.4), series(zero_constant=True, decay=0.4))
def test_composition_is_associative(f, g, h):
    assert _close(compose(compose(f, g), h), compose(f, compose(g, h))) < TOL


def test_truncates_to_smaller_order():
    f = TruncatedPowerSeries([1, 2, 3, 4])
    g = TruncatedPowerSeries([1, 1])
    assert add(f, g).order == 1
    assert mul(f, g).order == 1
    assert compose(f, TruncatedPowerSeries([0, 1, 1])).order == 2


def test_geometric_series_reciprocal():
    f = TruncatedPowerSeries([1, -1, 0, 0, 0, 0])
    assert np.allclose(reciprocal(f).coeffs, np.ones(6))


def test_invert_known_series():
    # z / (1 - z) has inverse z / (1 + z)
    f = TruncatedPowerSeries([0, 1, 1, 1, 1, 1, 1])
    q = invert(f)
    assert np.allclose(q.coeffs, [0, 1, -1, 1, -1, 1, -1])


def test_exp_log_inverse():
    n = 12
    e = TruncatedPowerSeries([0] + [1 / factorial(k) for k in range(1, n + 1)])  # exp(z) - 1
    log1p = TruncatedPowerSeries([0] + [(-1) ** (k + 1) / k for k in range(1, n + 1)])
    assert _close(invert(e), log1p) < 1e-14


def test_calculus():
    f = TruncatedPowerSeries([1, 2, 3])
    assert list(differentiate(f).coeffs) == [2, 6]
    assert np.allclose(integrate(f).coeffs, [0, 1, 1, 1])
    assert evaluate(f, 2) == 1 + 4 + 12


def test_errors():
    with pytest.raises(NonzeroInnerConstant):
        compose(TruncatedPowerSeries([1, 1]), TruncatedPowerSeries([1, 1]))
    with pytest.raises(NotInvertible):
        invert(TruncatedPowerSeries([0, 0, 1]))
    with pytest.raises(NotInvertible):
        invert(TruncatedPowerSeries([1, 1]))


def test_extended_precision_inverse():
    fld = get_field("extended:60")
    f = TruncatedPowerSeries([0, 1, "0.3", "0.1", 0, 0, 0, 0, 0, 0], fld)
    err = compose(f, invert(f)) - TruncatedPowerSeries.identity(9, fld)
    assert err.max_abs() < 1e-55
    # decimal strings reach the field unrounded
    assert abs(f[2] - fld.ctx.mpf("0.3")) < mpmath.mpf(10) ** -59


def test_mixed_fields_widen():
    fld = get_field("extended:30")
    f = TruncatedPowerSeries([1, 1, 1], fld)
    g = TruncatedPowerSeries([1, 2, 3])
    assert (f + g).field is fld
