import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from statedelay import (
    IrrationalRotation,
    MajorantConfig,
    RootOfUnity,
    empirical_radius,
    implicit_radius,
    majorant_coeffs,
    majorant_config_for,
    radius_report,
    solve_g,
    tune_resonances,
    worked_example,
)
from statedelay.errors import InsufficientData, NoFoldFound
from statedelay.majorant import (
    branch_value,
    brjuno_radius_bound,
    implicit_defect,
    majorant_coeffs_literal,
)

from conftest import random_instance

constants = st.floats(0.0, 3.0)


def test_first_recurrence_step():
    # d3 = M (2 d1^3 + 6 * 2 d1 d2 + d1^2 (2 + 4 + 6) d1) with d1 = 1, d2 = 0
    d = majorant_coeffs(MajorantConfig(1.0, 1.0, 0.0, 3))
    assert d[3] == pytest.approx(14.0)


@settings(max_examples=30, deadline=None)
@given(constants, constants, constants)
def test_series_recurrence_matches_literal_sums(M, d1, d2):
    cfg = MajorantConfig(M, d1, d2, 8)
    fast = majorant_coeffs(cfg)
    lit = majorant_coeffs_literal(cfg)
    for a, b in zip(fast, lit):
        assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


@settings(max_examples=100, deadline=None)
@given(constants, constants, constants, st.floats(0.0, 1.0), st.sampled_from(["M", "d1", "d2"]))
def test_nonnegative_and_monotone(M, d1, d2, bump, which):
    base = MajorantConfig(M, d1, d2, 15)
    kw = {"bound_constant": M, "d1": d1, "d2": d2}
    kw[{"M": "bound_constant", "d1": "d1", "d2": "d2"}[which]] += bump
    bigger = MajorantConfig(order=15, **kw)
    a, b = majorant_coeffs(base), majorant_coeffs(bigger)
    assert np.all(a >= 0)
    assert np.all(b >= a * (1 - 1e-12))


def test_branch_matches_majorant_series():
    # the implicit branch expands into the majorant coefficients
    cfg = MajorantConfig(0.05, 1.0, 0.3, 40)
    d = majorant_coeffs(cfg)
    r = implicit_radius(cfg)
    for z in (0.1 * r, 0.3 * r):
        series = sum(d[n] * z**n for n in range(len(d)))
        assert branch_value(cfg, z) == pytest.approx(series, rel=1e-10)


def test_implicit_radius_is_the_fold():
    cfg = MajorantConfig(0.05, 1.0, 0.3, 20)
    r = implicit_radius(cfg)
    branch_value(cfg, r * (1 - 1e-6))
    with pytest.raises(ValueError):
        branch_value(cfg, r * (1 + 1e-4))
    assert implicit_defect(cfg, 0.0, 0.0) == 0.0


def test_zero_constant_gives_pole_radius():
    assert implicit_radius(MajorantConfig(0.0, 2.0, 0.0, 10)) == pytest.approx(0.5, rel=1e-7)


def test_no_fold_found():
    cfg = MajorantConfig(0.0, 0.0, 0.0, 10)
    with pytest.raises(NoFoldFound):
        implicit_radius(cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        MajorantConfig(-1.0, 1.0, 0.0, 10)
    with pytest.raises(ValueError):
        MajorantConfig(1.0, 1.0, 0.0, 1)
    assert MajorantConfig(2.0, 1, 0, 5, gamma_cap=3.0).effective_constant == 6.0


def test_empirical_radius_geometric():
    fit = empirical_radius([0] + [2.0**n for n in range(1, 30)], 10)
    assert fit.radius == pytest.approx(0.5)
    assert fit.r_squared == pytest.approx(1.0)
    assert not fit.oscillatory and not fit.entire


def test_empirical_radius_entire():
    fit = empirical_radius([1 / math.factorial(n) for n in range(30)], 10)
    assert fit.entire and math.isinf(fit.radius)


def test_empirical_radius_oscillatory():
    rng = np.random.default_rng(0)
    coeffs = [0] + list(np.exp(rng.normal(0, 5, 30)))
    assert empirical_radius(coeffs, 20).oscillatory


def test_empirical_radius_needs_data():
    with pytest.raises(InsufficientData):
        empirical_radius([0, 1, 0, 0, 0], 4)
    with pytest.raises(InsufficientData):
        empirical_radius([0, 1, 1, 1, 1], 2)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_domination_on_random_instances(seed):
    inst = random_instance(np.random.default_rng(seed), order=20)
    aux = solve_g(inst, warn=False)
    rep = radius_report(inst, aux)
    assert rep.domination_ok, rep.domination_violations
    assert rep.majorant_radius <= 2 * rep.empirical_radius


def test_root_of_unity_majorant_uses_gamma_cap():
    inst = tune_resonances(worked_example(gamma=RootOfUnity(1, 3), order=10, precision="extended:30"))
    cfg = majorant_config_for(inst)
    assert cfg.gamma_cap == pytest.approx(1 / math.sqrt(3))
    rep = radius_report(inst, solve_g(inst))
    assert rep.domination_ok


def test_brjuno_bound_is_parametric():
    inst = worked_example(gamma=IrrationalRotation(quotients=[1], periodic=True),
                          order=12, precision="extended:30")
    rep = radius_report(inst, solve_g(inst))
    bound = rep.brjuno_bound
    assert "xi" in bound["expression"]
    assert bound["prefactor"] == pytest.approx(1 / (bound["T"] * math.exp(bound["brjuno_partial"])))
    d = majorant_coeffs(majorant_config_for(inst))
    assert brjuno_radius_bound(d, 0.0)["prefactor"] == pytest.approx(1 / bound["T"])
