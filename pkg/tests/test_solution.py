import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from statedelay import (
    IrrationalRotation,
    ProblemInstance,
    TruncatedPowerSeries,
    build_solution,
    solve_g,
    verify_coefficients,
    worked_example,
)
from statedelay.errors import DegenerateA0, InnerConstantNonzero, InvalidInstance
from statedelay.solution import (
    build_x,
    build_y,
    delay_defect,
    guard_precision,
    leading_coefficients,
    x0_balanced,
    x0_closed_form,
)

from conftest import random_instance


def test_worked_example_leading_terms():
    b = build_solution(worked_example(gamma=0.5))
    i = 1j
    g = 0.5
    assert abs(b.x[1] - (-(2 + i) / (1 + i))) < 1e-14
    assert abs(b.x[2] - (g - 2 * i) / (2 * (1 + i))) < 1e-14
    assert abs(b.x[3] - (9 * i - 2 - g * (3 + 2 * i)) / (6 * (3 - i))) < 1e-14
    # the balance rule, not the published one, is the default
    assert abs(b.x0 - x0_balanced(worked_example())) < 1e-15


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_leading_coefficient_identities(seed):
    inst = random_instance(np.random.default_rng(seed), order=10)
    b = build_solution(inst, verify=False)
    x1, x2, x3 = leading_coefficients(inst)
    assert abs(b.x[1] - x1) <= 1e-14 * max(1, abs(x1))
    assert abs(b.x[2] - x2) <= 1e-14 * max(1, abs(x2))
    assert abs(b.x[3] - x3) <= 1e-12 * max(1, abs(x3))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_inner_argument_closure(seed):
    # p + b x' reproduces y through N - 1
    inst = random_instance(np.random.default_rng(seed), order=10)
    b = build_solution(inst, verify=False)
    n = inst.order - 1
    lhs = inst.p.truncate(n) + b.x.derivative().truncate(n) * inst.b
    scale = max(1.0, b.y.max_abs(n))
    assert (lhs - b.y.truncate(n)).max_abs() <= 1e-12 * scale


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_residual_suite(seed):
    inst = random_instance(np.random.default_rng(seed), order=20)
    b = build_solution(inst)
    assert b.residual_orders == {"auxiliary_integrated": 19, "auxiliary_equation": 18,
                                 "y_equation": 17, "delay_equation": 17}
    assert max(b.residuals.values()) < 1e-8


def test_published_x0_leaves_constant_defect():
    inst = worked_example(x0_rule="a0p0")
    b = build_solution(inst)
    p0 = inst.p[0]
    expected = abs((inst.a0 - inst.a1) * p0 / inst.b)
    assert b.residuals["delay_equation"] == pytest.approx(expected, rel=1e-12)
    assert abs(b.x0 - x0_closed_form(inst)) < 1e-15
    assert build_solution(worked_example()).residuals["delay_equation"] < 1e-12


def test_degenerate_a0():
    inst = worked_example().replace(a0=1)
    with pytest.raises(DegenerateA0):
        build_solution(inst)


def test_foreign_x_rejected():
    inst = worked_example(order=6)
    x = TruncatedPowerSeries([0, 1, 0, 0, 0, 0, 0, 0])
    with pytest.raises(InnerConstantNonzero):
        delay_defect(x, inst)


def test_invalid_instances():
    with pytest.raises(InvalidInstance):
        worked_example().replace(a2=0)
    with pytest.raises(InvalidInstance):
        worked_example().replace(b=0)
    with pytest.raises(InvalidInstance):
        worked_example(x0_rule="other")
    with pytest.raises(InvalidInstance):
        worked_example(order=1)


def test_guard_precision_is_used_when_needed():
    inst = worked_example(order=30)
    g = solve_g(inst).g
    prec = guard_precision(inst, g)
    assert prec is not None and prec.startswith("extended:")
    b = build_solution(inst)
    assert b.guard_precision == prec
    assert max(b.residuals.values()) < 1e-8
    # the delivered double coefficients cannot reproduce that accuracy on their own
    delivered, _ = verify_coefficients(inst, b.g)
    assert delivered["auxiliary_integrated"] < 1e-12


def test_well_conditioned_needs_no_guard():
    inst = ProblemInstance(a0=0, a1=0, a2=1, b=1, p=[0, 0.3], h=[0], gamma=0.4, order=6)
    assert guard_precision(inst, solve_g(inst).g) is None
    assert build_solution(inst).guard_precision is None


def test_irrational_rotation_extended():
    inst = worked_example(gamma=IrrationalRotation(quotients=[1], periodic=True),
                          order=12, precision="extended:40")
    b = build_solution(inst)
    assert max(b.residuals.values()) < 1e-25


def test_y_from_helpers():
    inst = worked_example(order=8)
    g = solve_g(inst).g
    y = build_y(g, inst.gamma_value)
    x = build_x(y, inst, x0_balanced(inst))
    assert y[0] == 0
    assert x.order == inst.order + 1


def test_trivial_bundle():
    b = build_solution(worked_example(eta=0))
    assert b.y is None and b.x is None
