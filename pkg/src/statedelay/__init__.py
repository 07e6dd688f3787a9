"""Power-series solutions of a second-order equation with state-derivative-dependent delay.

The equation ``a2 x'' + a1 x' + a0 x = x(p(z) + b x'(z)) + h(z)`` is solved
through an auxiliary series ``g`` that conjugates the deviating argument to
the rotation ``z -> gamma z``.  Typical use::

    from statedelay import worked_example, solve_g, build_solution

    inst = worked_example(gamma=0.5, order=20)
    bundle = build_solution(inst)
    bundle.x[:4], bundle.residuals
"""

from .auxiliary import (
    AuxiliarySolution,
    ResonanceEntry,
    c2_closed_form,
    oracle_check,
    solve_g,
    theta_resonance_literal,
    tune_resonances,
)
from .errors import (
    ConfigError,
    DegenerateA0,
    InnerConstantNonzero,
    InvalidGamma,
    InvalidInstance,
    NoAnalyticSolution,
    NoFoldFound,
    NonFiniteError,
    NotInvertible,
    SmallDivisorWarning,
    StateDelayError,
)
from .gamma import (
    InsideDisk,
    IrrationalRotation,
    Regime,
    RootOfUnity,
    brjuno_partial_sum,
    classify,
    continued_fraction,
    small_divisor_profile,
)
from .majorant import (
    MajorantConfig,
    empirical_radius,
    implicit_radius,
    majorant_coeffs,
    majorant_config_for,
    radius_report,
)
from .problem import ProblemInstance, worked_example
from .series import TruncatedPowerSeries, compose, dilate, get_field, invert
from .solution import SolutionBundle, build_solution, verify_coefficients

__all__ = [
    "AuxiliarySolution",
    "ConfigError",
    "DegenerateA0",
    "InnerConstantNonzero",
    "InsideDisk",
    "InvalidGamma",
    "InvalidInstance",
    "IrrationalRotation",
    "MajorantConfig",
    "NoAnalyticSolution",
    "NoFoldFound",
    "NonFiniteError",
    "NotInvertible",
    "ProblemInstance",
    "Regime",
    "ResonanceEntry",
    "RootOfUnity",
    "SmallDivisorWarning",
    "SolutionBundle",
    "StateDelayError",
    "TruncatedPowerSeries",
    "brjuno_partial_sum",
    "build_solution",
    "c2_closed_form",
    "classify",
    "compose",
    "continued_fraction",
    "dilate",
    "empirical_radius",
    "get_field",
    "implicit_radius",
    "invert",
    "majorant_coeffs",
    "majorant_config_for",
    "oracle_check",
    "radius_report",
    "small_divisor_profile",
    "solve_g",
    "theta_resonance_literal",
    "tune_resonances",
    "verify_coefficients",
    "worked_example",
]

__version__ = "0.1.0"
