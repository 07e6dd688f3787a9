"""Acceptance criteria, one test each; every test records a PASS/FAIL line."""

import json
import time
from pathlib import Path

import numpy as np

from statedelay import (
    IrrationalRotation,
    RootOfUnity,
    TruncatedPowerSeries,
    build_solution,
    c2_closed_form,
    cli,
    radius_report,
    solve_g,
    theta_resonance_literal,
    tune_resonances,
    worked_example,
)
from statedelay.gamma import brjuno_partial_sums, continued_fraction_from_quotients
from statedelay.majorant import empirical_radius
from statedelay.series import compose, differentiate, dilate, invert
from statedelay.solution import x0_closed_form

from conftest import random_instance, record

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
RESIDUAL_TOL = 1e-8


def _example_closed_forms(inst):
    fld = inst.field
    i = fld.scalar(1j)
    g = inst.gamma_value
    return [
        (10 * i + 3 - g * (1 - 2 * i)) / (2 * i - 4),
        -(2 + i) / (1 + i),
        (g - 2 * i) / (2 * (1 + i)),
        (9 * i - 2 - g * (3 + 2 * i)) / (6 * (3 - i)),
    ]


def _example_gap(inst):
    b = build_solution(inst, verify=False)
    ref = _example_closed_forms(inst)
    got = [x0_closed_form(inst), b.x[1], b.x[2], b.x[3]]
    return max(float(abs(a - r) / abs(r)) for a, r in zip(got, ref))


def test_criterion_1_worked_example():
    t0 = time.perf_counter()
    # x0 is compared under the published rule, see the x0 notes in the README
    gap_h1 = _example_gap(worked_example(gamma=0.5, order=20, x0_rule="a0p0"))
    golden = IrrationalRotation(quotients=[1], periodic=True)
    gap_h2 = _example_gap(worked_example(gamma=golden, order=8, precision="extended:50", x0_rule="a0p0"))
    elapsed = time.perf_counter() - t0
    ok = gap_h1 < 1e-9 and gap_h2 < 1e-30 and elapsed < 1.0
    record("criterion 1", ok, f"rel gap {gap_h1:.1e} (gamma=1/2), {gap_h2:.1e} (golden, extended); {elapsed:.2f}s")
    assert ok


def _criterion_2_instances():
    rng = np.random.default_rng(2024)
    return [random_instance(rng, order=20) for _ in range(50)]


def test_criterion_2_residual_suite():
    t0 = time.perf_counter()
    worst = {}
    for inst in _criterion_2_instances():
        b = build_solution(inst)
        for k, v in b.residuals.items():
            worst[k] = max(worst.get(k, 0.0), v)
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) <= RESIDUAL_TOL and elapsed < 10.0
    detail = ", ".join(f"{k} {v:.1e}" for k, v in sorted(worst.items()))
    record("criterion 2", ok, f"worst {detail}; {elapsed:.2f}s")
    assert ok


def test_criterion_3_oracle_equivalence():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        inst = random_instance(rng, order=8)
        g = solve_g(inst, warn=False).g
        gamma, a2 = complex(inst.gamma_value), complex(inst.a2)
        chain = [complex(inst.eta), complex(c2_closed_form(inst))]
        for n in range(1, 5):
            theta = theta_resonance_literal(n, inst, chain)
            chain.append(theta / ((n + 2) * a2 * gamma * (gamma ** (n + 1) - 1)))
        for k in range(3, 7):
            ref = chain[k - 1]
            worst = max(worst, abs(complex(g[k]) - ref) / max(1.0, abs(ref)))
    ok = worst < 1e-10
    record("criterion 3", ok, f"max relative gap on c3..c6 {worst:.1e}")
    assert ok


def test_criterion_4_root_of_unity(tmp_path):
    inst = worked_example(gamma=RootOfUnity(1, 2), order=20)
    lit = abs(theta_resonance_literal(1, inst, [inst.eta, c2_closed_form(inst)]))
    report = tmp_path / "r.json"
    code, _ = cli.run(["solve", "--config", str(CONFIGS / "resonant_obstructed.yaml"), "--report", str(report)])
    err = json.loads(report.read_text())["error"]
    obstructed_ok = lit > 1e-6 and code == 2 and err["n"] == 1

    # cancelling every resonance needs the forcing exactly; extended precision holds it
    tuned = tune_resonances(inst.replace(precision="extended:30"))
    b = build_solution(tuned)
    first = b.auxiliary.resonance_log[0]
    tuned_ok = (first.n == 1 and first.action == "free" and b.g[3] == 0
                and max(b.residuals.values()) <= RESIDUAL_TOL)
    ok = obstructed_ok and tuned_ok
    record("criterion 4", ok,
           f"|Theta(1)| = {lit:.4f}, exit {code} at n={err['n']}; tuned: "
           f"{len(b.auxiliary.resonance_log)} free steps, worst residual {max(b.residuals.values()):.1e}")
    assert ok


def _random_series(rng, n, decay, zero_constant=False):
    c = (rng.uniform(-1, 1, n + 1) + 1j * rng.uniform(-1, 1, n + 1)) * decay ** np.arange(n + 1)
    if zero_constant:
        c[0] = 0
    return TruncatedPowerSeries(c)


def _gap(f, g):
    n = min(f.order, g.order)
    a, b = np.asarray(f.coeffs[: n + 1]), np.asarray(g.coeffs[: n + 1])
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))))


def test_criterion_5_series_algebra():
    rng = np.random.default_rng(5)
    worst = dict.fromkeys(["inverse", "product", "chain", "dilation", "associativity"], 0.0)
    for _ in range(200):
        n = int(rng.integers(1, 31))
        f = _random_series(rng, n, 0.3, zero_constant=True).with_coefficient(1, rng.uniform(0.5, 2) * np.exp(2j * np.pi * rng.uniform()))
        ident = TruncatedPowerSeries.identity(n)
        q = invert(f)
        worst["inverse"] = max(worst["inverse"], _gap(compose(f, q), ident), _gap(compose(q, f), ident))
        u, v = _random_series(rng, n, 0.5), _random_series(rng, n, 0.5)
        w = _random_series(rng, n, 0.4, zero_constant=True)
        x = _random_series(rng, n, 0.4, zero_constant=True)
        worst["product"] = max(worst["product"], _gap(differentiate(u * v), differentiate(u) * v + u * differentiate(v)))
        worst["chain"] = max(worst["chain"], _gap(differentiate(compose(u, w)), compose(differentiate(u), w) * differentiate(w)))
        gam = rng.uniform(0.1, 1) * np.exp(2j * np.pi * rng.uniform())
        worst["dilation"] = max(worst["dilation"], _gap(dilate(u * v, gam), dilate(u, gam) * dilate(v, gam)))
        worst["associativity"] = max(worst["associativity"], _gap(compose(compose(u, w), x), compose(u, compose(w, x))))
    ok = max(worst.values()) < 1e-12
    record("criterion 5", ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert ok


def test_criterion_6_brjuno():
    cf = continued_fraction_from_quotients([1], depth=80, periodic=True)
    fib = [1, 1]
    while len(fib) < len(cf.denominators):
        fib.append(fib[-1] + fib[-2])
    fib_ok = cf.denominators == fib
    sums = brjuno_partial_sums(cf)
    tails = {K: abs(sums[K + 10] - sums[K]) for K in range(30, len(sums) - 10)}
    worst_K = max(tails, key=tails.get)
    ok = fib_ok and all(t < 1e-6 for t in tails.values())
    record("criterion 6", ok,
           f"Fibonacci denominators {'exact' if fib_ok else 'WRONG'}; "
           f"max |B_(K+10) - B_K| over K>=30 is {tails[worst_K]:.2e} at K={worst_K}")
    assert ok


def test_criterion_7_majorant_domination():
    violations, worst_ratio = 0, 0.0
    for inst in _criterion_2_instances():
        aux = solve_g(inst, warn=False)
        rep = radius_report(inst, aux)
        violations += len(rep.domination_violations)
        worst_ratio = max(worst_ratio, rep.majorant_radius / rep.empirical_radius)
    ok = violations == 0 and worst_ratio <= 2.0
    record("criterion 7", ok, f"{violations} domination violations; max implicit/empirical radius {worst_ratio:.3f}")
    assert ok


def test_criterion_8_radius_stability():
    radii = {}
    for N in (40, 60):
        g = solve_g(worked_example(gamma=0.5, order=N)).g
        for w in (10, 20):
            radii[(N, w)] = empirical_radius(g.coeffs, w).radius
    spread = max(radii.values()) / min(radii.values()) - 1
    ok = spread <= 0.2
    record("criterion 8", ok, ", ".join(f"N={N} w={w}: {r:.4f}" for (N, w), r in radii.items())
           + f"; spread {100 * spread:.1f}%")
    assert ok
