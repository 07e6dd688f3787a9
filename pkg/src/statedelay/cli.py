"""Command-line front end: ``statedelay {solve,classify,verify,radius,example}``.

Exit codes: 0 success, 1 configuration error, 2 no analytic solution
(an obstructed resonance), 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
import warnings

from .auxiliary import oracle_check, solve_g
from .config import (
    RunConfig,
    _is_spec,
    load_config,
    parse_complex,
    parse_free_coeffs,
    parse_gamma,
    parse_gamma_option,
)
from .errors import (
    ConfigError,
    DegenerateA0,
    InvalidGamma,
    InvalidInstance,
    NoAnalyticSolution,
    NonFiniteError,
    NotInvertible,
    OracleTooLarge,
    PrecisionExhausted,
    InnerConstantNonzero,
)
from .gamma import (
    Regime,
    brjuno_partial_sums,
    classify,
    gamma_value,
    log_divisor_growth,
    small_divisor_profile,
)
from .majorant import radius_report
from .problem import worked_example
from .report import RunReport, precision_metadata, read_csv, scalar_pair, write_csv, write_report
from .series import get_field
from .solution import build_solution, verify_coefficients, x0_closed_form

__all__ = ["main", "build_parser", "run"]

log = logging.getLogger("statedelay")

EXIT_OK, EXIT_CONFIG, EXIT_NO_SOLUTION, EXIT_NUMERIC = 0, 1, 2, 3

CONFIG_ERRORS = (ConfigError, InvalidInstance, InvalidGamma, DegenerateA0, OracleTooLarge)
NUMERIC_ERRORS = (
    NonFiniteError,
    PrecisionExhausted,
    NotInvertible,
    InnerConstantNonzero,
    ArithmeticError,
)


# argument handling ---------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML run configuration")
    common.add_argument("--order", type=int, metavar="N", help="truncation order of g")
    common.add_argument("--eta", metavar="RE,IM", help="g'(0)")
    common.add_argument("--gamma", metavar="G",
                        help="RE[,IM] inside the disk, q/p, theta:DEC, cf:a1,a2,... (trailing * = periodic)")
    common.add_argument("--precision", metavar="MODE", help="double or extended:DIGITS")
    common.add_argument("--report", metavar="PATH", help="write the JSON report here")
    common.add_argument("--csv", metavar="PATH", help="write the coefficients of g here")
    common.add_argument("--free-coeffs", metavar="SPEC",
                        help='values at resonant steps, e.g. "1=[0.5,0],2=[0,1]"')
    common.add_argument("--timing", action="store_true",
                        help="include wall-clock timings (makes reports nondeterministic)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="statedelay",
        description="Power-series solutions of a2 x'' + a1 x' + a0 x = x(p + b x') + h.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="solve, build x and check residuals")
    c = sub.add_parser("classify", parents=[common], help="regime and small-divisor diagnostics")
    c.add_argument("--depth", type=int, default=30, help="continued-fraction depth")
    v = sub.add_parser("verify", parents=[common], help="residuals of a coefficient file")
    v.add_argument("--coeffs", metavar="PATH", help="CSV of g written by solve --csv")
    r = sub.add_parser("radius", parents=[common], help="radius-of-convergence diagnostics")
    r.add_argument("--windows", metavar="W1,W2", help="fit windows for the growth fit")
    sub.add_parser("example", parents=[common], help="the built-in worked example")
    return parser


def _overrides(cfg, args):
    inst = dict(cfg.instance)
    if args.order is not None:
        inst["order"] = args.order
    if args.eta is not None:
        inst["eta"] = parse_complex([s.strip() for s in args.eta.split(",")], "--eta") \
            if "," in args.eta else parse_complex(args.eta.strip(), "--eta")
    if args.gamma is not None:
        inst["gamma"] = parse_gamma_option(args.gamma)
    if args.precision is not None:
        inst["precision"] = args.precision
    if args.free_coeffs is not None:
        inst["free_coeffs"] = {k: list(v) for k, v in parse_free_coeffs(args.free_coeffs).items()}
    cfg.instance = inst
    if args.report is not None:
        cfg.report = args.report
    if args.csv is not None:
        cfg.csv = args.csv
    if args.timing:
        cfg.timing = True
    return cfg


def _run_config(args):
    cfg = load_config(args.config) if args.config else RunConfig(instance={})
    return _overrides(cfg, args)


def _precision_of(args, cfg=None):
    spec = args.precision or (cfg.instance.get("precision") if cfg else None) or "double"
    try:
        return get_field(spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# report pieces -------------------------------------------------------------


def _resonance_rows(entries):
    return [
        {
            "n": e.n,
            "v": e.v,
            "coefficient_index": e.n + 2,
            "abs_theta": e.abs_theta,
            "scale": e.scale,
            "action": e.action,
            "value": None if e.value is None else scalar_pair(e.value),
        }
        for e in entries
    ]


def _radius_dict(rep):
    fit = rep.coefficient_growth_fit
    return {
        "empirical_radius": rep.empirical_radius,
        "windows": {str(w): r for w, r in sorted(rep.windows.items())},
        "coefficient_growth_fit": None if fit is None else {
            "slope": fit.slope,
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "first_index": fit.indices[0],
            "last_index": fit.indices[-1],
            "oscillatory": fit.oscillatory,
            "entire": fit.entire,
        },
        "majorant_radius": rep.majorant_radius,
        "majorant_radius_is_lower_bound": rep.majorant_lower_bound,
        "domination_ok": rep.domination_ok,
        "domination_violations": rep.domination_violations,
        "brjuno_bound": rep.brjuno_bound,
    }


def _classify_dict(spec, order, depth):
    regime = classify(spec)
    profile = small_divisor_profile(spec, order + 1, cf_depth=depth)
    out = {
        "regime": regime.value,
        "hypothesis": {Regime.INSIDE_DISK: "H1", Regime.IRRATIONAL_ROTATION: "H2",
                       Regime.ROOT_OF_UNITY: "H3"}[regime],
        "min_divisor": profile.min_divisor,
        "min_divisor_index": profile.argmin,
    }
    if regime is Regime.ROOT_OF_UNITY:
        out["resonant_exponents"] = list(profile.resonant)
        out["gamma_cap"] = profile.gamma_cap
    elif regime is Regime.IRRATIONAL_ROTATION:
        cf = profile.continued_fraction
        growth = log_divisor_growth(profile)
        out["divisor_growth"] = {
            "max_rate": growth["max_rate"],
            "superadditivity_violations": growth["superadditivity_violations"],
        }
        if cf is not None:
            sums = brjuno_partial_sums(cf)
            out["partial_quotients"] = list(cf.partial_quotients)
            out["denominators"] = cf.denominators
            out["brjuno_partial_sums"] = sums
            # Cauchy-tail indicator: spread of the last ten partial sums
            tail = sums[-11:]
            out["brjuno_tail_spread"] = max(tail) - min(tail) if len(tail) > 1 else None
    return out


def _base_report(command, fld):
    return RunReport(command=command, precision=precision_metadata(fld))


def _fill_solution(rep, inst, aux, bundle, cfg):
    fld = inst.field
    rep.coefficients = {
        name: [scalar_pair(c, fld) for c in s.coeffs]
        for name, s in (("g", bundle.g), ("y", bundle.y), ("x", bundle.x))
        if s is not None
    }
    rep.x0 = None if bundle.x0 is None else scalar_pair(bundle.x0, fld)
    rep.residuals = dict(bundle.residuals)
    rep.residual_orders = dict(bundle.residual_orders)
    rep.resonance_log = _resonance_rows(aux.resonance_log)
    rep.diagnostics["guard_precision"] = bundle.guard_precision
    rep.diagnostics["verified_resonances"] = list(aux.verified_resonances)
    rep.diagnostics["x0_rule"] = inst.x0_rule
    if cfg.verify and bundle.y is not None:
        delivered, _ = verify_coefficients(inst, bundle.g)
        rep.diagnostics["delivered_residuals"] = delivered
    if cfg.oracle_check_depth > 0 and not aux.trivial:
        rep.diagnostics["oracle_check_depth"] = cfg.oracle_check_depth
        rep.diagnostics["oracle_max_relative_gap"] = oracle_check(inst, aux.g, cfg.oracle_check_depth)


# commands ------------------------------------------------------------------


def _cmd_solve(args, cfg, rep, clock):
    inst = cfg.build_instance()
    rep.regime = inst.regime.value
    rep.gamma = scalar_pair(inst.gamma_value, inst.field)
    aux = _solve(inst, rep, clock)
    bundle = build_solution(inst, aux, verify=cfg.verify)
    clock("build")
    _fill_solution(rep, inst, aux, bundle, cfg)
    if not aux.trivial:
        rep.radius = _radius_dict(radius_report(inst, aux, majorant=cfg.majorant))
    clock("radius")
    if cfg.csv:
        write_csv(cfg.csv, aux.g)
    for name, value in sorted(rep.residuals.items()):
        print(f"{name:22s} {value:.3e}")
    if rep.x0 is not None:
        print(f"x0 = {_fmt(bundle.x0)}")
    return EXIT_OK


def _solve(inst, rep, clock):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            aux = solve_g(inst)
        finally:
            rep.warnings.extend(sorted({str(w.message) for w in caught}))
    clock("solve")
    return aux


def _cmd_classify(args, cfg, rep, clock):
    raw = cfg.instance.get("gamma")
    if raw is None:
        raise ConfigError("classify needs --gamma or a config with instance.gamma")
    spec = raw if _is_spec(raw) else parse_gamma(raw)
    order = int(cfg.instance.get("order", 20))
    info = _classify_dict(spec, order, args.depth)
    rep.regime = info["regime"]
    rep.gamma = scalar_pair(gamma_value(spec, get_field(rep.precision["mode"])),
                            get_field(rep.precision["mode"]))
    rep.diagnostics.update(info)
    clock("classify")
    print(f"regime {info['regime']} ({info['hypothesis']})")
    print(f"min |gamma^n - 1| = {info['min_divisor']:.6e} at n = {info['min_divisor_index']}")
    if "brjuno_partial_sums" in info:
        sums = info["brjuno_partial_sums"]
        print("partial quotients " + ",".join(map(str, info["partial_quotients"][:12]))
              + (",..." if len(info["partial_quotients"]) > 12 else ""))
        for k in range(0, len(sums), max(1, len(sums) // 8)):
            print(f"B_{k} = {sums[k]:.12f}")
        print(f"B_{len(sums) - 1} = {sums[-1]:.12f}")
    if "resonant_exponents" in info:
        print("resonant exponents " + ",".join(map(str, info["resonant_exponents"])))
    return EXIT_OK


def _cmd_verify(args, cfg, rep, clock):
    inst = cfg.build_instance()
    rep.regime = inst.regime.value
    rep.gamma = scalar_pair(inst.gamma_value, inst.field)
    if args.coeffs:
        g = read_csv(args.coeffs, inst.field)
        if g.order < 4:
            raise ConfigError("coefficient file needs at least five coefficients")
        rep.coefficients = {"g": [scalar_pair(c, inst.field) for c in g.coeffs]}
        rep.residuals, rep.residual_orders = verify_coefficients(inst, g)
        rep.diagnostics["source"] = "coefficients"
    else:
        aux = _solve(inst, rep, clock)
        bundle = build_solution(inst, aux, verify=True)
        _fill_solution(rep, inst, aux, bundle, cfg)
        rep.diagnostics["source"] = "solver"
    clock("verify")
    for name, value in sorted(rep.residuals.items()):
        print(f"{name:22s} {value:.3e}")
    return EXIT_OK


def _cmd_radius(args, cfg, rep, clock):
    inst = cfg.build_instance()
    rep.regime = inst.regime.value
    rep.gamma = scalar_pair(inst.gamma_value, inst.field)
    aux = _solve(inst, rep, clock)
    if aux.trivial:
        raise ConfigError("eta = 0 gives the zero series; there is no radius to estimate")
    windows = None
    if args.windows:
        try:
            windows = [int(w) for w in args.windows.split(",")]
        except ValueError:
            raise ConfigError(f"bad --windows {args.windows!r}") from None
    rr = radius_report(inst, aux, windows=windows, majorant=True)
    rep.radius = _radius_dict(rr)
    rep.resonance_log = _resonance_rows(aux.resonance_log)
    if cfg.csv:
        write_csv(cfg.csv, aux.g)
    clock("radius")
    print(f"empirical radius {rr.empirical_radius:.6g}")
    bound = "(lower bound)" if rr.majorant_lower_bound else ""
    print(f"majorant radius  {rr.majorant_radius:.6g} {bound}".rstrip())
    print(f"domination       {'ok' if rr.domination_ok else 'VIOLATED'}")
    return EXIT_OK


def _cmd_example(args, cfg, rep, clock):
    kw = {k: cfg.instance[k] for k in ("order", "precision", "free_coeffs") if k in cfg.instance}
    gamma = cfg.instance.get("gamma", 0.5)
    if isinstance(gamma, dict):
        gamma = parse_gamma(gamma)
    eta = parse_complex(cfg.instance.get("eta", 1))
    try:
        inst = worked_example(gamma=gamma, eta=eta, **kw)
    except (InvalidInstance, InvalidGamma, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    cfg.instance = {}
    rep.regime = inst.regime.value
    rep.gamma = scalar_pair(inst.gamma_value, inst.field)
    aux = _solve(inst, rep, clock)
    bundle = build_solution(inst, aux, verify=cfg.verify)
    clock("build")
    _fill_solution(rep, inst, aux, bundle, cfg)
    if cfg.csv:
        write_csv(cfg.csv, aux.g)
    if bundle.x is None:
        return EXIT_OK
    ref = _example_reference(inst)
    computed = [x0_closed_form(inst)] + [bundle.x[k] for k in (1, 2, 3)]
    rows = []
    print(f"{'':3s} {'computed':>44s}   {'closed form':>44s}")
    for k in range(4):
        rows.append({"k": k, "computed": scalar_pair(computed[k], inst.field),
                     "closed_form": scalar_pair(ref[k], inst.field)})
        print(f"x{k}  {_fmt(computed[k]):>44s}   {_fmt(ref[k]):>44s}")
    print(f"x0 under the constant-term balance: {_fmt(bundle.x0)}")
    rep.diagnostics["example_table"] = rows
    rep.diagnostics["x0_published_rule"] = scalar_pair(computed[0], inst.field)
    return EXIT_OK


def _example_reference(inst):
    """The symbolic values of ``x_0..x_3`` for the worked example at ``inst``'s gamma."""
    fld = inst.field
    i = fld.scalar(1j)
    g = inst.gamma_value
    return [
        (10 * i + 3 - g * (1 - 2 * i)) / (2 * i - 4),
        -(2 + i) / (1 + i),
        (g - 2 * i) / (2 * (1 + i)),
        (9 * i - 2 - g * (3 + 2 * i)) / (6 * (3 - i)),
    ]


def _fmt(z):
    re, im = scalar_pair(z)
    if isinstance(re, str):
        return f"{re} {'+' if not im.startswith('-') else '-'} {im.lstrip('-')}i"
    return f"{re:.15g} {'+' if im >= 0 else '-'} {abs(im):.15g}i"


COMMANDS = {
    "solve": _cmd_solve,
    "classify": _cmd_classify,
    "verify": _cmd_verify,
    "radius": _cmd_radius,
    "example": _cmd_example,
}


def run(argv=None):
    """Parse ``argv``, execute, and return ``(exit_code, RunReport or None)``."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    rep, cfg = None, None
    timings = {}
    start = [time.perf_counter()]

    def clock(stage):
        now = time.perf_counter()
        timings[stage] = timings.get(stage, 0.0) + now - start[0]
        start[0] = now

    try:
        cfg = _run_config(args)
        if args.command in ("solve", "verify", "radius") and not args.config:
            raise ConfigError(f"{args.command} needs --config")
        rep = _base_report(args.command, _precision_of(args, cfg))
        code = COMMANDS[args.command](args, cfg, rep, clock)
    except NoAnalyticSolution as exc:
        code = EXIT_NO_SOLUTION
        rep = rep or _base_report(args.command, "double")
        rep.resonance_log = _resonance_rows(getattr(exc, "resonance_log", []))
        rep.error = {"type": "NoAnalyticSolution", "message": str(exc), "n": exc.n,
                     "v": exc.v, "abs_theta": float(abs(exc.theta))}
        print(f"error: {exc}", file=sys.stderr)
    except CONFIG_ERRORS as exc:
        code = EXIT_CONFIG
        rep = rep or _base_report(args.command, "double")
        rep.error = {"type": type(exc).__name__, "message": str(exc)}
        print(f"config error: {exc}", file=sys.stderr)
    except NUMERIC_ERRORS as exc:
        code = EXIT_NUMERIC
        rep = rep or _base_report(args.command, "double")
        rep.error = {"type": type(exc).__name__, "message": str(exc)}
        print(f"numeric failure: {exc}", file=sys.stderr)
    rep.exit_code = code
    if cfg is not None and cfg.timing:
        rep.timing = {k: round(v, 6) for k, v in timings.items()}
    report_path = cfg.report if cfg is not None else args.report
    if report_path:
        try:
            write_report(rep, report_path)
        except OSError as exc:
            print(f"cannot write report: {exc}", file=sys.stderr)
            code = code or EXIT_CONFIG
    return code, rep


def main(argv=None):
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
