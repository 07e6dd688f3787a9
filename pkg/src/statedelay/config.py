"""Run configuration: a YAML file with ``instance``, ``outputs`` and ``toggles``.

Example::

    instance:
      a0: [0, 3]
      a1: [1, 1]
      a2: [1, -2]
      b: [1, 1]
      p: [[2, 1], [0, 2], [1, 0]]
      h: [[2, 0], [2, -1], [1, 0]]
      gamma: {kind: inside_disk, value: [0.5, 0]}
      eta: [1, 0]
      order: 20
      precision: double
    outputs:
      report: out/report.json
      csv: out/g.csv
    toggles:
      verify: true
      majorant: true
      oracle_check_depth: 4

Complex numbers are ``[re, im]`` pairs (a bare real is accepted); components
may be decimal strings, which keeps every digit in extended precision.
``gamma`` is a tagged union:

* ``{kind: inside_disk, value: [re, im]}``
* ``{kind: irrational_rotation, theta: "0.6180339887..."}`` or
  ``{kind: irrational_rotation, quotients: [1], periodic: true}``
* ``{kind: root_of_unity, q: 1, p: 2}``
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Optional

import yaml

from .errors import ConfigError, InvalidGamma, InvalidInstance
from .gamma import InsideDisk, IrrationalRotation, RootOfUnity
from .problem import ProblemInstance

__all__ = [
    "RunConfig",
    "load_config",
    "parse_complex",
    "parse_free_coeffs",
    "parse_gamma",
    "parse_gamma_option",
    "run_config_from_dict",
]

MIN_ORDER = 4
INSTANCE_KEYS = {
    "a0", "a1", "a2", "b", "p", "h", "gamma", "eta", "order", "precision",
    "zero_tol", "divisor_warn_tol", "free_coeffs", "x0_rule",
}
TOGGLE_DEFAULTS = {"verify": True, "majorant": False, "oracle_check_depth": 4, "timing": False}


@dataclass
class RunConfig:
    """A parsed configuration.

    ``instance`` holds the raw instance fields; :meth:`build_instance` turns
    them into a :class:`ProblemInstance` after command-line overrides have
    been applied.
    """

    instance: dict
    report: Optional[str] = None
    csv: Optional[str] = None
    verify: bool = True
    majorant: bool = False
    oracle_check_depth: int = 4
    timing: bool = False
    source: Optional[str] = field(default=None, repr=False)

    def build_instance(self):
        """Validate and convert ``instance``; every failure is a :class:`ConfigError`."""
        raw = dict(self.instance)
        missing = {"a0", "a1", "a2", "b", "p", "h", "gamma"} - set(raw)
        if missing:
            raise ConfigError(f"instance is missing {sorted(missing)}")
        kw = {}
        try:
            for name in ("a0", "a1", "a2", "b", "eta"):
                if name in raw:
                    kw[name] = parse_complex(raw[name], name)
            for name in ("p", "h"):
                seq = raw[name]
                if not isinstance(seq, list) or not seq:
                    raise ConfigError(f"{name} must be a nonempty list of coefficients")
                kw[name] = [parse_complex(v, f"{name}[{i}]") for i, v in enumerate(seq)]
            kw["gamma"] = raw["gamma"] if _is_spec(raw["gamma"]) else parse_gamma(raw["gamma"])
            for name in ("order", "precision", "zero_tol", "divisor_warn_tol", "x0_rule"):
                if raw.get(name) is not None:
                    kw[name] = raw[name]
            if "order" in kw:
                kw["order"] = _int(kw["order"], "order")
                if kw["order"] < MIN_ORDER:
                    raise ConfigError(f"order must be at least {MIN_ORDER}")
            for name in ("zero_tol", "divisor_warn_tol"):
                if name in kw:
                    kw[name] = float(kw[name])
            if raw.get("free_coeffs"):
                fc = raw["free_coeffs"]
                if not isinstance(fc, dict):
                    raise ConfigError("free_coeffs must map v to [re, im]")
                kw["free_coeffs"] = {
                    _int(k, "free_coeffs key"): parse_complex(v, f"free_coeffs[{k}]")
                    for k, v in fc.items()
                }
            return ProblemInstance(**kw)
        except ConfigError:
            raise
        except (InvalidInstance, InvalidGamma, ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc


def _is_spec(x):
    return isinstance(x, (InsideDisk, IrrationalRotation, RootOfUnity))


def _int(x, what):
    if isinstance(x, bool):
        raise ConfigError(f"{what} must be an integer")
    try:
        v = int(x)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be an integer, got {x!r}") from None
    if v != x and str(v) != str(x).strip():
        raise ConfigError(f"{what} must be an integer, got {x!r}")
    return v


def _component(x, what):
    if isinstance(x, bool) or not isinstance(x, (int, float, str)):
        raise ConfigError(f"{what}: expected a number, got {x!r}")
    if isinstance(x, str):
        try:
            float(x)
        except ValueError:
            raise ConfigError(f"{what}: {x!r} is not a decimal number") from None
    return x


def parse_complex(x, what="value"):
    """``[re, im]`` (or a bare real) to a ``(re, im)`` tuple of numbers/strings.

    The tuple is accepted by both fields, so decimal strings reach extended
    precision unrounded.
    """
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ConfigError(f"{what}: complex numbers are [re, im] pairs")
        return (_component(x[0], what), _component(x[1], what))
    return (_component(x, what), 0)


def parse_gamma(d):
    """Tagged-union mapping to a gamma spec."""
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError("gamma must be a mapping with a 'kind' key")
    kind = str(d["kind"]).lower()
    try:
        if kind == "inside_disk":
            return InsideDisk(parse_complex(d["value"], "gamma.value"))
        if kind == "root_of_unity":
            return RootOfUnity(_int(d["q"], "gamma.q"), _int(d["p"], "gamma.p"))
        if kind == "irrational_rotation":
            if "quotients" in d:
                q = d["quotients"]
                if not isinstance(q, list) or not q:
                    raise ConfigError("gamma.quotients must be a nonempty list")
                return IrrationalRotation(
                    quotients=[_int(a, "gamma.quotients") for a in q],
                    periodic=bool(d.get("periodic", False)),
                )
            theta = d["theta"]
            return IrrationalRotation(theta=str(theta) if isinstance(theta, float) else theta)
    except KeyError as exc:
        raise ConfigError(f"gamma of kind {kind!r} needs {exc.args[0]!r}") from None
    raise ConfigError(f"unknown gamma kind {kind!r}")


_FREE_ITEM = re.compile(r"\s*(\d+)\s*=\s*\[\s*([^,\]]+)\s*,\s*([^\]]+)\]\s*")


def parse_free_coeffs(text):
    """``"1=[0.5,0],2=[0,1]"`` to ``{1: ("0.5", "0"), 2: ("0", "1")}``."""
    out = {}
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _FREE_ITEM.match(text, pos)
        if not m:
            raise ConfigError(f"cannot parse free coefficients at {text[pos:]!r}")
        out[int(m.group(1))] = (_component(m.group(2).strip(), "free coefficient"),
                                _component(m.group(3).strip(), "free coefficient"))
        pos = m.end()
        if pos < len(text):
            if text[pos] != ",":
                raise ConfigError(f"expected ',' in free coefficients at {text[pos:]!r}")
            pos += 1
    return out


def parse_gamma_option(text):
    """Command-line gamma.

    ``q/p`` is a root of unity, ``theta:DEC`` an irrational rotation by a
    decimal, ``cf:1,2,2`` a finite and ``cf:1*`` (trailing ``*``) a periodic
    partial-quotient list; anything else is a point of the disk, either
    ``RE`` or ``RE,IM``.
    """
    t = text.strip()
    try:
        if t.startswith("theta:"):
            return IrrationalRotation(theta=t[6:].strip())
        if t.startswith("cf:"):
            body = t[3:].strip()
            periodic = body.endswith("*")
            q = [int(a) for a in body.rstrip("*").split(",") if a.strip()]
            if not q:
                raise ConfigError("cf: needs at least one partial quotient")
            return IrrationalRotation(quotients=q, periodic=periodic)
        if "/" in t:
            q, p = t.split("/")
            return RootOfUnity(int(q), int(p))
        parts = t.split(",")
        if len(parts) == 1:
            return InsideDisk((_component(parts[0].strip(), "gamma"), 0))
        if len(parts) == 2:
            return InsideDisk(tuple(_component(v.strip(), "gamma") for v in parts))
    except ValueError as exc:
        raise ConfigError(f"cannot parse gamma {text!r}: {exc}") from None
    raise ConfigError(f"cannot parse gamma {text!r}")


def _check_writable(path, what):
    if path is None:
        return None
    path = str(path)
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        raise ConfigError(f"{what} path {path!r} is not writable")
    return path


def run_config_from_dict(data, source=None):
    """Validate the top-level layout; instance fields are checked later."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping")
    unknown = set(data) - {"instance", "outputs", "toggles"}
    if unknown:
        raise ConfigError(f"unknown sections {sorted(unknown)}")
    inst = data.get("instance") or {}
    if not isinstance(inst, dict):
        raise ConfigError("instance must be a mapping")
    bad = set(inst) - INSTANCE_KEYS
    if bad:
        raise ConfigError(f"unknown instance fields {sorted(bad)}")
    outputs = data.get("outputs") or {}
    toggles = {**TOGGLE_DEFAULTS, **(data.get("toggles") or {})}
    bad = set(toggles) - set(TOGGLE_DEFAULTS)
    if bad:
        raise ConfigError(f"unknown toggles {sorted(bad)}")
    bad = set(outputs) - {"report", "csv"}
    if bad:
        raise ConfigError(f"unknown outputs {sorted(bad)}")
    return RunConfig(
        instance=inst,
        report=_check_writable(outputs.get("report"), "report"),
        csv=_check_writable(outputs.get("csv"), "csv"),
        verify=bool(toggles["verify"]),
        majorant=bool(toggles["majorant"]),
        oracle_check_depth=_int(toggles["oracle_check_depth"], "oracle_check_depth"),
        timing=bool(toggles["timing"]),
        source=source,
    )


def load_config(path):
    """Read and validate a YAML configuration file."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path} is not valid YAML: {exc}") from None
    return run_config_from_dict(data, source=str(path))
