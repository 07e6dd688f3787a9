"""Deterministic JSON reports and coefficient CSV files."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import mpmath
import numpy as np

from .errors import ConfigError
from .series import DOUBLE, TruncatedPowerSeries, get_field

__all__ = [
    "RunReport",
    "dumps",
    "read_csv",
    "to_jsonable",
    "write_csv",
    "write_report",
]

CSV_COLUMNS = ("index", "re", "im", "abs")


@dataclass
class RunReport:
    """Everything one CLI invocation produces.

    ``coefficients`` maps series names (``g``, ``y``, ``x``) to lists of
    ``[re, im]`` pairs.  Extended-precision values are decimal strings so no
    digits are lost; non-finite reals are the strings ``"inf"``/``"nan"``.
    ``timing`` is only filled when requested, so that identical inputs give
    byte-identical reports.
    """

    command: str
    precision: dict
    exit_code: int = 0
    regime: Optional[str] = None
    gamma: Optional[object] = None
    coefficients: dict = field(default_factory=dict)
    x0: Optional[object] = None
    residuals: dict = field(default_factory=dict)
    residual_orders: dict = field(default_factory=dict)
    resonance_log: list = field(default_factory=list)
    radius: Optional[dict] = None
    diagnostics: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    error: Optional[dict] = None
    timing: Optional[dict] = None

    def to_dict(self):
        return to_jsonable(dataclasses.asdict(self))


def precision_metadata(fld):
    fld = get_field(fld)
    return {"mode": fld.name, "digits": fld.digits}


def _real(x):
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def to_jsonable(obj):
    """Recursively convert numbers, arrays and dataclasses to JSON types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, TruncatedPowerSeries):
        return series_pairs(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _real(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_real(obj.real), _real(obj.imag)]
    # every mpmath context has its own number classes, so test by duck type
    if hasattr(obj, "_mpc_"):
        return [str(obj.real), str(obj.imag)]
    if hasattr(obj, "_mpf_"):
        return str(obj)
    if hasattr(obj, "value") and hasattr(obj, "name"):  # enums
        return obj.value
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def scalar_pair(x, fld=None):
    """``[re, im]`` in the representation of ``fld`` (inferred when omitted)."""
    extended = hasattr(x, "_mpc_") or hasattr(x, "_mpf_")
    if fld is None:
        fld = get_field(f"extended:{max(16, x.context.dps)}") if extended else DOUBLE
    if fld is not DOUBLE:
        return fld.pair(fld.scalar(x))
    z = complex(x)
    return [_real(z.real), _real(z.imag)]


def series_pairs(s):
    return [scalar_pair(c, s.field) for c in s.coeffs]


def dumps(report):
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    data = report.to_dict() if isinstance(report, RunReport) else to_jsonable(report)
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(report, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(report))


def _text(x, fld):
    # enough digits that re-reading at the same precision is lossless
    if fld is DOUBLE:
        return repr(float(x))
    return mpmath.nstr(x, fld.digits + 5, strip_zeros=False)


def write_csv(path, series):
    """One row per coefficient: ``index, re, im, abs``."""
    fld = series.field
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for n, c in enumerate(series.coeffs):
            if fld is DOUBLE:
                c = complex(c)
            w.writerow([n, _text(c.real, fld), _text(c.imag, fld), _text(abs(c), fld)])


def read_csv(path, precision="double"):
    """Read a coefficient file written by :func:`write_csv`.

    Indices must be ``0, 1, ..., N`` in order; the ``abs`` column is ignored.
    """
    fld = get_field(precision)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    if not rows or set(CSV_COLUMNS) - set(rows[0]):
        raise ConfigError(f"{path} must have columns {', '.join(CSV_COLUMNS)}")
    coeffs = []
    for i, row in enumerate(rows):
        try:
            if int(row["index"]) != i:
                raise ConfigError(f"{path}: row {i} has index {row['index']}")
            coeffs.append(fld.scalar((row["re"], row["im"])))
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: bad row {i}: {exc}") from None
    return TruncatedPowerSeries(coeffs, fld)
