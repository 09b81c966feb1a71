"""Unit handling for scenario files and reports.

Canonical internal units: watts, hertz, seconds, meters, bits, and FLOPs as
floating counts.  One exception: the carrier frequency is kept in GHz because
the path-loss formula consumes GHz directly.

Dimensioned fields in scenario files accept either a bare number in the
field's documented default unit or a string ``"<value> <unit>"``, e.g.
``tx_power: 23`` (default dBm), ``tx_power: "0.1995 W"`` or
``activation_bits: "0.25 MB"``.  Data-size units are binary and
case-sensitive (``B`` byte, ``bit``; ``KB`` = 2**10 B, ``MB`` = 2**20 B).
"""

from __future__ import annotations

import math
from typing import Callable

from .errors import ScenarioFormatError


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    if watts <= 0.0:
        raise ValueError(f"power must be positive to express in dBm, got {watts}")
    return 10.0 * math.log10(watts) + 30.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(value: float) -> float:
    if value <= 0.0:
        raise ValueError(f"value must be positive to express in dB, got {value}")
    return 10.0 * math.log10(value)


_BIT = 1.0
_BYTE = 8.0 * _BIT
_KB = 1024.0 * _BYTE
_MB = 1024.0 * _KB
_GB = 1024.0 * _MB

Converter = Callable[[float], float]


def _scale(factor: float) -> Converter:
    return lambda v: v * factor


# unit name -> converter to the canonical unit of the kind.  Keys are
# lower-case except for the case-sensitive "data" table.
_UNIT_TABLES: dict[str, dict[str, Converter]] = {
    "power": {
        "w": _scale(1.0),
        "mw": _scale(1e-3),
        "kw": _scale(1e3),
        "dbm": dbm_to_watts,
    },
    "frequency": {
        "hz": _scale(1.0),
        "khz": _scale(1e3),
        "mhz": _scale(1e6),
        "ghz": _scale(1e9),
    },
    "time": {
        "s": _scale(1.0),
        "ms": _scale(1e-3),
        "us": _scale(1e-6),
    },
    "data": {
        "bit": _scale(_BIT),
        "bits": _scale(_BIT),
        "B": _scale(_BYTE),
        "KB": _scale(_KB),
        "MB": _scale(_MB),
        "GB": _scale(_GB),
    },
    "flops": {
        "flop": _scale(1.0),
        "kflop": _scale(1e3),
        "mflop": _scale(1e6),
        "gflop": _scale(1e9),
        "tflop": _scale(1e12),
    },
    "clock": {
        "cycle/s": _scale(1.0),
        "cycles/s": _scale(1.0),
        "kcycle/s": _scale(1e3),
        "mcycle/s": _scale(1e6),
        "gcycle/s": _scale(1e9),
    },
    "distance": {
        "m": _scale(1.0),
        "km": _scale(1e3),
    },
    "psd": {
        "w/hz": _scale(1.0),
        "dbm/hz": dbm_to_watts,
    },
    "gain": {
        "linear": _scale(1.0),
        "db": db_to_linear,
    },
    "count": {},  # dimensionless; bare numbers only
}

# Default input unit per kind when a bare number is given.
DEFAULT_UNITS: dict[str, str] = {
    "power": "dbm",
    "frequency": "hz",
    "time": "s",
    "data": "bit",
    "flops": "flop",
    "clock": "cycle/s",
    "distance": "m",
    "psd": "dbm/hz",
    "gain": "linear",
    "count": "",
}


def _lookup(kind: str, unit: str) -> Converter:
    table = _UNIT_TABLES[kind]
    if kind == "data":
        # bits vs bytes differ only by case
        if unit in table:
            return table[unit]
    else:
        key = unit.lower()
        if key.endswith("s") and key not in table and key[:-1] in table:
            key = key[:-1]  # "MFLOPs" -> "mflop"
        if key in table:
            return table[key]
    raise KeyError(unit)


def parse_quantity(raw, kind: str, field: str, default_unit: str | None = None) -> float:
    """Parse a scalar quantity into canonical units.

    ``raw`` is a number (interpreted in ``default_unit``) or a string
    ``"<value> <unit>"``.  ``kind`` selects the unit table.
    """
    if default_unit is None:
        default_unit = DEFAULT_UNITS[kind]
    if isinstance(raw, bool):
        raise ScenarioFormatError("expected a number, got a boolean", field)
    if isinstance(raw, (int, float)):
        value = float(raw)
        if not default_unit:
            return value
        return _lookup(kind, default_unit)(value)
    if isinstance(raw, str):
        text = raw.strip()
        parts = text.split(None, 1)
        if len(parts) == 1:
            try:
                value = float(parts[0])
            except ValueError:
                raise ScenarioFormatError(f"cannot parse number {raw!r}", field) from None
            if not default_unit:
                return value
            return _lookup(kind, default_unit)(value)
        num, unit = parts
        try:
            value = float(num)
        except ValueError:
            raise ScenarioFormatError(f"cannot parse number {raw!r}", field) from None
        try:
            return _lookup(kind, unit.strip())(value)
        except KeyError:
            raise ScenarioFormatError(f"unknown {kind} unit {unit.strip()!r}", field) from None
    raise ScenarioFormatError(f"expected number or '<value> <unit>' string, got {type(raw).__name__}", field)
