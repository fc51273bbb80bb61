"""Unit-suffixed quantity parsing.

Every dimensional value read from a file carries an explicit unit suffix,
e.g. ``"25 m/s"``, ``"0.3 g"``, ``"10 deg"``. Bare numbers are rejected for
dimensional quantities.
"""

from __future__ import annotations

import math
import re

from .errors import UnitError

#: Standard gravity used for every g-unit conversion. 9.81 (not 9.80665)
#: reproduces the published partition table to one decimal.
G = 9.81

UNBOUNDED = math.inf

_SCALES: dict[str, dict[str, float]] = {
    "speed": {"m/s": 1.0, "km/h": 1 / 3.6, "kph": 1 / 3.6, "mph": 0.44704},
    "time": {"s": 1.0, "ms": 1e-3},
    "accel": {"m/s^2": 1.0, "m/s2": 1.0, "m/s²": 1.0, "g": G},
    "distance": {"m": 1.0, "km": 1000.0, "mm": 1e-3, "cm": 1e-2},
    "angle": {"rad": 1.0, "deg": math.pi / 180.0},
    "temperature": {"degC": 1.0, "C": 1.0, "°C": 1.0},
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S+)\s*$")


def parse_quantity(value, kind: str, *, allow_unbounded: bool = False) -> float:
    """Convert a unit-suffixed string to SI.

    ``kind`` is one of ``speed``, ``time``, ``accel``, ``distance``, ``angle``,
    ``temperature`` or ``dimensionless``. The keyword ``unbounded`` maps to
    ``math.inf`` when ``allow_unbounded`` is set.
    """
    if kind == "dimensionless":
        if isinstance(value, bool):
            raise UnitError(f"expected a number, got {value!r}")
        try:
            return float(value)
        except (TypeError, ValueError):
            raise UnitError(f"expected a dimensionless number, got {value!r}") from None
    if kind not in _SCALES:
        raise ValueError(f"unknown quantity kind {kind!r}")
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        units = ", ".join(_SCALES[kind])
        raise UnitError(f"bare number {value!r} for {kind}; add a unit ({units})")
    if not isinstance(value, str):
        raise UnitError(f"expected a {kind} string such as '1 {next(iter(_SCALES[kind]))}', got {value!r}")
    text = value.strip()
    if text.lower() in ("unbounded", "inf", "infinity"):
        if allow_unbounded:
            return UNBOUNDED
        raise UnitError(f"{kind} value may not be unbounded here")
    match = _QUANTITY.match(text)
    if match is None:
        raise UnitError(f"cannot parse {value!r} as a {kind} with a unit suffix")
    number, unit = match.groups()
    scale = _SCALES[kind].get(unit)
    if scale is None:
        units = ", ".join(_SCALES[kind])
        raise UnitError(f"unit {unit!r} is not a {kind} unit (expected one of {units})")
    return float(number) * scale


def parse_quantity_any(value) -> tuple[float, str]:
    """Parse a unit-suffixed string of any known kind; returns ``(si_value, kind)``."""
    if isinstance(value, str):
        match = _QUANTITY.match(value)
        if match is not None:
            for kind, scales in _SCALES.items():
                if match.group(2) in scales:
                    return float(match.group(1)) * scales[match.group(2)], kind
    raise UnitError(f"{value!r} is not a unit-suffixed quantity")


def g_units(x: float) -> float:
    """m/s² -> multiples of g."""
    return x / G
