"""Closed-form minimum safe following distance.

The rest-position bound (the original RSS following distance) is extended
with a mid-braking term: when the rear vehicle is still faster than the lead
vehicle at the end of its response time *and* brakes harder, the two paths
can overlap before either vehicle is at rest. The required gap is then the
closure consumed during the response time plus the further encroachment up
to the instant both speeds are equal.

All accelerations are positive magnitudes in m/s²; the formulas own the signs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import InvalidParameterError, NotApplicableError
from .units import G


@dataclass(frozen=True)
class ScenarioParams:
    """The six longitudinal inputs, SI units.

    ``a_max_brake`` may be ``math.inf`` to model a lead vehicle that stops
    instantly.
    """

    v_r: float
    v_f: float
    rho: float
    a_max_accel: float
    a_min_brake: float
    a_max_brake: float

    def __post_init__(self):
        for name in ("v_r", "v_f", "rho", "a_max_accel", "a_min_brake"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value}")
        if math.isnan(self.a_max_brake):
            raise InvalidParameterError("a_max_brake is NaN")
        for name in ("v_r", "v_f", "rho", "a_max_accel"):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.a_min_brake <= 0:
            raise InvalidParameterError(f"a_min_brake must be > 0, got {self.a_min_brake}")
        if self.a_max_brake <= 0:
            raise InvalidParameterError(
                f"a_max_brake must be > 0, got {self.a_max_brake} (model a stopped lead vehicle with v_f=0)"
            )

    @classmethod
    def from_g(cls, v_r, v_f, rho, a_max_accel_g, a_min_brake_g, a_max_brake_g):
        """Build from accelerations given in multiples of g."""
        return cls(v_r, v_f, rho, a_max_accel_g * G, a_min_brake_g * G, a_max_brake_g * G)

    @property
    def front_unbounded(self) -> bool:
        return math.isinf(self.a_max_brake)

    def replace(self, **changes) -> "ScenarioParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class DminResult:
    d_min: float
    d_prime: float
    special_case_applied: bool
    d_double_prime: Optional[float] = None
    d_triple_prime: Optional[float] = None
    t_equal: Optional[float] = None

    @property
    def special_case_prevails(self) -> bool:
        """True when the mid-braking term, not the rest-position term, is binding."""
        return self.special_case_applied and self.d_double_prime + self.d_triple_prime > self.d_prime

    def as_dict(self) -> dict:
        return {
            "d_min": self.d_min,
            "d_prime": self.d_prime,
            "d_double_prime": self.d_double_prime,
            "d_triple_prime": self.d_triple_prime,
            "t_equal": self.t_equal,
            "special_case": self.special_case_applied,
            "special_case_prevails": self.special_case_prevails,
        }


def _rear_speed_after_response(p: ScenarioParams) -> float:
    return p.v_r + p.a_max_accel * p.rho


def _front_speed_after_response(p: ScenarioParams) -> float:
    # unclamped; negative when the front vehicle stops inside the response time
    if p.front_unbounded:
        return -math.inf
    return p.v_f - p.a_max_brake * p.rho


def d_prime_unclamped(p: ScenarioParams) -> float:
    """Rear travel to rest minus front travel to rest (may be negative)."""
    v_end = _rear_speed_after_response(p)
    rear = p.v_r * p.rho + 0.5 * p.a_max_accel * p.rho**2 + v_end**2 / (2.0 * p.a_min_brake)
    front = 0.0 if p.front_unbounded else p.v_f**2 / (2.0 * p.a_max_brake)
    return rear - front


def d_prime_min(p: ScenarioParams) -> float:
    """Original RSS rest-position distance, clamped at zero."""
    return max(0.0, d_prime_unclamped(p))


def d_double_prime_min(p: ScenarioParams) -> float:
    """Closure consumed during the response time. Not clamped; may be negative."""
    if p.front_unbounded:
        raise NotApplicableError("closure during response time is undefined against an instant-stop lead vehicle")
    return (p.v_r - p.v_f) * p.rho + (p.a_max_accel + p.a_max_brake) * p.rho**2 / 2.0


def stopping_times(p: ScenarioParams) -> tuple[float, float]:
    """(front, rear) stopping times measured from the end of the response time."""
    if p.front_unbounded:
        t_stop_f = 0.0
    else:
        t_stop_f = max(0.0, _front_speed_after_response(p) / p.a_max_brake)
    t_stop_r = _rear_speed_after_response(p) / p.a_min_brake
    return t_stop_f, t_stop_r


def d_triple_prime_at(p: ScenarioParams, t: float, t_front: Optional[float] = None) -> float:
    """Encroachment of the rear vehicle on the front one, ``t`` seconds after the response time.

    ``t_front`` evaluates the front vehicle at a different time (defaults to ``t``).
    Each vehicle is held at its rest position once stopped.
    """
    if p.front_unbounded:
        raise NotApplicableError("encroachment term is undefined against an instant-stop lead vehicle")
    t_front = t if t_front is None else t_front
    if t < 0 or t_front < 0:
        raise InvalidParameterError(f"time after response must be >= 0, got {t}, {t_front}")
    t_stop_f, t_stop_r = stopping_times(p)
    t_r = min(t, t_stop_r)
    t_f = min(t_front, t_stop_f)
    rear = _rear_speed_after_response(p) * t_r - p.a_min_brake * t_r**2 / 2.0
    front = _front_speed_after_response(p) * t_f - p.a_max_brake * t_f**2 / 2.0
    return rear - front


def is_special_case(p: ScenarioParams) -> bool:
    return (
        not p.front_unbounded
        and _rear_speed_after_response(p) > _front_speed_after_response(p)
        and p.a_min_brake > p.a_max_brake
    )


def equal_speed_time(p: ScenarioParams) -> float:
    """Time after the response time at which both speeds coincide.

    If the lead vehicle comes to rest before the speeds meet, they next
    coincide when the rear vehicle stops, so the rear stopping time is
    returned. Also defined on the boundary where both speeds are already
    equal when the response time ends (returns 0).
    """
    closing = _rear_speed_after_response(p) - _front_speed_after_response(p)
    if p.front_unbounded or closing < 0 or not p.a_min_brake > p.a_max_brake:
        raise NotApplicableError("equal-speed time only exists in the special case")
    t = closing / (p.a_min_brake - p.a_max_brake)
    t_stop_f, t_stop_r = stopping_times(p)
    return t if t <= t_stop_f else t_stop_r


def mid_braking_term_applies(p: ScenarioParams) -> bool:
    """Special case with the lead vehicle still moving when the response time ends.

    If the lead vehicle is already at rest by then, the worst encroachment is
    at the rest positions and only the original bound is needed.
    """
    return is_special_case(p) and _front_speed_after_response(p) > 0


def d_min(p: ScenarioParams) -> DminResult:
    d1 = d_prime_min(p)
    if not mid_braking_term_applies(p):
        return DminResult(d_min=d1, d_prime=d1, special_case_applied=False)
    t_eq = equal_speed_time(p)
    d2 = d_double_prime_min(p)
    d3 = d_triple_prime_at(p, t_eq)
    return DminResult(
        d_min=max(d1, d2 + d3),
        d_prime=d1,
        special_case_applied=True,
        d_double_prime=d2,
        d_triple_prime=d3,
        t_equal=t_eq,
    )


def rest_position_identity(p: ScenarioParams) -> tuple[float, float]:
    """Return (mid-braking sum at both rest times, unclamped rest-position distance).

    Substituting each vehicle's stopping time into the closure-plus-encroachment
    expression must reproduce the original bound algebraically.
    """
    t_stop_f, t_stop_r = stopping_times(p)
    lhs = d_double_prime_min(p) + d_triple_prime_at(p, t_stop_r, t_front=t_stop_f)
    return lhs, d_prime_unclamped(p)


def d_min_array(v_r, v_f, rho, a_max_accel, a_min_brake, a_max_brake):
    """Vectorised :func:`d_min` over broadcastable arrays.

    Also accepts the limits ``a_max_brake = 0`` (lead vehicle never brakes),
    ``a_max_brake = inf`` and ``a_min_brake = inf``, which the worst-case
    search needs at open interval ends. Returns ``(d_min, special_prevails)``.
    """
    v_r, v_f, rho, a_acc, a_min, a_max = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (v_r, v_f, rho, a_max_accel, a_min_brake, a_max_brake))
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        v_re = v_r + a_acc * rho
        rear = v_r * rho + 0.5 * a_acc * rho**2 + np.where(v_re > 0, v_re**2 / (2.0 * a_min), 0.0)
        front = np.where(v_f > 0, v_f**2 / (2.0 * a_max), 0.0)
        d1 = np.maximum(0.0, rear - front)

        finite = np.isfinite(a_max)
        v_fe = np.where(finite, v_f - a_max * rho, -np.inf)
        mid = finite & (v_re > v_fe) & (a_min > a_max) & (v_fe > 0)

        d2 = (v_r - v_f) * rho + (a_acc + a_max) * rho**2 / 2.0
        t_stop_f = np.where(a_max > 0, np.maximum(v_fe, 0.0) / a_max, np.inf)
        t_stop_r = np.where(v_re > 0, v_re / a_min, 0.0)
        t = np.maximum((v_re - v_fe) / (a_min - a_max), 0.0)
        t = np.where(mid, np.where(t <= t_stop_f, t, t_stop_r), 0.0)
        t_r = np.minimum(t, t_stop_r)
        t_f = np.minimum(t, t_stop_f)
        d3 = np.where(
            t > 0, v_re * t_r - a_min * t_r**2 / 2.0 - (v_fe * t_f - a_max * t_f**2 / 2.0), 0.0
        )
        mid_total = np.where(mid, d2 + d3, -np.inf)
    return np.maximum(d1, mid_total), mid & (mid_total > d1)
