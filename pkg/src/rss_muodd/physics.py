"""Braking capability from road and environment conditions.

Friction caps the tire force at ``mu * F_normal`` with ``F_normal = m g cos(slope)``;
vehicle mass cancels, so everything here is an acceleration. Grade adds
``g sin(slope)`` (uphill helps, downhill hurts). Cornering consumes part of
the friction budget through the friction circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import CurveInfeasibleError, InvalidParameterError, NoSafeDistanceError
from .units import G

STRAIGHT = math.inf


@dataclass(frozen=True)
class RoadEnvironment:
    mu: float
    slope: float = 0.0  # rad, positive uphill in the direction of travel
    curve_radius: float = STRAIGHT
    speed_for_curve: float = 0.0

    def __post_init__(self):
        if not self.mu >= 0:
            raise InvalidParameterError(f"mu must be >= 0, got {self.mu}")
        if not abs(self.slope) < math.pi / 2:
            raise InvalidParameterError(f"|slope| must be < pi/2 rad, got {self.slope}")
        if not self.curve_radius > 0:
            raise InvalidParameterError(f"curve radius must be > 0 or straight, got {self.curve_radius}")
        if not self.speed_for_curve >= 0:
            raise InvalidParameterError(f"speed_for_curve must be >= 0, got {self.speed_for_curve}")

    @property
    def lateral_demand(self) -> float:
        if math.isinf(self.curve_radius):
            return 0.0
        return self.speed_for_curve**2 / self.curve_radius


class BrakingCapability(NamedTuple):
    decel: float
    can_hold: bool


def friction_limit(mu: float, slope: float = 0.0) -> float:
    return mu * G * math.cos(slope)


def effective_braking_decel(env: RoadEnvironment) -> BrakingCapability:
    """Net longitudinal deceleration the tires can deliver.

    ``can_hold`` is False on a downgrade where the remaining longitudinal
    friction cannot even cancel gravity; ``decel`` is then 0.
    """
    limit = friction_limit(env.mu, env.slope)
    a_lat = env.lateral_demand
    if a_lat > limit:
        raise CurveInfeasibleError(
            f"lateral demand {a_lat:.4g} m/s^2 exceeds friction limit {limit:.4g} m/s^2"
        )
    a_long = math.sqrt(max(0.0, limit**2 - a_lat**2))
    net = a_long + G * math.sin(env.slope)
    if env.slope < 0 and net <= 0:
        return BrakingCapability(0.0, False)
    return BrakingCapability(max(0.0, net), True)


def environment_to_scenario(
    env_rear: RoadEnvironment, env_front: RoadEnvironment, front_brake_cap: float = math.inf
) -> tuple[float, float]:
    """Map per-vehicle environments to ``(a_min_brake, a_max_brake)``.

    The two contact-patch environments are independent: the lead vehicle may
    be on a cleared track while the rear one sits on ice. ``front_brake_cap``
    (``math.inf`` for tire-limited) bounds the lead vehicle's braking.
    """
    rear = effective_braking_decel(env_rear)
    if not rear.can_hold:
        raise NoSafeDistanceError("rear vehicle cannot hold the grade; no safe following distance exists")
    front = effective_braking_decel(env_front)
    if not front.can_hold:
        raise NoSafeDistanceError("lead vehicle cannot hold the grade and may slide; outside the RSS assumptions")
    if rear.decel <= 0 or front.decel <= 0:
        raise NoSafeDistanceError("zero braking capability")
    return rear.decel, min(front_brake_cap, front.decel)
