"""Brute-force two-vehicle braking simulation.

Used as ground truth for the closed-form distances. The lead vehicle panic
brakes from t=0; the rear vehicle keeps accelerating for the response time,
then brakes at its guaranteed minimum deceleration. Each vehicle moves under
piecewise-constant acceleration, so its state at any sample time is exact:
the response-time boundary and the stop instants are event times at which
the motion law switches, never quantized to the step grid. Only the sampling
of the gap between events depends on ``dt``.

Nothing here imports :mod:`rss_muodd.kinematics`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidParameterError, NoSafeGapError


@dataclass(frozen=True)
class _Phase:
    start: float
    x0: float
    v0: float
    accel: float  # signed
    end: float


class Motion:
    """Piecewise-constant-acceleration longitudinal motion that never reverses."""

    def __init__(self, v0: float, schedule: list[tuple[float, float]]):
        # schedule: (duration, signed accel); the last duration may be math.inf
        phases = []
        t, x, v = 0.0, 0.0, v0
        for duration, accel in schedule:
            if accel < 0 and v <= 0:
                break
            stops = accel < 0 and v / -accel <= duration
            if stops:
                duration = v / -accel
            end = t + duration
            phases.append(_Phase(t, x, v, accel, end))
            if math.isinf(end):
                break
            x += v * duration + 0.5 * accel * duration**2
            v = 0.0 if stops else max(0.0, v + accel * duration)
            t = end
        self.phases = phases
        self.stop_time = t
        self.rest_position = x
        self._final_v = v

    def at(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        t = np.asarray(t, dtype=float)
        x = np.full(t.shape, self.rest_position)
        v = np.full(t.shape, self._final_v)
        for ph in self.phases:
            inside = (t >= ph.start) & (t < ph.end)
            tau = t[inside] - ph.start
            x[inside] = ph.x0 + ph.v0 * tau + 0.5 * ph.accel * tau**2
            v[inside] = np.maximum(0.0, ph.v0 + ph.accel * tau)
        return x, v


def front_motion(v_f: float, a_max_brake: float) -> Motion:
    if math.isinf(a_max_brake):
        return Motion(0.0, [])
    return Motion(v_f, [(math.inf, -a_max_brake)])


def rear_motion(v_r: float, rho: float, a_max_accel: float, a_min_brake: float) -> Motion:
    return Motion(v_r, [(rho, a_max_accel), (math.inf, -a_min_brake)])


#: Penetration below which contact counts as touching, not collision. Exact
#: tangency (gap 0 at rest) otherwise flips on the last bit of rounding.
CONTACT_TOL = 1e-9


@dataclass
class SimTrace:
    dt: float
    t: np.ndarray
    x_f: np.ndarray
    v_f: np.ndarray
    x_r: np.ndarray
    v_r: np.ndarray
    gap: np.ndarray

    COLUMNS = ("t", "x_f", "v_f", "x_r", "v_r", "gap")

    @property
    def samples(self):
        return list(zip(*(getattr(self, c).tolist() for c in self.COLUMNS)))

    @property
    def min_gap(self) -> float:
        return float(self.gap.min())

    @property
    def min_gap_time(self) -> float:
        return float(self.t[int(np.argmin(self.gap))])

    @property
    def collided(self) -> bool:
        return bool((self.gap < -CONTACT_TOL).any())

    def summary(self) -> dict:
        return {"min_gap": self.min_gap, "min_gap_time": self.min_gap_time, "collided": self.collided}


@lru_cache(maxsize=4)
def _kinematic_columns(v_r, v_f, rho, a_max_accel, a_min_brake, a_max_brake, dt):
    front = front_motion(v_f, a_max_brake)
    rear = rear_motion(v_r, rho, a_max_accel, a_min_brake)
    t_end = max(front.stop_time, rear.stop_time)
    n = int(math.floor(t_end / dt))
    t = np.arange(n + 1, dtype=float) * dt
    if t[-1] < t_end:
        t = np.append(t, t_end)
    x_f, vf = front.at(t)
    x_r, vr = rear.at(t)
    for arr in (t, x_f, vf, x_r, vr):
        arr.setflags(write=False)
    return t, x_f, vf, x_r, vr


def simulate(p, initial_gap: float, dt: float) -> SimTrace:
    """Simulate until both vehicles are at rest, sampling every ``dt`` seconds.

    ``p`` is any object with the six scenario attributes. Positions are the
    distances each vehicle has travelled since t=0; the gap is
    ``initial_gap + x_f - x_r``.
    """
    if not dt > 0:
        raise InvalidParameterError(f"dt must be > 0, got {dt}")
    if initial_gap < 0:
        raise InvalidParameterError(f"initial gap must be >= 0, got {initial_gap}")
    t, x_f, v_f, x_r, v_r = _kinematic_columns(
        p.v_r, p.v_f, p.rho, p.a_max_accel, p.a_min_brake, p.a_max_brake, dt
    )
    return SimTrace(dt, t, x_f, v_f, x_r, v_r, initial_gap + x_f - x_r)


def bisection_dt(p, tol: float) -> float:
    """Sample step for :func:`min_safe_gap`.

    Between samples the gap is a piecewise parabola whose curvature is at most
    the sum of the acceleration magnitudes, so a peak falling between two
    samples is missed by at most ``a_sum * dt**2 / 8``; the step keeps that
    below ``tol / 10``.
    """
    a_sum = p.a_max_accel + p.a_min_brake + (0.0 if math.isinf(p.a_max_brake) else p.a_max_brake)
    return min(1e-2, math.sqrt(0.8 * tol / max(a_sum, 1e-9)))


def min_safe_gap(p, tol: float, dt: float | None = None) -> float:
    """Smallest initial gap (within ``tol``, rounded up) that never collides.

    Bisection on the collision outcome of :func:`simulate`. The bracket's upper
    end is the rear vehicle's total travel, which no encroachment can exceed.
    """
    if not tol > 0:
        raise InvalidParameterError(f"tol must be > 0, got {tol}")
    dt = bisection_dt(p, tol) if dt is None else dt
    rear = rear_motion(p.v_r, p.rho, p.a_max_accel, p.a_min_brake)
    lo, hi = 0.0, rear.rest_position + tol
    if simulate(p, hi, dt).collided:
        raise NoSafeGapError(f"collision even with gap {hi}")
    if not simulate(p, lo, dt).collided:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if simulate(p, mid, dt).collided:
            lo = mid
        else:
            hi = mid
    return hi


def equal_speed_crossing(trace: SimTrace, rho: float) -> float | None:
    """First sample time after ``rho`` at which the rear speed is <= the front speed."""
    idx = np.nonzero((trace.t >= rho) & (trace.v_r <= trace.v_f))[0]
    return float(trace.t[idx[0]]) if idx.size else None
