"""Seeded property suite: closed form vs. oracle, algebraic identities, table cells."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import kinematics as kin
from . import oracle
from .kinematics import ScenarioParams
from .odd.partition import PartitionTable, figure4_table
from .units import G

SPEED_MAX = 40.0
RHO_MAX = 2.0
ACCEL_MAX = 1.2 * G
BRAKE_MIN = 0.02 * G
BOUNDARY_WIDTH = 1e-3 * G

ORACLE_TOL = 1e-4
AGREEMENT_TOL = 1e-3
SAFE_MARGIN = 1e-3
UNSAFE_MARGIN = 1e-2
IDENTITY_RTOL = 1e-9
CONTINUITY_TOL = 1e-3
CELL_SOUND_TOL = 1e-6
CELL_TIGHT_TOL = 1e-3

DEFAULT_SHARDS = 8


@dataclass
class PropertyResult:
    name: str
    total: int = 0
    passed: int = 0
    worst: float = 0.0
    examples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.total > 0 and self.passed == self.total

    def record(self, ok: bool, deviation: float = 0.0, example=None):
        self.total += 1
        self.passed += bool(ok)
        if math.isfinite(deviation):
            self.worst = max(self.worst, deviation)
        if not ok and len(self.examples) < 5:
            self.examples.append(example)

    def merge(self, other: "PropertyResult"):
        self.total += other.total
        self.passed += other.passed
        self.worst = max(self.worst, other.worst)
        self.examples.extend(other.examples[: max(0, 5 - len(self.examples))])

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "total": self.total,
            "worst_deviation": self.worst,
            "ok": self.ok,
            "examples": [repr(e) for e in self.examples],
        }


def _base_draw(rng: np.random.Generator) -> ScenarioParams:
    return ScenarioParams(
        v_r=rng.uniform(0, SPEED_MAX),
        v_f=rng.uniform(0, SPEED_MAX),
        rho=rng.uniform(0, RHO_MAX),
        a_max_accel=rng.uniform(0, ACCEL_MAX),
        a_min_brake=rng.uniform(BRAKE_MIN, ACCEL_MAX),
        a_max_brake=rng.uniform(BRAKE_MIN, ACCEL_MAX),
    )


def draw_scenario(rng: np.random.Generator) -> ScenarioParams:
    """One random scenario; about a third land within 1e-3 g (or 1e-3 m/s) of the special-case boundary."""
    p = _base_draw(rng)
    kind = rng.integers(0, 12)
    if kind in (0, 1):
        # braking capabilities straddle equality
        a_min = min(ACCEL_MAX, max(BRAKE_MIN, p.a_max_brake + rng.uniform(-BOUNDARY_WIDTH, BOUNDARY_WIDTH)))
        p = p.replace(a_min_brake=a_min)
    elif kind in (2, 3):
        # rear barely faster (or slower) than front at the end of the response time
        delta = rng.uniform(-1e-3, 1e-3)
        v_r = p.v_f - (p.a_max_accel + p.a_max_brake) * p.rho + delta
        if v_r >= 0:
            p = p.replace(v_r=v_r)
    elif kind == 4:
        a_min = p.a_max_brake + rng.uniform(0, BOUNDARY_WIDTH)
        v_r = p.v_f - (p.a_max_accel + p.a_max_brake) * p.rho + rng.uniform(0, 1e-3)
        p = p.replace(a_min_brake=a_min, v_r=max(0.0, v_r))
    elif kind == 5:
        # degenerate corners
        choice = rng.integers(0, 4)
        if choice == 0:
            p = p.replace(rho=0.0)
        elif choice == 1:
            p = p.replace(v_r=0.0, a_max_accel=0.0)
        elif choice == 2:
            p = p.replace(v_f=0.0)
        else:
            p = p.replace(a_max_brake=math.inf)
    return p


def draw_special_case(rng: np.random.Generator) -> ScenarioParams:
    """Special-case scenario with the lead vehicle still moving after the response time."""
    while True:
        p = _base_draw(rng)
        lo, hi = sorted((p.a_min_brake, p.a_max_brake))
        if lo == hi:
            continue
        p = p.replace(a_min_brake=hi, a_max_brake=lo)
        if kin.mid_braking_term_applies(p):
            return p


def d_min_value(p: ScenarioParams) -> float:
    return kin.d_min(p).d_min


def _corrupted(factor: float) -> Callable[[ScenarioParams], float]:
    def fn(p):
        return d_min_value(p) * factor

    return fn


def _check_oracle_shard(args) -> tuple[PropertyResult, PropertyResult, PropertyResult]:
    seed_seq, n, corrupt = args
    rng = np.random.default_rng(seed_seq)
    dmin_fn = _corrupted(1.0 + corrupt) if corrupt else d_min_value
    agree = PropertyResult("oracle_agreement")
    safe = PropertyResult("safe_at_dmin_plus_1mm")
    unsafe = PropertyResult("collision_at_dmin_minus_1cm")
    for _ in range(n):
        p = draw_scenario(rng)
        d = dmin_fn(p)
        g_star = oracle.min_safe_gap(p, ORACLE_TOL)
        dev = abs(d - g_star)
        agree.record(dev <= AGREEMENT_TOL, dev, (p, d, g_star))
        dt = oracle.bisection_dt(p, ORACLE_TOL)
        trace = oracle.simulate(p, d + SAFE_MARGIN, dt)
        safe.record(not trace.collided, max(0.0, -trace.min_gap), (p, d))
        if d > UNSAFE_MARGIN:
            trace = oracle.simulate(p, d - UNSAFE_MARGIN, dt)
            unsafe.record(trace.collided, max(0.0, trace.min_gap), (p, d))
    return agree, safe, unsafe


def check_oracle(seed: int, draws: int, shards: int = DEFAULT_SHARDS, workers: int = 1, corrupt: float = 0.0):
    """Closed form vs. bisection oracle, plus the +1 mm / -1 cm bracketing, over ``draws`` scenarios.

    Draws are split over a fixed number of shards, each seeded from the master
    seed, so results do not depend on ``workers``.
    """
    children = np.random.SeedSequence(seed).spawn(shards)
    sizes = [draws // shards + (i < draws % shards) for i in range(shards)]
    jobs = [(c, n, corrupt) for c, n in zip(children, sizes)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_check_oracle_shard, jobs))
    else:
        parts = [_check_oracle_shard(j) for j in jobs]
    merged = [PropertyResult(parts[0][i].name) for i in range(3)]
    for part in parts:
        for acc, piece in zip(merged, part):
            acc.merge(piece)
    return merged


def check_rest_identity(rng: np.random.Generator, n: int) -> PropertyResult:
    res = PropertyResult("rest_position_identity")
    for _ in range(n):
        p = draw_special_case(rng)
        lhs, rhs = kin.rest_position_identity(p)
        rel = abs(lhs - rhs) / abs(rhs) if rhs != 0 else abs(lhs)
        res.record(rel <= IDENTITY_RTOL, rel, (p, lhs, rhs))
    return res


def check_dominance(rng: np.random.Generator, n: int) -> PropertyResult:
    res = PropertyResult("mid_braking_dominance")
    for _ in range(n):
        p = draw_special_case(rng)
        r = kin.d_min(p)
        res.record(r.d_min >= r.d_prime, max(0.0, r.d_prime - r.d_min), p)
    return res


_MONOTONE = {
    # parameter: +1 nondecreasing, -1 nonincreasing
    "v_r": +1,
    "rho": +1,
    "a_max_accel": +1,
    "a_max_brake": +1,
    "a_min_brake": -1,
    "v_f": -1,
}


def check_monotonicity(rng: np.random.Generator, n: int) -> PropertyResult:
    res = PropertyResult("rest_term_monotonicity")
    names = list(_MONOTONE)
    for i in range(n):
        p = _base_draw(rng)
        name = names[i % len(names)]
        step = rng.uniform(0, 0.5) * (G if name.startswith("a_") else 1.0)
        q = p.replace(**{name: getattr(p, name) + step})
        diff = (kin.d_prime_unclamped(q) - kin.d_prime_unclamped(p)) * _MONOTONE[name]
        scale = max(1.0, abs(kin.d_prime_unclamped(p)))
        res.record(diff >= -1e-12 * scale, max(0.0, -diff), (name, p, q))
    return res


def check_continuity(rng: np.random.Generator, n: int) -> PropertyResult:
    """Mid-braking sum approaches the rest-position term as rear braking approaches front braking.

    The gap starts at 1e-3 g and shrinks by decades. When the rear vehicle is
    only barely faster, the speeds meet long before either stops and the
    first gaps are not yet in the limit, so the deviation must shrink
    monotonically and end within tolerance.
    """
    res = PropertyResult("special_case_boundary_continuity")
    while res.total < n:
        p = draw_special_case(rng)
        devs = []
        for k in range(7):
            q = p.replace(a_min_brake=p.a_max_brake + 1e-3 * G * 10.0**-k)
            if not kin.mid_braking_term_applies(q):
                break
            mid = kin.d_double_prime_min(q) + kin.d_triple_prime_at(q, kin.equal_speed_time(q))
            devs.append(abs(mid - kin.d_prime_unclamped(q)))
        if len(devs) < 7:
            continue
        shrinking = all(b <= a + CONTINUITY_TOL for a, b in zip(devs, devs[1:]))
        res.record(shrinking and devs[-1] <= CONTINUITY_TOL, devs[-1], (p, devs))
    return res


def check_equal_speed_crossing(rng: np.random.Generator, n: int, dt: float = 1e-4) -> PropertyResult:
    res = PropertyResult("equal_speed_crossing")
    for _ in range(n):
        p = draw_special_case(rng)
        p = p.replace(v_r=min(p.v_r, 15.0), v_f=min(p.v_f, 15.0))
        if not kin.mid_braking_term_applies(p):
            continue
        trace = oracle.simulate(p, 1000.0, dt)
        crossing = oracle.equal_speed_crossing(trace, p.rho)
        expected = p.rho + kin.equal_speed_time(p)
        dev = abs(crossing - expected) if crossing is not None else math.inf
        res.record(dev <= dt * (1 + 1e-9), dev, p)
    return res


def _sample_interval(rng: np.random.Generator, lo: float, hi: float) -> float:
    if math.isinf(hi):
        return 1.0 / rng.uniform(0.0, 1.0 / lo) if lo > 0 else 1.0 / rng.uniform(0.0, 1.0)
    if lo == hi:
        return lo
    return rng.uniform(lo, hi)


def _cell_point(fixed: dict, row_param: str, row: float, col_param: str, col: float) -> ScenarioParams:
    values = dict(fixed)
    values[row_param] = row
    values[col_param] = col
    if values["a_max_brake"] == 0:
        values["a_max_brake"] = 1e-12
    if math.isinf(values["a_min_brake"]):
        values["a_min_brake"] = 1e9
    return ScenarioParams(**values)


def check_cells(
    rng: np.random.Generator,
    table: Optional[PartitionTable] = None,
    fixed: Optional[dict] = None,
    samples: int = 100,
):
    """Soundness (no interior point exceeds its cell) and tightness (some corner attains it)."""
    from .odd.partition import FIGURE4_FIXED

    table = table or figure4_table()
    fixed = fixed or FIGURE4_FIXED
    sound = PropertyResult("cell_soundness")
    tight = PropertyResult("cell_tightness")
    for cell in table.cells:
        rb, cb = cell.row_bin, cell.col_bin
        for _ in range(samples):
            r = _sample_interval(rng, rb.lo, rb.hi)
            c = _sample_interval(rng, cb.lo, cb.hi)
            if r == 0:
                continue
            v = d_min_value(_cell_point(fixed, table.row_param, r, table.col_param, c))
            excess = v - cell.d_min
            sound.record(excess <= CELL_SOUND_TOL, max(0.0, excess), (cell.row, cell.col, r, c, v))
        corners = [(r, c) for r in (rb.lo, rb.hi) for c in (cb.lo, cb.hi)]
        best = max(d_min_value(_cell_point(fixed, table.row_param, r, table.col_param, c)) for r, c in corners)
        dev = abs(best - cell.d_min)
        tight.record(dev <= CELL_TIGHT_TOL, dev, (cell.row, cell.col, best, cell.d_min))
    return sound, tight


@dataclass
class VerifyReport:
    seed: int
    draws: int
    properties: list

    @property
    def ok(self) -> bool:
        return all(p.ok for p in self.properties)

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "draws": self.draws,
            "ok": self.ok,
            "properties": [p.as_dict() for p in self.properties],
        }


def run_verify(seed: int = 0, draws: int = 10_000, workers: int = 1, corrupt: float = 0.0) -> VerifyReport:
    props = list(check_oracle(seed, draws, workers=workers, corrupt=corrupt))
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(DEFAULT_SHARDS + 1)[-1])
    side = max(100, draws // 10)
    props.append(check_rest_identity(rng, side))
    props.append(check_dominance(rng, side))
    props.append(check_monotonicity(rng, side))
    props.append(check_continuity(rng, side))
    props.append(check_equal_speed_crossing(rng, 50))
    props.extend(check_cells(rng))
    return VerifyReport(seed, draws, props)
