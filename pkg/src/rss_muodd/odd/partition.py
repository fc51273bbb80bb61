"""Worst-case following distance over bounded parameter regions (μODD cells)."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Optional

import numpy as np

from ..errors import (
    CurveInfeasibleError,
    InvalidConfigurationError,
    NoSafeDistanceError,
)
from ..kinematics import d_min_array
from ..physics import RoadEnvironment, effective_braking_decel
from ..units import G

KINEMATIC_DIMS = ("v_r", "v_f", "rho", "a_max_accel", "a_min_brake", "a_max_brake")
ENVIRONMENT_DIMS = ("mu", "slope", "curve_radius")
ALL_DIMS = KINEMATIC_DIMS + ENVIRONMENT_DIMS
ACCEL_DIMS = ("a_max_accel", "a_min_brake", "a_max_brake")
_MAY_BE_UNBOUNDED = ("a_min_brake", "a_max_brake", "curve_radius")

DEFAULT_GRID = 9
# Stand-in lower end for the inverse-space grid of [0, inf) brake intervals.
_TINY_ACCEL = 1e-3 * G


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float  # may be math.inf

    def __post_init__(self):
        # a point at infinity is allowed (straight road); otherwise lo must be finite
        if math.isnan(self.lo) or math.isnan(self.hi) or (math.isinf(self.lo) and self.lo != self.hi):
            raise InvalidConfigurationError(f"bad interval [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise InvalidConfigurationError(f"interval lower bound {self.lo} exceeds upper bound {self.hi}")

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x)

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def grid(self, n: int) -> np.ndarray:
        """``n`` points covering the interval, endpoints included.

        Unbounded intervals are sampled uniformly in 1/x, so the last point is
        the limit ``inf`` itself.
        """
        if self.lo == self.hi or n < 2:
            return np.array([self.lo])
        if not self.unbounded:
            return np.linspace(self.lo, self.hi, n)
        lo = self.lo if self.lo > 0 else _TINY_ACCEL
        with np.errstate(divide="ignore"):
            pts = 1.0 / np.linspace(1.0 / lo, 0.0, n)
        return np.concatenate([[0.0], pts]) if self.lo == 0 else pts


def as_interval(value) -> Interval:
    if isinstance(value, Interval):
        return value
    if isinstance(value, (tuple, list)):
        return Interval(float(value[0]), float(value[1]))
    return Interval.point(float(value))


def _check_bounds(bounds: Mapping[str, Interval]) -> dict[str, Interval]:
    out = {}
    for name, value in bounds.items():
        if name not in ALL_DIMS:
            raise InvalidConfigurationError(f"unknown bound dimension {name!r}")
        iv = as_interval(value)
        if iv.unbounded and name not in _MAY_BE_UNBOUNDED:
            raise InvalidConfigurationError(f"{name} may not be unbounded")
        if iv.lo < 0 and name != "slope":
            raise InvalidConfigurationError(f"{name} lower bound must be >= 0, got {iv.lo}")
        out[name] = iv
    missing = [d for d in KINEMATIC_DIMS if d not in out]
    if missing:
        raise InvalidConfigurationError(f"bounds missing dimensions: {', '.join(missing)}")
    return out


def _environment_brake_range(bounds: dict[str, Interval], grid: int) -> tuple[float, float]:
    """(min, max) tire-limited deceleration over the environment bounds."""
    if "mu" not in bounds:
        raise InvalidConfigurationError("environment bounds need a mu interval")
    slope = bounds.get("slope", Interval.point(0.0))
    radius = bounds.get("curve_radius", Interval.point(math.inf))
    if radius.lo <= 0:
        raise InvalidConfigurationError("curve radius must be > 0")
    decels = []
    grids = (bounds["mu"].grid(grid), slope.grid(grid), radius.grid(grid), bounds["v_r"].grid(grid))
    for m, s, r, v in itertools.product(*grids):
        try:
            cap = effective_braking_decel(RoadEnvironment(float(m), float(s), float(r), float(v)))
        except CurveInfeasibleError as exc:
            raise NoSafeDistanceError(f"region includes an infeasible curve: {exc}") from None
        if not cap.can_hold:
            raise NoSafeDistanceError(
                f"rear vehicle cannot hold the grade at mu={m:g}, slope={math.degrees(s):g} deg"
            )
        decels.append(cap.decel)
    return min(decels), max(decels)


def effective_kinematic_bounds(bounds: Mapping[str, Interval], grid: int = DEFAULT_GRID) -> dict[str, Interval]:
    """Fold environment dimensions into the two braking intervals."""
    bounds = _check_bounds(bounds)
    if not any(d in bounds for d in ENVIRONMENT_DIMS):
        return {d: bounds[d] for d in KINEMATIC_DIMS}
    f_lo, f_hi = _environment_brake_range(bounds, grid)
    out = {d: bounds[d] for d in KINEMATIC_DIMS}
    for name in ("a_min_brake", "a_max_brake"):
        iv = out[name]
        out[name] = Interval(min(iv.lo, f_lo), min(iv.hi, f_hi))
    return out


class WorstCase(NamedTuple):
    d_min: float
    special_case: bool
    point: dict


def worst_case_search(bounds: Mapping[str, Interval], grid: int = DEFAULT_GRID) -> WorstCase:
    """Maximise the closed-form following distance over a bounded region.

    Every corner is evaluated, plus a ``grid``-point lattice per varying
    dimension (which includes the corners) to catch interior maxima.
    """
    if grid < 2:
        raise InvalidConfigurationError("grid must have at least 2 points per dimension")
    kin = effective_kinematic_bounds(bounds, grid)
    if kin["a_min_brake"].lo <= 0:
        raise NoSafeDistanceError("rear braking capability reaches zero inside the region")
    axes = [kin[d].grid(grid) for d in KINEMATIC_DIMS]
    mesh = np.meshgrid(*axes, indexing="ij", sparse=True)
    values, special = d_min_array(*mesh)
    values = np.broadcast_to(values, tuple(len(a) for a in axes))
    special = np.broadcast_to(special, values.shape)
    if not np.isfinite(values).all():
        raise NoSafeDistanceError("following distance is unbounded inside the region")
    idx = np.unravel_index(int(np.argmax(values)), values.shape)
    point = {d: float(axes[i][idx[i]]) for i, d in enumerate(KINEMATIC_DIMS)}
    return WorstCase(float(values[idx]), bool(special[idx]), point)


def worst_case_dmin(bounds: Mapping[str, Interval], grid: int = DEFAULT_GRID) -> float:
    return worst_case_search(bounds, grid).d_min


@dataclass(frozen=True)
class Cell:
    row: int
    col: int
    row_bin: Interval
    col_bin: Interval
    d_min: float
    special_case: bool
    point: dict = field(compare=False)

    @property
    def display(self) -> str:
        return f"{self.d_min:.1f}"


def bin_label(name: str, iv: Interval) -> str:
    scale, unit = (G, "g") if name in ACCEL_DIMS else (1.0, "")
    lo = f"{iv.lo / scale:g}"
    if iv.unbounded:
        return f"{lo}{unit}+"
    if iv.lo == iv.hi:
        return f"{lo}{unit}"
    return f"{lo}-{iv.hi / scale:g}{unit}"


@dataclass
class PartitionTable:
    row_param: str
    col_param: str
    row_bins: list
    col_bins: list
    cells: list

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.row_bins), len(self.col_bins)

    def cell(self, row: int, col: int) -> Cell:
        return self.cells[row * len(self.col_bins) + col]

    def display_grid(self) -> list[list[str]]:
        return [[self.cell(r, c).display for c in range(len(self.col_bins))] for r in range(len(self.row_bins))]

    def records(self) -> list[dict]:
        return [
            {
                "row": bin_label(self.row_param, c.row_bin),
                "col": bin_label(self.col_param, c.col_bin),
                "d_min": c.d_min,
                "d_min_display": c.display,
                "special_case": c.special_case,
            }
            for c in self.cells
        ]


def _check_bins(name: str, bins) -> list[Interval]:
    bins = [as_interval(b) for b in bins]
    if not bins:
        raise InvalidConfigurationError(f"no bins for {name}")
    for prev, nxt in zip(bins, bins[1:]):
        if nxt.lo < prev.hi or prev.unbounded:
            raise InvalidConfigurationError(
                f"{name} bins overlap or are out of order: {bin_label(name, prev)} then {bin_label(name, nxt)}"
            )
    return bins


def build_partition_table(
    row_bins,
    col_bins,
    fixed: Mapping,
    row_param: str = "a_max_brake",
    col_param: str = "a_min_brake",
    grid: int = DEFAULT_GRID,
) -> PartitionTable:
    """Worst-case distance for every (row bin x column bin) cell.

    Adjacent bins may share an endpoint, as in a partition of the real line.
    """
    if row_param == col_param:
        raise InvalidConfigurationError("row and column parameters must differ")
    rows = _check_bins(row_param, row_bins)
    cols = _check_bins(col_param, col_bins)
    base = {k: as_interval(v) for k, v in fixed.items() if k not in (row_param, col_param)}
    cells = []
    for (i, rb), (j, cb) in itertools.product(enumerate(rows), enumerate(cols)):
        wc = worst_case_search({**base, row_param: rb, col_param: cb}, grid)
        cells.append(Cell(i, j, rb, cb, wc.d_min, wc.special_case, wc.point))
    return PartitionTable(row_param, col_param, rows, cols, cells)


FIGURE4_ROW_BINS = [
    Interval(0.0, 0.3 * G),
    Interval(0.3 * G, 0.5 * G),
    Interval(0.5 * G, 0.6 * G),
    Interval(0.6 * G, 0.7 * G),
    Interval(0.7 * G, 1.0 * G),
    Interval(1.0 * G, math.inf),
]
FIGURE4_COL_BINS = [
    Interval(0.05 * G, 0.1 * G),
    Interval(0.1 * G, 0.3 * G),
    Interval(0.3 * G, 0.4 * G),
    Interval(0.4 * G, 0.5 * G),
    Interval(0.5 * G, 0.6 * G),
    Interval(0.6 * G, 1.0 * G),
    Interval(1.0 * G, math.inf),
]
FIGURE4_FIXED = {"v_r": 25.0, "v_f": 25.0, "rho": 0.5, "a_max_accel": 0.3 * G}


def figure4_table(grid: int = DEFAULT_GRID) -> PartitionTable:
    """Lead-vehicle braking bins (rows) against rear-vehicle braking bins (columns)."""
    return build_partition_table(FIGURE4_ROW_BINS, FIGURE4_COL_BINS, FIGURE4_FIXED, grid=grid)


@dataclass(frozen=True)
class MuOdd:
    id: str
    bounds: dict
    posture: str = "normal"
    d_min_worst: Optional[float] = None
    behavior: Optional[str] = None

    def __post_init__(self):
        if self.posture not in ("normal", "defensive"):
            raise InvalidConfigurationError(f"μODD {self.id!r}: unknown posture {self.posture!r}")
        if self.posture == "normal" and self.d_min_worst is None:
            raise InvalidConfigurationError(f"μODD {self.id!r}: normal posture needs a worst-case distance")

    @classmethod
    def build(cls, id: str, bounds: Mapping, posture: str = "normal", behavior=None, grid: int = DEFAULT_GRID):
        bounds = {k: as_interval(v) for k, v in bounds.items()}
        if posture == "normal":
            try:
                d = worst_case_dmin(bounds, grid)
            except NoSafeDistanceError as exc:
                raise InvalidConfigurationError(f"μODD {id!r} has no safe following distance: {exc}") from None
            return cls(id, bounds, posture, d, behavior)
        return cls(id, bounds, posture, None, behavior)

    @property
    def defensive(self) -> bool:
        return self.posture == "defensive"

    @property
    def conservativeness(self) -> float:
        """Ordering key for tie-breaks: defensive regions rank above any distance."""
        return math.inf if self.defensive else self.d_min_worst

    def contains(self, measurements: Mapping[str, float]) -> bool:
        return all(self.bounds[k].contains(v) for k, v in measurements.items() if k in self.bounds)
