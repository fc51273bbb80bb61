"""μODD mode state machine driven by evidence and prior belief."""

from __future__ import annotations

import operator
import threading
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional

from ..errors import InconsistentEvidenceError, InvalidConfigurationError, UnitError
from ..units import parse_quantity, parse_quantity_any
from .belief import BeliefState, TransitionRule, belief_update, evidence_token
from .partition import ALL_DIMS, MuOdd

_KIND_OF_DIM = {
    "v_r": "speed",
    "v_f": "speed",
    "rho": "time",
    "a_max_accel": "accel",
    "a_min_brake": "accel",
    "a_max_brake": "accel",
    "mu": "dimensionless",
    "slope": "angle",
    "curve_radius": "distance",
}

_OPS = {
    "eq": operator.eq,
    "ne": operator.ne,
    "lt": operator.lt,
    "le": operator.le,
    "gt": operator.gt,
    "ge": operator.ge,
}


@dataclass(frozen=True)
class Condition:
    key: str
    op: str
    value: Any

    def __post_init__(self):
        if self.op not in _OPS:
            raise InvalidConfigurationError(f"unknown comparison {self.op!r} (use one of {', '.join(_OPS)})")

    def matches(self, context: Mapping[str, Any]) -> bool:
        if self.key not in context:
            return False
        observed = context[self.key]
        if self.op in ("eq", "ne"):
            return _OPS[self.op](evidence_token(observed), evidence_token(self.value))
        try:
            threshold, kind = parse_quantity_any(self.value)
            observed_si, observed_kind = parse_quantity_any(observed)
        except UnitError:
            return False
        return observed_kind == kind and _OPS[self.op](observed_si, threshold)


@dataclass(frozen=True)
class LookaheadRule:
    target: str
    conditions: tuple

    def fires(self, context: Mapping[str, Any]) -> bool:
        return all(c.matches(context) for c in self.conditions)


@dataclass
class OddConfig:
    mu_odds: dict  # id -> MuOdd, declaration order
    hypotheses: list
    prior: BeliefState
    rules: list
    defensive_id: str
    lookahead_rules: list = field(default_factory=list)

    def __post_init__(self):
        if not self.defensive_id or self.defensive_id not in self.mu_odds:
            raise InvalidConfigurationError(f"defensive μODD {self.defensive_id!r} is not defined")
        if not self.mu_odds[self.defensive_id].defensive:
            raise InvalidConfigurationError(f"μODD {self.defensive_id!r} is designated defensive but has normal posture")
        if set(self.prior.hypotheses) != set(self.hypotheses):
            raise InvalidConfigurationError("prior must assign a weight to exactly the declared hypotheses")
        for rule in self.rules:
            missing = set(self.hypotheses) - set(rule.likelihoods)
            if missing:
                raise InvalidConfigurationError(f"rule {rule.evidence_key!r} lacks likelihoods for {sorted(missing)}")
            extra = set(rule.likelihoods) - set(self.hypotheses)
            if extra:
                raise InvalidConfigurationError(f"rule {rule.evidence_key!r} names unknown hypotheses {sorted(extra)}")
            for hyp, target in rule.target_map.items():
                if hyp not in self.hypotheses:
                    raise InvalidConfigurationError(f"rule {rule.evidence_key!r} maps unknown hypothesis {hyp!r}")
                if target not in self.mu_odds:
                    raise InvalidConfigurationError(f"rule {rule.evidence_key!r} targets unknown μODD {target!r}")
        for la in self.lookahead_rules:
            if la.target not in self.mu_odds:
                raise InvalidConfigurationError(f"lookahead rule targets unknown μODD {la.target!r}")

    @property
    def declared_keys(self) -> frozenset:
        keys = {r.evidence_key for r in self.rules}
        keys.update(c.key for la in self.lookahead_rules for c in la.conditions)
        keys.update(ALL_DIMS)
        return frozenset(keys)

    @property
    def lookahead_keys(self) -> frozenset:
        return frozenset(c.key for la in self.lookahead_rules for c in la.conditions)

    def odd(self, odd_id: str) -> MuOdd:
        return self.mu_odds[odd_id]


def _most_conservative(config: OddConfig, ids: Iterable[str]) -> str:
    ids = list(dict.fromkeys(ids))
    return max(ids, key=lambda i: config.mu_odds[i].conservativeness)


def _parse_measurements(evidence: Mapping[str, Any]) -> dict[str, float]:
    out = {}
    for key, value in evidence.items():
        if key in _KIND_OF_DIM:
            out[key] = parse_quantity(value, _KIND_OF_DIM[key])
    return out


def step_state_machine(
    current: str, belief: BeliefState, evidence: Mapping[str, Any], config: OddConfig
) -> tuple[str, BeliefState]:
    """One transition.

    Rules are applied in configuration order for the keys present in
    ``evidence``. The MAP hypothesis picks the next μODD through the most
    recently applied rule that maps it; ties go to the most conservative
    target. Anything the machine cannot interpret (undeclared key or value,
    impossible evidence, a measured condition no μODD covers) sends it to
    the defensive μODD.
    """
    if current not in config.mu_odds:
        raise InvalidConfigurationError(f"unknown current μODD {current!r}")
    if not evidence:
        return current, belief

    defensive = any(key not in config.declared_keys for key in evidence)
    posterior = belief
    applied: list[TransitionRule] = []
    for rule in config.rules:
        if rule.evidence_key not in evidence:
            continue
        value = evidence[rule.evidence_key]
        if not rule.declares(value):
            defensive = True
            continue
        try:
            posterior = belief_update(posterior, rule, value)
        except InconsistentEvidenceError:
            defensive = True
            continue
        applied.append(rule)

    try:
        measurements = _parse_measurements(evidence)
    except UnitError:
        defensive = True
        measurements = {}

    if defensive:
        return config.defensive_id, posterior

    target = current
    if applied:
        candidates = []
        for hyp in posterior.map_hypotheses():
            for rule in reversed(applied):
                if hyp in rule.target_map:
                    candidates.append(rule.target_map[hyp])
                    break
        if candidates:
            target = _most_conservative(config, candidates)

    if measurements and not config.odd(target).defensive and not config.odd(target).contains(measurements):
        covering = [o.id for o in config.mu_odds.values() if not o.defensive and o.contains(measurements)]
        target = _most_conservative(config, covering) if covering else config.defensive_id
    return target, posterior


def preemptive_transition_check(route_context: Mapping[str, Any], config: OddConfig) -> Optional[str]:
    """Target of the first lookahead rule whose conditions all hold, else None."""
    for rule in config.lookahead_rules:
        if rule.fires(route_context):
            return rule.target
    return None


class OddStateMachine:
    """Single-writer stepper holding the active μODD and the current belief.

    Readers may call :meth:`snapshot` from other threads.
    """

    def __init__(self, config: OddConfig, initial: Optional[str] = None):
        self.config = config
        initial = initial if initial is not None else next(iter(config.mu_odds))
        if initial not in config.mu_odds:
            raise InvalidConfigurationError(f"unknown initial μODD {initial!r}")
        self._state = initial
        self._belief = config.prior
        self._route_context: dict[str, Any] = {}
        self._lock = threading.Lock()

    def snapshot(self) -> tuple[str, BeliefState]:
        with self._lock:
            return self._state, self._belief

    def step(self, evidence: Mapping[str, Any]) -> tuple[str, BeliefState]:
        state, belief = step_state_machine(self._state, self._belief, evidence, self.config)
        self._route_context.update({k: v for k, v in evidence.items() if k in self.config.lookahead_keys})
        if not self.config.odd(state).defensive:
            pre = preemptive_transition_check(self._route_context, self.config)
            # lookahead only ever tightens the posture
            if pre is not None and self.config.odd(pre).conservativeness > self.config.odd(state).conservativeness:
                state = pre
        with self._lock:
            self._state, self._belief = state, belief
        return state, belief

    def record(self, t, evidence: Mapping[str, Any]) -> dict:
        state, belief = self.snapshot()
        odd = self.config.odd(state)
        return {
            "t": t,
            "evidence": {k: v for k, v in evidence.items()},
            "map_hypothesis": belief.map_hypothesis,
            "posterior": dict(belief.weights),
            "active_odd": state,
            "d_min_worst": odd.d_min_worst,
            "behavior": odd.behavior,
        }


def replay(config: OddConfig, log: Iterable[Mapping[str, Any]], initial: Optional[str] = None) -> list[dict]:
    """Replay ``{t, key, value}`` records grouped by timestamp.

    The first output record is the initial state (``t`` is None); then one
    record per distinct timestamp, in time order.
    """
    machine = OddStateMachine(config, initial)
    trace = [machine.record(None, {})]
    groups: dict[float, dict] = {}
    for rec in sorted(log, key=lambda r: r["t"]):
        groups.setdefault(rec["t"], {})[rec["key"]] = rec["value"]
    for t, evidence in groups.items():
        machine.step(evidence)
        trace.append(machine.record(t, evidence))
    return trace
