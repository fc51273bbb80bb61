"""Discrete Bayesian belief over condition hypotheses."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from ..errors import InconsistentEvidenceError, InvalidConfigurationError, InvalidParameterError

# relative width within which two posterior weights count as tied
TIE_RTOL = 1e-9


def evidence_token(value) -> str:
    """Canonical string form of an observed evidence value (``True`` -> ``"true"``)."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    return str(value)


@dataclass(frozen=True)
class BeliefState:
    weights: Mapping[str, float]

    def __post_init__(self):
        weights = dict(self.weights)
        if not weights:
            raise InvalidConfigurationError("belief needs at least one hypothesis")
        for h, w in weights.items():
            if not (w >= 0 and math.isfinite(w)):
                raise InvalidConfigurationError(f"weight of {h!r} must be finite and >= 0, got {w}")
        total = sum(weights.values())
        if total <= 0:
            raise InvalidConfigurationError("at least one hypothesis must have positive weight")
        object.__setattr__(self, "weights", {h: w / total for h, w in weights.items()})

    @property
    def hypotheses(self) -> tuple[str, ...]:
        return tuple(self.weights)

    def map_hypotheses(self) -> list[str]:
        """All hypotheses tied for the maximum posterior weight, in declaration order."""
        top = max(self.weights.values())
        return [h for h, w in self.weights.items() if w >= top * (1 - TIE_RTOL)]

    @property
    def map_hypothesis(self) -> str:
        return self.map_hypotheses()[0]


@dataclass(frozen=True)
class TransitionRule:
    evidence_key: str
    likelihoods: Mapping[str, Mapping[str, float]]  # hypothesis -> evidence token -> likelihood
    target_map: Mapping[str, str]  # MAP hypothesis -> μODD id

    def __post_init__(self):
        likelihoods = {h: {evidence_token(k): float(v) for k, v in table.items()} for h, table in self.likelihoods.items()}
        values = set().union(*(t.keys() for t in likelihoods.values())) if likelihoods else set()
        for h, table in likelihoods.items():
            missing = values - table.keys()
            if missing:
                raise InvalidConfigurationError(
                    f"rule {self.evidence_key!r}: hypothesis {h!r} lacks likelihoods for {sorted(missing)}"
                )
            for v, lik in table.items():
                if not (lik >= 0 and math.isfinite(lik)):
                    raise InvalidConfigurationError(f"rule {self.evidence_key!r}: bad likelihood {lik} for ({h}, {v})")
        object.__setattr__(self, "likelihoods", likelihoods)
        object.__setattr__(self, "target_map", dict(self.target_map))

    @property
    def values(self) -> frozenset:
        return frozenset().union(*(t.keys() for t in self.likelihoods.values()))

    def declares(self, value) -> bool:
        return evidence_token(value) in self.values


def belief_update(b: BeliefState, rule: TransitionRule, observed_value) -> BeliefState:
    """Posterior ∝ prior × likelihood(observed value), renormalised."""
    token = evidence_token(observed_value)
    if not rule.declares(token):
        raise InvalidParameterError(f"value {token!r} is not declared for evidence {rule.evidence_key!r}")
    missing = [h for h in b.hypotheses if h not in rule.likelihoods]
    if missing:
        raise InvalidConfigurationError(f"rule {rule.evidence_key!r} has no likelihoods for {missing}")
    posterior = {h: w * rule.likelihoods[h][token] for h, w in b.weights.items()}
    if sum(posterior.values()) <= 0:
        raise InconsistentEvidenceError(
            f"{rule.evidence_key}={token} is impossible under every hypothesis with nonzero belief"
        )
    return BeliefState(posterior)
