from .belief import BeliefState, TransitionRule, belief_update
from .machine import (
    Condition,
    LookaheadRule,
    OddConfig,
    OddStateMachine,
    preemptive_transition_check,
    replay,
    step_state_machine,
)
from .partition import (
    DEFAULT_GRID,
    Interval,
    MuOdd,
    PartitionTable,
    build_partition_table,
    figure4_table,
    worst_case_dmin,
    worst_case_search,
)

__all__ = [
    "BeliefState",
    "TransitionRule",
    "belief_update",
    "Condition",
    "LookaheadRule",
    "OddConfig",
    "OddStateMachine",
    "preemptive_transition_check",
    "replay",
    "step_state_machine",
    "DEFAULT_GRID",
    "Interval",
    "MuOdd",
    "PartitionTable",
    "build_partition_table",
    "figure4_table",
    "worst_case_dmin",
    "worst_case_search",
]
