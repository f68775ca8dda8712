"""Occupant-behavior design loop: schedules, fusion training, causal checks."""

from ._core import (
    adjustment_set,
    causal_check,
    d_separated,
    fuse,
    hunt_probability,
    implied_independencies,
    probit_probability,
    run_loop,
    schedule_event_counts,
    simulate,
    wasserstein1,
)

__all__ = [
    "adjustment_set",
    "causal_check",
    "d_separated",
    "fuse",
    "hunt_probability",
    "implied_independencies",
    "probit_probability",
    "run_loop",
    "schedule_event_counts",
    "simulate",
    "wasserstein1",
]
