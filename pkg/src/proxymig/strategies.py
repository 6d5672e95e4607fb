"""Per-slot placement policies: static, lam, eam.

* lam    -- re-solves the delay-optimal assignment every slot.
* eam    -- re-solves the on-grid-energy assignment every slot, subject
            to the per-device delay ceiling; exact below a configurable
            instance size, heuristic above it.
* static -- the delay-optimal assignment of slot 0, held for the whole
            run. The baseline thus starts optimal and degrades only
            through mobility.

Policies are stateless functions of (slot, trace, topology, parameters),
so evaluating several strategies or slots concurrently is safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .energy import EnergyModel
from .mobility import Device, MobilityTrace
from .optimizer import (
    AssignmentProblem,
    InfeasibleError,
    solve_eam_exact,
    solve_eam_heuristic,
    solve_transportation,
)
from .topology import Topology

__all__ = [
    "Placement",
    "STRATEGY_NAMES",
    "build_delay_problem",
    "build_energy_problem",
    "shared_energy_model",
    "static_place",
    "lam_place",
    "eam_place",
    "make_strategy",
]

STRATEGY_NAMES = ("static", "lam", "eam")


@dataclass(frozen=True)
class Placement:
    """Device -> cloudlet assignment for one slot."""

    slot: int
    assignment: np.ndarray
    relaxed: np.ndarray

    def __post_init__(self):
        assignment = np.asarray(self.assignment, dtype=np.int64)
        relaxed = np.asarray(self.relaxed, dtype=bool)
        assignment.setflags(write=False)
        relaxed.setflags(write=False)
        object.__setattr__(self, "assignment", assignment)
        object.__setattr__(self, "relaxed", relaxed)


def shared_energy_model(topology: Topology, slot_duration_hours: float) -> EnergyModel:
    """The PM power model common to all cloudlets.

    The energy objective prices every VM identically regardless of the
    hosting cloudlet, which requires homogeneous PM parameters; mixed
    fleets are rejected.
    """
    params = {
        (c.static_pm_power_w, c.power_coeff_w_per_pct, c.vms_per_pm)
        for c in topology.cloudlets
    }
    if len(params) != 1:
        raise ValueError("cloudlets must share PM power parameters")
    static, coeff, vms_per_pm = next(iter(params))
    return EnergyModel(
        static_pm_power_w=static,
        power_coeff_w_per_pct=coeff,
        vms_per_pm=vms_per_pm,
        slot_duration_hours=slot_duration_hours,
    )


def build_delay_problem(
    slot: int, trace: MobilityTrace, topology: Topology
) -> AssignmentProblem:
    costs = topology.delay_matrix[trace.associations[slot]]
    return AssignmentProblem.for_delay(costs, topology.capacities())


def build_energy_problem(
    slot: int,
    trace: MobilityTrace,
    topology: Topology,
    devices: Sequence[Device],
    gamma_ms: float,
    model: EnergyModel | None = None,
) -> AssignmentProblem:
    if model is None:
        model = shared_energy_model(topology, trace.slot_duration_hours)
    costs = topology.delay_matrix[trace.associations[slot]]
    loads = np.array(
        [model.per_vm_load_w(d.utilization_pct) for d in devices], dtype=np.float64
    )
    return AssignmentProblem.for_energy(
        costs, topology.capacities(), topology.greens_w(), loads, gamma_ms
    )


def lam_place(slot: int, trace: MobilityTrace, topology: Topology) -> Placement:
    """Delay-optimal placement for one slot."""
    solved = solve_transportation(build_delay_problem(slot, trace, topology))
    return Placement(slot=slot, assignment=solved.placement, relaxed=solved.relaxed)


def static_place(trace: MobilityTrace, topology: Topology) -> Placement:
    """The slot-0 delay-optimal placement, used unchanged for every slot."""
    return lam_place(0, trace, topology)


def eam_place(
    slot: int,
    trace: MobilityTrace,
    topology: Topology,
    devices: Sequence[Device],
    gamma_ms: float,
    exact_limit: tuple[int, int] = (12, 4),
    move_cap: int = 10_000,
    model: EnergyModel | None = None,
) -> Placement:
    """Energy-optimal placement for one slot.

    Solved exactly when the instance fits within `exact_limit` (devices,
    cloudlets), heuristically otherwise. When no assignment satisfies the
    delay ceiling, the heuristic's per-device relaxation applies and the
    affected devices come back flagged.
    """
    problem = build_energy_problem(slot, trace, topology, devices, gamma_ms, model)
    max_dev, max_cl = exact_limit
    if problem.device_count <= max_dev and problem.cloudlet_count <= max_cl:
        try:
            solved = solve_eam_exact(problem, max_devices=max_dev, max_cloudlets=max_cl)
        except InfeasibleError:
            solved = solve_eam_heuristic(problem, move_cap=move_cap)
    else:
        solved = solve_eam_heuristic(problem, move_cap=move_cap)
    return Placement(slot=slot, assignment=solved.placement, relaxed=solved.relaxed)


def make_strategy(
    name: str,
    trace: MobilityTrace,
    topology: Topology,
    devices: Sequence[Device],
    gamma_ms: float,
    exact_limit: tuple[int, int] = (12, 4),
    move_cap: int = 10_000,
) -> Callable[[int], Placement]:
    """Bind a strategy name to a slot -> Placement function."""
    if name == "lam":
        return lambda slot: lam_place(slot, trace, topology)
    if name == "static":
        base = static_place(trace, topology)
        return lambda slot: Placement(
            slot=slot, assignment=base.assignment, relaxed=base.relaxed
        )
    if name == "eam":
        model = shared_energy_model(topology, trace.slot_duration_hours)
        return lambda slot: eam_place(
            slot,
            trace,
            topology,
            devices,
            gamma_ms,
            exact_limit=exact_limit,
            move_cap=move_cap,
            model=model,
        )
    raise ValueError(f"unknown strategy {name!r}; expected one of {STRATEGY_NAMES}")
