"""Placement problems and their solvers.

Two problem flavors share one container:

* LINEAR_DELAY      -- minimize the summed device-to-cloudlet delay under
                       cloudlet capacities. Devices with identical cost
                       rows are interchangeable, so the instance collapses
                       to a small transportation problem solved exactly by
                       min-cost flow; integrality of the flow gives an
                       optimal 0/1 assignment.
* RECTIFIED_ENERGY  -- minimize total on-grid power, i.e. the sum over
                       cloudlets of max(hosted load - green supply, 0),
                       subject to capacities and per-device feasible sets
                       (the cloudlets within the delay ceiling). Solved
                       exactly by branch-and-bound at small scale and by a
                       deterministic greedy + local-search heuristic at
                       full scale.

brute_force enumerates every assignment and is the test oracle for both.

Solvers are pure functions of immutable problem instances; tie-breaking
is fixed, so identical instances yield identical assignments.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels

__all__ = [
    "ObjectiveKind",
    "SolveStatus",
    "InfeasibleError",
    "AssignmentProblem",
    "Assignment",
    "solve_transportation",
    "solve_eam_exact",
    "solve_eam_heuristic",
    "brute_force",
    "delay_objective",
    "energy_objective",
    "dump_problem_json",
    "load_problem_json",
]

BRUTE_FORCE_LIMIT = 10**7


class ObjectiveKind(str, Enum):
    LINEAR_DELAY = "linear_delay"
    RECTIFIED_ENERGY = "rectified_energy"


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    HEURISTIC = "heuristic"
    INFEASIBLE_RELAXED = "infeasible_relaxed"


class InfeasibleError(Exception):
    """No assignment satisfies the instance's constraints."""


@dataclass(frozen=True)
class AssignmentProblem:
    """One slot's placement instance.

    costs[i][k] is device i's delay to cloudlet k in ms. For the energy
    objective, loads[i] is the device's relaxed power demand in watts,
    greens[k] the cloudlet's green supply, and feasible[i][k] marks the
    cloudlets within the delay ceiling.
    """

    objective_kind: ObjectiveKind
    costs: np.ndarray
    capacities: np.ndarray
    greens: np.ndarray | None = None
    loads: np.ndarray | None = None
    feasible: np.ndarray | None = None

    def __post_init__(self):
        costs = np.ascontiguousarray(self.costs, dtype=np.float64)
        caps = np.ascontiguousarray(self.capacities, dtype=np.int64)
        if costs.ndim != 2:
            raise ValueError("costs must be a (devices, cloudlets) matrix")
        if caps.shape != (costs.shape[1],):
            raise ValueError("capacities length must match cloudlet count")
        if not np.all(np.isfinite(costs)) or np.any(costs < 0):
            raise ValueError("costs must be finite and non-negative")
        if np.any(caps < 0):
            raise ValueError("capacities must be non-negative")
        costs.setflags(write=False)
        caps.setflags(write=False)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "capacities", caps)

        if self.objective_kind is ObjectiveKind.RECTIFIED_ENERGY:
            if self.greens is None or self.loads is None or self.feasible is None:
                raise ValueError("energy objective requires greens, loads, feasible")
            greens = np.ascontiguousarray(self.greens, dtype=np.float64)
            loads = np.ascontiguousarray(self.loads, dtype=np.float64)
            feasible = np.ascontiguousarray(self.feasible, dtype=bool)
            if greens.shape != (costs.shape[1],):
                raise ValueError("greens length must match cloudlet count")
            if loads.shape != (costs.shape[0],):
                raise ValueError("loads length must match device count")
            if feasible.shape != costs.shape:
                raise ValueError("feasible mask shape must match costs")
            if np.any(greens < 0) or np.any(loads < 0):
                raise ValueError("greens and loads must be non-negative")
            for arr, name in ((greens, "greens"), (loads, "loads"), (feasible, "feasible")):
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)

    @property
    def device_count(self) -> int:
        return self.costs.shape[0]

    @property
    def cloudlet_count(self) -> int:
        return self.costs.shape[1]

    @classmethod
    def for_delay(cls, costs, capacities) -> "AssignmentProblem":
        return cls(ObjectiveKind.LINEAR_DELAY, costs, capacities)

    @classmethod
    def for_energy(
        cls, costs, capacities, greens, loads, gamma_ms: float
    ) -> "AssignmentProblem":
        """Build an energy instance with feasible sets cut at `gamma_ms`."""
        costs = np.asarray(costs, dtype=np.float64)
        return cls(
            ObjectiveKind.RECTIFIED_ENERGY,
            costs,
            capacities,
            greens=greens,
            loads=loads,
            feasible=costs <= gamma_ms,
        )


@dataclass(frozen=True)
class Assignment:
    """A solved placement: device -> cloudlet, with provenance."""

    placement: np.ndarray
    objective_value: float
    status: SolveStatus
    relaxed: np.ndarray

    def __post_init__(self):
        placement = np.asarray(self.placement, dtype=np.int64)
        relaxed = np.asarray(self.relaxed, dtype=bool)
        placement.setflags(write=False)
        relaxed.setflags(write=False)
        object.__setattr__(self, "placement", placement)
        object.__setattr__(self, "relaxed", relaxed)


def delay_objective(problem: AssignmentProblem, placement: np.ndarray) -> float:
    """Total delay of a placement, device-ms."""
    return math.fsum(
        problem.costs[i, placement[i]] for i in range(problem.device_count)
    )


def energy_objective(problem: AssignmentProblem, placement: np.ndarray) -> float:
    """Total rectified on-grid power of a placement, watts.

    Canonical form shared by every solver: per-cloudlet loads are exact
    sums over devices in id order, so values from different solvers are
    directly comparable.
    """
    per_cloudlet = [[] for _ in range(problem.cloudlet_count)]
    for i in range(problem.device_count):
        per_cloudlet[placement[i]].append(problem.loads[i])
    return math.fsum(
        max(math.fsum(group) - green, 0.0)
        for group, green in zip(per_cloudlet, problem.greens)
    )


def _check_capacity(problem: AssignmentProblem) -> None:
    total_cap = int(problem.capacities.sum())
    if total_cap < problem.device_count:
        raise InfeasibleError(
            f"total capacity {total_cap} cannot host {problem.device_count} devices"
        )


def solve_transportation(problem: AssignmentProblem) -> Assignment:
    """Exact delay-optimal placement via min-cost flow.

    Devices sharing a cost row are aggregated into one supply group; the
    integral optimal flow is split back to devices in id order, filling
    cloudlets in ascending id.
    """
    if problem.objective_kind is not ObjectiveKind.LINEAR_DELAY:
        raise ValueError("solve_transportation requires a LINEAR_DELAY instance")
    _check_capacity(problem)

    n_dev = problem.device_count
    group_index: dict[bytes, int] = {}
    group_members: list[list[int]] = []
    for i in range(n_dev):
        key = problem.costs[i].tobytes()
        g = group_index.setdefault(key, len(group_members))
        if g == len(group_members):
            group_members.append([])
        group_members[g].append(i)

    group_costs = np.array(
        [problem.costs[members[0]] for members in group_members], dtype=np.float64
    ).reshape(len(group_members), problem.cloudlet_count)
    supply = np.array([len(members) for members in group_members], dtype=np.int64)

    flow = kernels.transportation(group_costs, supply, problem.capacities)

    placement = np.full(n_dev, -1, dtype=np.int64)
    for g, members in enumerate(group_members):
        pos = 0
        for k in range(problem.cloudlet_count):
            for _ in range(int(flow[g, k])):
                placement[members[pos]] = k
                pos += 1

    return Assignment(
        placement=placement,
        objective_value=delay_objective(problem, placement),
        status=SolveStatus.OPTIMAL,
        relaxed=np.zeros(n_dev, dtype=bool),
    )


def _feasible_lists(problem: AssignmentProblem) -> list[list[int]]:
    return [
        [k for k in range(problem.cloudlet_count) if problem.feasible[i, k]]
        for i in range(problem.device_count)
    ]


def solve_eam_exact(
    problem: AssignmentProblem,
    max_devices: int = 12,
    max_cloudlets: int = 4,
) -> Assignment:
    """Optimal energy placement by depth-first branch-and-bound.

    Only for small instances (the search is exponential). Devices are
    branched in descending load order; children are tried by ascending
    marginal on-grid cost. The bound adds, for each unplaced device, the
    part of its load that no remaining green headroom could absorb.
    """
    if problem.objective_kind is not ObjectiveKind.RECTIFIED_ENERGY:
        raise ValueError("solve_eam_exact requires a RECTIFIED_ENERGY instance")
    n_dev, n_cl = problem.device_count, problem.cloudlet_count
    if n_dev > max_devices or n_cl > max_cloudlets:
        raise ValueError(
            f"instance {n_dev}x{n_cl} exceeds exact-solver bound "
            f"{max_devices}x{max_cloudlets}"
        )
    _check_capacity(problem)
    feas = _feasible_lists(problem)
    for i, options in enumerate(feas):
        if not options:
            raise InfeasibleError(f"device {i} has no cloudlet within the delay ceiling")

    loads = problem.loads
    greens = problem.greens
    caps = problem.capacities
    order = sorted(range(n_dev), key=lambda i: (-loads[i], i))

    load = [0.0] * n_cl
    count = [0] * n_cl
    work = [-1] * n_dev
    best_cost = math.inf
    best_placement: list[int] | None = None

    def lower_bound(pos: int, cur: float) -> float:
        total = cur
        free_slots = 0
        for k in range(n_cl):
            free_slots += caps[k] - count[k]
        if free_slots < n_dev - pos:
            return math.inf
        for t in range(pos, n_dev):
            i = order[t]
            headroom = -1.0
            for k in feas[i]:
                if count[k] < caps[k]:
                    h = greens[k] - load[k]
                    if h < 0.0:
                        h = 0.0
                    if h > headroom:
                        headroom = h
            if headroom < 0.0:
                return math.inf
            short = loads[i] - headroom
            if short > 0.0:
                total += short
        return total

    def descend(pos: int, cur: float) -> None:
        nonlocal best_cost, best_placement
        if pos == n_dev:
            cand = energy_objective(problem, work)
            if cand < best_cost:
                best_cost = cand
                best_placement = list(work)
            return
        if lower_bound(pos, cur) >= best_cost:
            return
        i = order[pos]
        w = loads[i]
        children = []
        for k in feas[i]:
            if count[k] < caps[k]:
                added = max(load[k] + w - greens[k], 0.0) - max(load[k] - greens[k], 0.0)
                children.append((added, k))
        children.sort()
        for added, k in children:
            work[i] = k
            load[k] += w
            count[k] += 1
            descend(pos + 1, cur + added)
            load[k] -= w
            count[k] -= 1
            work[i] = -1

    descend(0, 0.0)
    if best_placement is None:
        raise InfeasibleError("capacities cannot absorb all devices within the ceiling")

    placement = np.array(best_placement, dtype=np.int64)
    return Assignment(
        placement=placement,
        objective_value=best_cost,
        status=SolveStatus.OPTIMAL,
        relaxed=np.zeros(n_dev, dtype=bool),
    )


def solve_eam_heuristic(problem: AssignmentProblem, move_cap: int = 10_000) -> Assignment:
    """Scalable energy placement: greedy construction plus local search.

    Greedy places devices in descending load order into the feasible,
    non-full cloudlet with the most remaining green headroom (headroom is
    floored at zero, so drained cloudlets tie and the tie-breaks take
    over: lowest delay, then lowest cloudlet id). Devices whose feasible
    cloudlets are missing or full are relaxed to the lowest-delay cloudlet
    with spare capacity, flagged, and pinned. Best-improvement relocation
    moves then run to exhaustion, with pairwise swaps tried whenever no
    relocation improves, until neither neighborhood strictly reduces the
    objective or `move_cap` moves were applied. Fully deterministic.
    """
    if problem.objective_kind is not ObjectiveKind.RECTIFIED_ENERGY:
        raise ValueError("solve_eam_heuristic requires a RECTIFIED_ENERGY instance")
    _check_capacity(problem)

    n_dev, n_cl = problem.device_count, problem.cloudlet_count
    loads = problem.loads
    greens = problem.greens
    caps = problem.capacities
    costs = problem.costs
    feasible = problem.feasible

    assign = np.full(n_dev, -1, dtype=np.int64)
    relaxed = np.zeros(n_dev, dtype=bool)
    load = [0.0] * n_cl
    count = [0] * n_cl

    for i in sorted(range(n_dev), key=lambda i: (-loads[i], i)):
        best_b = -1
        best_h = -1.0
        best_tau = math.inf
        for b in range(n_cl):
            if not feasible[i, b] or count[b] >= caps[b]:
                continue
            h = greens[b] - load[b]
            if h < 0.0:
                h = 0.0
            if h > best_h or (h == best_h and costs[i, b] < best_tau):
                best_b = b
                best_h = h
                best_tau = costs[i, b]
        if best_b < 0:
            relaxed[i] = True
            continue
        assign[i] = best_b
        load[best_b] += loads[i]
        count[best_b] += 1

    for i in range(n_dev):
        if not relaxed[i]:
            continue
        best_b = -1
        best_tau = math.inf
        for b in range(n_cl):
            if count[b] < caps[b] and costs[i, b] < best_tau:
                best_b = b
                best_tau = costs[i, b]
        assign[i] = best_b
        load[best_b] += loads[i]
        count[best_b] += 1

    kernels.eam_local_search(
        loads, problem.feasible, ~relaxed, problem.capacities, greens, assign, move_cap
    )

    status = SolveStatus.INFEASIBLE_RELAXED if relaxed.any() else SolveStatus.HEURISTIC
    return Assignment(
        placement=assign,
        objective_value=energy_objective(problem, assign),
        status=status,
        relaxed=relaxed,
    )


def brute_force(problem: AssignmentProblem) -> Assignment:
    """Exhaustive-enumeration optimum; the solver-independent oracle.

    Guarded to cloudlets**devices <= 10**7 states. Respects capacities
    and, for the energy objective, the per-device feasible sets.
    """
    n_dev, n_cl = problem.device_count, problem.cloudlet_count
    if n_cl**n_dev > BRUTE_FORCE_LIMIT:
        raise ValueError(f"instance too large to enumerate: {n_cl}**{n_dev}")
    _check_capacity(problem)

    energy = problem.objective_kind is ObjectiveKind.RECTIFIED_ENERGY
    if energy:
        candidates = _feasible_lists(problem)
        for i, options in enumerate(candidates):
            if not options:
                raise InfeasibleError(
                    f"device {i} has no cloudlet within the delay ceiling"
                )
        loads = problem.loads
        greens = problem.greens
    else:
        candidates = [list(range(n_cl))] * n_dev

    caps = problem.capacities
    count = [0] * n_cl
    load = [0.0] * n_cl
    work = [-1] * n_dev
    best_cost = math.inf
    best_placement: list[int] | None = None

    def descend(pos: int, cur: float) -> None:
        nonlocal best_cost, best_placement
        if cur >= best_cost:
            return
        if pos == n_dev:
            cand = (
                energy_objective(problem, work)
                if energy
                else delay_objective(problem, work)
            )
            if cand < best_cost:
                best_cost = cand
                best_placement = list(work)
            return
        for k in candidates[pos]:
            if count[k] >= caps[k]:
                continue
            if energy:
                w = loads[pos]
                added = max(load[k] + w - greens[k], 0.0) - max(
                    load[k] - greens[k], 0.0
                )
                load[k] += w
            else:
                added = float(problem.costs[pos, k])
            count[k] += 1
            work[pos] = k
            descend(pos + 1, cur + added)
            work[pos] = -1
            count[k] -= 1
            if energy:
                load[k] -= loads[pos]
        return

    descend(0, 0.0)
    if best_placement is None:
        raise InfeasibleError("no assignment satisfies capacities and feasible sets")

    placement = np.array(best_placement, dtype=np.int64)
    return Assignment(
        placement=placement,
        objective_value=best_cost,
        status=SolveStatus.OPTIMAL,
        relaxed=np.zeros(n_dev, dtype=bool),
    )


def dump_problem_json(problem: AssignmentProblem, path) -> None:
    """Write an instance as a JSON regression fixture."""
    doc = {
        "objective_kind": problem.objective_kind.value,
        "costs": problem.costs.tolist(),
        "capacities": problem.capacities.tolist(),
        "green": None if problem.greens is None else problem.greens.tolist(),
        "loads": None if problem.loads is None else problem.loads.tolist(),
        "feasible_sets": None
        if problem.feasible is None
        else [
            [k for k in range(problem.cloudlet_count) if problem.feasible[i, k]]
            for i in range(problem.device_count)
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_problem_json(path) -> AssignmentProblem:
    with open(path) as fh:
        doc = json.load(fh)
    kind = ObjectiveKind(doc["objective_kind"])
    costs = np.array(doc["costs"], dtype=np.float64)
    capacities = np.array(doc["capacities"], dtype=np.int64)
    if kind is ObjectiveKind.LINEAR_DELAY:
        return AssignmentProblem(kind, costs, capacities)
    feasible = np.zeros(costs.shape, dtype=bool)
    for i, options in enumerate(doc["feasible_sets"]):
        feasible[i, options] = True
    return AssignmentProblem(
        kind,
        costs,
        capacities,
        greens=np.array(doc["green"], dtype=np.float64),
        loads=np.array(doc["loads"], dtype=np.float64),
        feasible=feasible,
    )
