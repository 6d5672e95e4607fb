"""Slot loop, metric evaluation, and parameter sweeps.

One run applies a single strategy to every slot of a trace, measuring
per slot: delay statistics, the delay-ceiling violation count, exact
per-cloudlet energy demand and on-grid draw, the gap between the exact
and linearized demand models, and migrations against the previous slot.

Reported energy always uses the exact ceiling demand model even though
the energy-aware solver optimizes the linearized one, so the
approximation error is a visible metric, never hidden. All power values
are average watts over a slot; energy aggregates in Wh multiply by the
slot duration.

A run is sequential over slots (migration counting needs slot t-1), but
distinct runs in a sweep share nothing and report in input order.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .energy import on_grid_power
from .mobility import Device, MobilityTrace
from .strategies import make_strategy, shared_energy_model
from .topology import Topology

__all__ = [
    "Scenario",
    "SlotMetrics",
    "RunReport",
    "run",
    "sweep_green",
    "sweep_lambda",
    "write_report_csv",
    "write_report_json",
    "CSV_COLUMNS",
]

CSV_COLUMNS = [
    "slot",
    "strategy",
    "avg_delay_ms",
    "max_delay_ms",
    "violations",
    "violation_rate",
    "on_grid_w",
    "green_used_w",
    "migrations",
    "linearization_gap_w",
]


@dataclass(frozen=True)
class Scenario:
    """Everything one run needs, plus provenance for the report echo."""

    topology: Topology
    trace: MobilityTrace
    devices: tuple[Device, ...]
    strategy: str
    gamma_ms: float = 40.0
    eam_exact_limit: tuple[int, int] = (12, 4)
    move_cap: int = 10_000
    echo: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.gamma_ms <= 0:
            raise ValueError("gamma_ms must be positive")
        if len(self.devices) != self.trace.device_count:
            raise ValueError(
                f"{len(self.devices)} devices but trace has {self.trace.device_count}"
            )
        if self.trace.associations.max(initial=0) >= self.topology.bs_count:
            raise ValueError("trace references BS ids outside the topology")


@dataclass(frozen=True)
class SlotMetrics:
    slot: int
    avg_delay_ms: float
    max_delay_ms: float
    violations: int
    violation_rate: float
    demand_w: tuple[float, ...]
    green_w: tuple[float, ...]
    on_grid_per_cloudlet_w: tuple[float, ...]
    on_grid_w: float
    green_used_w: float
    migrations: int
    linearization_gap_w: float
    relaxed_devices: int


@dataclass(frozen=True)
class RunReport:
    strategy: str
    slots: tuple[SlotMetrics, ...]
    avg_delay_ms: float
    max_delay_ms: float
    avg_violation_rate: float
    total_violations: int
    avg_on_grid_w: float
    total_on_grid_wh: float
    total_migrations: int
    relaxed_slot_count: int
    sweep_axis: str | None = None
    sweep_value: float | None = None
    scenario_echo: dict = field(default_factory=dict)


def run(scenario: Scenario) -> RunReport:
    """Execute one strategy over every slot of the scenario's trace."""
    topology = scenario.topology
    trace = scenario.trace
    n_dev = trace.device_count
    model = shared_energy_model(topology, trace.slot_duration_hours)
    utilizations = np.array(
        [d.utilization_pct for d in scenario.devices], dtype=np.float64
    )
    greens = topology.greens_w()
    n_cl = topology.cloudlet_count

    place = make_strategy(
        scenario.strategy,
        trace,
        topology,
        scenario.devices,
        scenario.gamma_ms,
        exact_limit=scenario.eam_exact_limit,
        move_cap=scenario.move_cap,
    )

    slots: list[SlotMetrics] = []
    prev_assignment: np.ndarray | None = None
    for t in range(trace.slot_count):
        placement = place(t)
        assignment = placement.assignment
        delays = topology.delay_matrix[trace.associations[t], assignment]

        demand = np.empty(n_cl, dtype=np.float64)
        linear = np.empty(n_cl, dtype=np.float64)
        on_grid = np.empty(n_cl, dtype=np.float64)
        for k in range(n_cl):
            utils = utilizations[assignment == k]
            demand[k] = model.cloudlet_demand_exact_w(utils)
            linear[k] = model.cloudlet_demand_linear_w(utils)
            on_grid[k] = on_grid_power(demand[k], greens[k])

        migrations = (
            0 if prev_assignment is None else int((assignment != prev_assignment).sum())
        )
        prev_assignment = assignment
        violations = int((delays > scenario.gamma_ms).sum())

        slots.append(
            SlotMetrics(
                slot=t,
                avg_delay_ms=math.fsum(delays) / n_dev,
                max_delay_ms=float(delays.max()),
                violations=violations,
                violation_rate=violations / n_dev,
                demand_w=tuple(demand.tolist()),
                green_w=tuple(greens.tolist()),
                on_grid_per_cloudlet_w=tuple(on_grid.tolist()),
                on_grid_w=math.fsum(on_grid),
                green_used_w=math.fsum(np.minimum(demand, greens)),
                migrations=migrations,
                linearization_gap_w=math.fsum(demand - linear),
                relaxed_devices=int(placement.relaxed.sum()),
            )
        )

    n_slots = len(slots)
    avg_on_grid = math.fsum(s.on_grid_w for s in slots) / n_slots
    return RunReport(
        strategy=scenario.strategy,
        slots=tuple(slots),
        avg_delay_ms=math.fsum(s.avg_delay_ms for s in slots) / n_slots,
        max_delay_ms=max(s.max_delay_ms for s in slots),
        avg_violation_rate=math.fsum(s.violation_rate for s in slots) / n_slots,
        total_violations=sum(s.violations for s in slots),
        avg_on_grid_w=avg_on_grid,
        total_on_grid_wh=math.fsum(
            s.on_grid_w * trace.slot_duration_hours for s in slots
        ),
        total_migrations=sum(s.migrations for s in slots),
        relaxed_slot_count=sum(1 for s in slots if s.relaxed_devices),
        scenario_echo=dict(scenario.echo),
    )


def sweep_green(scenario: Scenario, g_values: Sequence[float]) -> list[RunReport]:
    """One run per green-supply level, set uniformly across cloudlets."""
    if not g_values:
        raise ValueError("g_values must be non-empty")
    reports = []
    for g in g_values:
        swept = replace(scenario, topology=scenario.topology.with_green_w(g))
        report = run(swept)
        reports.append(replace(report, sweep_axis="green", sweep_value=float(g)))
    return reports


def sweep_lambda(scenario: Scenario, lambda_values: Sequence[float]) -> list[RunReport]:
    """One run per delay coefficient, with the delay matrix rebuilt."""
    if not lambda_values:
        raise ValueError("lambda_values must be non-empty")
    if any(v <= 0 for v in lambda_values):
        raise ValueError("delay coefficients must be positive")
    reports = []
    for v in lambda_values:
        swept = replace(scenario, topology=scenario.topology.with_delay_coeff(v))
        report = run(swept)
        reports.append(replace(report, sweep_axis="lambda", sweep_value=float(v)))
    return reports


def _atomic_write(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_report_csv(report: RunReport, path) -> None:
    """Per-slot rows; written atomically so interrupted runs leave nothing."""
    lines = [",".join(CSV_COLUMNS)]
    for s in report.slots:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    s.slot,
                    report.strategy,
                    s.avg_delay_ms,
                    s.max_delay_ms,
                    s.violations,
                    s.violation_rate,
                    s.on_grid_w,
                    s.green_used_w,
                    s.migrations,
                    s.linearization_gap_w,
                )
            )
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def report_summary_dict(report: RunReport) -> dict:
    return {
        "strategy": report.strategy,
        "sweep_axis": report.sweep_axis,
        "sweep_value": report.sweep_value,
        "aggregates": {
            "avg_delay_ms": report.avg_delay_ms,
            "max_delay_ms": report.max_delay_ms,
            "avg_violation_rate": report.avg_violation_rate,
            "total_violations": report.total_violations,
            "avg_on_grid_w": report.avg_on_grid_w,
            "total_on_grid_wh": report.total_on_grid_wh,
            "total_migrations": report.total_migrations,
            "relaxed_slot_count": report.relaxed_slot_count,
        },
        "per_cloudlet": {
            "demand_w": [list(s.demand_w) for s in report.slots],
            "green_w": [list(s.green_w) for s in report.slots],
            "on_grid_w": [list(s.on_grid_per_cloudlet_w) for s in report.slots],
        },
        "scenario": report.scenario_echo,
    }


def write_report_json(report: RunReport, path) -> None:
    _atomic_write(path, json.dumps(report_summary_dict(report), indent=2) + "\n")
