"""Per-slot device positions and BS associations.

A trace stores raw positions, one per (slot, device), plus the id of the
covering base station. Traces either come from a CSV file (header
``slot,device_id,x_km,y_km``) or from the seeded random-waypoint
generator. Devices carry a CPU utilization for their proxy VM, drawn
uniformly from 20-100 percent.

Traces are immutable after construction.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .topology import Topology

__all__ = [
    "Device",
    "MobilityTrace",
    "TraceFormatError",
    "load_trace",
    "save_trace",
    "filter_qualified",
    "generate_synthetic",
    "assign_utilizations",
]

TRACE_HEADER = ["slot", "device_id", "x_km", "y_km"]


class TraceFormatError(ValueError):
    """Raised for malformed or incomplete trace files."""


@dataclass(frozen=True)
class Device:
    id: int
    utilization_pct: float

    def __post_init__(self):
        if not (0.0 < self.utilization_pct <= 100.0):
            raise ValueError(f"utilization {self.utilization_pct} outside (0, 100]")


@dataclass(frozen=True)
class MobilityTrace:
    """Dense table of device positions and BS associations over time.

    positions_km has shape (slots, devices, 2); associations has shape
    (slots, devices) and holds BS ids.
    """

    slot_duration_hours: float
    positions_km: np.ndarray
    associations: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions_km, dtype=np.float64)
        assoc = np.asarray(self.associations, dtype=np.int64)
        if pos.ndim != 3 or pos.shape[2] != 2:
            raise ValueError("positions_km must have shape (slots, devices, 2)")
        if assoc.shape != pos.shape[:2]:
            raise ValueError("associations shape must match positions")
        pos.setflags(write=False)
        assoc.setflags(write=False)
        object.__setattr__(self, "positions_km", pos)
        object.__setattr__(self, "associations", assoc)

    @property
    def slot_count(self) -> int:
        return self.positions_km.shape[0]

    @property
    def device_count(self) -> int:
        return self.positions_km.shape[1]

    def bs_of(self, slot: int, device: int) -> int:
        return int(self.associations[slot, device])


def _associate(positions: np.ndarray, topology: Topology) -> np.ndarray:
    if topology.grid is None:
        raise ValueError("trace association requires a grid-built topology")
    slots, devices, _ = positions.shape
    assoc = np.empty((slots, devices), dtype=np.int64)
    for t in range(slots):
        for i in range(devices):
            assoc[t, i] = topology.grid.cell_of(positions[t, i, 0], positions[t, i, 1])
    return assoc


def load_trace(
    path, topology: Topology, slot_duration_hours: float = 0.5
) -> MobilityTrace:
    """Read a trace CSV and map every position to its covering BS.

    Device ids are re-indexed densely in ascending order of their file
    ids. Slots must be 0-based and contiguous, and every device must
    appear exactly once per slot.
    """
    rows: dict[tuple[int, int], tuple[float, float]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRACE_HEADER:
            raise TraceFormatError(f"expected header {TRACE_HEADER}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            try:
                slot = int(row[0])
                dev = int(row[1])
                x = float(row[2])
                y = float(row[3])
            except (IndexError, ValueError) as exc:
                raise TraceFormatError(f"line {lineno}: malformed row {row}") from exc
            if slot < 0:
                raise TraceFormatError(f"line {lineno}: negative slot {slot}")
            if (slot, dev) in rows:
                raise TraceFormatError(
                    f"line {lineno}: duplicate entry for slot {slot}, device {dev}"
                )
            if topology.grid is not None:
                try:
                    topology.grid.cell_of(x, y)
                except ValueError as exc:
                    raise TraceFormatError(f"line {lineno}: {exc}") from exc
            rows[(slot, dev)] = (x, y)

    if not rows:
        raise TraceFormatError("trace file contains no rows")
    slot_ids = sorted({slot for slot, _ in rows})
    if slot_ids != list(range(len(slot_ids))):
        raise TraceFormatError(f"slots must be 0-based and contiguous, got {slot_ids}")
    device_ids = sorted({dev for _, dev in rows})
    for slot in slot_ids:
        for dev in device_ids:
            if (slot, dev) not in rows:
                raise TraceFormatError(f"device {dev} missing from slot {slot}")

    positions = np.empty((len(slot_ids), len(device_ids), 2), dtype=np.float64)
    for t in slot_ids:
        for i, dev in enumerate(device_ids):
            positions[t, i] = rows[(t, dev)]
    return MobilityTrace(
        slot_duration_hours=slot_duration_hours,
        positions_km=positions,
        associations=_associate(positions, topology),
    )


def save_trace(trace: MobilityTrace, path) -> None:
    """Write a trace CSV that round-trips bit-exactly through load_trace."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for t in range(trace.slot_count):
            for i in range(trace.device_count):
                x, y = trace.positions_km[t, i]
                writer.writerow([t, i, repr(float(x)), repr(float(y))])


def filter_qualified(
    trace: MobilityTrace, area: tuple[float, float, float, float]
) -> MobilityTrace:
    """Keep only devices that stay inside `area` in every slot.

    `area` is (x_min, y_min, x_max, y_max) in km. Device indices are
    re-packed densely; the slot axis is unchanged. Idempotent.
    """
    x_min, y_min, x_max, y_max = area
    pos = trace.positions_km
    inside = (
        (pos[:, :, 0] >= x_min)
        & (pos[:, :, 0] <= x_max)
        & (pos[:, :, 1] >= y_min)
        & (pos[:, :, 1] <= y_max)
    )
    keep = inside.all(axis=0)
    return MobilityTrace(
        slot_duration_hours=trace.slot_duration_hours,
        positions_km=pos[:, keep, :],
        associations=trace.associations[:, keep],
    )


def generate_synthetic(
    seed: int,
    device_count: int,
    slot_count: int,
    topology: Topology,
    speed_kmh: tuple[float, float] = (3.0, 30.0),
    slot_duration_hours: float = 0.5,
) -> MobilityTrace:
    """Random-waypoint motion inside the topology area, seeded.

    Each device starts at a uniform random point, repeatedly picks a
    uniform waypoint and a uniform speed from `speed_kmh`, and walks
    there in a straight line. Positions are sampled at slot boundaries.
    A zero upper speed yields stationary devices.
    """
    if device_count < 1 or slot_count < 1:
        raise ValueError("device_count and slot_count must be at least 1")
    if topology.grid is None:
        raise ValueError("synthetic generation requires a grid-built topology")
    lo, hi = speed_kmh
    if lo < 0 or hi < lo:
        raise ValueError(f"invalid speed range {speed_kmh}")

    width = topology.grid.width_km
    height = topology.grid.height_km
    rng = np.random.default_rng(seed)
    positions = np.empty((slot_count, device_count, 2), dtype=np.float64)

    for i in range(device_count):
        x = rng.uniform(0.0, width)
        y = rng.uniform(0.0, height)
        positions[0, i] = (x, y)
        if hi <= 0.0:
            positions[1:, i] = (x, y)
            continue
        t = 0.0
        next_slot = 1
        while next_slot < slot_count:
            wx = rng.uniform(0.0, width)
            wy = rng.uniform(0.0, height)
            speed = max(rng.uniform(lo, hi), 1e-12)
            dist = math.hypot(wx - x, wy - y)
            if dist == 0.0:
                continue
            leg_hours = dist / speed
            while next_slot < slot_count and next_slot * slot_duration_hours <= t + leg_hours:
                frac = (next_slot * slot_duration_hours - t) / leg_hours
                positions[next_slot, i, 0] = x + frac * (wx - x)
                positions[next_slot, i, 1] = y + frac * (wy - y)
                next_slot += 1
            x, y = wx, wy
            t += leg_hours

    return MobilityTrace(
        slot_duration_hours=slot_duration_hours,
        positions_km=positions,
        associations=_associate(positions, topology),
    )


def assign_utilizations(seed: int, device_count: int) -> list[Device]:
    """Draw per-device proxy-VM CPU utilizations, uniform on [20, 100]%."""
    if device_count < 1:
        raise ValueError("device_count must be at least 1")
    rng = np.random.default_rng(seed)
    draws = rng.uniform(20.0, 100.0, size=device_count)
    return [Device(id=i, utilization_pct=float(u)) for i, u in enumerate(draws)]
