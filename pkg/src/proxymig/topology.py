"""Edge network model: base stations, cloudlets, and the delay matrix.

The physical layout is a rectangular grid of cells. Each cell hosts one
base station wired to one co-located cloudlet, so a grid of R x C cells
yields R*C BS/cloudlet pairs. End-to-end delay between BS j and cloudlet
k is affine in their Euclidean distance:

    delay_ms[j][k] = delay_coeff * dist_km(j, k) + delay_offset

Delay matrices can also be loaded from CSV for non-grid experiments, in
which case the stored values are used as-is.

Topologies are immutable after construction and safe to share across
concurrent strategy evaluations.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "BaseStation",
    "Cloudlet",
    "GridSpec",
    "Topology",
    "build_grid",
    "load_delay_matrix_csv",
]


@dataclass(frozen=True)
class BaseStation:
    """A base station at a fixed (x, y) position in km."""

    id: int
    position: tuple[float, float]


@dataclass(frozen=True)
class Cloudlet:
    """An edge data center of `pm_count` physical machines.

    Capacity is the number of proxy VMs it can host: pm_count * vms_per_pm.
    `green_w` is the average green-energy supply over one slot, in watts.
    """

    id: int
    position: tuple[float, float]
    pm_count: int
    vms_per_pm: int
    green_w: float
    static_pm_power_w: float = 80.0
    power_coeff_w_per_pct: float = 0.2

    def __post_init__(self):
        if self.pm_count <= 0 or self.vms_per_pm <= 0:
            raise ValueError("pm_count and vms_per_pm must be positive")
        if self.static_pm_power_w <= 0 or self.power_coeff_w_per_pct <= 0:
            raise ValueError("PM power parameters must be positive")
        if self.green_w < 0:
            raise ValueError("green_w must be non-negative")

    @property
    def capacity(self) -> int:
        return self.pm_count * self.vms_per_pm


@dataclass(frozen=True)
class GridSpec:
    """Cell layout of a grid-built topology (absent for loaded matrices)."""

    rows: int
    cols: int
    cell_km: float

    @property
    def width_km(self) -> float:
        return self.cols * self.cell_km

    @property
    def height_km(self) -> float:
        return self.rows * self.cell_km

    def cell_of(self, x_km: float, y_km: float) -> int:
        """Map a position to the id of the cell containing it.

        Points on the far boundary belong to the last cell, so the whole
        closed area is covered. Raises ValueError outside the area.
        """
        if not (0.0 <= x_km <= self.width_km and 0.0 <= y_km <= self.height_km):
            raise ValueError(
                f"position ({x_km}, {y_km}) outside the {self.width_km}x{self.height_km} km area"
            )
        col = min(int(x_km // self.cell_km), self.cols - 1)
        row = min(int(y_km // self.cell_km), self.rows - 1)
        return row * self.cols + col


@dataclass(frozen=True)
class Topology:
    """Immutable network snapshot: stations, cloudlets, delays."""

    base_stations: tuple[BaseStation, ...]
    cloudlets: tuple[Cloudlet, ...]
    delay_coeff_ms_per_km: float
    delay_offset_ms: float
    delay_matrix: np.ndarray = field(repr=False)
    grid: GridSpec | None = None

    def __post_init__(self):
        mat = np.asarray(self.delay_matrix, dtype=np.float64)
        if mat.shape != (len(self.base_stations), len(self.cloudlets)):
            raise ValueError(
                f"delay matrix shape {mat.shape} does not match "
                f"{len(self.base_stations)} BSs x {len(self.cloudlets)} cloudlets"
            )
        mat.setflags(write=False)
        object.__setattr__(self, "delay_matrix", mat)

    @property
    def bs_count(self) -> int:
        return len(self.base_stations)

    @property
    def cloudlet_count(self) -> int:
        return len(self.cloudlets)

    def distance_km(self, bs_id: int, cloudlet_id: int) -> float:
        """Euclidean distance between a BS and a cloudlet, in km."""
        bx, by = self.base_stations[bs_id].position
        cx, cy = self.cloudlets[cloudlet_id].position
        return math.hypot(bx - cx, by - cy)

    def delay_ms(self, bs_id: int, cloudlet_id: int) -> float:
        """End-to-end delay between a BS and a cloudlet, in ms."""
        if not (0 <= bs_id < self.bs_count):
            raise IndexError(f"bs_id {bs_id} out of range")
        if not (0 <= cloudlet_id < self.cloudlet_count):
            raise IndexError(f"cloudlet_id {cloudlet_id} out of range")
        return float(self.delay_matrix[bs_id, cloudlet_id])

    def capacities(self) -> np.ndarray:
        return np.array([c.capacity for c in self.cloudlets], dtype=np.int64)

    def greens_w(self) -> np.ndarray:
        return np.array([c.green_w for c in self.cloudlets], dtype=np.float64)

    def with_green_w(self, green_w: float) -> "Topology":
        """Copy with every cloudlet's green supply set to `green_w`."""
        cloudlets = tuple(replace(c, green_w=green_w) for c in self.cloudlets)
        return replace(self, cloudlets=cloudlets)

    def with_delay_coeff(self, delay_coeff_ms_per_km: float) -> "Topology":
        """Copy with the delay matrix rebuilt for a new distance coefficient.

        Only meaningful when BS/cloudlet positions define the delays, i.e.
        not for externally loaded matrices.
        """
        matrix = _affine_delay_matrix(
            self.base_stations, self.cloudlets, delay_coeff_ms_per_km, self.delay_offset_ms
        )
        return replace(
            self, delay_coeff_ms_per_km=delay_coeff_ms_per_km, delay_matrix=matrix
        )

    def with_delay_matrix(self, matrix: np.ndarray) -> "Topology":
        """Copy with an externally supplied delay matrix, taken as-is."""
        return replace(self, delay_matrix=np.asarray(matrix, dtype=np.float64))


def _affine_delay_matrix(base_stations, cloudlets, coeff, offset) -> np.ndarray:
    matrix = np.empty((len(base_stations), len(cloudlets)), dtype=np.float64)
    for bs in base_stations:
        bx, by = bs.position
        for cl in cloudlets:
            cx, cy = cl.position
            matrix[bs.id, cl.id] = coeff * math.hypot(bx - cx, by - cy) + offset
    return matrix


def build_grid(
    rows: int,
    cols: int,
    cell_km: float,
    cloudlet_template: Cloudlet,
    delay_coeff_ms_per_km: float,
    delay_offset_ms: float,
) -> Topology:
    """Build a rows x cols grid of co-located BS/cloudlet pairs.

    Pairs sit at cell centers; cell (row r, col c) gets id r*cols + c.
    Every cloudlet is instantiated from `cloudlet_template` (its id and
    position are overridden).
    """
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be at least 1x1")
    if cell_km <= 0:
        raise ValueError("cell_km must be positive")
    if delay_coeff_ms_per_km < 0 or delay_offset_ms < 0:
        raise ValueError("delay parameters must be non-negative")

    base_stations = []
    cloudlets = []
    for r in range(rows):
        for c in range(cols):
            ident = r * cols + c
            center = ((c + 0.5) * cell_km, (r + 0.5) * cell_km)
            base_stations.append(BaseStation(id=ident, position=center))
            cloudlets.append(replace(cloudlet_template, id=ident, position=center))

    matrix = _affine_delay_matrix(
        base_stations, cloudlets, delay_coeff_ms_per_km, delay_offset_ms
    )
    return Topology(
        base_stations=tuple(base_stations),
        cloudlets=tuple(cloudlets),
        delay_coeff_ms_per_km=delay_coeff_ms_per_km,
        delay_offset_ms=delay_offset_ms,
        delay_matrix=matrix,
        grid=GridSpec(rows=rows, cols=cols, cell_km=cell_km),
    )


def load_delay_matrix_csv(path, bs_count: int, cloudlet_count: int) -> np.ndarray:
    """Read a delay matrix from CSV.

    Expected header: bs_id,cloudlet_id,delay_ms. The file must cover every
    (bs, cloudlet) pair exactly once.
    """
    matrix = np.full((bs_count, cloudlet_count), np.nan, dtype=np.float64)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = ["bs_id", "cloudlet_id", "delay_ms"]
        if reader.fieldnames != expected:
            raise ValueError(f"expected header {expected}, got {reader.fieldnames}")
        for lineno, row in enumerate(reader, start=2):
            try:
                j = int(row["bs_id"])
                k = int(row["cloudlet_id"])
                d = float(row["delay_ms"])
            except (TypeError, ValueError) as exc:
                raise ValueError(f"line {lineno}: malformed row {row}") from exc
            if not (0 <= j < bs_count and 0 <= k < cloudlet_count):
                raise ValueError(f"line {lineno}: pair ({j}, {k}) out of range")
            if not math.isnan(matrix[j, k]):
                raise ValueError(f"line {lineno}: duplicate pair ({j}, {k})")
            matrix[j, k] = d
    missing = np.argwhere(np.isnan(matrix))
    if missing.size:
        j, k = missing[0]
        raise ValueError(f"missing delay for pair ({j}, {k})")
    return matrix
