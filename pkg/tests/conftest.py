import numpy as np
import pytest

from proxymig import Cloudlet, assign_utilizations, build_grid, generate_synthetic

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_template(green_w=600.0, pm_count=5, vms_per_pm=6):
    return Cloudlet(
        id=-1,
        position=(0.0, 0.0),
        pm_count=pm_count,
        vms_per_pm=vms_per_pm,
        green_w=green_w,
    )


@pytest.fixture(scope="session")
def grid5():
    """The default 5x5 experiment grid (1 km cells, 25 ms/km, 10 ms offset)."""
    return build_grid(5, 5, 1.0, make_template(), 25.0, 10.0)


@pytest.fixture(scope="session")
def default_trace(grid5):
    return generate_synthetic(seed=1, device_count=632, slot_count=12, topology=grid5)


@pytest.fixture(scope="session")
def default_devices():
    return tuple(assign_utilizations(2, 632))


def stationary_trace(topology, positions, slot_count, slot_hours=0.5):
    """Trace where every device sits still at the given (x, y) positions."""
    from proxymig.mobility import MobilityTrace

    pos = np.array([positions] * slot_count, dtype=np.float64)
    assoc = np.array(
        [[topology.grid.cell_of(x, y) for x, y in positions]] * slot_count,
        dtype=np.int64,
    )
    return MobilityTrace(
        slot_duration_hours=slot_hours, positions_km=pos, associations=assoc
    )


def walking_trace(topology, waypoints_per_device, slot_hours=0.5):
    """Trace from explicit per-device position lists (one entry per slot)."""
    from proxymig.mobility import MobilityTrace

    slot_count = len(waypoints_per_device[0])
    pos = np.empty((slot_count, len(waypoints_per_device), 2), dtype=np.float64)
    for i, track in enumerate(waypoints_per_device):
        for t, (x, y) in enumerate(track):
            pos[t, i] = (x, y)
    assoc = np.array(
        [
            [topology.grid.cell_of(*pos[t, i]) for i in range(pos.shape[1])]
            for t in range(slot_count)
        ],
        dtype=np.int64,
    )
    return MobilityTrace(
        slot_duration_hours=slot_hours, positions_km=pos, associations=assoc
    )
