import numpy as np
import pytest

from proxymig import build_grid
from proxymig.mobility import (
    Device,
    TraceFormatError,
    assign_utilizations,
    filter_qualified,
    generate_synthetic,
    load_trace,
    save_trace,
)

from conftest import make_template


@pytest.fixture(scope="module")
def grid2():
    return build_grid(2, 2, 1.0, make_template(), 25.0, 10.0)


def _write_trace(path, rows):
    path.write_text("slot,device_id,x_km,y_km\n" + "\n".join(rows) + "\n")


def test_load_trace_basic(tmp_path, grid2):
    path = tmp_path / "trace.csv"
    _write_trace(
        path,
        [
            "0,7,0.5,0.5", "0,9,0.2,0.2",
            "1,7,0.5,0.5", "1,9,0.3,0.3",
            "2,7,0.5,0.5", "2,9,0.4,0.4",
        ],
    )
    trace = load_trace(path, grid2)
    assert trace.slot_count == 3
    assert trace.device_count == 2  # ids re-indexed densely
    assert (trace.associations == 0).all()


def test_cell_containment(grid2):
    trace = generate_synthetic(3, 4, 2, grid2)
    # recompute every association from the raw position
    for t in range(trace.slot_count):
        for i in range(trace.device_count):
            x, y = trace.positions_km[t, i]
            assert trace.associations[t, i] == grid2.grid.cell_of(x, y)


def test_position_maps_to_expected_cell(grid5):
    assert grid5.grid.cell_of(1.5, 0.5) == 1


@pytest.mark.parametrize(
    "rows,message",
    [
        (["0,1,0.5"], "malformed"),
        (["0,1,9.5,0.5"], "outside"),
        (["0,1,0.5,0.5", "1,1,0.5,0.5", "1,2,0.5,0.5"], "missing from slot"),
        (["0,1,0.5,0.5", "2,1,0.5,0.5"], "contiguous"),
        (["0,1,0.5,0.5", "0,1,0.6,0.5"], "duplicate"),
    ],
)
def test_load_trace_errors(tmp_path, grid2, rows, message):
    path = tmp_path / "trace.csv"
    _write_trace(path, rows)
    with pytest.raises(TraceFormatError, match=message):
        load_trace(path, grid2)


def test_full_scale_trace_shape(tmp_path, grid5, default_trace):
    path = tmp_path / "full.csv"
    save_trace(default_trace, path)
    loaded = load_trace(path, grid5)
    assert loaded.slot_count == 12
    assert loaded.device_count == 632


def test_save_load_round_trip_bit_exact(tmp_path, grid2):
    trace = generate_synthetic(11, 9, 5, grid2)
    path = tmp_path / "rt.csv"
    save_trace(trace, path)
    loaded = load_trace(path, grid2)
    assert np.array_equal(loaded.positions_km, trace.positions_km)
    assert np.array_equal(loaded.associations, trace.associations)


def test_filter_qualified_identity(grid2):
    trace = generate_synthetic(5, 6, 4, grid2)
    kept = filter_qualified(trace, (0.0, 0.0, 2.0, 2.0))
    assert np.array_equal(kept.positions_km, trace.positions_km)


def test_filter_drops_leaving_device(grid2):
    from conftest import walking_trace

    tracks = [
        [(0.5, 0.5)] * 5,
        [(0.5, 0.5), (0.5, 0.5), (0.5, 0.5), (1.7, 0.5), (0.5, 0.5)],
    ]
    trace = walking_trace(grid2, tracks)
    kept = filter_qualified(trace, (0.0, 0.0, 1.0, 1.0))
    assert kept.device_count == 1
    assert (kept.positions_km[:, 0, 0] == 0.5).all()


def test_filter_matches_bruteforce_recount(grid5):
    trace = generate_synthetic(21, 120, 8, grid5)
    area = (1.0, 1.0, 4.0, 4.0)
    kept = filter_qualified(trace, area)
    expected = 0
    for i in range(trace.device_count):
        inside = True
        for t in range(trace.slot_count):
            x, y = trace.positions_km[t, i]
            if not (1.0 <= x <= 4.0 and 1.0 <= y <= 4.0):
                inside = False
                break
        if inside:
            expected += 1
    assert kept.device_count == expected


def test_filter_idempotent(grid5):
    trace = generate_synthetic(22, 60, 6, grid5)
    area = (0.5, 0.5, 4.5, 4.5)
    once = filter_qualified(trace, area)
    twice = filter_qualified(once, area)
    assert np.array_equal(once.positions_km, twice.positions_km)


def test_exactly_one_bs_per_slot(grid5, default_trace):
    assert default_trace.associations.shape == (12, 632)
    assert (default_trace.associations >= 0).all()
    assert (default_trace.associations < grid5.bs_count).all()


def test_zero_speed_is_stationary(grid2):
    trace = generate_synthetic(4, 5, 6, grid2, speed_kmh=(0.0, 0.0))
    for t in range(1, 6):
        assert np.array_equal(trace.positions_km[t], trace.positions_km[0])
        assert np.array_equal(trace.associations[t], trace.associations[0])


def test_generation_deterministic(grid2):
    a = generate_synthetic(17, 20, 6, grid2)
    b = generate_synthetic(17, 20, 6, grid2)
    assert np.array_equal(a.positions_km, b.positions_km)


def test_default_scenario_has_mobility(default_trace):
    changes = (default_trace.associations[1:] != default_trace.associations[:-1]).sum()
    assert changes > 0


def test_generation_validation(grid2):
    with pytest.raises(ValueError):
        generate_synthetic(1, 0, 5, grid2)
    with pytest.raises(ValueError):
        generate_synthetic(1, 5, 5, grid2, speed_kmh=(5.0, 1.0))


def test_utilizations_in_range():
    devices = assign_utilizations(3, 1000)
    assert len(devices) == 1000
    assert all(20.0 <= d.utilization_pct <= 100.0 for d in devices)


def test_utilizations_deterministic():
    a = assign_utilizations(3, 50)
    b = assign_utilizations(3, 50)
    assert [d.utilization_pct for d in a] == [d.utilization_pct for d in b]


def test_utilization_mean():
    devices = assign_utilizations(123, 100_000)
    mean = np.mean([d.utilization_pct for d in devices])
    assert abs(mean - 60.0) < 1.0


def test_device_validation():
    with pytest.raises(ValueError):
        Device(id=0, utilization_pct=0.0)
    with pytest.raises(ValueError):
        Device(id=0, utilization_pct=101.0)
