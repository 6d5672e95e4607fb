"""Run configuration: schema, defaults, validation, scenario assembly.

The config is a single JSON document whose keys follow the simulation
parameter table: `alpha` (W per utilization percent), `beta` (delay
offset, ms), `lambda` (delay coefficient, ms/km), `gamma` (delay
ceiling, ms), `delta_t_hours`, `rho_s` (static PM power, W), `epsilon`
(proxy VMs per PM), `pm_count`, and `g` (green supply per cloudlet, W).
Cloudlet capacity is pm_count * epsilon.

Every key has a default; unknown keys are rejected with their path.
The fully resolved document is echoed into each report, and feeding that
echo back as a config reproduces the run exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

from .mobility import (
    MobilityTrace,
    assign_utilizations,
    generate_synthetic,
    load_trace,
)
from .simulator import Scenario
from .topology import Cloudlet, Topology, build_grid, load_delay_matrix_csv

__all__ = ["ConfigError", "RunConfig", "DEFAULTS", "load_config", "resolve_config"]


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key path."""


DEFAULTS: dict[str, Any] = {
    "grid": {"rows": 5, "cols": 5, "cell_km": 1.0},
    "devices": 632,
    "slots": 12,
    "delta_t_hours": 0.5,
    "alpha": 0.2,
    "beta": 10.0,
    "lambda": 25.0,
    "gamma": 40.0,
    "rho_s": 80.0,
    "epsilon": 6,
    "pm_count": 5,
    "g": 600.0,
    "strategies": ["static", "lam", "eam"],
    "seeds": {"trace": 1, "utilization": 2},
    "speed_kmh": [3.0, 30.0],
    "trace_file": None,
    "delay_matrix_file": None,
    "output_dir": "reports",
    "solver": {
        "eam_exact_max_devices": 12,
        "eam_exact_max_cloudlets": 4,
        "move_cap": 10000,
    },
}

_STRATEGY_CHOICES = ("static", "lam", "eam")


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"{path}: {message}")


def _as_number(value, path, minimum=None, strict_min=None) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool), path,
             f"expected a number, got {value!r}")
    value = float(value)
    if minimum is not None:
        _require(value >= minimum, path, f"must be >= {minimum}")
    if strict_min is not None:
        _require(value > strict_min, path, f"must be > {strict_min}")
    return value


def _as_int(value, path, minimum=None) -> int:
    _require(isinstance(value, int) and not isinstance(value, bool), path,
             f"expected an integer, got {value!r}")
    if minimum is not None:
        _require(value >= minimum, path, f"must be >= {minimum}")
    return value


def _merged(user: dict, defaults: dict, path: str) -> dict:
    _require(isinstance(user, dict), path or "config", "expected an object")
    unknown = set(user) - set(defaults)
    if unknown:
        key = sorted(unknown)[0]
        where = f"{path}.{key}" if path else key
        raise ConfigError(f"{where}: unknown key")
    out = {}
    for key, default in defaults.items():
        sub_path = f"{path}.{key}" if path else key
        if isinstance(default, dict):
            out[key] = _merged(user.get(key, {}), default, sub_path)
        else:
            out[key] = user.get(key, default)
    return out


@dataclass(frozen=True)
class RunConfig:
    """A validated, fully resolved configuration."""

    resolved: dict

    def __getitem__(self, key):
        return self.resolved[key]

    def to_dict(self) -> dict:
        return json.loads(json.dumps(self.resolved))


def resolve_config(user: dict) -> RunConfig:
    """Merge user keys over the defaults and validate everything."""
    doc = _merged(user, DEFAULTS, "")

    _as_int(doc["grid"]["rows"], "grid.rows", minimum=1)
    _as_int(doc["grid"]["cols"], "grid.cols", minimum=1)
    doc["grid"]["cell_km"] = _as_number(doc["grid"]["cell_km"], "grid.cell_km", strict_min=0)
    _as_int(doc["devices"], "devices", minimum=1)
    _as_int(doc["slots"], "slots", minimum=1)
    doc["delta_t_hours"] = _as_number(doc["delta_t_hours"], "delta_t_hours", strict_min=0)
    doc["alpha"] = _as_number(doc["alpha"], "alpha", strict_min=0)
    doc["beta"] = _as_number(doc["beta"], "beta", minimum=0)
    doc["lambda"] = _as_number(doc["lambda"], "lambda", strict_min=0)
    doc["gamma"] = _as_number(doc["gamma"], "gamma", strict_min=0)
    doc["rho_s"] = _as_number(doc["rho_s"], "rho_s", strict_min=0)
    _as_int(doc["epsilon"], "epsilon", minimum=1)
    _as_int(doc["pm_count"], "pm_count", minimum=1)
    doc["g"] = _as_number(doc["g"], "g", minimum=0)

    strategies = doc["strategies"]
    _require(isinstance(strategies, list) and strategies, "strategies",
             "expected a non-empty list")
    for idx, name in enumerate(strategies):
        _require(name in _STRATEGY_CHOICES, f"strategies[{idx}]",
                 f"expected one of {_STRATEGY_CHOICES}, got {name!r}")

    _as_int(doc["seeds"]["trace"], "seeds.trace", minimum=0)
    _as_int(doc["seeds"]["utilization"], "seeds.utilization", minimum=0)

    speed = doc["speed_kmh"]
    _require(isinstance(speed, list) and len(speed) == 2, "speed_kmh",
             "expected [min, max]")
    lo = _as_number(speed[0], "speed_kmh[0]", minimum=0)
    hi = _as_number(speed[1], "speed_kmh[1]", minimum=0)
    _require(hi >= lo, "speed_kmh", "max must be >= min")
    doc["speed_kmh"] = [lo, hi]

    for key in ("trace_file", "delay_matrix_file"):
        _require(doc[key] is None or isinstance(doc[key], str), key,
                 "expected a path or null")
    _require(isinstance(doc["output_dir"], str), "output_dir", "expected a path")

    _as_int(doc["solver"]["eam_exact_max_devices"], "solver.eam_exact_max_devices", minimum=0)
    _as_int(doc["solver"]["eam_exact_max_cloudlets"], "solver.eam_exact_max_cloudlets", minimum=0)
    _as_int(doc["solver"]["move_cap"], "solver.move_cap", minimum=0)

    return RunConfig(resolved=doc)


def load_config(path) -> RunConfig:
    with open(path) as fh:
        try:
            user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(user, dict):
        raise ConfigError("config: expected a JSON object")
    return resolve_config(user)


def build_topology(config: RunConfig) -> Topology:
    doc = config.resolved
    template = Cloudlet(
        id=-1,
        position=(0.0, 0.0),
        pm_count=doc["pm_count"],
        vms_per_pm=doc["epsilon"],
        green_w=doc["g"],
        static_pm_power_w=doc["rho_s"],
        power_coeff_w_per_pct=doc["alpha"],
    )
    topology = build_grid(
        rows=doc["grid"]["rows"],
        cols=doc["grid"]["cols"],
        cell_km=doc["grid"]["cell_km"],
        cloudlet_template=template,
        delay_coeff_ms_per_km=doc["lambda"],
        delay_offset_ms=doc["beta"],
    )
    if doc["delay_matrix_file"]:
        matrix = load_delay_matrix_csv(
            doc["delay_matrix_file"], topology.bs_count, topology.cloudlet_count
        )
        topology = topology.with_delay_matrix(matrix)
    return topology


def build_trace(config: RunConfig, topology: Topology) -> MobilityTrace:
    doc = config.resolved
    if doc["trace_file"]:
        return load_trace(doc["trace_file"], topology, doc["delta_t_hours"])
    return generate_synthetic(
        seed=doc["seeds"]["trace"],
        device_count=doc["devices"],
        slot_count=doc["slots"],
        topology=topology,
        speed_kmh=tuple(doc["speed_kmh"]),
        slot_duration_hours=doc["delta_t_hours"],
    )


def build_scenario(config: RunConfig, strategy: str, topology=None, trace=None) -> Scenario:
    doc = config.resolved
    if topology is None:
        topology = build_topology(config)
    if trace is None:
        trace = build_trace(config, topology)
    devices = assign_utilizations(doc["seeds"]["utilization"], trace.device_count)
    echo = config.to_dict()
    echo["devices"] = trace.device_count
    return Scenario(
        topology=topology,
        trace=trace,
        devices=tuple(devices),
        strategy=strategy,
        gamma_ms=doc["gamma"],
        eam_exact_limit=(
            doc["solver"]["eam_exact_max_devices"],
            doc["solver"]["eam_exact_max_cloudlets"],
        ),
        move_cap=doc["solver"]["move_cap"],
        echo=echo,
    )
