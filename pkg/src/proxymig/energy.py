"""Cloudlet power model.

A working PM draws a static floor plus a term proportional to the summed
CPU utilization of its hosted proxy VMs (utilization is in percent of one
CPU, so a PM with six VMs at 100% runs at a utilization sum of 600).

Two cloudlet-level demand models are provided:

* exact   -- working-PM count is ceil(vm_count / vms_per_pm), so partially
             filled PMs pay their full static floor;
* linear  -- the PM count is relaxed to vm_count / vms_per_pm, giving a
             per-VM cost of static/vms_per_pm + coeff * utilization. This
             is the form the energy-aware placement objective optimizes.

The linear model never exceeds the exact one; they agree exactly when the
VM count is a multiple of vms_per_pm. All values are average watts over a
slot; multiply by the slot duration for Wh. Everything here is a pure
function over immutable inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

__all__ = ["EnergyModel", "CloudletEnergyState", "on_grid_power"]


@dataclass(frozen=True)
class EnergyModel:
    static_pm_power_w: float
    power_coeff_w_per_pct: float
    vms_per_pm: int
    slot_duration_hours: float

    def __post_init__(self):
        if (
            self.static_pm_power_w <= 0
            or self.power_coeff_w_per_pct <= 0
            or self.vms_per_pm <= 0
            or self.slot_duration_hours <= 0
        ):
            raise ValueError("all energy model parameters must be strictly positive")

    def pm_power(self, utilization_sum_pct: float) -> float:
        """Power draw of one working PM, in watts."""
        if utilization_sum_pct < 0:
            raise ValueError("utilization sum must be non-negative")
        return self.static_pm_power_w + self.power_coeff_w_per_pct * utilization_sum_pct

    def per_vm_load_w(self, utilization_pct: float) -> float:
        """Relaxed per-VM power demand: static share plus dynamic term."""
        return (
            self.static_pm_power_w / self.vms_per_pm
            + self.power_coeff_w_per_pct * utilization_pct
        )

    def cloudlet_demand_exact_w(self, vm_utilizations_pct: Iterable[float]) -> float:
        """Demand with the ceiling PM count; 0 for an empty cloudlet.

        VMs fill PMs to capacity before a new PM opens; the result depends
        only on the VM count and the utilization sum.
        """
        utils = list(vm_utilizations_pct)
        if not utils:
            return 0.0
        pm_count = -(-len(utils) // self.vms_per_pm)
        return (
            pm_count * self.static_pm_power_w
            + self.power_coeff_w_per_pct * math.fsum(utils)
        )

    def cloudlet_demand_linear_w(self, vm_utilizations_pct: Iterable[float]) -> float:
        """Demand with the relaxed PM count; 0 for an empty cloudlet."""
        utils = list(vm_utilizations_pct)
        if not utils:
            return 0.0
        # Factored form (count*static)/vms_per_pm keeps the full-load case
        # exact in floating point; summing per-VM shares would drift an ulp.
        return (
            (len(utils) * self.static_pm_power_w) / self.vms_per_pm
            + self.power_coeff_w_per_pct * math.fsum(utils)
        )

    def energy_wh(self, power_w: float) -> float:
        return power_w * self.slot_duration_hours


def on_grid_power(demand_w: float, green_w: float) -> float:
    """Grid draw: the positive part of demand minus green supply.

    Surplus green energy is wasted, not banked, so the result is clamped
    at zero.
    """
    if demand_w < 0 or green_w < 0:
        raise ValueError("power values must be non-negative")
    return max(demand_w - green_w, 0.0)


@dataclass(frozen=True)
class CloudletEnergyState:
    """Per-slot energy picture of one cloudlet."""

    vm_count: int
    utilization_sum_pct: float
    demand_w: float
    green_w: float
    on_grid_w: float

    @classmethod
    def from_utilizations(
        cls,
        vm_utilizations_pct: Iterable[float],
        green_w: float,
        model: EnergyModel,
    ) -> "CloudletEnergyState":
        utils = list(vm_utilizations_pct)
        demand = model.cloudlet_demand_exact_w(utils)
        return cls(
            vm_count=len(utils),
            utilization_sum_pct=math.fsum(utils),
            demand_w=demand,
            green_w=green_w,
            on_grid_w=on_grid_power(demand, green_w),
        )
