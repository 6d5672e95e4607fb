"""proxymig: proxy-VM placement and migration across edge cloudlets.

A time-slotted simulator with three placement policies (static, lam,
eam), exact and heuristic solvers for the underlying capacitated
assignment problems, and the metric suite to compare them.
"""

from .energy import CloudletEnergyState, EnergyModel, on_grid_power
from .mobility import (
    Device,
    MobilityTrace,
    assign_utilizations,
    filter_qualified,
    generate_synthetic,
    load_trace,
    save_trace,
)
from .optimizer import (
    Assignment,
    AssignmentProblem,
    InfeasibleError,
    ObjectiveKind,
    SolveStatus,
    brute_force,
    solve_eam_exact,
    solve_eam_heuristic,
    solve_transportation,
)
from .topology import BaseStation, Cloudlet, GridSpec, Topology, build_grid

__version__ = "0.1.0"
