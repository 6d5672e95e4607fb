#!/usr/bin/env python3
"""Benchmark the compiled solver kernels against the numpy reference.

Times the two hot kernels on the full-scale workload shape (25 BS/cloudlet
grid, 632 devices) and checks that both backends return identical results.

Usage: python3 benchmarks/bench_kernels.py [repeats]
"""

import sys
import time

import numpy as np

from proxymig import Cloudlet, assign_utilizations, build_grid, generate_synthetic
from proxymig.kernels import available_backends
from proxymig.strategies import build_energy_problem, shared_energy_model


def build_workload():
    template = Cloudlet(
        id=-1, position=(0.0, 0.0), pm_count=5, vms_per_pm=6, green_w=600.0
    )
    topology = build_grid(5, 5, 1.0, template, 25.0, 10.0)
    trace = generate_synthetic(seed=1, device_count=632, slot_count=12, topology=topology)
    devices = assign_utilizations(2, 632)
    model = shared_energy_model(topology, 0.5)

    transport_instances = []
    search_instances = []
    for slot in range(trace.slot_count):
        bs = trace.associations[slot]
        counts = np.bincount(bs, minlength=topology.bs_count).astype(np.int64)
        transport_instances.append(
            (topology.delay_matrix.copy(), counts, topology.capacities())
        )
        prob = build_energy_problem(slot, trace, topology, devices, 40.0, model)
        # start from the all-local assignment so both backends walk the
        # same descent from a nontrivial starting point
        assign = bs.astype(np.int64).copy()
        search_instances.append(
            (prob.loads, prob.feasible, prob.capacities, prob.greens, assign)
        )
    return transport_instances, search_instances


def time_backend(label, fn, instances, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = [fn(*args) for args in instances]
        best = min(best, time.perf_counter() - start)
    print(f"  {label:10s} {best * 1000:9.2f} ms")
    return best, result


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 3
    backends = available_backends()
    print(f"backends available: {', '.join(backends)}")
    transport_instances, search_instances = build_workload()

    print(f"\ntransportation: 12 slots of 25x25 groups, 632 devices, best of {repeats}")
    results = {}
    for name, mod in backends.items():
        results[name] = time_backend(name, mod.transportation, transport_instances, repeats)

    print(f"\nlocal search: 12 slots of 632 devices x 25 cloudlets, best of {repeats}")
    search_results = {}
    for name, mod in backends.items():
        def run_search(loads, feasible, caps, greens, assign, _mod=mod):
            work = assign.copy()
            moves = _mod.eam_local_search(
                loads, feasible, np.ones(len(loads), dtype=bool), caps, greens,
                work, 10_000,
            )
            return moves, work
        search_results[name] = time_backend(name, run_search, search_instances, repeats)

    if "compiled" in backends and "reference" in backends:
        t_ref, flows_ref = results["reference"]
        t_c, flows_c = results["compiled"]
        flows_equal = all(np.array_equal(a, b) for a, b in zip(flows_ref, flows_c))
        s_ref, out_ref = search_results["reference"]
        s_c, out_c = search_results["compiled"]
        search_equal = all(
            m1 == m2 and np.array_equal(a1, a2)
            for (m1, a1), (m2, a2) in zip(out_ref, out_c)
        )
        print(f"\nspeedup transportation: {t_ref / t_c:5.1f}x  (identical: {flows_equal})")
        print(f"speedup local search:   {s_ref / s_c:5.1f}x  (identical: {search_equal})")
        if not (flows_equal and search_equal):
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
