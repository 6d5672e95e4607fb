"""Reference solver kernels (numpy).

Two hot loops live here: the successive-shortest-path transportation
solver used by the delay-optimal placement, and the best-improvement
local search used by the energy-aware placement heuristic. A Cython
twin of this module (proxymig.kernels._compiled) implements the exact
same algorithms with the same operation order and tie-breaking, so the
two backends produce bit-identical results; keep them in lockstep when
changing either.

Cost comparisons in the transportation solver treat differences below
EPS_COST as exact ties (resolved toward the lowest node index). This
keeps the chosen optimum stable when a delay matrix is rebuilt from the
same distances with a rescaled coefficient, where per-entry rounding
would otherwise flip genuinely tied alternatives.
"""

from __future__ import annotations

import numpy as np

EPS_COST = 1e-9
EPS_GAIN = 1e-9
_INF = float("inf")


def transportation(
    costs: np.ndarray, supply: np.ndarray, capacity: np.ndarray
) -> np.ndarray:
    """Min-cost integral flow from supply groups to capacitated sinks.

    costs is (m, n) float64, supply (m,) int64, capacity (n,) int64 with
    sum(supply) <= sum(capacity). Returns an (m, n) int64 flow matrix
    with row sums equal to supply and column sums at most capacity,
    minimizing total flow-weighted cost. Successive shortest augmenting
    paths with node potentials; integral because all augmentations are.
    """
    costs = np.ascontiguousarray(costs, dtype=np.float64)
    m, n = costs.shape
    rem_supply = np.array(supply, dtype=np.int64)
    rem_cap = np.array(capacity, dtype=np.int64)
    if rem_supply.sum() > rem_cap.sum():
        raise ValueError("total supply exceeds total capacity")

    flow = np.zeros((m, n), dtype=np.int64)
    pot_g = np.zeros(m, dtype=np.float64)
    pot_s = np.zeros(n, dtype=np.float64)
    remaining = int(rem_supply.sum())

    while remaining > 0:
        dist_g = np.where(rem_supply > 0, 0.0, _INF)
        dist_s = np.full(n, _INF)
        parent_s = np.full(n, -1, dtype=np.int64)  # group feeding sink k
        parent_g = np.full(m, -1, dtype=np.int64)  # sink feeding group j, -1 = root
        done_g = np.zeros(m, dtype=bool)
        done_s = np.zeros(n, dtype=bool)

        for _ in range(m + n):
            node, is_group = _pick_node(dist_g, done_g, dist_s, done_s)
            if node < 0:
                break
            if is_group:
                j = node
                done_g[j] = True
                # forward arcs j -> every sink
                nd = dist_g[j] + ((costs[j] + pot_g[j]) - pot_s)
                better = ~done_s & (nd < dist_s - EPS_COST)
                dist_s[better] = nd[better]
                parent_s[better] = j
            else:
                k = node
                done_s[k] = True
                # residual arcs k -> groups routing flow into k
                nd = dist_s[k] + ((pot_s[k] - pot_g) - costs[:, k])
                better = ~done_g & (flow[:, k] > 0) & (nd < dist_g - EPS_COST)
                dist_g[better] = nd[better]
                parent_g[better] = k

        target, target_dist = _pick_target(dist_s, rem_cap)
        if target < 0:
            raise RuntimeError("no augmenting path despite spare capacity")

        # bottleneck along the augmenting path
        amount = int(rem_cap[target])
        k = target
        while True:
            j = int(parent_s[k])
            k_prev = int(parent_g[j])
            if k_prev < 0:
                amount = min(amount, int(rem_supply[j]))
                break
            amount = min(amount, int(flow[j, k_prev]))
            k = k_prev
        k = target
        while True:
            j = int(parent_s[k])
            flow[j, k] += amount
            k_prev = int(parent_g[j])
            if k_prev < 0:
                rem_supply[j] -= amount
                break
            flow[j, k_prev] -= amount
            k = k_prev
        rem_cap[target] -= amount
        remaining -= amount

        pot_g += np.minimum(dist_g, target_dist)
        pot_s += np.minimum(dist_s, target_dist)

    return flow


def _pick_node(dist_g, done_g, dist_s, done_s):
    """Lowest-distance unfinished node; EPS ties go to groups, then lower ids."""
    best = _INF
    for j in range(dist_g.shape[0]):
        if not done_g[j] and dist_g[j] < best:
            best = dist_g[j]
    for k in range(dist_s.shape[0]):
        if not done_s[k] and dist_s[k] < best:
            best = dist_s[k]
    if best == _INF:
        return -1, False
    thresh = best + EPS_COST
    for j in range(dist_g.shape[0]):
        if not done_g[j] and dist_g[j] < thresh:
            return j, True
    for k in range(dist_s.shape[0]):
        if not done_s[k] and dist_s[k] < thresh:
            return k, False
    return -1, False


def _pick_target(dist_s, rem_cap):
    """Nearest sink with spare capacity; EPS ties go to the lowest id."""
    best = _INF
    for k in range(dist_s.shape[0]):
        if rem_cap[k] > 0 and dist_s[k] < best:
            best = dist_s[k]
    if best == _INF:
        return -1, _INF
    thresh = best + EPS_COST
    for k in range(dist_s.shape[0]):
        if rem_cap[k] > 0 and dist_s[k] < thresh:
            return k, best
    return -1, _INF


def eam_local_search(
    loads: np.ndarray,
    feasible: np.ndarray,
    movable: np.ndarray,
    capacity: np.ndarray,
    green: np.ndarray,
    assign: np.ndarray,
    move_cap: int,
) -> int:
    """Best-improvement descent on the rectified on-grid objective.

    Single-device relocations are scanned first; while any strictly
    improves, the best one is applied. Pairwise swaps are scanned only
    when no relocation improves, and any applied swap returns control to
    the relocation phase. The search stops when neither neighborhood
    improves the objective or `move_cap` moves were applied, so the
    result is a local optimum of the combined move/swap neighborhood.
    A move counts as improving only below -EPS_GAIN: zero-delta moves
    between over-supplied cloudlets otherwise read as ~-1e-13 under
    float rounding and the search would churn on noise forever.
    Ties break toward the lowest scan index (devices in id order, then
    target cloudlet / partner id). `assign` is modified in place;
    devices with movable=0 are pinned. Returns the number of moves.
    """
    loads = np.asarray(loads, dtype=np.float64)
    green = np.asarray(green, dtype=np.float64)
    feasible = np.asarray(feasible, dtype=bool)
    movable = np.asarray(movable, dtype=bool)
    n_dev = loads.shape[0]
    n_cl = green.shape[0]

    cl_load = np.zeros(n_cl, dtype=np.float64)
    cl_count = np.zeros(n_cl, dtype=np.int64)
    for i in range(n_dev):  # fixed accumulation order, mirrored in the C twin
        cl_load[assign[i]] += loads[i]
        cl_count[assign[i]] += 1

    moves = 0
    dev_idx = np.arange(n_dev)
    upper = np.triu(np.ones((n_dev, n_dev), dtype=bool), k=1)
    movable_pair = movable[:, None] & movable[None, :]
    while moves < move_cap:
        la = cl_load[assign]
        ga = green[assign]
        rect_a = np.maximum(la - ga, 0.0)

        # single relocations: device i -> cloudlet b
        gain = np.maximum((la - loads) - ga, 0.0) - rect_a
        add = np.maximum((cl_load[None, :] + loads[:, None]) - green[None, :], 0.0)
        add -= np.maximum(cl_load - green, 0.0)[None, :]
        delta1 = add + gain[:, None]
        valid1 = movable[:, None] & feasible & (cl_count < capacity)[None, :]
        valid1[dev_idx, assign] = False
        delta1[~valid1] = _INF
        flat1 = int(np.argmin(delta1))
        best1 = float(delta1.flat[flat1])

        if best1 < -EPS_GAIN:
            i, b = divmod(flat1, n_cl)
            a = int(assign[i])
            cl_load[a] = cl_load[a] - loads[i]
            cl_load[b] = cl_load[b] + loads[i]
            cl_count[a] -= 1
            cl_count[b] += 1
            assign[i] = b
            moves += 1
            continue

        # pairwise swaps: i in a, j in b exchange cloudlets (i < j)
        half = np.maximum(((la - loads)[:, None] + loads[None, :]) - ga[:, None], 0.0)
        half -= rect_a[:, None]
        delta2 = half + half.T
        cross = feasible[:, assign]  # cross[i, j] = feasible[i, assign[j]]
        swap_ok = (
            upper
            & movable_pair
            & (assign[:, None] != assign[None, :])
            & cross
            & cross.T
        )
        delta2[~swap_ok] = _INF
        flat2 = int(np.argmin(delta2))
        best2 = float(delta2.flat[flat2])

        if not best2 < -EPS_GAIN:
            break
        i, j = divmod(flat2, n_dev)
        a = int(assign[i])
        b = int(assign[j])
        cl_load[a] = (cl_load[a] - loads[i]) + loads[j]
        cl_load[b] = (cl_load[b] - loads[j]) + loads[i]
        assign[i] = b
        assign[j] = a
        moves += 1

    return moves
