# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled solver kernels.

Cython twin of proxymig.kernels.reference: the same successive-shortest-
path transportation solver and best-improvement local search, with the
same operation order, epsilon handling, and tie-breaking, so results are
bit-identical to the reference backend. Keep the two in lockstep.
"""

import numpy as np

cdef double EPS_COST = 1e-9
cdef double EPS_GAIN = 1e-9
cdef double INF = float("inf")


cdef inline double _pos(double x):
    return x if x > 0.0 else 0.0


def transportation(costs_in, supply_in, capacity_in):
    """See proxymig.kernels.reference.transportation."""
    costs_arr = np.ascontiguousarray(costs_in, dtype=np.float64)
    cdef const double[:, ::1] costs = costs_arr
    cdef Py_ssize_t m = costs.shape[0]
    cdef Py_ssize_t n = costs.shape[1]

    rem_supply_arr = np.array(supply_in, dtype=np.int64)
    rem_cap_arr = np.array(capacity_in, dtype=np.int64)
    cdef long long[::1] rem_supply = rem_supply_arr
    cdef long long[::1] rem_cap = rem_cap_arr
    if rem_supply_arr.sum() > rem_cap_arr.sum():
        raise ValueError("total supply exceeds total capacity")

    flow_arr = np.zeros((m, n), dtype=np.int64)
    cdef long long[:, ::1] flow = flow_arr
    pot_g_arr = np.zeros(m, dtype=np.float64)
    pot_s_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] pot_g = pot_g_arr
    cdef double[::1] pot_s = pot_s_arr

    dist_g_arr = np.empty(m, dtype=np.float64)
    dist_s_arr = np.empty(n, dtype=np.float64)
    parent_s_arr = np.empty(n, dtype=np.int64)
    parent_g_arr = np.empty(m, dtype=np.int64)
    done_g_arr = np.empty(m, dtype=np.uint8)
    done_s_arr = np.empty(n, dtype=np.uint8)
    cdef double[::1] dist_g = dist_g_arr
    cdef double[::1] dist_s = dist_s_arr
    cdef long long[::1] parent_s = parent_s_arr
    cdef long long[::1] parent_g = parent_g_arr
    cdef unsigned char[::1] done_g = done_g_arr
    cdef unsigned char[::1] done_s = done_s_arr

    cdef long long remaining = rem_supply_arr.sum()
    cdef Py_ssize_t j, k, step, node, target, k_prev
    cdef bint is_group
    cdef double nd, best, thresh, target_dist
    cdef long long amount

    while remaining > 0:
        for j in range(m):
            dist_g[j] = 0.0 if rem_supply[j] > 0 else INF
            parent_g[j] = -1
            done_g[j] = 0
        for k in range(n):
            dist_s[k] = INF
            parent_s[k] = -1
            done_s[k] = 0

        for step in range(m + n):
            # lowest-distance unfinished node; EPS ties: groups, then low ids
            best = INF
            for j in range(m):
                if not done_g[j] and dist_g[j] < best:
                    best = dist_g[j]
            for k in range(n):
                if not done_s[k] and dist_s[k] < best:
                    best = dist_s[k]
            if best == INF:
                break
            thresh = best + EPS_COST
            node = -1
            is_group = False
            for j in range(m):
                if not done_g[j] and dist_g[j] < thresh:
                    node = j
                    is_group = True
                    break
            if node < 0:
                for k in range(n):
                    if not done_s[k] and dist_s[k] < thresh:
                        node = k
                        break
            if node < 0:
                break

            if is_group:
                j = node
                done_g[j] = 1
                for k in range(n):
                    if done_s[k]:
                        continue
                    nd = dist_g[j] + ((costs[j, k] + pot_g[j]) - pot_s[k])
                    if nd < dist_s[k] - EPS_COST:
                        dist_s[k] = nd
                        parent_s[k] = j
            else:
                k = node
                done_s[k] = 1
                for j in range(m):
                    if done_g[j] or flow[j, k] <= 0:
                        continue
                    nd = dist_s[k] + ((pot_s[k] - pot_g[j]) - costs[j, k])
                    if nd < dist_g[j] - EPS_COST:
                        dist_g[j] = nd
                        parent_g[j] = k

        # nearest sink with spare capacity; EPS ties to the lowest id
        best = INF
        for k in range(n):
            if rem_cap[k] > 0 and dist_s[k] < best:
                best = dist_s[k]
        if best == INF:
            raise RuntimeError("no augmenting path despite spare capacity")
        target_dist = best
        thresh = best + EPS_COST
        target = -1
        for k in range(n):
            if rem_cap[k] > 0 and dist_s[k] < thresh:
                target = k
                break

        amount = rem_cap[target]
        k = target
        while True:
            j = parent_s[k]
            k_prev = parent_g[j]
            if k_prev < 0:
                if rem_supply[j] < amount:
                    amount = rem_supply[j]
                break
            if flow[j, k_prev] < amount:
                amount = flow[j, k_prev]
            k = k_prev
        k = target
        while True:
            j = parent_s[k]
            flow[j, k] += amount
            k_prev = parent_g[j]
            if k_prev < 0:
                rem_supply[j] -= amount
                break
            flow[j, k_prev] -= amount
            k = k_prev
        rem_cap[target] -= amount
        remaining -= amount

        for j in range(m):
            pot_g[j] += dist_g[j] if dist_g[j] < target_dist else target_dist
        for k in range(n):
            pot_s[k] += dist_s[k] if dist_s[k] < target_dist else target_dist

    return flow_arr


def eam_local_search(loads_in, feasible_in, movable_in, capacity_in, green_in,
                     assign_in, move_cap):
    """See proxymig.kernels.reference.eam_local_search."""
    loads_arr = np.ascontiguousarray(loads_in, dtype=np.float64)
    feasible_arr = np.ascontiguousarray(
        np.asarray(feasible_in, dtype=bool), dtype=np.uint8
    )
    movable_arr = np.ascontiguousarray(
        np.asarray(movable_in, dtype=bool), dtype=np.uint8
    )
    capacity_arr = np.ascontiguousarray(capacity_in, dtype=np.int64)
    green_arr = np.ascontiguousarray(green_in, dtype=np.float64)

    cdef const double[::1] loads = loads_arr
    cdef const unsigned char[:, ::1] feasible = feasible_arr
    cdef const unsigned char[::1] movable = movable_arr
    cdef const long long[::1] capacity = capacity_arr
    cdef const double[::1] green = green_arr
    cdef long long[::1] assign = assign_in

    cdef Py_ssize_t n_dev = loads.shape[0]
    cdef Py_ssize_t n_cl = green.shape[0]

    cl_load_arr = np.zeros(n_cl, dtype=np.float64)
    cl_count_arr = np.zeros(n_cl, dtype=np.int64)
    cdef double[::1] cl_load = cl_load_arr
    cdef long long[::1] cl_count = cl_count_arr

    cdef Py_ssize_t i, j, a, b
    for i in range(n_dev):
        cl_load[assign[i]] += loads[i]
        cl_count[assign[i]] += 1

    cdef long long moves = 0
    cdef long long cap_moves = move_cap
    cdef double la, ga, gain, add, delta, best1, best2, half_ij, half_ji, w
    cdef Py_ssize_t bi1, bb1, bi2, bj2

    while moves < cap_moves:
        # single relocations: device i -> cloudlet b
        best1 = INF
        bi1 = -1
        bb1 = -1
        for i in range(n_dev):
            if not movable[i]:
                continue
            a = assign[i]
            w = loads[i]
            la = cl_load[a]
            ga = green[a]
            gain = _pos((la - w) - ga) - _pos(la - ga)
            for b in range(n_cl):
                if b == a or not feasible[i, b] or cl_count[b] >= capacity[b]:
                    continue
                add = _pos((cl_load[b] + w) - green[b]) - _pos(cl_load[b] - green[b])
                delta = add + gain
                if delta < best1:
                    best1 = delta
                    bi1 = i
                    bb1 = b

        if best1 < -EPS_GAIN:
            i = bi1
            b = bb1
            a = assign[i]
            cl_load[a] = cl_load[a] - loads[i]
            cl_load[b] = cl_load[b] + loads[i]
            cl_count[a] -= 1
            cl_count[b] += 1
            assign[i] = b
            moves += 1
            continue

        # pairwise swaps: i in a, j in b exchange cloudlets (i < j)
        best2 = INF
        bi2 = -1
        bj2 = -1
        for i in range(n_dev):
            if not movable[i]:
                continue
            a = assign[i]
            la = cl_load[a]
            ga = green[a]
            for j in range(i + 1, n_dev):
                if not movable[j]:
                    continue
                b = assign[j]
                if a == b or not feasible[i, b] or not feasible[j, a]:
                    continue
                half_ij = _pos(((la - loads[i]) + loads[j]) - ga) - _pos(la - ga)
                half_ji = (
                    _pos(((cl_load[b] - loads[j]) + loads[i]) - green[b])
                    - _pos(cl_load[b] - green[b])
                )
                delta = half_ij + half_ji
                if delta < best2:
                    best2 = delta
                    bi2 = i
                    bj2 = j

        if not best2 < -EPS_GAIN:
            break
        i = bi2
        j = bj2
        a = assign[i]
        b = assign[j]
        cl_load[a] = (cl_load[a] - loads[i]) + loads[j]
        cl_load[b] = (cl_load[b] - loads[j]) + loads[i]
        assign[i] = b
        assign[j] = a
        moves += 1

    return int(moves)
