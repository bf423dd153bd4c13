"""Numba event loop for the disordered ring.

Mirrors the pure-Python stepper exactly: same splitmix64 stream, same draw
order (waiting time first, bond selection second), same rate-tree layout, so
trajectories from the two implementations are bit-identical given a seed.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
_MIX_B = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0

STATUS_OK = 0
STATUS_JAMMED = 1


@njit(cache=True, nogil=True, inline="always")
def _sm_next(state):
    state = state + _GOLDEN
    z = state
    z = (z ^ (z >> np.uint64(30))) * _MIX_A
    z = (z ^ (z >> np.uint64(27))) * _MIX_B
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True, nogil=True, inline="always")
def _set_leaf(tree, padded, i, val):
    k = padded + i
    tree[k] = val
    k >>= 1
    while k >= 1:
        tree[k] = tree[2 * k] + tree[2 * k + 1]
        k >>= 1


@njit(cache=True, nogil=True, inline="always")
def _tree_sample(tree, padded, size, target):
    k = 1
    while k < padded:
        left = tree[2 * k]
        if target < left:
            k = 2 * k
        else:
            target -= left
            k = 2 * k + 1
    idx = k - padded
    if tree[k] <= 0.0:
        for step in range(1, size + 1):
            cand = (idx + step) % size
            if tree[padded + cand] > 0.0:
                return cand
    return idx


@njit(cache=True, nogil=True)
def _build_tree(occ, rates):
    n = occ.size
    padded = 1
    while padded < n:
        padded *= 2
    tree = np.zeros(2 * padded, dtype=np.float64)
    for i in range(n):
        nxt = i + 1 if i + 1 < n else 0
        if occ[i] == 1 and occ[nxt] == 0:
            tree[padded + i] = rates[i]
    for k in range(padded - 1, 0, -1):
        tree[k] = tree[2 * k] + tree[2 * k + 1]
    return tree, padded


@njit(cache=True, nogil=True)
def run_gillespie(occ, rates, seed, burn_in, window, n_batches):
    """Advance the ring through burn_in then a counting window.

    Mutates occ in place.  Returns (batch_counts, bond_counts, events,
    clock, status): crossings per time batch summed over all bonds, per-bond
    crossings over the window, total counted events, the final clock, and a
    status flag (STATUS_JAMMED when the total rate hits zero).
    """
    n = occ.size
    tree, padded = _build_tree(occ, rates)
    state = np.uint64(seed)
    clock = 0.0
    t_stop = burn_in + window
    batch_dt = window / n_batches
    batch_counts = np.zeros(n_batches, dtype=np.int64)
    bond_counts = np.zeros(n, dtype=np.int64)
    events = np.int64(0)
    status = STATUS_OK

    while True:
        total = tree[1]
        if total <= 0.0:
            status = STATUS_JAMMED
            break
        state, z = _sm_next(state)
        u1 = (z >> np.uint64(11)) * _INV53
        clock += -np.log1p(-u1) / total
        if clock >= t_stop:
            break
        state, z = _sm_next(state)
        u2 = (z >> np.uint64(11)) * _INV53
        sel = _tree_sample(tree, padded, n, u2 * total)

        nxt = sel + 1 if sel + 1 < n else 0
        occ[sel] = 0
        occ[nxt] = 1
        prev = sel - 1 if sel >= 1 else n - 1
        for b in (prev, sel, nxt):
            bn = b + 1 if b + 1 < n else 0
            if occ[b] == 1 and occ[bn] == 0:
                _set_leaf(tree, padded, b, rates[b])
            else:
                _set_leaf(tree, padded, b, 0.0)

        if clock >= burn_in:
            k = int((clock - burn_in) / batch_dt)
            if k >= n_batches:
                k = n_batches - 1
            batch_counts[k] += 1
            bond_counts[sel] += 1
            events += 1

    return batch_counts, bond_counts, events, clock, status


@njit(cache=True, nogil=True)
def run_events(occ, rates, seed, n_events, bonds_out, times_out):
    """Run exactly n_events events, recording (bond, time) per event."""
    n = occ.size
    tree, padded = _build_tree(occ, rates)
    state = np.uint64(seed)
    clock = 0.0
    for e in range(n_events):
        total = tree[1]
        if total <= 0.0:
            return STATUS_JAMMED
        state, z = _sm_next(state)
        u1 = (z >> np.uint64(11)) * _INV53
        clock += -np.log1p(-u1) / total
        state, z = _sm_next(state)
        u2 = (z >> np.uint64(11)) * _INV53
        sel = _tree_sample(tree, padded, n, u2 * total)

        nxt = sel + 1 if sel + 1 < n else 0
        occ[sel] = 0
        occ[nxt] = 1
        prev = sel - 1 if sel >= 1 else n - 1
        for b in (prev, sel, nxt):
            bn = b + 1 if b + 1 < n else 0
            if occ[b] == 1 and occ[bn] == 0:
                _set_leaf(tree, padded, b, rates[b])
            else:
                _set_leaf(tree, padded, b, 0.0)
        bonds_out[e] = sel
        times_out[e] = clock
    return STATUS_OK
