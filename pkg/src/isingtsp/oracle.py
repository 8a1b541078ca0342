"""Reference solvers used to validate the macro model.

Exact: Held-Karp dynamic programming (cycle and fixed-endpoint path) and
vectorized enumeration of every ordering.  Heuristic baselines: nearest
neighbour and 2-opt.
"""

from __future__ import annotations

import numpy as np

from .distance import DistanceMatrix

HELD_KARP_MAX_N = 20
BRUTE_FORCE_MAX_N = 11


def _held_karp_core(d: np.ndarray, start: int, inner: list[int]):
    """DP over subsets of ``inner``: best path from ``start`` through S ending at j.

    Returns (cost, parent) tables indexed [mask, j] with j local to ``inner``.
    """
    m = len(inner)
    size = 1 << m
    inner_arr = np.asarray(inner)
    dd = d[np.ix_(inner_arr, inner_arr)].astype(np.int64)
    big = np.iinfo(np.int64).max // 4
    cost = np.full((size, m), big, dtype=np.int64)
    parent = np.full((size, m), -1, dtype=np.int8)
    for j in range(m):
        cost[1 << j, j] = d[start, inner[j]]

    masks = np.arange(size)
    popcount = np.zeros(size, dtype=np.int64)
    for j in range(m):
        popcount += (masks >> j) & 1

    for k in range(2, m + 1):
        level = masks[popcount == k]
        for j in range(m):
            bit = 1 << j
            s = level[(level & bit) != 0]
            prev = s ^ bit
            cand = cost[prev] + dd[:, j][None, :]  # (len(s), m): arrive at j from i
            best = np.argmin(cand, axis=1)
            cost[s, j] = cand[np.arange(len(s)), best]
            parent[s, j] = best
    return cost, parent


def _unwind(parent: np.ndarray, mask: int, last: int, inner: list[int]) -> list[int]:
    seq = []
    while last >= 0:
        seq.append(inner[last])
        prev = int(parent[mask, last])
        mask ^= 1 << last
        last = prev
    seq.reverse()
    return seq


def held_karp_cycle(dm: DistanceMatrix) -> tuple[int, np.ndarray]:
    """Exact shortest Hamiltonian cycle; the tour starts at node 0."""
    n = dm.n
    if not 3 <= n <= HELD_KARP_MAX_N:
        raise ValueError(f"held_karp_cycle needs 3 <= n <= {HELD_KARP_MAX_N}, got {n}")
    d = dm.d
    inner = list(range(1, n))
    cost, parent = _held_karp_core(d, 0, inner)
    full = (1 << len(inner)) - 1
    closing = cost[full] + d[inner, 0]
    last = int(np.argmin(closing))
    tour = [0] + _unwind(parent, full, last, inner)
    return int(closing[last]), np.array(tour, dtype=np.int64)


def held_karp_path(dm: DistanceMatrix, entry: int, exit: int) -> tuple[int, np.ndarray]:
    """Exact shortest Hamiltonian path from ``entry`` to ``exit``."""
    n = dm.n
    if not 2 <= n <= HELD_KARP_MAX_N:
        raise ValueError(f"held_karp_path needs 2 <= n <= {HELD_KARP_MAX_N}, got {n}")
    if entry == exit:
        raise ValueError("entry and exit must differ")
    d = dm.d
    if n == 2:
        return int(d[entry, exit]), np.array([entry, exit], dtype=np.int64)
    inner = [c for c in range(n) if c not in (entry, exit)]
    cost, parent = _held_karp_core(d, entry, inner)
    full = (1 << len(inner)) - 1
    closing = cost[full] + d[inner, exit]
    last = int(np.argmin(closing))
    path = [entry] + _unwind(parent, full, last, inner) + [exit]
    return int(closing[last]), np.array(path, dtype=np.int64)


def all_permutations(items) -> np.ndarray:
    """Every ordering of ``items`` as rows, built by repeated insertion."""
    items = list(items)
    perms = np.zeros((1, 0), dtype=np.int64)
    for k, item in enumerate(items):
        blocks = [np.insert(perms, pos, item, axis=1) for pos in range(k + 1)]
        perms = np.concatenate(blocks)
    return perms


def _best_path(d: np.ndarray, perms: np.ndarray) -> tuple[int, np.ndarray]:
    lengths = d[perms[:, :-1], perms[:, 1:]].sum(axis=1)
    best = int(np.argmin(lengths))
    return int(lengths[best]), perms[best].copy()


def brute_force_cycle(dm: DistanceMatrix) -> tuple[int, np.ndarray]:
    """Enumerate all (n-1)! orderings of the cities after node 0."""
    n = dm.n
    if not 3 <= n <= BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute_force_cycle needs 3 <= n <= {BRUTE_FORCE_MAX_N}, got {n}")
    inner = all_permutations(range(1, n))
    ring = np.column_stack([np.zeros(len(inner), np.int64), inner, np.zeros(len(inner), np.int64)])
    length, best = _best_path(dm.d, ring)
    return length, best[:-1]


def brute_force_path(dm: DistanceMatrix, entry: int, exit: int) -> tuple[int, np.ndarray]:
    n = dm.n
    if not 2 <= n <= BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute_force_path needs 2 <= n <= {BRUTE_FORCE_MAX_N}, got {n}")
    inner = all_permutations([c for c in range(n) if c not in (entry, exit)])
    rows = len(inner)
    full = np.column_stack([np.full(rows, entry, np.int64), inner, np.full(rows, exit, np.int64)])
    return _best_path(dm.d, full)


def nearest_neighbor(dm: DistanceMatrix, start: int = 0) -> np.ndarray:
    """Greedy construction; ties go to the lowest city index."""
    n = dm.n
    d = dm.d
    visited = np.zeros(n, dtype=bool)
    tour = np.empty(n, dtype=np.int64)
    cur = start
    for k in range(n):
        tour[k] = cur
        visited[cur] = True
        if k == n - 1:
            break
        row = np.where(visited, np.iinfo(np.int64).max, d[cur])
        cur = int(np.argmin(row))
    return tour


def two_opt(dm: DistanceMatrix, tour) -> np.ndarray:
    """First-improvement 2-opt on a cyclic tour, run to local optimality.

    Positions are scanned in ascending (i, j) order; the scan continues
    after each applied move and repeats until a full pass finds nothing.
    """
    d = dm.d
    t = np.array(tour, dtype=np.int64)
    n = len(t)
    if n < 4:
        return t
    improved = True
    while improved:
        improved = False
        for i in range(n - 2):
            a, b = t[i], t[i + 1]
            # j runs i+2 .. n-1, except j = n-1 when i = 0 (shared node)
            j_hi = n - 1 if i == 0 else n
            js = np.arange(i + 2, j_hi)
            if js.size == 0:
                continue
            c = t[js]
            e = t[(js + 1) % n]
            delta = d[a, c] + d[b, e] - d[a, b] - d[c, e]
            hits = np.flatnonzero(delta < 0)
            if hits.size:
                j = int(js[hits[0]])
                t[i + 1 : j + 1] = t[i + 1 : j + 1][::-1]
                improved = True
    return t
