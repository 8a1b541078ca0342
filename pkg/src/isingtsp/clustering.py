"""Bottom-up cluster hierarchy built with Ward-linkage agglomerative clustering.

Ward's criterion for merging clusters A and B is the increase in
within-cluster sum of squares,

    delta(A, B) = |A| |B| / (|A| + |B|) * ||c_A - c_B||^2

Two interchangeable engines are provided.  ``"matrix"`` keeps the full
pairwise table and applies the Lance-Williams update after each merge,
always merging the globally smallest pair (ties: lowest member indices).
``"nnchain"`` runs the nearest-neighbour chain algorithm on centroids in
O(n) memory and cuts the resulting dendrogram; for Ward linkage both give
the same partition unless merge costs tie exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

MATRIX_ENGINE_MAX_N = 4000


@dataclass(frozen=True)
class ClusterNode:
    members: np.ndarray  # indices into the level below
    centroid: tuple[float, float]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class Hierarchy:
    """``levels[0]`` holds one singleton node per city; ``levels[-1]`` has at most ``m`` nodes."""

    levels: list[list[ClusterNode]]
    m: int

    @property
    def top(self) -> list[ClusterNode]:
        return self.levels[-1]

    def points(self, level: int) -> np.ndarray:
        return np.array([node.centroid for node in self.levels[level]], dtype=np.float64)

    def to_json(self) -> str:
        doc = {
            "m": self.m,
            "levels": [
                [
                    {"node": i, "members": node.members.tolist(), "centroid": list(node.centroid)}
                    for i, node in enumerate(level)
                ]
                for level in self.levels
            ],
        }
        return json.dumps(doc, indent=1)


def ward_delta(size_a, centroid_a, size_b, centroid_b):
    diff = np.asarray(centroid_a, dtype=np.float64) - np.asarray(centroid_b, dtype=np.float64)
    sq = np.sum(diff * diff, axis=-1)
    return size_a * size_b / (size_a + size_b) * sq


def _labels_to_clusters(labels: np.ndarray) -> list[np.ndarray]:
    # clusters ordered by their lowest member index
    order = np.argsort(labels, kind="stable")
    _, starts = np.unique(labels[order], return_index=True)
    groups = np.split(order, starts[1:])
    groups.sort(key=lambda g: g[0])
    return groups


def _ward_matrix(points: np.ndarray, k: int):
    """Greedy Ward merges with a Lance-Williams-updated cost table.

    Returns the merge list [(keep, gone, delta), ...] and final labels.
    Slot ``i`` always holds the cluster whose lowest member is ``i``.
    """
    n = len(points)
    diff = points[:, None, :] - points[None, :, :]
    cost = 0.5 * np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(cost, np.inf)
    size = np.ones(n, dtype=np.float64)
    active = np.ones(n, dtype=bool)
    labels = np.arange(n)
    rowmin = cost.min(axis=1)
    rowarg = cost.argmin(axis=1)
    merges = []
    for _ in range(n - k):
        i = int(np.argmin(rowmin))
        j = int(rowarg[i])
        if j < i:
            i, j = j, i
        delta = float(cost[i, j])
        merges.append((i, j, delta))
        si, sj = size[i], size[j]
        sc = size
        new = ((si + sc) * cost[i] + (sj + sc) * cost[j] - sc * delta) / (si + sj + sc)
        new[~active] = np.inf
        new[i] = np.inf
        new[j] = np.inf
        cost[i, :] = new
        cost[:, i] = new
        cost[j, :] = np.inf
        cost[:, j] = np.inf
        size[i] = si + sj
        active[j] = False
        labels[labels == j] = i
        rowmin[j] = np.inf
        # rows that pointed at i or j must be rescanned; the rest only see column i
        stale = np.flatnonzero(active & ((rowarg == i) | (rowarg == j)))
        stale = np.union1d(stale, [i])
        rowmin[stale] = cost[stale].min(axis=1)
        rowarg[stale] = cost[stale].argmin(axis=1)
        better = active & ((new < rowmin) | ((new == rowmin) & (i < rowarg)))
        better[i] = False
        rowmin[better] = new[better]
        rowarg[better] = i
    return merges, labels


def _ward_nnchain(points: np.ndarray):
    """Full Ward dendrogram via the nearest-neighbour chain, O(n) memory."""
    n = len(points)
    cent = points.astype(np.float64).copy()
    size = np.ones(n, dtype=np.float64)
    active = np.ones(n, dtype=bool)
    merges = []
    chain: list[int] = []
    remaining = n
    while remaining > 1:
        if not chain:
            chain.append(int(np.flatnonzero(active)[0]))
        a = chain[-1]
        costs = ward_delta(size[a], cent[a], size, cent)
        costs[~active] = np.inf
        costs[a] = np.inf
        b = int(np.argmin(costs))
        if len(chain) > 1 and costs[chain[-2]] <= costs[b]:
            b = chain[-2]
        if len(chain) > 1 and b == chain[-2]:
            chain.pop()
            chain.pop()
            keep, gone = min(a, b), max(a, b)
            merges.append((keep, gone, float(costs[b])))
            total = size[keep] + size[gone]
            cent[keep] = (size[keep] * cent[keep] + size[gone] * cent[gone]) / total
            size[keep] = total
            active[gone] = False
            remaining -= 1
            # chain entries stay valid: Ward is reducible
            chain = [c for c in chain if active[c]]
        else:
            chain.append(b)
    return merges


def _cut(merges, n: int, k: int) -> np.ndarray:
    order = sorted(range(len(merges)), key=lambda t: merges[t][2])  # stable on ties
    parent = np.arange(n)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t in order[: n - k]:
        keep, gone, _ = merges[t]
        ra, rb = find(keep), find(gone)
        parent[max(ra, rb)] = min(ra, rb)
    return np.array([find(i) for i in range(n)])


def agglomerative_ward(points, k: int, engine: str = "auto") -> list[np.ndarray]:
    """Partition ``points`` into ``k`` Ward clusters, each an array of point indices."""
    p = np.asarray(points, dtype=np.float64)
    n = len(p)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    if engine == "auto":
        engine = "matrix" if n <= MATRIX_ENGINE_MAX_N else "nnchain"
    if k == n:
        return [np.array([i]) for i in range(n)]
    if engine == "matrix":
        _, labels = _ward_matrix(p, k)
    elif engine == "nnchain":
        labels = _cut(_ward_nnchain(p), n, k)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return _labels_to_clusters(labels)


def ward_merge_sequence(points, k: int, engine: str = "matrix"):
    """The (lower slot, upper slot, delta) merges performed to reach ``k`` clusters."""
    p = np.asarray(points, dtype=np.float64)
    if engine == "matrix":
        return _ward_matrix(p, k)[0]
    merges = _ward_nnchain(p)
    return sorted(merges, key=lambda t: t[2])[: len(p) - k]


def _bounded_clusters(points: np.ndarray, m: int, engine: str) -> list[np.ndarray]:
    n = len(points)
    clusters = agglomerative_ward(points, math.ceil(n / m), engine)
    out = []
    for c in clusters:
        if len(c) <= m:
            out.append(c)
        else:
            # Ward does not bound cluster size; re-split oversize clusters
            for sub in _bounded_clusters(points[c], m, engine):
                out.append(c[sub])
    out.sort(key=lambda g: g.min())
    return [np.sort(g) for g in out]


def build_hierarchy(points, m: int, engine: str = "auto") -> Hierarchy:
    """Cluster levels bottom-up until a level has at most ``m`` nodes."""
    if m < 3:
        raise ValueError(f"max cluster size must be >= 3, got {m}")
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) < 1:
        raise ValueError("no points")
    levels = [[ClusterNode(np.array([i]), (float(x), float(y))) for i, (x, y) in enumerate(pts)]]
    while len(pts) > m:
        groups = _bounded_clusters(pts, m, engine)
        nodes = []
        for g in groups:
            c = pts[g].mean(axis=0)
            nodes.append(ClusterNode(g, (float(c[0]), float(c[1]))))
        levels.append(nodes)
        pts = np.array([node.centroid for node in nodes])
    return Hierarchy(levels=levels, m=m)
