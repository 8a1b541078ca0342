"""Integer TSPLIB distances and their mapping to crossbar conductance levels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SUPPORTED_BITS = (2, 3, 4)


@dataclass(frozen=True)
class DistanceMatrix:
    d: np.ndarray  # (n, n) int64, symmetric, zero diagonal
    d_min: int  # smallest off-diagonal distance, at least 1

    def floored(self) -> np.ndarray:
        """Distances with coincident pairs raised to 1 (diagonal stays 0)."""
        d = np.maximum(self.d, 1)
        np.fill_diagonal(d, 0)
        return d

    @property
    def n(self) -> int:
        return self.d.shape[0]


@dataclass(frozen=True)
class WeightMatrix:
    w: np.ndarray  # (n, n) int64 conductance levels, zero diagonal
    bits: int

    @property
    def n(self) -> int:
        return self.w.shape[0]

    @property
    def full_scale(self) -> int:
        return (1 << self.bits) - 1


def _nint(x):
    return np.floor(x + 0.5)


def pair_distances(a: np.ndarray, b: np.ndarray, convention: str = "EUC_2D") -> np.ndarray:
    """Distances between matching rows of ``a`` and ``b`` under a TSPLIB convention.

    ``a`` and ``b`` broadcast against each other, so passing ``p[:, None]``
    and ``p[None, :]`` yields the full matrix.
    """
    dx = a[..., 0] - b[..., 0]
    dy = a[..., 1] - b[..., 1]
    sq = dx * dx + dy * dy
    if convention == "EUC_2D":
        out = _nint(np.sqrt(sq))
    elif convention == "CEIL_2D":
        out = np.ceil(np.sqrt(sq))
    elif convention == "ATT":
        r = np.sqrt(sq / 10.0)
        t = _nint(r)
        out = np.where(t < r, t + 1.0, t)
    else:
        raise ValueError(f"unsupported distance convention {convention!r}")
    return out.astype(np.int64)


def build_distance_matrix(points, convention: str = "EUC_2D") -> DistanceMatrix:
    """Full integer distance matrix of a node set.

    Coincident nodes keep distance 0 so tour lengths stay exact, but count
    as distance 1 for ``d_min`` and for the conductance mapping.
    """
    p = np.asarray(points, dtype=np.float64)
    if p.ndim != 2 or p.shape[1] != 2:
        raise ValueError(f"points must have shape (n, 2), got {p.shape}")
    n = len(p)
    if n < 2:
        raise ValueError("need at least two points")
    if not np.all(np.isfinite(p)):
        raise ValueError("non-finite coordinate")
    d = pair_distances(p[:, None, :], p[None, :, :], convention)
    np.fill_diagonal(d, 0)
    if d.max() > np.iinfo(np.int32).max:
        raise OverflowError("distance exceeds 32-bit range")
    off = ~np.eye(n, dtype=bool)
    return DistanceMatrix(d=d, d_min=max(int(d[off].min()), 1))


def quantize_weights(dm: DistanceMatrix, bits: int) -> WeightMatrix:
    """Map distances to conductance levels, shortest distance -> full scale.

    ``w = round(d_min / d * (2**bits - 1))`` clamped to ``[1, 2**bits - 1]``
    off the diagonal; rounding is half-up.  Coincident pairs count as
    distance 1.
    """
    if bits not in SUPPORTED_BITS:
        raise ValueError(f"unsupported bit width {bits}; expected one of {SUPPORTED_BITS}")
    full = (1 << bits) - 1
    n = dm.n
    d = dm.floored().astype(np.float64)
    np.fill_diagonal(d, 1.0)
    w = _nint(dm.d_min / d * full).astype(np.int64)
    w = np.clip(w, 1, full)
    w[np.arange(n), np.arange(n)] = 0
    return WeightMatrix(w=w, bits=bits)


def tour_length(tour, dm: DistanceMatrix, cyclic: bool = True) -> int:
    order = np.asarray(tour, dtype=np.int64)
    if len(order) != dm.n:
        raise ValueError(f"tour has {len(order)} nodes, matrix has {dm.n}")
    total = int(dm.d[order[:-1], order[1:]].sum())
    if cyclic and len(order) > 1:
        total += int(dm.d[order[-1], order[0]])
    return total


def tour_length_points(tour, points, convention: str = "EUC_2D", cyclic: bool = True) -> int:
    """Tour length computed edge by edge; needs no n x n matrix."""
    p = np.asarray(points, dtype=np.float64)
    order = np.asarray(tour, dtype=np.int64)
    nxt = np.roll(order, -1) if cyclic else order[1:]
    cur = order if cyclic else order[:-1]
    return int(pair_distances(p[cur], p[nxt], convention).sum())
