"""Top-down hierarchical solve: one macro per cluster, endpoints fixed between clusters."""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .clustering import Hierarchy, build_hierarchy
from .distance import build_distance_matrix, quantize_weights, tour_length_points
from .macro import (
    CYCLE,
    DEFAULT_SCHEDULE,
    PATH,
    AnnealSchedule,
    MacroState,
    SpinStorage,
    anneal,
    macro_rng,
)
from .tsplib import validate_tour

EXACT_MAX_SIZE = 3


class EndpointMismatchError(ValueError):
    pass


@dataclass
class SubProblem:
    node_ids: np.ndarray
    points: np.ndarray
    mode: str = PATH
    entry: int | None = None
    exit: int | None = None
    key: tuple = ()

    def __post_init__(self):
        self.node_ids = np.asarray(self.node_ids, dtype=np.int64)
        self.points = np.asarray(self.points, dtype=np.float64)
        if len(self.node_ids) != len(self.points):
            raise ValueError("node_ids and points differ in length")
        if self.mode == PATH:
            if self.entry is None or self.exit is None:
                raise ValueError("path sub-problem needs entry and exit")
            if len(self.node_ids) >= 2 and self.entry == self.exit:
                raise ValueError("entry and exit must differ")


@dataclass
class SubResult:
    tour: np.ndarray  # node ids
    order_updates: int = 0
    sweeps: int = 0
    trace: list | None = None


@dataclass
class SolveConfig:
    m: int = 12
    bits: int = 4
    seed: int = 0
    max_parallel: int = 1
    leak: float = 0.0
    convention: str = "EUC_2D"
    schedule: AnnealSchedule = DEFAULT_SCHEDULE
    record_anneal: bool = False
    repair: str = "swap"


@dataclass
class LevelTrace:
    level: int  # level whose nodes are being ordered
    clusters: int
    annealed: int
    order_updates: list[int]
    sweeps: list[int]
    boundary_start: int | None = None


@dataclass
class SolveTrace:
    levels: list[LevelTrace] = field(default_factory=list)
    phase_times: dict[str, float] = field(
        default_factory=lambda: {"clustering": 0.0, "fixing": 0.0, "annealing": 0.0, "merging": 0.0}
    )
    tour_length: int | None = None
    anneal_rows: list[tuple] = field(default_factory=list)


def fix_endpoints(parent_order, members, points) -> dict[int, tuple[int, int]]:
    """Entry and exit node of every cluster along a cyclic cluster order.

    ``members[c]`` lists the child nodes of cluster ``c``; ``points`` holds
    child-node coordinates.  Boundaries are fixed in tour order starting at
    ``parent_order[0]``; for each boundary the closest child pair is taken,
    never reusing a cluster's entry as its exit (or vice versa) when the
    cluster has more than one member.
    """
    pts = np.asarray(points, dtype=np.float64)
    order = [int(c) for c in parent_order]
    k = len(order)
    entry: dict[int, int] = {}
    exit_: dict[int, int] = {}
    for c in order:
        if len(members[c]) == 1:
            entry[c] = exit_[c] = int(members[c][0])
    if k == 1:
        c = order[0]
        return {c: (entry.get(c, int(members[c][0])), exit_.get(c, int(members[c][-1])))}
    for idx in range(k):
        a, b = order[idx], order[(idx + 1) % k]
        xs = np.asarray(members[a])
        ys = np.asarray(members[b])
        diff = pts[xs][:, None, :] - pts[ys][None, :, :]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        if len(xs) > 1 and a in entry:
            dist[xs == entry[a], :] = np.inf
        if len(ys) > 1 and b in exit_:
            dist[:, ys == exit_[b]] = np.inf
        i, j = np.unravel_index(int(np.argmin(dist)), dist.shape)
        exit_[a] = int(xs[i])
        entry[b] = int(ys[j])
    return {c: (entry[c], exit_[c]) for c in order}


def _exact_small(sp: SubProblem) -> np.ndarray:
    ids = sp.node_ids.tolist()
    if sp.mode == CYCLE or len(ids) <= 1:
        return np.array(ids, dtype=np.int64)
    middle = [c for c in ids if c not in (sp.entry, sp.exit)]
    return np.array([sp.entry, *middle, sp.exit], dtype=np.int64)


def solve_subproblem(sp: SubProblem, cfg: SolveConfig) -> SubResult:
    """Solve one cluster on its own macro; tiny clusters are solved directly."""
    n = len(sp.node_ids)
    if n <= EXACT_MAX_SIZE:
        return SubResult(_exact_small(sp))
    dm = build_distance_matrix(sp.points, cfg.convention)
    weights = quantize_weights(dm, cfg.bits)
    local = {int(v): i for i, v in enumerate(sp.node_ids)}
    if sp.mode == PATH:
        spins = SpinStorage.initial(n, PATH, local[sp.entry], local[sp.exit])
    else:
        spins = SpinStorage.initial(n, CYCLE)
    state = MacroState(weights, spins, macro_rng(cfg.seed, sp.key), cfg.schedule, leak=cfg.leak, repair=cfg.repair)
    res = anneal(state, dm if cfg.record_anneal else None)
    return SubResult(sp.node_ids[res.tour], res.order_updates, res.sweeps, res.trace)


def merge_tours(parent_order, child_tours, endpoints=None) -> np.ndarray:
    """Concatenate child paths in parent order, checking fixed endpoints if given."""
    parts = []
    for c in parent_order:
        path = np.asarray(child_tours[int(c)], dtype=np.int64)
        if endpoints is not None:
            entry, exit_ = endpoints[int(c)]
            if path[0] != entry or path[-1] != exit_:
                raise EndpointMismatchError(
                    f"cluster {c}: path runs {path[0]}->{path[-1]}, expected {entry}->{exit_}"
                )
        parts.append(path)
    merged = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
    if len(np.unique(merged)) != len(merged):
        raise EndpointMismatchError("child tours overlap")
    return merged


def _run_all(subproblems, cfg: SolveConfig) -> list[SubResult]:
    if cfg.max_parallel <= 1 or len(subproblems) <= 1:
        return [solve_subproblem(sp, cfg) for sp in subproblems]
    with ThreadPoolExecutor(max_workers=cfg.max_parallel) as pool:
        return list(pool.map(lambda sp: solve_subproblem(sp, cfg), subproblems))


def _collect(trace: SolveTrace, level: int, subproblems, results, boundary_start=None):
    ups = [r.order_updates for r in results]
    trace.levels.append(
        LevelTrace(
            level=level,
            clusters=len(results),
            annealed=sum(1 for u in ups if u > 0),
            order_updates=ups,
            sweeps=[r.sweeps for r in results],
            boundary_start=boundary_start,
        )
    )
    for sp, r in zip(subproblems, results):
        if r.trace:
            trace.anneal_rows.extend((*sp.key, *row) for row in r.trace)


def solve_hierarchical(points, cfg: SolveConfig | None = None, hierarchy: Hierarchy | None = None):
    """Solve a 2-D TSP; returns ``(tour, trace)`` with ``tour`` a permutation of city indices."""
    cfg = cfg or SolveConfig()
    if cfg.m < 4:
        raise ValueError(f"max cluster size must be >= 4, got {cfg.m}")
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) < 3:
        raise ValueError(f"need at least 3 cities to solve, got {len(pts)}")
    trace = SolveTrace()

    t0 = time.perf_counter()
    if hierarchy is None:
        hierarchy = build_hierarchy(pts, cfg.m)
    trace.phase_times["clustering"] += time.perf_counter() - t0

    top = len(hierarchy.levels) - 1
    top_pts = hierarchy.points(top)
    t0 = time.perf_counter()
    sp = SubProblem(np.arange(len(top_pts)), top_pts, CYCLE, key=(top, 0))
    (res,) = _run_all([sp], cfg)
    trace.phase_times["annealing"] += time.perf_counter() - t0
    _collect(trace, top, [sp], [res])
    order = res.tour

    for level in range(top, 0, -1):
        nodes = hierarchy.levels[level]
        child_pts = hierarchy.points(level - 1)
        members = [node.members for node in nodes]

        t0 = time.perf_counter()
        ends = fix_endpoints(order, members, child_pts)
        trace.phase_times["fixing"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        subs = [
            SubProblem(members[c], child_pts[members[c]], PATH, *ends[c], key=(level - 1, c))
            for c in range(len(nodes))
        ]
        results = _run_all(subs, cfg)
        trace.phase_times["annealing"] += time.perf_counter() - t0
        _collect(trace, level - 1, subs, results, boundary_start=int(order[0]))

        t0 = time.perf_counter()
        order = merge_tours(order, {c: r.tour for c, r in enumerate(results)}, ends)
        trace.phase_times["merging"] += time.perf_counter() - t0

    tour = validate_tour(order, len(pts))
    trace.tour_length = tour_length_points(tour, pts, cfg.convention)
    return tour, trace


def default_parallelism() -> int:
    return os.cpu_count() or 1
