"""
Hierarchical solve of 1000 random cities
========================================

Clusters the cities into macro-sized groups, solves the levels top-down and
compares the tour with greedy and 2-opt baselines.  Finishes with the
latency and energy the macro workload would take on chip.
"""

import time

import numpy as np

from isingtsp.clustering import build_hierarchy
from isingtsp.costmodel import estimate
from isingtsp.distance import build_distance_matrix, tour_length
from isingtsp.oracle import nearest_neighbor, two_opt
from isingtsp.solver import SolveConfig, solve_hierarchical

points = np.random.default_rng(2024).uniform(0, 10_000, (1000, 2))

hierarchy = build_hierarchy(points, m=12)
print("nodes per level:", [len(level) for level in hierarchy.levels])

t0 = time.perf_counter()
tour, trace = solve_hierarchical(points, SolveConfig(m=12, bits=4, seed=0), hierarchy)
print(f"macro tour length {trace.tour_length}  ({time.perf_counter() - t0:.2f}s)")
for lv in trace.levels:
    print(f"  level {lv.level}: {lv.clusters} clusters, {lv.annealed} annealed, {sum(lv.order_updates)} updates")

dm = build_distance_matrix(points)
nn = nearest_neighbor(dm, 0)
print("nearest neighbour", tour_length(nn, dm))
print("2-opt from it    ", tour_length(two_opt(dm, nn), dm))

# same workload with a second read that rejects conductance-losing swaps
_, descent = solve_hierarchical(points, SolveConfig(seed=0, repair="descent"), hierarchy)
print("descent repair   ", descent.tour_length)

widest = max(lv.clusters for lv in trace.levels)
report = estimate(trace, bits=4, n_macros=widest)
print(f"\n{widest} macros: {report.macro_latency_ns / 1e3:.1f} us, {report.macro_energy_pj / 1e6:.2f} uJ on chip")
print("host phases (s):", {k: round(v, 3) for k, v in report.host_times_s.items()})
print("not modeled:", report.unmodeled)
